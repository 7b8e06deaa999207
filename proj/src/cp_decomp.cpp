#include "tensorrl/cp_decomp.hpp"

#include <cmath>
#include <string>

namespace tensorrl {

void DecompConfig::validate() const {
    if (rank < 1) throw std::invalid_argument("decomposition rank must be at least 1");
    if (!(power_tolerance > 0.0) || !(altmin_tolerance > 0.0))
        throw std::invalid_argument("decomposition tolerances must be positive");
    if (power_max_iters < 1 || altmin_max_sweeps < 1)
        throw std::invalid_argument("decomposition iteration caps must be at least 1");
}

std::vector<double> random_unit_vector(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    double nrm = 0.0;
    // A draw of exactly zero has probability zero; loop anyway.
    while (!(nrm > 0.0)) {
        for (auto& x : v) x = normal(rng);
        nrm = norm2(v);
    }
    for (auto& x : v) x /= nrm;
    return v;
}

namespace {

std::vector<ModeArg> vector_args(const std::vector<std::vector<double>>& u) {
    std::vector<ModeArg> args;
    args.reserve(u.size());
    for (const auto& v : u) args.emplace_back(v);
    return args;
}

double full_contraction(const DenseTensor& t, const std::vector<std::vector<double>>& u) {
    const auto args = vector_args(u);
    double out = 0.0;
    contract_into(t, args, std::span<double>(&out, 1));
    return out;
}

void check_input(const DenseTensor& t) {
    if (t.order() == 0) throw ShapeError("decomposition requires a tensor of order at least 1");
    if (!t.all_finite()) throw std::invalid_argument("decomposition input contains non-finite entries");
}

// Runs simultaneous power updates from the given start. Returns false if a
// contraction vanished, leaving `u` unspecified.
bool power_iterate(const DenseTensor& residual, std::vector<std::vector<double>>& u, const DecompConfig& cfg) {
    const std::size_t n = residual.order();
    std::vector<std::vector<double>> next(n);
    std::vector<std::span<const double>> spans(n);
    for (std::size_t m = 0; m < cfg.power_max_iters; ++m) {
        for (std::size_t j = 0; j < n; ++j) spans[j] = u[j];
        contract_each_mode(residual, spans, next);
        for (std::size_t j = 0; j < n; ++j) {
            const double nrm = norm2(next[j]);
            if (!(nrm > 0.0) || !std::isfinite(nrm)) return false;
            for (auto& x : next[j]) x /= nrm;
        }
        double change = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < u[j].size(); ++i) {
                const double d = next[j][i] - u[j][i];
                change += d * d;
            }
        std::swap(u, next);
        if (change <= cfg.power_tolerance) break;
    }
    return true;
}

} // namespace

CPForm power_iteration_deflation(const DenseTensor& t, const DecompConfig& cfg) {
    cfg.validate();
    check_input(t);
    Rng rng(cfg.seed);
    const std::size_t n = t.order();

    DenseTensor residual = t;
    CPForm cp(t.shape());
    std::vector<std::vector<double>> u(n);
    std::vector<std::span<const double>> spans(n);

    for (std::size_t k = 0; k < cfg.rank; ++k) {
        for (std::size_t j = 0; j < n; ++j) u[j] = random_unit_vector(t.dim(j), rng);
        if (k > 0 && residual.squared_norm() == 0.0) {
            // Exhausted: the remaining components carry zero weight.
            cp.add_component(0.0, u);
            continue;
        }
        std::size_t restarts = 0;
        while (!power_iterate(residual, u, cfg)) {
            if (++restarts > cfg.max_restarts)
                throw DegenerateTensorError("power iteration: contraction vanished for component " +
                                            std::to_string(k) + " after " + std::to_string(cfg.max_restarts) +
                                            " restarts");
            for (std::size_t j = 0; j < n; ++j) u[j] = random_unit_vector(t.dim(j), rng);
        }
        const double w = full_contraction(residual, u);
        cp.add_component(w, u);
        for (std::size_t j = 0; j < n; ++j) spans[j] = u[j];
        add_outer(residual, -w, spans);
    }
    return cp;
}

CPForm alternating_minimization(const DenseTensor& t, CPForm cp, const DecompConfig& cfg, SweepTrace* trace) {
    cfg.validate();
    check_input(t);
    if (cp.dims() != t.shape())
        throw ShapeError("alternating_minimization: initial CP dims " + shape_to_string(cp.dims()) +
                         " do not match tensor " + shape_to_string(t.shape()));
    const std::size_t n = t.order();
    const std::size_t r = cp.rank();

    double objective = frobenius_distance(t, reconstruct(cp));
    if (trace) {
        trace->objective.assign(1, objective);
        trace->accepted_sweeps = 0;
    }
    if (r == 0) return cp;

    std::vector<double> v;
    for (std::size_t sweep = 0; sweep < cfg.altmin_max_sweeps; ++sweep) {
        if (objective == 0.0) break;
        CPForm previous = cp;
        for (std::size_t l = 0; l < r; ++l) {
            for (std::size_t j = 0; j < n; ++j) {
                // (T - sum_{k != l} w_k u_k^1 (x) ... )(u_l^1, .., I, .., u_l^n), with the
                // other components contracted analytically through their Gram products.
                v.resize(t.dim(j));
                contract_into(t, cp.mode_args(l, j), v);
                for (std::size_t k = 0; k < r; ++k) {
                    if (k == l) continue;
                    double c = cp.weight(k);
                    for (std::size_t i = 0; i < n && c != 0.0; ++i)
                        if (i != j) c *= dot(cp.factor(k, i), cp.factor(l, i));
                    if (c == 0.0) continue;
                    const auto uk = cp.factor(k, j);
                    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * uk[i];
                }
                const double nrm = norm2(v);
                if (!(nrm > 0.0) || !std::isfinite(nrm)) continue;  // keep previous u_l^j
                auto ul = cp.factor(l, j);
                for (std::size_t i = 0; i < v.size(); ++i) ul[i] = v[i] / nrm;
            }
            double w = 0.0;
            {
                const auto args = cp.mode_args(l);
                contract_into(t, args, std::span<double>(&w, 1));
            }
            for (std::size_t k = 0; k < r; ++k) {
                if (k == l) continue;
                double c = cp.weight(k);
                for (std::size_t i = 0; i < n && c != 0.0; ++i) c *= dot(cp.factor(k, i), cp.factor(l, i));
                w -= c;
            }
            if (std::isfinite(w)) cp.set_weight(l, w);
        }
        const double updated = frobenius_distance(t, reconstruct(cp));
        if (trace) trace->objective.push_back(updated);
        if (!(updated <= objective)) {
            cp = std::move(previous);
            break;
        }
        if (trace) ++trace->accepted_sweeps;
        const double improvement = objective - updated;
        const double before = objective;
        objective = updated;
        if (improvement <= cfg.altmin_tolerance * before) break;
    }
    return cp;
}

CPForm decompose(const DenseTensor& t, const DecompConfig& cfg, SweepTrace* trace) {
    return alternating_minimization(t, power_iteration_deflation(t, cfg), cfg, trace);
}

} // namespace tensorrl
