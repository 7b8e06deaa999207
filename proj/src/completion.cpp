#include "tensorrl/completion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace tensorrl {

ObservationMask::ObservationMask(DenseTensor values) : values_(std::move(values)) {
    for (double v : values_.values()) {
        if (v == 1.0)
            ++observed_;
        else if (v != 0.0)
            throw std::invalid_argument("observation mask entries must be exactly 0 or 1");
    }
}

ObservationMask ObservationMask::full(const Shape& shape) { return ObservationMask(DenseTensor(shape, 1.0)); }

namespace {

void check_inputs(const DenseTensor& observed, const ObservationMask& mask) {
    if (observed.shape() != mask.shape())
        throw ShapeError("completion: mask shape " + shape_to_string(mask.shape()) + " does not match tensor " +
                         shape_to_string(observed.shape()));
    if (observed.order() == 0) throw ShapeError("completion requires a tensor of order at least 1");
    if (mask.observed_count() == 0) throw std::invalid_argument("completion: mask has no observed entries");
    for (std::size_t i = 0; i < observed.size(); ++i)
        if (mask.observed(i) && !std::isfinite(observed[i]))
            throw std::invalid_argument("completion: observed entries must be finite");
}

// Omega . T with unobserved entries forced to zero (they may hold anything).
DenseTensor zero_filled(const DenseTensor& observed, const ObservationMask& mask) {
    DenseTensor out(observed.shape());
    for (std::size_t i = 0; i < out.size(); ++i)
        if (mask.observed(i)) out[i] = observed[i];
    return out;
}

// Omega . (T - reconstruct(cp))
DenseTensor masked_residual(const DenseTensor& masked, const ObservationMask& mask, const CPForm& cp) {
    DenseTensor e = reconstruct(cp);
    const auto& m = mask.values();
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = masked[i] - m[i] * e[i];
    return e;
}

} // namespace

double masked_objective(const DenseTensor& t, const ObservationMask& mask, const CPForm& cp) {
    if (t.shape() != mask.shape()) throw ShapeError("masked_objective: mask shape mismatch");
    return masked_residual(zero_filled(t, mask), mask, cp).norm();
}

namespace {

// Observed entries in coordinate form: index[o * n + j] is the mode-j index of
// observation o.
struct Observations {
    std::size_t n = 0;
    std::vector<std::uint32_t> index;
    std::vector<double> value;
    std::size_t size() const noexcept { return value.size(); }
};

Observations gather(const DenseTensor& observed, const ObservationMask& mask) {
    Observations obs;
    obs.n = observed.order();
    obs.value.reserve(mask.observed_count());
    obs.index.reserve(mask.observed_count() * obs.n);
    const auto& strides = observed.strides();
    for (std::size_t flat = 0; flat < observed.size(); ++flat) {
        if (!mask.observed(flat)) continue;
        obs.value.push_back(observed[flat]);
        std::size_t rest = flat;
        for (std::size_t j = 0; j < obs.n; ++j) {
            obs.index.push_back(static_cast<std::uint32_t>(rest / strides[j]));
            rest %= strides[j];
        }
    }
    return obs;
}

double component_at(const CPForm& cp, std::size_t k, const std::uint32_t* idx) {
    double p = cp.weight(k);
    for (std::size_t j = 0; j < cp.order(); ++j) p *= cp.factor(k, j)[idx[j]];
    return p;
}

// e[o] = T[o] - sum_k w_k prod_j u_k^j[i_j] over the observed entries.
void observed_residual(const Observations& obs, const CPForm& cp, std::vector<double>& e) {
    e.assign(obs.value.begin(), obs.value.end());
    for (std::size_t o = 0; o < obs.size(); ++o) {
        const std::uint32_t* idx = obs.index.data() + o * obs.n;
        for (std::size_t k = 0; k < cp.rank(); ++k) e[o] -= component_at(cp, k, idx);
    }
}

} // namespace

CPForm masked_alternating_minimization(const DenseTensor& observed, const ObservationMask& mask, CPForm cp,
                                       const DecompConfig& cfg, const CompletionOptions& options,
                                       SweepTrace* trace) {
    cfg.validate();
    check_inputs(observed, mask);
    if (cp.dims() != observed.shape()) throw ShapeError("completion: initial CP dims do not match tensor");

    const std::size_t n = observed.order();
    const std::size_t r = cp.rank();
    const double guard = options.denominator_guard;
    const Observations obs = gather(observed, mask);
    const std::size_t count = obs.size();

    auto clamp_weight = [&](double w) {
        if (options.max_abs_weight) w = std::clamp(w, -*options.max_abs_weight, *options.max_abs_weight);
        return w;
    };
    for (std::size_t l = 0; l < r; ++l) cp.set_weight(l, clamp_weight(cp.weight(l)));

    std::vector<double> e;
    observed_residual(obs, cp, e);
    double objective = norm2(e);
    if (trace) {
        trace->objective.assign(1, objective);
        trace->accepted_sweeps = 0;
    }
    if (r == 0) return cp;

    // partial = Omega . (T - sum_{k != l} w_k u_k^1 (x) ... (x) u_k^n), observed entries only
    std::vector<double> partial(count);
    std::vector<std::span<double>> u(n);
    std::vector<double> num, den, p;

    for (std::size_t sweep = 0; sweep < cfg.altmin_max_sweeps; ++sweep) {
        if (objective == 0.0) break;
        CPForm previous = cp;
        for (std::size_t l = 0; l < r; ++l) {
            for (std::size_t o = 0; o < count; ++o)
                partial[o] = e[o] + component_at(cp, l, obs.index.data() + o * n);
            for (std::size_t j = 0; j < n; ++j) u[j] = cp.factor(l, j);

            // Scale carried by the current factors; u_l^j below is solved in
            // this scale and then renormalized.
            double implied_weight = cp.weight(l);
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t d = observed.dim(j);
                num.assign(d, 0.0);
                den.assign(d, 0.0);
                for (std::size_t o = 0; o < count; ++o) {
                    const std::uint32_t* idx = obs.index.data() + o * n;
                    double prod = 1.0;
                    for (std::size_t i = 0; i < n; ++i)
                        if (i != j) prod *= u[i][idx[i]];
                    num[idx[j]] += partial[o] * prod;
                    den[idx[j]] += prod * prod;
                }
                p.resize(d);
                for (std::size_t i = 0; i < d; ++i) p[i] = den[i] > guard ? num[i] / den[i] : implied_weight * u[j][i];
                const double nrm = norm2(p);
                if (!(nrm > 0.0) || !std::isfinite(nrm)) continue;
                for (std::size_t i = 0; i < d; ++i) u[j][i] = p[i] / nrm;
                implied_weight = nrm;
            }

            double wnum = 0.0;
            double wden = 0.0;
            for (std::size_t o = 0; o < count; ++o) {
                const std::uint32_t* idx = obs.index.data() + o * n;
                double prod = 1.0;
                for (std::size_t i = 0; i < n; ++i) prod *= u[i][idx[i]];
                wnum += partial[o] * prod;
                wden += prod * prod;
            }
            const double w = wden > guard ? wnum / wden : implied_weight;
            if (std::isfinite(w)) cp.set_weight(l, clamp_weight(w));

            for (std::size_t o = 0; o < count; ++o)
                e[o] = partial[o] - component_at(cp, l, obs.index.data() + o * n);
        }
        observed_residual(obs, cp, e);
        const double updated = norm2(e);
        if (trace) trace->objective.push_back(updated);
        if (!(updated <= objective)) {
            cp = std::move(previous);
            break;
        }
        if (trace) ++trace->accepted_sweeps;
        const double before = objective;
        objective = updated;
        if (before - updated <= cfg.altmin_tolerance * before) break;
    }
    return cp;
}

CPForm complete(const DenseTensor& observed, const ObservationMask& mask, const DecompConfig& cfg,
                const CompletionOptions& options, SweepTrace* trace) {
    cfg.validate();
    check_inputs(observed, mask);
    if (mask.is_full() && !options.max_abs_weight) return decompose(observed, cfg, trace);

    const DenseTensor masked = zero_filled(observed, mask);
    if (masked.squared_norm() == 0.0) {
        // Every observation is zero: the zero tensor is an exact fit.
        Rng rng(cfg.seed);
        CPForm cp(observed.shape());
        std::vector<std::vector<double>> u(observed.order());
        for (std::size_t k = 0; k < cfg.rank; ++k) {
            for (std::size_t j = 0; j < u.size(); ++j) u[j] = random_unit_vector(observed.dim(j), rng);
            cp.add_component(0.0, u);
        }
        if (trace) {
            trace->objective.assign(1, 0.0);
            trace->accepted_sweeps = 0;
        }
        return cp;
    }
    return masked_alternating_minimization(observed, mask, power_iteration_deflation(masked, cfg), cfg, options,
                                           trace);
}

} // namespace tensorrl
