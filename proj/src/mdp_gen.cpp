#include "tensorrl/mdp_gen.hpp"

#include "tensorrl/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tensorrl {

void GenConfig::validate() const {
    if (shape.empty()) throw std::invalid_argument("generator shape must have at least one mode");
    if (rank < 1) throw std::invalid_argument("generator rank must be at least 1");
    if (!weights.empty() && weights.size() != rank)
        throw std::invalid_argument("generator needs one weight per component");
    if (!(normalize_tolerance > 0.0)) throw std::invalid_argument("normalize tolerance must be positive");
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.back() = b;
    return out;
}

CPForm generate_cp(const GenConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const std::size_t n = cfg.shape.size();
    // Draw order: mode-major, component-minor.
    std::vector<std::vector<std::vector<double>>> u(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < cfg.rank; ++l) u[i].push_back(random_unit_vector(cfg.shape[i], rng));

    CPForm cp(cfg.shape);
    std::vector<std::vector<double>> fs(n);
    for (std::size_t l = 0; l < cfg.rank; ++l) {
        for (std::size_t i = 0; i < n; ++i) fs[i] = u[i][l];
        cp.add_component(cfg.weights.empty() ? 1.0 : cfg.weights[l], fs);
    }
    return cp;
}

DenseTensor generate_tensor(const GenConfig& cfg) { return reconstruct(generate_cp(cfg)); }

DenseTensor normalize_transition(const DenseTensor& t) {
    if (t.order() == 0) throw ShapeError("normalize_transition needs at least one mode");
    DenseTensor out = t;
    const std::size_t d = t.shape().back();
    const double uniform = 1.0 / static_cast<double>(d);
    for (std::size_t off = 0; off < out.size(); off += d) {
        double* p = out.data() + off;
        double sum = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (!(p[i] > 0.0)) p[i] = 0.0;  // also maps NaN to zero
            sum += p[i];
        }
        if (sum > 0.0 && std::isfinite(sum)) {
            for (std::size_t i = 0; i < d; ++i) p[i] /= sum;
        } else {
            std::fill(p, p + d, uniform);
        }
    }
    return out;
}

DenseTensor generate_transition_tensor(const GenConfig& cfg, std::size_t* iterations) {
    cfg.validate();
    DenseTensor t = generate_tensor(cfg);
    DenseTensor normalized = normalize_transition(t);
    double residual = frobenius_distance(normalized, t);
    std::size_t it = 0;
    CPForm cp;
    while (residual > cfg.normalize_tolerance) {
        if (it >= cfg.max_normalize_iters)
            throw NotConvergedError("transition generation did not converge after " + std::to_string(it) +
                                        " iterations (residual " + std::to_string(residual) + ")",
                                    residual);
        DecompConfig dc = cfg.decomp;
        dc.rank = 2 * cfg.rank;
        dc.seed = derive_seed(cfg.seed, {0x7472616eULL, it});
        if (cfg.warm_start && it > 0) {
            Rng rng(dc.seed);
            std::vector<std::vector<double>> u(cfg.shape.size());
            for (std::size_t k = 0; k < cfg.rank; ++k) {
                for (std::size_t j = 0; j < u.size(); ++j) u[j] = random_unit_vector(cfg.shape[j], rng);
                cp.add_component(0.0, u);
            }
            cp = truncate(alternating_minimization(normalized, std::move(cp), dc), cfg.rank);
        } else {
            cp = truncate(decompose(normalized, dc), cfg.rank);
        }
        t = reconstruct(cp);
        normalized = normalize_transition(t);
        residual = frobenius_distance(normalized, t);
        ++it;
    }
    if (iterations) *iterations = it;
    return normalized;
}

GeneratorSettings experiment1_generator_settings() {
    GeneratorSettings s;
    s.normalize_tolerance = 0.25;
    s.max_normalize_iters = 100;
    s.decomp.power_max_iters = 100;
    s.decomp.altmin_max_sweeps = 5;
    return s;
}

namespace {

GenConfig transition_config(const Shape& shape, std::size_t rank, std::uint64_t seed,
                            const GeneratorSettings& settings) {
    GenConfig c;
    c.shape = shape;
    c.rank = rank;
    c.seed = seed;
    c.normalize_tolerance = settings.normalize_tolerance;
    c.max_normalize_iters = settings.max_normalize_iters;
    c.decomp = settings.decomp;
    return c;
}

} // namespace

TabularMDP build_experiment1_mdp(std::uint64_t seed, double discount, const Experiment1Layout& layout,
                                 const GeneratorSettings& settings) {
    DenseTensor transition = generate_transition_tensor(
        transition_config(transition_shape(layout.n_states, layout.action_sizes), layout.rank, derive_seed(seed, {1}),
                          settings));

    GenConfig rcfg;
    rcfg.shape = state_action_shape(layout.n_states, layout.action_sizes);
    rcfg.rank = layout.rank;
    rcfg.weights = linspace(0.1, 1.0, layout.rank);
    rcfg.seed = derive_seed(seed, {2});
    DenseTensor reward = generate_tensor(rcfg);

    return TabularMDP(layout.n_states, layout.action_sizes, std::move(transition), std::move(reward), discount);
}

TabularMDP build_degenerate_mdp(std::uint64_t seed, double discount, const DegenerateLayout& layout,
                                const GeneratorSettings& settings) {
    const std::size_t S = layout.n_groups * layout.states_per_group;
    const std::size_t A = element_count(layout.action_sizes);
    DenseTensor transition(transition_shape(S, layout.action_sizes));
    DenseTensor reward(state_action_shape(S, layout.action_sizes));

    for (std::size_t g = 0; g < layout.n_groups; ++g) {
        Shape group_shape = transition_shape(1, layout.action_sizes);
        group_shape.back() = S;
        const DenseTensor tg = generate_transition_tensor(transition_config(group_shape, 1, derive_seed(seed, {10, g}), settings));

        GenConfig rcfg;
        rcfg.shape = layout.action_sizes;
        rcfg.rank = 1;
        rcfg.seed = derive_seed(seed, {20, g});
        const DenseTensor rg = generate_tensor(rcfg);

        for (std::size_t i = 0; i < layout.states_per_group; ++i) {
            const std::size_t s = g * layout.states_per_group + i;
            std::copy(tg.values().begin(), tg.values().end(), transition.data() + s * A * S);
            std::copy(rg.values().begin(), rg.values().end(), reward.data() + s * A);
        }
    }
    return TabularMDP(S, layout.action_sizes, std::move(transition), std::move(reward), discount);
}

} // namespace tensorrl
