#include "tensorrl/agents.hpp"

#include "tensorrl/mdp_gen.hpp"
#include "tensorrl/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tensorrl {

ExperienceStore::ExperienceStore(std::size_t n_states, std::vector<std::size_t> action_sizes)
    : n_states_(n_states),
      action_sizes_(std::move(action_sizes)),
      joint_actions_(element_count(action_sizes_)),
      counts_(transition_shape(n_states_, action_sizes_)),
      rewards_(state_action_shape(n_states_, action_sizes_)),
      mask_(state_action_shape(n_states_, action_sizes_)) {
    if (n_states_ == 0 || action_sizes_.empty()) throw std::invalid_argument("experience store needs states and agents");
}

void ExperienceStore::record(std::size_t s, std::size_t a, double r, std::size_t s_next) {
    if (s >= n_states_ || s_next >= n_states_ || a >= joint_actions_)
        throw std::out_of_range("record: index out of range");
    if (!std::isfinite(r)) throw std::invalid_argument("record: reward must be finite");
    const std::size_t sa = s * joint_actions_ + a;
    counts_[sa * n_states_ + s_next] += 1.0;
    rewards_[sa] = r;
    if (mask_[sa] == 0.0) {
        mask_[sa] = 1.0;
        ++unique_;
    }
    ++total_;
}

DenseTensor normalize_counts(const DenseTensor& counts) {
    if (counts.order() == 0) throw ShapeError("normalize_counts needs at least one mode");
    for (double c : counts.values())
        if (!(c >= 0.0)) throw std::invalid_argument("counts must be non-negative");
    return normalize_transition(counts);
}

DenseTensor renormalize(const DenseTensor& estimate) { return normalize_transition(estimate); }

void AgentConfig::validate() const {
    if (kind != AgentKind::baseline && (transition_rank < 1 || reward_rank < 1))
        throw std::invalid_argument("decomposition agents need ranks of at least 1");
}

std::string AgentConfig::label() const {
    switch (kind) {
    case AgentKind::baseline:
        return "baseline";
    case AgentKind::full_cp:
        if (transition_rank == reward_rank) return "full-cp-" + std::to_string(transition_rank);
        return "full-cp-" + std::to_string(transition_rank) + "-" + std::to_string(reward_rank);
    case AgentKind::tesseract:
        if (transition_rank == reward_rank) return "tesseract-" + std::to_string(transition_rank);
        return "tesseract-" + std::to_string(transition_rank) + "-" + std::to_string(reward_rank);
    }
    return "unknown";
}

std::size_t transition_parameter_count(const AgentConfig& cfg, std::size_t n_states,
                                       const std::vector<std::size_t>& action_sizes) {
    std::size_t action_dims = 0;
    for (std::size_t a : action_sizes) action_dims += a;
    switch (cfg.kind) {
    case AgentKind::baseline:
        return n_states * element_count(action_sizes) * n_states;
    case AgentKind::full_cp:
        return cfg.transition_rank * (2 * n_states + action_dims);
    case AgentKind::tesseract:
        return n_states * n_states * cfg.transition_rank * action_dims;
    }
    return 0;
}

namespace {

std::size_t sanitize(DenseTensor& t) {
    std::size_t bad = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::isfinite(t[i])) {
            t[i] = 0.0;
            ++bad;
        }
    }
    return bad;
}

DenseTensor complete_reward(const DenseTensor& rewards, const DenseTensor& mask, DecompConfig cfg,
                            const CompletionOptions& options) {
    const ObservationMask m(mask);
    if (m.observed_count() == 0) return DenseTensor(rewards.shape());
    try {
        return reconstruct(complete(rewards, m, cfg, options));
    } catch (const DegenerateTensorError&) {
        // All observed rewards are zero.
        return DenseTensor(rewards.shape());
    }
}

DenseTensor decompose_or_zero(const DenseTensor& t, const DecompConfig& cfg) {
    try {
        return reconstruct(decompose(t, cfg));
    } catch (const DegenerateTensorError&) {
        return DenseTensor(t.shape());
    }
}

} // namespace

ModelEstimate baseline_model(const ExperienceStore& store) {
    ModelEstimate out;
    out.provenance = "baseline";
    out.transition = normalize_counts(store.counts());
    out.reward = store.rewards();
    const DenseTensor& mask = store.mask();
    double sum = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] != 0.0) sum += out.reward[i];
    const double mean = store.unique_visited() ? sum / static_cast<double>(store.unique_visited()) : 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] == 0.0) out.reward[i] = mean;
    return out;
}

ModelEstimate full_cp_model(const ExperienceStore& store, const AgentConfig& cfg) {
    cfg.validate();
    ModelEstimate out;
    out.provenance = "full-cp(" + std::to_string(cfg.transition_rank) + "," + std::to_string(cfg.reward_rank) + ")";

    DecompConfig tc = cfg.transition_decomp;
    tc.rank = cfg.transition_rank;
    tc.seed = derive_seed(cfg.seed, {1});
    out.transition = renormalize(decompose_or_zero(normalize_counts(store.counts()), tc));

    DecompConfig rc = cfg.reward_decomp;
    rc.rank = cfg.reward_rank;
    rc.seed = derive_seed(cfg.seed, {2});
    out.reward = complete_reward(store.rewards(), store.mask(), rc, cfg.completion);
    out.nonfinite_rewards = sanitize(out.reward);
    return out;
}

DenseTensor complete_per_state(const DenseTensor& rewards, const DenseTensor& mask, const DecompConfig& cfg,
                               const CompletionOptions& options) {
    if (rewards.shape() != mask.shape()) throw ShapeError("rewards and mask shapes differ");
    if (rewards.order() < 2) throw ShapeError("per-state completion needs a state mode and action modes");
    const std::size_t S = rewards.dim(0);
    const Shape action_shape(rewards.shape().begin() + 1, rewards.shape().end());
    const std::size_t A = element_count(action_shape);

    DenseTensor out(rewards.shape());
    DenseTensor slice(action_shape), slice_mask(action_shape);
    for (std::size_t s = 0; s < S; ++s) {
        std::copy_n(rewards.data() + s * A, A, slice.data());
        std::copy_n(mask.data() + s * A, A, slice_mask.data());
        DecompConfig c = cfg;
        c.seed = derive_seed(cfg.seed, {s});
        const DenseTensor r = complete_reward(slice, slice_mask, c, options);
        std::copy_n(r.data(), A, out.data() + s * A);
    }
    return out;
}

ModelEstimate tesseract_model(const ExperienceStore& store, const AgentConfig& cfg) {
    cfg.validate();
    ModelEstimate out;
    out.provenance = "tesseract(" + std::to_string(cfg.transition_rank) + "," + std::to_string(cfg.reward_rank) + ")";

    const std::size_t S = store.n_states();
    const std::size_t A = store.joint_action_count();
    const DenseTensor normalized = normalize_counts(store.counts());
    DenseTensor transition(normalized.shape());
    DenseTensor slice(store.action_sizes());
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t sn = 0; sn < S; ++sn) {
            for (std::size_t a = 0; a < A; ++a) slice[a] = normalized[(s * A + a) * S + sn];
            DecompConfig tc = cfg.transition_decomp;
            tc.rank = cfg.transition_rank;
            tc.seed = derive_seed(cfg.seed, {1, s, sn});
            const DenseTensor r = decompose_or_zero(slice, tc);
            for (std::size_t a = 0; a < A; ++a) transition[(s * A + a) * S + sn] = r[a];
        }
    }
    out.transition = renormalize(transition);

    DecompConfig rc = cfg.reward_decomp;
    rc.rank = cfg.reward_rank;
    rc.seed = derive_seed(cfg.seed, {2});
    out.reward = complete_per_state(store.rewards(), store.mask(), rc, cfg.completion);
    out.nonfinite_rewards = sanitize(out.reward);
    return out;
}

ModelEstimate fit_model(const ExperienceStore& store, const AgentConfig& cfg) {
    switch (cfg.kind) {
    case AgentKind::baseline:
        return baseline_model(store);
    case AgentKind::full_cp:
        return full_cp_model(store, cfg);
    case AgentKind::tesseract:
        return tesseract_model(store, cfg);
    }
    throw std::invalid_argument("unknown agent kind");
}

TabularMDP model_mdp(const ModelEstimate& model, std::size_t n_states, const std::vector<std::size_t>& action_sizes,
                     double discount) {
    return TabularMDP(n_states, action_sizes, model.transition, model.reward, discount);
}

Policy plan(const ModelEstimate& model, const Policy& pi, const AgentConfig& cfg, std::size_t n_states,
            const std::vector<std::size_t>& action_sizes, double discount) {
    const TabularMDP mdp = model_mdp(model, n_states, action_sizes, discount);
    return policy_improvement(mdp, pi, cfg.n_improvement_iter).policy;
}

} // namespace tensorrl
