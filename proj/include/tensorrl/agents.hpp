#pragma once

#include "tensorrl/completion.hpp"
#include "tensorrl/cp_decomp.hpp"
#include "tensorrl/mdp.hpp"
#include "tensorrl/tensor.hpp"

#include <string>
#include <vector>

namespace tensorrl {

/// Transition counts, last observed rewards and the visited mask of one agent.
class ExperienceStore {
public:
    ExperienceStore(std::size_t n_states, std::vector<std::size_t> action_sizes);

    void record(std::size_t s, std::size_t a, double r, std::size_t s_next);

    std::size_t n_states() const noexcept { return n_states_; }
    const std::vector<std::size_t>& action_sizes() const noexcept { return action_sizes_; }
    std::size_t joint_action_count() const noexcept { return joint_actions_; }

    /// S x A_1 x ... x A_n x S
    const DenseTensor& counts() const noexcept { return counts_; }
    /// S x A_1 x ... x A_n; zero where unvisited.
    const DenseTensor& rewards() const noexcept { return rewards_; }
    /// 1 where the (s, a) pair has been visited.
    const DenseTensor& mask() const noexcept { return mask_; }

    std::size_t unique_visited() const noexcept { return unique_; }
    std::size_t total_transitions() const noexcept { return total_; }

    friend bool operator==(const ExperienceStore&, const ExperienceStore&) = default;

private:
    std::size_t n_states_;
    std::vector<std::size_t> action_sizes_;
    std::size_t joint_actions_;
    DenseTensor counts_;
    DenseTensor rewards_;
    DenseTensor mask_;
    std::size_t unique_ = 0;
    std::size_t total_ = 0;
};

/// Divides each next-state slice by its sum; empty slices become uniform.
DenseTensor normalize_counts(const DenseTensor& counts);

/// Clamps negative or non-finite entries of a transition estimate to zero and
/// rescales each next-state slice to sum to one (uniform if nothing is left).
DenseTensor renormalize(const DenseTensor& estimate);

enum class AgentKind { baseline, full_cp, tesseract };

struct AgentConfig {
    AgentKind kind = AgentKind::baseline;
    std::size_t transition_rank = 1;
    std::size_t reward_rank = 1;
    /// Used for the transition decomposition(s); rank and seed are overridden.
    DecompConfig transition_decomp{};
    /// Used for reward completion; rank and seed are overridden.
    DecompConfig reward_decomp{};
    CompletionOptions completion{};
    std::size_t n_improvement_iter = 50;
    std::uint64_t seed = 0;

    void validate() const;
    /// "baseline", "full-cp-5" (or "full-cp-5-3" when the ranks differ), "tesseract-5".
    std::string label() const;
};

/// Scalars in an agent's transition model: S*A*S for the baseline,
/// r*(2S + sum A_i) for full CP, S*S*r*sum A_i for Tesseract.
std::size_t transition_parameter_count(const AgentConfig& cfg, std::size_t n_states,
                                       const std::vector<std::size_t>& action_sizes);

struct ModelEstimate {
    DenseTensor transition;
    DenseTensor reward;
    std::string provenance;
    /// Reward entries that came back non-finite and were replaced by zero.
    std::size_t nonfinite_rewards = 0;
};

ModelEstimate baseline_model(const ExperienceStore& store);
ModelEstimate full_cp_model(const ExperienceStore& store, const AgentConfig& cfg);
ModelEstimate tesseract_model(const ExperienceStore& store, const AgentConfig& cfg);

/// Dispatches on cfg.kind.
ModelEstimate fit_model(const ExperienceStore& store, const AgentConfig& cfg);

/// Tesseract-style reassembly of a reward estimate: completes each state's
/// action slice separately at the given rank.
DenseTensor complete_per_state(const DenseTensor& rewards, const DenseTensor& mask, const DecompConfig& cfg,
                               const CompletionOptions& options = {});

TabularMDP model_mdp(const ModelEstimate& model, std::size_t n_states, const std::vector<std::size_t>& action_sizes,
                     double discount);

/// Policy improvement on the estimated MDP, warm-started from pi and capped
/// at cfg.n_improvement_iter iterations.
Policy plan(const ModelEstimate& model, const Policy& pi, const AgentConfig& cfg, std::size_t n_states,
            const std::vector<std::size_t>& action_sizes, double discount);

} // namespace tensorrl
