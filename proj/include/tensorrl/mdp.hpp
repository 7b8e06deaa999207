#pragma once

#include "tensorrl/tensor.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace tensorrl {

/// Shape S x A_1 x ... x A_n.
Shape state_action_shape(std::size_t n_states, const std::vector<std::size_t>& action_sizes);
/// Shape S x A_1 x ... x A_n x S.
Shape transition_shape(std::size_t n_states, const std::vector<std::size_t>& action_sizes);

/// Multi-agent tabular MDP. Joint actions are flat row-major indices over
/// A_1 x ... x A_n, so (s, a, s') addresses transition entry (s*A + a)*S + s'.
class TabularMDP {
public:
    /// Validates shapes and that every next-state slice is a distribution.
    /// Entries in [-1e-12, 0) are clamped to zero.
    TabularMDP(std::size_t n_states, std::vector<std::size_t> action_sizes, DenseTensor transition,
               DenseTensor reward, double discount);

    std::size_t n_states() const noexcept { return n_states_; }
    const std::vector<std::size_t>& action_sizes() const noexcept { return action_sizes_; }
    std::size_t n_agents() const noexcept { return action_sizes_.size(); }
    std::size_t joint_action_count() const noexcept { return joint_actions_; }
    std::size_t state_action_count() const noexcept { return n_states_ * joint_actions_; }
    double discount() const noexcept { return discount_; }

    const DenseTensor& transition() const noexcept { return transition_; }
    const DenseTensor& reward() const noexcept { return reward_; }

    double reward(std::size_t s, std::size_t a) const { return reward_[s * joint_actions_ + a]; }
    std::span<const double> next_distribution(std::size_t s, std::size_t a) const {
        return transition_.values().subspan((s * joint_actions_ + a) * n_states_, n_states_);
    }

    std::vector<std::size_t> decode_action(std::size_t joint) const;
    std::size_t encode_action(std::span<const std::size_t> per_agent) const;

private:
    std::size_t n_states_;
    std::vector<std::size_t> action_sizes_;
    std::size_t joint_actions_;
    DenseTensor transition_;
    DenseTensor reward_;
    double discount_;
};

/// Deterministic policy: one joint action per state.
struct Policy {
    std::vector<std::size_t> action;

    void validate(const TabularMDP& mdp) const;
    friend bool operator==(const Policy&, const Policy&) = default;
};

Policy random_policy(const TabularMDP& mdp, std::mt19937_64& rng);

struct PolicyValues {
    std::vector<double> q;  // S x A, row-major
    std::vector<double> v;  // S
    std::size_t joint_actions = 0;

    double q_at(std::size_t s, std::size_t a) const { return q[s * joint_actions + a]; }
};

struct StepResult {
    std::size_t next_state;
    double reward;
};

StepResult step(const TabularMDP& mdp, std::size_t s, std::size_t a, std::mt19937_64& rng);

/// Exact Q and V of a deterministic policy via a dense linear solve of
/// (I - gamma P_pi) V = R_pi.
PolicyValues evaluate_policy(const TabularMDP& mdp, const Policy& pi);

struct ImprovementResult {
    Policy policy;
    PolicyValues values;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Howard policy iteration: every state whose greedy action beats its current
/// value by more than `tolerance` switches to the lowest-index argmax.
/// `value_trace`, when given, receives V after every evaluation.
ImprovementResult policy_improvement(const TabularMDP& mdp, Policy pi0, std::size_t max_iters,
                                     std::vector<std::vector<double>>* value_trace = nullptr,
                                     double tolerance = 1e-9);

/// Test-time protocol: greedy rollouts from a uniform start state, each
/// `episode_length` steps, undiscounted.
struct ReturnProtocol {
    std::uint64_t seed = 0;
    std::size_t episodes = 1000;
    std::size_t episode_length = 100;
};

struct OptimalPolicy {
    Policy policy;
    PolicyValues values;
    double expected_return = 0.0;
    std::size_t iterations = 0;
};

OptimalPolicy optimal_policy(const TabularMDP& mdp, const ReturnProtocol& protocol = {});

/// Mean undiscounted episode return of greedy rollouts.
double rollout_return(const TabularMDP& mdp, const Policy& pi, std::size_t episodes, std::size_t episode_length,
                      std::mt19937_64& rng);

/// Exact expectation of the quantity rollout_return() samples.
double expected_episode_return(const TabularMDP& mdp, const Policy& pi, std::size_t episode_length);

} // namespace tensorrl
