#include "tensorrl/mdp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace tensorrl {

Shape state_action_shape(std::size_t n_states, const std::vector<std::size_t>& action_sizes) {
    Shape s{n_states};
    s.insert(s.end(), action_sizes.begin(), action_sizes.end());
    return s;
}

Shape transition_shape(std::size_t n_states, const std::vector<std::size_t>& action_sizes) {
    Shape s = state_action_shape(n_states, action_sizes);
    s.push_back(n_states);
    return s;
}

TabularMDP::TabularMDP(std::size_t n_states, std::vector<std::size_t> action_sizes, DenseTensor transition,
                       DenseTensor reward, double discount)
    : n_states_(n_states),
      action_sizes_(std::move(action_sizes)),
      joint_actions_(element_count(action_sizes_)),
      transition_(std::move(transition)),
      reward_(std::move(reward)),
      discount_(discount) {
    if (n_states_ == 0) throw std::invalid_argument("MDP needs at least one state");
    if (action_sizes_.empty()) throw std::invalid_argument("MDP needs at least one agent");
    if (!(discount_ >= 0.0 && discount_ < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
    if (transition_.shape() != transition_shape(n_states_, action_sizes_))
        throw ShapeError("transition tensor has shape " + shape_to_string(transition_.shape()) + ", expected " +
                         shape_to_string(transition_shape(n_states_, action_sizes_)));
    if (reward_.shape() != state_action_shape(n_states_, action_sizes_))
        throw ShapeError("reward tensor has shape " + shape_to_string(reward_.shape()) + ", expected " +
                         shape_to_string(state_action_shape(n_states_, action_sizes_)));
    if (!reward_.all_finite()) throw std::invalid_argument("reward tensor contains non-finite entries");

    for (std::size_t sa = 0; sa < n_states_ * joint_actions_; ++sa) {
        double* p = transition_.data() + sa * n_states_;
        double sum = 0.0;
        for (std::size_t i = 0; i < n_states_; ++i) {
            if (!std::isfinite(p[i]) || p[i] < -1e-12)
                throw std::invalid_argument("transition slice " + std::to_string(sa) +
                                            " has a negative or non-finite entry");
            if (p[i] < 0.0) p[i] = 0.0;
            sum += p[i];
        }
        if (std::abs(sum - 1.0) > 1e-8)
            throw std::invalid_argument("transition slice " + std::to_string(sa) + " sums to " +
                                        std::to_string(sum));
    }
}

std::vector<std::size_t> TabularMDP::decode_action(std::size_t joint) const {
    if (joint >= joint_actions_) throw std::out_of_range("joint action out of range");
    std::vector<std::size_t> out(action_sizes_.size());
    for (std::size_t i = action_sizes_.size(); i-- > 0;) {
        out[i] = joint % action_sizes_[i];
        joint /= action_sizes_[i];
    }
    return out;
}

std::size_t TabularMDP::encode_action(std::span<const std::size_t> per_agent) const {
    if (per_agent.size() != action_sizes_.size()) throw std::invalid_argument("one action per agent expected");
    std::size_t joint = 0;
    for (std::size_t i = 0; i < per_agent.size(); ++i) {
        if (per_agent[i] >= action_sizes_[i]) throw std::out_of_range("agent action out of range");
        joint = joint * action_sizes_[i] + per_agent[i];
    }
    return joint;
}

void Policy::validate(const TabularMDP& mdp) const {
    if (action.size() != mdp.n_states()) throw std::invalid_argument("policy must assign one action per state");
    for (auto a : action)
        if (a >= mdp.joint_action_count()) throw std::out_of_range("policy action out of range");
}

Policy random_policy(const TabularMDP& mdp, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, mdp.joint_action_count() - 1);
    Policy pi;
    pi.action.resize(mdp.n_states());
    for (auto& a : pi.action) a = pick(rng);
    return pi;
}

StepResult step(const TabularMDP& mdp, std::size_t s, std::size_t a, std::mt19937_64& rng) {
    if (s >= mdp.n_states() || a >= mdp.joint_action_count()) throw std::out_of_range("step: index out of range");
    const auto p = mdp.next_distribution(s, a);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double x = unif(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        last_positive = i;
        acc += p[i];
        if (x < acc) return {i, mdp.reward(s, a)};
    }
    return {last_positive, mdp.reward(s, a)};
}

PolicyValues evaluate_policy(const TabularMDP& mdp, const Policy& pi) {
    pi.validate(mdp);
    const std::size_t S = mdp.n_states();
    const std::size_t A = mdp.joint_action_count();
    const double gamma = mdp.discount();

    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(S));
    for (std::size_t s = 0; s < S; ++s) {
        const auto p = mdp.next_distribution(s, pi.action[s]);
        for (std::size_t t = 0; t < S; ++t)
            system(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) -= gamma * p[t];
        rhs(static_cast<Eigen::Index>(s)) = mdp.reward(s, pi.action[s]);
    }
    const Eigen::VectorXd v = system.partialPivLu().solve(rhs);
    const double residual = (system * v - rhs).cwiseAbs().maxCoeff();
    if (!v.allFinite() || residual > 1e-9 * std::max(1.0, v.cwiseAbs().maxCoeff()))
        throw std::runtime_error("policy evaluation: linear solve failed (residual " + std::to_string(residual) +
                                 ")");

    PolicyValues out;
    out.joint_actions = A;
    out.v.assign(v.data(), v.data() + S);
    out.q.resize(S * A);
    for (std::size_t s = 0; s < S; ++s)
        for (std::size_t a = 0; a < A; ++a)
            out.q[s * A + a] = mdp.reward(s, a) + gamma * dot(mdp.next_distribution(s, a), out.v);
    // V(s) is Q(s, pi(s)) by definition; use it to keep the two tables consistent.
    for (std::size_t s = 0; s < S; ++s) out.v[s] = out.q[s * A + pi.action[s]];
    return out;
}

ImprovementResult policy_improvement(const TabularMDP& mdp, Policy pi, std::size_t max_iters,
                                     std::vector<std::vector<double>>* value_trace, double tolerance) {
    pi.validate(mdp);
    const std::size_t S = mdp.n_states();
    const std::size_t A = mdp.joint_action_count();

    ImprovementResult result;
    result.values = evaluate_policy(mdp, pi);
    if (value_trace) value_trace->assign(1, result.values.v);

    for (;;) {
        Policy next = pi;
        bool improvable = false;
        for (std::size_t s = 0; s < S; ++s) {
            const double* q = result.values.q.data() + s * A;
            std::size_t best = 0;
            for (std::size_t a = 1; a < A; ++a)
                if (q[a] > q[best]) best = a;
            if (q[best] > result.values.v[s] + tolerance) {
                next.action[s] = best;
                improvable = true;
            }
        }
        if (!improvable) {
            result.converged = true;
            break;
        }
        if (result.iterations >= max_iters) break;
        pi = std::move(next);
        result.values = evaluate_policy(mdp, pi);
        if (value_trace) value_trace->push_back(result.values.v);
        ++result.iterations;
    }
    result.policy = std::move(pi);
    return result;
}

OptimalPolicy optimal_policy(const TabularMDP& mdp, const ReturnProtocol& protocol) {
    std::mt19937_64 rng(protocol.seed);
    Policy start = random_policy(mdp, rng);
    // Policy iteration never revisits a policy and strictly improves one state
    // value per step, so S*A iterations always suffice.
    auto improved = policy_improvement(mdp, std::move(start), mdp.state_action_count() + 1);
    if (!improved.converged) throw std::runtime_error("optimal_policy: policy iteration did not converge");

    OptimalPolicy out;
    out.policy = std::move(improved.policy);
    out.values = std::move(improved.values);
    out.iterations = improved.iterations;
    out.expected_return = rollout_return(mdp, out.policy, protocol.episodes, protocol.episode_length, rng);
    return out;
}

double rollout_return(const TabularMDP& mdp, const Policy& pi, std::size_t episodes, std::size_t episode_length,
                      std::mt19937_64& rng) {
    pi.validate(mdp);
    if (episodes == 0) throw std::invalid_argument("rollout_return: need at least one episode");
    std::uniform_int_distribution<std::size_t> start(0, mdp.n_states() - 1);
    double total = 0.0;
    for (std::size_t e = 0; e < episodes; ++e) {
        std::size_t s = start(rng);
        for (std::size_t t = 0; t < episode_length; ++t) {
            const auto r = step(mdp, s, pi.action[s], rng);
            total += r.reward;
            s = r.next_state;
        }
    }
    return total / static_cast<double>(episodes);
}

double expected_episode_return(const TabularMDP& mdp, const Policy& pi, std::size_t episode_length) {
    pi.validate(mdp);
    const std::size_t S = mdp.n_states();
    std::vector<double> dist(S, 1.0 / static_cast<double>(S)), next(S);
    double total = 0.0;
    for (std::size_t t = 0; t < episode_length; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (dist[s] == 0.0) continue;
            total += dist[s] * mdp.reward(s, pi.action[s]);
            const auto p = mdp.next_distribution(s, pi.action[s]);
            for (std::size_t t2 = 0; t2 < S; ++t2) next[t2] += dist[s] * p[t2];
        }
        std::swap(dist, next);
    }
    return total;
}

} // namespace tensorrl
