#pragma once

#include "tensorrl/agents.hpp"
#include "tensorrl/mdp.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tensorrl {

enum class ExperimentId { rank5, degenerate };

std::string to_string(ExperimentId id);
/// Accepts "rank5" or "degenerate".
ExperimentId parse_experiment(const std::string& name);

struct AgentSpec {
    AgentKind kind = AgentKind::baseline;
    std::size_t rank = 0;

    std::string label() const;
    friend bool operator==(const AgentSpec&, const AgentSpec&) = default;
};

/// Parses "baseline", "full-cp-5" or "tesseract-1".
AgentSpec parse_agent(const std::string& label);

struct ExperimentConfig {
    ExperimentId experiment = ExperimentId::rank5;
    std::vector<AgentSpec> agents;
    std::size_t n_episodes = 200;
    std::size_t n_train = 10;
    std::size_t episode_length = 175;
    double epsilon_start = 0.9;
    double epsilon_end = 0.1;
    double discount = 0.9;
    std::size_t n_improvement_iter = 50;
    std::size_t repetitions = 20;
    std::uint64_t base_seed = 0;
    std::size_t eval_episodes = 5;
    /// Greedy rollouts used to estimate the optimal policy's return.
    std::size_t optimal_episodes = 1000;
    /// Settings for the agents' transition decompositions (rank and seed are per agent).
    DecompConfig transition_decomp{};
    /// Settings for the agents' reward completions.
    DecompConfig reward_decomp{};
    std::optional<double> completion_clamp;
    /// Worker threads over repetitions.
    std::size_t threads = 1;

    void validate() const;
    /// Checkpoint episodes: n_train, 2 n_train, ..., n_episodes.
    std::size_t checkpoint_count() const { return n_episodes / n_train; }
};

/// Defaults for one experiment, including its agent roster.
ExperimentConfig default_config(ExperimentId id);

/// Applies `key = value` lines ('#' starts a comment) on top of `base`.
/// Unknown keys and malformed values throw std::invalid_argument.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base);
/// Sets one field by its config-file key, without validating the result.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);
/// Inverse of parse_config: every field as a `key = value` line.
std::string format_config(const ExperimentConfig& cfg);

/// Linear from epsilon_start at episode 1 to epsilon_end at n_episodes.
double epsilon(std::size_t episode, const ExperimentConfig& cfg);

/// One epsilon-greedy episode from a uniform start state; every step is
/// recorded in the store.
void run_episode(const TabularMDP& mdp, const Policy& pi, double eps, std::size_t episode_length,
                 ExperienceStore& store, std::mt19937_64& rng);

/// Mean undiscounted return of greedy episodes from uniform start states.
double evaluate(const TabularMDP& mdp, const Policy& pi, std::size_t eval_episodes, std::size_t episode_length,
                std::mt19937_64& rng);

struct MetricsRow {
    std::size_t episode = 0;
    std::string agent;
    double regret = 0.0;
    double reward_sse = 0.0;
    double transition_mse = 0.0;
    double unique_visited = 0.0;
};

struct RunResult {
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    double optimal_return = 0.0;
    std::vector<MetricsRow> rows;
};

std::uint64_t repetition_seed(const ExperimentConfig& cfg, std::size_t rep);

TabularMDP build_experiment_mdp(ExperimentId id, std::uint64_t seed, double discount);

/// Runs every agent of the roster on one freshly generated MDP. When
/// dump_dir is set the final model of each agent is written below it.
RunResult run_repetition(const ExperimentConfig& cfg, std::size_t rep,
                         const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg,
                                      const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

/// Mean of each metric over runs, row by row (episode, agent).
std::vector<MetricsRow> mean_rows(const std::vector<RunResult>& runs);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

/// Writes metrics_run{i}.csv, metrics_mean.csv and manifest.txt.
void write_results(const std::filesystem::path& dir, const ExperimentConfig& cfg, const std::vector<RunResult>& runs);

} // namespace tensorrl
