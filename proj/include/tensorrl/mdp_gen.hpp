#pragma once

#include "tensorrl/cp_decomp.hpp"
#include "tensorrl/mdp.hpp"
#include "tensorrl/tensor.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace tensorrl {

struct GenConfig {
    Shape shape;
    std::size_t rank = 1;
    /// One weight per component; empty means all ones.
    std::vector<double> weights;
    std::uint64_t seed = 0;
    /// Transition generation stops once ||Normalize(T) - T||_F <= normalize_tolerance.
    double normalize_tolerance = 1e-3;
    std::size_t max_normalize_iters = 100;
    /// Settings for the inner rank-2r decompositions (rank and seed are set per call).
    DecompConfig decomp{};
    /// After the first iteration, seed each rank-2r refit with the previous
    /// rank-r result plus r zero-weight components instead of a fresh power
    /// iteration.
    bool warm_start = true;

    void validate() const;
};

class NotConvergedError : public std::runtime_error {
public:
    NotConvergedError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// n evenly spaced points from a to b inclusive.
std::vector<double> linspace(double a, double b, std::size_t n);

/// Random CP form with standard-normal factors normalized to unit length.
CPForm generate_cp(const GenConfig& cfg);
DenseTensor generate_tensor(const GenConfig& cfg);

/// Clamps negative entries to zero and rescales every last-mode slice to sum
/// to one; slices with no positive mass become uniform.
DenseTensor normalize_transition(const DenseTensor& t);

/// Alternates normalization, a rank-2r decomposition and truncation to rank r
/// until normalization moves the tensor by at most cfg.normalize_tolerance.
/// The last mode is the next-state mode. Throws NotConvergedError at the cap.
DenseTensor generate_transition_tensor(const GenConfig& cfg, std::size_t* iterations = nullptr);

/// Normalize-loop settings used by the experiment builders.
struct GeneratorSettings {
    double normalize_tolerance = 1e-3;
    std::size_t max_normalize_iters = 100;
    DecompConfig decomp{};
};

/// Settings for the 20x10x10x10x20 rank-5 transition tensor: the loop
/// converges sublinearly at that size, so the tolerance is 0.25 in Frobenius
/// norm (about 0.5% of the tensor norm) with five sweeps per refit.
GeneratorSettings experiment1_generator_settings();

struct Experiment1Layout {
    std::size_t n_states = 20;
    std::vector<std::size_t> action_sizes{10, 10, 10};
    std::size_t rank = 5;
};

struct DegenerateLayout {
    std::size_t n_groups = 4;
    std::size_t states_per_group = 4;
    std::vector<std::size_t> action_sizes{20, 20, 20};
};

/// Random MDP whose transition and reward tensors both have CP-rank `rank`;
/// reward weights are linspace(0.1, 1) over `rank` points.
TabularMDP build_experiment1_mdp(std::uint64_t seed, double discount = 0.9, const Experiment1Layout& layout = {},
                                 const GeneratorSettings& settings = experiment1_generator_settings());

/// MDP whose states fall into groups sharing one rank-1 transition slice and
/// one rank-1 reward slice; state g*states_per_group + i belongs to group g.
TabularMDP build_degenerate_mdp(std::uint64_t seed, double discount = 0.9, const DegenerateLayout& layout = {},
                                const GeneratorSettings& settings = {});

} // namespace tensorrl
