#pragma once

#include "tensorrl/tensor.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace tensorrl {

/// Settings for power iteration with deflation followed by alternating
/// minimization.
struct DecompConfig {
    std::size_t rank = 1;
    /// Power iteration stops once sum_j ||u^j_{m+1} - u^j_m||^2 <= power_tolerance.
    double power_tolerance = 1e-9;
    std::size_t power_max_iters = 500;
    std::size_t altmin_max_sweeps = 200;
    /// Alternating minimization stops once a sweep improves the objective by
    /// less than altmin_tolerance relative to its previous value.
    double altmin_tolerance = 1e-8;
    std::uint64_t seed = 0;
    /// Random re-initializations allowed when a contraction vanishes.
    std::size_t max_restarts = 10;

    void validate() const;
};

/// The tensor offers no direction to extract (e.g. it is identically zero).
class DegenerateTensorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Objective values observed by an alternating solver: entry 0 is the
/// objective at the initial point, entry i the raw objective after sweep i
/// (a sweep that fails to improve is recorded and then rolled back).
struct SweepTrace {
    std::vector<double> objective;
    std::size_t accepted_sweeps = 0;
};

using Rng = std::mt19937_64;

/// Unit-norm vector with i.i.d. standard normal direction.
std::vector<double> random_unit_vector(std::size_t n, Rng& rng);

CPForm power_iteration_deflation(const DenseTensor& t, const DecompConfig& cfg);

CPForm alternating_minimization(const DenseTensor& t, CPForm init, const DecompConfig& cfg,
                                SweepTrace* trace = nullptr);

/// Power iteration with deflation to initialize, then alternating
/// minimization. Uses cfg.rank components.
CPForm decompose(const DenseTensor& t, const DecompConfig& cfg, SweepTrace* trace = nullptr);

} // namespace tensorrl
