#pragma once

#include "tensorrl/cp_decomp.hpp"
#include "tensorrl/tensor.hpp"

#include <optional>

namespace tensorrl {

/// Binary observation pattern: 1 where the target entry has been observed.
class ObservationMask {
public:
    /// Throws std::invalid_argument unless every entry is exactly 0 or 1.
    explicit ObservationMask(DenseTensor values);
    static ObservationMask full(const Shape& shape);

    const DenseTensor& values() const noexcept { return values_; }
    const Shape& shape() const noexcept { return values_.shape(); }
    std::size_t observed_count() const noexcept { return observed_; }
    bool is_full() const noexcept { return observed_ == values_.size(); }
    bool observed(std::size_t flat) const { return values_[flat] != 0.0; }

private:
    DenseTensor values_;
    std::size_t observed_ = 0;
};

struct CompletionOptions {
    /// Coordinates whose masked denominator falls below this keep their
    /// previous value.
    double denominator_guard = 1e-12;
    /// Optional bound on |w_l| applied after each weight update. Off unless set.
    std::optional<double> max_abs_weight;
};

/// ||mask . (t - reconstruct(cp))||_F
double masked_objective(const DenseTensor& t, const ObservationMask& mask, const CPForm& cp);

/// Low-rank completion by masked alternating minimization, initialized with
/// power iteration on the zero-filled observed tensor. With a full mask this
/// is exactly decompose().
CPForm complete(const DenseTensor& observed, const ObservationMask& mask, const DecompConfig& cfg,
                const CompletionOptions& options = {}, SweepTrace* trace = nullptr);

/// The masked sweeps alone, from a given starting point.
CPForm masked_alternating_minimization(const DenseTensor& observed, const ObservationMask& mask, CPForm init,
                                       const DecompConfig& cfg, const CompletionOptions& options = {},
                                       SweepTrace* trace = nullptr);

} // namespace tensorrl
