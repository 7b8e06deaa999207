#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tensorrl {

using Shape = std::vector<std::size_t>;

/// Raised when tensor shapes or mode arguments do not line up.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

std::size_t element_count(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense n-dimensional array of doubles in row-major order.
///
/// An empty shape denotes an order-0 tensor holding a single scalar.
class DenseTensor {
public:
    DenseTensor();
    explicit DenseTensor(Shape shape, double fill = 0.0);
    DenseTensor(Shape shape, std::vector<double> values);

    static DenseTensor scalar(double value);

    const Shape& shape() const noexcept { return shape_; }
    const std::vector<std::size_t>& strides() const noexcept { return strides_; }
    std::size_t order() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t dim(std::size_t mode) const { return shape_.at(mode); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const double* data() const noexcept { return values_.data(); }
    double* data() noexcept { return values_.data(); }

    double operator[](std::size_t flat) const { return values_[flat]; }
    double& operator[](std::size_t flat) { return values_[flat]; }

    std::size_t offset(std::span<const std::size_t> index) const;
    double at(std::initializer_list<std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index);

    /// Value of an order-0 tensor.
    double item() const;

    double squared_norm() const noexcept;
    double norm() const noexcept;
    bool all_finite() const noexcept;
    void fill(double value) noexcept;

    DenseTensor& operator+=(const DenseTensor& other);
    DenseTensor& operator-=(const DenseTensor& other);
    DenseTensor& operator*=(double factor) noexcept;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    Shape shape_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
};

/// One slot of a multilinear contraction: either a vector or the identity.
///
/// Non-owning; the referenced vector must outlive the contraction call.
class ModeArg {
public:
    static ModeArg identity() noexcept { return ModeArg{}; }
    ModeArg(std::span<const double> vec) noexcept : vec_(vec), identity_(false) {}
    ModeArg(const std::vector<double>& vec) noexcept : vec_(vec), identity_(false) {}

    bool is_identity() const noexcept { return identity_; }
    std::span<const double> vector() const noexcept { return vec_; }

private:
    ModeArg() = default;
    std::span<const double> vec_;
    bool identity_ = true;
};

/// T(u^1, ..., I, ..., u^n): contracts every vector slot, keeping identity
/// slots as output modes in their original order.
DenseTensor contract(const DenseTensor& t, std::span<const ModeArg> args);
DenseTensor contract(const DenseTensor& t, std::initializer_list<ModeArg> args);

/// Same as contract() but accumulates into a caller-provided buffer, which is
/// zeroed first. `out` must hold the product of the identity-slot dimensions.
void contract_into(const DenseTensor& t, std::span<const ModeArg> args, std::span<double> out);

/// out[j] = T(u^1, ..., u^{j-1}, I, u^{j+1}, ..., u^n) for every mode j, in a
/// single pass over t. Each out[j] is resized to the mode dimension.
void contract_each_mode(const DenseTensor& t, std::span<const std::span<const double>> u,
                        std::span<std::vector<double>> out);

/// Weighted sum of rank-1 terms, sum_k w_k u_k^1 (x) ... (x) u_k^n.
///
/// Factor vectors are unit-norm; zero-weight components are kept.
class CPForm {
public:
    CPForm() = default;
    explicit CPForm(Shape dims);

    std::size_t rank() const noexcept { return weights_.size(); }
    std::size_t order() const noexcept { return dims_.size(); }
    const Shape& dims() const noexcept { return dims_; }

    std::span<const double> weights() const noexcept { return weights_; }
    double weight(std::size_t k) const { return weights_.at(k); }
    void set_weight(std::size_t k, double w) { weights_.at(k) = w; }

    std::span<const double> factor(std::size_t k, std::size_t mode) const;
    std::span<double> factor(std::size_t k, std::size_t mode);

    /// Appends a component. `factors` holds one vector per mode.
    void add_component(double weight, std::span<const std::vector<double>> factors);
    void add_component(double weight, const std::vector<std::vector<double>>& factors) {
        add_component(weight, std::span<const std::vector<double>>(factors));
    }

    /// Vector slots for component k, with an identity at `free_mode` if given.
    std::vector<ModeArg> mode_args(std::size_t k) const;
    std::vector<ModeArg> mode_args(std::size_t k, std::size_t free_mode) const;

    /// Largest | ||u_k^j|| - 1 | over all factor vectors.
    double max_norm_deviation() const;

    /// Number of scalars stored in the factorized form (weights excluded).
    std::size_t parameter_count() const noexcept;

    friend bool operator==(const CPForm&, const CPForm&) = default;

private:
    Shape dims_;
    std::vector<double> weights_;
    // factors_[mode] holds rank x dims_[mode] values, component-major.
    std::vector<std::vector<double>> factors_;
};

DenseTensor reconstruct(const CPForm& cp, const Shape& shape);
DenseTensor reconstruct(const CPForm& cp);

/// t += weight * u^1 (x) ... (x) u^n
void add_outer(DenseTensor& t, double weight, std::span<const std::span<const double>> factors);
void add_component(DenseTensor& t, const CPForm& cp, std::size_t k, double scale = 1.0);

double frobenius_distance(const DenseTensor& a, const DenseTensor& b);
DenseTensor entrywise_multiply(const DenseTensor& a, const DenseTensor& b);

/// Keeps the r components with the largest |w_k|, preserving their order.
CPForm truncate(const CPForm& cp, std::size_t r);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

} // namespace tensorrl
