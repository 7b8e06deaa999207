#include "tensorrl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace tensorrl {

std::size_t element_count(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
    os << ')';
    return os.str();
}

namespace {

std::vector<std::size_t> row_major_strides(const Shape& shape) {
    std::vector<std::size_t> strides(shape.size(), 1);
    for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
    return strides;
}

void check_shape(const Shape& shape) {
    for (auto d : shape)
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_to_string(shape));
}

void require_same_shape(const DenseTensor& a, const DenseTensor& b, const char* what) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                         shape_to_string(b.shape()));
}

} // namespace

DenseTensor::DenseTensor() : values_(1, 0.0) {}

DenseTensor::DenseTensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    strides_ = row_major_strides(shape_);
    values_.assign(element_count(shape_), fill);
}

DenseTensor::DenseTensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    check_shape(shape_);
    if (values_.size() != element_count(shape_))
        throw ShapeError("value count " + std::to_string(values_.size()) + " does not match shape " +
                         shape_to_string(shape_));
    strides_ = row_major_strides(shape_);
}

DenseTensor DenseTensor::scalar(double value) {
    return DenseTensor(Shape{}, std::vector<double>{value});
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) throw ShapeError("index order does not match tensor order");
    std::size_t off = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= shape_[i]) throw std::out_of_range("tensor index out of range");
        off += index[i] * strides_[i];
    }
    return off;
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
    return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
    return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::item() const {
    if (values_.size() != 1) throw ShapeError("item() requires a single-element tensor");
    return values_[0];
}

double DenseTensor::squared_norm() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
}

double DenseTensor::norm() const noexcept { return std::sqrt(squared_norm()); }

bool DenseTensor::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void DenseTensor::fill(double value) noexcept { std::fill(values_.begin(), values_.end(), value); }

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

DenseTensor& DenseTensor::operator*=(double factor) noexcept {
    for (double& v : values_) v *= factor;
    return *this;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    const std::size_t n = std::min(a.size(), b.size());
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// Contraction. Recurses over modes; vector slots fold a scalar weight into the
// recursion, identity slots advance the output pointer. The innermost mode is
// either a dot product or an axpy, so no intermediate tensor is formed.
// ---------------------------------------------------------------------------
namespace {

struct ContractPlan {
    const Shape* shape = nullptr;
    const std::vector<std::size_t>* in_strides = nullptr;
    std::vector<const double*> vecs;       // nullptr marks an identity slot
    std::vector<std::size_t> out_strides;  // zero for vector slots
};

void contract_level(const ContractPlan& p, std::size_t mode, const double* in, double weight, double* out) {
    const std::size_t d = (*p.shape)[mode];
    const double* vec = p.vecs[mode];
    if (mode + 1 == p.shape->size()) {
        if (vec) {
            *out += weight * dot({in, d}, {vec, d});
        } else {
            for (std::size_t i = 0; i < d; ++i) out[i] += weight * in[i];
        }
        return;
    }
    const std::size_t stride = (*p.in_strides)[mode];
    if (vec) {
        for (std::size_t i = 0; i < d; ++i) {
            if (vec[i] == 0.0) continue;
            contract_level(p, mode + 1, in + i * stride, weight * vec[i], out);
        }
    } else {
        const std::size_t ostride = p.out_strides[mode];
        for (std::size_t i = 0; i < d; ++i) contract_level(p, mode + 1, in + i * stride, weight, out + i * ostride);
    }
}

Shape prepare_plan(const DenseTensor& t, std::span<const ModeArg> args, ContractPlan& plan) {
    if (args.size() != t.order())
        throw ShapeError("contract: expected " + std::to_string(t.order()) + " mode arguments, got " +
                         std::to_string(args.size()));
    Shape out_shape;
    plan.shape = &t.shape();
    plan.in_strides = &t.strides();
    plan.vecs.assign(args.size(), nullptr);
    plan.out_strides.assign(args.size(), 0);
    for (std::size_t j = 0; j < args.size(); ++j) {
        if (args[j].is_identity()) {
            out_shape.push_back(t.dim(j));
        } else {
            if (args[j].vector().size() != t.dim(j))
                throw ShapeError("contract: vector for mode " + std::to_string(j) + " has length " +
                                 std::to_string(args[j].vector().size()) + ", expected " +
                                 std::to_string(t.dim(j)));
            plan.vecs[j] = args[j].vector().data();
        }
    }
    std::size_t stride = 1;
    for (std::size_t j = args.size(); j-- > 0;) {
        if (args[j].is_identity()) {
            plan.out_strides[j] = stride;
            stride *= t.dim(j);
        }
    }
    return out_shape;
}

} // namespace

void contract_into(const DenseTensor& t, std::span<const ModeArg> args, std::span<double> out) {
    ContractPlan plan;
    const Shape out_shape = prepare_plan(t, args, plan);
    if (out.size() != element_count(out_shape)) throw ShapeError("contract_into: output buffer has wrong size");
    std::fill(out.begin(), out.end(), 0.0);
    if (t.order() == 0) {
        out[0] = t[0];
        return;
    }
    contract_level(plan, 0, t.data(), 1.0, out.data());
}

void contract_each_mode(const DenseTensor& t, std::span<const std::span<const double>> u,
                        std::span<std::vector<double>> out) {
    const std::size_t n = t.order();
    if (n == 0) throw ShapeError("contract_each_mode: tensor has no modes");
    if (u.size() != n || out.size() != n) throw ShapeError("contract_each_mode: need one vector per mode");
    for (std::size_t j = 0; j < n; ++j) {
        if (u[j].size() != t.dim(j))
            throw ShapeError("contract_each_mode: vector for mode " + std::to_string(j) + " has wrong length");
        out[j].assign(t.dim(j), 0.0);
    }
    if (n == 1) {
        std::copy(t.values().begin(), t.values().end(), out[0].begin());
        return;
    }

    const std::size_t last = n - 1;
    const std::size_t d = t.dim(last);
    const double* ul = u[last].data();
    double* ol = out[last].data();
    std::vector<std::size_t> idx(last, 0);
    // prefix[k] = prod_{i<k} u_i[idx_i], suffix[k] = prod_{k<i<last} u_i[idx_i]
    std::vector<double> prefix(last + 1), suffix(last + 1);
    const double* fibre = t.data();
    for (;;) {
        prefix[0] = 1.0;
        for (std::size_t k = 0; k < last; ++k) prefix[k + 1] = prefix[k] * u[k][idx[k]];
        suffix[last] = 1.0;
        for (std::size_t k = last; k-- > 0;) suffix[k] = suffix[k + 1] * u[k][idx[k]];
        double dot0 = 0.0, dot1 = 0.0;
        const double scale = prefix[last];
        std::size_t i = 0;
        for (; i + 1 < d; i += 2) {
            dot0 += fibre[i] * ul[i];
            dot1 += fibre[i + 1] * ul[i + 1];
            ol[i] += fibre[i] * scale;
            ol[i + 1] += fibre[i + 1] * scale;
        }
        for (; i < d; ++i) {
            dot0 += fibre[i] * ul[i];
            ol[i] += fibre[i] * scale;
        }
        const double dotv = dot0 + dot1;
        for (std::size_t k = 0; k < last; ++k) out[k][idx[k]] += dotv * prefix[k] * suffix[k + 1];
        fibre += d;

        std::size_t k = last;
        while (k-- > 0) {
            if (++idx[k] < t.dim(k)) break;
            idx[k] = 0;
        }
        if (k == static_cast<std::size_t>(-1)) break;
    }
}

DenseTensor contract(const DenseTensor& t, std::span<const ModeArg> args) {
    ContractPlan plan;
    DenseTensor out(prepare_plan(t, args, plan));
    contract_into(t, args, out.values());
    return out;
}

DenseTensor contract(const DenseTensor& t, std::initializer_list<ModeArg> args) {
    return contract(t, std::span<const ModeArg>(args.begin(), args.size()));
}

// ---------------------------------------------------------------------------
// CPForm
// ---------------------------------------------------------------------------

CPForm::CPForm(Shape dims) : dims_(std::move(dims)), factors_(dims_.size()) { check_shape(dims_); }

std::span<const double> CPForm::factor(std::size_t k, std::size_t mode) const {
    if (k >= rank() || mode >= order()) throw std::out_of_range("CPForm::factor index out of range");
    return {factors_[mode].data() + k * dims_[mode], dims_[mode]};
}

std::span<double> CPForm::factor(std::size_t k, std::size_t mode) {
    if (k >= rank() || mode >= order()) throw std::out_of_range("CPForm::factor index out of range");
    return {factors_[mode].data() + k * dims_[mode], dims_[mode]};
}

void CPForm::add_component(double weight, std::span<const std::vector<double>> factors) {
    if (factors.size() != order())
        throw ShapeError("CPForm::add_component: expected " + std::to_string(order()) + " factors");
    for (std::size_t j = 0; j < order(); ++j)
        if (factors[j].size() != dims_[j])
            throw ShapeError("CPForm::add_component: factor " + std::to_string(j) + " has wrong length");
    weights_.push_back(weight);
    for (std::size_t j = 0; j < order(); ++j)
        factors_[j].insert(factors_[j].end(), factors[j].begin(), factors[j].end());
}

std::vector<ModeArg> CPForm::mode_args(std::size_t k) const {
    std::vector<ModeArg> args;
    args.reserve(order());
    for (std::size_t j = 0; j < order(); ++j) args.emplace_back(factor(k, j));
    return args;
}

std::vector<ModeArg> CPForm::mode_args(std::size_t k, std::size_t free_mode) const {
    auto args = mode_args(k);
    args.at(free_mode) = ModeArg::identity();
    return args;
}

double CPForm::max_norm_deviation() const {
    double worst = 0.0;
    for (std::size_t k = 0; k < rank(); ++k)
        for (std::size_t j = 0; j < order(); ++j) worst = std::max(worst, std::abs(norm2(factor(k, j)) - 1.0));
    return worst;
}

std::size_t CPForm::parameter_count() const noexcept {
    return rank() * std::accumulate(dims_.begin(), dims_.end(), std::size_t{0});
}

namespace {

void outer_level(std::span<const std::span<const double>> factors, const std::vector<std::size_t>& strides,
                 std::size_t mode, double weight, double* out) {
    const auto u = factors[mode];
    if (mode + 1 == factors.size()) {
        for (std::size_t i = 0; i < u.size(); ++i) out[i] += weight * u[i];
        return;
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0) continue;
        outer_level(factors, strides, mode + 1, weight * u[i], out + i * strides[mode]);
    }
}

} // namespace

void add_outer(DenseTensor& t, double weight, std::span<const std::span<const double>> factors) {
    if (factors.size() != t.order()) throw ShapeError("add_outer: factor count does not match tensor order");
    for (std::size_t j = 0; j < factors.size(); ++j)
        if (factors[j].size() != t.dim(j)) throw ShapeError("add_outer: factor length mismatch");
    if (weight == 0.0) return;
    if (t.order() == 0) {
        t[0] += weight;
        return;
    }
    outer_level(factors, t.strides(), 0, weight, t.data());
}

void add_component(DenseTensor& t, const CPForm& cp, std::size_t k, double scale) {
    std::vector<std::span<const double>> fs;
    fs.reserve(cp.order());
    for (std::size_t j = 0; j < cp.order(); ++j) fs.push_back(cp.factor(k, j));
    add_outer(t, scale * cp.weight(k), fs);
}

DenseTensor reconstruct(const CPForm& cp, const Shape& shape) {
    if (shape != cp.dims())
        throw ShapeError("reconstruct: CP dims " + shape_to_string(cp.dims()) + " do not match " +
                         shape_to_string(shape));
    DenseTensor t(shape);
    for (std::size_t k = 0; k < cp.rank(); ++k) add_component(t, cp, k);
    return t;
}

DenseTensor reconstruct(const CPForm& cp) { return reconstruct(cp, cp.dims()); }

double frobenius_distance(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "frobenius_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

DenseTensor entrywise_multiply(const DenseTensor& a, const DenseTensor& b) {
    require_same_shape(a, b, "entrywise_multiply");
    DenseTensor out = a;
    for (std::size_t i = 0; i < a.size(); ++i) out[i] *= b[i];
    return out;
}

CPForm truncate(const CPForm& cp, std::size_t r) {
    if (r > cp.rank())
        throw std::invalid_argument("truncate: requested rank " + std::to_string(r) + " exceeds CP rank " +
                                    std::to_string(cp.rank()));
    std::vector<std::size_t> order(cp.rank());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // stable: equal magnitudes keep the earlier component
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(cp.weight(a)) > std::abs(cp.weight(b)); });
    std::vector<std::size_t> keep(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r));
    std::sort(keep.begin(), keep.end());

    CPForm out(cp.dims());
    std::vector<std::vector<double>> fs(cp.order());
    for (auto k : keep) {
        for (std::size_t j = 0; j < cp.order(); ++j) {
            auto f = cp.factor(k, j);
            fs[j].assign(f.begin(), f.end());
        }
        out.add_component(cp.weight(k), fs);
    }
    return out;
}

} // namespace tensorrl
