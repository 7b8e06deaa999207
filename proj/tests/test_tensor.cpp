#include "oracles.hpp"

#include "tensorrl/tensor.hpp"
#include "tensorrl/tensor_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace tensorrl;

namespace {

CPForm random_cp(const Shape& shape, std::size_t rank, std::mt19937_64& rng) {
    CPForm cp(shape);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t k = 0; k < rank; ++k) {
        std::vector<std::vector<double>> u;
        for (std::size_t d : shape) u.push_back(oracle::unit(oracle::gaussian(d, rng)));
        cp.add_component(nd(rng), u);
    }
    return cp;
}

std::vector<std::vector<std::vector<double>>> factors_of(const CPForm& cp) {
    std::vector<std::vector<std::vector<double>>> f(cp.rank());
    for (std::size_t k = 0; k < cp.rank(); ++k)
        for (std::size_t j = 0; j < cp.order(); ++j) {
            auto s = cp.factor(k, j);
            f[k].emplace_back(s.begin(), s.end());
        }
    return f;
}

} // namespace

TEST(DenseTensor, ShapeAndStorage) {
    DenseTensor t({2, 3, 4}, 1.5);
    EXPECT_EQ(t.size(), 24u);
    EXPECT_EQ(t.order(), 3u);
    EXPECT_EQ(t.strides(), (std::vector<std::size_t>{12, 4, 1}));
    t.at({1, 2, 3}) = 7.0;
    EXPECT_EQ(t[23], 7.0);
    EXPECT_THROW(DenseTensor({2, 0}), ShapeError);
    EXPECT_THROW(DenseTensor({2, 2}, std::vector<double>(3)), ShapeError);
    EXPECT_EQ(DenseTensor::scalar(4.0).item(), 4.0);
}

TEST(DenseTensor, FiniteCheck) {
    EXPECT_TRUE(DenseTensor({2}, std::vector<double>{1.0, -2.0}).all_finite());
    EXPECT_FALSE(DenseTensor({2}, std::vector<double>{1.0, std::nan("")}).all_finite());
}

TEST(Contract, BasisContractionPicksEntry) {
    DenseTensor t({2, 2});
    t.at({0, 1}) = 1.0;
    const std::vector<double> e0{1, 0}, e1{0, 1};
    EXPECT_EQ(contract(t, {ModeArg(e0), ModeArg(e1)}).item(), 1.0);
    EXPECT_EQ(contract(t, {ModeArg(e1), ModeArg(e0)}).item(), 0.0);
}

TEST(Contract, AllIdentityReturnsTensor) {
    std::mt19937_64 rng(1);
    const DenseTensor t = oracle::random_tensor({3, 4, 2}, rng);
    EXPECT_EQ(contract(t, {ModeArg::identity(), ModeArg::identity(), ModeArg::identity()}), t);
}

TEST(Contract, RankOneWithIdentitySlotMatchesBruteForce) {
    const std::vector<double> u{1, 0}, v{0.6, 0.8}, z{0, 1};
    const DenseTensor t = oracle::reconstruct({2, 2, 2}, {1.0}, {{u, v, z}});
    const DenseTensor got = contract(t, {ModeArg::identity(), ModeArg(v), ModeArg(z)});
    const DenseTensor want = oracle::contract(t, {std::nullopt, v, z});
    ASSERT_EQ(got.shape(), (Shape{2}));
    EXPECT_NEAR(got[0], want[0], 1e-15);
    EXPECT_NEAR(got[1], want[1], 1e-15);
    EXPECT_NEAR(got[0], 1.0, 1e-15);
    EXPECT_NEAR(got[1], 0.0, 1e-15);
}

TEST(Contract, MatchesBruteForceForEverySlotPattern) {
    std::mt19937_64 rng(7);
    const Shape shape{3, 2, 4, 3};
    const DenseTensor t = oracle::random_tensor(shape, rng);
    std::vector<std::vector<double>> vecs;
    for (std::size_t d : shape) vecs.push_back(oracle::gaussian(d, rng));
    for (unsigned pattern = 0; pattern < (1u << shape.size()); ++pattern) {
        std::vector<ModeArg> args;
        std::vector<std::optional<std::vector<double>>> oargs;
        for (std::size_t j = 0; j < shape.size(); ++j) {
            if (pattern & (1u << j)) {
                args.push_back(ModeArg::identity());
                oargs.push_back(std::nullopt);
            } else {
                args.emplace_back(vecs[j]);
                oargs.push_back(vecs[j]);
            }
        }
        const DenseTensor got = contract(t, args);
        const DenseTensor want = oracle::contract(t, oargs);
        ASSERT_EQ(got.shape(), want.shape()) << "pattern " << pattern;
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12) << "pattern " << pattern;
    }
}

TEST(Contract, IsMultilinear) {
    std::mt19937_64 rng(13);
    const Shape shape{4, 3, 5};
    for (int trial = 0; trial < 20; ++trial) {
        const DenseTensor t = oracle::random_tensor(shape, rng);
        const auto u = oracle::gaussian(3, rng), v = oracle::gaussian(3, rng), z = oracle::gaussian(5, rng);
        const double alpha = 1.7, beta = -0.4;
        std::vector<double> mix(3);
        for (std::size_t i = 0; i < 3; ++i) mix[i] = alpha * u[i] + beta * v[i];
        const DenseTensor lhs = contract(t, {ModeArg::identity(), ModeArg(mix), ModeArg(z)});
        const DenseTensor cu = contract(t, {ModeArg::identity(), ModeArg(u), ModeArg(z)});
        const DenseTensor cv = contract(t, {ModeArg::identity(), ModeArg(v), ModeArg(z)});
        for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], alpha * cu[i] + beta * cv[i], 1e-10);
    }
}

TEST(Contract, DimensionMismatchIsShapeError) {
    DenseTensor t({2, 3});
    const std::vector<double> bad{1, 2};
    EXPECT_THROW(contract(t, {ModeArg::identity(), ModeArg(bad)}), ShapeError);
    EXPECT_THROW(contract(t, {ModeArg::identity()}), ShapeError);
}

TEST(Contract, EachModeMatchesSingleContractions) {
    std::mt19937_64 rng(11);
    for (const Shape& shape : {Shape{5}, Shape{3, 4}, Shape{2, 3, 5}, Shape{2, 3, 2, 3, 4}}) {
        const DenseTensor t = oracle::random_tensor(shape, rng);
        std::vector<std::vector<double>> u;
        for (std::size_t d : shape) u.push_back(oracle::gaussian(d, rng));
        std::vector<std::span<const double>> spans(u.begin(), u.end());
        std::vector<std::vector<double>> out(shape.size());
        contract_each_mode(t, spans, out);
        for (std::size_t j = 0; j < shape.size(); ++j) {
            std::vector<std::optional<std::vector<double>>> args(u.begin(), u.end());
            args[j] = std::nullopt;
            const DenseTensor want = oracle::contract(t, args);
            ASSERT_EQ(out[j].size(), shape[j]);
            for (std::size_t i = 0; i < shape[j]; ++i) EXPECT_NEAR(out[j][i], want[i], 1e-12);
        }
    }
}

TEST(Reconstruct, SingleComponent) {
    CPForm cp({2, 2});
    cp.add_component(3.0, {{1.0, 0.0}, {0.0, 1.0}});
    const DenseTensor t = reconstruct(cp);
    EXPECT_EQ(t.at({0, 1}), 3.0);
    EXPECT_EQ(t.at({0, 0}), 0.0);
    EXPECT_EQ(t.at({1, 0}), 0.0);
    EXPECT_EQ(t.at({1, 1}), 0.0);
}

TEST(Reconstruct, EmptyIsZero) {
    const CPForm cp({3, 2});
    EXPECT_EQ(reconstruct(cp), DenseTensor({3, 2}));
}

TEST(Reconstruct, MatchesNaiveSum) {
    std::mt19937_64 rng(3);
    const CPForm cp = random_cp({3, 4, 5}, 2, rng);
    const DenseTensor got = reconstruct(cp);
    const std::vector<double> w(cp.weights().begin(), cp.weights().end());
    const DenseTensor want = oracle::reconstruct({3, 4, 5}, w, factors_of(cp));
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
}

TEST(Reconstruct, ShapeMismatch) {
    CPForm cp({2, 2});
    EXPECT_THROW(reconstruct(cp, {2, 3}), ShapeError);
}

TEST(Reconstruct, BasisContractionRecoversEntries) {
    std::mt19937_64 rng(5);
    const CPForm cp = random_cp({3, 2, 4}, 3, rng);
    const DenseTensor t = reconstruct(cp);
    oracle::for_each_index(t.shape(), [&](const oracle::Index& idx) {
        std::vector<std::vector<double>> e;
        for (std::size_t j = 0; j < idx.size(); ++j) {
            e.emplace_back(t.dim(j), 0.0);
            e.back()[idx[j]] = 1.0;
        }
        const double via_contract = contract(t, {ModeArg(e[0]), ModeArg(e[1]), ModeArg(e[2])}).item();
        double direct = 0.0;
        for (std::size_t k = 0; k < cp.rank(); ++k)
            direct += cp.weight(k) * cp.factor(k, 0)[idx[0]] * cp.factor(k, 1)[idx[1]] * cp.factor(k, 2)[idx[2]];
        EXPECT_NEAR(via_contract, direct, 1e-12);
    });
}

TEST(Frobenius, Examples) {
    DenseTensor a({2}, std::vector<double>{3, 0});
    DenseTensor b({2}, std::vector<double>{0, 4});
    EXPECT_DOUBLE_EQ(frobenius_distance(a, b), 5.0);
    EXPECT_EQ(frobenius_distance(a, a), 0.0);
    EXPECT_THROW(frobenius_distance(a, DenseTensor({3})), ShapeError);

    std::mt19937_64 rng(9);
    const DenseTensor x = oracle::random_tensor({4, 3, 2}, rng);
    const DenseTensor y = oracle::random_tensor({4, 3, 2}, rng);
    EXPECT_NEAR(frobenius_distance(x, y), oracle::distance(x, y), 1e-12);
    EXPECT_DOUBLE_EQ(frobenius_distance(x, y), frobenius_distance(y, x));
}

TEST(EntrywiseMultiply, Examples) {
    std::mt19937_64 rng(2);
    const DenseTensor a = oracle::random_tensor({2, 3}, rng);
    EXPECT_EQ(entrywise_multiply(a, DenseTensor({2, 3}, 1.0)), a);
    EXPECT_EQ(entrywise_multiply(a, DenseTensor({2, 3}, 0.0)), DenseTensor({2, 3}));
    const DenseTensor b = oracle::random_tensor({2, 3}, rng);
    const DenseTensor c = entrywise_multiply(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], a[i] * b[i]);
    EXPECT_THROW(entrywise_multiply(a, DenseTensor({3, 2})), ShapeError);
}

TEST(Truncate, FullRankIsIdentity) {
    std::mt19937_64 rng(4);
    const CPForm cp = random_cp({3, 3}, 3, rng);
    EXPECT_EQ(truncate(cp, 3), cp);
}

TEST(Truncate, KeepsLargestMagnitudesInOrder) {
    CPForm cp({2});
    cp.add_component(0.1, {{1.0, 0.0}});
    cp.add_component(5.0, {{0.0, 1.0}});
    cp.add_component(-3.0, {{0.6, 0.8}});
    const CPForm t = truncate(cp, 2);
    ASSERT_EQ(t.rank(), 2u);
    EXPECT_EQ(t.weight(0), 5.0);
    EXPECT_EQ(t.weight(1), -3.0);
    EXPECT_THROW(truncate(cp, 4), std::invalid_argument);
}

TEST(Truncate, ErrorEqualsDroppedComponents) {
    std::mt19937_64 rng(6);
    CPForm cp = random_cp({3, 4, 2}, 4, rng);
    cp.set_weight(0, 4.0);
    cp.set_weight(1, 0.5);
    cp.set_weight(2, -3.0);
    cp.set_weight(3, 0.25);
    const CPForm kept = truncate(cp, 2);
    const auto f = factors_of(cp);
    const DenseTensor dropped = oracle::reconstruct({3, 4, 2}, {0.5, 0.25}, {f[1], f[3]});
    EXPECT_NEAR(frobenius_distance(reconstruct(cp), reconstruct(kept)), dropped.norm(), 1e-12);
}

TEST(CPForm, ParameterCountAndNorms) {
    std::mt19937_64 rng(8);
    const CPForm cp = random_cp({20, 10, 10, 10, 20}, 5, rng);
    EXPECT_EQ(cp.parameter_count(), 350u);
    EXPECT_LT(cp.max_norm_deviation(), 1e-12);
}

TEST(TensorIo, RoundTripsExactly) {
    std::mt19937_64 rng(12);
    const DenseTensor t = oracle::random_tensor({2, 3, 4}, rng);
    std::stringstream ss;
    write_tensor(ss, t);
    EXPECT_EQ(ss.str().rfind("shape: 2 3 4\n", 0), 0u);
    EXPECT_EQ(read_tensor(ss), t);

    const CPForm cp = random_cp({3, 2}, 2, rng);
    std::stringstream cs;
    write_cp(cs, cp);
    EXPECT_EQ(cs.str().rfind("rank: 2\norder: 2\ndims: 3 2\n", 0), 0u);
    EXPECT_EQ(read_cp(cs), cp);
}

TEST(TensorIo, RejectsMalformedInput) {
    std::stringstream bad1("shape: 2 2\n1 2\n3\n");
    EXPECT_THROW(read_tensor(bad1), FormatError);
    std::stringstream bad2("shap: 2\n1 2\n");
    EXPECT_THROW(read_tensor(bad2), FormatError);
    std::stringstream bad3("shape: 2\n1 x\n");
    EXPECT_THROW(read_tensor(bad3), FormatError);
}
