#include "oracles.hpp"

#include "tensorrl/completion.hpp"
#include "tensorrl/mdp_gen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tensorrl;

namespace {

ObservationMask random_mask(const Shape& shape, double fraction, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(fraction);
    DenseTensor m(shape);
    for (auto& x : m.values()) x = keep(rng) ? 1.0 : 0.0;
    return ObservationMask(std::move(m));
}

DenseTensor masked(const DenseTensor& t, const ObservationMask& m) {
    DenseTensor out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = m.observed(i) ? t[i] : 0.0;
    return out;
}

double max_unobserved_error(const DenseTensor& truth, const ObservationMask& m, const CPForm& cp) {
    const DenseTensor r = reconstruct(cp);
    double worst = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!m.observed(i)) worst = std::max(worst, std::abs(r[i] - truth[i]));
    return worst;
}

} // namespace

TEST(ObservationMask, AcceptsOnlyBinary) {
    EXPECT_THROW(ObservationMask(DenseTensor({2}, std::vector<double>{1.0, 0.5})), std::invalid_argument);
    const ObservationMask m(DenseTensor({3}, std::vector<double>{1.0, 0.0, 1.0}));
    EXPECT_EQ(m.observed_count(), 2u);
    EXPECT_FALSE(m.is_full());
    EXPECT_TRUE(ObservationMask::full({2, 2}).is_full());
}

TEST(MaskedObjective, MatchesElementLoop) {
    std::mt19937_64 rng(1);
    const DenseTensor t = oracle::random_tensor({3, 4, 2}, rng);
    const ObservationMask m = random_mask(t.shape(), 0.5, rng);
    CPForm cp(t.shape());
    cp.add_component(1.3, {oracle::unit(oracle::gaussian(3, rng)), oracle::unit(oracle::gaussian(4, rng)),
                           oracle::unit(oracle::gaussian(2, rng))});
    const DenseTensor r = reconstruct(cp);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (m.observed(i)) s += (t[i] - r[i]) * (t[i] - r[i]);
    EXPECT_NEAR(masked_objective(t, m, cp), std::sqrt(s), 1e-12);
}

TEST(Complete, FullMaskEqualsDecompose) {
    std::mt19937_64 rng(2);
    const auto truth = oracle::orthogonal_cp({6, 5, 4}, {2.0, 0.8}, rng);
    DecompConfig cfg;
    cfg.rank = 2;
    cfg.seed = 3;
    const CPForm c = complete(truth.tensor, ObservationMask::full(truth.tensor.shape()), cfg);
    EXPECT_EQ(c, decompose(truth.tensor, cfg));
    EXPECT_LT(oracle::distance(truth.tensor, reconstruct(c)) / truth.tensor.norm(), 1e-4);
}

TEST(Complete, RankOneFromThreeQuarters) {
    std::mt19937_64 rng(3);
    const auto u = oracle::unit(oracle::gaussian(4, rng));
    const auto v = oracle::unit(oracle::gaussian(4, rng));
    const auto z = oracle::unit(oracle::gaussian(4, rng));
    const DenseTensor truth = oracle::reconstruct({4, 4, 4}, {2.0}, {{u, v, z}});
    const ObservationMask m = random_mask(truth.shape(), 0.75, rng);
    DecompConfig cfg;
    cfg.rank = 1;
    cfg.seed = 4;
    const CPForm cp = complete(masked(truth, m), m, cfg);
    EXPECT_LT(max_unobserved_error(truth, m, cp), 1e-6);
}

TEST(Complete, SingleObservedEntryFitsExactly) {
    DenseTensor obs({3, 3, 3});
    DenseTensor mvals({3, 3, 3});
    obs.at({1, 2, 0}) = 4.0;
    mvals.at({1, 2, 0}) = 1.0;
    const ObservationMask m(mvals);
    DecompConfig cfg;
    cfg.rank = 1;
    const CPForm cp = complete(obs, m, cfg);
    EXPECT_LT(masked_objective(obs, m, cp), 1e-9);
}

TEST(Complete, ObservedEntriesMatchForExactLowRank) {
    GenConfig g;
    g.shape = {10, 10, 10};
    g.rank = 2;
    g.seed = 5;
    const DenseTensor truth = generate_tensor(g);
    std::mt19937_64 rng(6);
    const ObservationMask m = random_mask(truth.shape(), 0.5, rng);
    DecompConfig cfg;
    cfg.rank = 2;
    cfg.seed = 7;
    const CPForm cp = complete(masked(truth, m), m, cfg);
    const DenseTensor r = reconstruct(cp);
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (m.observed(i)) EXPECT_NEAR(r[i], truth[i], 1e-6);
    EXPECT_LT(max_unobserved_error(truth, m, cp), 1e-4);
}

TEST(Complete, ObjectiveNonIncreasingOverAcceptedSweeps) {
    std::mt19937_64 rng(8);
    const DenseTensor t = oracle::random_tensor({5, 4, 6}, rng);
    const ObservationMask m = random_mask(t.shape(), 0.4, rng);
    DecompConfig cfg;
    cfg.rank = 3;
    SweepTrace trace;
    const CPForm cp = complete(masked(t, m), m, cfg, {}, &trace);
    ASSERT_GE(trace.objective.size(), 2u);
    double best = trace.objective[0];
    for (std::size_t i = 1; i <= trace.accepted_sweeps; ++i) {
        EXPECT_LE(trace.objective[i], best * (1 + 1e-12));
        best = trace.objective[i];
    }
    EXPECT_NEAR(masked_objective(masked(t, m), m, cp), best, 1e-9 * (1 + best));
    EXPECT_LT(cp.max_norm_deviation(), 1e-9);
}

TEST(Complete, ClampBoundsWeights) {
    std::mt19937_64 rng(9);
    const DenseTensor t = oracle::random_tensor({4, 4, 4}, rng);
    const ObservationMask m = random_mask(t.shape(), 0.3, rng);
    DecompConfig cfg;
    cfg.rank = 4;
    CompletionOptions opt;
    opt.max_abs_weight = 0.5;
    const CPForm cp = complete(masked(t, m), m, cfg, opt);
    for (double w : cp.weights()) EXPECT_LE(std::abs(w), 0.5);
}

TEST(Complete, ShapeMismatch) {
    DecompConfig cfg;
    EXPECT_THROW(complete(DenseTensor({2, 2}), ObservationMask::full({2, 3}), cfg), ShapeError);
}
