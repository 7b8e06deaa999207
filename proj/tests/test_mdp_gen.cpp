#include "oracles.hpp"

#include "tensorrl/cp_decomp.hpp"
#include "tensorrl/mdp_gen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tensorrl;

namespace {

double max_slice_error(const DenseTensor& t) {
    const std::size_t S = t.shape().back();
    double worst = 0.0;
    for (std::size_t o = 0; o < t.size(); o += S) {
        double sum = 0.0;
        for (std::size_t i = 0; i < S; ++i) sum += t[o + i];
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

double min_entry(const DenseTensor& t) {
    double m = t[0];
    for (double x : t.values()) m = std::min(m, x);
    return m;
}

} // namespace

TEST(Linspace, ExperimentWeights) {
    const auto w = linspace(0.1, 1.0, 5);
    const std::vector<double> want{0.1, 0.325, 0.55, 0.775, 1.0};
    ASSERT_EQ(w.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(w[i], want[i], 1e-15);
}

TEST(GenerateTensor, RankOneHasUnitNorm) {
    GenConfig g;
    g.shape = {4, 5, 6};
    g.rank = 1;
    g.weights = {1.0};
    g.seed = 2;
    EXPECT_NEAR(generate_tensor(g).norm(), 1.0, 1e-12);
    EXPECT_LT(generate_cp(g).max_norm_deviation(), 1e-12);
}

TEST(GenerateTensor, RoundTripsThroughDecompose) {
    GenConfig g;
    g.shape = {10, 8, 6};
    g.rank = 3;
    g.seed = 3;
    const DenseTensor t = generate_tensor(g);
    DecompConfig c;
    c.rank = 3;
    EXPECT_LT(frobenius_distance(t, reconstruct(decompose(t, c))) / t.norm(), 1e-4);
    EXPECT_EQ(reconstruct(generate_cp(g)), t);
}

TEST(NormalizeTransition, ClampsAndFallsBackToUniform) {
    DenseTensor t({2, 3}, std::vector<double>{-1.0, 1.0, 3.0, -2.0, 0.0, -0.5});
    const DenseTensor n = normalize_transition(t);
    EXPECT_DOUBLE_EQ(n.at({0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(n.at({0, 1}), 0.25);
    EXPECT_DOUBLE_EQ(n.at({0, 2}), 0.75);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(n.at({1, i}), 1.0 / 3.0);
}

TEST(TransitionGenerator, SmallShapeConverges) {
    GenConfig g;
    g.shape = {4, 3, 3, 4};
    g.rank = 2;
    g.seed = 5;
    std::size_t iters = 0;
    const DenseTensor t = generate_transition_tensor(g, &iters);
    EXPECT_LE(max_slice_error(t), 1e-8);
    EXPECT_GE(min_entry(t), 0.0);
    EXPECT_GE(iters, 1u);
    DecompConfig c;
    c.rank = 2;
    EXPECT_LT(frobenius_distance(t, reconstruct(decompose(t, c))) / t.norm(), 10 * g.normalize_tolerance);
}

TEST(TransitionGenerator, CapRaisesNotConverged) {
    GenConfig g;
    g.shape = {6, 5, 6};
    g.rank = 1;
    g.seed = 1;
    g.normalize_tolerance = 1e-15;
    g.max_normalize_iters = 2;
    EXPECT_THROW(generate_transition_tensor(g), NotConvergedError);
}

TEST(Experiment1, ShapesAndCounts) {
    const TabularMDP m = build_experiment1_mdp(0);
    EXPECT_EQ(m.n_states(), 20u);
    EXPECT_EQ(m.action_sizes(), (std::vector<std::size_t>{10, 10, 10}));
    EXPECT_EQ(m.state_action_count(), 20000u);
    EXPECT_EQ(m.transition().shape(), (Shape{20, 10, 10, 10, 20}));
    EXPECT_LE(max_slice_error(m.transition()), 1e-8);

    CPForm cp(m.transition().shape());
    std::mt19937_64 rng(0);
    for (int k = 0; k < 5; ++k) {
        std::vector<std::vector<double>> u;
        for (std::size_t d : m.transition().shape()) u.push_back(oracle::unit(oracle::gaussian(d, rng)));
        cp.add_component(1.0, u);
    }
    EXPECT_EQ(cp.parameter_count(), 350u);
}

TEST(Experiment1, RewardIsRankFiveAndSeedsDiffer) {
    const TabularMDP a = build_experiment1_mdp(1);
    const TabularMDP b = build_experiment1_mdp(2);
    EXPECT_GT(frobenius_distance(a.reward(), b.reward()), 0.0);
    DecompConfig c;
    c.rank = 5;
    const DenseTensor& r = a.reward();
    EXPECT_LT(frobenius_distance(r, reconstruct(decompose(r, c))) / r.norm(), 1e-3);
    const DenseTensor& t = a.transition();
    EXPECT_LT(frobenius_distance(t, reconstruct(decompose(t, c))) / t.norm(),
              10 * experiment1_generator_settings().normalize_tolerance);
}

TEST(Degenerate, GroupsAndRank) {
    const TabularMDP m = build_degenerate_mdp(3);
    EXPECT_EQ(m.n_states(), 16u);
    EXPECT_EQ(m.state_action_count(), 128000u);
    EXPECT_LE(max_slice_error(m.transition()), 1e-8);

    const std::size_t A = m.joint_action_count();
    const std::size_t S = m.n_states();
    auto same_slices = [&](std::size_t s1, std::size_t s2) {
        for (std::size_t a = 0; a < A; ++a) {
            if (m.reward(s1, a) != m.reward(s2, a)) return false;
            for (std::size_t n = 0; n < S; ++n)
                if (m.transition()[(s1 * A + a) * S + n] != m.transition()[(s2 * A + a) * S + n]) return false;
        }
        return true;
    };
    for (std::size_t s1 = 0; s1 < S; ++s1)
        for (std::size_t s2 = s1 + 1; s2 < S; ++s2) EXPECT_EQ(same_slices(s1, s2), s1 / 4 == s2 / 4) << s1 << "," << s2;

    DecompConfig c;
    c.rank = 4;
    c.seed = 1;
    const DenseTensor& r = m.reward();
    EXPECT_LT(frobenius_distance(r, reconstruct(decompose(r, c))) / r.norm(), 1e-3);
}

TEST(Builders, Deterministic) {
    const TabularMDP a = build_degenerate_mdp(7);
    const TabularMDP b = build_degenerate_mdp(7);
    EXPECT_EQ(a.transition(), b.transition());
    EXPECT_EQ(a.reward(), b.reward());
}
