// Seeded property suites, 100+ cases each.
#include "oracles.hpp"

#include "tensorrl/agents.hpp"
#include "tensorrl/completion.hpp"
#include "tensorrl/cp_decomp.hpp"
#include "tensorrl/harness.hpp"
#include "tensorrl/mdp_gen.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace tensorrl;

namespace {

constexpr std::uint64_t kCases = 100;

Shape random_shape(std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> order(2, 4), dim(2, 5);
    Shape s(order(rng));
    for (auto& d : s) d = dim(rng);
    return s;
}

ObservationMask random_mask(const Shape& shape, double fraction, std::mt19937_64& rng) {
    std::bernoulli_distribution keep(fraction);
    DenseTensor m(shape);
    for (auto& x : m.values()) x = keep(rng) ? 1.0 : 0.0;
    m[0] = 1.0;
    return ObservationMask(std::move(m));
}

void expect_normalized(const DenseTensor& t, const std::string& what) {
    const std::size_t S = t.shape().back();
    for (std::size_t o = 0; o < t.size(); o += S) {
        double sum = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
            ASSERT_GE(t[o + i], 0.0) << what;
            sum += t[o + i];
        }
        ASSERT_NEAR(sum, 1.0, 1e-9) << what;
    }
}

} // namespace

TEST(Properties, ContractionIsMultilinear) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const Shape shape = random_shape(rng);
        const DenseTensor t = oracle::random_tensor(shape, rng);
        const std::size_t mode = rng() % shape.size();
        std::vector<std::vector<double>> vecs;
        for (std::size_t d : shape) vecs.push_back(oracle::gaussian(d, rng));
        const auto v2 = oracle::gaussian(shape[mode], rng);
        const double alpha = 0.7, beta = -1.3;
        std::vector<ModeArg> a, b, mixed;
        std::vector<double> mix(shape[mode]);
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = alpha * vecs[mode][i] + beta * v2[i];
        for (std::size_t j = 0; j < shape.size(); ++j) {
            if (j == 0 && mode != 0) {
                a.push_back(ModeArg::identity());
                b.push_back(ModeArg::identity());
                mixed.push_back(ModeArg::identity());
            } else if (j == mode) {
                a.emplace_back(vecs[j]);
                b.emplace_back(v2);
                mixed.emplace_back(mix);
            } else {
                a.emplace_back(vecs[j]);
                b.emplace_back(vecs[j]);
                mixed.emplace_back(vecs[j]);
            }
        }
        const DenseTensor ca = contract(t, a), cb = contract(t, b), cm = contract(t, mixed);
        for (std::size_t i = 0; i < cm.size(); ++i) ASSERT_NEAR(cm[i], alpha * ca[i] + beta * cb[i], 1e-10) << seed;
    }
}

TEST(Properties, ReconstructMatchesOracle) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const Shape shape = random_shape(rng);
        const std::size_t r = 1 + rng() % 4;
        CPForm cp(shape);
        std::vector<double> w;
        std::vector<std::vector<std::vector<double>>> f;
        for (std::size_t k = 0; k < r; ++k) {
            std::vector<std::vector<double>> u;
            for (std::size_t d : shape) u.push_back(oracle::unit(oracle::gaussian(d, rng)));
            w.push_back(oracle::gaussian(1, rng)[0]);
            cp.add_component(w.back(), u);
            f.push_back(u);
        }
        const DenseTensor got = reconstruct(cp);
        const DenseTensor want = oracle::reconstruct(shape, w, f);
        for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-10) << seed;
    }
}

TEST(Properties, DecompositionFactorsAreUnitNorm) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const DenseTensor t = oracle::random_tensor(random_shape(rng), rng);
        DecompConfig cfg;
        cfg.rank = 1 + seed % 4;
        cfg.seed = seed;
        cfg.altmin_max_sweeps = 50;
        ASSERT_LT(decompose(t, cfg).max_norm_deviation(), 1e-9) << seed;
    }
}

TEST(Properties, AlternatingMinimizationIsMonotone) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const DenseTensor t = oracle::random_tensor(random_shape(rng), rng);
        DecompConfig cfg;
        cfg.rank = 1 + seed % 4;
        cfg.seed = seed;
        cfg.altmin_max_sweeps = 50;
        SweepTrace trace;
        const CPForm cp = decompose(t, cfg, &trace);
        ASSERT_GE(trace.objective.size(), 1u);
        for (std::size_t i = 1; i <= trace.accepted_sweeps; ++i)
            ASSERT_LE(trace.objective[i], trace.objective[i - 1] * (1 + 1e-12) + 1e-300) << seed;
        ASSERT_NEAR(frobenius_distance(t, reconstruct(cp)), trace.objective[trace.accepted_sweeps],
                    1e-9 * (1 + t.norm()))
            << seed;
    }
}

TEST(Properties, MaskedObjectiveIsMonotone) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const Shape shape = random_shape(rng);
        const ObservationMask m = random_mask(shape, 0.3 + 0.5 * (seed % 5) / 4.0, rng);
        DenseTensor t = oracle::random_tensor(shape, rng);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (!m.observed(i)) t[i] = 0.0;
        DecompConfig cfg;
        cfg.rank = 1 + seed % 3;
        cfg.seed = seed;
        cfg.altmin_max_sweeps = 50;
        SweepTrace trace;
        const CPForm cp = complete(t, m, cfg, {}, &trace);
        for (std::size_t i = 1; i <= trace.accepted_sweeps; ++i)
            ASSERT_LE(trace.objective[i], trace.objective[i - 1] * (1 + 1e-12)) << seed;
        ASSERT_LT(cp.max_norm_deviation(), 1e-9) << seed;
    }
}

TEST(Properties, FullMaskCompletionEqualsDecompose) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const DenseTensor t = oracle::random_tensor(random_shape(rng), rng);
        DecompConfig cfg;
        cfg.rank = 1 + seed % 3;
        cfg.seed = seed;
        cfg.altmin_max_sweeps = 30;
        ASSERT_EQ(complete(t, ObservationMask::full(t.shape()), cfg), decompose(t, cfg)) << seed;
    }
}

TEST(Properties, PolicyImprovementMonotoneAndOptimal) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t S = 2 + seed % 5;
        const std::vector<std::size_t> actions{2 + seed % 2, 2};
        const TabularMDP m = oracle::random_mdp(S, actions, 0.5 + 0.45 * (seed % 3) / 2.0, rng);
        std::vector<std::vector<double>> trace;
        const ImprovementResult res = policy_improvement(m, random_policy(m, rng), 1000, &trace);
        ASSERT_TRUE(res.converged) << seed;
        ASSERT_LE(res.iterations, m.state_action_count()) << seed;
        for (std::size_t i = 1; i < trace.size(); ++i)
            for (std::size_t s = 0; s < S; ++s) ASSERT_GE(trace[i][s], trace[i - 1][s] - 1e-9) << seed;
        for (std::size_t s = 0; s < S; ++s)
            for (std::size_t a = 0; a < m.joint_action_count(); ++a)
                ASSERT_GE(res.values.v[s], res.values.q_at(s, a) - 1e-9) << seed;
    }
}

TEST(Properties, EveryTransitionEstimateIsNormalized) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t S = 3 + seed % 3;
        const std::vector<std::size_t> actions{2, 3};
        const TabularMDP m = oracle::random_mdp(S, actions, 0.9, rng);
        ExperienceStore store(S, actions);
        const std::size_t steps = seed % 40;
        std::uniform_int_distribution<std::size_t> sd(0, S - 1), ad(0, m.joint_action_count() - 1);
        for (std::size_t i = 0; i < steps; ++i) {
            const std::size_t s = sd(rng), a = ad(rng);
            store.record(s, a, m.reward(s, a), step(m, s, a, rng).next_state);
        }
        for (AgentKind kind : {AgentKind::baseline, AgentKind::full_cp, AgentKind::tesseract}) {
            AgentConfig cfg;
            cfg.kind = kind;
            cfg.transition_rank = cfg.reward_rank = 1 + seed % 3;
            cfg.seed = seed;
            cfg.transition_decomp.altmin_max_sweeps = 20;
            cfg.reward_decomp.altmin_max_sweeps = 20;
            const ModelEstimate est = fit_model(store, cfg);
            expect_normalized(est.transition, cfg.label() + " seed " + std::to_string(seed));
            ASSERT_TRUE(est.reward.all_finite());
        }
    }
}

TEST(Properties, UniqueVisitedNeverDecreases) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        std::mt19937_64 rng(seed);
        const std::size_t S = 2 + seed % 6;
        const TabularMDP m = oracle::random_mdp(S, {3, 2}, 0.9, rng);
        const Policy pi = random_policy(m, rng);
        ExperienceStore store(S, {3, 2});
        std::size_t last = 0;
        for (std::size_t ep = 0; ep < 10; ++ep) {
            run_episode(m, pi, (ep % 4) / 3.0, 5 + seed % 7, store, rng);
            ASSERT_GE(store.unique_visited(), last) << seed;
            ASSERT_LE(store.unique_visited(), m.state_action_count()) << seed;
            last = store.unique_visited();
        }
        std::size_t visited = 0;
        for (double x : store.mask().values()) visited += x != 0.0;
        ASSERT_EQ(visited, store.unique_visited()) << seed;
    }
}

TEST(Properties, GeneratedTransitionsAreValid) {
    for (std::uint64_t seed = 0; seed < kCases; ++seed) {
        GenConfig g;
        g.shape = {3, 2, 2, 3};
        g.rank = 1 + seed % 2;
        g.seed = seed;
        g.normalize_tolerance = 1e-2;
        const DenseTensor t = generate_transition_tensor(g);
        expect_normalized(t, "seed " + std::to_string(seed));
        ASSERT_NO_THROW(TabularMDP(3, {2, 2}, t, DenseTensor({3, 2, 2}), 0.9));
    }
}
