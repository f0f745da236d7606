#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robinson/gamma.hpp"
#include "robinson/graphon_spec.hpp"
#include "robinson/robinson_approx.hpp"

using namespace robinson;

TEST(ClippedAffine, ThreeCases) {
  EXPECT_DOUBLE_EQ(clipped_affine_integral(1, 2, 1), 2.0);     // positive throughout
  EXPECT_DOUBLE_EQ(clipped_affine_integral(-1, 0, 1), 0.0);    // negative throughout
  EXPECT_DOUBLE_EQ(clipped_affine_integral(-1, 2, 1), 0.25);   // crosses at t = 1/2
  EXPECT_DOUBLE_EQ(clipped_affine_integral(1, -2, 1), 0.25);
  EXPECT_DOUBLE_EQ(clipped_affine_integral(0.5, 0, 2), 1.0);
}

TEST(GammaOfSet, TightExampleGoldens) {
  const auto w = refine(tight_example(), 2);
  EXPECT_NEAR(gamma_of_set(w, IntervalSet::full(8)), 1.0 / 128, 1e-15);
  EXPECT_NEAR(gamma_of_set(w, IntervalSet::from_cells(8, {0, 1, 2, 5, 6, 7})), 5.0 / 512, 1e-15);
}

TEST(GammaOfSet, MatchesQuadrature) {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto w = oracle::random_symmetric(6, rng);
    IntervalSet a(6);
    for (std::size_t i = 0; i < 6; ++i) a.set(i, coin(rng));
    EXPECT_NEAR(gamma_of_set(w, a), oracle::gamma_quadrature(w, a), 1e-4) << rep;
  }
}

TEST(GammaOfSet, ZeroExactlyOnRobinson) {
  Rng rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    const auto r = random_robinson(7, rng);
    for (std::uint64_t mask = 0; mask < 128; ++mask) EXPECT_EQ(gamma_of_set(r, IntervalSet::from_mask(7, mask)), 0.0);
    const auto w = oracle::random_symmetric(7, rng);
    ASSERT_GT(robinson_violation(w), 0.0);
    EXPECT_GT(gamma_exhaustive(w).value, 0.0);
  }
}

TEST(GammaOfSet, PositiveHomogeneity) {
  Rng rng(3);
  const auto w = oracle::random_symmetric(9, rng, true);
  for (int rep = 0; rep < 10; ++rep) {
    IntervalSet a(9);
    for (std::size_t i = 0; i < 9; ++i) a.set(i, coin(rng));
    const double t = uniform01(rng);
    EXPECT_NEAR(gamma_of_set(scaled(w, t), a), t * gamma_of_set(w, a), 1e-14);
  }
}

TEST(GammaOfSet, ResolutionMismatch) {
  EXPECT_THROW(gamma_of_set(tight_example(), IntervalSet::full(8)), std::invalid_argument);
}

TEST(GammaEvaluator, FlipMatchesFreshEvaluation) {
  Rng rng(4);
  const auto w = oracle::random_symmetric(11, rng);
  GammaEvaluator ev(w);
  ev.assign(IntervalSet(11));
  for (int step = 0; step < 200; ++step) {
    ev.flip(uniform_index(rng, 11));
    EXPECT_NEAR(ev.value(), gamma_of_set(w, ev.current()), 1e-14);
  }
}

TEST(GammaExhaustive, TightExampleAtEight) {
  const auto g = gamma_exhaustive(refine(tight_example(), 2));
  EXPECT_NEAR(g.value, 5.0 / 512, 1e-12);
  EXPECT_NEAR(gamma_of_set(refine(tight_example(), 2), g.witness), 5.0 / 512, 1e-15);
  EXPECT_EQ(g.method, "exhaustive");
  const auto j = to_json(g);
  EXPECT_EQ(j.at("witness_bits").get<std::string>().size(), 8u);
  EXPECT_EQ(j.at("resolution").get<std::size_t>(), 8u);
}

TEST(GammaExhaustive, RobinsonAndBudget) {
  for (std::size_t n : {8, 16}) {
    EXPECT_LE(gamma_exhaustive(discretize(Flat{0.5, 0.3}, n)).value, 1e-12);
    EXPECT_LE(gamma_exhaustive(discretize(Steep{0.9, 0.8}, n)).value, 1e-12);
  }
  EXPECT_EQ(gamma_exhaustive(StepGraphon::constant(10, 0.4)).value, 0.0);
  EXPECT_THROW(gamma_exhaustive(StepGraphon::constant(21, 0.4)), BudgetError);
}

TEST(GammaExhaustive, RefinementMonotone) {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto w = oracle::random_symmetric(5, rng);
    EXPECT_GE(gamma_exhaustive(refine(w, 2)).value, gamma_exhaustive(w).value - 1e-12);
  }
}

TEST(GammaLocalSearch, AgreesWithExhaustive) {
  Rng rng(6);
  std::size_t hits = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = oracle::random_symmetric(10, rng);
    const double ex = gamma_exhaustive(w).value;
    const auto ls = gamma_localsearch(w, 50, rep);
    EXPECT_LE(ls.value, ex + 1e-15);
    hits += ls.value >= ex - 1e-12;
  }
  EXPECT_GE(hits, 90u);
}

TEST(GammaLocalSearch, TightExampleAcrossSeeds) {
  const auto w = refine(tight_example(), 2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) EXPECT_NEAR(gamma_localsearch(w, 50, seed).value, 5.0 / 512, 1e-12);
}

TEST(GammaLocalSearch, RobinsonIsZero) {
  for (std::size_t n : {8, 32, 64}) {
    EXPECT_LE(gamma_localsearch(discretize(Flat{0.5, 0.3}, n), 4, 1).value, 1e-12);
    EXPECT_LE(gamma_localsearch(discretize(Steep{0.9, 0.8}, n), 4, 1).value, 1e-12);
  }
}

TEST(Certificate, TightExample) {
  const auto c = gamma_lower_certificate(tight_example(), 1);
  EXPECT_EQ(c.value, 1.0 / 128);
  EXPECT_EQ(c.s_u, 0u);
  EXPECT_EQ(c.s_l, 1u);
  EXPECT_EQ(c.t_l, 2u);
  EXPECT_EQ(c.t_u, 3u);
}

TEST(Certificate, TrivialAndInfeasible) {
  EXPECT_LE(gamma_lower_certificate(StepGraphon::constant(8, 0.3), 2).value, 1e-15);
  EXPECT_LE(gamma_lower_certificate(discretize(Steep{0.9, 0.8}, 12), 2).value, 1e-15);
  EXPECT_THROW(gamma_lower_certificate(tight_example(), 2), std::invalid_argument);
  EXPECT_THROW(gamma_lower_certificate(tight_example(), 0), std::invalid_argument);
}

TEST(Certificate, SoundAgainstExhaustive) {
  Rng rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const auto w = oracle::random_symmetric(8, rng);
    const double ex = gamma_exhaustive(w).value;
    for (std::size_t cells : {1, 2}) {
      const auto c = gamma_lower_certificate(w, cells);
      EXPECT_LE(c.value, ex + 1e-12);
      EXPECT_LE(c.s_u + cells, c.s_l);
      EXPECT_LE(c.s_l + cells, c.t_l);
      EXPECT_LE(c.t_l + cells, c.t_u);
    }
  }
}

TEST(Certificate, ScanMatchesBruteForce) {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 8 + rep % 5;
    const auto w = oracle::random_symmetric(n, rng);
    for (std::size_t L : {1, 2}) {
      auto mean = [&](std::size_t s, std::size_t t) {
        double v = 0;
        for (std::size_t i = s; i < s + L; ++i)
          for (std::size_t j = t; j < t + L; ++j) v += w(i, j);
        return v / static_cast<double>(L * L);
      };
      double best = 0;
      for (std::size_t a = 0; a + 4 * L <= n; ++a)
        for (std::size_t b = a + L; b + 3 * L <= n; ++b)
          for (std::size_t c = b + L; c + 2 * L <= n; ++c)
            for (std::size_t d = c + L; d + L <= n; ++d) best = std::max(best, mean(a, d) - mean(b, c));
      const double alpha = static_cast<double>(L) / static_cast<double>(n);
      EXPECT_NEAR(gamma_lower_certificate(w, L).value, alpha * alpha * alpha * best, 1e-15);
    }
  }
}

TEST(GammaConverged, RefinementCurve) {
  const auto c = gamma_converged(tight_example(), {32, 4, 1, 1e-6});
  ASSERT_GE(c.curve.size(), 2u);
  EXPECT_EQ(c.curve.front().first, 4u);
  // At N=4 the maximizer is cells {1,2,4}: 9/1024, above the 1/128 of A = all.
  EXPECT_NEAR(c.curve.front().second, 9.0 / 1024, 1e-12);
  EXPECT_NEAR(oracle::gamma_quadrature(tight_example(), IntervalSet::from_mask(4, 0b1011), 400), 9.0 / 1024, 1e-12);
  for (std::size_t i = 1; i < c.curve.size(); ++i) EXPECT_GE(c.curve[i].second, c.curve[i - 1].second);
  EXPECT_GE(c.estimate.value, 5.0 / 512 - 1e-12);
}
