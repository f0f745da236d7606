#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "robinson/graphon_spec.hpp"
#include "robinson/robinson_approx.hpp"
#include "robinson/step_graphon.hpp"

using namespace robinson;

TEST(StepGraphon, RejectsAsymmetricAndOutOfRange) {
  EXPECT_THROW(StepGraphon(2, {0.1, 0.2, 0.3, 0.1}), std::invalid_argument);
  EXPECT_THROW(StepGraphon(1, {1.5}), std::domain_error);
  EXPECT_THROW(StepGraphon(1, {-0.5}), std::domain_error);
  EXPECT_NO_THROW(StepGraphon(1, {-0.5}, ValueRange::kKernel));
}

TEST(StepGraphon, StepOperatorOfTightExample) {
  const auto s = step_operator(tight_example(), 2);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.25);
  EXPECT_DOUBLE_EQ(s(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(s(1, 1), 0.75);
}

TEST(StepGraphon, StepOperatorIdentityAndConstant) {
  const auto t = tight_example();
  EXPECT_EQ(step_operator(t, 4), t);
  const auto c = step_operator(StepGraphon::constant(12, 0.3), 4);
  for (double v : c.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  EXPECT_THROW(step_operator(t, 3), std::invalid_argument);
}

TEST(StepGraphon, ShiftsPinTheirBands) {
  Rng rng(3);
  const auto w = oracle::random_symmetric(9, rng);
  const auto plus = shift_plus(w), minus = shift_minus(w);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(plus(i, i), 1.0);
    if (i + 1 < 9) { EXPECT_EQ(plus(i, i + 1), 1.0); }
  }
  for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(minus(0, j), 0.0);
}

TEST(StepGraphon, ShiftSandwichAndL1BoundOnRobinson) {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto u = random_robinson(30, rng);
    for (std::size_t coarse : {3, 5, 6, 10, 15}) {
      const auto step = step_operator(u, coarse);
      const auto lo = shift_minus(step), hi = shift_plus(step);
      const auto fine = refine(step, 30 / coarse);
      EXPECT_LE(l1_dist(u, fine), 7.0 / static_cast<double>(coarse));
      EXPECT_LE(l1_dist(hi, lo), 7.0 / static_cast<double>(coarse));
      const auto flo = refine(lo, 30 / coarse), fhi = refine(hi, 30 / coarse);
      for (std::size_t i = 0; i < 30; ++i)
        for (std::size_t j = 0; j < 30; ++j) {
          EXPECT_LE(flo(i, j), u(i, j) + 1e-12);
          EXPECT_LE(u(i, j), fhi(i, j) + 1e-12);
        }
    }
  }
}

TEST(StepGraphon, SteppingCanBreakRobinson) {
  // Indicator of [1/4, 1]^2: Robinson, but its 2x2 step has row 0 equal to
  // (1/4, 1/2), rising away from the diagonal.
  const auto u = StepGraphon::from_function(4, [](std::size_t i, std::size_t) { return i >= 1 ? 1.0 : 0.0; });
  const auto v = StepGraphon::from_function(4, [&](std::size_t i, std::size_t j) { return std::min(u(i, j), u(j, i)); });
  ASSERT_EQ(robinson_violation(v), 0.0);
  const auto s = step_operator(v, 2);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(robinson_violation(s), 0.25);
}

TEST(StepGraphon, SteppingPreservesCellAlignedRobinson) {
  // When every level set boundary falls on the coarse grid the step is exact.
  Rng rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const auto coarse = random_robinson(6, rng);
    EXPECT_EQ(robinson_violation(step_operator(refine(coarse, 5), 6)), 0.0);
  }
}

TEST(StepGraphon, L1Distances) {
  const auto t = tight_example();
  EXPECT_EQ(l1_dist(t, t), 0.0);
  EXPECT_EQ(l1_dist(StepGraphon::constant(3, 1), StepGraphon::constant(3, 0)), 1.0);
  EXPECT_DOUBLE_EQ(l1_dist(t, refine(step_operator(t, 2), 2)), 3.0 / 16.0);
  EXPECT_EQ(l1_dist(refine(t, 3), refine(t, 3)), 0.0);
  EXPECT_THROW(l1_dist(t, refine(t, 2)), std::invalid_argument);
}

TEST(StepGraphon, RefineRoundTrip) {
  const auto t = tight_example();
  EXPECT_EQ(refine(t, 1), t);
  EXPECT_EQ(step_operator(refine(t, 3), 4), t);
  EXPECT_EQ(refine(t, 2)(5, 1), t(2, 0));
}

TEST(RobinsonViolation, Examples) {
  EXPECT_DOUBLE_EQ(robinson_violation(tight_example()), 0.25);
  EXPECT_EQ(robinson_violation(StepGraphon::constant(5, 0.4)), 0.0);
  for (std::size_t n : {3, 8, 17}) EXPECT_EQ(robinson_violation(discretize(Flat{0.5, 0.3}, n)), 0.0);
}

TEST(RobinsonViolation, MatchesTripleScan) {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const auto w = rep % 2 ? oracle::random_symmetric(12, rng) : perturbed(random_robinson(12, rng), 0.05, rng);
    EXPECT_DOUBLE_EQ(robinson_violation(w), oracle::robinson_triple(w)) << rep;
  }
}

TEST(IntervalSet, SetAlgebra) {
  const auto a = IntervalSet::from_bits("1100"), b = IntervalSet::from_bits("1010");
  EXPECT_EQ((a | b).to_string(), "1110");
  EXPECT_EQ((a & b).to_string(), "1000");
  EXPECT_EQ(a.complement().to_string(), "0011");
  EXPECT_DOUBLE_EQ(a.measure(), 0.5);
  EXPECT_EQ(a.refined(2).to_string(), "11110000");
  EXPECT_THROW(IntervalSet::from_bits("12"), std::invalid_argument);
}

TEST(StepGraphon, TextRoundTrip) {
  const auto t = tight_example();
  std::stringstream ss;
  write_matrix(ss, t);
  EXPECT_EQ(read_matrix(ss), t);
  std::stringstream bad("2\n0 1\n0 0\n");
  EXPECT_THROW(read_matrix(bad), std::invalid_argument);
}
