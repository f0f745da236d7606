#include <gtest/gtest.h>

#include "robinson/graphon_spec.hpp"

using namespace robinson;

TEST(GraphonSpec, Evaluate) {
  EXPECT_DOUBLE_EQ(evaluate(Steep{0.9, 0.8}, 0.2, 0.7), 0.5);
  EXPECT_DOUBLE_EQ(evaluate(Steep{0.9, 0.8}, 0.7, 0.2), 0.5);
  for (double x : {0.0, 0.3, 1.0}) EXPECT_EQ(evaluate(Flat{0.4, 0.1}, x, x), 0.4);
  EXPECT_EQ(evaluate(TightExample{}, 0.3, 0.6), 0.0);
  EXPECT_THROW(evaluate(Flat{}, -0.1, 0.5), std::domain_error);
  EXPECT_THROW(evaluate(Flat{}, 0.5, 1.1), std::domain_error);
}

TEST(GraphonSpec, DiscretizeClosedForms) {
  EXPECT_NEAR(discretize(Steep{0.9, 0.8}, 1)(0, 0), 0.9 - 0.8 / 3.0, 1e-14);
  EXPECT_NEAR(discretize(Flat{0.5, 0.3}, 1)(0, 0), 0.5 * (0.6 - 0.09), 1e-14);
  EXPECT_EQ(discretize(TightExample{}, 4), tight_example());
}

TEST(GraphonSpec, DiscretizeMatchesStepping) {
  for (const auto& spec : {GraphonSpec{Flat{0.5, 0.3}}, GraphonSpec{Flat{0.7, 0.13}}, GraphonSpec{Steep{0.9, 0.8}},
                           GraphonSpec{TightExample{}}}) {
    for (std::size_t n : {4, 5, 8}) {
      const auto coarse = discretize(spec, n);
      for (std::size_t k : {2, 3}) {
        const auto stepped = step_operator(discretize(spec, k * n), n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(coarse(i, j), stepped(i, j), 1e-12) << describe(spec);
      }
    }
  }
}

TEST(GraphonSpec, DiscretizeMatchesQuadrature) {
  const GraphonSpec spec = Flat{0.6, 0.27};
  const auto w = discretize(spec, 5);
  const int g = 600;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i; j < 5; ++j) {
      double s = 0;
      for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b)
          s += evaluate(spec, (i + (a + 0.5) / g) / 5.0, (j + (b + 0.5) / g) / 5.0);
      EXPECT_NEAR(w(i, j), s / (g * g), 2e-3);
    }
}

TEST(GraphonSpec, Validation) {
  EXPECT_THROW(validate(Steep{0.5, 0.6}), std::domain_error);
  EXPECT_THROW(validate(Flat{0.5, 0.6}), std::domain_error);
  EXPECT_THROW(validate(Flat{1.5, 0.2}), std::domain_error);
  EXPECT_THROW(parse_spec("wiggly:1"), std::invalid_argument);
  EXPECT_THROW(parse_spec("flat:0.5"), std::invalid_argument);
  EXPECT_THROW(parse_spec("flat:0.5,x"), std::invalid_argument);
  EXPECT_TRUE(std::holds_alternative<Steep>(parse_spec("steep:0.9,0.8")));
  EXPECT_TRUE(std::holds_alternative<TightExample>(parse_spec("tight")));
}
