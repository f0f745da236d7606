#pragma once

// Cut-norm of step kernels and a restricted cut-distance between step
// graphons.
//
// For a step kernel K on the N-grid and measurable S, T the integral over
// S x T equals s^T K t / N^2 where s_i, t_j in [0,1] are the fractions of
// cell i (resp. j) covered. The objective is bilinear on the box [0,1]^N x
// [0,1]^N, so for fixed t it is linear in s and maximized at a vertex, and
// vice versa. Hence the supremum over measurable sets is attained by unions
// of whole cells, and enumerating grid-aligned S with the best T for each is
// exact. Both signs are optimized because the norm takes an absolute value.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "robinson/errors.hpp"
#include "robinson/random.hpp"
#include "robinson/spectral.hpp"
#include "robinson/step_graphon.hpp"

namespace robinson {

struct CutNormResult {
  double value = 0;
  IntervalSet witness_s;
  IntervalSet witness_t;
  bool exact = false;
};

inline constexpr std::size_t kCutNormExactMax = 24;

/// |(1/N^2) sum_{i in S, j in T} K_ij|.
inline double cut_value(const StepGraphon& k, const IntervalSet& s, const IntervalSet& t) {
  const std::size_t n = k.resolution();
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!s.contains(i)) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (t.contains(j)) acc += k(i, j);
  }
  const double nn = static_cast<double>(n);
  return std::abs(acc) / (nn * nn);
}

namespace detail {

/// Best T for the given column sums and sign; returns sum over chosen T.
inline double best_columns(const std::vector<double>& col, double sign, IntervalSet* t) {
  double acc = 0;
  for (std::size_t j = 0; j < col.size(); ++j) {
    const double c = sign * col[j];
    if (c > 0) acc += c;
    if (t) t->set(j, c > 0);
  }
  return acc;
}

}  // namespace detail

/// Exact cut-norm by Gray-code enumeration of S with the optimal T per S.
inline CutNormResult cutnorm_exact(const StepGraphon& k) {
  const std::size_t n = k.resolution();
  if (n > kCutNormExactMax)
    throw BudgetError("cutnorm_exact: N=" + std::to_string(n) + " exceeds " +
                      std::to_string(kCutNormExactMax) + "; use cutnorm_heuristic");
  std::vector<double> col(n, 0.0);
  std::uint64_t mask = 0, best_mask = 0;
  double best = 0, best_sign = 1;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(step));
    mask ^= std::uint64_t{1} << bit;
    const double dir = (mask >> bit) & 1U ? 1.0 : -1.0;
    const auto row = k.row(bit);
    double pos = 0, neg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      col[j] += dir * row[j];
      if (col[j] > 0) pos += col[j];
      else neg -= col[j];
    }
    if (pos > best) { best = pos; best_mask = mask; best_sign = 1; }
    if (neg > best) { best = neg; best_mask = mask; best_sign = -1; }
  }
  CutNormResult res;
  res.exact = true;
  res.witness_s = IntervalSet::from_mask(n, best_mask);
  res.witness_t = IntervalSet(n);
  std::fill(col.begin(), col.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (res.witness_s.contains(i))
      for (std::size_t j = 0; j < n; ++j) col[j] += k(i, j);
  detail::best_columns(col, best_sign, &res.witness_t);
  res.value = cut_value(k, res.witness_s, res.witness_t);
  return res;
}

/// Alternating maximization from random starts (restart r uses seed + r;
/// restart 0 starts from S = [0,1]). The result exhibits witnesses, so it is
/// a certified lower bound on the cut-norm; best-so-far over restarts.
inline CutNormResult cutnorm_heuristic(const StepGraphon& k, std::size_t restarts,
                                       std::uint64_t seed) {
  if (restarts == 0) throw std::invalid_argument("cutnorm_heuristic: restarts must be >= 1");
  const std::size_t n = k.resolution();
  CutNormResult best;
  best.witness_s = IntervalSet(n);
  best.witness_t = IntervalSet(n);
  std::vector<double> sums(n);
  IntervalSet s(n), t(n);
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(seed + r);
    IntervalSet start(n);
    if (r == 0) start = IntervalSet::full(n);
    else
      for (std::size_t i = 0; i < n; ++i) start.set(i, coin(rng));
    if (start.count() == 0) start.set(static_cast<std::size_t>(uniform_index(rng, n)), true);
    for (double sign : {1.0, -1.0}) {
      s = start;
      double value = -1;
      for (int iter = 0; iter < 1000; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
          if (s.contains(i))
            for (std::size_t j = 0; j < n; ++j) sums[j] += k(i, j);
        detail::best_columns(sums, sign, &t);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
          if (t.contains(j))
            for (std::size_t i = 0; i < n; ++i) sums[i] += k(i, j);
        const double next = detail::best_columns(sums, sign, &s);
        if (next <= value + 1e-15) break;
        value = next;
      }
      const double v = cut_value(k, s, t);
      if (v > best.value) {
        best.value = v;
        best.witness_s = s;
        best.witness_t = t;
      }
    }
  }
  best.exact = false;
  return best;
}

/// Cut-norm of u - w: exact when the resolution allows, heuristic otherwise.
inline CutNormResult cutnorm_auto(const StepGraphon& kernel, std::size_t restarts = 200,
                                  std::uint64_t seed = 1) {
  if (kernel.resolution() <= kCutNormExactMax) return cutnorm_exact(kernel);
  return cutnorm_heuristic(kernel, restarts, seed);
}

/// u^pi(i,j) = u(pi(i), pi(j)).
inline StepGraphon permuted(const StepGraphon& u, const std::vector<std::size_t>& pi) {
  const std::size_t n = u.resolution();
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = u(pi[i], pi[j]);
  return StepGraphon(n, std::move(v), u.range());
}

struct CutDistanceResult {
  double value = 0;
  std::vector<std::size_t> permutation;  // best pi found, applied to u
  bool final_exact = false;              // final value from cutnorm_exact
};

/// Cut-distance restricted to permutations of the N grid intervals, found by
/// simulated annealing over transpositions from the best of the identity and
/// the two Fiedler-vector alignments. The value is an upper bound on the
/// restricted infimum (exact when N <= 16, where the final evaluation is
/// exact) and only an estimate of the unrestricted distance.
inline CutDistanceResult cutdist_blockperm(const StepGraphon& u, const StepGraphon& w,
                                           std::size_t budget, std::uint64_t seed) {
  require_same_resolution(u, w, "cutdist_blockperm");
  const std::size_t n = u.resolution();
  constexpr std::size_t kInnerRestarts = 6;
  auto objective = [&](const std::vector<std::size_t>& pi) {
    return cutnorm_heuristic(difference(permuted(u, pi), w), kInnerRestarts, seed).value;
  };

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> starts{identity};
  if (n >= 3) {
    auto fiedler_order = [](const StepGraphon& g) {
      const std::size_t m = g.resolution();
      Eigen::MatrixXd weights(m, m);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
          weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::max(0.0, g(i, j));
      return order_by(fiedler_dense(weighted_laplacian(weights)).vector);
    };
    const auto ou = fiedler_order(u), ow = fiedler_order(w);
    std::vector<std::size_t> fwd(n), rev(n);
    for (std::size_t r = 0; r < n; ++r) {
      fwd[ow[r]] = ou[r];
      rev[ow[r]] = ou[n - 1 - r];
    }
    starts.push_back(fwd);
    starts.push_back(rev);
  }

  std::vector<std::size_t> current = identity;
  double cur = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const double v = objective(s);
    if (v < cur) { cur = v; current = s; }
  }
  std::vector<std::size_t> best = current;
  double best_val = cur;

  Rng rng(seed);
  const double t0 = std::max(1e-3, 0.1 * cur);
  for (std::size_t it = 0; it < budget && best_val > 1e-15 && n >= 2; ++it) {
    const double temp = t0 * std::pow(1e-3, static_cast<double>(it) / static_cast<double>(std::max<std::size_t>(budget, 1)));
    const auto a = static_cast<std::size_t>(uniform_index(rng, n));
    auto b = static_cast<std::size_t>(uniform_index(rng, n - 1));
    if (b >= a) ++b;
    std::swap(current[a], current[b]);
    const double v = objective(current);
    if (v <= cur || uniform01(rng) < std::exp((cur - v) / temp)) {
      cur = v;
      if (v < best_val) { best_val = v; best = current; }
    } else {
      std::swap(current[a], current[b]);
    }
  }

  CutDistanceResult res;
  res.permutation = best;
  const StepGraphon diff = difference(permuted(u, best), w);
  if (n <= 16) {
    res.value = cutnorm_exact(diff).value;
    res.final_exact = true;
  } else {
    res.value = cutnorm_heuristic(diff, 200, seed).value;
  }
  return res;
}

}  // namespace robinson
