#pragma once

// The Robinson gauge Gamma(w, A) on step graphons, its maximization over
// grid-aligned A, and interval-quadruple lower-bound certificates.
//
// For y in cell i, z in cell j with i < j the inner x-integral of the first
// term is affine in the offset t = y - i/N and constant in z:
//   c = h * sum_{k < i, k in A} (v[k][j] - v[k][i]),  slope 1[i in A](v[i][j] - v[i][i]),
// and symmetrically for the second term in s = (j+1)/N - z with the cells
// k > j. Pairs inside one cell contribute nothing because w is constant in
// its second argument there. Each block pair therefore contributes
// h * int_0^h [c + m t]_+ dt, which has a closed form.

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "robinson/errors.hpp"
#include "robinson/random.hpp"
#include "robinson/step_graphon.hpp"

namespace robinson {

/// int_0^len [c + m t]_+ dt.
inline double clipped_affine_integral(double c, double m, double len) {
  const double a = c, b = c + m * len;
  if (a >= 0 && b >= 0) return 0.5 * len * (a + b);
  if (a <= 0 && b <= 0) return 0.0;
  const double pos = std::max(a, b);
  return 0.5 * pos * pos / std::abs(m);
}

/// Incremental evaluator of Gamma(w, A) for a fixed step graphon. Holds the
/// prefix tables P[i][j] = sum_{k<i, k in A} v[k][j] and the matching suffix
/// table Q, so a single-cell flip costs O(N^2) and an evaluation O(N^2).
class GammaEvaluator {
 public:
  explicit GammaEvaluator(const StepGraphon& w)
      : w_(w), n_(w.resolution()), in_(n_, 0), p_(n_ * n_, 0.0), q_(n_ * n_, 0.0) {}

  std::size_t resolution() const { return n_; }

  void assign(const IntervalSet& a) {
    if (a.resolution() != n_) throw std::invalid_argument("gamma: resolution mismatch between w and A");
    std::fill(p_.begin(), p_.end(), 0.0);
    std::fill(q_.begin(), q_.end(), 0.0);
    std::fill(in_.begin(), in_.end(), std::uint8_t{0});
    for (std::size_t k = 0; k < n_; ++k)
      if (a.contains(k)) flip(k);
  }

  void flip(std::size_t k) {
    in_[k] ^= 1U;
    const double sign = in_[k] ? 1.0 : -1.0;
    const auto row = w_.row(k);
    for (std::size_t i = k + 1; i < n_; ++i) {
      double* p = &p_[i * n_];
      for (std::size_t j = 0; j < n_; ++j) p[j] += sign * row[j];
    }
    for (std::size_t i = 0; i < k; ++i) {
      double* q = &q_[i * n_];
      for (std::size_t j = 0; j < n_; ++j) q[j] += sign * row[j];
    }
  }

  bool contains(std::size_t k) const { return in_[k] != 0; }

  IntervalSet current() const {
    IntervalSet s(n_);
    for (std::size_t k = 0; k < n_; ++k) s.set(k, in_[k] != 0);
    return s;
  }

  double value() const {
    const double h = 1.0 / static_cast<double>(n_);
    double acc = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* pi = &p_[i * n_];
      const auto vi = w_.row(i);
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double* qj = &q_[j * n_];
        const double c1 = (pi[j] - pi[i]) * h;
        const double m1 = in_[i] ? vi[j] - vi[i] : 0.0;
        const double c2 = (qj[i] - qj[j]) * h;
        const double m2 = in_[j] ? vi[j] - w_(j, j) : 0.0;
        acc += clipped_affine_integral(c1, m1, h) + clipped_affine_integral(c2, m2, h);
      }
    }
    return std::max(0.0, acc * h);
  }

 private:
  const StepGraphon& w_;
  std::size_t n_;
  std::vector<std::uint8_t> in_;
  std::vector<double> p_, q_;
};

inline double gamma_of_set(const StepGraphon& w, const IntervalSet& a) {
  GammaEvaluator ev(w);
  ev.assign(a);
  return ev.value();
}

struct GammaEstimate {
  double value = 0;
  IntervalSet witness;
  std::string method;
  std::size_t resolution = 0;
};

inline nlohmann::json to_json(const GammaEstimate& g) {
  return {{"value", g.value},
          {"witness_bits", g.witness.to_string()},
          {"method", g.method},
          {"resolution", g.resolution}};
}

inline constexpr std::size_t kGammaExhaustiveMax = 20;

/// Max of Gamma(w, A) over all 2^N grid-aligned A (Gray-code order).
inline GammaEstimate gamma_exhaustive(const StepGraphon& w) {
  const std::size_t n = w.resolution();
  if (n > kGammaExhaustiveMax)
    throw BudgetError("gamma_exhaustive: N=" + std::to_string(n) + " exceeds " +
                      std::to_string(kGammaExhaustiveMax) + "; use gamma_localsearch");
  GammaEvaluator ev(w);
  ev.assign(IntervalSet(n));
  GammaEstimate best{0.0, IntervalSet(n), "exhaustive", n};
  std::uint64_t mask = 0, best_mask = 0;
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << n); ++step) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(step));
    mask ^= std::uint64_t{1} << bit;
    ev.flip(bit);
    const double v = ev.value();
    if (v > best.value) {
      best.value = v;
      best_mask = mask;
    }
  }
  best.witness = IntervalSet::from_mask(n, best_mask);
  return best;
}

namespace detail {

/// First-improvement single-cell-flip hill climb; returns the local optimum.
inline double climb(GammaEvaluator& ev, double value, Rng& rng, std::size_t max_sweeps = 200) {
  const std::size_t n = ev.resolution();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    std::shuffle(order.begin(), order.end(), rng);
    bool improved = false;
    for (std::size_t k : order) {
      ev.flip(k);
      const double v = ev.value();
      if (v > value + 1e-15) {
        value = v;
        improved = true;
      } else {
        ev.flip(k);
      }
    }
    if (!improved) break;
  }
  return value;
}

}  // namespace detail

/// Hill climbing over single-cell flips. Restart 0 starts from A = [0,1],
/// further restarts from random sets; extra starting sets may be supplied.
inline GammaEstimate gamma_localsearch(const StepGraphon& w, std::size_t restarts, std::uint64_t seed,
                                       const std::vector<IntervalSet>& seeds = {}) {
  const std::size_t n = w.resolution();
  GammaEvaluator ev(w);
  GammaEstimate best{0.0, IntervalSet(n), "local-search", n};
  // Caller seeds and the full set are tried first, then random starts.
  std::vector<IntervalSet> starts(seeds.begin(), seeds.end());
  starts.push_back(IntervalSet::full(n));
  for (std::size_t r = 0; r < restarts + starts.size(); ++r) {
    Rng rng(seed + r);
    IntervalSet start(n);
    if (r < starts.size()) {
      start = starts[r];
    } else {
      for (std::size_t k = 0; k < n; ++k) start.set(k, coin(rng));
    }
    ev.assign(start);
    const double v = detail::climb(ev, ev.value(), rng);
    if (v > best.value) {
      best.value = v;
      best.witness = ev.current();
    }
  }
  return best;
}

/// Four contiguous intervals S_u <= S_l <= T_l <= T_u of common length.
struct QuadrupleCertificate {
  std::size_t cells = 0;  // common length in cells
  std::size_t resolution = 0;
  std::size_t s_u = 0, s_l = 0, t_l = 0, t_u = 0;  // first cell of each interval
  double alpha = 0;
  double upper_average = 0;  // mean of w over S_u x T_u
  double lower_average = 0;  // mean of w over S_l x T_l
  double value = 0;          // alpha^3 (upper - lower), clipped at 0
};

/// Best contiguous quadruple for the interval-average lower bound. Block
/// averages come from a 2-D prefix table; for each inner pair (S_l, T_l) the
/// best outer pair is read from a dominance table, so the scan is O(N^2).
inline QuadrupleCertificate gamma_lower_certificate(const StepGraphon& w, std::size_t cells) {
  const std::size_t n = w.resolution();
  if (cells == 0 || 4 * cells > n)
    throw std::invalid_argument("gamma_lower_certificate: need 1 <= 4*alpha_cells <= N (N=" +
                                std::to_string(n) + ", alpha_cells=" + std::to_string(cells) + ")");
  const std::size_t L = cells;
  std::vector<double> pre((n + 1) * (n + 1), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      pre[(i + 1) * (n + 1) + j + 1] =
          w(i, j) + pre[i * (n + 1) + j + 1] + pre[(i + 1) * (n + 1) + j] - pre[i * (n + 1) + j];
  const double area = static_cast<double>(L * L);
  auto avg = [&](std::size_t a, std::size_t b) {
    const std::size_t r = n + 1;
    return (pre[(a + L) * r + b + L] - pre[a * r + b + L] - pre[(a + L) * r + b] + pre[a * r + b]) / area;
  };
  const std::size_t last = n - L;  // last admissible start
  // best[a][d] = max avg(a', d') over a' <= a, d' >= d.
  std::vector<double> best((last + 1) * (last + 1), -std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> arg_a(best.size()), arg_d(best.size());
  for (std::size_t a = 0; a <= last; ++a) {
    for (std::size_t d = last + 1; d-- > 0;) {
      const std::size_t idx = a * (last + 1) + d;
      best[idx] = avg(a, d);
      arg_a[idx] = static_cast<std::uint32_t>(a);
      arg_d[idx] = static_cast<std::uint32_t>(d);
      auto take = [&](std::size_t other) {
        if (best[other] > best[idx]) {
          best[idx] = best[other];
          arg_a[idx] = arg_a[other];
          arg_d[idx] = arg_d[other];
        }
      };
      if (a > 0) take((a - 1) * (last + 1) + d);
      if (d < last) take(a * (last + 1) + d + 1);
    }
  }
  QuadrupleCertificate cert;
  cert.cells = L;
  cert.resolution = n;
  cert.alpha = static_cast<double>(L) / static_cast<double>(n);
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t b = L; b + 2 * L <= last; ++b) {
    for (std::size_t c = b + L; c + L <= last; ++c) {
      const std::size_t idx = (b - L) * (last + 1) + (c + L);
      const double lower = avg(b, c);
      const double gap = best[idx] - lower;
      if (gap > best_gap) {
        best_gap = gap;
        cert.s_u = arg_a[idx];
        cert.s_l = b;
        cert.t_l = c;
        cert.t_u = arg_d[idx];
        cert.upper_average = best[idx];
        cert.lower_average = lower;
      }
    }
  }
  cert.value = std::max(0.0, cert.alpha * cert.alpha * cert.alpha * best_gap);
  return cert;
}

/// The union S_l | T_u, the set whose Gamma value the certificate bounds.
inline IntervalSet certificate_set(const QuadrupleCertificate& c) {
  IntervalSet s(c.resolution);
  for (std::size_t k = 0; k < c.cells; ++k) {
    s.set(c.s_l + k, true);
    s.set(c.t_u + k, true);
  }
  return s;
}

struct ConvergedGamma {
  GammaEstimate estimate;
  std::vector<std::pair<std::size_t, double>> curve;  // (resolution, value)
  bool converged = false;
};

struct ConvergenceOptions {
  std::size_t max_resolution = 96;
  std::size_t restarts = 4;
  std::uint64_t seed = 1;
  double tolerance = 1e-6;
};

/// Grid-aligned Gamma estimate followed by refinement (x2 each step) until
/// the value moves by at most `tolerance` or the resolution cap is reached.
/// Each refinement is seeded with the previous witness, so the curve is
/// nondecreasing.
inline ConvergedGamma gamma_converged(const StepGraphon& w, const ConvergenceOptions& opt = {}) {
  ConvergedGamma out;
  const std::size_t n = w.resolution();
  GammaEstimate cur = n <= kGammaExhaustiveMax ? gamma_exhaustive(w)
                                               : gamma_localsearch(w, opt.restarts, opt.seed);
  out.curve.emplace_back(n, cur.value);
  StepGraphon fine = w;
  std::size_t factor = 1;
  while (n * factor * 2 <= opt.max_resolution) {
    factor *= 2;
    fine = refine(w, factor);
    const IntervalSet start = cur.witness.refined(2);
    GammaEstimate next = gamma_localsearch(fine, opt.restarts, opt.seed, {start});
    const double prev = cur.value;
    if (next.value < prev) {
      next.value = prev;
      next.witness = start;
    }
    cur = next;
    out.curve.emplace_back(n * factor, cur.value);
    if (cur.value - prev <= opt.tolerance) {
      out.converged = true;
      break;
    }
  }
  cur.method = out.curve.size() == 1 ? cur.method : "refined-" + cur.method;
  out.estimate = cur;
  return out;
}

}  // namespace robinson
