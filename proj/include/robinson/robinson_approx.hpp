#pragma once

// Robinson approximation R_w, black/white/grey region maps, and the
// approximation-error report.
//
// Averages over S x T with |S| = |T| = alpha are handled through fractional
// cell memberships s_i, t_j in [0, cap] with sum s_i = alpha*N. For fixed t
// the objective is linear in s, so the optimal s is a fractional knapsack
// (greedy by row weight, at most one fractional cell); alternating the two
// half-steps converges to a local optimum. A family of alpha x alpha squares
// anchored at grid points is evaluated exactly alongside, which guarantees
// the grey regions of a map contain no square of side alpha.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "robinson/cutnorm.hpp"
#include "robinson/errors.hpp"
#include "robinson/gamma.hpp"
#include "robinson/random.hpp"
#include "robinson/step_graphon.hpp"

namespace robinson {

enum class Corner { kUL, kLR };

/// Fractional selections S (rows) and T (columns) of equal mass.
struct MassSelection {
  std::vector<double> s, t;  // per-cell inclusion fractions
  double mass = 0;           // alpha
  double average = 0;        // mean of w over S x T
};

struct AveragerOptions {
  std::size_t restarts = 8;
  std::uint64_t seed = 1;
  bool pivot_starts = true;  // add one start per row of the S range
};

namespace detail {

inline constexpr double kGridEps = 1e-9;

/// Greedy fractional knapsack: fills `out` to total `mass` within `caps`,
/// taking cells in order of decreasing (or increasing) weight.
inline void knapsack(const std::vector<double>& caps, const std::vector<double>& weight, double mass,
                     bool maximize, std::vector<std::size_t>& order, std::vector<double>& out) {
  const std::size_t n = caps.size();
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return maximize ? weight[a] > weight[b] : weight[a] < weight[b];
  });
  out.assign(n, 0.0);
  double left = mass;
  for (std::size_t idx : order) {
    if (left <= 0) break;
    const double take = std::min(caps[idx], left);
    out[idx] = take;
    left -= take;
  }
}

inline double mass_of(const std::vector<double>& caps) {
  return std::accumulate(caps.begin(), caps.end(), 0.0);
}

}  // namespace detail

/// Precomputed averaging machinery for one step graphon and mass alpha.
class CellAverager {
 public:
  CellAverager(const StepGraphon& w, double alpha, AveragerOptions opt = {})
      : w_(w), n_(w.resolution()), alpha_(alpha), opt_(opt) {
    if (!(alpha > 0 && alpha <= 1)) throw std::invalid_argument("best_cell_average: alpha must lie in (0,1]");
    k_ = alpha_ * static_cast<double>(n_);
    build_prefix();
    build_anchored();
  }

  double alpha() const { return alpha_; }
  std::size_t resolution() const { return n_; }

  /// Local optimum of the selection average over caps; +-inf if infeasible.
  MassSelection optimize(const std::vector<double>& cap_s, const std::vector<double>& cap_t,
                         bool maximize) const {
    MassSelection best;
    best.mass = alpha_;
    const double fail = maximize ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
    best.average = fail;
    if (detail::mass_of(cap_s) < k_ - detail::kGridEps || detail::mass_of(cap_t) < k_ - detail::kGridEps)
      return best;
    std::vector<double> s, t, weight(n_);
    std::vector<std::size_t> order;
    Rng rng(opt_.seed);
    std::vector<std::size_t> pivots;
    if (opt_.pivot_starts)
      for (std::size_t p = 0; p < n_; ++p)
        if (cap_s[p] > 0) pivots.push_back(p);
    const std::size_t starts = 1 + opt_.restarts + pivots.size();
    for (std::size_t r = 0; r < starts; ++r) {
      // r = 0: the selection hugging the corner; then random fills; then one
      // start per admissible row p, taking T from the best cells of row p.
      std::vector<double> prio(n_);
      for (std::size_t j = 0; j < n_; ++j) {
        if (r == 0) prio[j] = -static_cast<double>(j);
        else if (r <= opt_.restarts) prio[j] = uniform01(rng);
        else prio[j] = (maximize ? 1 : -1) * w_(pivots[r - 1 - opt_.restarts], j);
      }
      detail::knapsack(cap_t, prio, k_, true, order, t);
      double value = fail;
      for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t i = 0; i < n_; ++i) {
          const auto row = w_.row(i);
          double acc = 0;
          for (std::size_t j = 0; j < n_; ++j) acc += row[j] * t[j];
          weight[i] = acc;
        }
        detail::knapsack(cap_s, weight, k_, maximize, order, s);
        for (std::size_t j = 0; j < n_; ++j) {
          double acc = 0;
          for (std::size_t i = 0; i < n_; ++i) acc += s[i] * w_(i, j);
          weight[j] = acc;
        }
        detail::knapsack(cap_t, weight, k_, maximize, order, t);
        double next = 0;
        for (std::size_t j = 0; j < n_; ++j) next += weight[j] * t[j];
        next /= k_ * k_;
        const bool better = maximize ? next > value + 1e-15 : next < value - 1e-15;
        if (!better) break;
        value = next;
      }
      const bool better = maximize ? value > best.average : value < best.average;
      if (better) {
        best.average = value;
        best.s = s;
        best.t = t;
      }
    }
    return best;
  }

  /// Sup of the selection average over UL(x, y) = [0,x] x [y,1]; -inf when
  /// no alpha x alpha cell fits.
  double upper_left(double x, double y) const {
    std::vector<double> cs(n_), ct(n_);
    const double nx = x * static_cast<double>(n_), ny = y * static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      cs[i] = std::clamp(nx - static_cast<double>(i), 0.0, 1.0);
      ct[i] = std::clamp(static_cast<double>(i) + 1 - ny, 0.0, 1.0);
    }
    double v = optimize(cs, ct, true).average;
    // Anchored squares [p/N, p/N + alpha] x [q/N - alpha, q/N] inside UL.
    const double pmax = std::floor(nx - k_ + detail::kGridEps);
    const double qmin = std::ceil(ny + k_ - detail::kGridEps);
    if (pmax >= 0 && qmin <= static_cast<double>(n_))
      v = std::max(v, ul_table_[static_cast<std::size_t>(pmax) * (n_ + 1) + static_cast<std::size_t>(qmin)]);
    return v;
  }

  /// Inf of the selection average over LR at grid points (i, j), over
  /// splits S <= c <= T at grid points c; +inf when no cell fits.
  double lower_right(std::size_t i, std::size_t j) const {
    double v = std::numeric_limits<double>::infinity();
    std::vector<double> cs(n_), ct(n_);
    for (std::size_t c = i; c <= j; ++c) {
      if (static_cast<double>(c - i) < k_ - detail::kGridEps || static_cast<double>(j - c) < k_ - detail::kGridEps)
        continue;
      for (std::size_t q = 0; q < n_; ++q) {
        cs[q] = (q >= i && q < c) ? 1.0 : 0.0;
        ct[q] = (q >= c && q < j) ? 1.0 : 0.0;
      }
      v = std::min(v, optimize(cs, ct, false).average);
    }
    return std::min(v, lr_table_[i * (n_ + 1) + j]);
  }

  /// Exact mean of w over [x0, x0+alpha] x [y0, y0+alpha].
  double square_average(double x0, double y0) const {
    const double a = alpha_;
    return (integral(x0 + a, y0 + a) - integral(x0, y0 + a) - integral(x0 + a, y0) + integral(x0, y0)) / (a * a);
  }

 private:
  /// int_0^X int_0^Y w: exact, the step integral is bilinear inside a cell.
  double integral(double x, double y) const {
    const double n = static_cast<double>(n_);
    auto split = [&](double u, std::size_t& cell, double& frac) {
      const double s = std::clamp(u * n, 0.0, n);
      cell = std::min(static_cast<std::size_t>(std::floor(s)), n_);
      frac = s - static_cast<double>(cell);
      if (cell == n_) frac = 0;
    };
    std::size_t ci, cj;
    double fi, fj;
    split(x, ci, fi);
    split(y, cj, fj);
    const std::size_t r = n_ + 1;
    const double g00 = pre_[ci * r + cj];
    const double g10 = ci < n_ ? pre_[(ci + 1) * r + cj] : g00;
    const double g01 = cj < n_ ? pre_[ci * r + cj + 1] : g00;
    const double g11 = (ci < n_ && cj < n_) ? pre_[(ci + 1) * r + cj + 1] : (ci < n_ ? g10 : g01);
    const double v = (1 - fi) * (1 - fj) * g00 + fi * (1 - fj) * g10 + (1 - fi) * fj * g01 + fi * fj * g11;
    return v / (n * n);
  }

  void build_prefix() {
    const std::size_t r = n_ + 1;
    pre_.assign(r * r, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        pre_[(i + 1) * r + j + 1] = w_(i, j) + pre_[i * r + j + 1] + pre_[(i + 1) * r + j] - pre_[i * r + j];
  }

  void build_anchored() {
    const std::size_t r = n_ + 1;
    const double n = static_cast<double>(n_);
    const double ninf = -std::numeric_limits<double>::infinity();
    const double pinf = std::numeric_limits<double>::infinity();
    // sq[p][q]: the square [p/N, p/N + alpha] x [q/N - alpha, q/N].
    std::vector<double> sq(r * r, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t p = 0; p < r; ++p)
      for (std::size_t q = 0; q < r; ++q) {
        const double x0 = static_cast<double>(p) / n, y1 = static_cast<double>(q) / n;
        if (x0 + alpha_ <= 1 + detail::kGridEps && y1 - alpha_ >= -detail::kGridEps)
          sq[p * r + q] = square_average(x0, y1 - alpha_);
      }
    // ul_table_[p][q] = max over p' <= p, q' >= q.
    ul_table_.assign(r * r, ninf);
    for (std::size_t p = 0; p < r; ++p)
      for (std::size_t q = r; q-- > 0;) {
        double v = std::isnan(sq[p * r + q]) ? ninf : sq[p * r + q];
        if (p > 0) v = std::max(v, ul_table_[(p - 1) * r + q]);
        if (q + 1 < r) v = std::max(v, ul_table_[p * r + q + 1]);
        ul_table_[p * r + q] = v;
      }
    // lr_table_[p][q] = min over p' >= p, q' <= q with the square in the
    // upper triangle, i.e. q' - p' >= 2 alpha N.
    lr_table_.assign(r * r, pinf);
    for (std::size_t p = r; p-- > 0;)
      for (std::size_t q = 0; q < r; ++q) {
        double v = pinf;
        if (q >= p && static_cast<double>(q - p) >= 2 * k_ - detail::kGridEps && !std::isnan(sq[p * r + q]))
          v = sq[p * r + q];
        if (p + 1 < r) v = std::min(v, lr_table_[(p + 1) * r + q]);
        if (q > 0) v = std::min(v, lr_table_[p * r + q - 1]);
        lr_table_[p * r + q] = v;
      }
  }

  const StepGraphon& w_;
  std::size_t n_;
  double alpha_, k_;
  AveragerOptions opt_;
  std::vector<double> pre_, ul_table_, lr_table_;
};

/// Best alpha-mass cell average at corner (x, y), x <= y. UL mode returns the
/// sup over UL(x,y) with the empty-sup convention 0; LR mode returns the inf
/// over LR(x,y) (x, y snapped to grid points) or +inf when LR is too small.
inline double best_cell_average(const StepGraphon& w, double x, double y, double alpha, Corner mode,
                                AveragerOptions opt = {}) {
  if (!(x >= 0 && y <= 1 && x <= y)) throw std::invalid_argument("best_cell_average: need 0 <= x <= y <= 1");
  const CellAverager avg(w, alpha, opt);
  if (mode == Corner::kUL) {
    const double v = avg.upper_left(x, y);
    return std::isinf(v) ? 0.0 : v;
  }
  const double n = static_cast<double>(w.resolution());
  return avg.lower_right(static_cast<std::size_t>(std::lround(x * n)), static_cast<std::size_t>(std::lround(y * n)));
}

/// Makes a symmetric matrix Robinson by a running maximum: in the upper
/// triangle each entry becomes the max of itself, the entry above and the
/// entry to the right.
inline StepGraphon robinson_closure(const StepGraphon& w) {
  const std::size_t n = w.resolution();
  std::vector<double> r(w.values().begin(), w.values().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = n; j-- > i;) {
      double v = r[i * n + j];
      if (i > 0) v = std::max(v, r[(i - 1) * n + j]);
      if (j + 1 < n) v = std::max(v, r[i * n + j + 1]);
      r[i * n + j] = r[j * n + i] = v;
    }
  return StepGraphon(n, std::move(r), w.range());
}

/// R_w sampled on an M-grid: block (i,j), i <= j, takes the value at its
/// lower-right point ((i+1)/M, j/M) (the diagonal point ((i+1)/M, (i+1)/M)
/// for i = j), then the running-max closure absorbs heuristic noise.
inline StepGraphon robinson_approximation(const StepGraphon& w, double gamma_estimate, std::size_t m,
                                          AveragerOptions opt = {}) {
  if (robinson_violation(w) == 0) return w;
  if (!(gamma_estimate > 0))
    throw std::invalid_argument("robinson_approximation: gamma estimate must be positive for a non-Robinson input");
  if (m == 0) throw std::invalid_argument("robinson_approximation: output resolution must be >= 1");
  const double alpha = std::min(1.0, std::pow(gamma_estimate, 2.0 / 7.0));
  const CellAverager avg(w, alpha, opt);
  const double M = static_cast<double>(m);
  std::vector<double> v(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      const double x = static_cast<double>(i + 1) / M;
      const double y = i == j ? x : static_cast<double>(j) / M;
      const double s = avg.upper_left(x, y);
      v[i * m + j] = v[j * m + i] = std::isinf(s) ? 0.0 : std::clamp(s, 0.0, 1.0);
    }
  return robinson_closure(StepGraphon(m, std::move(v)));
}

// ---------------------------------------------------------------------------
// Region maps on the grid points (i/N, j/N), 0 <= i <= j <= N.

enum class Region : std::uint8_t { kGrey = 0, kWhite = 1, kBlack = 2 };

struct RegionMap {
  std::size_t m = 0;       // levels
  double alpha = 0;
  std::size_t n = 0;       // grid points run 0..n
  std::vector<double> ul, lr;                    // per point, (n+1)^2 row-major, upper triangle
  std::vector<std::vector<Region>> levels;       // levels[k], k = 0..m
  std::vector<std::vector<double>> f, g;         // boundaries f_k, g_k per grid x

  std::size_t index(std::size_t i, std::size_t j) const { return i * (n + 1) + j; }
  Region at(std::size_t k, std::size_t i, std::size_t j) const { return levels[k][index(i, j)]; }
};

inline constexpr std::size_t kDefaultLevels = 13;

inline RegionMap region_map(const StepGraphon& w, std::size_t m, double alpha, AveragerOptions opt = {}) {
  if (m == 0) throw std::invalid_argument("region_map: m must be >= 1");
  if (!(alpha > 0 && alpha < 0.5)) throw std::invalid_argument("region_map: alpha must lie in (0, 1/2)");
  const std::size_t n = w.resolution();
  const CellAverager avg(w, alpha, opt);
  RegionMap map;
  map.m = m;
  map.alpha = alpha;
  map.n = n;
  const std::size_t r = n + 1;
  const double ninf = -std::numeric_limits<double>::infinity();
  const double pinf = std::numeric_limits<double>::infinity();
  map.ul.assign(r * r, ninf);
  map.lr.assign(r * r, pinf);
  const double N = static_cast<double>(n);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < r; ++j) {
      map.ul[i * r + j] = avg.upper_left(static_cast<double>(i) / N, static_cast<double>(j) / N);
      map.lr[i * r + j] = avg.lower_right(i, j);
    }
  // UL(i-1, j) and UL(i, j+1) lie inside UL(i, j); symmetrically for LR.
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = r; j-- > i;) {
      double& v = map.ul[i * r + j];
      if (i > 0) v = std::max(v, map.ul[(i - 1) * r + j]);
      if (j + 1 < r) v = std::max(v, map.ul[i * r + j + 1]);
    }
  for (std::size_t i = r; i-- > 0;)
    for (std::size_t j = i; j < r; ++j) {
      double& v = map.lr[i * r + j];
      if (i + 1 <= j) v = std::min(v, map.lr[(i + 1) * r + j]);
      if (j > i) v = std::min(v, map.lr[i * r + j - 1]);
    }

  map.levels.assign(m + 1, std::vector<Region>(r * r, Region::kGrey));
  map.f.assign(m + 1, std::vector<double>(r, 0.0));
  map.g.assign(m + 1, std::vector<double>(r, 1.0));
  for (std::size_t k = 0; k <= m; ++k) {
    const double thr = (static_cast<double>(k) - 1) / static_cast<double>(m);
    for (std::size_t i = 0; i < r; ++i) {
      double fk = static_cast<double>(i) / N, gk = 1.0;
      bool white_seen = false;
      for (std::size_t j = i; j < r; ++j) {
        Region reg;
        if (k == 0 || i == j || map.ul[i * r + j] > thr) reg = Region::kBlack;
        else if (map.lr[i * r + j] <= thr) reg = Region::kWhite;
        else reg = Region::kGrey;
        map.levels[k][i * r + j] = reg;
        if (reg == Region::kBlack) fk = static_cast<double>(j) / N;
        if (reg == Region::kWhite && !white_seen) {
          gk = static_cast<double>(j) / N;
          white_seen = true;
        }
      }
      map.f[k][i] = fk;
      map.g[k][i] = gk;
    }
  }
  return map;
}

/// Side (in grid steps) of the largest axis-aligned square of grid points
/// that lies in the upper triangle and is entirely grey at level k.
inline std::size_t largest_grey_square(const RegionMap& map, std::size_t k) {
  const std::size_t r = map.n + 1;
  // dp[i][j]: points on a side of the largest grey square whose upper-left
  // point (smallest x, largest y) is (i, j), growing towards larger i and
  // smaller j.
  std::vector<std::size_t> dp(r * r, 0);
  std::size_t best = 0;
  for (std::size_t i = r; i-- > 0;)
    for (std::size_t j = i; j < r; ++j) {
      if (map.at(k, i, j) != Region::kGrey) continue;
      std::size_t v = 1;
      if (i + 1 < r && j > 0 && i + 1 <= j - 1) {
        const std::size_t a = dp[(i + 1) * r + j], b = dp[i * r + j - 1], c = dp[(i + 1) * r + j - 1];
        v = 1 + std::min({a, b, c});
      }
      dp[i * r + j] = v;
      best = std::max(best, v);
    }
  return best == 0 ? 0 : best - 1;
}

/// JSON header line, then one plain PGM (P2) grid per level with
/// B = 2, W = 1, G = 0, mirrored below the diagonal.
inline void write_region_map(std::ostream& os, const RegionMap& map) {
  os << nlohmann::json{{"m", map.m}, {"alpha", map.alpha}, {"N", map.n}}.dump() << '\n';
  const std::size_t r = map.n + 1;
  for (std::size_t k = 0; k <= map.m; ++k) {
    os << "P2\n# level " << k << '\n' << r << ' ' << r << "\n2\n";
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        const auto reg = i <= j ? map.at(k, i, j) : map.at(k, j, i);
        os << (j ? " " : "") << static_cast<int>(reg);
      }
      os << '\n';
    }
  }
}

// ---------------------------------------------------------------------------

struct ApproxReport {
  double gamma_hat = 0;
  bool gamma_converged = false;
  std::vector<std::pair<std::size_t, double>> gamma_curve;
  double distance = 0;  // cut-norm of w - R_w
  bool distance_exact = false;
  double bound = 0;     // 14 * gamma_hat^(1/7)
  bool pass = false;
  StepGraphon approximation;
};

struct ApproxConfig {
  ConvergenceOptions gamma;
  AveragerOptions averaging;
  std::size_t cut_restarts = 200;
};

inline ApproxReport approx_report(const StepGraphon& w, const ApproxConfig& cfg = {}) {
  ApproxReport rep;
  if (robinson_violation(w) == 0) {
    rep.gamma_converged = true;
    rep.gamma_curve.emplace_back(w.resolution(), 0.0);
    rep.approximation = w;
  } else {
    const ConvergedGamma g = gamma_converged(w, cfg.gamma);
    rep.gamma_hat = g.estimate.value;
    rep.gamma_converged = g.converged;
    rep.gamma_curve = g.curve;
    rep.approximation = robinson_approximation(w, rep.gamma_hat, w.resolution(), cfg.averaging);
  }
  const CutNormResult cut = cutnorm_auto(difference(w, rep.approximation), cfg.cut_restarts, cfg.gamma.seed);
  rep.distance = cut.value;
  rep.distance_exact = cut.exact;
  rep.bound = 14.0 * std::pow(rep.gamma_hat, 1.0 / 7.0);
  rep.pass = rep.distance <= rep.bound + 1e-12;
  return rep;
}

inline nlohmann::json to_json(const ApproxReport& r) {
  nlohmann::json curve = nlohmann::json::array();
  for (auto [res, v] : r.gamma_curve) curve.push_back({{"resolution", res}, {"gamma", v}});
  return {{"gamma_hat", r.gamma_hat}, {"gamma_converged", r.gamma_converged}, {"gamma_curve", curve},
          {"distance", r.distance},   {"distance_exact", r.distance_exact},   {"bound", r.bound},
          {"pass", r.pass}};
}

/// Random Robinson step graphon: a nonnegative mixture of diagonal-block
/// indicators 1[i, j in [a, b]] and bands 1[|i - j| <= d], weights summing
/// to at most one.
inline StepGraphon random_robinson(std::size_t n, Rng& rng, std::size_t components = 4) {
  std::vector<double> v(n * n, 0.0);
  std::vector<double> weights(components);
  double total = 0;
  for (double& x : weights) total += (x = uniform01(rng));
  const double scale = uniform01(rng) * 0.8 + 0.2;
  for (std::size_t c = 0; c < components; ++c) {
    const double wt = weights[c] / total * scale;
    if (coin(rng)) {
      std::size_t a = uniform_index(rng, n), b = uniform_index(rng, n);
      if (a > b) std::swap(a, b);
      for (std::size_t i = a; i <= b; ++i)
        for (std::size_t j = a; j <= b; ++j) v[i * n + j] += wt;
    } else {
      const std::size_t d = uniform_index(rng, n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if ((i > j ? i - j : j - i) <= d) v[i * n + j] += wt;
    }
  }
  for (double& x : v) x = std::min(x, 1.0);
  return StepGraphon(n, std::move(v));
}

/// w plus symmetric uniform noise of amplitude eps, clipped to [0,1].
inline StepGraphon perturbed(const StepGraphon& w, double eps, Rng& rng) {
  const std::size_t n = w.resolution();
  return StepGraphon::from_function(n, [&](std::size_t i, std::size_t j) {
    return std::clamp(w(i, j) + eps * (2 * uniform01(rng) - 1), 0.0, 1.0);
  });
}

}  // namespace robinson
