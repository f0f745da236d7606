#pragma once

// Step graphons: symmetric block-constant kernels on a uniform N x N grid of
// [0,1]^2, plus the grid-aligned subsets of [0,1] that the optimizers search.
//
// Cell i (0-based) is the interval (i/N, (i+1)/N].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robinson {

/// Value range a StepGraphon is validated against. Graphons live in [0,1];
/// kernels (differences of graphons, scaled graphons) live in [-1,1].
enum class ValueRange { kGraphon, kKernel };

class StepGraphon {
 public:
  StepGraphon() = default;

  /// Row-major N*N values. Symmetry is checked to 1e-12 and then made exact.
  StepGraphon(std::size_t n, std::vector<double> values,
              ValueRange range = ValueRange::kGraphon)
      : n_(n), values_(std::move(values)), range_(range) {
    if (n_ == 0) throw std::invalid_argument("StepGraphon: resolution must be >= 1");
    if (values_.size() != n_ * n_)
      throw std::invalid_argument("StepGraphon: expected N*N values");
    const double lo = range_ == ValueRange::kGraphon ? 0.0 : -1.0;
    constexpr double kSlack = 1e-12;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = values_[i * n_ + j];
        if (!std::isfinite(v) || v < lo - kSlack || v > 1.0 + kSlack)
          throw std::domain_error("StepGraphon: entry out of range at (" +
                                  std::to_string(i) + "," + std::to_string(j) + ")");
        if (j > i && std::abs(v - values_[j * n_ + i]) > kSlack)
          throw std::invalid_argument("StepGraphon: matrix is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) values_[j * n_ + i] = values_[i * n_ + j];
    for (double& v : values_) v = std::clamp(v, lo, 1.0);
  }

  static StepGraphon constant(std::size_t n, double value) {
    return StepGraphon(n, std::vector<double>(n * n, value),
                       value < 0 ? ValueRange::kKernel : ValueRange::kGraphon);
  }

  /// Builds from f(i,j) evaluated on the upper triangle (i <= j).
  static StepGraphon from_function(std::size_t n,
                                   const std::function<double(std::size_t, std::size_t)>& f,
                                   ValueRange range = ValueRange::kGraphon) {
    std::vector<double> v(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) v[i * n + j] = v[j * n + i] = f(i, j);
    return StepGraphon(n, std::move(v), range);
  }

  std::size_t resolution() const { return n_; }
  double cell_width() const { return 1.0 / static_cast<double>(n_); }
  ValueRange range() const { return range_; }
  bool is_kernel() const { return range_ == ValueRange::kKernel; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_, n_};
  }
  std::span<const double> values() const { return values_; }

  /// Same values, reinterpreted as a kernel.
  StepGraphon as_kernel() const {
    StepGraphon k = *this;
    k.range_ = ValueRange::kKernel;
    return k;
  }

  friend bool operator==(const StepGraphon& a, const StepGraphon& b) {
    return a.n_ == b.n_ && a.values_ == b.values_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  ValueRange range_ = ValueRange::kGraphon;
};

/// Grid-aligned subset of [0,1]: a union of whole cells of the N-grid.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::size_t n) : bits_(n, 0) {}

  static IntervalSet full(std::size_t n) {
    IntervalSet s(n);
    std::fill(s.bits_.begin(), s.bits_.end(), std::uint8_t{1});
    return s;
  }
  static IntervalSet from_cells(std::size_t n, const std::vector<std::size_t>& cells) {
    IntervalSet s(n);
    for (std::size_t c : cells) {
      if (c >= n) throw std::out_of_range("IntervalSet: cell index out of range");
      s.bits_[c] = 1;
    }
    return s;
  }
  static IntervalSet from_mask(std::size_t n, std::uint64_t mask) {
    IntervalSet s(n);
    for (std::size_t i = 0; i < n && i < 64; ++i) s.bits_[i] = (mask >> i) & 1U;
    return s;
  }
  /// Parses a string of '0'/'1' characters, cell 0 first.
  static IntervalSet from_bits(const std::string& bits) {
    IntervalSet s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != '0' && bits[i] != '1')
        throw std::invalid_argument("IntervalSet: bit string must contain only 0/1");
      s.bits_[i] = bits[i] == '1';
    }
    return s;
  }

  std::size_t resolution() const { return bits_.size(); }
  bool contains(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool on) { bits_[i] = on; }
  void flip(std::size_t i) { bits_[i] ^= 1U; }
  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }
  double measure() const {
    return bits_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(bits_.size());
  }
  std::span<const std::uint8_t> bits() const { return bits_; }

  IntervalSet complement() const {
    IntervalSet s = *this;
    for (auto& b : s.bits_) b ^= 1U;
    return s;
  }
  IntervalSet operator|(const IntervalSet& o) const { return combine(o, [](auto a, auto b) { return a | b; }); }
  IntervalSet operator&(const IntervalSet& o) const { return combine(o, [](auto a, auto b) { return a & b; }); }

  /// Same subset of [0,1] on the grid refined by `factor`.
  IntervalSet refined(std::size_t factor) const {
    IntervalSet s(bits_.size() * factor);
    for (std::size_t i = 0; i < s.bits_.size(); ++i) s.bits_[i] = bits_[i / factor];
    return s;
  }

  std::string to_string() const {
    std::string out(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i)
      if (bits_[i]) out[i] = '1';
    return out;
  }

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  template <typename Op>
  IntervalSet combine(const IntervalSet& o, Op op) const {
    if (o.resolution() != resolution())
      throw std::invalid_argument("IntervalSet: resolution mismatch");
    IntervalSet s(resolution());
    for (std::size_t i = 0; i < bits_.size(); ++i)
      s.bits_[i] = static_cast<std::uint8_t>(op(bits_[i], o.bits_[i]));
    return s;
  }

  std::vector<std::uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// Operators on step graphons.

/// Exact block average of `w` onto an n-grid. Handles arbitrary n by
/// apportioning fractional cell overlaps; overlaps are integers in units of
/// 1/(n*N), so the weights are exact rationals.
inline StepGraphon aggregate(const StepGraphon& w, std::size_t n) {
  if (n == 0) throw std::invalid_argument("aggregate: resolution must be >= 1");
  const std::size_t src = w.resolution();
  // weight[i] = list of (source cell, fraction of target cell i it covers)
  std::vector<std::vector<std::pair<std::size_t, double>>> weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i * src, hi = (i + 1) * src;  // target cell in units 1/(n*src)
    for (std::size_t k = lo / n; k < src && k * n < hi; ++k) {
      const std::size_t a = std::max(lo, k * n), b = std::min(hi, (k + 1) * n);
      if (b > a) weight[i].emplace_back(k, static_cast<double>(b - a) / static_cast<double>(src));
    }
  }
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double acc = 0;
      for (auto [k, fk] : weight[i])
        for (auto [l, fl] : weight[j]) acc += fk * fl * w(k, l);
      v[i * n + j] = v[j * n + i] = acc;
    }
  }
  return StepGraphon(n, std::move(v), w.range());
}

/// Stepping operator onto a coarser grid whose resolution divides N.
inline StepGraphon step_operator(const StepGraphon& w, std::size_t coarse) {
  if (coarse == 0 || w.resolution() % coarse != 0)
    throw std::invalid_argument("step_operator: target resolution must divide " +
                                std::to_string(w.resolution()));
  const std::size_t f = w.resolution() / coarse;
  std::vector<double> v(coarse * coarse);
  for (std::size_t I = 0; I < coarse; ++I) {
    for (std::size_t J = I; J < coarse; ++J) {
      double acc = 0;
      for (std::size_t i = I * f; i < (I + 1) * f; ++i)
        for (std::size_t j = J * f; j < (J + 1) * f; ++j) acc += w(i, j);
      v[I * coarse + J] = v[J * coarse + I] = acc / static_cast<double>(f * f);
    }
  }
  return StepGraphon(coarse, std::move(v), w.range());
}

/// Block replication: the same function on [0,1]^2 at resolution N*factor.
inline StepGraphon refine(const StepGraphon& w, std::size_t factor) {
  if (factor == 0) throw std::invalid_argument("refine: factor must be >= 1");
  const std::size_t n = w.resolution() * factor;
  std::vector<double> v(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v[i * n + j] = w(i / factor, j / factor);
  return StepGraphon(n, std::move(v), w.range());
}

/// Cells shifted one step towards the diagonal; zero on the first row and
/// last column bands. Lower envelope of a Robinson step graphon.
inline StepGraphon shift_minus(const StepGraphon& w) {
  const std::size_t n = w.resolution();
  return StepGraphon::from_function(
      n,
      [&](std::size_t i, std::size_t j) {
        return (i == 0 || j == n - 1) ? 0.0 : w(i - 1, j + 1);
      },
      w.range());
}

/// Cells shifted one step away from the diagonal; one on the band j-i <= 1.
/// Upper envelope of a Robinson step graphon.
inline StepGraphon shift_plus(const StepGraphon& w) {
  return StepGraphon::from_function(
      w.resolution(),
      [&](std::size_t i, std::size_t j) { return (j - i <= 1) ? 1.0 : w(i + 1, j - 1); },
      w.range());
}

inline void require_same_resolution(const StepGraphon& u, const StepGraphon& w,
                                    const char* what) {
  if (u.resolution() != w.resolution())
    throw std::invalid_argument(std::string(what) + ": resolution mismatch (" +
                                std::to_string(u.resolution()) + " vs " +
                                std::to_string(w.resolution()) + ")");
}

inline double l1_dist(const StepGraphon& u, const StepGraphon& w) {
  require_same_resolution(u, w, "l1_dist");
  double acc = 0;
  const auto a = u.values(), b = w.values();
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::abs(a[k] - b[k]);
  const double n = static_cast<double>(u.resolution());
  return acc / (n * n);
}

/// u - w as a kernel with entries in [-1,1].
inline StepGraphon difference(const StepGraphon& u, const StepGraphon& w) {
  require_same_resolution(u, w, "difference");
  std::vector<double> v(u.values().begin(), u.values().end());
  const auto b = w.values();
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= b[k];
  return StepGraphon(u.resolution(), std::move(v), ValueRange::kKernel);
}

inline StepGraphon scaled(const StepGraphon& w, double t) {
  std::vector<double> v(w.values().begin(), w.values().end());
  for (double& x : v) x *= t;
  return StepGraphon(w.resolution(), std::move(v), ValueRange::kKernel);
}

/// Largest violation of w(x,z) <= min{w(x,y), w(y,z)} over grid triples
/// i <= j <= k. Zero exactly when the step graphon is Robinson.
///
/// For a fixed pair (i,k) the worst middle index only needs the minimum of
/// row i over [i,k] and of column k over [i,k], so running minima give O(N^2).
inline double robinson_violation(const StepGraphon& w) {
  const std::size_t n = w.resolution();
  // left_min[k*n + i] = min_{j in [i,k]} w(j,k)
  std::vector<double> left_min(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double m = w(k, k);
    for (std::size_t i = k + 1; i-- > 0;) {
      m = std::min(m, w(i, k));
      left_min[k * n + i] = m;
    }
  }
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_min = w(i, i);
    for (std::size_t k = i; k < n; ++k) {
      row_min = std::min(row_min, w(i, k));
      const double bound = std::min(row_min, left_min[k * n + i]);
      worst = std::max(worst, w(i, k) - bound);
    }
  }
  return worst;
}

inline bool is_robinson(const StepGraphon& w, double tol = 0.0) {
  return robinson_violation(w) <= tol;
}

// ---------------------------------------------------------------------------
// Plain-text matrix format: first line N, then N rows of N decimals.

inline void write_matrix(std::ostream& os, const StepGraphon& w) {
  const std::size_t n = w.resolution();
  os << n << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) os << ' ';
      os << w(i, j);
    }
    os << '\n';
  }
}

inline StepGraphon read_matrix(std::istream& is, ValueRange range = ValueRange::kGraphon) {
  long long n = 0;
  if (!(is >> n) || n <= 0) throw std::invalid_argument("read_matrix: bad resolution line");
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> v(un * un);
  for (double& x : v)
    if (!(is >> x)) throw std::invalid_argument("read_matrix: expected N*N values");
  std::string trailing;
  if (is >> trailing) throw std::invalid_argument("read_matrix: trailing data after matrix");
  return StepGraphon(un, std::move(v), range);
}

inline std::string to_text(const StepGraphon& w) {
  std::ostringstream os;
  write_matrix(os, w);
  return os.str();
}

}  // namespace robinson
