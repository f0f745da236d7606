#pragma once

// The discrete gauge Gamma*(G, ord, A): exact evaluation, a certified
// per-pair upper bound on max_A, exhaustive and local-search maximization,
// and the min over a list of orderings.
//
// With positions in the ordering and PT[k][x] = |N(x) ∩ A ∩ {first k}|,
//   n^3 Gamma* = sum_{u<v} [PT[u][v] - PT[u][u]]_+
//              + sum_{u<v} [(tot[u] - PT[v+1][u]) - (tot[v] - PT[v+1][v])]_+ .
// All counts are integers, so evaluation is exact up to the final division.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "robinson/errors.hpp"
#include "robinson/graph.hpp"
#include "robinson/random.hpp"

namespace robinson {

/// Dense permuted adjacency a[p][q] for positions p, q of an ordering, plus
/// the prefix table for the current A. Prefix counters are 16-bit.
class GammaStarEvaluator {
 public:
  static constexpr std::size_t kMaxVertices = 65535;

  GammaStarEvaluator(const LabeledGraph& g, const Ordering& ord) : n_(g.size()) {
    if (n_ > kMaxVertices) throw BudgetError("gamma_star: n exceeds the 16-bit prefix-table limit");
    ord.validate(n_);
    adj_.assign(n_ * n_, 0);
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t q = 0; q < n_; ++q) adj_[p * n_ + q] = g.adjacent(ord.order[p], ord.order[q]) ? 1 : 0;
    pt_.assign((n_ + 1) * n_, 0);
    in_.assign(n_, 0);
  }

  std::size_t size() const { return n_; }
  bool adjacent(std::size_t p, std::size_t q) const { return adj_[p * n_ + q] != 0; }

  /// Membership by position.
  void assign(const std::vector<std::uint8_t>& in) {
    in_ = in;
    std::fill(pt_.begin(), pt_.begin() + static_cast<std::ptrdiff_t>(n_), std::uint16_t{0});
    for (std::size_t k = 0; k < n_; ++k) {
      const std::uint16_t* prev = &pt_[k * n_];
      std::uint16_t* next = &pt_[(k + 1) * n_];
      if (in_[k]) {
        const std::uint8_t* row = &adj_[k * n_];
        for (std::size_t x = 0; x < n_; ++x) next[x] = static_cast<std::uint16_t>(prev[x] + row[x]);
      } else {
        std::copy(prev, prev + n_, next);
      }
    }
  }

  /// Integer numerator n^3 Gamma*(G, ord, A) for the assigned A.
  std::uint64_t numerator() const {
    std::uint64_t acc = 0;
    for (std::size_t u = 0; u < n_; ++u) {
      const std::uint16_t* row = &pt_[u * n_];
      const std::int32_t base = row[u];
      std::int64_t s = 0;
      for (std::size_t v = u + 1; v < n_; ++v) s += std::max<std::int32_t>(0, std::int32_t{row[v]} - base);
      acc += static_cast<std::uint64_t>(s);
    }
    const std::uint16_t* tot = &pt_[n_ * n_];
    for (std::size_t v = 0; v < n_; ++v) {
      const std::uint16_t* row = &pt_[(v + 1) * n_];
      const std::int32_t up_v = std::int32_t{tot[v]} - row[v];
      std::int64_t s = 0;
      for (std::size_t u = 0; u < v; ++u) s += std::max<std::int32_t>(0, std::int32_t{tot[u]} - row[u] - up_v);
      acc += static_cast<std::uint64_t>(s);
    }
    return acc;
  }

  double value() const { return scale(numerator()); }
  double scale(std::uint64_t num) const {
    const double n = static_cast<double>(n_);
    return static_cast<double>(num) / (n * n * n);
  }

  const std::vector<std::uint8_t>& membership() const { return in_; }

 private:
  std::size_t n_;
  std::vector<std::uint8_t> adj_;
  std::vector<std::uint16_t> pt_;
  std::vector<std::uint8_t> in_;
};

namespace detail {

inline std::vector<std::uint8_t> positions_of(const IntervalSet& a_vertices, const Ordering& ord) {
  // A is given by vertex; the evaluator works by position.
  std::vector<std::uint8_t> in(ord.order.size(), 0);
  for (std::size_t p = 0; p < ord.order.size(); ++p) in[p] = a_vertices.contains(ord.order[p]) ? 1 : 0;
  return in;
}

inline IntervalSet vertices_of(const std::vector<std::uint8_t>& in, const Ordering& ord) {
  IntervalSet a(in.size());
  for (std::size_t p = 0; p < in.size(); ++p)
    if (in[p]) a.set(ord.order[p], true);
  return a;
}

}  // namespace detail

/// Gamma*(G, ord, A) with A given as a vertex subset (bit v = vertex v).
inline double gamma_star_set(const LabeledGraph& g, const Ordering& ord, const IntervalSet& a) {
  if (a.resolution() != g.size()) throw std::invalid_argument("gamma_star_set: A must have one bit per vertex");
  GammaStarEvaluator ev(g, ord);
  ev.assign(detail::positions_of(a, ord));
  return ev.value();
}

/// Each bracket maximized separately over A:
/// (1/n^3) sum_{u<v} |(N(v) \ N(u)) ∩ D(u)| + |(N(u) \ N(v)) ∩ U(v)|.
inline double gamma_star_pair_ub(const GammaStarEvaluator& ev) {
  const std::size_t n = ev.size();
  std::uint64_t acc = 0;
  // cnt[q] = #{v > u : a_vq = 1}, maintained for u decreasing.
  std::vector<std::uint32_t> cnt(n, 0);
  for (std::size_t u = n; u-- > 0;) {
    for (std::size_t q = 0; q < u; ++q)
      if (!ev.adjacent(u, q)) acc += cnt[q];
    for (std::size_t q = 0; q < n; ++q) cnt[q] += ev.adjacent(u, q) ? 1U : 0U;
  }
  // cnt[q] = #{u < v : a_uq = 1}, maintained for v increasing.
  std::fill(cnt.begin(), cnt.end(), 0U);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t q = v + 1; q < n; ++q)
      if (!ev.adjacent(v, q)) acc += cnt[q];
    for (std::size_t q = 0; q < n; ++q) cnt[q] += ev.adjacent(v, q) ? 1U : 0U;
  }
  return ev.scale(acc);
}

inline double gamma_star_pair_ub(const LabeledGraph& g, const Ordering& ord) {
  return gamma_star_pair_ub(GammaStarEvaluator(g, ord));
}

struct GammaStarResult {
  double value = 0;
  IntervalSet witness;  // by vertex
  std::size_t evaluations = 0;
  std::string method;
};

inline constexpr std::size_t kGammaStarExhaustiveMax = 18;

inline GammaStarResult gamma_star_exhaustive(const LabeledGraph& g, const Ordering& ord) {
  const std::size_t n = g.size();
  if (n > kGammaStarExhaustiveMax)
    throw BudgetError("gamma_star_exhaustive: n=" + std::to_string(n) + " exceeds " +
                      std::to_string(kGammaStarExhaustiveMax) + "; use gamma_star_localsearch");
  GammaStarEvaluator ev(g, ord);
  std::vector<std::uint8_t> in(n, 0);
  std::uint64_t best = 0, mask = 0, best_mask = 0;
  ev.assign(in);
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << n); ++step) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(step));
    mask ^= std::uint64_t{1} << bit;
    in[bit] ^= 1U;
    ev.assign(in);
    const std::uint64_t v = ev.numerator();
    if (v > best) {
      best = v;
      best_mask = mask;
    }
  }
  for (std::size_t p = 0; p < n; ++p) in[p] = (best_mask >> p) & 1U;
  return {ev.scale(best), detail::vertices_of(in, ord), (std::size_t{1} << n), "exhaustive"};
}

struct LocalSearchOptions {
  std::size_t restarts = 8;
  std::uint64_t seed = 1;
  std::size_t band_grid = 16;        // structured seeds use this many label bands
  std::size_t max_evaluations = 0;   // 0 = unlimited
  std::vector<IntervalSet> extra_seeds;  // by vertex
};

namespace detail {

/// Hill climbing by flipping chunks of consecutive positions, halving the
/// chunk size down to single vertices; first improvement, evaluation budget.
inline std::uint64_t climb_chunks(GammaStarEvaluator& ev, std::vector<std::uint8_t>& in, std::uint64_t value,
                                  std::size_t& evals, std::size_t budget, Rng& rng) {
  const std::size_t n = ev.size();
  std::size_t chunk = std::max<std::size_t>(1, n / 16);
  while (true) {
    bool improved = true;
    while (improved) {
      improved = false;
      const std::size_t pieces = (n + chunk - 1) / chunk;
      std::vector<std::size_t> order(pieces);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t c : order) {
        if (budget && evals >= budget) return value;
        const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t p = lo; p < hi; ++p) in[p] ^= 1U;
        ev.assign(in);
        ++evals;
        const std::uint64_t v = ev.numerator();
        if (v > value) {
          value = v;
          improved = true;
        } else {
          for (std::size_t p = lo; p < hi; ++p) in[p] ^= 1U;
        }
      }
    }
    if (chunk == 1) break;
    chunk = std::max<std::size_t>(1, chunk / 2);
  }
  ev.assign(in);
  return value;
}

}  // namespace detail

/// Best Gamma*(G, ord, A) from structured seeds and random restarts. Seeds:
/// every union of consecutive label bands on a grid of `band_grid` bands,
/// every prefix-plus-suffix of bands, the same shapes over positions, then
/// random subsets. The best few seeds and all random starts are refined by
/// chunk-flip hill climbing.
inline GammaStarResult gamma_star_localsearch(const LabeledGraph& g, const Ordering& ord,
                                              const LocalSearchOptions& opt = {}) {
  const std::size_t n = g.size();
  GammaStarEvaluator ev(g, ord);
  GammaStarResult res;
  res.method = "local-search";
  res.witness = IntervalSet(n);
  if (n < 2) return res;

  std::vector<std::vector<std::uint8_t>> seeds;
  const std::size_t m = std::max<std::size_t>(1, std::min(opt.band_grid, n));
  auto add_bands = [&](auto band_of_position) {
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b <= m; ++b) {
        std::vector<std::uint8_t> in(n), out(n);
        for (std::size_t p = 0; p < n; ++p) {
          const std::size_t band = band_of_position(p);
          in[p] = band >= a && band < b;
          out[p] = band < a || band >= b;
        }
        seeds.push_back(std::move(in));
        if (a > 0 && b < m) seeds.push_back(std::move(out));
      }
  };
  add_bands([&](std::size_t p) {
    const double x = g.labels()[ord.order[p]];
    return std::min(m - 1, static_cast<std::size_t>(x * static_cast<double>(m)));
  });
  if (ord.tag != "natural")
    add_bands([&](std::size_t p) { return p * m / n; });
  for (const auto& extra : opt.extra_seeds) seeds.push_back(detail::positions_of(extra, ord));

  std::size_t evals = 0;
  const std::size_t budget = opt.max_evaluations;
  std::vector<std::pair<std::uint64_t, std::size_t>> scored;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    if (budget && evals >= budget) break;
    ev.assign(seeds[s]);
    ++evals;
    scored.emplace_back(ev.numerator(), s);
  }
  std::stable_sort(scored.begin(), scored.end(), [](auto a, auto b) { return a.first > b.first; });

  std::uint64_t best = 0;
  std::vector<std::uint8_t> best_in(n, 0);
  const std::size_t refine = std::min<std::size_t>(scored.size(), 3);
  for (std::size_t r = 0; r < refine + opt.restarts; ++r) {
    Rng rng(opt.seed + r);
    std::vector<std::uint8_t> in(n);
    std::uint64_t v;
    if (r < refine) {
      in = seeds[scored[r].second];
      v = scored[r].first;
    } else {
      if (budget && evals >= budget) break;
      for (auto& bit : in) bit = coin(rng) ? 1 : 0;
      ev.assign(in);
      ++evals;
      v = ev.numerator();
    }
    v = detail::climb_chunks(ev, in, v, evals, budget, rng);
    if (v > best || r == 0) {
      best = v;
      best_in = in;
    }
  }
  res.value = ev.scale(best);
  res.witness = detail::vertices_of(best_in, ord);
  res.evaluations = evals;
  return res;
}

struct GammaStarInterval {
  double lower = 0;  // exact for n <= 18, otherwise a local-search value
  double upper = 0;  // pair bound (or the exact value when exhaustive)
  bool exact = false;
  IntervalSet witness;
};

inline GammaStarInterval gamma_star_estimate(const LabeledGraph& g, const Ordering& ord,
                                             const LocalSearchOptions& opt = {}) {
  GammaStarInterval out;
  const double ub = gamma_star_pair_ub(g, ord);
  if (g.size() <= kGammaStarExhaustiveMax) {
    const auto ex = gamma_star_exhaustive(g, ord);
    out.lower = out.upper = ex.value;
    out.exact = true;
    out.witness = ex.witness;
  } else {
    const auto ls = gamma_star_localsearch(g, ord, opt);
    out.lower = ls.value;
    out.upper = ub;
    out.witness = ls.witness;
  }
  return out;
}

struct MinEstimate {
  GammaStarInterval value;
  Ordering best;
};

/// Min over the supplied orderings of the per-ordering estimate, compared by
/// its lower value; an upper-bound estimate of Gamma*(G).
inline MinEstimate gamma_star_min_estimate(const LabeledGraph& g, const std::vector<Ordering>& orderings,
                                           const LocalSearchOptions& opt = {}) {
  if (orderings.empty()) throw std::invalid_argument("gamma_star_min_estimate: need at least one ordering");
  std::optional<MinEstimate> best;
  for (const auto& ord : orderings) {
    const auto est = gamma_star_estimate(g, ord, opt);
    if (!best || est.lower < best->value.lower) best = MinEstimate{est, ord};
  }
  return *best;
}

}  // namespace robinson
