#pragma once

// Labeled w-random graphs with bitset adjacency, vertex orderings, and the
// spectral (Fiedler) ordering.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "robinson/graphon_spec.hpp"
#include "robinson/random.hpp"
#include "robinson/spectral.hpp"
#include "robinson/step_graphon.hpp"

namespace robinson {

class LabeledGraph {
 public:
  LabeledGraph() = default;
  explicit LabeledGraph(std::size_t n, std::vector<double> labels = {}, std::uint64_t seed = 0)
      : n_(n), words_((n + 63) / 64), labels_(std::move(labels)), bits_(n * words_, 0), seed_(seed) {
    if (labels_.empty()) {
      labels_.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) labels_[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n_);
    }
    if (labels_.size() != n_) throw std::invalid_argument("LabeledGraph: expected n labels");
  }

  /// From a symmetric 0/1 matrix given as a predicate on i < j.
  template <typename Adj>
  static LabeledGraph from_predicate(std::size_t n, Adj&& adjacent) {
    LabeledGraph g(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (adjacent(i, j)) g.add_edge(i, j);
    return g;
  }

  std::size_t size() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& labels() const { return labels_; }

  bool adjacent(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
  }
  void add_edge(std::size_t i, std::size_t j) {
    if (i == j) throw std::invalid_argument("LabeledGraph: self-loops are not allowed");
    bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
    bits_[j * words_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }
  std::size_t degree(std::size_t i) const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < words_; ++k) d += static_cast<std::size_t>(std::popcount(bits_[i * words_ + k]));
    return d;
  }
  std::size_t edge_count() const {
    std::size_t e = 0;
    for (std::size_t i = 0; i < n_; ++i) e += degree(i);
    return e / 2;
  }
  const std::uint64_t* row_words(std::size_t i) const { return bits_.data() + i * words_; }
  std::size_t words() const { return words_; }

  /// Checks sorted labels, symmetry and the empty diagonal.
  void validate() const {
    for (std::size_t i = 1; i < n_; ++i)
      if (!(labels_[i - 1] < labels_[i])) throw std::invalid_argument("LabeledGraph: labels must be strictly increasing");
    for (std::size_t i = 0; i < n_; ++i) {
      if (adjacent(i, i)) throw std::invalid_argument("LabeledGraph: self-loop at vertex " + std::to_string(i));
      for (std::size_t j = i + 1; j < n_; ++j)
        if (adjacent(i, j) != adjacent(j, i)) throw std::invalid_argument("LabeledGraph: adjacency is not symmetric");
    }
    for (std::size_t i = 0; i < n_; ++i)
      if (n_ % 64 && (bits_[i * words_ + words_ - 1] >> (n_ % 64)))
        throw std::invalid_argument("LabeledGraph: stray bits past vertex n");
  }

  friend bool operator==(const LabeledGraph& a, const LabeledGraph& b) {
    return a.n_ == b.n_ && a.labels_ == b.labels_ && a.bits_ == b.bits_ && a.seed_ == b.seed_;
  }

 private:
  std::size_t n_ = 0, words_ = 0;
  std::vector<double> labels_;
  std::vector<std::uint64_t> bits_;
  std::uint64_t seed_ = 0;
};

struct Ordering {
  std::vector<std::size_t> order;  // order[r] = vertex at position r
  std::string tag = "custom";

  static Ordering natural(std::size_t n) {
    Ordering o;
    o.order.resize(n);
    std::iota(o.order.begin(), o.order.end(), std::size_t{0});
    o.tag = "natural";
    return o;
  }

  void validate(std::size_t n) const {
    if (order.size() != n) throw std::invalid_argument("Ordering: expected a permutation of n vertices");
    std::vector<char> seen(n, 0);
    for (std::size_t v : order) {
      if (v >= n || seen[v]) throw std::invalid_argument("Ordering: not a permutation");
      seen[v] = 1;
    }
  }
};

/// Labels are drawn first and sorted; edges follow in row-major order over
/// i < j, each present when a fresh uniform falls below w(x_i, x_j).
inline LabeledGraph sample_w_random(const GraphonSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_w_random: n must be >= 1");
  validate(spec);
  Rng rng(seed);
  std::vector<double> labels(n);
  for (double& x : labels) x = uniform01(rng);
  std::sort(labels.begin(), labels.end());
  for (std::size_t i = 1; i < n; ++i)
    if (!(labels[i - 1] < labels[i])) throw std::runtime_error("sample_w_random: repeated label");
  LabeledGraph g(n, labels, seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (uniform01(rng) < evaluate(spec, labels[i], labels[j])) g.add_edge(i, j);
  return g;
}

/// The step graphon w_G: cell (i,j) carries the adjacency of vertices i, j.
inline StepGraphon graphon_of(const LabeledGraph& g) {
  const std::size_t n = g.size();
  return StepGraphon::from_function(n, [&](std::size_t i, std::size_t j) { return g.adjacent(i, j) ? 1.0 : 0.0; });
}

/// Vertices relabeled so that vertex r of the result is order[r] of g.
inline LabeledGraph permute(const LabeledGraph& g, const Ordering& ord) {
  ord.validate(g.size());
  const std::size_t n = g.size();
  return LabeledGraph::from_predicate(n, [&](std::size_t i, std::size_t j) {
    return g.adjacent(ord.order[i], ord.order[j]);
  });
}

// ---------------------------------------------------------------------------
// Text format: "n seed", a line of labels, then one hex row per vertex where
// each hex digit covers 4 consecutive vertices, the lowest as its top bit.

inline void write_graph(std::ostream& os, const LabeledGraph& g) {
  const std::size_t n = g.size();
  os << n << ' ' << g.seed() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", g.labels()[i]);
    os << (i ? " " : "") << buf;
  }
  os << '\n';
  static const char* kHex = "0123456789abcdef";
  std::string row((n + 3) / 4, '0');
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      unsigned nib = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t j = 4 * c + b;
        if (j < n && g.adjacent(i, j)) nib |= 8U >> b;
      }
      row[c] = kHex[nib];
    }
    os << row << '\n';
  }
}

inline LabeledGraph read_graph(std::istream& is) {
  long long n = 0;
  std::uint64_t seed = 0;
  if (!(is >> n >> seed) || n <= 0) throw std::invalid_argument("read_graph: bad header (expected 'n seed')");
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> labels(un);
  for (double& x : labels)
    if (!(is >> x)) throw std::invalid_argument("read_graph: expected n labels");
  LabeledGraph g(un, labels, seed);
  // Rows are read into a raw matrix first so symmetry can be verified.
  std::vector<std::vector<char>> adj(un, std::vector<char>(un, 0));
  for (std::size_t i = 0; i < un; ++i) {
    std::string row;
    if (!(is >> row) || row.size() != (un + 3) / 4) throw std::invalid_argument("read_graph: bad adjacency row " + std::to_string(i));
    for (std::size_t c = 0; c < row.size(); ++c) {
      const char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(row[c])));
      unsigned nib;
      if (ch >= '0' && ch <= '9') nib = static_cast<unsigned>(ch - '0');
      else if (ch >= 'a' && ch <= 'f') nib = static_cast<unsigned>(ch - 'a' + 10);
      else throw std::invalid_argument("read_graph: non-hex character in row " + std::to_string(i));
      for (std::size_t b = 0; b < 4; ++b) {
        const std::size_t j = 4 * c + b;
        const bool on = (nib >> (3 - b)) & 1U;
        if (j >= un) {
          if (on) throw std::invalid_argument("read_graph: padding bits must be zero");
          continue;
        }
        adj[i][j] = on;
      }
    }
  }
  for (std::size_t i = 0; i < un; ++i) {
    if (adj[i][i]) throw std::invalid_argument("read_graph: self-loop at vertex " + std::to_string(i));
    for (std::size_t j = i + 1; j < un; ++j) {
      if (adj[i][j] != adj[j][i]) throw std::invalid_argument("read_graph: adjacency is not symmetric");
      if (adj[i][j]) g.add_edge(i, j);
    }
  }
  g.validate();
  return g;
}

// ---------------------------------------------------------------------------

/// Connected components, each sorted, listed by smallest vertex.
inline std::vector<std::vector<std::size_t>> components(const LabeledGraph& g) {
  const std::size_t n = g.size();
  std::vector<char> seen(n, 0);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp{s}, stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      const std::uint64_t* row = g.row_words(v);
      for (std::size_t k = 0; k < g.words(); ++k)
        for (std::uint64_t bits = row[k]; bits; bits &= bits - 1) {
          const std::size_t u = 64 * k + static_cast<std::size_t>(std::countr_zero(bits));
          if (!seen[u]) {
            seen[u] = 1;
            comp.push_back(u);
            stack.push_back(u);
          }
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

/// Vertices sorted by the Fiedler vector, one component at a time (in order
/// of smallest label); ties broken by vertex index. The sign is fixed so the
/// vector increases with the label order on average.
inline Ordering spectral_ordering(const LabeledGraph& g, double tol = 1e-8) {
  Ordering ord;
  ord.tag = "spectral";
  for (const auto& comp : components(g)) {
    const std::size_t m = comp.size();
    if (m <= 2) {
      ord.order.insert(ord.order.end(), comp.begin(), comp.end());
      continue;
    }
    Eigen::VectorXd fiedler;
    if (m <= 64) {
      Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (a != b && g.adjacent(comp[a], comp[b])) weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = 1;
      fiedler = fiedler_dense(weighted_laplacian(weights)).vector;
    } else {
      Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      Eigen::VectorXd deg(static_cast<Eigen::Index>(m));
      for (std::size_t a = 0; a < m; ++a) {
        double d = 0;
        for (std::size_t b = 0; b < m; ++b)
          if (a != b && g.adjacent(comp[a], comp[b])) {
            adj(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = 1.0;
            d += 1;
          }
        deg[static_cast<Eigen::Index>(a)] = d;
      }
      auto apply = [&](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd& out) {
        out.noalias() = adj * x;
        out = deg.cwiseProduct(x) - out;
      };
      fiedler = fiedler_lanczos(m, apply, tol).vector;
    }
    for (std::size_t r : order_by(fiedler)) ord.order.push_back(comp[r]);
  }
  return ord;
}

}  // namespace robinson
