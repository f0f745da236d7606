#pragma once

// Fiedler vectors (eigenvector of the second-smallest Laplacian eigenvalue)
// for seriation-style orderings.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace robinson {

struct FiedlerResult {
  Eigen::VectorXd vector;
  double value = 0;
  double residual = 0;
  bool converged = false;
  std::size_t matvecs = 0;
};

namespace detail {

inline void remove_mean(Eigen::VectorXd& v) { v.array() -= v.mean(); }

/// Flips the sign so the vector correlates nonnegatively with the index.
inline void orient(Eigen::VectorXd& v) {
  const auto n = v.size();
  double corr = 0;
  for (Eigen::Index i = 0; i < n; ++i) corr += v[i] * (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1));
  if (corr < 0) v = -v;
}

}  // namespace detail

/// Fiedler pair of a connected Laplacian given only as a matrix-vector
/// product, by restarted Lanczos with full reorthogonalization on the
/// complement of the constant vector. Converged when
/// ||L v - lambda v|| <= tol * max(1, ||L||_est).
template <typename MatVec>
FiedlerResult fiedler_lanczos(std::size_t n, MatVec&& apply, double tol = 1e-8,
                              std::size_t krylov = 80, std::size_t max_restarts = 400) {
  FiedlerResult res;
  if (n < 2) {
    res.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    res.converged = true;
    return res;
  }
  const auto N = static_cast<Eigen::Index>(n);
  const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(krylov, n - 1));

  // Deterministic start: an index ramp plus a small fixed perturbation.
  Eigen::VectorXd start(N);
  for (Eigen::Index i = 0; i < N; ++i)
    start[i] = static_cast<double>(i) + 0.1 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  detail::remove_mean(start);
  start.normalize();

  Eigen::MatrixXd Q(N, k + 1);
  Eigen::VectorXd w(N), lv(N);
  double norm_est = 1.0;
  for (std::size_t restart = 0; restart < max_restarts; ++restart) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(k), beta = Eigen::VectorXd::Zero(k);
    Q.col(0) = start;
    Eigen::Index m = 0;
    for (; m < k; ++m) {
      apply(Q.col(m), w);
      ++res.matvecs;
      detail::remove_mean(w);
      alpha[m] = Q.col(m).dot(w);
      // Full reorthogonalization (twice is enough).
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd coeff = Q.leftCols(m + 1).transpose() * w;
        w.noalias() -= Q.leftCols(m + 1) * coeff;
      }
      detail::remove_mean(w);
      beta[m] = w.norm();
      if (beta[m] < 1e-13 * std::max(1.0, std::abs(alpha[m]))) {
        ++m;
        break;
      }
      Q.col(m + 1) = w / beta[m];
    }
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
    norm_est = std::max(norm_est, std::abs(eig.eigenvalues()[m - 1]));
    Eigen::VectorXd v = Q.leftCols(m) * eig.eigenvectors().col(0);
    detail::remove_mean(v);
    v.normalize();
    apply(v, lv);
    ++res.matvecs;
    detail::remove_mean(lv);
    const double lambda = v.dot(lv);
    res.residual = (lv - lambda * v).norm();
    res.value = lambda;
    res.vector = v;
    if (res.residual <= tol * norm_est) {
      res.converged = true;
      break;
    }
    start = v;
  }
  detail::orient(res.vector);
  return res;
}

/// Fiedler pair of a small dense Laplacian via a full symmetric eigensolve.
inline FiedlerResult fiedler_dense(const Eigen::MatrixXd& laplacian) {
  FiedlerResult res;
  const auto n = laplacian.rows();
  if (n < 2) {
    res.vector = Eigen::VectorXd::Zero(n);
    res.converged = true;
    return res;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
  res.value = eig.eigenvalues()[1];
  res.vector = eig.eigenvectors().col(1);
  res.residual = (laplacian * res.vector - res.value * res.vector).norm();
  res.converged = true;
  detail::orient(res.vector);
  return res;
}

/// Laplacian D - W of a symmetric nonnegative weight matrix (diagonal ignored).
inline Eigen::MatrixXd weighted_laplacian(const Eigen::MatrixXd& weights) {
  Eigen::MatrixXd L = -weights;
  L.diagonal().setZero();
  for (Eigen::Index i = 0; i < L.rows(); ++i) L(i, i) = -L.row(i).sum();
  return L;
}

/// Indices sorted by vector value, ties broken by index.
inline std::vector<std::size_t> order_by(const Eigen::VectorXd& v) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return v[static_cast<Eigen::Index>(a)] < v[static_cast<Eigen::Index>(b)];
  });
  return idx;
}

}  // namespace robinson
