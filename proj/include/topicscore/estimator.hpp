#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "topicscore/corpus.hpp"
#include "topicscore/kmeans.hpp"
#include "topicscore/rng.hpp"
#include "topicscore/spectral.hpp"
#include "topicscore/types.hpp"
#include "topicscore/vertex_hunt.hpp"

namespace topicscore {

/// Tuning knobs of fit(); defaults follow the recommended settings: no ratio
/// clamping and l = 10k cluster centers (capped at the usable word count
/// when left at the 0 default).
struct FitOptions {
  double t = std::numeric_limits<double>::infinity();
  Index l = 0;  // 0 means min(10k, usable word rows)
  std::uint64_t seed = 0;
  KMeansOptions kmeans;
};

/**
 * @brief Full estimate: topic matrix, per-word weights and the intermediate
 * spectral/vertex data for diagnostics.
 *
 * Words listed in zero_rows had no occurrences; their a_hat and pi_hat rows
 * are exactly zero and the spectral/vh fields describe the reduced matrix
 * with those rows dropped.
 */
struct TopicEstimate {
  Matrix a_hat;   // p x k, columns sum to 1, entries >= 0
  Matrix pi_hat;  // p x k, rows sum to 1 (zero rows excepted)
  VertexHuntResult vh;
  SpectralDecomposition spectral;
  std::vector<Index> zero_rows;
};

namespace detail {

// Shared k x k factorization of [1'; V'] for all per-word weight solves.
class WeightSolver {
 public:
  explicit WeightSolver(const Matrix& vertices) {
    const Index k = vertices.rows();
    Matrix system(k, k);
    system.row(0).setOnes();
    system.bottomRows(k - 1) = vertices.transpose();
    lu_.compute(system);
    if (!lu_.isInvertible()) {
      throw NumericalError(
          "weight system is singular; vertices are affinely dependent");
    }
  }

  // Clamp-and-renormalize barycentric solve; all-negative raw solutions
  // fall back to the uniform vector so the result is always stochastic.
  Vector solve(const Eigen::Ref<const RowVector>& r_row) const {
    const Index k = lu_.rows();
    Vector rhs(k);
    rhs(0) = 1.0;
    rhs.tail(k - 1) = r_row.transpose();
    Vector pi = lu_.solve(rhs);
    double total = 0.0;
    for (Index i = 0; i < k; ++i) {
      if (pi(i) < 0.0) pi(i) = 0.0;
      total += pi(i);
    }
    if (total <= 0.0) {
      pi.setConstant(1.0 / static_cast<double>(k));
    } else {
      pi /= total;
    }
    return pi;
  }

 private:
  Eigen::FullPivLU<Matrix> lu_;
};

inline Matrix drop_rows(const Matrix& mat, const std::vector<char>& keep,
                        Index kept_count) {
  Matrix out(kept_count, mat.cols());
  Index r = 0;
  for (Index j = 0; j < mat.rows(); ++j) {
    if (keep[static_cast<std::size_t>(j)]) out.row(r++) = mat.row(j);
  }
  return out;
}

inline SparseMatrix drop_rows(const SparseMatrix& mat,
                              const std::vector<char>& keep,
                              Index kept_count) {
  std::vector<Index> new_row(static_cast<std::size_t>(mat.rows()), -1);
  Index r = 0;
  for (Index j = 0; j < mat.rows(); ++j) {
    if (keep[static_cast<std::size_t>(j)]) {
      new_row[static_cast<std::size_t>(j)] = r++;
    }
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mat.nonZeros()));
  for (Index i = 0; i < mat.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(mat, i); it; ++it) {
      const Index nr = new_row[static_cast<std::size_t>(it.row())];
      if (nr >= 0) trips.emplace_back(nr, it.col(), it.value());
    }
  }
  SparseMatrix out(kept_count, mat.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace detail

/**
 * @brief Barycentric weights of one ratio row with respect to the hunted
 * vertices: solves [1'; V'] pi = [1; r], clamps negatives to zero and
 * renormalizes (uniform if everything clamps away).
 */
inline Vector estimate_weights(const Eigen::Ref<const RowVector>& r_hat_row,
                               const Eigen::Ref<const Matrix>& vertices) {
  if (vertices.cols() != vertices.rows() - 1 ||
      r_hat_row.size() != vertices.cols()) {
    throw ConfigError("estimate_weights: inconsistent dimensions");
  }
  return detail::WeightSolver(Matrix(vertices)).solve(r_hat_row);
}

/**
 * @brief Turns weights back into word-topic columns: row j of the raw
 * output is sqrt(m_diag(j)) * xi1(j) * pi_hat(j, .), negatives clamp to
 * zero, and every column is scaled to unit l1 norm.
 */
inline Matrix reconstruct_topics(const Matrix& pi_hat, const Vector& m_diag,
                                 const Vector& xi1) {
  const Index p = pi_hat.rows();
  const Index k = pi_hat.cols();
  if (m_diag.size() != p || xi1.size() != p) {
    throw ConfigError("reconstruct_topics: inconsistent dimensions");
  }
  Matrix a(p, k);
  for (Index j = 0; j < p; ++j) {
    const double scale = std::sqrt(m_diag(j)) * xi1(j);
    for (Index c = 0; c < k; ++c) {
      a(j, c) = std::max(scale * pi_hat(j, c), 0.0);
    }
  }
  for (Index c = 0; c < k; ++c) {
    const double norm = a.col(c).sum();
    if (norm < 1e-14) {
      throw NumericalError("degenerate estimate: topic column " +
                           std::to_string(c + 1) + " has no mass");
    }
    a.col(c) /= norm;
  }
  return a;
}

/**
 * @brief Runs the whole pipeline on a column-stochastic frequency matrix:
 * normalization diagonal, truncated SVD, ratio matrix, k-means, vertex hunt,
 * per-word weights, reconstruction.
 *
 * All-zero word rows are dropped for the numerical stages and reappear as
 * zero rows of a_hat/pi_hat. Deterministic for fixed inputs and options; the
 * SVD and k-means stages draw from streams derived from opts.seed.
 */
template <class MatType>
TopicEstimate fit_frequencies(const MatType& freq, Index k,
                              const FitOptions& opts = {}) {
  const Index p = freq.rows();
  const Index n = freq.cols();
  if (k < 1) throw ConfigError("fit: k must be at least 1");
  if (!(opts.t > 0.0)) throw ConfigError("fit: threshold t must be positive");

  const Vector m_full = normalization_diag(freq);
  TopicEstimate est;
  std::vector<char> keep(static_cast<std::size_t>(p), 1);
  Index p_sub = p;
  for (Index j = 0; j < p; ++j) {
    if (m_full(j) == 0.0) {
      keep[static_cast<std::size_t>(j)] = 0;
      est.zero_rows.push_back(j);
      --p_sub;
    }
  }
  if (k > std::min(p_sub, n)) {
    throw ConfigError("fit: k exceeds min(usable words, documents)");
  }

  const bool reduced = !est.zero_rows.empty();
  const MatType freq_sub =
      reduced ? detail::drop_rows(freq, keep, p_sub) : freq;
  Vector m_sub(p_sub);
  {
    Index r = 0;
    for (Index j = 0; j < p; ++j) {
      if (keep[static_cast<std::size_t>(j)]) m_sub(r++) = m_full(j);
    }
  }

  est.spectral = truncated_svd(freq_sub, m_sub, k, derive_stream(opts.seed, 1));

  Matrix a_sub;
  Matrix pi_sub;
  if (k == 1) {
    // Single-topic short circuit: the topic vector is the normalized
    // word-mass diagonal and every word has weight 1 on it.
    a_sub = m_sub / m_sub.sum();
    pi_sub = Matrix::Ones(p_sub, 1);
    est.vh.vertices = Matrix(1, 0);
    est.vh.max_residual = 0.0;
  } else {
    const RatioMatrix rm = ratio_matrix(est.spectral, opts.t);
    Index l_eff = opts.l;
    if (l_eff == 0) l_eff = std::min(10 * k, p_sub);
    const KMeansResult km = kmeans(rm.rows, l_eff, derive_stream(opts.seed, 2),
                                   opts.kmeans);
    est.vh = hunt_vertices(km.centers, k);
    const detail::WeightSolver solver(est.vh.vertices);
    pi_sub.resize(p_sub, k);
    for (Index j = 0; j < p_sub; ++j) {
      pi_sub.row(j) = solver.solve(rm.rows.row(j)).transpose();
    }
    a_sub = reconstruct_topics(pi_sub, m_sub, rm.xi1);
  }

  if (!reduced) {
    est.a_hat = std::move(a_sub);
    est.pi_hat = std::move(pi_sub);
    return est;
  }
  est.a_hat.setZero(p, k);
  est.pi_hat.setZero(p, k);
  Index r = 0;
  for (Index j = 0; j < p; ++j) {
    if (keep[static_cast<std::size_t>(j)]) {
      est.a_hat.row(j) = a_sub.row(r);
      est.pi_hat.row(j) = pi_sub.row(r);
      ++r;
    }
  }
  return est;
}

/// Count-matrix front end: normalizes the corpus to frequencies first.
inline TopicEstimate fit(const DocTermMatrix& d, Index k,
                         const FitOptions& opts = {}) {
  return fit_frequencies(frequencies(d), k, opts);
}

}  // namespace topicscore
