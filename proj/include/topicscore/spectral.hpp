#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "topicscore/rng.hpp"
#include "topicscore/types.hpp"

namespace topicscore {

/**
 * @brief Top-K spectral data of the normalized frequency matrix.
 *
 * m_diag holds the row means of the frequency matrix; singular_values and
 * left_vectors describe the top-K SVD of diag(m_diag)^{-1/2} * freq.
 */
struct SpectralDecomposition {
  Vector m_diag;           // p row means, all positive
  Vector singular_values;  // strictly decreasing, length K
  Matrix left_vectors;     // p x K, orthonormal columns
};

/**
 * @brief Entry-wise ratios of the trailing left singular vectors to the
 * first one, clamped to [-threshold, threshold].
 *
 * Rows where the first vector is exactly zero are zeroed out and listed in
 * degenerate_rows; zero is a safely interior value that cannot be mistaken
 * for a vertex.
 */
struct RatioMatrix {
  Matrix rows;  // p x (K-1)
  Vector xi1;   // copy of the first left singular vector
  double threshold = std::numeric_limits<double>::infinity();
  std::vector<Index> degenerate_rows;
};

namespace detail {

// Width below which a dense SVD is cheaper and exact; above it the
// randomized subspace path kicks in.
inline constexpr Index kDenseSvdCells = 1'000'000;

inline void check_nonnegative(const Matrix& freq) {
  if (freq.size() > 0 && freq.minCoeff() < 0.0) {
    throw ConfigError("frequency matrix has a negative entry");
  }
}

inline void check_nonnegative(const SparseMatrix& freq) {
  for (Index i = 0; i < freq.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(freq, i); it; ++it) {
      if (it.value() < 0.0) {
        throw ConfigError("frequency matrix has a negative entry");
      }
    }
  }
}

inline Matrix thin_q(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
}

// Applies the deterministic sign convention: the largest-magnitude entry of
// each left vector is made positive, then the first vector is re-flipped if
// its entry sum is negative. Right vectors flip in lockstep so residual
// identities survive.
inline void fix_signs(Matrix& left, Matrix& right) {
  for (Index k = 0; k < left.cols(); ++k) {
    Index arg = 0;
    left.col(k).cwiseAbs().maxCoeff(&arg);
    if (left(arg, k) < 0.0) {
      left.col(k) = -left.col(k);
      right.col(k) = -right.col(k);
    }
  }
  if (left.cols() > 0 && left.col(0).sum() < 0.0) {
    left.col(0) = -left.col(0);
    right.col(0) = -right.col(0);
  }
}

// Shared tail of both SVD paths: truncate, validate gaps, apply the sign
// convention and the spec residual check.
template <class MatType>
SpectralDecomposition finish_svd(const MatType& scaled, const Vector& m_diag,
                                 Index k, const Vector& all_sigma,
                                 const Matrix& all_left,
                                 const Matrix& all_right) {
  const double sigma1 = all_sigma(0);
  if (!(sigma1 > 0.0)) {
    throw NumericalError("matrix is numerically zero, no singular values");
  }
  const double gap_tol = 1e-12 * sigma1;
  for (Index i = 0; i + 1 < all_sigma.size() && i < k; ++i) {
    if (all_sigma(i) - all_sigma(i + 1) <= gap_tol) {
      throw NumericalError("singular value tie between positions " +
                           std::to_string(i + 1) + " and " +
                           std::to_string(i + 2));
    }
  }
  if (all_sigma(k - 1) <= gap_tol) {
    throw NumericalError("requested singular value is numerically zero");
  }

  Matrix left = all_left.leftCols(k);
  Matrix right = all_right.leftCols(k);
  fix_signs(left, right);

  const double resid_tol = 1e-8 * sigma1;
  for (Index j = 0; j < k; ++j) {
    const Vector resid =
        scaled.transpose() * left.col(j) - all_sigma(j) * right.col(j);
    if (!(resid.norm() <= resid_tol)) {
      throw NumericalError("SVD residual check failed for component " +
                           std::to_string(j + 1));
    }
  }

  SpectralDecomposition sd;
  sd.m_diag = m_diag;
  sd.singular_values = all_sigma.head(k);
  sd.left_vectors = std::move(left);
  return sd;
}

template <class MatType>
SpectralDecomposition dense_svd(const MatType& scaled, const Vector& m_diag,
                                Index k) {
  const Matrix dense(scaled);
  Eigen::BDCSVD<Matrix> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return finish_svd(scaled, m_diag, k, svd.singularValues(), svd.matrixU(),
                    svd.matrixV());
}

/**
 * @brief Randomized subspace iteration with Rayleigh-Ritz extraction.
 *
 * Sketch width k + 10, six power iterations per round, orthonormalization
 * after every product. The Gaussian test matrix comes from the seeded
 * stream, so the result is bit-stable for a fixed seed.
 */
template <class MatType>
SpectralDecomposition randomized_svd(const MatType& scaled,
                                     const Vector& m_diag, Index k,
                                     std::uint64_t seed) {
  const Index p = scaled.rows();
  const Index n = scaled.cols();
  const Index width = std::min(k + 10, std::min(p, n));

  SplitMix64 gen(derive_stream(seed, 0x53564453u));  // "SVDS" stream tag
  Matrix omega(n, width);
  for (Index j = 0; j < width; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double u1 = gen.uniform();
      const double u2 = gen.uniform();
      omega(i, j) = std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * std::numbers::pi * u2);
    }
  }

  Matrix q = thin_q(scaled * omega);
  for (int round = 0; round < 4; ++round) {
    for (int it = 0; it < 6; ++it) {
      const Matrix z = thin_q(scaled.transpose() * q);
      q = thin_q(scaled * z);
    }
    // Rayleigh-Ritz on the sketch: scaled^T q = u_c sigma v_c^T, so the
    // left vectors of scaled are q v_c and the right vectors are u_c.
    const Matrix ct = scaled.transpose() * q;
    Eigen::BDCSVD<Matrix> svd(ct, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix left = q * svd.matrixV();
    try {
      return finish_svd(scaled, m_diag, k, svd.singularValues(), left,
                        svd.matrixU());
    } catch (const NumericalError&) {
      if (round == 3) throw;  // out of iteration budget
    }
  }
  throw NumericalError("randomized SVD failed to converge");
}

template <class MatType>
SpectralDecomposition truncated_svd_impl(const MatType& scaled,
                                         const Vector& m_diag, Index k,
                                         std::uint64_t seed) {
  const Index p = scaled.rows();
  const Index n = scaled.cols();
  if (k < 1) throw ConfigError("k must be at least 1");
  if (k > std::min(p, n)) {
    throw ConfigError("k exceeds min(p, n) = " +
                      std::to_string(std::min(p, n)));
  }
  if (p * n <= kDenseSvdCells) return dense_svd(scaled, m_diag, k);
  return randomized_svd(scaled, m_diag, k, seed);
}

inline void check_m_diag(const Vector& m_diag, Index p) {
  if (m_diag.size() != p) {
    throw ConfigError("normalization diagonal has wrong length");
  }
  for (Index j = 0; j < p; ++j) {
    if (!(m_diag(j) > 0.0)) {
      throw ConfigError("nonpositive normalization entry at row " +
                        std::to_string(j + 1));
    }
  }
}

}  // namespace detail

/// Row means of the frequency matrix: entry j is (1/n) * sum_i freq(j, i).
template <class MatType>
Vector normalization_diag(const MatType& freq) {
  detail::check_nonnegative(freq);
  const Index n = freq.cols();
  if (n < 1) throw ConfigError("frequency matrix has no columns");
  return Vector(freq * Vector::Ones(n)) / static_cast<double>(n);
}

/**
 * @brief Top-k singular triplets of diag(m_diag)^{-1/2} * freq.
 *
 * Dense matrices up to a million cells go through an exact dense SVD; larger
 * problems use seeded randomized subspace iteration. Either way the output
 * satisfies the orthonormality, ordering, sign and residual contracts, and a
 * tie within 1e-12 * sigma_1 of the retained spectrum is an error.
 */
inline SpectralDecomposition truncated_svd(const Matrix& freq,
                                           const Vector& m_diag, Index k,
                                           std::uint64_t seed = 0) {
  detail::check_m_diag(m_diag, freq.rows());
  const Matrix scaled =
      m_diag.cwiseSqrt().cwiseInverse().asDiagonal() * freq;
  return detail::truncated_svd_impl(scaled, m_diag, k, seed);
}

inline SpectralDecomposition truncated_svd(const SparseMatrix& freq,
                                           const Vector& m_diag, Index k,
                                           std::uint64_t seed = 0) {
  detail::check_m_diag(m_diag, freq.rows());
  const SparseMatrix scaled =
      m_diag.cwiseSqrt().cwiseInverse().asDiagonal() * freq;
  return detail::truncated_svd_impl(scaled, m_diag, k, seed);
}

/**
 * @brief Entry-wise ratio matrix of the spectral decomposition.
 *
 * Entry (j, k) is left_vectors(j, k+1) / left_vectors(j, 0) clamped to
 * [-t, t]. Rows with an exactly zero leading entry become zero rows and are
 * reported in degenerate_rows.
 */
inline RatioMatrix ratio_matrix(const SpectralDecomposition& sd, double t) {
  const Index p = sd.left_vectors.rows();
  const Index k = sd.left_vectors.cols();
  if (k < 2) {
    throw ConfigError("ratio matrix needs at least 2 spectral components");
  }
  if (std::isnan(t) || t <= 0.0) {
    throw ConfigError("ratio threshold must be positive (or infinite)");
  }
  RatioMatrix rm;
  rm.rows.setZero(p, k - 1);
  rm.xi1 = sd.left_vectors.col(0);
  rm.threshold = t;
  for (Index j = 0; j < p; ++j) {
    const double x1 = sd.left_vectors(j, 0);
    if (x1 == 0.0) {
      rm.degenerate_rows.push_back(j);
      continue;
    }
    for (Index c = 1; c < k; ++c) {
      const double r = sd.left_vectors(j, c) / x1;
      rm.rows(j, c - 1) = std::clamp(r, -t, t);
    }
  }
  return rm;
}

}  // namespace topicscore
