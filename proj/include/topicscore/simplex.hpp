#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "topicscore/types.hpp"

namespace topicscore {

/**
 * @brief Euclidean projection onto the convex hull of a small vertex set,
 * solved as a nonnegative least squares over barycentric coordinates with a
 * Lawson-Hanson style active set.
 *
 * Built for repeated queries against the same simplex: set_vertices()
 * precomputes the Gram matrix once, distance() then runs allocation-free.
 * Distances at or below 1e-12 are clamped to exactly zero, so "inside the
 * hull" is a crisp predicate.
 */
class SimplexProjector {
 public:
  SimplexProjector(Index max_vertices, Index dim)
      : dim_(dim),
        verts_(max_vertices, dim),
        gram_(max_vertices, max_vertices),
        kkt_(max_vertices + 1, max_vertices + 1),
        kkt_rhs_(max_vertices + 1),
        kkt_sol_(max_vertices + 1),
        col_perm_(static_cast<std::size_t>(max_vertices + 1)),
        scores_(max_vertices),
        point_dot_(max_vertices),
        pi_(max_vertices),
        pi_cand_(max_vertices),
        x_(dim),
        grad_(dim) {}

  /// Installs the vertex rows (k x dim) and precomputes their Gram matrix.
  void set_vertices(const Eigen::Ref<const Matrix>& vertices) {
    k_ = vertices.rows();
    if (k_ < 1 || k_ > verts_.rows() || vertices.cols() != dim_) {
      throw ConfigError("simplex projector: bad vertex matrix shape");
    }
    verts_.topRows(k_) = vertices;
    gram_.topLeftCorner(k_, k_) =
        verts_.topRows(k_) * verts_.topRows(k_).transpose();
  }

  /**
   * @brief Distance from b to the installed simplex; optionally reports the
   * barycentric weights of the projection (length k, zeros off-support).
   */
  double distance(const Eigen::Ref<const RowVector>& b,
                  Vector* weights = nullptr) {
    if (b.size() != dim_) {
      throw ConfigError("simplex projector: bad query dimension");
    }
    point_dot_.head(k_).noalias() = verts_.topRows(k_) * b.transpose();
    const double bb = b.squaredNorm();

    // Start from the nearest single vertex (ties to the lowest index).
    Index start = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < k_; ++j) {
      const double d2 = gram_(j, j) - 2.0 * point_dot_(j) + bb;
      if (d2 < best) {
        best = d2;
        start = j;
      }
    }
    free_.clear();
    free_.push_back(start);
    pi_.head(k_).setZero();
    pi_(start) = 1.0;
    x_ = verts_.row(start).transpose();

    const Index cap = 100 * k_;
    for (Index outer = 0; outer < cap; ++outer) {
      // Inner loop: solve the equality-constrained subproblem on the free
      // set, stepping back toward the last feasible iterate until every
      // free coordinate is nonnegative.
      for (Index guard = 0; guard <= k_; ++guard) {
        solve_subproblem();
        double alpha = 1.0;
        Index drop = -1;
        for (std::size_t i = 0; i < free_.size(); ++i) {
          const Index f = free_[i];
          if (pi_cand_(f) < 0.0) {
            const double step = pi_(f) / (pi_(f) - pi_cand_(f));
            if (step < alpha) {
              alpha = step;
              drop = f;
            }
          }
        }
        if (drop < 0) {
          for (Index f : free_) pi_(f) = std::max(pi_cand_(f), 0.0);
          break;
        }
        for (Index f : free_) {
          pi_(f) += alpha * (pi_cand_(f) - pi_(f));
        }
        pi_(drop) = 0.0;
        std::erase_if(free_, [&](Index f) {
          if (pi_(f) <= 1e-14) {
            pi_(f) = 0.0;
            return true;
          }
          return false;
        });
        if (free_.empty()) {  // numerical corner: restart from best vertex
          free_.push_back(start);
          pi_(start) = 1.0;
          break;
        }
      }

      x_.setZero();
      for (Index f : free_) x_ += pi_(f) * verts_.row(f).transpose();
      grad_ = x_ - b.transpose();
      scores_.head(k_).noalias() = verts_.topRows(k_) * grad_;

      double nu = 0.0;
      for (Index f : free_) nu += scores_(f);
      nu /= static_cast<double>(free_.size());

      // KKT: every non-support vertex must score at least nu.
      const double tol = 1e-12 * (1.0 + std::abs(nu));
      Index enter = -1;
      double worst = nu - tol;
      for (Index j = 0; j < k_; ++j) {
        if (pi_(j) == 0.0 && !contains(free_, j) && scores_(j) < worst) {
          worst = scores_(j);
          enter = j;
        }
      }
      if (enter < 0) break;
      insert_sorted(free_, enter);
    }

    const double dist = (x_ - b.transpose()).norm();
    if (weights != nullptr) {
      weights->setZero(k_);
      for (Index f : free_) (*weights)(f) = pi_(f);
    }
    return dist <= 1e-12 ? 0.0 : dist;
  }

  Index vertex_count() const { return k_; }

 private:
  static bool contains(const std::vector<Index>& v, Index x) {
    for (Index e : v) {
      if (e == x) return true;
    }
    return false;
  }

  static void insert_sorted(std::vector<Index>& v, Index x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  }

  // Minimizes ||V_F' pi - b||^2 subject to sum(pi) = 1 over the free set by
  // solving the KKT system [G 1; 1' 0] [pi; lambda] = [Vb; 1] with complete
  // pivoting. A vanishing pivot means affinely dependent vertices; the
  // dependent coordinates are pinned to zero, which keeps the system
  // consistent and the algorithm deterministic.
  void solve_subproblem() {
    const auto m = static_cast<Index>(free_.size());
    const Index s = m + 1;
    for (Index a = 0; a < m; ++a) {
      for (Index c = 0; c < m; ++c) {
        kkt_(a, c) = gram_(free_[static_cast<std::size_t>(a)],
                           free_[static_cast<std::size_t>(c)]);
      }
      kkt_(a, m) = 1.0;
      kkt_(m, a) = 1.0;
      kkt_rhs_(a) = point_dot_(free_[static_cast<std::size_t>(a)]);
    }
    kkt_(m, m) = 0.0;
    kkt_rhs_(m) = 1.0;

    for (Index i = 0; i < s; ++i) col_perm_[static_cast<std::size_t>(i)] = i;
    double scale = 0.0;
    for (Index a = 0; a < s; ++a) {
      for (Index c = 0; c < s; ++c) scale = std::max(scale, std::abs(kkt_(a, c)));
    }
    if (scale == 0.0) scale = 1.0;
    const double pivot_tol = 1e-13 * scale;

    Index rank = s;
    for (Index t = 0; t < s; ++t) {
      Index pr = t;
      Index pc = t;
      double pv = 0.0;
      for (Index a = t; a < s; ++a) {
        for (Index c = t; c < s; ++c) {
          if (std::abs(kkt_(a, c)) > pv) {
            pv = std::abs(kkt_(a, c));
            pr = a;
            pc = c;
          }
        }
      }
      if (pv <= pivot_tol) {
        rank = t;
        break;
      }
      if (pr != t) {
        kkt_.row(pr).head(s).swap(kkt_.row(t).head(s));
        std::swap(kkt_rhs_(pr), kkt_rhs_(t));
      }
      if (pc != t) {
        kkt_.col(pc).head(s).swap(kkt_.col(t).head(s));
        std::swap(col_perm_[static_cast<std::size_t>(pc)],
                  col_perm_[static_cast<std::size_t>(t)]);
      }
      for (Index a = t + 1; a < s; ++a) {
        const double factor = kkt_(a, t) / kkt_(t, t);
        if (factor == 0.0) continue;
        kkt_.row(a).segment(t, s - t) -= factor * kkt_.row(t).segment(t, s - t);
        kkt_rhs_(a) -= factor * kkt_rhs_(t);
      }
    }

    kkt_sol_.head(s).setZero();
    for (Index t = rank - 1; t >= 0; --t) {
      double acc = kkt_rhs_(t);
      for (Index c = t + 1; c < rank; ++c) acc -= kkt_(t, c) * kkt_sol_(c);
      kkt_sol_(t) = acc / kkt_(t, t);
    }
    for (Index a = 0; a < m; ++a) pi_cand_(free_[static_cast<std::size_t>(a)]) = 0.0;
    for (Index t = 0; t < s; ++t) {
      const Index var = col_perm_[static_cast<std::size_t>(t)];
      if (var < m) {
        pi_cand_(free_[static_cast<std::size_t>(var)]) = kkt_sol_(t);
      }
    }
  }

  Index dim_;
  Index k_ = 0;
  Matrix verts_;
  Matrix gram_;
  Matrix kkt_;
  Vector kkt_rhs_;
  Vector kkt_sol_;
  std::vector<Index> col_perm_;
  Vector scores_;
  Vector point_dot_;
  Vector pi_;
  Vector pi_cand_;
  Vector x_;
  Vector grad_;
  std::vector<Index> free_;
};

/**
 * @brief Distance from point b to the simplex spanned by the vertex rows:
 * min over pi >= 0 with sum(pi) = 1 of ||b - sum_k pi_k v_k||_2.
 */
inline double distance_to_simplex(const Eigen::Ref<const RowVector>& b,
                                  const Eigen::Ref<const Matrix>& vertices) {
  if (vertices.rows() < 1) {
    throw ConfigError("distance_to_simplex: no vertices");
  }
  SimplexProjector proj(vertices.rows(), vertices.cols());
  proj.set_vertices(vertices);
  return proj.distance(b);
}

}  // namespace topicscore
