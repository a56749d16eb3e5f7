#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "topicscore/simplex.hpp"
#include "topicscore/types.hpp"

namespace topicscore {

/**
 * @brief Outcome of the vertex search: the k chosen centers (rows), their
 * indices into the input center list, and the minimized worst distance of
 * any center to the chosen simplex.
 *
 * When no affinely independent subset exists the canonical simplex
 * (origin plus standard basis vectors) is returned instead, selected_indices
 * stays empty and fallback_used is set.
 */
struct VertexHuntResult {
  Matrix vertices;                      // k x (k-1)
  std::vector<Index> selected_indices;  // strictly increasing, or empty
  double max_residual = 0.0;
  bool fallback_used = false;
};

namespace detail {

// Rank check for the difference vectors v_i - v_0 via column-pivoted
// Gram-Schmidt; the pivot threshold is 1e-10 times the largest initial
// column norm. Allocation-free across calls.
class AffineIndependenceCheck {
 public:
  explicit AffineIndependenceCheck(Index k)
      : k_(k), work_(k - 1, k - 1) {}

  bool independent(const Matrix& centers, const std::vector<Index>& idx) {
    const Index m = k_ - 1;
    for (Index c = 0; c < m; ++c) {
      work_.col(c) =
          (centers.row(idx[static_cast<std::size_t>(c + 1)]) -
           centers.row(idx[0]))
              .transpose();
    }
    double max_norm = 0.0;
    for (Index c = 0; c < m; ++c) {
      max_norm = std::max(max_norm, work_.col(c).norm());
    }
    if (max_norm == 0.0) return false;
    const double tol = 1e-10 * max_norm;
    for (Index t = 0; t < m; ++t) {
      Index pivot = t;
      double best = work_.col(t).tail(m - t).norm();
      for (Index c = t + 1; c < m; ++c) {
        const double norm = work_.col(c).tail(m - t).norm();
        if (norm > best) {
          best = norm;
          pivot = c;
        }
      }
      if (best <= tol) return false;
      if (pivot != t) work_.col(pivot).swap(work_.col(t));
      work_.col(t).tail(m - t) /= best;
      for (Index c = t + 1; c < m; ++c) {
        const double proj =
            work_.col(t).tail(m - t).dot(work_.col(c).tail(m - t));
        work_.col(c).tail(m - t) -= proj * work_.col(t).tail(m - t);
      }
    }
    return true;
  }

 private:
  Index k_;
  Matrix work_;
};

// Greedy farthest-point subset used to seed the exhaustive search with a
// strong incumbent, so bad subsets prune early.
inline std::vector<Index> greedy_spread_subset(const Matrix& centers,
                                               Index k) {
  const Index l = centers.rows();
  Index a = 0;
  Index b = std::min<Index>(1, l - 1);
  double best = -1.0;
  for (Index i = 0; i < l; ++i) {
    for (Index j = i + 1; j < l; ++j) {
      const double d2 = (centers.row(i) - centers.row(j)).squaredNorm();
      if (d2 > best) {
        best = d2;
        a = i;
        b = j;
      }
    }
  }
  std::vector<Index> chosen{a, b};
  while (static_cast<Index>(chosen.size()) < k) {
    Index pick = -1;
    double far = -1.0;
    for (Index i = 0; i < l; ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double near = std::numeric_limits<double>::infinity();
      for (Index c : chosen) {
        near = std::min(near, (centers.row(i) - centers.row(c)).squaredNorm());
      }
      if (near > far) {
        far = near;
        pick = i;
      }
    }
    chosen.push_back(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace detail

/**
 * @brief Exhaustive search for the k centers whose simplex best covers the
 * whole center cloud.
 *
 * Scans all C(l, k) index tuples in ascending lexicographic order, skipping
 * affinely dependent ones, and minimizes the maximum distance of any center
 * to the candidate simplex; exact ties keep the lexicographically smallest
 * tuple. Candidates are abandoned as soon as a single center's distance
 * (or its cheap bounding-box lower bound) strictly exceeds the incumbent.
 */
inline VertexHuntResult hunt_vertices(const Matrix& centers, Index k) {
  const Index l = centers.rows();
  if (k < 2) throw ConfigError("hunt_vertices: k must be at least 2");
  if (centers.cols() != k - 1) {
    throw ConfigError("hunt_vertices: centers must have k-1 columns");
  }
  if (l < k) throw ConfigError("hunt_vertices: fewer centers than k");
  const Index d = k - 1;

  // Evaluate extreme centers first; they expose bad candidates quickest.
  const RowVector centroid = centers.colwise().mean();
  std::vector<Index> eval_order(static_cast<std::size_t>(l));
  std::iota(eval_order.begin(), eval_order.end(), Index{0});
  std::stable_sort(eval_order.begin(), eval_order.end(),
                   [&](Index a, Index b) {
                     return (centers.row(a) - centroid).squaredNorm() >
                            (centers.row(b) - centroid).squaredNorm();
                   });

  SimplexProjector projector(k, d);
  detail::AffineIndependenceCheck indep(k);
  Matrix subset_vertices(k, d);
  Vector lo(d);
  Vector hi(d);
  std::vector<char> member(static_cast<std::size_t>(l), 0);

  const std::vector<Index> sentinel(static_cast<std::size_t>(k),
                                    std::numeric_limits<Index>::max());
  double best_val = std::numeric_limits<double>::infinity();
  double best_val2 = std::numeric_limits<double>::infinity();
  std::vector<Index> best_tuple = sentinel;

  // Evaluates one subset against the incumbent; returns the max distance or
  // a quiet infinity when the candidate was pruned.
  auto evaluate = [&](const std::vector<Index>& idx) {
    for (Index r = 0; r < k; ++r) {
      subset_vertices.row(r) = centers.row(idx[static_cast<std::size_t>(r)]);
      member[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])] = 1;
    }
    lo = subset_vertices.colwise().minCoeff().transpose();
    hi = subset_vertices.colwise().maxCoeff().transpose();
    projector.set_vertices(subset_vertices);
    double running = 0.0;
    bool pruned = false;
    for (Index j : eval_order) {
      if (member[static_cast<std::size_t>(j)]) continue;
      double lb2 = 0.0;
      for (Index c = 0; c < d; ++c) {
        const double x = centers(j, c);
        const double gap = std::max({lo(c) - x, x - hi(c), 0.0});
        lb2 += gap * gap;
      }
      if (lb2 > best_val2) {
        pruned = true;
        break;
      }
      const double dist = projector.distance(centers.row(j));
      if (dist > running) {
        running = dist;
        if (running > best_val) {
          pruned = true;
          break;
        }
      }
    }
    for (Index r = 0; r < k; ++r) {
      member[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)])] = 0;
    }
    return pruned ? std::numeric_limits<double>::infinity() : running;
  };

  auto offer = [&](const std::vector<Index>& idx, double value) {
    if (value < best_val || (value == best_val && idx < best_tuple)) {
      best_val = value;
      best_val2 = value * value;
      best_tuple = idx;
    }
  };

  // Seed the incumbent with a spread-out subset; keep the sentinel tuple so
  // the same subset still wins the tie when enumeration reaches it.
  {
    const std::vector<Index> greedy = detail::greedy_spread_subset(centers, k);
    if (indep.independent(centers, greedy)) {
      const double value = evaluate(greedy);
      if (std::isfinite(value)) {
        best_val = value;
        best_val2 = value * value;
      }
    }
  }

  std::vector<Index> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), Index{0});
  while (true) {
    if (indep.independent(centers, idx)) {
      const double value = evaluate(idx);
      if (std::isfinite(value)) offer(idx, value);
    }
    // Advance the combination odometer.
    Index pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == l - k + pos) {
      --pos;
    }
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index q = pos + 1; q < k; ++q) {
      idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
  }

  VertexHuntResult result;
  if (best_tuple == sentinel) {
    result.vertices = Matrix::Zero(k, d);
    for (Index r = 1; r < k; ++r) result.vertices(r, r - 1) = 1.0;
    result.fallback_used = true;
    projector.set_vertices(result.vertices);
    double worst = 0.0;
    for (Index j = 0; j < l; ++j) {
      worst = std::max(worst, projector.distance(centers.row(j)));
    }
    result.max_residual = worst;
    return result;
  }
  result.vertices.resize(k, d);
  for (Index r = 0; r < k; ++r) {
    result.vertices.row(r) =
        centers.row(best_tuple[static_cast<std::size_t>(r)]);
  }
  result.selected_indices = best_tuple;
  result.max_residual = best_val;
  return result;
}

}  // namespace topicscore
