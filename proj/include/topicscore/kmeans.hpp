#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "topicscore/rng.hpp"
#include "topicscore/types.hpp"

namespace topicscore {

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 300;
};

struct KMeansResult {
  Matrix centers;                  // l x dim
  std::vector<Index> assignment;   // point -> cluster, nearest center
  double inertia = 0.0;            // sum of squared point-center distances
};

namespace detail {

inline Index count_distinct_rows(const Matrix& points) {
  std::vector<Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return points(a, c) < points(b, c);
    }
    return false;
  });
  auto rows_equal = [&](Index a, Index b) {
    for (Index c = 0; c < points.cols(); ++c) {
      if (points(a, c) != points(b, c)) return false;
    }
    return true;
  };
  Index distinct = points.rows() > 0 ? 1 : 0;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!rows_equal(order[i], order[i - 1])) ++distinct;
  }
  return distinct;
}

// Nearest-center pass; ties go to the lowest center index.
inline void assign_points(const Matrix& points, const Matrix& centers,
                          std::vector<Index>& assignment) {
  const Index p = points.rows();
  const Index l = centers.rows();
  for (Index i = 0; i < p; ++i) {
    Index arg = 0;
    double best = (points.row(i) - centers.row(0)).squaredNorm();
    for (Index c = 1; c < l; ++c) {
      const double d2 = (points.row(i) - centers.row(c)).squaredNorm();
      if (d2 < best) {
        best = d2;
        arg = c;
      }
    }
    assignment[static_cast<std::size_t>(i)] = arg;
  }
}

inline double compute_inertia(const Matrix& points, const Matrix& centers,
                              const std::vector<Index>& assignment) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    total +=
        (points.row(i) - centers.row(assignment[static_cast<std::size_t>(i)]))
            .squaredNorm();
  }
  return total;
}

// Moves each empty cluster's center onto the farthest point of a cluster
// that can spare one, and assigns that point there. Strictly decreases the
// inertia, so Lloyd monotonicity survives repairs.
inline void repair_empty_clusters(const Matrix& points, Matrix& centers,
                                  std::vector<Index>& assignment,
                                  std::vector<Index>& sizes) {
  const Index l = centers.rows();
  for (Index c = 0; c < l; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Index donor = -1;
    double worst = -1.0;
    for (Index i = 0; i < points.rows(); ++i) {
      const Index a = assignment[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(a)] < 2) continue;
      const double d2 = (points.row(i) - centers.row(a)).squaredNorm();
      if (d2 > worst) {
        worst = d2;
        donor = i;
      }
    }
    if (donor < 0) continue;  // cannot happen while p >= l, kept defensive
    const Index old = assignment[static_cast<std::size_t>(donor)];
    centers.row(c) = points.row(donor);
    assignment[static_cast<std::size_t>(donor)] = c;
    --sizes[static_cast<std::size_t>(old)];
    ++sizes[static_cast<std::size_t>(c)];
  }
}

inline Matrix kmeanspp_seed(const Matrix& points, Index l, SplitMix64& gen) {
  const Index p = points.rows();
  Matrix centers(l, points.cols());
  centers.row(0) = points.row(gen.uniform_index(p));
  Vector d2(p);
  for (Index i = 0; i < p; ++i) {
    d2(i) = (points.row(i) - centers.row(0)).squaredNorm();
  }
  for (Index t = 1; t < l; ++t) {
    const double total = d2.sum();
    const double target = gen.uniform() * total;
    double acc = 0.0;
    Index pick = p - 1;
    for (Index i = 0; i < p; ++i) {
      acc += d2(i);
      if (acc >= target) {
        pick = i;
        break;
      }
    }
    centers.row(t) = points.row(pick);
    for (Index i = 0; i < p; ++i) {
      d2(i) = std::min(d2(i), (points.row(i) - centers.row(t)).squaredNorm());
    }
  }
  return centers;
}

}  // namespace detail

/**
 * @brief Lloyd's k-means with k-means++ seeding, best of several restarts.
 *
 * Deterministic for a fixed seed: restart r uses the derived stream
 * (seed, r), assignment ties go to the lowest center index, and the best
 * restart is the first one attaining the smallest inertia. Empty clusters
 * are repaired by moving the center onto the farthest assigned point. If
 * inertia_trace is given, the post-assignment inertia of every Lloyd
 * iteration (all restarts, in order) is appended; within one restart the
 * sequence is non-increasing.
 */
inline KMeansResult kmeans(const Matrix& points, Index l, std::uint64_t seed,
                           const KMeansOptions& opts = {},
                           std::vector<double>* inertia_trace = nullptr) {
  const Index p = points.rows();
  if (l < 1) throw ConfigError("kmeans: l must be at least 1");
  if (l > p) throw ConfigError("kmeans: l exceeds the number of points");
  if (opts.restarts < 1 || opts.max_iter < 1) {
    throw ConfigError("kmeans: restarts and max_iter must be positive");
  }
  if (detail::count_distinct_rows(points) < l) {
    throw ConfigError("kmeans: fewer than l distinct points");
  }

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.restarts; ++r) {
    SplitMix64 gen(derive_stream(seed, static_cast<std::uint64_t>(r)));
    Matrix centers = detail::kmeanspp_seed(points, l, gen);
    std::vector<Index> assignment(static_cast<std::size_t>(p), 0);
    std::vector<Index> prev;
    std::vector<Index> sizes(static_cast<std::size_t>(l), 0);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
      detail::assign_points(points, centers, assignment);
      std::fill(sizes.begin(), sizes.end(), Index{0});
      for (Index a : assignment) ++sizes[static_cast<std::size_t>(a)];
      detail::repair_empty_clusters(points, centers, assignment, sizes);
      if (inertia_trace != nullptr) {
        inertia_trace->push_back(
            detail::compute_inertia(points, centers, assignment));
      }
      if (assignment == prev) break;
      prev = assignment;
      for (Index c = 0; c < l; ++c) centers.row(c).setZero();
      for (Index i = 0; i < p; ++i) {
        centers.row(assignment[static_cast<std::size_t>(i)]) += points.row(i);
      }
      for (Index c = 0; c < l; ++c) {
        centers.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      }
    }

    // Final consistency pass so the stored assignment is nearest-center
    // with respect to the stored centers.
    detail::assign_points(points, centers, assignment);
    std::fill(sizes.begin(), sizes.end(), Index{0});
    for (Index a : assignment) ++sizes[static_cast<std::size_t>(a)];
    detail::repair_empty_clusters(points, centers, assignment, sizes);
    const double inertia = detail::compute_inertia(points, centers, assignment);
    if (inertia < best.inertia) {
      best.centers = std::move(centers);
      best.assignment = assignment;
      best.inertia = inertia;
    }
  }
  return best;
}

}  // namespace topicscore
