#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>
#include <vector>

#include "topicscore/estimator.hpp"
#include "topicscore/rng.hpp"
#include "topicscore/synth.hpp"
#include "topicscore/types.hpp"

namespace topicscore {

/**
 * @brief Permutation-minimized l1 comparison of two topic matrices.
 *
 * permutation[k] is the true column matched to estimated column k;
 * per_topic holds the matched column distances and loss is their total.
 */
struct LossReport {
  double loss = 0.0;
  std::vector<Index> permutation;
  Vector per_topic;
  std::optional<Vector> per_word_rel;
};

/**
 * @brief Exact minimum-cost perfect matching on a square cost matrix
 * (shortest augmenting paths with potentials, O(n^3)).
 *
 * Returns the column assigned to each row.
 */
inline std::vector<Index> min_cost_assignment(const Matrix& cost) {
  const Index n = cost.rows();
  if (n != cost.cols() || n < 1) {
    throw ConfigError("min_cost_assignment: cost matrix must be square");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      Index j1 = 0;
      double delta = inf;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) -
                           u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] +=
              delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    while (j0 != 0) {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] =
          match[static_cast<std::size_t>(j1)];
      j0 = j1;
    }
  }
  std::vector<Index> assign(static_cast<std::size_t>(n), 0);
  for (Index j = 1; j <= n; ++j) {
    if (match[static_cast<std::size_t>(j)] > 0) {
      assign[static_cast<std::size_t>(match[static_cast<std::size_t>(j)]) -
             1] = j - 1;
    }
  }
  return assign;
}

/**
 * @brief Topic recovery loss: min over label permutations kappa of
 * sum_k ||a_hat_k - a_true_kappa(k)||_1.
 *
 * Brute force over all K! permutations up to K = 8, exact linear assignment
 * beyond. The reported loss sums the matched distances in sorted order, so
 * permuting the estimate's columns reproduces the loss bit for bit.
 */
inline LossReport l1_loss(const Matrix& a_hat, const Matrix& a_true,
                          bool want_per_word = false) {
  if (a_hat.rows() != a_true.rows() || a_hat.cols() != a_true.cols()) {
    throw ConfigError("l1_loss: shape mismatch");
  }
  const Index k = a_hat.cols();
  if (k < 1) throw ConfigError("l1_loss: empty matrices");
  for (Index c = 0; c < k; ++c) {
    if (std::abs(a_hat.col(c).sum() - 1.0) > 1e-6 ||
        std::abs(a_true.col(c).sum() - 1.0) > 1e-6) {
      std::fprintf(stderr,
                   "l1_loss: warning: column %lld is not stochastic\n",
                   static_cast<long long>(c + 1));
      break;
    }
  }

  // Sequential accumulation keeps the cost entries independent of the SIMD
  // reduction order, so losses reproduce bit for bit across builds.
  Matrix cost(k, k);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) {
      double total = 0.0;
      for (Index j = 0; j < a_hat.rows(); ++j) {
        total += std::abs(a_hat(j, a) - a_true(j, b));
      }
      cost(a, b) = total;
    }
  }

  LossReport report;
  if (k <= 8) {
    std::vector<Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::vector<Index> best = perm;
    double best_total = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (Index a = 0; a < k; ++a) {
        total += cost(a, perm[static_cast<std::size_t>(a)]);
      }
      if (total < best_total) {
        best_total = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    report.permutation = std::move(best);
  } else {
    report.permutation = min_cost_assignment(cost);
  }

  report.per_topic.resize(k);
  for (Index a = 0; a < k; ++a) {
    report.per_topic(a) = cost(a, report.permutation[static_cast<std::size_t>(a)]);
  }
  std::vector<double> sorted(report.per_topic.data(),
                             report.per_topic.data() + k);
  std::sort(sorted.begin(), sorted.end());
  report.loss = std::accumulate(sorted.begin(), sorted.end(), 0.0);

  if (want_per_word) {
    Vector rel(a_hat.rows());
    for (Index j = 0; j < a_hat.rows(); ++j) {
      double num = 0.0;
      double den = 0.0;
      for (Index a = 0; a < k; ++a) {
        num += std::abs(
            a_hat(j, a) -
            a_true(j, report.permutation[static_cast<std::size_t>(a)]));
        den += std::abs(a_true(j, a));
      }
      rel(j) = den > 0.0 ? num / den : num;
    }
    report.per_word_rel = std::move(rel);
  }
  return report;
}

struct McRow {
  int rep = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct McResult {
  std::vector<McRow> rows;
  double mean_loss = 0.0;
  double stderr_loss = 0.0;
};

/**
 * @brief Generate-sample-fit-score loop over independent replicates.
 *
 * Replicate r derives its model, corpus and fit seeds from (cfg.seed, r)
 * counters, so the result table does not depend on how replicates are
 * scheduled across threads. Rows come back in replicate order with wall
 * times; the summary reports the mean loss and its standard error.
 */
inline McResult run_monte_carlo(const SynthConfig& cfg, int reps,
                                const FitOptions& fit_opts = {},
                                int threads = 1) {
  if (reps < 1) throw ConfigError("run_monte_carlo: reps must be at least 1");
  McResult result;
  result.rows.resize(static_cast<std::size_t>(reps));

  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_rep = [&](int r) {
    const auto t0 = std::chrono::steady_clock::now();
    SynthConfig rep_cfg = cfg;
    rep_cfg.seed = derive_stream(cfg.seed, 3 * static_cast<std::uint64_t>(r) + 1);
    const std::uint64_t corpus_seed =
        derive_stream(cfg.seed, 3 * static_cast<std::uint64_t>(r) + 2);
    FitOptions opts = fit_opts;
    opts.seed = derive_stream(cfg.seed, 3 * static_cast<std::uint64_t>(r) + 3);

    const TopicModel model = generate_model(rep_cfg);
    const DocTermMatrix corpus = sample_corpus(model, cfg.big_n, corpus_seed);
    const TopicEstimate est = fit(corpus, cfg.k, opts);
    const double loss = l1_loss(est.a_hat, model.a).loss;
    const auto t1 = std::chrono::steady_clock::now();
    result.rows[static_cast<std::size_t>(r)] = {
        r, loss,
        std::chrono::duration<double, std::milli>(t1 - t0).count()};
  };

  const int workers = std::max(1, std::min(threads, reps));
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run_rep(r);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int tid = 0; tid < workers; ++tid) {
      pool.emplace_back([&, tid] {
        for (int r = tid; r < reps; r += workers) {
          try {
            run_rep(r);
          } catch (...) {
            const std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  double mean = 0.0;
  for (const auto& row : result.rows) mean += row.loss;
  mean /= static_cast<double>(reps);
  double var = 0.0;
  for (const auto& row : result.rows) {
    var += (row.loss - mean) * (row.loss - mean);
  }
  result.mean_loss = mean;
  result.stderr_loss =
      reps > 1 ? std::sqrt(var / static_cast<double>(reps - 1)) /
                     std::sqrt(static_cast<double>(reps))
               : 0.0;
  return result;
}

/// Thread budget helper: nonpositive requests resolve to the hardware count.
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace topicscore
