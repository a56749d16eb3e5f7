#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "topicscore/corpus.hpp"
#include "topicscore/rng.hpp"
#include "topicscore/types.hpp"

namespace topicscore {

/// Ground-truth factors of a synthetic corpus; both column-stochastic.
struct TopicModel {
  Matrix a;  // p x k word-topic matrix
  Matrix w;  // k x n topic-document matrix
};

enum class SynthVariant {
  kBasic,            // anchor blocks + uniform bulk
  kZipf,             // anchor blocks + exponential bulk, Zipf-decaying means
  kTwoScale,         // anchor blocks + bulk split across two uniform scales
  kNearAnchorHomog,  // contaminated anchor blocks + uniform bulk
  kNearAnchorZipf    // no reserved blocks; near-anchors picked from the bulk
};

/**
 * @brief Parameters of the synthetic corpus family.
 *
 * p words, n documents of length big_n each, k topics, m_p anchor words per
 * topic carrying row mass delta_p, m_n pure documents per topic. p_s, p_d
 * and h_max steer the heterogeneity variants and are ignored elsewhere.
 */
struct SynthConfig {
  Index p = 1000;
  Index n = 1000;
  std::int64_t big_n = 2000;
  Index k = 5;
  Index m_p = 10;
  double delta_p = 0.001;
  Index m_n = 10;
  SynthVariant variant = SynthVariant::kBasic;
  double p_s = 50.0;    // Zipf stop-word offset
  double p_d = 0.0;     // near-anchor contamination in [0, 1]
  double h_max = 0.01;  // upper scale of the two-scale bulk
  std::uint64_t seed = 0;
};

inline const char* to_string(SynthVariant v) {
  switch (v) {
    case SynthVariant::kBasic: return "basic";
    case SynthVariant::kZipf: return "zipf";
    case SynthVariant::kTwoScale: return "two_scale";
    case SynthVariant::kNearAnchorHomog: return "near_anchor_homog";
    case SynthVariant::kNearAnchorZipf: return "near_anchor_zipf";
  }
  return "unknown";
}

inline SynthVariant variant_from_string(const std::string& s) {
  if (s == "basic") return SynthVariant::kBasic;
  if (s == "zipf") return SynthVariant::kZipf;
  if (s == "two_scale") return SynthVariant::kTwoScale;
  if (s == "near_anchor_homog") return SynthVariant::kNearAnchorHomog;
  if (s == "near_anchor_zipf") return SynthVariant::kNearAnchorZipf;
  throw ConfigError("unknown synth variant: " + s);
}

namespace detail {

inline void validate(const SynthConfig& cfg) {
  if (cfg.p < 1 || cfg.n < 1 || cfg.k < 1 || cfg.big_n < 1) {
    throw ConfigError("synth config: p, n, k, big_n must be positive");
  }
  if (cfg.m_p < 1 || cfg.m_n < 0) {
    throw ConfigError("synth config: need m_p >= 1 and m_n >= 0");
  }
  if (cfg.k * cfg.m_p > cfg.p) {
    throw ConfigError("synth config: k * m_p exceeds p");
  }
  if (cfg.k * cfg.m_n > cfg.n) {
    throw ConfigError("synth config: k * m_n exceeds n");
  }
  if (!(cfg.delta_p > 0.0) ||
      static_cast<double>(cfg.m_p) * cfg.delta_p > 1.0 / static_cast<double>(cfg.k)) {
    throw ConfigError("synth config: m_p * delta_p must lie in (0, 1/k]");
  }
  if (cfg.p_d < 0.0 || cfg.p_d > 1.0) {
    throw ConfigError("synth config: p_d must lie in [0, 1]");
  }
  const bool has_blocks = cfg.variant != SynthVariant::kNearAnchorZipf;
  if (has_blocks && cfg.k * cfg.m_p >= cfg.p) {
    throw ConfigError("synth config: no rows left outside the anchor blocks");
  }
  if (cfg.variant == SynthVariant::kZipf ||
      cfg.variant == SynthVariant::kNearAnchorZipf) {
    if (!(cfg.p_s > 0.0)) throw ConfigError("synth config: p_s must be > 0");
  }
  if (cfg.variant == SynthVariant::kTwoScale) {
    if (cfg.h_max < 1.0 / static_cast<double>(cfg.p) || cfg.h_max >= 1.0) {
      throw ConfigError("synth config: h_max must lie in [1/p, 1)");
    }
    const double bulk = 1.0 - static_cast<double>(cfg.m_p) * cfg.delta_p;
    const auto n_max = static_cast<Index>(bulk / (2.0 * cfg.h_max));
    if (n_max < 1 || cfg.p - cfg.k * cfg.m_p - n_max < 1) {
      throw ConfigError("synth config: two-scale split leaves an empty band");
    }
  }
}

// Zipf-style exponential mean for 1-based absolute row index j.
inline double zipf_mean(double p_s, Index j) {
  return std::pow(p_s + static_cast<double>(j), -1.07);
}

// Writes the k anchor blocks: rows of block k carry delta_p at column k and
// delta_p * p_d elsewhere (p_d = 0 recovers exact anchors bit-for-bit).
inline void fill_anchor_blocks(Matrix& a, Index k, Index m_p, double delta_p,
                               double p_d) {
  for (Index topic = 0; topic < k; ++topic) {
    for (Index r = topic * m_p; r < (topic + 1) * m_p; ++r) {
      for (Index c = 0; c < k; ++c) {
        a(r, c) = c == topic ? delta_p : delta_p * p_d;
      }
    }
  }
}

// Scales each column of rows [first, p) so that it sums to mass.
inline void normalize_tail(Matrix& a, Index first, double mass) {
  const Index rows = a.rows() - first;
  for (Index c = 0; c < a.cols(); ++c) {
    const double total = a.col(c).tail(rows).sum();
    a.col(c).tail(rows) *= mass / total;
  }
}

}  // namespace detail

/**
 * @brief Builds the ground-truth (A, W) pair for the requested variant.
 *
 * All randomness comes from two streams derived from cfg.seed (one for A,
 * one for W), filled in fixed row-major order, so every variant consumes
 * the stream identically where the recipes coincide. Columns of both
 * factors sum to 1 by construction.
 */
inline TopicModel generate_model(const SynthConfig& cfg) {
  detail::validate(cfg);
  const Index p = cfg.p;
  const Index n = cfg.n;
  const Index k = cfg.k;
  const Index anchors = cfg.k * cfg.m_p;
  SplitMix64 gen_a(derive_stream(cfg.seed, 1));

  Matrix a = Matrix::Zero(p, k);
  switch (cfg.variant) {
    case SynthVariant::kBasic:
    case SynthVariant::kNearAnchorHomog: {
      const double p_d =
          cfg.variant == SynthVariant::kNearAnchorHomog ? cfg.p_d : 0.0;
      detail::fill_anchor_blocks(a, k, cfg.m_p, cfg.delta_p, p_d);
      for (Index j = anchors; j < p; ++j) {
        for (Index c = 0; c < k; ++c) a(j, c) = gen_a.uniform();
      }
      const double anchor_mass = static_cast<double>(cfg.m_p) * cfg.delta_p;
      detail::normalize_tail(
          a, anchors,
          1.0 - anchor_mass - anchor_mass * static_cast<double>(k - 1) * p_d);
      break;
    }
    case SynthVariant::kZipf: {
      detail::fill_anchor_blocks(a, k, cfg.m_p, cfg.delta_p, 0.0);
      for (Index j = anchors; j < p; ++j) {
        const double mean = detail::zipf_mean(cfg.p_s, j + 1);
        for (Index c = 0; c < k; ++c) a(j, c) = gen_a.exponential(mean);
      }
      detail::normalize_tail(
          a, anchors, 1.0 - static_cast<double>(cfg.m_p) * cfg.delta_p);
      break;
    }
    case SynthVariant::kTwoScale: {
      detail::fill_anchor_blocks(a, k, cfg.m_p, cfg.delta_p, 0.0);
      const double bulk = 1.0 - static_cast<double>(cfg.m_p) * cfg.delta_p;
      const auto n_max = static_cast<Index>(bulk / (2.0 * cfg.h_max));
      const Index n_min = p - anchors - n_max;
      const double h_min =
          (bulk - cfg.h_max * static_cast<double>(n_max)) /
          static_cast<double>(n_min);
      for (Index j = anchors; j < p; ++j) {
        const double scale = j < anchors + n_max ? cfg.h_max : h_min;
        for (Index c = 0; c < k; ++c) a(j, c) = scale * gen_a.uniform();
      }
      detail::normalize_tail(a, anchors, bulk);
      break;
    }
    case SynthVariant::kNearAnchorZipf: {
      for (Index j = 0; j < p; ++j) {
        const double mean = detail::zipf_mean(cfg.p_s, j + 1);
        for (Index c = 0; c < k; ++c) a(j, c) = gen_a.exponential(mean);
      }
      // Per topic: pick m_p rows among those whose largest entry sits in
      // that topic's column, keep that entry, shrink the rest by p_d.
      for (Index topic = 0; topic < k; ++topic) {
        std::vector<Index> candidates;
        for (Index j = 0; j < p; ++j) {
          Index arg = 0;
          a.row(j).maxCoeff(&arg);
          if (arg == topic) candidates.push_back(j);
        }
        if (static_cast<Index>(candidates.size()) < cfg.m_p) {
          throw ConfigError(
              "synth config: fewer than m_p rows peak at topic " +
              std::to_string(topic + 1));
        }
        for (Index t = 0; t < cfg.m_p; ++t) {
          const Index swap_with =
              t + gen_a.uniform_index(
                      static_cast<Index>(candidates.size()) - t);
          std::swap(candidates[static_cast<std::size_t>(t)],
                    candidates[static_cast<std::size_t>(swap_with)]);
          const Index row = candidates[static_cast<std::size_t>(t)];
          for (Index c = 0; c < k; ++c) {
            if (c != topic) a(row, c) *= cfg.p_d;
          }
        }
      }
      for (Index c = 0; c < k; ++c) a.col(c) /= a.col(c).sum();
      break;
    }
  }

  SplitMix64 gen_w(derive_stream(cfg.seed, 2));
  Matrix w = Matrix::Zero(k, n);
  for (Index topic = 0; topic < k; ++topic) {
    for (Index i = topic * cfg.m_n; i < (topic + 1) * cfg.m_n; ++i) {
      w(topic, i) = 1.0;
    }
  }
  for (Index i = k * cfg.m_n; i < n; ++i) {
    double total = 0.0;
    for (Index c = 0; c < k; ++c) {
      w(c, i) = gen_w.uniform();
      total += w(c, i);
    }
    w.col(i) /= total;
  }
  return {std::move(a), std::move(w)};
}

/// Noiseless population frequencies D0 = A * W, column-stochastic.
inline Matrix population_frequencies(const TopicModel& model) {
  return model.a * model.w;
}

/// Flags rows of the topic matrix with exactly one nonzero entry.
inline std::vector<bool> anchor_row_flags(const Matrix& a) {
  std::vector<bool> flags(static_cast<std::size_t>(a.rows()), false);
  for (Index j = 0; j < a.rows(); ++j) {
    Index nonzeros = 0;
    for (Index c = 0; c < a.cols(); ++c) {
      if (a(j, c) != 0.0) ++nonzeros;
    }
    flags[static_cast<std::size_t>(j)] = nonzeros == 1;
  }
  return flags;
}

/**
 * @brief Draws the corpus: column i is Multinomial(lengths[i], (A W) e_i).
 *
 * Document i consumes only the stream derived as (seed, i), so columns are
 * independent and any evaluation order yields identical counts.
 */
inline DocTermMatrix sample_corpus(const TopicModel& model,
                                   const std::vector<std::int64_t>& lengths,
                                   std::uint64_t seed) {
  const Index p = model.a.rows();
  const Index n = model.w.cols();
  if (static_cast<Index>(lengths.size()) != n) {
    throw ConfigError("sample_corpus: lengths size mismatch");
  }
  DocTermMatrix d;
  d.counts.resize(p, n);
  d.doc_lengths = lengths;
  std::vector<Eigen::Triplet<double>> trips;
  Vector pmf(p);
  for (Index i = 0; i < n; ++i) {
    pmf.noalias() = model.a * model.w.col(i);
    SplitMix64 gen(derive_stream(seed, static_cast<std::uint64_t>(i)));
    const Vector counts =
        multinomial(gen, lengths[static_cast<std::size_t>(i)], pmf);
    for (Index j = 0; j < p; ++j) {
      if (counts(j) != 0.0) trips.emplace_back(j, i, counts(j));
    }
  }
  d.counts.setFromTriplets(trips.begin(), trips.end());
  return d;
}

inline DocTermMatrix sample_corpus(const TopicModel& model, std::int64_t big_n,
                                   std::uint64_t seed) {
  return sample_corpus(
      model,
      std::vector<std::int64_t>(static_cast<std::size_t>(model.w.cols()),
                                big_n),
      seed);
}

}  // namespace topicscore
