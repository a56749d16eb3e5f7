#pragma once

#include <cmath>
#include <cstdint>

#include "topicscore/types.hpp"

namespace topicscore {

/**
 * @brief Small deterministic PRNG (SplitMix64).
 *
 * Each consumer owns its own stream, keyed off a master seed through
 * derive_stream(), so sampled output never depends on evaluation order or
 * on how work is split across threads.
 */
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double on the open interval (0, 1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exponential variate with the given mean (mean > 0).
  double exponential(double mean) { return -mean * std::log(uniform()); }

  /// Uniform integer in [0, bound); bound must be positive.
  Index uniform_index(Index bound) {
    const auto k = static_cast<Index>(uniform() * static_cast<double>(bound));
    return k < bound ? k : bound - 1;
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent child seed from a master seed and a stream index.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 g(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
  g.next();
  return g.next();
}

namespace detail {

// Walks the Binomial(n, p) pmf outward from the mode, spending the single
// uniform u on intervals of exact pmf length. Requires 0 < p <= 1/2. Never
// underflows: the mode probability is at least 1/(n+1) and tail terms that
// underflow to zero only pad intervals of negligible measure.
inline std::int64_t binomial_mode_walk(double u, std::int64_t n, double p) {
  const auto nd = static_cast<double>(n);
  const auto mode = static_cast<std::int64_t>((nd + 1.0) * p);
  const double log_mode_pmf = std::lgamma(nd + 1.0) -
                              std::lgamma(static_cast<double>(mode) + 1.0) -
                              std::lgamma(static_cast<double>(n - mode) + 1.0) +
                              static_cast<double>(mode) * std::log(p) +
                              static_cast<double>(n - mode) * std::log1p(-p);
  double acc = std::exp(log_mode_pmf);
  if (u < acc) return mode;
  const double r = p / (1.0 - p);
  double f_lo = acc;
  double f_hi = acc;
  std::int64_t lo = mode;
  std::int64_t hi = mode;
  while (lo > 0 || hi < n) {
    if (lo > 0) {
      f_lo *= static_cast<double>(lo) / (r * static_cast<double>(n - lo + 1));
      --lo;
      acc += f_lo;
      if (u < acc) return lo;
    }
    if (hi < n) {
      f_hi *= r * static_cast<double>(n - hi) / static_cast<double>(hi + 1);
      ++hi;
      acc += f_hi;
      if (u < acc) return hi;
    }
  }
  return mode;  // u fell into the rounding gap past the accumulated mass
}

// Classic bottom-up inversion; requires (1-p)^n comfortably above the
// underflow threshold, which the dispatcher guarantees.
inline std::int64_t binomial_inversion(double u, std::int64_t n, double p) {
  double f = std::exp(static_cast<double>(n) * std::log1p(-p));
  const double r = p / (1.0 - p);
  double acc = f;
  std::int64_t k = 0;
  while (u >= acc && k < n) {
    f *= r * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    acc += f;
  }
  return k;
}

inline std::int64_t binomial_from_uniform(double u, std::int64_t n, double p) {
  if (static_cast<double>(n) * p <= 30.0 &&
      static_cast<double>(n) * std::log1p(-p) > -700.0) {
    return binomial_inversion(u, n, p);
  }
  return binomial_mode_walk(u, n, p);
}

}  // namespace detail

/**
 * @brief Exact Binomial(n, p) sample.
 *
 * Consumes exactly one uniform per call regardless of the branch taken.
 * Small-mean cases invert the cdf from zero; large-mean cases walk outward
 * from the mode, a different but equally exact partition of (0, 1) into
 * intervals of pmf length. No normal approximation anywhere.
 */
inline std::int64_t binomial(SplitMix64& gen, std::int64_t n, double p) {
  const double u = gen.uniform();
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - detail::binomial_from_uniform(u, n, 1.0 - p);
  return detail::binomial_from_uniform(u, n, p);
}

/**
 * @brief Multinomial draw by sequential conditional binomials.
 *
 * The pmf must be nonnegative with positive total mass; it is normalized
 * internally. The returned counts are integer-valued doubles and always sum
 * to exactly trials. In the (measure-zero, rounding-induced) event that
 * conditional mass runs out early, the remainder lands on the last category.
 */
inline Vector multinomial(SplitMix64& gen, std::int64_t trials,
                          const Vector& pmf) {
  const Index p = pmf.size();
  if (p == 0) throw ConfigError("multinomial: empty pmf");
  if (trials < 0) throw ConfigError("multinomial: negative trial count");
  double mass = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (!(pmf[j] >= 0.0) || !std::isfinite(pmf[j])) {
      throw ConfigError("multinomial: pmf entries must be finite and >= 0");
    }
    mass += pmf[j];
  }
  if (mass <= 0.0) throw ConfigError("multinomial: pmf has zero total mass");

  Vector counts = Vector::Zero(p);
  std::int64_t remaining = trials;
  for (Index j = 0; j + 1 < p && remaining > 0; ++j) {
    const double cond = pmf[j] / mass;
    const std::int64_t x =
        cond >= 1.0 ? remaining : binomial(gen, remaining, cond);
    counts[j] = static_cast<double>(x);
    remaining -= x;
    mass -= pmf[j];
    if (mass <= 0.0) break;
  }
  counts[p - 1] += static_cast<double>(remaining);
  return counts;
}

}  // namespace topicscore
