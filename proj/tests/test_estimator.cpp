#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "topicscore/estimator.hpp"
#include "topicscore/eval.hpp"
#include "topicscore/simplex.hpp"
#include "topicscore/synth.hpp"

using namespace topicscore;

namespace {

Matrix canonical_triangle() {
  Matrix v(3, 2);
  v << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  return v;
}

// Small noiseless instance whose ratio rows have exactly p - k duplicates:
// the anchors of one topic share identical rows, so k-means with
// l = p - k(m_p - 1) reaches zero inertia and recovers the vertices exactly.
SynthConfig exact_config() {
  SynthConfig cfg;
  cfg.p = 25;
  cfg.n = 40;
  cfg.k = 3;
  cfg.m_p = 2;
  cfg.delta_p = 0.05;
  cfg.m_n = 3;
  cfg.big_n = 100;  // unused for population fits
  cfg.variant = SynthVariant::kBasic;
  cfg.seed = 321;
  return cfg;
}

FitOptions exact_options() {
  FitOptions opts;
  opts.l = 22;  // 25 rows - 3 duplicate anchor rows
  opts.seed = 5;
  return opts;
}

Matrix random_stochastic(Index p, Index n, std::uint64_t seed) {
  SplitMix64 gen(seed);
  Matrix freq(p, n);
  for (Index i = 0; i < n; ++i) {
    double total = 0.0;
    for (Index j = 0; j < p; ++j) {
      freq(j, i) = gen.uniform();
      total += freq(j, i);
    }
    freq.col(i) /= total;
  }
  return freq;
}

}  // namespace

TEST_CASE("estimate_weights recovers barycentric coordinates") {
  RowVector r(2);
  r << 0.25, 0.25;
  const Vector pi = estimate_weights(r, canonical_triangle());
  REQUIRE(pi(0) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(pi(1) == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(pi(2) == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("estimate_weights clamps and renormalizes outside points") {
  // Raw barycentric solution (-0.2, 0.6, 0.6) must become (0, 0.5, 0.5).
  RowVector r(2);
  r << 0.6, 0.6;
  const Vector pi = estimate_weights(r, canonical_triangle());
  REQUIRE(pi(0) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(pi(1) == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(pi(2) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("estimate_weights maps vertices to unit vectors") {
  const Matrix v = canonical_triangle();
  for (Index j = 0; j < 3; ++j) {
    const Vector pi = estimate_weights(v.row(j), v);
    for (Index c = 0; c < 3; ++c) {
      REQUIRE(pi(c) == Catch::Approx(c == j ? 1.0 : 0.0).margin(1e-12));
    }
  }
}

TEST_CASE("estimate_weights round-trips random convex combinations") {
  SplitMix64 gen(606);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix v(4, 3);
    for (Index j = 0; j < 4; ++j) {
      for (Index c = 0; c < 3; ++c) v(j, c) = 2.0 * gen.uniform() - 1.0;
    }
    Vector truth(4);
    double total = 0.0;
    for (Index j = 0; j < 4; ++j) {
      truth(j) = gen.uniform();
      total += truth(j);
    }
    truth /= total;
    const RowVector r = truth.transpose() * v;
    const Vector pi = estimate_weights(r, v);
    REQUIRE((pi - truth).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("estimate_weights rejects degenerate vertex systems") {
  Matrix v(3, 2);
  v << 0.0, 0.0, 1.0, 1.0, 2.0, 2.0;  // collinear
  RowVector r(2);
  r << 0.5, 0.5;
  REQUIRE_THROWS_AS(estimate_weights(r, v), NumericalError);
  Matrix bad_shape(3, 3);
  bad_shape.setZero();
  REQUIRE_THROWS_AS(estimate_weights(RowVector::Zero(3), bad_shape),
                    ConfigError);
  REQUIRE_THROWS_AS(estimate_weights(RowVector::Zero(3), canonical_triangle()),
                    ConfigError);
}

TEST_CASE("reconstruct_topics normalizes identity weights") {
  const Matrix pi = Matrix::Identity(3, 3);
  const Vector m = Vector::Ones(3);
  const Vector xi1 = Vector::Ones(3);
  const Matrix a = reconstruct_topics(pi, m, xi1);
  REQUIRE((a - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("reconstruct_topics is invariant to positive rescaling of xi1") {
  SplitMix64 gen(44);
  Matrix pi(5, 2);
  for (Index j = 0; j < 5; ++j) {
    const double w = gen.uniform();
    pi(j, 0) = w;
    pi(j, 1) = 1.0 - w;
  }
  Vector m(5);
  Vector xi1(5);
  for (Index j = 0; j < 5; ++j) {
    m(j) = 0.1 + gen.uniform();
    xi1(j) = 0.1 + gen.uniform();
  }
  const Matrix base = reconstruct_topics(pi, m, xi1);
  const Matrix scaled = reconstruct_topics(pi, m, Vector(3.0 * xi1));
  REQUIRE((base - scaled).cwiseAbs().maxCoeff() <= 1e-14);
  for (Index c = 0; c < 2; ++c) {
    REQUIRE(base.col(c).sum() == Catch::Approx(1.0).margin(1e-12));
  }
  REQUIRE(base.minCoeff() >= 0.0);
}

TEST_CASE("reconstruct_topics clamps negative contributions to zero") {
  Matrix pi(2, 2);
  pi << 0.7, 0.3, 0.5, 0.5;
  Vector m = Vector::Ones(2);
  Vector xi1(2);
  xi1 << 1.0, -1.0;  // second row contributes negatively, clamps away
  const Matrix a = reconstruct_topics(pi, m, xi1);
  REQUIRE(a(1, 0) == 0.0);
  REQUIRE(a(1, 1) == 0.0);
  REQUIRE(a(0, 0) == Catch::Approx(1.0).margin(1e-15));
  REQUIRE(a(0, 1) == Catch::Approx(1.0).margin(1e-15));
  REQUIRE_THROWS_AS(
      reconstruct_topics(pi, m, Vector(-xi1.cwiseAbs())),  // all negative
      NumericalError);
}

TEST_CASE("reconstruct_topics validates dimensions") {
  REQUIRE_THROWS_AS(
      reconstruct_topics(Matrix::Ones(3, 2), Vector::Ones(2), Vector::Ones(3)),
      ConfigError);
}

TEST_CASE("noiseless ratio rows live inside the anchor simplex") {
  const SynthConfig cfg = exact_config();
  const TopicModel model = generate_model(cfg);
  const Matrix freq = population_frequencies(model);
  const Vector m = normalization_diag(freq);
  const SpectralDecomposition sd = truncated_svd(freq, m, cfg.k, 1);
  const RatioMatrix rm =
      ratio_matrix(sd, std::numeric_limits<double>::infinity());

  const std::vector<bool> anchors = anchor_row_flags(model.a);
  Matrix verts(cfg.k, cfg.k - 1);
  Index filled = 0;
  std::vector<Index> seen_topics;
  for (Index j = 0; j < cfg.p && filled < cfg.k; ++j) {
    if (!anchors[static_cast<std::size_t>(j)]) continue;
    Index topic = 0;
    model.a.row(j).maxCoeff(&topic);
    bool new_topic = true;
    for (Index t : seen_topics) {
      if (t == topic) new_topic = false;
    }
    if (!new_topic) continue;
    seen_topics.push_back(topic);
    verts.row(filled++) = rm.rows.row(j);
  }
  REQUIRE(filled == cfg.k);
  for (Index j = 0; j < cfg.p; ++j) {
    REQUIRE(distance_to_simplex(rm.rows.row(j), verts) <= 1e-8);
  }
}

TEST_CASE("noiseless population frequencies are fit exactly") {
  const SynthConfig cfg = exact_config();
  const TopicModel model = generate_model(cfg);
  const Matrix freq = population_frequencies(model);
  const TopicEstimate est = fit_frequencies(freq, cfg.k, exact_options());
  REQUIRE(!est.vh.fallback_used);
  const LossReport report = l1_loss(est.a_hat, model.a);
  REQUIRE(report.loss <= 1e-6);
}

TEST_CASE("word-row permutations permute the estimate") {
  const SynthConfig cfg = exact_config();
  const TopicModel model = generate_model(cfg);
  const Matrix freq = population_frequencies(model);
  const TopicEstimate base = fit_frequencies(freq, cfg.k, exact_options());

  Matrix reversed(cfg.p, cfg.n);
  for (Index j = 0; j < cfg.p; ++j) {
    reversed.row(j) = freq.row(cfg.p - 1 - j);
  }
  const TopicEstimate perm = fit_frequencies(reversed, cfg.k, exact_options());

  Matrix expected(cfg.p, cfg.k);
  for (Index j = 0; j < cfg.p; ++j) {
    expected.row(j) = base.a_hat.row(cfg.p - 1 - j);
  }
  // Topic order may differ, so compare through the permutation-minimized
  // loss; both estimates are exact, so the gap is roundoff only.
  REQUIRE(l1_loss(perm.a_hat, expected).loss <= 1e-8);
}

TEST_CASE("duplicating every document does not move the estimate") {
  const SynthConfig cfg = exact_config();
  const TopicModel model = generate_model(cfg);
  const Matrix freq = population_frequencies(model);
  Matrix doubled(cfg.p, 2 * cfg.n);
  doubled << freq, freq;

  const TopicEstimate base = fit_frequencies(freq, cfg.k, exact_options());
  const TopicEstimate dup = fit_frequencies(doubled, cfg.k, exact_options());
  REQUIRE(l1_loss(dup.a_hat, base.a_hat).loss <= 1e-9);
}

TEST_CASE("sparse and dense fits agree bitwise") {
  const SynthConfig cfg = exact_config();
  const Matrix freq = population_frequencies(generate_model(cfg));
  const SparseMatrix sparse = freq.sparseView();
  const TopicEstimate a = fit_frequencies(freq, cfg.k, exact_options());
  const TopicEstimate b = fit_frequencies(sparse, cfg.k, exact_options());
  REQUIRE((a.a_hat - b.a_hat).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((a.pi_hat - b.pi_hat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fits are bitwise deterministic") {
  const Matrix freq = random_stochastic(30, 25, 12);
  FitOptions opts;
  opts.seed = 9;
  const TopicEstimate a = fit_frequencies(freq, 3, opts);
  const TopicEstimate b = fit_frequencies(freq, 3, opts);
  REQUIRE((a.a_hat - b.a_hat).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((a.pi_hat - b.pi_hat).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((a.spectral.singular_values - b.spectral.singular_values)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  REQUIRE(a.vh.selected_indices == b.vh.selected_indices);
}

TEST_CASE("estimates are stochastic matrices on noisy data") {
  SynthConfig cfg;
  cfg.p = 60;
  cfg.n = 80;
  cfg.k = 3;
  cfg.m_p = 3;
  cfg.delta_p = 0.01;
  cfg.m_n = 5;
  cfg.big_n = 300;
  cfg.seed = 2026;
  const TopicModel model = generate_model(cfg);
  const DocTermMatrix corpus = sample_corpus(model, cfg.big_n, 515);
  FitOptions opts;
  opts.seed = 3;
  const TopicEstimate est = fit(corpus, cfg.k, opts);

  REQUIRE(est.a_hat.rows() == 60);
  REQUIRE(est.a_hat.cols() == 3);
  REQUIRE(est.a_hat.minCoeff() >= 0.0);
  for (Index c = 0; c < 3; ++c) {
    REQUIRE(est.a_hat.col(c).sum() == Catch::Approx(1.0).margin(1e-9));
  }
  std::vector<bool> is_zero(60, false);
  for (Index j : est.zero_rows) is_zero[static_cast<std::size_t>(j)] = true;
  for (Index j = 0; j < 60; ++j) {
    if (is_zero[static_cast<std::size_t>(j)]) continue;
    REQUIRE(est.pi_hat.row(j).sum() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(est.pi_hat.row(j).minCoeff() >= 0.0);
  }
  REQUIRE(est.vh.vertices.rows() == 3);
  REQUIRE(est.vh.vertices.cols() == 2);
}

TEST_CASE("single-topic fits return the normalized word masses") {
  const Matrix freq = random_stochastic(12, 9, 77);
  const TopicEstimate est = fit_frequencies(freq, 1);
  const Vector m = normalization_diag(freq);
  const Vector expect = m / m.sum();
  REQUIRE((est.a_hat.col(0) - expect).cwiseAbs().maxCoeff() <= 1e-14);
  REQUIRE((est.pi_hat - Matrix::Ones(12, 1)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(est.vh.vertices.rows() == 1);
  REQUIRE(est.vh.vertices.cols() == 0);
  REQUIRE(est.a_hat.col(0).sum() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("all-zero word rows come back as zero estimate rows") {
  Matrix freq = random_stochastic(8, 10, 5);
  freq.row(5).setZero();
  for (Index i = 0; i < 10; ++i) freq.col(i) /= freq.col(i).sum();
  const TopicEstimate est = fit_frequencies(freq, 2);
  REQUIRE(est.zero_rows == std::vector<Index>{5});
  REQUIRE(est.a_hat.row(5).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(est.pi_hat.row(5).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(est.spectral.left_vectors.rows() == 7);
  for (Index c = 0; c < 2; ++c) {
    REQUIRE(est.a_hat.col(c).sum() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("the count-matrix front end matches fit_frequencies") {
  SynthConfig cfg;
  cfg.p = 30;
  cfg.n = 20;
  cfg.k = 2;
  cfg.m_p = 2;
  cfg.delta_p = 0.01;
  cfg.m_n = 2;
  cfg.seed = 8;
  const TopicModel model = generate_model(cfg);
  const DocTermMatrix corpus = sample_corpus(model, std::int64_t{500}, 99);
  FitOptions opts;
  opts.seed = 21;
  const TopicEstimate via_counts = fit(corpus, 2, opts);
  const TopicEstimate via_freq = fit_frequencies(frequencies(corpus), 2, opts);
  REQUIRE((via_counts.a_hat - via_freq.a_hat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit validates its arguments") {
  const Matrix freq = random_stochastic(6, 5, 2);
  REQUIRE_THROWS_AS(fit_frequencies(freq, 0), ConfigError);
  REQUIRE_THROWS_AS(fit_frequencies(freq, 6), ConfigError);  // > min(p, n)
  FitOptions bad_t;
  bad_t.t = 0.0;
  REQUIRE_THROWS_AS(fit_frequencies(freq, 2, bad_t), ConfigError);
}
