// Command-line front end: fit topics on a corpus file, run synthetic
// Monte Carlo experiments, and check noiseless oracle exactness.
//
// Exit codes: 0 success, 1 check failure, 2 usage/config error, 3 numerical
// failure. Failures print a one-line machine-readable JSON object to stdout.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "topicscore/topicscore.hpp"

namespace ts = topicscore;
using nlohmann::json;

namespace {

constexpr double kOracleTolerance = 1e-6;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

// Accepts a decimal number or the word "inf" (any case mix is not needed;
// the flag help documents the lowercase spelling).
double parse_threshold(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw ts::ConfigError("--t expects a number or 'inf', got '" + text + "'");
  }
  return value;
}

// TOPIC_SCORE_THREADS caps worker threads; 0 or unset means one per core.
int env_threads() {
  const char* raw = std::getenv("TOPIC_SCORE_THREADS");
  if (raw == nullptr || *raw == '\0') return ts::resolve_threads(0);
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 0) {
    throw ts::ConfigError(
        "TOPIC_SCORE_THREADS must be a nonnegative integer");
  }
  return ts::resolve_threads(static_cast<int>(value));
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ts::ConfigError("cannot create output directory: " + dir + " (" +
                          ec.message() + ")");
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ts::ConfigError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw ts::ConfigError("write failed: " + path);
}

json vector_json(const ts::Vector& v) {
  json arr = json::array();
  for (ts::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json matrix_json(const ts::Matrix& m) {
  json rows = json::array();
  for (ts::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (ts::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Threshold echoed as a string so t = inf survives JSON, which has no
// infinity literal.
std::string threshold_string(double t) {
  return std::isinf(t) ? std::string("inf") : ts::format_double(t);
}

struct FitFlags {
  std::string corpus;
  std::string format = "uci";
  std::string vocab;
  std::string stopwords;
  ts::Index keep_top_words = -1;  // -1 means keep everything
  double drop_short_frac = 0.0;
  ts::Index k = 0;
  std::string t = "inf";
  ts::Index l = 0;  // 0 means the fit default min(10k, words)
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iter = 300;
  std::string out;
};

struct SynthFlags {
  ts::SynthConfig cfg;
  std::string variant = "basic";
  int reps = 0;
  std::string t = "inf";
  ts::Index l = 0;
  int restarts = 10;
  int max_iter = 300;
  std::string out;
};

void add_fit_option_flags(CLI::App* cmd, std::string& t, ts::Index& l,
                          int& restarts, int& max_iter) {
  cmd->add_option("--t", t, "Ratio clamp threshold, a number or 'inf'");
  cmd->add_option("--l", l,
                  "Cluster count for vertex hunting; 0 picks min(10k, words)");
  cmd->add_option("--restarts", restarts, "k-means restarts");
  cmd->add_option("--max-iter", max_iter, "k-means iteration cap");
}

void add_synth_config_flags(CLI::App* cmd, SynthFlags& f) {
  cmd->add_option("--p", f.cfg.p, "Vocabulary size");
  cmd->add_option("--n", f.cfg.n, "Number of documents");
  cmd->add_option("--big-n", f.cfg.big_n, "Words per document");
  cmd->add_option("--k", f.cfg.k, "Number of topics");
  cmd->add_option("--m-p", f.cfg.m_p, "Anchor words per topic");
  cmd->add_option("--delta-p", f.cfg.delta_p, "Anchor row mass");
  cmd->add_option("--m-n", f.cfg.m_n, "Pure documents per topic");
  cmd->add_option("--variant", f.variant,
                  "Generator variant: basic, zipf, two_scale, "
                  "near_anchor_homog, near_anchor_zipf");
  cmd->add_option("--p-s", f.cfg.p_s, "Zipf stop-word offset");
  cmd->add_option("--p-d", f.cfg.p_d, "Near-anchor contamination in [0, 1]");
  cmd->add_option("--h-max", f.cfg.h_max, "Upper scale of the two-scale bulk");
  cmd->add_option("--seed", f.cfg.seed, "Base random seed");
}

ts::FitOptions make_fit_options(const std::string& t, ts::Index l,
                                std::uint64_t seed, int restarts,
                                int max_iter) {
  ts::FitOptions opts;
  opts.t = parse_threshold(t);
  opts.l = l;
  opts.seed = seed;
  opts.kmeans.restarts = restarts;
  opts.kmeans.max_iter = max_iter;
  return opts;
}

json fit_config_json(const ts::FitOptions& opts) {
  return json{{"t", threshold_string(opts.t)},
              {"l", opts.l},
              {"restarts", opts.kmeans.restarts},
              {"max_iter", opts.kmeans.max_iter}};
}

json synth_config_json(const ts::SynthConfig& cfg) {
  return json{{"p", cfg.p},
              {"n", cfg.n},
              {"big_n", cfg.big_n},
              {"k", cfg.k},
              {"m_p", cfg.m_p},
              {"delta_p", cfg.delta_p},
              {"m_n", cfg.m_n},
              {"variant", ts::to_string(cfg.variant)},
              {"p_s", cfg.p_s},
              {"p_d", cfg.p_d},
              {"h_max", cfg.h_max},
              {"seed", cfg.seed}};
}

int fail_invalid_k() {
  std::cout << R"({"error":"invalid_k"})" << "\n";
  return 2;
}

int run_fit(const FitFlags& f) {
  if (f.k < 1) return fail_invalid_k();
  ensure_directory(f.out);
  const auto t_total = std::chrono::steady_clock::now();

  const auto t_load = std::chrono::steady_clock::now();
  const ts::BagFormat format =
      f.format == "uci" ? ts::BagFormat::kUci : ts::BagFormat::kTripletCsv;
  ts::DocTermMatrix d = ts::load_bag_of_words(f.corpus, format);
  if (!f.vocab.empty()) {
    d.vocab = ts::read_word_list(f.vocab);
    if (static_cast<ts::Index>(d.vocab.size()) != d.counts.rows()) {
      throw ts::ConfigError("--vocab lists " +
                            std::to_string(d.vocab.size()) + " words but the corpus has " +
                            std::to_string(d.counts.rows()));
    }
  }
  const double load_ms = elapsed_ms(t_load);

  const auto t_pre = std::chrono::steady_clock::now();
  std::unordered_set<std::string> stopwords;
  if (!f.stopwords.empty()) {
    for (const std::string& w : ts::read_word_list(f.stopwords)) {
      stopwords.insert(w);
    }
  }
  std::optional<ts::Index> keep_top;
  if (f.keep_top_words >= 0) keep_top = f.keep_top_words;
  const auto [kept, report] =
      ts::preprocess(d, stopwords, keep_top, f.drop_short_frac);
  const double pre_ms = elapsed_ms(t_pre);

  const ts::FitOptions opts =
      make_fit_options(f.t, f.l, f.seed, f.restarts, f.max_iter);
  const auto t_fit = std::chrono::steady_clock::now();
  const ts::TopicEstimate est = ts::fit(kept, f.k, opts);
  const double fit_ms = elapsed_ms(t_fit);

  ts::write_matrix_csv(f.out + "/A_hat.csv", est.a_hat);
  ts::write_matrix_csv(f.out + "/pi_hat.csv", est.pi_hat);

  json removed_words = json::array();
  for (const auto& [index, reason] : report.removed_words) {
    removed_words.push_back(
        json{{"index", index}, {"reason", ts::to_string(reason)}});
  }
  json removed_docs = json::array();
  for (const auto& [index, reason] : report.removed_docs) {
    removed_docs.push_back(
        json{{"index", index}, {"reason", ts::to_string(reason)}});
  }
  write_json_file(f.out + "/preprocess_report.json",
                  json{{"removed_words", removed_words},
                       {"removed_docs", removed_docs},
                       {"row_index_map", report.row_index_map},
                       {"words_kept", kept.counts.rows()},
                       {"docs_kept", kept.counts.cols()}});

  json config = fit_config_json(opts);
  config["k"] = f.k;
  config["seed"] = f.seed;
  config["corpus"] = f.corpus;
  config["format"] = f.format;
  write_json_file(
      f.out + "/diagnostics.json",
      json{{"config", config},
           {"singular_values", vector_json(est.spectral.singular_values)},
           {"vertices", matrix_json(est.vh.vertices)},
           {"vh_selected_indices", est.vh.selected_indices},
           {"vh_max_residual", est.vh.max_residual},
           {"vh_fallback_used", est.vh.fallback_used},
           {"zero_rows", est.zero_rows},
           {"timing_ms", json{{"load", load_ms},
                              {"preprocess", pre_ms},
                              {"fit", fit_ms},
                              {"total", elapsed_ms(t_total)}}}});

  std::cout << json{{"status", "ok"},
                    {"out", f.out},
                    {"words", kept.counts.rows()},
                    {"docs", kept.counts.cols()}}
                   .dump()
            << "\n";
  return 0;
}

int run_synth(SynthFlags& f) {
  f.cfg.variant = ts::variant_from_string(f.variant);
  if (f.cfg.k < 1) return fail_invalid_k();
  if (f.reps < 1) {
    std::cout << R"({"error":"invalid_reps"})" << "\n";
    return 2;
  }
  ensure_directory(f.out);
  const ts::FitOptions opts =
      make_fit_options(f.t, f.l, 0, f.restarts, f.max_iter);
  const ts::McResult mc =
      ts::run_monte_carlo(f.cfg, f.reps, opts, env_threads());

  {
    std::ofstream out(f.out + "/results.csv", std::ios::binary);
    if (!out) {
      throw ts::ConfigError("cannot open for writing: " + f.out +
                            "/results.csv");
    }
    out << "rep,loss,wall_time_ms\n";
    for (const ts::McRow& row : mc.rows) {
      out << row.rep << ',' << ts::format_double(row.loss) << ','
          << ts::format_double(row.wall_ms) << '\n';
    }
    if (!out) throw ts::ConfigError("write failed: " + f.out + "/results.csv");
  }

  json config = synth_config_json(f.cfg);
  config["reps"] = f.reps;
  config["fit"] = fit_config_json(opts);
  write_json_file(f.out + "/summary.json",
                  json{{"mean_loss", mc.mean_loss},
                       {"stderr", mc.stderr_loss},
                       {"config", config}});

  std::cout << json{{"status", "ok"},
                    {"mean_loss", mc.mean_loss},
                    {"stderr", mc.stderr_loss}}
                   .dump()
            << "\n";
  return 0;
}

int run_oracle_check(SynthFlags& f) {
  f.cfg.variant = ts::variant_from_string(f.variant);
  if (f.cfg.k < 1) return fail_invalid_k();
  ensure_directory(f.out);

  const ts::TopicModel model = ts::generate_model(f.cfg);
  const ts::Matrix d0 = ts::population_frequencies(model);
  const ts::FitOptions opts =
      make_fit_options(f.t, f.l, f.cfg.seed, f.restarts, f.max_iter);
  const auto t_fit = std::chrono::steady_clock::now();
  const ts::TopicEstimate est = ts::fit_frequencies(d0, f.cfg.k, opts);
  const double fit_ms = elapsed_ms(t_fit);
  const ts::LossReport loss = ts::l1_loss(est.a_hat, model.a);

  // Point cloud of eigen-ratio rows in original row order; rows of zero mass
  // stay at the origin. The trailing column flags true anchor words.
  const ts::Index p = f.cfg.p;
  const ts::Index k = f.cfg.k;
  ts::Matrix cloud = ts::Matrix::Zero(p, k);
  if (k >= 2) {
    const ts::RatioMatrix rm = ts::ratio_matrix(est.spectral, opts.t);
    auto next_zero = est.zero_rows.begin();
    ts::Index r = 0;
    for (ts::Index j = 0; j < p; ++j) {
      if (next_zero != est.zero_rows.end() && *next_zero == j) {
        ++next_zero;
        continue;
      }
      cloud.row(j).head(k - 1) = rm.rows.row(r++);
    }
  }
  const std::vector<bool> anchors = ts::anchor_row_flags(model.a);
  for (ts::Index j = 0; j < p; ++j) {
    cloud(j, k - 1) = anchors[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
  }
  ts::write_matrix_csv(f.out + "/pointcloud.csv", cloud);
  ts::write_matrix_csv(f.out + "/vertices.csv", est.vh.vertices);

  const bool passed = loss.loss <= kOracleTolerance;
  json config = synth_config_json(f.cfg);
  config["fit"] = fit_config_json(opts);
  write_json_file(f.out + "/oracle.json",
                  json{{"loss", loss.loss},
                       {"per_topic", vector_json(loss.per_topic)},
                       {"permutation", loss.permutation},
                       {"vh_max_residual", est.vh.max_residual},
                       {"threshold", kOracleTolerance},
                       {"passed", passed},
                       {"fit_ms", fit_ms},
                       {"config", config}});

  std::cout << json{{"loss", loss.loss},
                    {"passed", passed},
                    {"threshold", kOracleTolerance}}
                   .dump()
            << "\n";
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral topic estimation via singular-vector ratios"};
  app.require_subcommand(1);

  FitFlags fit_flags;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Estimate topics from a bag-of-words corpus");
  fit_cmd->add_option("--corpus", fit_flags.corpus, "Corpus file")->required();
  fit_cmd->add_option("--format", fit_flags.format, "Corpus format: uci|csv")
      ->check(CLI::IsMember({"uci", "csv"}));
  fit_cmd->add_option("--vocab", fit_flags.vocab,
                      "Vocabulary file, one word per line");
  fit_cmd->add_option("--stopwords", fit_flags.stopwords,
                      "Stop-word file, one word per line");
  fit_cmd->add_option("--keep-top-words", fit_flags.keep_top_words,
                      "Keep only this many highest-frequency words");
  fit_cmd->add_option("--drop-short-frac", fit_flags.drop_short_frac,
                      "Drop this fraction of shortest documents, in [0, 1)");
  fit_cmd->add_option("--k", fit_flags.k, "Number of topics")->required();
  fit_cmd->add_option("--seed", fit_flags.seed, "Random seed");
  fit_cmd->add_option("--out", fit_flags.out, "Output directory")->required();
  add_fit_option_flags(fit_cmd, fit_flags.t, fit_flags.l, fit_flags.restarts,
                       fit_flags.max_iter);

  SynthFlags synth_flags;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Monte Carlo loss benchmark on synthetic corpora");
  add_synth_config_flags(synth_cmd, synth_flags);
  synth_cmd->add_option("--reps", synth_flags.reps, "Number of replicates")
      ->required();
  synth_cmd->add_option("--out", synth_flags.out, "Output directory")
      ->required();
  add_fit_option_flags(synth_cmd, synth_flags.t, synth_flags.l,
                       synth_flags.restarts, synth_flags.max_iter);

  SynthFlags oracle_flags;
  CLI::App* oracle_cmd = app.add_subcommand(
      "oracle-check", "Fit the exact population frequencies and verify the "
                      "reconstruction is exact");
  add_synth_config_flags(oracle_cmd, oracle_flags);
  oracle_cmd->add_option("--out", oracle_flags.out, "Output directory")
      ->required();
  add_fit_option_flags(oracle_cmd, oracle_flags.t, oracle_flags.l,
                       oracle_flags.restarts, oracle_flags.max_iter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cout << json{{"error", "usage"}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_flags);
    if (synth_cmd->parsed()) return run_synth(synth_flags);
    return run_oracle_check(oracle_flags);
  } catch (const ts::ConfigError& e) {
    std::cout << json{{"error", "config"}, {"message", e.what()}}.dump()
              << "\n";
    return 2;
  } catch (const ts::NumericalError& e) {
    std::cout << json{{"error", "numerical"}, {"message", e.what()}}.dump()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cout << json{{"error", "internal"}, {"message", e.what()}}.dump()
              << "\n";
    return 3;
  }
}
