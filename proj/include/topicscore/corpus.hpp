#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "topicscore/types.hpp"

namespace topicscore {

/**
 * @brief Sparse document-term count matrix, words on rows and documents on
 * columns.
 *
 * doc_lengths always mirrors the column sums. Zero-length documents may
 * exist right after loading; preprocess() removes them and frequencies()
 * rejects them.
 */
struct DocTermMatrix {
  SparseMatrix counts;                    // p x n, nonnegative integers
  std::vector<std::int64_t> doc_lengths;  // n column sums
  std::vector<std::string> vocab;         // p words, or empty
};

enum class WordRemovalReason { kStopword, kLowFrequency, kZeroCount };
enum class DocRemovalReason { kShort };

/// Audit trail of preprocess(), in original (0-based) indices.
struct PreprocessReport {
  std::vector<std::pair<Index, WordRemovalReason>> removed_words;
  std::vector<std::pair<Index, DocRemovalReason>> removed_docs;
  std::vector<Index> row_index_map;  // surviving row -> original row
};

enum class BagFormat { kUci, kTripletCsv };

inline const char* to_string(WordRemovalReason r) {
  switch (r) {
    case WordRemovalReason::kStopword: return "stopword";
    case WordRemovalReason::kLowFrequency: return "low-frequency";
    case WordRemovalReason::kZeroCount: return "zero-count";
  }
  return "unknown";
}

inline const char* to_string(DocRemovalReason) { return "short"; }

namespace detail {

inline std::int64_t parse_count_field(const std::string& field,
                                      const std::string& path, Index line_no,
                                      const char* what) {
  if (field.empty()) {
    throw ConfigError(path + ":" + std::to_string(line_no) + ": missing " +
                      what);
  }
  char* end = nullptr;
  const long long v = std::strtoll(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0') {
    throw ConfigError(path + ":" + std::to_string(line_no) + ": " + what +
                      " is not an integer: '" + field + "'");
  }
  return static_cast<std::int64_t>(v);
}

inline std::vector<std::string> split_fields(const std::string& line,
                                             char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  if (sep == ' ') {  // collapse runs of whitespace
    std::vector<std::string> packed;
    for (auto& f : fields) {
      if (!f.empty()) packed.push_back(std::move(f));
    }
    return packed;
  }
  return fields;
}

inline DocTermMatrix assemble(Index p, Index n,
                              std::vector<Eigen::Triplet<double>> trips) {
  if (p < 1 || n < 1 || trips.empty()) {
    throw ConfigError("empty corpus");
  }
  DocTermMatrix d;
  d.counts.resize(p, n);
  d.counts.setFromTriplets(trips.begin(), trips.end());  // sums duplicates
  d.doc_lengths.assign(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    double len = 0.0;
    for (SparseMatrix::InnerIterator it(d.counts, i); it; ++it) {
      len += it.value();
    }
    d.doc_lengths[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(len);
  }
  return d;
}

}  // namespace detail

/**
 * @brief Loads a document-term matrix from disk.
 *
 * The UCI layout has three integer header lines (number of documents, number
 * of words, nominal entry count) followed by "docID wordID count" lines with
 * 1-based indices. The header entry count is treated as advisory and parsing
 * continues to end of file, since published corpora are not always
 * consistent. Triplet CSV carries a "doc,word,count" header line instead and
 * infers dimensions from the largest indices seen. Duplicate (doc, word)
 * pairs are summed in both formats.
 */
inline DocTermMatrix load_bag_of_words(const std::string& path,
                                       BagFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);

  std::string line;
  Index line_no = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++line_no;
      if (!out.empty() && out.back() == '\r') out.pop_back();
      bool blank = true;
      for (char c : out) {
        if (c != ' ' && c != '\t') blank = false;
      }
      if (!blank) return true;
    }
    return false;
  };

  Index n = 0;
  Index p = 0;
  bool dims_known = false;
  char sep = ' ';
  if (format == BagFormat::kUci) {
    std::string h0, h1, h2;
    if (!next_line(h0)) throw ConfigError(path + ": missing UCI header");
    n = static_cast<Index>(
        detail::parse_count_field(detail::split_fields(h0, ' ').at(0), path,
                                  line_no, "document count"));
    if (!next_line(h1)) throw ConfigError(path + ": missing UCI header");
    p = static_cast<Index>(
        detail::parse_count_field(detail::split_fields(h1, ' ').at(0), path,
                                  line_no, "word count"));
    if (!next_line(h2)) throw ConfigError(path + ": missing UCI header");
    detail::parse_count_field(detail::split_fields(h2, ' ').at(0), path,
                              line_no, "entry count");
    if (n < 1 || p < 1) throw ConfigError("empty corpus");
    dims_known = true;
  } else {
    if (!next_line(line)) throw ConfigError(path + ": missing CSV header");
    std::string header = line;
    header.erase(std::remove(header.begin(), header.end(), ' '),
                 header.end());
    if (header != "doc,word,count") {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected header 'doc,word,count'");
    }
    sep = ',';
  }

  std::vector<Eigen::Triplet<double>> trips;
  Index max_doc = 0;
  Index max_word = 0;
  while (next_line(line)) {
    const auto fields = detail::split_fields(line, sep);
    if (fields.size() != 3) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": expected 3 fields, got " +
                        std::to_string(fields.size()));
    }
    const auto doc =
        detail::parse_count_field(fields[0], path, line_no, "document id");
    const auto word =
        detail::parse_count_field(fields[1], path, line_no, "word id");
    const auto count =
        detail::parse_count_field(fields[2], path, line_no, "count");
    if (doc < 1 || (dims_known && doc > n)) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": document id out of range: " + std::to_string(doc));
    }
    if (word < 1 || (dims_known && word > p)) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": word id out of range: " + std::to_string(word));
    }
    if (count < 0) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": negative count");
    }
    max_doc = std::max(max_doc, static_cast<Index>(doc));
    max_word = std::max(max_word, static_cast<Index>(word));
    if (count > 0) {
      trips.emplace_back(static_cast<Index>(word - 1),
                         static_cast<Index>(doc - 1),
                         static_cast<double>(count));
    }
  }
  if (!dims_known) {
    n = max_doc;
    p = max_word;
  }
  return detail::assemble(p, n, std::move(trips));
}

/**
 * @brief Column-normalizes counts into word frequencies.
 *
 * Every returned column sums to 1 up to roundoff. Zero-length documents are
 * an error; run preprocess() first to drop them.
 */
inline SparseMatrix frequencies(const DocTermMatrix& d) {
  const Index n = d.counts.cols();
  for (Index i = 0; i < n; ++i) {
    if (d.doc_lengths[static_cast<std::size_t>(i)] <= 0) {
      throw ConfigError("document " + std::to_string(i + 1) +
                        " has zero length");
    }
  }
  SparseMatrix f = d.counts;
  for (Index i = 0; i < n; ++i) {
    const double len =
        static_cast<double>(d.doc_lengths[static_cast<std::size_t>(i)]);
    for (SparseMatrix::InnerIterator it(f, i); it; ++it) {
      it.valueRef() /= len;
    }
  }
  return f;
}

/**
 * @brief Cleans a corpus in four ordered passes: stop words out, only the
 * keep_top_words highest-total-count words kept, the floor(fraction*n)
 * shortest documents dropped, then any rows left with zero count dropped.
 *
 * Documents whose length falls to zero after word removal are always
 * dropped, whatever the fraction. Rankings break ties toward the lower
 * original index. The report records every removal with its reason against
 * original indices.
 */
inline std::pair<DocTermMatrix, PreprocessReport> preprocess(
    const DocTermMatrix& d, const std::unordered_set<std::string>& stopwords,
    std::optional<Index> keep_top_words, double drop_short_docs_fraction) {
  const Index p = d.counts.rows();
  const Index n = d.counts.cols();
  if (!(drop_short_docs_fraction >= 0.0 && drop_short_docs_fraction < 1.0)) {
    throw ConfigError("drop_short_docs_fraction must lie in [0, 1)");
  }
  if (keep_top_words && *keep_top_words < 1) {
    throw ConfigError("keep_top_words must be at least 1");
  }

  std::vector<bool> word_alive(static_cast<std::size_t>(p), true);
  std::vector<bool> doc_alive(static_cast<std::size_t>(n), true);
  PreprocessReport report;

  // Pass 1: stop words (needs a vocabulary to match against).
  if (!stopwords.empty()) {
    if (d.vocab.size() != static_cast<std::size_t>(p)) {
      throw ConfigError("stop-word removal requires a vocabulary");
    }
    for (Index j = 0; j < p; ++j) {
      if (stopwords.count(d.vocab[static_cast<std::size_t>(j)]) > 0) {
        word_alive[static_cast<std::size_t>(j)] = false;
        report.removed_words.emplace_back(j, WordRemovalReason::kStopword);
      }
    }
  }

  // Pass 2: keep only the highest-total-count words.
  if (keep_top_words) {
    std::vector<double> totals(static_cast<std::size_t>(p), 0.0);
    for (Index i = 0; i < n; ++i) {
      for (SparseMatrix::InnerIterator it(d.counts, i); it; ++it) {
        totals[static_cast<std::size_t>(it.row())] += it.value();
      }
    }
    std::vector<Index> order;
    for (Index j = 0; j < p; ++j) {
      if (word_alive[static_cast<std::size_t>(j)]) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return totals[static_cast<std::size_t>(a)] >
             totals[static_cast<std::size_t>(b)];
    });
    for (std::size_t r = static_cast<std::size_t>(*keep_top_words);
         r < order.size(); ++r) {
      word_alive[static_cast<std::size_t>(order[r])] = false;
      report.removed_words.emplace_back(order[r],
                                        WordRemovalReason::kLowFrequency);
    }
  }

  // Pass 3: drop the shortest documents, lengths recomputed over surviving
  // words. Zero-length documents go first and always go.
  std::vector<std::int64_t> lengths(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(d.counts, i); it; ++it) {
      if (word_alive[static_cast<std::size_t>(it.row())]) {
        lengths[static_cast<std::size_t>(i)] +=
            static_cast<std::int64_t>(it.value());
      }
    }
  }
  const auto n_drop = static_cast<Index>(drop_short_docs_fraction *
                                         static_cast<double>(n));
  std::vector<Index> doc_order(static_cast<std::size_t>(n));
  std::iota(doc_order.begin(), doc_order.end(), Index{0});
  std::stable_sort(doc_order.begin(), doc_order.end(), [&](Index a, Index b) {
    return lengths[static_cast<std::size_t>(a)] <
           lengths[static_cast<std::size_t>(b)];
  });
  for (Index r = 0; r < n; ++r) {
    const Index i = doc_order[static_cast<std::size_t>(r)];
    if (r < n_drop || lengths[static_cast<std::size_t>(i)] == 0) {
      doc_alive[static_cast<std::size_t>(i)] = false;
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (!doc_alive[static_cast<std::size_t>(i)]) {
      report.removed_docs.emplace_back(i, DocRemovalReason::kShort);
    }
  }

  // Pass 4: rows with zero count across the surviving documents.
  std::vector<double> alive_totals(static_cast<std::size_t>(p), 0.0);
  for (Index i = 0; i < n; ++i) {
    if (!doc_alive[static_cast<std::size_t>(i)]) continue;
    for (SparseMatrix::InnerIterator it(d.counts, i); it; ++it) {
      alive_totals[static_cast<std::size_t>(it.row())] += it.value();
    }
  }
  for (Index j = 0; j < p; ++j) {
    if (word_alive[static_cast<std::size_t>(j)] &&
        alive_totals[static_cast<std::size_t>(j)] == 0.0) {
      word_alive[static_cast<std::size_t>(j)] = false;
      report.removed_words.emplace_back(j, WordRemovalReason::kZeroCount);
    }
  }

  // Assemble the surviving submatrix.
  std::vector<Index> new_row(static_cast<std::size_t>(p), -1);
  for (Index j = 0; j < p; ++j) {
    if (word_alive[static_cast<std::size_t>(j)]) {
      new_row[static_cast<std::size_t>(j)] =
          static_cast<Index>(report.row_index_map.size());
      report.row_index_map.push_back(j);
    }
  }
  std::vector<Index> kept_docs;
  for (Index i = 0; i < n; ++i) {
    if (doc_alive[static_cast<std::size_t>(i)]) kept_docs.push_back(i);
  }
  if (report.row_index_map.empty() || kept_docs.empty()) {
    throw ConfigError("preprocessing removed the entire corpus");
  }

  DocTermMatrix out;
  out.counts.resize(static_cast<Index>(report.row_index_map.size()),
                    static_cast<Index>(kept_docs.size()));
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t ci = 0; ci < kept_docs.size(); ++ci) {
    for (SparseMatrix::InnerIterator it(d.counts, kept_docs[ci]); it; ++it) {
      const Index nr = new_row[static_cast<std::size_t>(it.row())];
      if (nr >= 0 && it.value() != 0.0) {
        trips.emplace_back(nr, static_cast<Index>(ci), it.value());
      }
    }
  }
  out.counts.setFromTriplets(trips.begin(), trips.end());
  out.doc_lengths.reserve(kept_docs.size());
  for (Index i : kept_docs) {
    out.doc_lengths.push_back(lengths[static_cast<std::size_t>(i)]);
  }
  if (!d.vocab.empty()) {
    out.vocab.reserve(report.row_index_map.size());
    for (Index j : report.row_index_map) {
      out.vocab.push_back(d.vocab[static_cast<std::size_t>(j)]);
    }
  }
  std::sort(report.removed_words.begin(), report.removed_words.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return {std::move(out), std::move(report)};
}

}  // namespace topicscore
