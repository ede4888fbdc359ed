#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specmt/corpus_store.hpp"
#include "specmt/error_scoring.hpp"
#include "specmt/fixed_point.hpp"
#include "specmt/rank_stats.hpp"

namespace specmt::report {

struct MetricScore {
  std::string doc_id;
  std::string method_id;
  std::string metric;
  double score = 0.0;

  friend bool operator==(const MetricScore&, const MetricScore&) = default;
};

struct MetricBounds {
  double low = 0.0;
  double high = 1.0;
};

/// `doc<TAB>method<TAB>metric<TAB>score` lines. With a corpus, unknown docs
/// and methods are rejected. Repeated (doc, method, metric) keys and scores
/// outside the bounds are errors.
std::vector<MetricScore> parse_metric_scores(std::string_view content, const corpus::Corpus* corpus = nullptr,
                                             MetricBounds bounds = {});

struct MetricSummary {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd_population;  // divisor n, needs n ≥ 2
  std::optional<double> sd_sample;      // divisor n − 1, needs n ≥ 2
};

/// Scores of one method, optionally restricted to one metric.
MetricSummary summarize_metric(std::span<const MetricScore> scores, std::string_view method_id,
                               std::optional<std::string_view> metric = std::nullopt);

struct SyntaxRow {
  std::string method_id;
  std::size_t word_count = 0;
  std::size_t clausal_and = 0;
  std::size_t relative_pronouns = 0;
  // Externally reported frequencies to check against, if any.
  std::optional<Centi> and_reference;
  std::optional<Centi> relp_reference;
};

/// `method<TAB>words<TAB>clausal_and<TAB>relp[<TAB>and_ref<TAB>relp_ref]`.
std::vector<SyntaxRow> parse_syntax_counts(std::string_view content);

/// Profiles every variant of every method in the corpus and sums per method.
std::vector<SyntaxRow> syntax_rows_from_corpus(const corpus::Corpus& corpus);

struct Provenance {
  std::string spec_fingerprint;
  std::string corpus_hash;
  std::string software_version;
};

struct ReportInputs {
  std::vector<std::string> method_order;  // table row order; other methods follow sorted
  std::optional<std::vector<scoring::DocScore>> error_scores;
  std::optional<std::vector<ranks::RankingRecord>> rankings;
  ranks::WilcoxonOptions wilcoxon;
  std::optional<std::vector<SyntaxRow>> syntax;
  std::optional<std::vector<MetricScore>> metrics;
  Provenance provenance;
};

struct ReportFiles {
  std::vector<std::filesystem::path> written;
  std::vector<std::string> absent_sections;
  std::vector<std::string> flags;  // reference mismatches and consistency failures
};

/// Writes the report directory. Output depends only on `inputs`.
ReportFiles emit_report(const ReportInputs& inputs, const std::filesystem::path& dir);

/// Fixed-precision rendering used in every table.
std::string fixed(double v, int decimals);

}  // namespace specmt::report
