#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "specmt/fixed_point.hpp"

namespace specmt::scoring {

struct ErrorCategory {
  std::string name;
  std::vector<std::string> subtypes;
};

/// Registered categories. Lookups ignore case, spaces and underscores, so
/// "Linguistic Conventions" resolves to LinguisticConventions.
class Typology {
 public:
  void add(ErrorCategory category);
  const std::vector<ErrorCategory>& categories() const { return categories_; }

  /// Canonical category name, or nullptr.
  const ErrorCategory* find(std::string_view name) const;
  bool has_subtype(const ErrorCategory& category, std::string_view subtype) const;

 private:
  std::vector<ErrorCategory> categories_;
};

/// Accuracy, LinguisticConventions and Style with their subtypes.
const Typology& default_typology();

enum class Severity { neutral, minor, major, critical };

constexpr std::int64_t severity_score(Severity s) {
  switch (s) {
    case Severity::neutral: return 0;
    case Severity::minor: return 1;
    case Severity::major: return 10;
    case Severity::critical: return 100;
  }
  return 0;
}

std::string_view to_string(Severity s);
/// Case-insensitive name. Throws Error(Errc::parse).
Severity parse_severity(std::string_view s);

struct WeightProfile {
  std::map<std::string, Centi> weights;  // keyed by canonical category name
};

/// Accuracy 0.7, LinguisticConventions 0.8, Style 1.5.
WeightProfile shipped_weights();

/// `category<TAB>weight` lines; '#' comments and blank lines are skipped.
/// Category names are resolved against `typology` when one is given.
WeightProfile parse_weight_profile(std::string_view content, const Typology* typology = &default_typology());

struct WeightCheck {
  double mean = 0.0;
  bool ok = false;
  std::vector<std::string> warnings;
};

/// ok iff the mean weight lies in [0.9, 1.1]. Empty profile throws.
WeightCheck validate_weight_profile(const WeightProfile& weights);

struct ErrorAnnotation {
  std::string evaluator_id;
  std::string doc_id;
  std::string method_id;  // or blinded label before export resolution
  std::size_t start = 0;  // code points, [start, end)
  std::size_t end = 0;
  std::string category;
  std::optional<std::string> subtype;
  std::optional<Severity> severity;
  std::string note;

  friend bool operator==(const ErrorAnnotation&, const ErrorAnnotation&) = default;
};

/// Checks span order, category and subtype membership, and the span bound
/// when the variant length is known. Canonicalizes the category name.
void validate_annotation(ErrorAnnotation& annotation, const Typology& typology,
                         std::optional<std::size_t> variant_length = std::nullopt);

/// Nine tab-separated fields: evaluator, doc, method, start, end, category,
/// subtype, severity, note. Empty or "-" marks an absent subtype/severity.
/// An optional header line starting with "evaluator" is skipped.
std::vector<ErrorAnnotation> parse_annotations(std::string_view content,
                                               const Typology& typology = default_typology());
std::string serialize_annotations(std::span<const ErrorAnnotation> annotations);

struct ScoreKey {
  std::string doc_id;
  std::string method_id;
  std::string evaluator_id;

  friend auto operator<=>(const ScoreKey&, const ScoreKey&) = default;
};

struct DocScore {
  std::string doc_id;
  std::string method_id;
  std::string evaluator_id;
  Centi total;
  std::map<std::string, Centi> per_category;
};

struct ScoreOptions {
  bool severity_enabled = false;
  /// Identical (category, normalized note) pairs count once, at the highest
  /// contribution. Annotations without a note are never merged.
  bool dedupe_repeats = false;
};

/// All annotations must share one (doc, method, evaluator). Contribution is
/// weight × severity score, or weight × 1 when severity is off.
DocScore score_annotations(std::span<const ErrorAnnotation> annotations, const WeightProfile& weights,
                           const ScoreOptions& options = {});

/// Groups annotations by key and scores each group. Keys in `evaluated`
/// with no annotations produce a zero score.
std::vector<DocScore> score_all(std::span<const ErrorAnnotation> annotations, const WeightProfile& weights,
                                const ScoreOptions& options = {}, std::span<const ScoreKey> evaluated = {});

struct MethodMean {
  double mean = 0.0;
  std::size_t documents = 0;
};

/// evaluator → method → mean total over documents.
std::map<std::string, std::map<std::string, MethodMean>> aggregate_method_scores(std::span<const DocScore> scores);

enum class Verdict { pass, fail };

/// pass iff total ≤ threshold. An absent threshold throws
/// Error(Errc::indeterminate).
Verdict judge_pass_fail(const DocScore& score, std::optional<Centi> threshold);

}  // namespace specmt::scoring
