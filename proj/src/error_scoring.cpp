#include "specmt/error_scoring.hpp"

#include <algorithm>
#include <charconv>

#include "specmt/error.hpp"
#include "specmt/io.hpp"
#include "specmt/text.hpp"

namespace specmt::scoring {
namespace {

// Lowercase with spaces, underscores and hyphens removed.
std::string fold(std::string_view s) {
  std::string out;
  for (const char c : s) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::size_t parse_offset(std::string_view s, std::size_t line, std::string_view field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string(field), "expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

bool absent(std::string_view s) { return s.empty() || s == "-"; }

}  // namespace

void Typology::add(ErrorCategory category) {
  if (find(category.name)) throw Error(Errc::duplicate, "category '" + category.name + "' already registered");
  categories_.push_back(std::move(category));
}

const ErrorCategory* Typology::find(std::string_view name) const {
  const std::string key = fold(name);
  for (const auto& c : categories_) {
    if (fold(c.name) == key) return &c;
  }
  return nullptr;
}

bool Typology::has_subtype(const ErrorCategory& category, std::string_view subtype) const {
  const std::string key = fold(subtype);
  return std::any_of(category.subtypes.begin(), category.subtypes.end(),
                     [&](const std::string& s) { return fold(s) == key; });
}

const Typology& default_typology() {
  static const Typology typology = [] {
    Typology t;
    t.add({"Accuracy", {"mistranslation", "addition", "omission"}});
    t.add({"LinguisticConventions", {"grammar", "spelling", "unintelligible", "textual conventions"}});
    t.add({"Style",
           {"language register", "awkward style", "unidiomatic style", "inconsistent style"}});
    return t;
  }();
  return typology;
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::neutral: return "Neutral";
    case Severity::minor: return "Minor";
    case Severity::major: return "Major";
    case Severity::critical: return "Critical";
  }
  return "?";
}

Severity parse_severity(std::string_view s) {
  const std::string k = text::to_lower_ascii(text::trim(s));
  if (k == "neutral") return Severity::neutral;
  if (k == "minor") return Severity::minor;
  if (k == "major") return Severity::major;
  if (k == "critical") return Severity::critical;
  throw Error(Errc::parse, "unknown severity '" + std::string(s) + "'");
}

WeightProfile shipped_weights() {
  WeightProfile w;
  w.weights["Accuracy"] = Centi::from_units(70);
  w.weights["LinguisticConventions"] = Centi::from_units(80);
  w.weights["Style"] = Centi::from_units(150);
  return w;
}

WeightProfile parse_weight_profile(std::string_view content, const Typology* typology) {
  WeightProfile profile;
  const auto lines = io::lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = text::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2) throw ParseError(i + 1, "", "expected 'category<TAB>weight'");
    std::string name(text::trim(fields[0]));
    if (typology) {
      const auto* c = typology->find(name);
      if (!c) throw ParseError(i + 1, "category", "unknown category '" + name + "'");
      name = c->name;
    }
    Centi weight;
    try {
      weight = Centi::parse(text::trim(fields[1]));
    } catch (const Error& e) {
      throw ParseError(i + 1, "weight", e.what());
    }
    if (weight < Centi{}) throw ParseError(i + 1, "weight", "weight must be non-negative");
    if (!profile.weights.emplace(name, weight).second) {
      throw ParseError(i + 1, "category", "duplicate category '" + name + "'");
    }
  }
  if (typology) {
    for (const auto& c : typology->categories()) {
      if (!profile.weights.count(c.name)) throw Error(Errc::parse, "weight profile lacks category '" + c.name + "'");
    }
  }
  return profile;
}

WeightCheck validate_weight_profile(const WeightProfile& weights) {
  if (weights.weights.empty()) throw Error(Errc::empty_input, "weight profile is empty");
  std::int64_t sum = 0;
  for (const auto& [name, w] : weights.weights) {
    if (w < Centi{}) throw Error(Errc::invalid_argument, "negative weight for '" + name + "'");
    sum += w.units();
  }
  const auto n = static_cast<std::int64_t>(weights.weights.size());
  WeightCheck check;
  check.mean = static_cast<double>(sum) / static_cast<double>(n) / 100.0;
  // Compared in hundredths so the band edges are exact.
  check.ok = sum >= 90 * n && sum <= 110 * n;
  if (!check.ok) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", check.mean);
    check.warnings.push_back(std::string("mean weight ") + buf + " is outside [0.9, 1.1]");
  }
  return check;
}

void validate_annotation(ErrorAnnotation& a, const Typology& typology, std::optional<std::size_t> variant_length) {
  if (a.start >= a.end) {
    throw Error(Errc::out_of_range, "span [" + std::to_string(a.start) + ", " + std::to_string(a.end) + ") is empty");
  }
  if (variant_length && a.end > *variant_length) {
    throw Error(Errc::out_of_range, "span end " + std::to_string(a.end) + " exceeds variant length " +
                                        std::to_string(*variant_length));
  }
  const auto* c = typology.find(a.category);
  if (!c) throw Error(Errc::invalid_argument, "unregistered category '" + a.category + "'");
  a.category = c->name;
  if (a.subtype && !typology.has_subtype(*c, *a.subtype)) {
    throw Error(Errc::invalid_argument, "subtype '" + *a.subtype + "' does not belong to " + c->name);
  }
}

std::vector<ErrorAnnotation> parse_annotations(std::string_view content, const Typology& typology) {
  if (const auto bad = text::first_invalid_utf8(content)) {
    throw Error(Errc::encoding, "annotation file is not valid UTF-8 (byte offset " + std::to_string(*bad) + ")");
  }
  std::vector<ErrorAnnotation> out;
  const auto lines = io::lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string& line = lines[i];
    if (text::trim(line).empty() || line.front() == '#') continue;
    if (out.empty() && line.rfind("evaluator", 0) == 0) continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 9) {
      throw ParseError(lineno, "", "expected 9 tab-separated fields, got " + std::to_string(f.size()));
    }
    ErrorAnnotation a;
    a.evaluator_id = f[0];
    a.doc_id = f[1];
    a.method_id = f[2];
    if (a.evaluator_id.empty()) throw ParseError(lineno, "evaluator", "empty");
    if (a.doc_id.empty()) throw ParseError(lineno, "doc", "empty");
    if (a.method_id.empty()) throw ParseError(lineno, "method", "empty");
    a.start = parse_offset(f[3], lineno, "start");
    a.end = parse_offset(f[4], lineno, "end");
    a.category = f[5];
    if (!absent(f[6])) a.subtype = f[6];
    if (!absent(f[7])) {
      try {
        a.severity = parse_severity(f[7]);
      } catch (const Error& e) {
        throw ParseError(lineno, "severity", e.what());
      }
    }
    a.note = io::tsv_unescape(f[8]);
    try {
      validate_annotation(a, typology);
    } catch (const Error& e) {
      throw ParseError(lineno, "annotation", e.what());
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string serialize_annotations(std::span<const ErrorAnnotation> annotations) {
  std::string out = "evaluator\tdoc\tmethod\tstart\tend\tcategory\tsubtype\tseverity\tnote\n";
  for (const auto& a : annotations) {
    out += a.evaluator_id + '\t' + a.doc_id + '\t' + a.method_id + '\t' + std::to_string(a.start) + '\t' +
           std::to_string(a.end) + '\t' + a.category + '\t' + (a.subtype ? *a.subtype : "-") + '\t' +
           (a.severity ? std::string(to_string(*a.severity)) : "-") + '\t' + io::tsv_escape(a.note) + '\n';
  }
  return out;
}

DocScore score_annotations(std::span<const ErrorAnnotation> annotations, const WeightProfile& weights,
                           const ScoreOptions& options) {
  DocScore score;
  if (!annotations.empty()) {
    score.doc_id = annotations.front().doc_id;
    score.method_id = annotations.front().method_id;
    score.evaluator_id = annotations.front().evaluator_id;
  }
  // Dedupe keeps the highest contribution per (category, normalized note).
  std::map<std::pair<std::string, std::string>, Centi> merged;
  for (const auto& a : annotations) {
    if (a.doc_id != score.doc_id || a.method_id != score.method_id || a.evaluator_id != score.evaluator_id) {
      throw Error(Errc::invalid_argument, "annotations mix documents, methods or evaluators");
    }
    const auto w = weights.weights.find(a.category);
    if (w == weights.weights.end()) {
      throw Error(Errc::invalid_argument, "no weight for category '" + a.category + "'");
    }
    std::int64_t factor = 1;
    if (options.severity_enabled) {
      if (!a.severity) throw Error(Errc::invalid_argument, "severity scoring is on but an annotation has no severity");
      factor = severity_score(*a.severity);
    }
    const Centi contribution = w->second * factor;
    const std::string note = text::normalize_note(a.note);
    if (options.dedupe_repeats && !note.empty()) {
      auto [it, inserted] = merged.emplace(std::make_pair(a.category, note), contribution);
      if (!inserted) {
        if (contribution <= it->second) continue;
        score.per_category[a.category] = score.per_category[a.category] - it->second;
        score.total = score.total - it->second;
        it->second = contribution;
      }
    }
    score.per_category[a.category] += contribution;
    score.total += contribution;
  }
  return score;
}

std::vector<DocScore> score_all(std::span<const ErrorAnnotation> annotations, const WeightProfile& weights,
                                const ScoreOptions& options, std::span<const ScoreKey> evaluated) {
  std::map<ScoreKey, std::vector<ErrorAnnotation>> groups;
  for (const auto& key : evaluated) groups[key];
  for (const auto& a : annotations) groups[{a.doc_id, a.method_id, a.evaluator_id}].push_back(a);
  std::vector<DocScore> out;
  out.reserve(groups.size());
  for (const auto& [key, group] : groups) {
    DocScore s = score_annotations(group, weights, options);
    s.doc_id = key.doc_id;
    s.method_id = key.method_id;
    s.evaluator_id = key.evaluator_id;
    out.push_back(std::move(s));
  }
  return out;
}

std::map<std::string, std::map<std::string, MethodMean>> aggregate_method_scores(std::span<const DocScore> scores) {
  if (scores.empty()) throw Error(Errc::empty_input, "no document scores to aggregate");
  std::map<ScoreKey, bool> seen;
  std::map<std::string, std::map<std::string, std::int64_t>> sums;
  std::map<std::string, std::map<std::string, MethodMean>> out;
  for (const auto& s : scores) {
    if (!seen.emplace(ScoreKey{s.doc_id, s.method_id, s.evaluator_id}, true).second) {
      throw Error(Errc::duplicate, "duplicate score for doc '" + s.doc_id + "', method '" + s.method_id +
                                       "', evaluator '" + s.evaluator_id + "'");
    }
    sums[s.evaluator_id][s.method_id] += s.total.units();
    ++out[s.evaluator_id][s.method_id].documents;
  }
  for (auto& [evaluator, methods] : out) {
    for (auto& [method, mm] : methods) {
      mm.mean = static_cast<double>(sums[evaluator][method]) / 100.0 / static_cast<double>(mm.documents);
    }
  }
  return out;
}

Verdict judge_pass_fail(const DocScore& score, std::optional<Centi> threshold) {
  if (!threshold) {
    throw Error(Errc::indeterminate, "no pass threshold configured for doc '" + score.doc_id + "'");
  }
  if (*threshold < Centi{}) throw Error(Errc::invalid_argument, "threshold must be non-negative");
  return score.total <= *threshold ? Verdict::pass : Verdict::fail;
}

}  // namespace specmt::scoring
