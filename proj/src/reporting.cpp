#include "specmt/reporting.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "specmt/agreement_stats.hpp"
#include "specmt/error.hpp"
#include "specmt/hash.hpp"
#include "specmt/io.hpp"
#include "specmt/syntax_profile.hpp"
#include "specmt/text.hpp"

namespace specmt::report {
namespace fs = std::filesystem;

namespace {

double parse_double(std::string_view s, std::size_t line, std::string_view field) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, std::string(field), "not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line, std::string_view field) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, std::string(field), "not a count: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> ordered(const std::set<std::string>& present, const std::vector<std::string>& preferred) {
  std::vector<std::string> out;
  for (const auto& m : preferred) {
    if (present.count(m) && std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  for (const auto& m : present) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

// A table file: input hash line, header, rows.
struct Table {
  std::string name;
  std::string header;
  std::vector<std::string> rows;
  std::vector<std::string> footer;  // '#'-prefixed lines after the rows

  std::string render(const std::string& input_hash) const {
    std::string out = "#input\t" + input_hash + "\n" + header + "\n";
    for (const auto& r : rows) out += r + "\n";
    for (const auto& f : footer) out += f + "\n";
    return out;
  }
};

std::string join(const std::vector<std::string>& cells, char sep = '\t') {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += sep;
    out += cells[i];
  }
  return out;
}

std::string serialize_scores(const std::vector<scoring::DocScore>& scores) {
  std::vector<std::string> lines;
  for (const auto& s : scores) {
    std::string l = s.doc_id + '\t' + s.method_id + '\t' + s.evaluator_id + '\t' + s.total.to_string();
    for (const auto& [c, v] : s.per_category) l += '\t' + c + '=' + v.to_string();
    lines.push_back(std::move(l));
  }
  std::sort(lines.begin(), lines.end());
  return join(lines, '\n');
}

std::string serialize_syntax(const std::vector<SyntaxRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.method_id + '\t' + std::to_string(r.word_count) + '\t' + std::to_string(r.clausal_and) + '\t' +
           std::to_string(r.relative_pronouns) + '\t' + (r.and_reference ? r.and_reference->to_string() : "-") +
           '\t' + (r.relp_reference ? r.relp_reference->to_string() : "-") + '\n';
  }
  return out;
}

std::string serialize_metrics(const std::vector<MetricScore>& scores) {
  std::vector<std::string> lines;
  for (const auto& s : scores) lines.push_back(s.doc_id + '\t' + s.method_id + '\t' + s.metric + '\t' + fixed(s.score, 17));
  std::sort(lines.begin(), lines.end());
  return join(lines, '\n');
}

std::string opt_fixed(const std::optional<double>& v, int decimals) { return v ? fixed(*v, decimals) : "-"; }

// Pads each column of tab-separated rows for the text report.
std::string text_table(const std::string& header, const std::vector<std::string>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(text::split(header, '\t'));
  for (const auto& r : rows) cells.push_back(text::split(r, '\t'));
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], text::char_count(row[i]));
  }
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(width[i] - text::char_count(row[i]) + 2, ' ');
    }
    out += "  " + line + "\n";
  }
  return out;
}

}  // namespace

std::string fixed(double v, int decimals) {
  if (v == 0.0) v = 0.0;  // no "-0.000"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::vector<MetricScore> parse_metric_scores(std::string_view content, const corpus::Corpus* corpus,
                                             MetricBounds bounds) {
  if (const auto bad = text::first_invalid_utf8(content)) {
    throw Error(Errc::encoding, "metric file is not valid UTF-8 (byte offset " + std::to_string(*bad) + ")");
  }
  std::vector<MetricScore> out;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  const auto lines = io::lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::trim(lines[i]).empty() || lines[i].front() == '#') continue;
    const auto f = text::split(lines[i], '\t');
    if (out.empty() && seen.empty() && f.size() == 4 && f[0] == "doc" && f[3] == "score") continue;
    if (f.size() != 4) throw ParseError(lineno, "", "expected doc, method, metric and score");
    MetricScore s{f[0], f[1], f[2], parse_double(text::trim(f[3]), lineno, "score")};
    if (s.doc_id.empty() || s.method_id.empty() || s.metric.empty()) throw ParseError(lineno, "", "empty key field");
    if (s.score < bounds.low || s.score > bounds.high) {
      throw Error(Errc::out_of_range, "line " + std::to_string(lineno) + ": score " + f[3] + " outside [" +
                                          fixed(bounds.low, 3) + ", " + fixed(bounds.high, 3) + "]");
    }
    if (corpus) {
      if (!corpus->find_document(s.doc_id)) {
        throw Error(Errc::not_found, "line " + std::to_string(lineno) + ": unknown doc '" + s.doc_id + "'");
      }
      if (!corpus->find_method(s.method_id)) {
        throw Error(Errc::not_found, "line " + std::to_string(lineno) + ": unknown method '" + s.method_id + "'");
      }
    }
    if (!seen.emplace(s.doc_id, s.method_id, s.metric).second) {
      throw Error(Errc::duplicate, "line " + std::to_string(lineno) + ": duplicate (" + s.doc_id + ", " +
                                       s.method_id + ", " + s.metric + ")");
    }
    out.push_back(std::move(s));
  }
  return out;
}

MetricSummary summarize_metric(std::span<const MetricScore> scores, std::string_view method_id,
                               std::optional<std::string_view> metric) {
  std::vector<double> xs;
  for (const auto& s : scores) {
    if (s.method_id == method_id && (!metric || s.metric == *metric)) xs.push_back(s.score);
  }
  if (xs.empty()) throw Error(Errc::empty_input, "no scores for method '" + std::string(method_id) + "'");
  MetricSummary m;
  m.n = xs.size();
  double sum = 0.0;
  for (const double x : xs) sum += x;
  m.mean = sum / static_cast<double>(m.n);
  if (m.n >= 2) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd_population = std::sqrt(ss / static_cast<double>(m.n));
    m.sd_sample = std::sqrt(ss / static_cast<double>(m.n - 1));
  }
  return m;
}

std::vector<SyntaxRow> parse_syntax_counts(std::string_view content) {
  std::vector<SyntaxRow> out;
  std::set<std::string> seen;
  const auto lines = io::lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (text::trim(lines[i]).empty() || lines[i].front() == '#') continue;
    const auto f = text::split(lines[i], '\t');
    if (out.empty() && f[0] == "method") continue;
    if (f.size() != 4 && f.size() != 6) {
      throw ParseError(lineno, "", "expected method, words, clausal_and, relp and optionally two reference values");
    }
    SyntaxRow r;
    r.method_id = f[0];
    r.word_count = parse_count(f[1], lineno, "words");
    r.clausal_and = parse_count(f[2], lineno, "clausal_and");
    r.relative_pronouns = parse_count(f[3], lineno, "relp");
    if (f.size() == 6) {
      try {
        if (f[4] != "-") r.and_reference = Centi::parse(f[4]);
        if (f[5] != "-") r.relp_reference = Centi::parse(f[5]);
      } catch (const Error& e) {
        throw ParseError(lineno, "reference", e.what());
      }
    }
    if (!seen.insert(r.method_id).second) throw ParseError(lineno, "method", "duplicate method '" + r.method_id + "'");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SyntaxRow> syntax_rows_from_corpus(const corpus::Corpus& corpus) {
  std::vector<SyntaxRow> out;
  for (const auto& m : corpus.methods()) {
    SyntaxRow row;
    row.method_id = m.method_id;
    bool any = false;
    for (const auto& d : corpus.documents()) {
      const auto* v = corpus.find_variant(d.doc_id, m.method_id);
      if (!v) continue;
      any = true;
      const auto p = syntax::syntax_profile(v->text);
      row.word_count += p.word_count;
      row.clausal_and += p.clausal_and_count;
      row.relative_pronouns += p.relative_pronoun_count;
    }
    if (any) out.push_back(std::move(row));
  }
  return out;
}

ReportFiles emit_report(const ReportInputs& in, const fs::path& dir) {
  fs::create_directories(dir);
  ReportFiles files;
  std::string text = "Evaluation report\n=================\n\n";

  const auto write = [&](const Table& t, const std::string& input_hash) {
    const fs::path p = dir / (t.name + ".tsv");
    io::write_file_atomic(p, t.render(input_hash));
    files.written.push_back(p);
  };
  const auto section = [&](const std::string& title) { text += title + "\n" + std::string(title.size(), '-') + "\n"; };
  const auto absent = [&](const std::string& name, const std::string& what) {
    files.absent_sections.push_back(name);
    text += "  absent: no " + what + " supplied\n\n";
  };

  // Error scores and the agreement derived from them.
  section("Error scores");
  std::map<std::string, std::map<std::string, scoring::MethodMean>> means;
  if (in.error_scores && !in.error_scores->empty()) {
    const std::string hash = sha256_hex(serialize_scores(*in.error_scores));
    means = scoring::aggregate_method_scores(*in.error_scores);

    Table docs{"error_scores_by_doc", "doc\tmethod\tevaluator\ttotal\tper_category", {}, {}};
    auto sorted = *in.error_scores;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      return std::tie(a.evaluator_id, a.doc_id, a.method_id) < std::tie(b.evaluator_id, b.doc_id, b.method_id);
    });
    for (const auto& s : sorted) {
      std::string cats;
      for (const auto& [c, v] : s.per_category) cats += (cats.empty() ? "" : ";") + c + "=" + v.to_string();
      docs.rows.push_back(s.doc_id + '\t' + s.method_id + '\t' + s.evaluator_id + '\t' + s.total.to_string() + '\t' +
                          (cats.empty() ? "-" : cats));
    }
    write(docs, hash);

    std::set<std::string> methods;
    for (const auto& [e, ms] : means) {
      for (const auto& [m, mm] : ms) methods.insert(m);
    }
    const auto order = ordered(methods, in.method_order);
    Table t{"error_scores", "evaluator\tmethod\tdocuments\tmean_total", {}, {}};
    for (const auto& [e, ms] : means) {
      for (const auto& m : order) {
        if (const auto it = ms.find(m); it != ms.end()) {
          t.rows.push_back(e + '\t' + m + '\t' + std::to_string(it->second.documents) + '\t' +
                           fixed(it->second.mean, 4));
        }
      }
    }
    write(t, hash);
    std::vector<std::string> human;
    for (const auto& [e, ms] : means) {
      std::string row = e;
      for (const auto& m : order) row += '\t' + (ms.count(m) ? fixed(ms.at(m).mean, 2) : std::string("-"));
      human.push_back(row);
    }
    text += text_table("evaluator\t" + join(order), human) + "\n";

    section("Inter-annotator agreement");
    Table a{"agreement", "evaluator_a\tevaluator_b\tkind\tcoefficient\tp_two_sided\tn", {}, {}};
    std::vector<std::string> evaluators;
    for (const auto& [e, ms] : means) evaluators.push_back(e);
    for (std::size_t i = 0; i < evaluators.size(); ++i) {
      for (std::size_t j = i + 1; j < evaluators.size(); ++j) {
        std::vector<double> x;
        std::vector<double> y;
        for (const auto& m : order) {
          const auto& mi = means[evaluators[i]];
          const auto& mj = means[evaluators[j]];
          if (mi.count(m) && mj.count(m)) {
            x.push_back(mi.at(m).mean);
            y.push_back(mj.at(m).mean);
          }
        }
        for (const auto kind : {agreement::CorrelationKind::pearson, agreement::CorrelationKind::spearman}) {
          std::string row = evaluators[i] + '\t' + evaluators[j] + '\t' + std::string(agreement::to_string(kind)) + '\t';
          try {
            const auto r = kind == agreement::CorrelationKind::pearson ? agreement::pearson_with_p(x, y)
                                                                       : agreement::spearman_with_p(x, y);
            row += fixed(r.coefficient, 6) + '\t' + fixed(r.p_two_sided, 6) + '\t' + std::to_string(r.n);
          } catch (const Error&) {
            row += "-\t-\t" + std::to_string(x.size());
          }
          a.rows.push_back(std::move(row));
        }
      }
    }
    if (evaluators.size() < 2) {
      absent("agreement", "second evaluator");
    } else {
      write(a, hash);
      text += text_table(a.header, a.rows) + "\n";
    }
  } else {
    absent("error_scores", "error annotations");
    section("Inter-annotator agreement");
    absent("agreement", "error annotations");
  }

  // Rankings.
  section("Rankings");
  if (in.rankings && !in.rankings->empty()) {
    const std::string hash = sha256_hex(ranks::serialize_rankings(*in.rankings));
    const auto mr = ranks::mean_ranks(*in.rankings);
    std::set<std::string> methods;
    for (const auto& [m, v] : mr) methods.insert(m);
    const auto order = ordered(methods, in.method_order);
    const std::size_t k = order.size();

    Table h{"rank_histogram", "method\trank\tcount", {}, {}};
    for (const auto& m : order) {
      const auto counts = ranks::rank_histogram(*in.rankings, m);
      for (std::size_t r = 1; r <= k; ++r) {
        const auto it = counts.find(static_cast<int>(r));
        h.rows.push_back(m + '\t' + std::to_string(r) + '\t' + std::to_string(it == counts.end() ? 0 : it->second));
      }
    }
    write(h, hash);

    Table t{"mean_ranks", "method\tmean_rank", {}, {}};
    double sum = 0.0;
    for (const auto& m : order) {
      t.rows.push_back(m + '\t' + fixed(mr.at(m), 6));
      sum += mr.at(m);
    }
    const double expected = static_cast<double>(k * (k + 1)) / 2.0;
    const bool consistent = std::fabs(sum - expected) < 1e-9;
    t.footer.push_back("#sum_mean_ranks\t" + fixed(sum, 6) + "\texpected\t" + fixed(expected, 6) + "\t" +
                       (consistent ? "ok" : "MISMATCH"));
    if (!consistent) files.flags.push_back("mean ranks do not sum to K(K+1)/2");
    write(t, hash);

    std::vector<std::string> human;
    for (const auto& m : order) {
      const auto counts = ranks::rank_histogram(*in.rankings, m);
      std::string row = m + '\t' + fixed(mr.at(m), 2);
      for (std::size_t r = 1; r <= k; ++r) {
        const auto it = counts.find(static_cast<int>(r));
        row += '\t' + std::to_string(it == counts.end() ? 0 : it->second);
      }
      human.push_back(row);
    }
    std::string header = "method\tmean";
    for (std::size_t r = 1; r <= k; ++r) header += "\trank" + std::to_string(r);
    text += text_table(header, human);
    text += "  sum of mean ranks " + fixed(sum, 2) + " (expected " + fixed(expected, 2) + ")\n\n";

    section("Pairwise signed-rank tests");
    Table p{"pairwise",
            "method_a\tmethod_b\tW\tZ\tp_normal\tp_tie_corrected\tp_exact\tr\tn_pairs\tN",
            {},
            {}};
    std::vector<std::string> human_p;
    for (const auto& pr : ranks::pairwise_wilcoxon(*in.rankings, order, in.wilcoxon)) {
      const auto& r = pr.result;
      p.rows.push_back(pr.method_a + '\t' + pr.method_b + '\t' + fixed(r.w, 1) + '\t' + fixed(r.z, 6) + '\t' +
                       fixed(r.p_normal, 8) + '\t' + fixed(r.p_tie_corrected, 8) + '\t' + opt_fixed(r.p_exact, 8) +
                       '\t' + fixed(r.r_effect, 6) + '\t' + std::to_string(r.n_pairs) + '\t' +
                       std::to_string(r.n_total));
      human_p.push_back(pr.method_a + " vs " + pr.method_b + '\t' + fixed(r.w, 1) + '\t' + fixed(std::fabs(r.z), 3) +
                        '\t' + fixed(r.p_two_sided, 5) + '\t' + fixed(r.r_effect, 3));
    }
    write(p, hash);
    text += text_table("pair\tW\t|Z|\tp\tr", human_p) + "\n";
  } else {
    absent("rankings", "rankings");
    section("Pairwise signed-rank tests");
    absent("pairwise", "rankings");
  }

  // Syntax.
  section("Syntactic profile");
  if (in.syntax && !in.syntax->empty()) {
    const std::string hash = sha256_hex(serialize_syntax(*in.syntax));
    Table t{"syntax",
            "method\twords\tclausal_and\tand_per_1000w\trelative_pronouns\trelp_per_1000w\tflag",
            {},
            {}};
    for (const auto& r : *in.syntax) {
      const auto per = [&](std::size_t c) {
        return r.word_count ? syntax::normalize_per_1000(c, r.word_count) : Centi{};
      };
      const Centi a = per(r.clausal_and);
      const Centi p = per(r.relative_pronouns);
      std::vector<std::string> flag;
      if (r.and_reference && *r.and_reference != a) {
        flag.push_back("and_reference=" + r.and_reference->to_string());
      }
      if (r.relp_reference && *r.relp_reference != p) {
        flag.push_back("relp_reference=" + r.relp_reference->to_string());
      }
      for (const auto& f : flag) {
        files.flags.push_back(r.method_id + ": computed " +
                              (f.rfind("and", 0) == 0 ? a.to_string() : p.to_string()) + " differs from " + f);
      }
      t.rows.push_back(r.method_id + '\t' + std::to_string(r.word_count) + '\t' + std::to_string(r.clausal_and) +
                       '\t' + a.to_string() + '\t' + std::to_string(r.relative_pronouns) + '\t' + p.to_string() +
                       '\t' + (flag.empty() ? "-" : join(flag, ';')));
    }
    write(t, hash);
    text += text_table(t.header, t.rows);
    for (const auto& f : files.flags) {
      if (f.find("_reference=") != std::string::npos) text += "  flagged: " + f + "\n";
    }
    text += "\n";
  } else {
    absent("syntax", "syntax counts");
  }

  // External metrics.
  section("External metric scores");
  if (in.metrics && !in.metrics->empty()) {
    const std::string hash = sha256_hex(serialize_metrics(*in.metrics));
    std::set<std::string> metrics;
    std::set<std::string> methods;
    for (const auto& s : *in.metrics) {
      metrics.insert(s.metric);
      methods.insert(s.method_id);
    }
    const auto order = ordered(methods, in.method_order);
    Table t{"metrics", "metric\tmethod\tn\tmean\tsd_population\tsd_sample", {}, {}};
    std::vector<std::string> human;
    for (const auto& metric : metrics) {
      for (const auto& m : order) {
        const bool has = std::any_of(in.metrics->begin(), in.metrics->end(),
                                     [&](const MetricScore& s) { return s.metric == metric && s.method_id == m; });
        if (!has) continue;
        const auto s = summarize_metric(*in.metrics, m, metric);
        t.rows.push_back(metric + '\t' + m + '\t' + std::to_string(s.n) + '\t' + fixed(s.mean, 6) + '\t' +
                         opt_fixed(s.sd_population, 6) + '\t' + opt_fixed(s.sd_sample, 6));
        human.push_back(metric + '\t' + m + '\t' + fixed(s.mean, 3) + '\t' + opt_fixed(s.sd_population, 3));
      }
    }
    write(t, hash);
    text += text_table("metric\tmethod\tmean\tsd", human) + "\n";
  } else {
    absent("metrics", "metric scores");
  }

  section("Provenance");
  Table prov{"provenance", "key\tvalue", {}, {}};
  prov.rows.push_back("spec_fingerprint\t" + (in.provenance.spec_fingerprint.empty() ? "-" : in.provenance.spec_fingerprint));
  prov.rows.push_back("corpus_hash\t" + (in.provenance.corpus_hash.empty() ? "-" : in.provenance.corpus_hash));
  prov.rows.push_back("software_version\t" + in.provenance.software_version);
  write(prov, sha256_hex(join(prov.rows, '\n')));
  text += text_table(prov.header, prov.rows);
  if (!files.absent_sections.empty()) text += "\nabsent sections: " + join(files.absent_sections, ',') + "\n";

  const fs::path report = dir / "report.txt";
  io::write_file_atomic(report, text);
  files.written.push_back(report);
  return files;
}

}  // namespace specmt::report
