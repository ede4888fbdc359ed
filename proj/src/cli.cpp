#include "specmt/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <future>
#include <map>
#include <json.hpp>
#include <set>
#include <thread>

#include "specmt/agreement_stats.hpp"
#include "specmt/backend_gateway.hpp"
#include "specmt/campaign.hpp"
#include "specmt/campaign_http.hpp"
#include "specmt/corpus_store.hpp"
#include "specmt/error_scoring.hpp"
#include "specmt/io.hpp"
#include "specmt/prompt_builder.hpp"
#include "specmt/rank_stats.hpp"
#include "specmt/reporting.hpp"
#include "specmt/spec_model.hpp"
#include "specmt/syntax_profile.hpp"
#include "specmt/text.hpp"
#include "specmt/version.hpp"

namespace specmt::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Format { text, tsv, json };

Format parse_format(const std::string& s) {
  if (s == "tsv") return Format::tsv;
  if (s == "json") return Format::json;
  return Format::text;
}

void add_format(CLI::App* cmd, std::string& target) {
  cmd->add_option("--format", target, "Output format")->check(CLI::IsMember({"text", "tsv", "json"}))->capture_default_str();
}

std::vector<double> read_values(const fs::path& path) {
  std::vector<double> out;
  const auto lines = io::lines(io::read_file(path));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = text::trim(lines[i]);
    if (t.empty() || t.front() == '#') continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(std::string(t), &used);
      if (used != t.size()) throw std::invalid_argument("trailing text");
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(i + 1, path.filename().string(), "not a number: '" + std::string(t) + "'");
    }
  }
  return out;
}

std::shared_ptr<const corpus::Corpus> open_corpus(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "manifest")) throw Error(Errc::not_found, "no corpus bundle in '" + dir + "'");
  return std::make_shared<const corpus::Corpus>(corpus::load_bundle(dir));
}

std::string g4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---- ingest -------------------------------------------------------------

struct IngestArgs {
  std::string store;
  std::string language = "ja";
  std::string id;
  bool variant = false;
  std::string doc;
  std::string method;
  std::string engine;
  bool revise = false;
  std::string register_method;
  std::string kind = "other";
  std::string name;
  std::vector<std::string> files;
  std::string format = "text";
};

int run_ingest(const IngestArgs& a, std::ostream& out) {
  corpus::CorpusStore store(a.store);
  const Format fmt = parse_format(a.format);
  json report = json::array();
  if (!a.register_method.empty()) {
    store.register_method({a.register_method, a.name.empty() ? a.register_method : a.name,
                           corpus::parse_method_kind(a.kind)});
    report.push_back({{"method", a.register_method}});
    if (fmt != Format::json) out << "registered method\t" << a.register_method << "\n";
  }
  if (a.variant) {
    if (a.doc.empty() || a.method.empty()) throw Error(Errc::invalid_argument, "--variant needs --doc and --method");
    if (a.files.size() != 1) throw Error(Errc::invalid_argument, "--variant takes exactly one file");
    const auto v = store.add_variant(a.doc, a.method, io::read_file(a.files.front()),
                                     {a.engine.empty() ? "external" : a.engine, "", ""}, a.revise);
    report.push_back({{"doc", v.doc_id}, {"method", v.method_id}, {"words", v.word_count}});
    if (fmt != Format::json) out << v.doc_id << '\t' << v.method_id << '\t' << v.word_count << "\n";
  } else {
    if (!a.id.empty() && a.files.size() > 1) throw Error(Errc::invalid_argument, "--id applies to a single file");
    for (const auto& f : a.files) {
      const auto d = store.ingest_document(f, a.language, a.id.empty() ? std::nullopt : std::optional(a.id));
      report.push_back({{"doc", d.doc_id}, {"language", d.language}, {"chars", d.char_count}});
      if (fmt != Format::json) out << d.doc_id << '\t' << d.language << '\t' << d.char_count << "\n";
    }
  }
  if (fmt == Format::json) out << report.dump(2) << "\n";
  return 0;
}

// ---- prompt -------------------------------------------------------------

struct PromptArgs {
  std::string mode = "basic";
  std::string spec;
  std::string company;
  std::string payload;
  std::string templates;
  bool appendix = false;
  std::string format = "text";
};

prompt::PromptRequest make_request(prompt::Mode mode, const std::optional<spec::SpecDocument>& spec,
                                   const std::string& company, std::string payload, bool appendix) {
  prompt::PromptRequest r;
  r.mode = mode;
  r.spec = spec;
  r.company_name = company;
  r.payload_text = std::move(payload);
  r.include_appendix = appendix;
  return r;
}

int run_prompt(const PromptArgs& a, std::ostream& out) {
  const auto mode = prompt::parse_mode(a.mode);
  std::optional<spec::SpecDocument> spec;
  if (!a.spec.empty()) spec = spec::load_spec(a.spec);
  const auto templates = a.templates.empty() ? prompt::builtin_templates() : prompt::load_templates(a.templates);
  const auto rendered =
      prompt::build_prompt(make_request(mode, spec, a.company, io::read_file(a.payload), a.appendix), templates);
  switch (parse_format(a.format)) {
    case Format::json:
      out << json{{"mode", prompt::to_string(mode)}, {"fingerprint", rendered.fingerprint}, {"text", rendered.text}}.dump(2)
          << "\n";
      break;
    case Format::tsv:
      out << "mode\tfingerprint\ttext\n"
          << prompt::to_string(mode) << '\t' << rendered.fingerprint << '\t' << io::tsv_escape(rendered.text) << "\n";
      break;
    case Format::text:
      out << rendered.text;
      if (rendered.text.empty() || rendered.text.back() != '\n') out << "\n";
      break;
  }
  return 0;
}

// ---- translate ----------------------------------------------------------

struct TranslateArgs {
  std::string store;
  std::string backend;
  std::string cache;
  std::string method;
  std::string mode = "basic";
  std::string spec;
  std::string company;
  std::string mt_method = "google";
  std::vector<std::string> docs;
  bool replay_only = false;
  bool revise = false;
  bool appendix = false;
  int jobs = 0;
  std::string format = "text";
};

int run_translate(const TranslateArgs& a, std::ostream& out) {
  auto config = gateway::load_backend_config(a.backend);
  if (a.jobs > 0) config.max_concurrent = a.jobs;
  const auto mode = prompt::parse_mode(a.mode);
  std::optional<spec::SpecDocument> spec;
  if (!a.spec.empty()) spec = spec::load_spec(a.spec);

  corpus::CorpusStore store(a.store);
  const auto snap = store.snapshot();
  if (!snap->find_method(a.method)) throw Error(Errc::not_found, "unknown method '" + a.method + "'");
  std::vector<std::string> docs = a.docs;
  if (docs.empty()) {
    for (const auto& d : snap->documents()) docs.push_back(d.doc_id);
  }

  std::vector<std::string> todo;
  std::vector<prompt::RenderedPrompt> prompts;
  for (const auto& id : docs) {
    const auto* doc = snap->find_document(id);
    if (!doc) throw Error(Errc::not_found, "unknown doc '" + id + "'");
    if (snap->find_variant(id, a.method) && !a.revise) continue;
    std::string payload = doc->text;
    if (mode == prompt::Mode::spec_postedit) {
      const auto* mt = snap->find_variant(id, a.mt_method);
      if (!mt) throw Error(Errc::not_found, "doc '" + id + "' has no '" + a.mt_method + "' output to post-edit");
      payload = mt->text;
    }
    prompts.push_back(prompt::build_prompt(make_request(mode, spec, a.company, payload, a.appendix)));
    todo.push_back(id);
  }

  gateway::ReplayCache cache(a.cache);
  gateway::Gateway gw(config, cache, gateway::make_http_transport(),
                      a.replay_only ? gateway::CachePolicy::replay_only : gateway::CachePolicy::replay_or_live);
  const auto records = gw.execute_all(prompts);
  json report = json::array();
  const Format fmt = parse_format(a.format);
  if (fmt == Format::tsv) out << "doc\tmethod\trequest_fingerprint\twords\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto v = store.add_variant(todo[i], a.method, records[i].response_text,
                                     gateway::variant_provenance(records[i]), a.revise);
    report.push_back({{"doc", v.doc_id},
                      {"method", v.method_id},
                      {"request_fingerprint", records[i].request_fingerprint},
                      {"words", v.word_count}});
    if (fmt != Format::json) {
      out << v.doc_id << '\t' << v.method_id << '\t' << records[i].request_fingerprint << '\t' << v.word_count << "\n";
    }
  }
  if (fmt == Format::json) out << json{{"variants", report}, {"live_calls", gw.live_calls()}}.dump(2) << "\n";
  return 0;
}

// ---- score --------------------------------------------------------------

struct ScoreArgs {
  std::string annotations;
  std::string weights;
  std::string corpus;
  bool severity = false;
  bool dedupe = false;
  std::optional<std::string> threshold;
  std::string format = "text";
};

int run_score(const ScoreArgs& a, std::ostream& out, std::ostream& err) {
  auto anns = scoring::parse_annotations(io::read_file(a.annotations));
  const auto weights =
      a.weights.empty() ? scoring::shipped_weights() : scoring::parse_weight_profile(io::read_file(a.weights));
  const auto check = scoring::validate_weight_profile(weights);
  for (const auto& w : check.warnings) err << "warning: " << w << "\n";

  std::vector<scoring::ScoreKey> evaluated;
  if (!a.corpus.empty()) {
    const auto c = open_corpus(a.corpus);
    std::set<std::string> evaluators;
    for (auto& ann : anns) {
      const auto* v = c->find_variant(ann.doc_id, ann.method_id);
      if (!v) throw Error(Errc::not_found, "no variant for doc '" + ann.doc_id + "', method '" + ann.method_id + "'");
      scoring::validate_annotation(ann, scoring::default_typology(), text::char_count(v->text));
      evaluators.insert(ann.evaluator_id);
    }
    for (const auto& e : evaluators) {
      for (const auto& d : c->documents()) {
        for (const auto* v : c->variants_for(d.doc_id)) evaluated.push_back({d.doc_id, v->method_id, e});
      }
    }
  }
  const scoring::ScoreOptions options{a.severity, a.dedupe};
  const auto scores = scoring::score_all(anns, weights, options, evaluated);
  std::optional<Centi> threshold;
  if (a.threshold) threshold = Centi::parse(*a.threshold);

  const auto verdict = [&](const scoring::DocScore& s) -> std::string {
    if (!threshold) return "indeterminate";
    return scoring::judge_pass_fail(s, threshold) == scoring::Verdict::pass ? "pass" : "fail";
  };
  const Format fmt = parse_format(a.format);
  if (fmt == Format::json) {
    json docs = json::array();
    for (const auto& s : scores) {
      json cats = json::object();
      for (const auto& [c, v] : s.per_category) cats[c] = v.to_string();
      docs.push_back({{"doc", s.doc_id},
                      {"method", s.method_id},
                      {"evaluator", s.evaluator_id},
                      {"total", s.total.to_string()},
                      {"per_category", cats},
                      {"verdict", verdict(s)}});
    }
    json means = json::object();
    if (!scores.empty()) {
      for (const auto& [e, ms] : scoring::aggregate_method_scores(scores)) {
        for (const auto& [m, mm] : ms) means[e][m] = {{"mean", mm.mean}, {"documents", mm.documents}};
      }
    }
    out << json{{"scores", docs}, {"method_means", means}, {"weight_mean", check.mean}, {"weights_ok", check.ok}}.dump(2)
        << "\n";
    return 0;
  }
  out << (fmt == Format::tsv ? "doc\tmethod\tevaluator\ttotal\tverdict\n" : "");
  for (const auto& s : scores) {
    out << s.doc_id << '\t' << s.method_id << '\t' << s.evaluator_id << '\t' << s.total.to_string() << '\t'
        << verdict(s) << "\n";
  }
  if (fmt == Format::text && !scores.empty()) {
    out << "\nmean total per method\n";
    for (const auto& [e, ms] : scoring::aggregate_method_scores(scores)) {
      for (const auto& [m, mm] : ms) out << e << '\t' << m << '\t' << report::fixed(mm.mean, 2) << "\n";
    }
  }
  return 0;
}

// ---- ranks --------------------------------------------------------------

struct RanksArgs {
  std::string rankings;
  std::string pairs = "all";
  int exact_max = 12;
  bool continuity = false;
  std::string format = "text";
};

int run_ranks(const RanksArgs& a, std::ostream& out) {
  const auto records = ranks::parse_rankings(io::read_file(a.rankings));
  const auto means = ranks::mean_ranks(records);
  ranks::WilcoxonOptions options{a.continuity, a.exact_max};
  std::vector<ranks::PairResult> results;
  if (a.pairs == "all") {
    std::vector<std::string> methods;
    for (const auto& [m, v] : means) methods.push_back(m);
    results = ranks::pairwise_wilcoxon(records, methods, options);
  } else {
    for (const auto& pair : text::split(a.pairs, ',')) {
      const auto ab = text::split(pair, ':');
      if (ab.size() != 2) throw Error(Errc::invalid_argument, "--pairs expects all or A:B[,C:D]");
      results.push_back({ab[0], ab[1], ranks::wilcoxon_signed_rank(records, ab[0], ab[1], options)});
    }
  }
  const auto method_name = [](ranks::PMethod m) { return m == ranks::PMethod::exact ? "exact" : "normal_approx"; };
  const Format fmt = parse_format(a.format);
  if (fmt == Format::json) {
    json mr = json::object();
    json hist = json::object();
    for (const auto& [m, v] : means) {
      mr[m] = v;
      for (const auto& [r, n] : ranks::rank_histogram(records, m)) hist[m][std::to_string(r)] = n;
    }
    json pairs = json::array();
    for (const auto& p : results) {
      const auto& r = p.result;
      pairs.push_back({{"a", p.method_a},
                       {"b", p.method_b},
                       {"W", r.w},
                       {"Z", r.z},
                       {"p_normal", r.p_normal},
                       {"p_tie_corrected", r.p_tie_corrected},
                       {"p_exact", r.p_exact ? json(*r.p_exact) : json()},
                       {"p", r.p_two_sided},
                       {"method", method_name(r.method)},
                       {"r", r.r_effect},
                       {"n_pairs", r.n_pairs},
                       {"N", r.n_total}});
    }
    out << json{{"records", records.size()}, {"mean_ranks", mr}, {"histogram", hist}, {"pairs", pairs}}.dump(2) << "\n";
    return 0;
  }
  if (fmt == Format::tsv) {
    out << "a\tb\tW\tZ\tp_normal\tp_tie_corrected\tp_exact\tr\tn_pairs\tN\n";
    for (const auto& p : results) {
      const auto& r = p.result;
      out << p.method_a << '\t' << p.method_b << '\t' << report::fixed(r.w, 1) << '\t' << report::fixed(r.z, 6) << '\t'
          << report::fixed(r.p_normal, 8) << '\t' << report::fixed(r.p_tie_corrected, 8) << '\t'
          << (r.p_exact ? report::fixed(*r.p_exact, 8) : "-") << '\t' << report::fixed(r.r_effect, 6) << '\t'
          << r.n_pairs << '\t' << r.n_total << "\n";
    }
    return 0;
  }
  out << "mean rank (" << records.size() << " records)\n";
  for (const auto& [m, v] : means) out << "  " << m << '\t' << report::fixed(v, 3) << "\n";
  out << "\npair\tW\t|Z|\tp\tr\n";
  for (const auto& p : results) {
    const auto& r = p.result;
    out << p.method_a << " vs " << p.method_b << '\t' << report::fixed(r.w, 1) << '\t'
        << report::fixed(std::fabs(r.z), 3) << '\t' << g4(r.p_two_sided) << " (" << method_name(r.method) << ")\t"
        << report::fixed(r.r_effect, 3) << "\n";
  }
  return 0;
}

// ---- agree --------------------------------------------------------------

struct AgreeArgs {
  std::string a;
  std::string b;
  std::string kind = "pearson";
  bool exact = false;
  std::string format = "text";
};

int run_agree(const AgreeArgs& a, std::ostream& out) {
  const auto x = read_values(a.a);
  const auto y = read_values(a.b);
  const auto kind = agreement::parse_correlation_kind(a.kind);
  const auto r = kind == agreement::CorrelationKind::pearson ? agreement::pearson_with_p(x, y, a.exact)
                                                             : agreement::spearman_with_p(x, y, a.exact);
  switch (parse_format(a.format)) {
    case Format::json:
      out << json{{"kind", agreement::to_string(kind)},
                  {"coefficient", r.coefficient},
                  {"p", r.p_two_sided},
                  {"n", r.n},
                  {"exact", r.exact}}
                 .dump(2)
          << "\n";
      break;
    case Format::tsv:
      out << "kind\tcoefficient\tp\tn\n"
          << agreement::to_string(kind) << '\t' << report::fixed(r.coefficient, 6) << '\t'
          << report::fixed(r.p_two_sided, 6) << '\t' << r.n << "\n";
      break;
    case Format::text:
      out << agreement::to_string(kind) << "\tcoefficient " << report::fixed(r.coefficient, 3) << "\tp "
          << g4(r.p_two_sided) << (r.exact ? " (exact)" : "") << "\tn " << r.n << "\n";
      break;
  }
  return 0;
}

// ---- syntax -------------------------------------------------------------

struct SyntaxArgs {
  std::vector<std::string> inputs;
  bool trace = false;
  int jobs = 1;
  std::string format = "text";
};

int run_syntax(const SyntaxArgs& a, std::ostream& out) {
  std::vector<std::string> texts;
  for (const auto& f : a.inputs) texts.push_back(io::read_file(f));
  std::vector<syntax::SyntaxProfileResult> results(texts.size());
  // Document-parallel: each worker takes every jobs-th file.
  const std::size_t jobs = std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(std::max(a.jobs, 1)), texts.size()));
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < texts.size(); i += jobs) results[i] = syntax::syntax_profile(texts[i]);
    });
  }
  for (auto& t : workers) t.join();

  const Format fmt = parse_format(a.format);
  if (fmt == Format::json) {
    json arr = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      json j = {{"file", a.inputs[i]},
                {"words", r.word_count},
                {"clausal_and", r.clausal_and_count},
                {"relative_pronouns", r.relative_pronoun_count},
                {"and_per_1000w", r.and_per_1000w.to_string()},
                {"relp_per_1000w", r.relp_per_1000w.to_string()}};
      if (a.trace) {
        json tr = json::array();
        for (const auto& t : r.trace) {
          tr.push_back({{"offset", t.offset}, {"token", t.token}, {"counted", t.counted}, {"rule", t.rule}});
        }
        j["trace"] = tr;
      }
      arr.push_back(j);
    }
    out << arr.dump(2) << "\n";
    return 0;
  }
  out << "file\twords\tclausal_and\tand_per_1000w\trelative_pronouns\trelp_per_1000w\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << a.inputs[i] << '\t' << r.word_count << '\t' << r.clausal_and_count << '\t' << r.and_per_1000w.to_string()
        << '\t' << r.relative_pronoun_count << '\t' << r.relp_per_1000w.to_string() << "\n";
  }
  if (a.trace) {
    out << "\nfile\toffset\ttoken\tcounted\trule\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
      for (const auto& t : results[i].trace) {
        out << a.inputs[i] << '\t' << t.offset << '\t' << t.token << '\t' << (t.counted ? "yes" : "no") << '\t'
            << t.rule << "\n";
      }
    }
  }
  return 0;
}

// ---- report -------------------------------------------------------------

struct ReportArgs {
  std::string out_dir;
  std::string corpus;
  std::string spec;
  std::string annotations;
  std::string weights;
  bool severity = false;
  bool dedupe = false;
  std::string rankings;
  std::string syntax_counts;
  bool syntax_from_corpus = false;
  std::string metrics;
  std::vector<std::string> methods;
  int exact_max = 12;
  std::string format = "text";
};

int run_report(const ReportArgs& a, std::ostream& out) {
  report::ReportInputs in;
  in.provenance.software_version = kVersion;
  in.wilcoxon.exact_max = a.exact_max;
  std::shared_ptr<const corpus::Corpus> c;
  if (!a.corpus.empty()) {
    c = open_corpus(a.corpus);
    in.provenance.corpus_hash = c->content_hash();
    for (const auto& m : c->methods()) in.method_order.push_back(m.method_id);
  }
  if (!a.methods.empty()) in.method_order = a.methods;
  if (!a.spec.empty()) in.provenance.spec_fingerprint = spec::spec_fingerprint(spec::load_spec(a.spec));
  if (!a.annotations.empty()) {
    const auto anns = scoring::parse_annotations(io::read_file(a.annotations));
    const auto weights =
        a.weights.empty() ? scoring::shipped_weights() : scoring::parse_weight_profile(io::read_file(a.weights));
    std::vector<scoring::ScoreKey> evaluated;
    if (c) {
      std::set<std::string> evaluators;
      for (const auto& ann : anns) evaluators.insert(ann.evaluator_id);
      for (const auto& e : evaluators) {
        for (const auto& d : c->documents()) {
          for (const auto* v : c->variants_for(d.doc_id)) evaluated.push_back({d.doc_id, v->method_id, e});
        }
      }
    }
    in.error_scores = scoring::score_all(anns, weights, {a.severity, a.dedupe}, evaluated);
  }
  if (!a.rankings.empty()) in.rankings = ranks::parse_rankings(io::read_file(a.rankings));
  if (!a.syntax_counts.empty()) {
    in.syntax = report::parse_syntax_counts(io::read_file(a.syntax_counts));
  } else if (a.syntax_from_corpus) {
    if (!c) throw Error(Errc::invalid_argument, "--syntax-from-corpus needs --corpus");
    in.syntax = report::syntax_rows_from_corpus(*c);
  }
  if (!a.metrics.empty()) in.metrics = report::parse_metric_scores(io::read_file(a.metrics), c.get());

  const auto files = report::emit_report(in, a.out_dir);
  if (parse_format(a.format) == Format::json) {
    json written = json::array();
    for (const auto& p : files.written) written.push_back(p.filename().string());
    out << json{{"written", written}, {"absent", files.absent_sections}, {"flags", files.flags}}.dump(2) << "\n";
    return 0;
  }
  for (const auto& p : files.written) out << "wrote\t" << p.string() << "\n";
  for (const auto& s : files.absent_sections) out << "absent\t" << s << "\n";
  for (const auto& f : files.flags) out << "flag\t" << f << "\n";
  return 0;
}

// ---- serve / export -----------------------------------------------------

struct ServeArgs {
  std::string corpus;
  std::string data = "campaigns";
  std::string spec;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
};

std::atomic<campaign::HttpServer*> g_server{nullptr};

extern "C" void stop_server(int) {
  if (auto* s = g_server.load()) s->stop();
}

int run_serve(const ServeArgs& a, std::ostream& out) {
  auto c = open_corpus(a.corpus);
  std::optional<spec::SpecDocument> spec;
  if (!a.spec.empty()) spec = spec::load_spec(a.spec);
  campaign::CampaignService service(a.data, c, spec, a.seed);
  campaign::HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  out << "listening on http://" << a.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  server.listen();
  g_server = nullptr;
  return 0;
}

struct ExportArgs {
  std::string corpus;
  std::string data = "campaigns";
  std::string campaign_id;
  std::string out_dir;
  std::string format = "text";
};

int run_export(const ExportArgs& a, std::ostream& out) {
  campaign::CampaignService service(a.data, open_corpus(a.corpus));
  const auto files = service.export_campaign(a.campaign_id);
  if (a.out_dir.empty() || parse_format(a.format) == Format::json) {
    out << json{{"annotations", files.annotations}, {"rankings", files.rankings}, {"questionnaire", files.questionnaire}}
               .dump(2)
        << "\n";
  }
  if (!a.out_dir.empty()) {
    campaign::write_export(files, a.out_dir);
    if (parse_format(a.format) != Format::json) out << "wrote\t" << a.out_dir << "\n";
  }
  return 0;
}

}  // namespace

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::parse: return 3;
    case Errc::encoding: return 4;
    case Errc::empty_input: return 5;
    case Errc::invalid_argument: return 6;
    case Errc::not_found: return 7;
    case Errc::duplicate: return 8;
    case Errc::out_of_range: return 9;
    case Errc::mode_mismatch: return 10;
    case Errc::precondition: return 11;
    case Errc::indeterminate: return 12;
    case Errc::timeout: return 13;
    case Errc::http_status: return 14;
    case Errc::transport: return 15;
    case Errc::empty_response: return 16;
    case Errc::io: return 17;
  }
  return 1;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Specification-aware translation evaluation workbench", "specmt"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Add source documents or translation variants to a corpus store");
  c_ingest->add_option("--store", ingest.store, "Corpus store directory")->required();
  c_ingest->add_option("--lang", ingest.language, "Source language")->capture_default_str();
  c_ingest->add_option("--id", ingest.id, "Document id (default: content hash)");
  c_ingest->add_flag("--variant", ingest.variant, "Ingest FILE as a translation variant");
  c_ingest->add_option("--doc", ingest.doc, "Document id of the variant");
  c_ingest->add_option("--method", ingest.method, "Method id of the variant");
  c_ingest->add_option("--engine", ingest.engine, "Engine recorded as provenance");
  c_ingest->add_flag("--revise", ingest.revise, "Replace an existing variant");
  c_ingest->add_option("--register-method", ingest.register_method, "Register a method id");
  c_ingest->add_option("--kind", ingest.kind, "Kind of the registered method")->capture_default_str();
  c_ingest->add_option("--name", ingest.name, "Display name of the registered method");
  c_ingest->add_option("files", ingest.files, "Text files")->check(CLI::ExistingFile);
  add_format(c_ingest, ingest.format);

  PromptArgs pr;
  auto* c_prompt = app.add_subcommand("prompt", "Render a translation or post-edit prompt");
  c_prompt->add_option("--mode", pr.mode, "basic | spec | pe")->capture_default_str();
  c_prompt->add_option("--spec", pr.spec, "Specification file")->check(CLI::ExistingFile);
  c_prompt->add_option("--company", pr.company, "Company name substituted into the template");
  c_prompt->add_option("--payload", pr.payload, "Source text, or MT output for pe")->required()->check(CLI::ExistingFile);
  c_prompt->add_option("--templates", pr.templates, "Template directory")->check(CLI::ExistingDirectory);
  c_prompt->add_flag("--appendix", pr.appendix, "Add the optional specification parameters");
  add_format(c_prompt, pr.format);

  TranslateArgs tr;
  auto* c_translate = app.add_subcommand("translate", "Run prompts through a backend and store the outputs");
  c_translate->add_option("--store", tr.store, "Corpus store directory")->required();
  c_translate->add_option("--backend", tr.backend, "Backend config (JSON)")->required()->check(CLI::ExistingFile);
  c_translate->add_option("--cache", tr.cache, "Replay cache directory")->required();
  c_translate->add_option("--method", tr.method, "Method id for the outputs")->required();
  c_translate->add_option("--mode", tr.mode, "basic | spec | pe")->capture_default_str();
  c_translate->add_option("--spec", tr.spec, "Specification file")->check(CLI::ExistingFile);
  c_translate->add_option("--company", tr.company, "Company name");
  c_translate->add_option("--mt-method", tr.mt_method, "Method whose output is post-edited")->capture_default_str();
  c_translate->add_option("--doc", tr.docs, "Restrict to these documents");
  c_translate->add_flag("--replay-only", tr.replay_only, "Fail on cache misses instead of calling the backend");
  c_translate->add_flag("--revise", tr.revise, "Replace existing variants");
  c_translate->add_flag("--appendix", tr.appendix, "Add the optional specification parameters");
  c_translate->add_option("--jobs", tr.jobs, "Concurrent requests (default: backend config)");
  add_format(c_translate, tr.format);

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "Weighted error scores from annotations");
  c_score->add_option("--annotations", sc.annotations, "Annotation TSV")->required()->check(CLI::ExistingFile);
  c_score->add_option("--weights", sc.weights, "Weight profile (category<TAB>weight)")->check(CLI::ExistingFile);
  c_score->add_option("--corpus", sc.corpus, "Corpus bundle for span checks and zero-error documents");
  c_score->add_flag("--severity", sc.severity, "Multiply by severity scores");
  c_score->add_flag("--dedupe-repeats", sc.dedupe, "Count identical (category, note) pairs once");
  c_score->add_option("--threshold", sc.threshold, "Pass threshold on the total");
  add_format(c_score, sc.format);

  RanksArgs rk;
  auto* c_ranks = app.add_subcommand("ranks", "Rank histograms, mean ranks and signed-rank tests");
  c_ranks->add_option("--rankings", rk.rankings, "Ranking file")->required()->check(CLI::ExistingFile);
  c_ranks->add_option("--pairs", rk.pairs, "all or A:B[,C:D]")->capture_default_str();
  c_ranks->add_option("--exact-max", rk.exact_max, "Largest pair count for exact p")->capture_default_str();
  c_ranks->add_flag("--continuity", rk.continuity, "Apply a continuity correction to Z");
  add_format(c_ranks, rk.format);

  AgreeArgs ag;
  auto* c_agree = app.add_subcommand("agree", "Correlation between two evaluators' scores");
  c_agree->add_option("--a", ag.a, "Values, one per line")->required()->check(CLI::ExistingFile);
  c_agree->add_option("--b", ag.b, "Values, one per line")->required()->check(CLI::ExistingFile);
  c_agree->add_option("--kind", ag.kind, "pearson | spearman")->capture_default_str();
  c_agree->add_flag("--exact", ag.exact, "Permutation p-value (n <= 8)");
  add_format(c_agree, ag.format);

  SyntaxArgs sy;
  auto* c_syntax = app.add_subcommand("syntax", "Clausal-and and relative-pronoun frequencies");
  c_syntax->add_option("--in", sy.inputs, "Text files")->required()->check(CLI::ExistingFile);
  c_syntax->add_flag("--trace", sy.trace, "List every classified token");
  c_syntax->add_option("--jobs", sy.jobs, "Files profiled in parallel")->capture_default_str();
  add_format(c_syntax, sy.format);

  ReportArgs rp;
  auto* c_report = app.add_subcommand("report", "Write the report directory");
  c_report->add_option("--out", rp.out_dir, "Output directory")->required();
  c_report->add_option("--corpus", rp.corpus, "Corpus bundle");
  c_report->add_option("--spec", rp.spec, "Specification file")->check(CLI::ExistingFile);
  c_report->add_option("--annotations", rp.annotations, "Annotation TSV")->check(CLI::ExistingFile);
  c_report->add_option("--weights", rp.weights, "Weight profile")->check(CLI::ExistingFile);
  c_report->add_flag("--severity", rp.severity, "Multiply by severity scores");
  c_report->add_flag("--dedupe-repeats", rp.dedupe, "Count identical (category, note) pairs once");
  c_report->add_option("--rankings", rp.rankings, "Ranking file")->check(CLI::ExistingFile);
  c_report->add_option("--syntax-counts", rp.syntax_counts, "Per-method syntax counts")->check(CLI::ExistingFile);
  c_report->add_flag("--syntax-from-corpus", rp.syntax_from_corpus, "Profile every corpus variant");
  c_report->add_option("--metrics", rp.metrics, "Metric score file")->check(CLI::ExistingFile);
  c_report->add_option("--methods", rp.methods, "Method row order")->delimiter(',');
  c_report->add_option("--exact-max", rp.exact_max, "Largest pair count for exact p")->capture_default_str();
  add_format(c_report, rp.format);

  ServeArgs sv;
  auto* c_serve = app.add_subcommand("serve", "Run the blinded evaluation campaign service");
  c_serve->add_option("--corpus", sv.corpus, "Corpus bundle")->required();
  c_serve->add_option("--data", sv.data, "Campaign data directory")->envname("SPECMT_DATA_DIR")->capture_default_str();
  c_serve->add_option("--spec", sv.spec, "Specification shown to evaluators")->check(CLI::ExistingFile);
  c_serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  c_serve->add_option("--port", sv.port, "Port (0 picks a free one)")->envname("SPECMT_PORT")->capture_default_str();
  c_serve->add_option("--seed", sv.seed, "Default blinding seed")->envname("SPECMT_SEED")->capture_default_str();

  ExportArgs ex;
  auto* c_export = app.add_subcommand("export", "Export unblinded campaign results");
  c_export->add_option("--corpus", ex.corpus, "Corpus bundle")->required();
  c_export->add_option("--data", ex.data, "Campaign data directory")->envname("SPECMT_DATA_DIR")->capture_default_str();
  c_export->add_option("--campaign", ex.campaign_id, "Campaign id")->required();
  c_export->add_option("--out", ex.out_dir, "Directory for annotations.tsv, rankings.tsv, questionnaire.tsv");
  add_format(c_export, ex.format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (c_ingest->parsed()) return run_ingest(ingest, out);
    if (c_prompt->parsed()) return run_prompt(pr, out);
    if (c_translate->parsed()) return run_translate(tr, out);
    if (c_score->parsed()) return run_score(sc, out, err);
    if (c_ranks->parsed()) return run_ranks(rk, out);
    if (c_agree->parsed()) return run_agree(ag, out);
    if (c_syntax->parsed()) return run_syntax(sy, out);
    if (c_report->parsed()) return run_report(rp, out);
    if (c_serve->parsed()) return run_serve(sv, out);
    if (c_export->parsed()) return run_export(ex, out);
  } catch (const Error& e) {
    err << "error[" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace specmt::cli
