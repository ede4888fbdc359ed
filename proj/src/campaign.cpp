#include "specmt/campaign.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "specmt/error_scoring.hpp"
#include "specmt/hash.hpp"
#include "specmt/io.hpp"
#include "specmt/rank_stats.hpp"
#include "specmt/text.hpp"

namespace specmt::campaign {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSnapshotEvery = 64;
constexpr std::size_t kMaxLabels = 26;

// Uniform in [0, bound) by rejection on the raw 64-bit stream.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % bound;
}

std::uint64_t key_to_seed(std::string_view key) {
  const std::string hex = sha256_hex(key).substr(0, 16);
  return std::stoull(hex, nullptr, 16);
}

ServiceError invalid(std::string code, const std::string& message) {
  return ServiceError(Errc::invalid_argument, std::move(code), message);
}

struct TaskInfo {
  std::string task_id;
  std::string evaluator;
  std::string doc_id;
  std::vector<LabelAssignment> labels;
};

struct State {
  std::uint64_t seq = 0;
  std::map<std::string, json> submissions;  // task_id → normalized payload
};

json spec_summary(const std::optional<spec::SpecDocument>& spec) {
  if (!spec) return nullptr;
  json j = {
      {"fingerprint", spec::spec_fingerprint(*spec)},
      {"purpose", spec->purpose},
      {"audience", spec->audience},
      {"style", spec->style_register_tone},
  };
  const std::pair<const char*, const std::string*> optional_fields[] = {
      {"terminology", &spec->terminology},
      {"domain_legal", &spec->domain_legal},
      {"cultural", &spec->cultural_adaptation},
      {"length_format", &spec->length_formatting},
      {"localization", &spec->localization},
  };
  for (const auto& [name, value] : optional_fields) {
    if (!text::is_blank(*value)) j[name] = *value;
  }
  json glossary = json::array();
  for (const auto& e : spec->glossary) glossary.push_back({{"term", e.term}, {"rendering", e.rendering}});
  j["glossary"] = glossary;
  return j;
}

json typology_json() {
  json out = json::array();
  for (const auto& c : scoring::default_typology().categories()) out.push_back({{"category", c.name}, {"subtypes", c.subtypes}});
  return out;
}

}  // namespace

std::string_view to_string(TaskKind kind) { return kind == TaskKind::ranking ? "ranking" : "error_annotation"; }

TaskKind parse_task_kind(std::string_view s) {
  if (s == "ranking") return TaskKind::ranking;
  if (s == "error_annotation" || s == "annotation") return TaskKind::error_annotation;
  throw invalid("invalid_kind", "unknown task kind '" + std::string(s) + "'");
}

std::string label_for(std::size_t index) {
  if (index >= kMaxLabels) throw Error(Errc::out_of_range, "at most 26 variants per task");
  return std::string(1, static_cast<char>('A' + index));
}

std::vector<LabelAssignment> blinding_map(std::uint64_t seed, std::string_view campaign_id, std::string_view doc_id,
                                          std::string_view evaluator_id, const std::vector<std::string>& methods,
                                          bool shuffle) {
  std::vector<std::string> order = methods;
  if (shuffle) {
    std::string key = std::to_string(seed);
    for (const auto part : {campaign_id, doc_id, evaluator_id}) {
      key += '|';
      key += part;
    }
    std::mt19937_64 rng(key_to_seed(key));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_below(rng, i)]);
    }
  }
  std::vector<LabelAssignment> out;
  for (std::size_t i = 0; i < order.size(); ++i) out.push_back({label_for(i), order[i]});
  return out;
}

json to_json(const CampaignConfig& c) {
  return {
      {"campaign_id", c.campaign_id}, {"kind", to_string(c.kind)},
      {"roster", c.roster},           {"seed", c.seed},
      {"shuffle", c.shuffle},         {"severity", c.severity_enabled},
      {"allow_revision", c.allow_revision}, {"docs", c.docs},
      {"methods", c.methods},
  };
}

CampaignConfig config_from_json(const json& j) {
  if (!j.is_object()) throw invalid("invalid_payload", "campaign config must be a JSON object");
  try {
    CampaignConfig c;
    c.campaign_id = j.value("campaign_id", "");
    c.kind = parse_task_kind(j.value("kind", "ranking"));
    c.roster = j.at("roster").get<std::vector<std::string>>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.shuffle = j.value("shuffle", true);
    c.severity_enabled = j.value("severity", false);
    c.allow_revision = j.value("allow_revision", false);
    c.docs = j.value("docs", std::vector<std::string>{});
    c.methods = j.value("methods", std::vector<std::string>{});
    return c;
  } catch (const json::exception& e) {
    throw invalid("invalid_payload", std::string("campaign config: ") + e.what());
  }
}

const std::vector<Question>& questionnaire() {
  static const std::vector<Question> questions = {
      {"q1", "How well did this translation get its message across to its readers?"},
      {"q2", "Note any passage that read awkwardly or was hard to follow."},
  };
  return questions;
}

class Campaign {
 public:
  CampaignConfig config;
  std::string corpus_hash;
  std::string presentation_hash;
  std::string spec_fingerprint;
  std::vector<TaskInfo> tasks;
  std::map<std::string, std::size_t> task_index;
  std::map<std::string, std::string> variant_text;  // "doc\tmethod" → text
  fs::path dir;

  std::shared_ptr<const State> snapshot() const {
    std::lock_guard lock(state_mutex_);
    return state_;
  }

  void publish(std::shared_ptr<const State> next) {
    std::lock_guard lock(state_mutex_);
    state_ = std::move(next);
  }

  std::mutex write_mutex;

 private:
  mutable std::mutex state_mutex_;
  std::shared_ptr<const State> state_ = std::make_shared<State>();
};

namespace {

// Resolves docs and methods, then derives tasks and blinding maps.
void build_tasks(Campaign& c, const corpus::Corpus& corpus) {
  for (const auto& m : c.config.methods) {
    if (!corpus.find_method(m)) throw ServiceError(Errc::not_found, "unknown_method", "method is not registered");
  }
  for (const auto& d : c.config.docs) {
    if (!corpus.find_document(d)) throw ServiceError(Errc::not_found, "unknown_doc", "unknown doc '" + d + "'");
  }
  std::string presented;
  for (const auto& d : c.config.docs) {
    std::vector<std::string> methods;
    for (const auto& m : c.config.methods) {
      if (const auto* v = corpus.find_variant(d, m)) {
        methods.push_back(m);
        c.variant_text[d + '\t' + m] = v->text;
        presented += d + '\t' + m + '\t' + sha256_hex(v->text) + '\n';
      }
    }
    if (methods.size() < 2) {
      throw ServiceError(Errc::precondition, "too_few_variants",
                         "doc '" + d + "' has fewer than two variants to compare");
    }
    if (methods.size() > kMaxLabels) throw ServiceError(Errc::out_of_range, "too_many_variants", "more than 26 variants");
    for (const auto& e : c.config.roster) {
      TaskInfo t;
      t.task_id = "t-" + sha256_hex(c.config.campaign_id + '|' + e + '|' + d).substr(0, 16);
      t.evaluator = e;
      t.doc_id = d;
      t.labels = blinding_map(c.config.seed, c.config.campaign_id, d, e, methods, c.config.shuffle);
      c.task_index.emplace(t.task_id, 0);
      c.tasks.push_back(std::move(t));
    }
  }
  // Evaluator-major order: each evaluator works through docs in order.
  std::stable_sort(c.tasks.begin(), c.tasks.end(), [&](const TaskInfo& a, const TaskInfo& b) {
    const auto pos = [&](const std::string& e) {
      return std::find(c.config.roster.begin(), c.config.roster.end(), e) - c.config.roster.begin();
    };
    return pos(a.evaluator) < pos(b.evaluator);
  });
  for (std::size_t i = 0; i < c.tasks.size(); ++i) c.task_index[c.tasks[i].task_id] = i;
  c.presentation_hash = sha256_hex(presented);
}

const TaskInfo& task_for(const Campaign& c, const std::string& task_id, const std::string& evaluator) {
  const auto it = c.task_index.find(task_id);
  if (it == c.task_index.end() || c.tasks[it->second].evaluator != evaluator) {
    throw ServiceError(Errc::not_found, "unknown_task", "no task '" + task_id + "' for evaluator '" + evaluator + "'");
  }
  return c.tasks[it->second];
}

std::size_t variant_length(const Campaign& c, const TaskInfo& t, const std::string& label) {
  for (const auto& la : t.labels) {
    if (la.label == label) return text::char_count(c.variant_text.at(t.doc_id + '\t' + la.method_id));
  }
  throw invalid("unknown_label", "label '" + label + "' is not part of this task");
}

json normalize_questionnaire(const json& q) {
  if (q.is_null()) return json::object();
  if (!q.is_object()) throw invalid("invalid_questionnaire", "questionnaire must be an object");
  json out = json::object();
  for (const auto& [id, answer] : q.items()) {
    const auto& qs = questionnaire();
    if (std::none_of(qs.begin(), qs.end(), [&](const Question& x) { return x.id == id; })) {
      throw invalid("invalid_questionnaire", "unknown question '" + id + "'");
    }
    if (!answer.is_object()) throw invalid("invalid_questionnaire", "answer to '" + id + "' must be an object");
    json a = json::object();
    if (answer.contains("likert") && !answer.at("likert").is_null()) {
      const auto& l = answer.at("likert");
      if (!l.is_number_integer() || l.get<int>() < 1 || l.get<int>() > 5) {
        throw invalid("invalid_questionnaire", "likert answer to '" + id + "' must be an integer 1..5");
      }
      a["likert"] = l.get<int>();
    }
    if (answer.contains("text") && !answer.at("text").is_null()) {
      if (!answer.at("text").is_string()) throw invalid("invalid_questionnaire", "text answer must be a string");
      a["text"] = answer.at("text").get<std::string>();
    }
    if (!a.empty()) out[id] = a;
  }
  return out;
}

// Validates a submission against its task and returns the canonical form
// that is logged and compared for idempotency.
json normalize_submission(const Campaign& c, const TaskInfo& t, const json& payload) {
  json out = {{"task_id", t.task_id}, {"evaluator", t.evaluator}};
  if (c.config.kind == TaskKind::ranking) {
    if (!payload.contains("ranking") || payload.contains("annotations")) {
      throw ServiceError(Errc::mode_mismatch, "wrong_task_kind", "ranking task expects a 'ranking' object");
    }
    const auto& r = payload.at("ranking");
    if (!r.is_object()) throw invalid("invalid_payload", "'ranking' must be an object of label → rank");
    std::set<std::string> labels;
    for (const auto& la : t.labels) labels.insert(la.label);
    std::set<int> ranks;
    json ranking = json::object();
    for (const auto& [label, rank] : r.items()) {
      if (!labels.count(label)) throw invalid("unknown_label", "label '" + label + "' is not part of this task");
      if (!rank.is_number_integer()) throw invalid("invalid_permutation", "rank of '" + label + "' is not an integer");
      const int k = rank.get<int>();
      if (k < 1 || k > static_cast<int>(labels.size()) || !ranks.insert(k).second) {
        throw invalid("invalid_permutation", "ranks must be a strict permutation of 1.." + std::to_string(labels.size()));
      }
      ranking[label] = k;
    }
    if (ranks.size() != labels.size()) {
      throw invalid("invalid_permutation", "every label must be ranked exactly once");
    }
    out["ranking"] = ranking;
  } else {
    if (!payload.contains("annotations") || payload.contains("ranking")) {
      throw ServiceError(Errc::mode_mismatch, "wrong_task_kind", "annotation task expects an 'annotations' array");
    }
    const auto& arr = payload.at("annotations");
    if (!arr.is_array()) throw invalid("invalid_payload", "'annotations' must be an array");
    json anns = json::array();
    for (const auto& a : arr) {
      try {
        const std::string label = a.at("label").get<std::string>();
        const auto start = a.at("start").get<std::int64_t>();
        const auto end = a.at("end").get<std::int64_t>();
        const std::size_t len = variant_length(c, t, label);
        if (start < 0 || end <= start || static_cast<std::size_t>(end) > len) {
          throw ServiceError(Errc::out_of_range, "span_out_of_bounds",
                             "span [" + std::to_string(start) + ", " + std::to_string(end) + ") outside variant " +
                                 label + " of length " + std::to_string(len));
        }
        const auto* cat = scoring::default_typology().find(a.at("category").get<std::string>());
        if (!cat) throw invalid("invalid_category", "unregistered category");
        json n = {{"label", label}, {"start", start}, {"end", end}, {"category", cat->name}};
        if (a.contains("subtype") && !a.at("subtype").is_null()) {
          const auto sub = a.at("subtype").get<std::string>();
          if (!scoring::default_typology().has_subtype(*cat, sub)) {
            throw invalid("invalid_category", "subtype '" + sub + "' does not belong to " + cat->name);
          }
          n["subtype"] = sub;
        }
        const bool has_severity = a.contains("severity") && !a.at("severity").is_null();
        if (c.config.severity_enabled) {
          if (!has_severity) throw invalid("invalid_severity", "severity is required in this campaign");
          try {
            n["severity"] = std::string(scoring::to_string(scoring::parse_severity(a.at("severity").get<std::string>())));
          } catch (const Error& e) {
            throw invalid("invalid_severity", e.what());
          }
        } else if (has_severity) {
          throw invalid("invalid_severity", "severity is disabled in this campaign");
        }
        n["note"] = a.value("note", "");
        anns.push_back(std::move(n));
      } catch (const json::exception& e) {
        throw invalid("invalid_payload", std::string("annotation: ") + e.what());
      }
    }
    out["annotations"] = anns;
  }
  out["questionnaire"] = normalize_questionnaire(payload.value("questionnaire", json()));
  return out;
}

json task_payload(const Campaign& c, const TaskInfo& t, const corpus::Corpus& corpus,
                  const std::optional<spec::SpecDocument>& spec, std::size_t completed, std::size_t total) {
  json variants = json::array();
  for (const auto& la : t.labels) {
    const std::string& txt = c.variant_text.at(t.doc_id + '\t' + la.method_id);
    variants.push_back({{"label", la.label}, {"text", txt}, {"length", text::char_count(txt)}});
  }
  json qs = json::array();
  for (const auto& q : questionnaire()) qs.push_back({{"id", q.id}, {"prompt", q.prompt}, {"likert", {1, 5}}});
  json j = {
      {"campaign_id", c.config.campaign_id},
      {"task_id", t.task_id},
      {"evaluator", t.evaluator},
      {"kind", to_string(c.config.kind)},
      {"doc_id", t.doc_id},
      {"spec", spec_summary(spec)},
      {"variants", variants},
      {"questionnaire", qs},
      {"progress", {{"completed", completed}, {"total", total}}},
  };
  if (c.config.kind == TaskKind::error_annotation) {
    const auto* doc = corpus.find_document(t.doc_id);
    j["source"] = {{"language", doc->language}, {"text", doc->text}};
    j["typology"] = typology_json();
    j["severity_enabled"] = c.config.severity_enabled;
    if (c.config.severity_enabled) j["severity_levels"] = {"Neutral", "Minor", "Major", "Critical"};
  }
  return j;
}

void write_snapshot(const Campaign& c, const State& s) {
  if (c.dir.empty()) return;
  json subs = json::object();
  for (const auto& [id, p] : s.submissions) subs[id] = p;
  io::write_file_atomic(c.dir / "snapshot.json", json{{"seq", s.seq}, {"submissions", subs}}.dump() + "\n");
}

std::shared_ptr<Campaign> open_campaign(const fs::path& dir, const corpus::Corpus& corpus) {
  const std::string content = io::read_file(dir / "events.jsonl");
  auto lines = io::lines(content);
  // A final line without its newline is a torn write; it never committed.
  if (!content.empty() && content.back() != '\n' && !lines.empty()) lines.pop_back();
  if (lines.empty()) throw Error(Errc::parse, "empty event log in " + dir.string());

  auto c = std::make_shared<Campaign>();
  c->dir = dir;
  State state;
  try {
    const json created = json::parse(lines.front());
    if (created.at("type") != "created") throw Error(Errc::parse, "event log must start with 'created'");
    c->config = config_from_json(created.at("config"));
    c->corpus_hash = created.at("corpus_hash").get<std::string>();
    c->spec_fingerprint = created.value("spec_fingerprint", "");
    build_tasks(*c, corpus);
    if (c->presentation_hash != created.at("presentation_hash").get<std::string>()) {
      throw Error(Errc::precondition, "corpus texts changed since campaign '" + c->config.campaign_id + "' was created");
    }
    state.seq = created.at("seq").get<std::uint64_t>();

    if (fs::exists(dir / "snapshot.json")) {
      const json snap = json::parse(io::read_file(dir / "snapshot.json"));
      state.seq = snap.at("seq").get<std::uint64_t>();
      for (const auto& [id, p] : snap.at("submissions").items()) state.submissions[id] = p;
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const json ev = json::parse(lines[i]);
      const auto seq = ev.at("seq").get<std::uint64_t>();
      if (seq <= state.seq) continue;
      if (ev.at("type") == "submitted") state.submissions[ev.at("task_id").get<std::string>()] = ev.at("payload");
      state.seq = seq;
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "campaign log " + dir.string() + ": " + e.what());
  }
  c->publish(std::make_shared<const State>(std::move(state)));
  return c;
}

}  // namespace

CampaignService::CampaignService(fs::path data_dir, std::shared_ptr<const corpus::Corpus> corpus,
                                 std::optional<spec::SpecDocument> spec, std::uint64_t default_seed)
    : data_dir_(std::move(data_dir)), corpus_(std::move(corpus)), spec_(std::move(spec)), default_seed_(default_seed) {
  if (!corpus_) throw Error(Errc::invalid_argument, "campaign service needs a corpus");
  if (data_dir_.empty()) return;
  fs::create_directories(data_dir_);
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "events.jsonl")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    auto c = open_campaign(d, *corpus_);
    campaigns_.emplace(c->config.campaign_id, std::move(c));
  }
}

CampaignService::~CampaignService() = default;

std::shared_ptr<Campaign> CampaignService::find(const std::string& campaign_id) const {
  std::lock_guard lock(mutex_);
  const auto it = campaigns_.find(campaign_id);
  if (it == campaigns_.end()) {
    throw ServiceError(Errc::not_found, "unknown_campaign", "no campaign '" + campaign_id + "'");
  }
  return it->second;
}

std::vector<std::string> CampaignService::campaign_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, c] : campaigns_) out.push_back(id);
  return out;
}

json CampaignService::create_campaign(CampaignConfig config) {
  if (config.roster.empty()) throw invalid("empty_roster", "roster is empty");
  std::set<std::string> unique;
  for (const auto& e : config.roster) {
    if (!corpus::is_valid_id(e)) throw invalid("invalid_evaluator", "invalid evaluator id '" + e + "'");
    if (!unique.insert(e).second) throw invalid("invalid_evaluator", "evaluator '" + e + "' listed twice");
  }
  if (corpus_->documents().empty()) throw ServiceError(Errc::empty_input, "empty_corpus", "corpus has no documents");

  const bool implicit_docs = config.docs.empty();
  if (config.methods.empty()) {
    for (const auto& m : corpus_->methods()) config.methods.push_back(m.method_id);
  }
  if (implicit_docs) {
    for (const auto& d : corpus_->documents()) {
      const auto n = std::count_if(config.methods.begin(), config.methods.end(),
                                   [&](const std::string& m) { return corpus_->find_variant(d.doc_id, m) != nullptr; });
      if (n >= 2) config.docs.push_back(d.doc_id);
    }
    if (config.docs.empty()) {
      throw ServiceError(Errc::precondition, "too_few_variants", "no document has two or more variants");
    }
  }
  if (config.campaign_id.empty()) {
    config.campaign_id = "c-" + sha256_hex(to_json(config).dump() + corpus_->content_hash()).substr(0, 12);
  }
  if (!corpus::is_valid_id(config.campaign_id)) throw invalid("invalid_campaign_id", "invalid campaign id");

  auto c = std::make_shared<Campaign>();
  c->config = config;
  c->corpus_hash = corpus_->content_hash();
  c->spec_fingerprint = spec_ ? spec::spec_fingerprint(*spec_) : "";
  build_tasks(*c, *corpus_);

  std::lock_guard lock(mutex_);
  if (campaigns_.count(config.campaign_id)) {
    throw ServiceError(Errc::duplicate, "duplicate_campaign", "campaign '" + config.campaign_id + "' exists");
  }
  if (!data_dir_.empty()) {
    c->dir = data_dir_ / config.campaign_id;
    if (fs::exists(c->dir / "events.jsonl")) {
      throw ServiceError(Errc::duplicate, "duplicate_campaign", "campaign '" + config.campaign_id + "' exists");
    }
    fs::create_directories(c->dir);
    const json created = {{"seq", 1},
                          {"type", "created"},
                          {"config", to_json(config)},
                          {"corpus_hash", c->corpus_hash},
                          {"presentation_hash", c->presentation_hash},
                          {"spec_fingerprint", c->spec_fingerprint}};
    io::append_line_durable(c->dir / "events.jsonl", created.dump());
  }
  auto s = std::make_shared<State>();
  s->seq = 1;
  c->publish(std::move(s));
  campaigns_.emplace(config.campaign_id, c);
  return {{"campaign_id", config.campaign_id},
          {"kind", to_string(config.kind)},
          {"tasks", c->tasks.size()},
          {"evaluators", config.roster.size()},
          {"documents", config.docs.size()},
          {"corpus_hash", c->corpus_hash},
          {"spec_fingerprint", c->spec_fingerprint}};
}

std::optional<json> CampaignService::next_task(const std::string& campaign_id, const std::string& evaluator_id) const {
  const auto c = find(campaign_id);
  if (std::find(c->config.roster.begin(), c->config.roster.end(), evaluator_id) == c->config.roster.end()) {
    throw ServiceError(Errc::not_found, "unknown_evaluator", "evaluator '" + evaluator_id + "' is not on the roster");
  }
  const auto state = c->snapshot();
  std::size_t total = 0;
  std::size_t completed = 0;
  const TaskInfo* next = nullptr;
  for (const auto& t : c->tasks) {
    if (t.evaluator != evaluator_id) continue;
    ++total;
    if (state->submissions.count(t.task_id)) {
      ++completed;
    } else if (!next) {
      next = &t;
    }
  }
  if (!next) return std::nullopt;
  return task_payload(*c, *next, *corpus_, spec_, completed, total);
}

json CampaignService::submit_result(const std::string& campaign_id, const json& payload) {
  const auto c = find(campaign_id);
  if (!payload.is_object()) throw invalid("invalid_payload", "submission must be a JSON object");
  std::string task_id;
  std::string evaluator;
  try {
    task_id = payload.at("task_id").get<std::string>();
    evaluator = payload.at("evaluator").get<std::string>();
  } catch (const json::exception&) {
    throw invalid("invalid_payload", "submission needs string fields 'task_id' and 'evaluator'");
  }
  if (std::find(c->config.roster.begin(), c->config.roster.end(), evaluator) == c->config.roster.end()) {
    throw ServiceError(Errc::not_found, "unknown_evaluator", "evaluator '" + evaluator + "' is not on the roster");
  }
  const TaskInfo& task = task_for(*c, task_id, evaluator);
  json normalized = normalize_submission(*c, task, payload);

  std::lock_guard write(c->write_mutex);
  const auto current = c->snapshot();
  bool revision = false;
  if (const auto it = current->submissions.find(task_id); it != current->submissions.end()) {
    if (it->second == normalized) {
      return {{"status", "accepted"}, {"task_id", task_id}, {"duplicate", true}, {"revision", false}};
    }
    if (!c->config.allow_revision) {
      throw ServiceError(Errc::duplicate, "duplicate_submission", "task '" + task_id + "' was already submitted");
    }
    revision = true;
  }
  auto next = std::make_shared<State>(*current);
  next->seq = current->seq + 1;
  next->submissions[task_id] = normalized;
  if (!c->dir.empty()) {
    const json event = {{"seq", next->seq}, {"type", "submitted"}, {"task_id", task_id}, {"payload", normalized}};
    io::append_line_durable(c->dir / "events.jsonl", event.dump());
    if (next->seq % kSnapshotEvery == 0) write_snapshot(*c, *next);
  }
  c->publish(std::move(next));
  return {{"status", "accepted"}, {"task_id", task_id}, {"duplicate", false}, {"revision", revision}};
}

json CampaignService::status(const std::string& campaign_id) const {
  const auto c = find(campaign_id);
  const auto state = c->snapshot();
  std::map<std::string, TaskStatus> per;
  for (const auto& e : c->config.roster) per[e];
  TaskStatus all;
  for (const auto& t : c->tasks) {
    const bool done = state->submissions.count(t.task_id) > 0;
    auto& s = per[t.evaluator];
    (done ? s.complete : s.pending)++;
    (done ? all.complete : all.pending)++;
  }
  json evaluators = json::object();
  for (const auto& [e, s] : per) evaluators[e] = {{"pending", s.pending}, {"complete", s.complete}};
  return {{"campaign_id", campaign_id},
          {"kind", to_string(c->config.kind)},
          {"pending", all.pending},
          {"complete", all.complete},
          {"evaluators", evaluators},
          {"corpus_hash", c->corpus_hash},
          {"spec_fingerprint", c->spec_fingerprint}};
}

ExportFiles CampaignService::export_campaign(const std::string& campaign_id) const {
  const auto c = find(campaign_id);
  const auto state = c->snapshot();
  std::vector<scoring::ErrorAnnotation> anns;
  std::vector<ranks::RankingRecord> rankings;
  std::string questions = "evaluator\tdoc\tquestion\tlikert\ttext\n";
  for (const auto& t : c->tasks) {
    const auto it = state->submissions.find(t.task_id);
    if (it == state->submissions.end()) continue;
    const json& p = it->second;
    std::map<std::string, std::string> method_of;
    for (const auto& la : t.labels) method_of[la.label] = la.method_id;
    if (p.contains("ranking")) {
      ranks::RankingRecord r{t.evaluator, t.doc_id, {}};
      for (const auto& [label, rank] : p.at("ranking").items()) r.ranking[method_of.at(label)] = rank.get<int>();
      rankings.push_back(std::move(r));
    }
    if (p.contains("annotations")) {
      for (const auto& a : p.at("annotations")) {
        scoring::ErrorAnnotation e;
        e.evaluator_id = t.evaluator;
        e.doc_id = t.doc_id;
        e.method_id = method_of.at(a.at("label").get<std::string>());
        e.start = a.at("start").get<std::size_t>();
        e.end = a.at("end").get<std::size_t>();
        e.category = a.at("category").get<std::string>();
        if (a.contains("subtype")) e.subtype = a.at("subtype").get<std::string>();
        if (a.contains("severity")) e.severity = scoring::parse_severity(a.at("severity").get<std::string>());
        e.note = a.value("note", "");
        anns.push_back(std::move(e));
      }
    }
    for (const auto& q : questionnaire()) {
      if (!p.at("questionnaire").contains(q.id)) continue;
      const json& a = p.at("questionnaire").at(q.id);
      questions += t.evaluator + '\t' + t.doc_id + '\t' + q.id + '\t' +
                   (a.contains("likert") ? std::to_string(a.at("likert").get<int>()) : "-") + '\t' +
                   io::tsv_escape(a.value("text", "")) + '\n';
    }
  }
  return {scoring::serialize_annotations(anns), "#evaluator\tdoc\tmethod=rank...\n" + ranks::serialize_rankings(rankings),
          questions};
}

void write_export(const ExportFiles& files, const fs::path& dir) {
  fs::create_directories(dir);
  io::write_file_atomic(dir / "annotations.tsv", files.annotations);
  io::write_file_atomic(dir / "rankings.tsv", files.rankings);
  io::write_file_atomic(dir / "questionnaire.tsv", files.questionnaire);
}

}  // namespace specmt::campaign
