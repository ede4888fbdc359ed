#pragma once

// Drives one randomized campaign through the HTTP API the way an evaluator
// client would, then checks the administrative export against what was
// submitted. The label→method bijection is recovered from the variant texts
// the client was shown, not from server internals.

#include <httplib.h>

#include <algorithm>
#include <json.hpp>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "specmt/campaign.hpp"
#include "specmt/campaign_http.hpp"
#include "specmt/corpus_store.hpp"
#include "specmt/error_scoring.hpp"
#include "specmt/rank_stats.hpp"
#include "support.hpp"

namespace specmt::test {

struct SimOutcome {
  std::size_t tasks = 0;
  std::size_t payloads_checked = 0;
  bool leak = false;
  std::vector<std::string> problems;

  bool ok() const { return !leak && problems.empty(); }
};

class ServedCampaigns {
 public:
  ServedCampaigns(std::filesystem::path data, std::shared_ptr<const corpus::Corpus> corpus)
      : service_(std::move(data), std::move(corpus)), server_(service_) {
    port_ = server_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_.listen(); });
    while (!server_.running()) std::this_thread::yield();
  }
  ~ServedCampaigns() {
    server_.stop();
    thread_.join();
  }
  int port() const { return port_; }
  campaign::CampaignService& service() { return service_; }

 private:
  campaign::CampaignService service_;
  campaign::HttpServer server_;
  int port_ = 0;
  std::thread thread_;
};

// Method ids use letters outside [0-9a-f] so they cannot collide with hashes
// or hex task ids by chance.
inline std::string random_method_id(std::mt19937_64& rng) {
  static const std::string letters = "ghijklmnopqrstuvwxyz";
  std::string id = "method-";
  for (int i = 0; i < 10; ++i) id += letters[rng() % letters.size()];
  return id;
}

inline std::string random_sentence(std::mt19937_64& rng, std::size_t words) {
  static const std::vector<std::string> vocab = {"we",      "build", "value", "for",    "society", "and", "our",
                                                 "people",  "grow",  "with",  "trust",  "every",   "day", "across",
                                                 "markets", "while", "that",  "future", "group",   "the", "a"};
  std::string s;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) s += ' ';
    s += vocab[rng() % vocab.size()];
  }
  return s + ".";
}

struct SimCorpus {
  std::shared_ptr<const corpus::Corpus> corpus;
  std::vector<std::string> method_ids;
};

inline SimCorpus random_corpus(std::mt19937_64& rng) {
  const std::size_t n_methods = 2 + rng() % 5;
  std::vector<corpus::MethodProfile> methods;
  std::set<std::string> ids;
  while (ids.size() < n_methods) ids.insert(random_method_id(rng));
  for (const auto& id : ids) methods.push_back({id, "Method", corpus::MethodKind::other});
  corpus::CorpusStore store("", methods);
  const std::size_t n_docs = 1 + rng() % 4;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const std::string doc = "doc" + std::to_string(d);
    store.ingest_text("原文" + std::to_string(d) + "。" + std::to_string(rng()), "ja", doc);
    for (const auto& m : methods) {
      // Unique texts let the client side recover which variant is which.
      store.add_variant(doc, m.method_id, random_sentence(rng, 3 + rng() % 12) + " #" + std::to_string(rng()), {});
    }
  }
  return {store.snapshot(), {ids.begin(), ids.end()}};
}

inline nlohmann::json random_questionnaire(std::mt19937_64& rng) {
  nlohmann::json q = nlohmann::json::object();
  for (const auto& question : campaign::questionnaire()) {
    switch (rng() % 3) {
      case 0: break;
      case 1: q[question.id] = {{"likert", 1 + static_cast<int>(rng() % 5)}}; break;
      default: q[question.id] = {{"likert", 1 + static_cast<int>(rng() % 5)}, {"text", random_sentence(rng, 4)}}; break;
    }
  }
  return q;
}

inline bool mentions_any(const std::string& body, const std::vector<std::string>& ids) {
  return std::any_of(ids.begin(), ids.end(), [&](const std::string& id) { return body.find(id) != std::string::npos; });
}

inline SimOutcome simulate_campaign(std::uint64_t seed) {
  using nlohmann::json;
  std::mt19937_64 rng(seed);
  SimOutcome out;
  const auto sim = random_corpus(rng);
  TempDir dir;
  ServedCampaigns served(dir.path(), sim.corpus);
  httplib::Client client("127.0.0.1", served.port());

  const bool ranking = rng() % 2 == 0;
  const bool severity = rng() % 2 == 0;
  json roster = json::array();
  for (std::size_t e = 0, n = 1 + rng() % 3; e < n; ++e) roster.push_back("eval" + std::to_string(e));
  const json config = {{"kind", ranking ? "ranking" : "error_annotation"},
                       {"roster", roster},
                       {"seed", rng()},
                       {"severity", severity}};
  const auto created = client.Post("/campaigns", config.dump(), "application/json");
  if (!created || created->status != 201) {
    out.problems.push_back("create failed");
    return out;
  }
  if (mentions_any(created->body, sim.method_ids)) out.leak = true;
  const std::string cid = json::parse(created->body).at("campaign_id").get<std::string>();

  // (evaluator, doc) → expected export, already mapped to method ids.
  std::map<std::pair<std::string, std::string>, std::map<std::string, int>> want_rankings;
  std::vector<scoring::ErrorAnnotation> want_annotations;
  std::map<std::pair<std::string, std::string>, json> want_questionnaire;

  for (const auto& ev : roster) {
    const std::string evaluator = ev.get<std::string>();
    for (;;) {
      const auto res = client.Get("/campaigns/" + cid + "/tasks/next?evaluator=" + evaluator);
      if (!res) {
        out.problems.push_back("no response for next task");
        return out;
      }
      if (res->status == 204) break;
      if (res->status != 200) {
        out.problems.push_back("next task status " + std::to_string(res->status));
        return out;
      }
      ++out.payloads_checked;
      if (mentions_any(res->body, sim.method_ids)) out.leak = true;
      const json task = json::parse(res->body);
      const std::string doc = task.at("doc_id").get<std::string>();

      // label → method through the text shown under that label.
      std::map<std::string, std::string> method_of;
      std::set<std::string> methods_seen;
      for (const auto& v : task.at("variants")) {
        std::string match;
        for (const auto& m : sim.method_ids) {
          const auto* variant = sim.corpus->find_variant(doc, m);
          if (variant && variant->text == v.at("text").get<std::string>()) match = m;
        }
        if (match.empty() || !methods_seen.insert(match).second) {
          out.problems.push_back("label " + v.at("label").get<std::string>() + " does not map to a unique variant");
        }
        method_of[v.at("label").get<std::string>()] = match;
      }
      if (method_of.size() != sim.corpus->variants_for(doc).size()) out.problems.push_back("variant count differs");

      json submission = {{"task_id", task.at("task_id")}, {"evaluator", evaluator}};
      if (ranking) {
        std::vector<int> ranks(method_of.size());
        for (std::size_t i = 0; i < ranks.size(); ++i) ranks[i] = static_cast<int>(i + 1);
        std::shuffle(ranks.begin(), ranks.end(), rng);
        json r = json::object();
        std::size_t i = 0;
        for (const auto& [label, method] : method_of) {
          r[label] = ranks[i];
          want_rankings[{evaluator, doc}][method] = ranks[i];
          ++i;
        }
        submission["ranking"] = r;
      } else {
        static const std::vector<std::string> cats = {"Accuracy", "LinguisticConventions", "Style"};
        static const std::vector<std::string> sevs = {"Neutral", "Minor", "Major", "Critical"};
        json anns = json::array();
        for (std::size_t k = 0, n = rng() % 4; k < n; ++k) {
          const auto& v = task.at("variants")[rng() % task.at("variants").size()];
          const auto len = v.at("length").get<std::size_t>();
          const std::size_t start = rng() % len;
          const std::size_t end = start + 1 + rng() % (len - start);
          json a = {{"label", v.at("label")},
                    {"start", start},
                    {"end", end},
                    {"category", cats[rng() % 3]},
                    {"note", random_sentence(rng, 2)}};
          scoring::ErrorAnnotation e{evaluator,
                                     doc,
                                     method_of[v.at("label").get<std::string>()],
                                     start,
                                     end,
                                     a.at("category").get<std::string>(),
                                     std::nullopt,
                                     std::nullopt,
                                     a.at("note").get<std::string>()};
          if (severity) {
            a["severity"] = sevs[rng() % 4];
            e.severity = scoring::parse_severity(a.at("severity").get<std::string>());
          }
          anns.push_back(a);
          want_annotations.push_back(e);
        }
        submission["annotations"] = anns;
      }
      const json q = random_questionnaire(rng);
      if (!q.empty()) submission["questionnaire"] = q;
      want_questionnaire[{evaluator, doc}] = q;

      const auto ack = client.Post("/campaigns/" + cid + "/results", submission.dump(), "application/json");
      if (!ack || ack->status != 200) {
        out.problems.push_back("submission rejected: " + (ack ? ack->body : std::string("no response")));
        return out;
      }
      if (mentions_any(ack->body, sim.method_ids)) out.leak = true;
      ++out.tasks;
    }
  }

  const auto exported = client.Get("/campaigns/" + cid + "/export");
  if (!exported || exported->status != 200) {
    out.problems.push_back("export failed");
    return out;
  }
  const json files = json::parse(exported->body);

  if (ranking) {
    std::map<std::pair<std::string, std::string>, std::map<std::string, int>> got;
    for (const auto& r : ranks::parse_rankings(files.at("rankings").get<std::string>())) {
      got[{r.evaluator_id, r.doc_id}] = r.ranking;
    }
    if (got != want_rankings) out.problems.push_back("exported rankings differ from submissions");
  } else {
    auto got = scoring::parse_annotations(files.at("annotations").get<std::string>());
    const auto key = [](const scoring::ErrorAnnotation& a) {
      return std::tie(a.evaluator_id, a.doc_id, a.method_id, a.start, a.end, a.category, a.note);
    };
    const auto by_key = [&](const auto& a, const auto& b) { return key(a) < key(b); };
    std::sort(got.begin(), got.end(), by_key);
    std::sort(want_annotations.begin(), want_annotations.end(), by_key);
    if (got != want_annotations) out.problems.push_back("exported annotations differ from submissions");
  }

  std::map<std::pair<std::string, std::string>, json> got_q;
  const auto q_lines = files.at("questionnaire").get<std::string>();
  std::size_t pos = q_lines.find('\n') + 1;  // header
  while (pos < q_lines.size()) {
    const auto nl = q_lines.find('\n', pos);
    const std::string line = q_lines.substr(pos, nl - pos);
    pos = nl + 1;
    std::vector<std::string> f;
    std::size_t a = 0;
    for (std::size_t b; (b = line.find('\t', a)) != std::string::npos; a = b + 1) f.push_back(line.substr(a, b - a));
    f.push_back(line.substr(a));
    json ans = json::object();
    if (f[3] != "-") ans["likert"] = std::stoi(f[3]);
    if (f[4] != "-" && !f[4].empty()) ans["text"] = f[4];
    got_q[{f[0], f[1]}][f[2]] = ans;
  }
  for (const auto& [k, q] : want_questionnaire) {
    const auto it = got_q.find(k);
    const json have = it == got_q.end() ? json::object() : it->second;
    if (have != q) out.problems.push_back("questionnaire differs for " + k.first + "/" + k.second);
  }

  // A fresh service over the same directory replays the same state.
  campaign::CampaignService reopened(dir.path(), sim.corpus);
  const auto again = reopened.export_campaign(cid);
  if (again.annotations != files.at("annotations") || again.rankings != files.at("rankings") ||
      again.questionnaire != files.at("questionnaire")) {
    out.problems.push_back("export after reload differs");
  }
  return out;
}

}  // namespace specmt::test
