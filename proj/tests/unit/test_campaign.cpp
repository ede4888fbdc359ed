#include <doctest.h>

#include <httplib.h>

#include <json.hpp>
#include <set>

#include "campaign_sim.hpp"
#include "specmt/campaign.hpp"
#include "specmt/campaign_http.hpp"
#include "specmt/error.hpp"
#include "support.hpp"

using namespace specmt;
using namespace specmt::campaign;
using nlohmann::json;

namespace {

std::shared_ptr<const corpus::Corpus> small_corpus() {
  corpus::CorpusStore store("");
  store.ingest_text("原文一", "ja", "d1");
  store.ingest_text("原文二", "ja", "d2");
  store.ingest_text("原文三", "ja", "d3");
  store.add_variant("d1", "official", "Official one.", {});
  store.add_variant("d1", "google", "Google one.", {});
  store.add_variant("d1", "gpt_spec", "Spec one.", {});
  store.add_variant("d2", "official", "Official two.", {});
  store.add_variant("d2", "google", "Google two.", {});
  store.add_variant("d3", "official", "Only one variant.", {});
  return store.snapshot();
}

std::string api_code(auto&& fn) {
  try {
    fn();
  } catch (const ServiceError& e) {
    return e.api_code();
  }
  FAIL("expected a service error");
  return {};
}

CampaignConfig ranking_config() {
  CampaignConfig c;
  c.campaign_id = "c1";
  c.kind = TaskKind::ranking;
  c.roster = {"alice", "bob"};
  c.seed = 17;
  return c;
}

json rank_all(const json& task) {
  json r = json::object();
  int k = 1;
  for (const auto& v : task.at("variants")) r[v.at("label").get<std::string>()] = k++;
  return {{"task_id", task.at("task_id")}, {"evaluator", task.at("evaluator")}, {"ranking", r}};
}

}  // namespace

TEST_CASE("blinding map is a seeded pure permutation") {
  const std::vector<std::string> methods = {"official", "google", "gpt_basic", "gpt_spec", "gpt_pe_spec"};
  const auto a = blinding_map(1, "c", "d", "e", methods);
  CHECK(a.size() == 5);
  CHECK(a[0].label == "A");
  CHECK(a[4].label == "E");
  std::set<std::string> ms;
  for (const auto& la : a) ms.insert(la.method_id);
  CHECK(ms.size() == 5);
  CHECK(blinding_map(1, "c", "d", "e", methods)[2].method_id == a[2].method_id);

  std::set<std::string> orders;
  for (int e = 0; e < 30; ++e) {
    std::string o;
    for (const auto& la : blinding_map(1, "c", "d", "e" + std::to_string(e), methods)) o += la.method_id + ",";
    orders.insert(o);
  }
  CHECK(orders.size() > 10);  // evaluators see different orders

  const auto fixed_order = blinding_map(1, "c", "d", "e", methods, false);
  for (std::size_t i = 0; i < methods.size(); ++i) CHECK(fixed_order[i].method_id == methods[i]);
  CHECK(label_for(25) == "Z");
}

TEST_CASE("config JSON round trip") {
  auto c = ranking_config();
  c.docs = {"d1"};
  c.allow_revision = true;
  const auto back = config_from_json(to_json(c));
  CHECK(back.campaign_id == "c1");
  CHECK(back.roster == c.roster);
  CHECK(back.docs == c.docs);
  CHECK(back.allow_revision);
  CHECK(parse_task_kind("error_annotation") == TaskKind::error_annotation);
}

TEST_CASE("ranking campaign life cycle") {
  CampaignService svc("", small_corpus());
  const auto summary = svc.create_campaign(ranking_config());
  CHECK(summary.at("documents") == 2);  // d3 has a single variant
  CHECK(summary.at("tasks") == 4);

  auto task = svc.next_task("c1", "alice");
  REQUIRE(task);
  CHECK(task->at("kind") == "ranking");
  const auto dumped = task->dump();
  for (const auto* m : {"official", "google", "gpt_spec"}) CHECK(dumped.find(m) == std::string::npos);
  CHECK_FALSE(task->contains("source"));

  const auto ack = svc.submit_result("c1", rank_all(*task));
  CHECK(ack.at("duplicate") == false);
  CHECK(svc.submit_result("c1", rank_all(*task)).at("duplicate") == true);
  auto reordered = rank_all(*task);
  auto& r = reordered.at("ranking");
  const auto first = r.begin().key();
  const auto last = (--r.end()).key();
  std::swap(r[first], r[last]);
  CHECK(api_code([&] { svc.submit_result("c1", reordered); }) == "duplicate_submission");

  CHECK(svc.status("c1").at("complete") == 1);
  while (auto t = svc.next_task("c1", "alice")) svc.submit_result("c1", rank_all(*t));
  CHECK_FALSE(svc.next_task("c1", "alice"));
  CHECK(svc.next_task("c1", "bob"));

  const auto files = svc.export_campaign("c1");
  const auto records = ranks::parse_rankings(files.rankings);
  CHECK(records.size() == 2);
  for (const auto& rec : records) CHECK(rec.evaluator_id == "alice");
}

TEST_CASE("ranking submission validation") {
  CampaignService svc("", small_corpus());
  svc.create_campaign(ranking_config());
  const auto task = *svc.next_task("c1", "alice");
  auto sub = rank_all(task);
  const auto label = sub.at("ranking").begin().key();

  auto dup_rank = sub;
  for (auto& [k, v] : dup_rank.at("ranking").items()) v = 1;
  CHECK(api_code([&] { svc.submit_result("c1", dup_rank); }) == "invalid_permutation");
  auto missing = sub;
  missing.at("ranking").erase(label);
  CHECK(api_code([&] { svc.submit_result("c1", missing); }) == "invalid_permutation");
  auto unknown = sub;
  unknown.at("ranking")["Q"] = 9;
  CHECK(api_code([&] { svc.submit_result("c1", unknown); }) == "unknown_label");
  auto wrong_kind = sub;
  wrong_kind.erase("ranking");
  wrong_kind["annotations"] = json::array();
  CHECK(api_code([&] { svc.submit_result("c1", wrong_kind); }) == "wrong_task_kind");
  auto stranger = sub;
  stranger["evaluator"] = "mallory";
  CHECK(api_code([&] { svc.submit_result("c1", stranger); }) == "unknown_evaluator");
  auto other_task = sub;
  other_task["task_id"] = "t-0000";
  CHECK(api_code([&] { svc.submit_result("c1", other_task); }) == "unknown_task");
  CHECK(api_code([&] { svc.submit_result("nope", sub); }) == "unknown_campaign");
  CHECK(api_code([&] { svc.submit_result("c1", json::array()); }) == "invalid_payload");
  auto bad_q = sub;
  bad_q["questionnaire"] = {{"q1", {{"likert", 6}}}};
  CHECK(api_code([&] { svc.submit_result("c1", bad_q); }) == "invalid_questionnaire");
}

TEST_CASE("campaign creation errors") {
  CampaignService svc("", small_corpus());
  auto c = ranking_config();
  c.roster.clear();
  CHECK(api_code([&] { svc.create_campaign(c); }) == "empty_roster");
  c = ranking_config();
  c.docs = {"d3"};
  CHECK(api_code([&] { svc.create_campaign(c); }) == "too_few_variants");
  svc.create_campaign(ranking_config());
  CHECK(api_code([&] { svc.create_campaign(ranking_config()); }) == "duplicate_campaign");
  auto gen = ranking_config();
  gen.campaign_id.clear();
  const auto id = svc.create_campaign(gen).at("campaign_id").get<std::string>();
  CHECK(id.rfind("c-", 0) == 0);
}

TEST_CASE("annotation campaign validation") {
  CampaignService svc("", small_corpus());
  CampaignConfig c;
  c.campaign_id = "a1";
  c.kind = TaskKind::error_annotation;
  c.roster = {"alice"};
  c.severity_enabled = true;
  svc.create_campaign(c);
  const auto task = *svc.next_task("a1", "alice");
  CHECK(task.at("source").at("text").get<std::string>().rfind("原文", 0) == 0);
  CHECK(task.at("severity_enabled") == true);
  const auto& v = task.at("variants")[0];
  const std::size_t len = v.at("length");
  const json base = {{"task_id", task.at("task_id")}, {"evaluator", "alice"}};

  const auto with = [&](json a) {
    json s = base;
    s["annotations"] = json::array({a});
    return s;
  };
  const json good = {{"label", v.at("label")}, {"start", 0}, {"end", len}, {"category", "style"}, {"severity", "major"}};
  auto past_end = good;
  past_end["end"] = len + 1;
  CHECK(api_code([&] { svc.submit_result("a1", with(past_end)); }) == "span_out_of_bounds");
  auto bad_cat = good;
  bad_cat["category"] = "Fluency";
  CHECK(api_code([&] { svc.submit_result("a1", with(bad_cat)); }) == "invalid_category");
  auto no_sev = good;
  no_sev.erase("severity");
  CHECK(api_code([&] { svc.submit_result("a1", with(no_sev)); }) == "invalid_severity");
  auto bad_label = good;
  bad_label["label"] = "Z";
  CHECK(api_code([&] { svc.submit_result("a1", with(bad_label)); }) == "unknown_label");
  CHECK(svc.submit_result("a1", with(good)).at("status") == "accepted");

  const auto anns = scoring::parse_annotations(svc.export_campaign("a1").annotations);
  REQUIRE(anns.size() == 1);
  CHECK(anns[0].category == "Style");
  CHECK(anns[0].severity == scoring::Severity::major);
  CHECK(anns[0].end == len);
}

TEST_CASE("revisions when allowed") {
  CampaignService svc("", small_corpus());
  auto c = ranking_config();
  c.allow_revision = true;
  svc.create_campaign(c);
  const auto task = *svc.next_task("c1", "alice");
  svc.submit_result("c1", rank_all(task));
  auto changed = rank_all(task);
  auto& r = changed.at("ranking");
  const auto first = r.begin().key();
  const auto last = (--r.end()).key();
  std::swap(r[first], r[last]);
  CHECK(svc.submit_result("c1", changed).at("revision") == true);
}

TEST_CASE("event log survives restarts and a torn tail") {
  test::TempDir dir;
  const auto corpus = small_corpus();
  std::string before;
  {
    CampaignService svc(dir.path(), corpus);
    svc.create_campaign(ranking_config());
    while (auto t = svc.next_task("c1", "alice")) svc.submit_result("c1", rank_all(*t));
    before = svc.export_campaign("c1").rankings;
  }
  {
    std::ofstream tail(dir / "c1/events.jsonl", std::ios::app);
    tail << R"({"seq": 99, "type": "subm)";
  }
  CampaignService again(dir.path(), corpus);
  CHECK(again.campaign_ids() == std::vector<std::string>{"c1"});
  CHECK(again.export_campaign("c1").rankings == before);
  CHECK_FALSE(again.next_task("c1", "alice"));
  CHECK(again.next_task("c1", "bob"));
}

TEST_CASE("snapshots every 64 events") {
  corpus::CorpusStore store("");
  for (int d = 0; d < 40; ++d) {
    const auto id = "d" + std::to_string(d);
    store.ingest_text("原文" + id, "ja", id);
    store.add_variant(id, "official", "One " + id, {});
    store.add_variant(id, "google", "Two " + id, {});
  }
  test::TempDir dir;
  std::string before;
  {
    CampaignService svc(dir.path(), store.snapshot());
    svc.create_campaign(ranking_config());
    for (const auto* e : {"alice", "bob"}) {
      while (auto t = svc.next_task("c1", e)) svc.submit_result("c1", rank_all(*t));
    }
    before = svc.export_campaign("c1").rankings;
  }
  CHECK(std::filesystem::exists(dir / "c1/snapshot.json"));
  CampaignService again(dir.path(), store.snapshot());
  CHECK(again.export_campaign("c1").rankings == before);
}

TEST_CASE("reopening against a different corpus is refused") {
  test::TempDir dir;
  {
    CampaignService svc(dir.path(), small_corpus());
    svc.create_campaign(ranking_config());
  }
  corpus::CorpusStore other("");
  other.ingest_text("原文一", "ja", "d1");
  other.add_variant("d1", "official", "Changed text.", {});
  other.add_variant("d1", "google", "Google one.", {});
  CHECK_THROWS_AS(CampaignService(dir.path(), other.snapshot()), Error);
}

TEST_CASE("HTTP API") {
  test::TempDir dir;
  test::ServedCampaigns served(dir.path(), small_corpus());
  httplib::Client client("127.0.0.1", served.port());

  auto res = client.Post("/campaigns", R"({"campaign_id": "h1", "kind": "ranking", "roster": ["alice"]})",
                         "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");

  res = client.Post("/campaigns", "{not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body).at("error").at("code") == "invalid_json");

  res = client.Get("/campaigns");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body.find("h1") != std::string::npos);

  res = client.Get("/campaigns/h1/tasks/next");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(json::parse(res->body).at("error").at("code") == "missing_evaluator");

  res = client.Get("/campaigns/zzz/tasks/next?evaluator=alice");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(json::parse(res->body).at("error").at("code") == "unknown_campaign");

  res = client.Get("/campaigns/h1/tasks/next?evaluator=alice");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const auto task = json::parse(res->body);
  res = client.Post("/campaigns/h1/results", rank_all(task).dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);

  auto bad = rank_all(task);
  auto& br = bad.at("ranking");
  const auto bf = br.begin().key();
  const auto bl = (--br.end()).key();
  std::swap(br[bf], br[bl]);
  res = client.Post("/campaigns/h1/results", bad.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);  // already submitted, different payload
  CHECK(json::parse(res->body).at("error").at("code") == "duplicate_submission");

  res = client.Get("/campaigns/h1");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("complete") == 1);

  res = client.Get("/campaigns/h1/export");
  REQUIRE(res);
  CHECK(json::parse(res->body).at("rankings").get<std::string>().find("alice\td") != std::string::npos);

  CHECK(http_status_for(Errc::not_found) == 404);
  CHECK(http_status_for(Errc::duplicate) == 409);
  CHECK(http_status_for(Errc::invalid_argument) == 400);
  CHECK(http_status_for(Errc::io) == 500);
}

TEST_CASE("randomized campaigns over HTTP") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto out = test::simulate_campaign(seed);
    for (const auto& p : out.problems) MESSAGE(p);
    CHECK_FALSE(out.leak);
    CHECK(out.problems.empty());
    CHECK(out.tasks > 0);
  }
}
