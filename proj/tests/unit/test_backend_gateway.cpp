#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <json.hpp>
#include <thread>

#include "specmt/backend_gateway.hpp"
#include "specmt/error.hpp"
#include "support.hpp"

using namespace specmt;
using namespace specmt::gateway;
using nlohmann::json;

namespace {

// Local stand-in for a chat-completions endpoint. The reply is the prompt's
// last line upper-cased, so outputs are checkable without a model.
class FakeBackend {
 public:
  FakeBackend() {
    server_.Post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      last_auth_ = req.get_header_value("Authorization");
      if (fail_first_.exchange(false)) {
        res.status = 503;
        return;
      }
      const int now = ++in_flight_;
      for (int seen = max_in_flight_; now > seen && !max_in_flight_.compare_exchange_weak(seen, now);) {
      }
      if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
      --in_flight_;
      const auto body = json::parse(req.body);
      std::string prompt = body.at("messages").at(0).at("content").get<std::string>();
      std::string reply = prompt.substr(prompt.rfind('\n') + 1);
      for (auto& c : reply) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (empty_reply_) reply.clear();
      res.set_content(json{{"choices", {{{"message", {{"content", reply}}}}}}}.dump(), "application/json");
    });
    server_.Post("/mt", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      last_body_ = req.body;
      const auto body = json::parse(req.body);
      res.set_content(json{{"data", {{"translations", {{{"translatedText", "MT:" + body.at("q").get<std::string>()}}}}}}}
                          .dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeBackend() {
    server_.stop();
    thread_.join();
  }

  std::string url(std::string_view path) const { return "http://127.0.0.1:" + std::to_string(port_) + std::string(path); }

  std::atomic<int> hits_{0};
  std::atomic<bool> fail_first_{false};
  std::atomic<int> delay_ms_{0};
  std::atomic<bool> empty_reply_{false};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::string last_auth_;
  std::string last_body_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

prompt::RenderedPrompt basic_prompt(const std::string& payload) {
  prompt::PromptRequest r;
  r.payload_text = payload;
  return prompt::build_prompt(r);
}

BackendConfig chat_config(const FakeBackend& fb) {
  BackendConfig c;
  c.name = "fake-chat";
  c.endpoint = fb.url("/chat");
  c.timeout_seconds = 5;
  return c;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io;
}

}  // namespace

TEST_CASE("backend config parsing and validation") {
  const auto c = parse_backend_config(R"({"name": "gpt", "endpoint": "https://api.example.com/v1/chat/completions",
      "auth_env": "OPENAI_API_KEY", "timeout_seconds": 30, "max_concurrent": 4, "retries": 2,
      "adapter": {"kind": "chat", "model": "gpt-4o"}})");
  CHECK(c.max_concurrent == 4);
  CHECK(c.adapter.response_pointer == "/choices/0/message/content");
  const auto mt = parse_backend_config(R"({"name": "g", "endpoint": "http://x/t", "adapter": {"kind": "mt"}})");
  CHECK(mt.adapter.kind == AdapterKind::mt);
  CHECK(code_of([] { parse_backend_config("{"); }) == Errc::parse);
  CHECK(code_of([] { parse_backend_config(R"({"endpoint": "http://x"})"); }) == Errc::parse);
  CHECK(code_of([] { parse_backend_config(R"({"name": "a", "endpoint": "x"})"); }) == Errc::invalid_argument);
  CHECK(code_of([] { parse_backend_config(R"({"name": "a", "endpoint": "http://x", "retries": 3})"); }) ==
        Errc::invalid_argument);
  CHECK(code_of([] { parse_backend_config(R"({"name": "a", "endpoint": "http://x", "adapter": {"kind": "fax"}})"); }) ==
        Errc::parse);
}

TEST_CASE("body rendering escapes the prompt as a JSON string") {
  const auto p = basic_prompt("quote \" and \\ and\ttab");
  const auto body = json::parse(render_body(chat_adapter("m"), p));
  CHECK(body.at("messages").at(0).at("content") == p.text);
  CHECK(json::parse(render_body(mt_adapter(), p)).at("q") == p.payload);
  Adapter broken{AdapterKind::chat, "{\"x\": {{prompt}}", "/x"};
  CHECK(code_of([&] { render_body(broken, p); }) == Errc::invalid_argument);
}

TEST_CASE("exchange records round-trip") {
  ExchangeRecord r{"rf", "pf", "basic", "prompt\ntext", "{}", "réponse", 12, "2026-01-01T00:00:00Z", "b", "llm-basic"};
  CHECK(parse_exchange(to_json_line(r)) == r);
  CHECK(code_of([] { parse_exchange("not json"); }) == Errc::parse);
}

TEST_CASE("live call, cache write, and offline replay") {
  FakeBackend fb;
  test::TempDir dir;
  ReplayCache cache(dir / "cache");
  const auto p = basic_prompt("hello world");
  ExchangeRecord first;
  {
    Gateway gw(chat_config(fb), cache, make_http_transport());
    first = gw.execute_translation(p);
    CHECK(first.response_text == "HELLO WORLD");
    CHECK(first.variant_kind == "llm-basic");
    CHECK(gw.live_calls() == 1);
    CHECK(gw.execute_translation(p) == first);
    CHECK(gw.live_calls() == 1);
  }
  CHECK(cache.size() == 1);
  CHECK(fb.hits_ == 1);

  // A replay-only gateway with no transport reproduces the stored output.
  Gateway offline(chat_config(fb), cache, nullptr, CachePolicy::replay_only);
  CHECK(offline.execute_translation(p) == first);
  CHECK(code_of([&] { offline.execute_translation(basic_prompt("unseen")); }) == Errc::not_found);
  CHECK(fb.hits_ == 1);
}

TEST_CASE("request fingerprint covers backend and adapter") {
  FakeBackend fb;
  const auto p = basic_prompt("x");
  auto a = chat_config(fb);
  auto b = a;
  b.name = "other";
  CHECK(request_fingerprint(a, p) != request_fingerprint(b, p));
  b = a;
  b.adapter = chat_adapter("gpt-4o-mini");
  CHECK(request_fingerprint(a, p) != request_fingerprint(b, p));
  b = a;
  b.timeout_seconds = 1;  // transport settings do not change the request
  CHECK(request_fingerprint(a, p) == request_fingerprint(b, p));
}

TEST_CASE("bearer token from the configured environment variable") {
  FakeBackend fb;
  test::TempDir dir;
  ReplayCache cache(dir.path());
  auto cfg = chat_config(fb);
  cfg.auth_env = "SPECMT_TEST_TOKEN";
  ::setenv("SPECMT_TEST_TOKEN", "sekrit", 1);
  Gateway gw(cfg, cache, make_http_transport());
  gw.execute_translation(basic_prompt("a"));
  CHECK(fb.last_auth_ == "Bearer sekrit");
  ::unsetenv("SPECMT_TEST_TOKEN");
}

TEST_CASE("HTTP errors, empty responses and timeouts") {
  FakeBackend fb;
  test::TempDir dir;
  ReplayCache cache(dir.path());

  fb.fail_first_ = true;
  Gateway gw(chat_config(fb), cache, make_http_transport());
  CHECK(code_of([&] { gw.execute_translation(basic_prompt("a")); }) == Errc::http_status);
  // The failure is remembered for this fingerprint; nothing was cached.
  CHECK(code_of([&] { gw.execute_translation(basic_prompt("a")); }) == Errc::http_status);
  CHECK(cache.size() == 0);

  fb.empty_reply_ = true;
  CHECK(code_of([&] { gw.execute_translation(basic_prompt("b")); }) == Errc::empty_response);
  fb.empty_reply_ = false;

  fb.delay_ms_ = 1500;
  auto slow = chat_config(fb);
  slow.timeout_seconds = 0.3;
  Gateway impatient(slow, cache, make_http_transport());
  CHECK(code_of([&] { impatient.execute_translation(basic_prompt("c")); }) == Errc::timeout);
  fb.delay_ms_ = 0;

  auto nowhere = chat_config(fb);
  nowhere.endpoint = "http://127.0.0.1:1/chat";
  nowhere.retries = 2;
  Gateway dead(nowhere, cache, make_http_transport());
  CHECK(code_of([&] { dead.execute_translation(basic_prompt("d")); }) == Errc::transport);
  CHECK(dead.live_calls() == 3);
}

TEST_CASE("post-edit requires a post-edit prompt and is tagged") {
  FakeBackend fb;
  test::TempDir dir;
  ReplayCache cache(dir.path());
  Gateway gw(chat_config(fb), cache, make_http_transport());
  CHECK(code_of([&] { gw.execute_post_edit(basic_prompt("x")); }) == Errc::mode_mismatch);
  spec::SpecDocument s;
  s.purpose = "p";
  s.audience = "a";
  s.style_register_tone = "s";
  const auto pe = prompt::build_prompt({prompt::Mode::spec_postedit, s, "Acme", "machine output", false});
  CHECK(gw.execute_post_edit(pe).variant_kind == "llm-pe-spec");
}

TEST_CASE("MT adapter sends only the payload") {
  FakeBackend fb;
  test::TempDir dir;
  ReplayCache cache(dir.path());
  BackendConfig cfg;
  cfg.name = "fake-mt";
  cfg.endpoint = fb.url("/mt");
  cfg.adapter = mt_adapter("ja", "en");
  Gateway gw(cfg, cache, make_http_transport());
  const auto r = gw.execute_translation(basic_prompt("原文"));
  CHECK(r.response_text == "MT:原文");
  CHECK(r.variant_kind == "raw-mt");
  CHECK(fb.last_body_.find("Please translate") == std::string::npos);
}

TEST_CASE("execute_all keeps input order, bounds concurrency, and dedupes") {
  FakeBackend fb;
  fb.delay_ms_ = 20;
  test::TempDir dir;
  ReplayCache cache(dir.path());
  auto cfg = chat_config(fb);
  cfg.max_concurrent = 3;
  Gateway gw(cfg, cache, make_http_transport());
  std::vector<prompt::RenderedPrompt> prompts;
  for (int i = 0; i < 12; ++i) prompts.push_back(basic_prompt("doc " + std::to_string(i % 8)));
  const auto out = gw.execute_all(prompts);
  REQUIRE(out.size() == 12);
  for (int i = 0; i < 12; ++i) CHECK(out[static_cast<std::size_t>(i)].response_text == "DOC " + std::to_string(i % 8));
  CHECK(gw.live_calls() == 8);
  CHECK(fb.hits_ == 8);
  CHECK(fb.max_in_flight_ <= 3);
}
