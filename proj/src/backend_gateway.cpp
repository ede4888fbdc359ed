#include <httplib.h>

#include "specmt/backend_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <json.hpp>
#include <shared_mutex>
#include <thread>

#include "specmt/error.hpp"
#include "specmt/hash.hpp"
#include "specmt/io.hpp"

namespace specmt::gateway {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string variant_kind_for(const BackendConfig& config, prompt::Mode mode) {
  if (config.adapter.kind == AdapterKind::mt) return std::string(to_string(corpus::MethodKind::raw_mt));
  switch (mode) {
    case prompt::Mode::basic: return std::string(to_string(corpus::MethodKind::llm_basic));
    case prompt::Mode::spec_translate: return std::string(to_string(corpus::MethodKind::llm_spec));
    case prompt::Mode::spec_postedit: return std::string(to_string(corpus::MethodKind::llm_pe_spec));
  }
  return std::string(to_string(corpus::MethodKind::other));
}

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    // Split "scheme://host[:port]/path".
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
      throw Error(Errc::invalid_argument, "endpoint URL needs a scheme: " + request.url);
    }
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    const auto secs = std::chrono::duration<double>(request.timeout_seconds);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(secs);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);

    const auto start = std::chrono::steady_clock::now();
    auto result = client.Post(path, headers, request.body, "application/json");
    if (!result) {
      const auto elapsed = std::chrono::steady_clock::now() - start;
      const auto err = result.error();
      if (err == httplib::Error::ConnectionTimeout ||
          (err == httplib::Error::Read && elapsed >= timeout * 0.95)) {
        throw Error(Errc::timeout, "request to " + request.url + " timed out after " +
                                       std::to_string(request.timeout_seconds) + " s");
      }
      throw Error(Errc::transport, "request to " + request.url + " failed: " + httplib::to_string(err));
    }
    return {result->status, result->body};
  }
};

}  // namespace

Adapter chat_adapter(std::string_view model) {
  return {AdapterKind::chat,
          R"({"model": )" + json(std::string(model)).dump() +
              R"(, "messages": [{"role": "user", "content": {{prompt}}}]})",
          "/choices/0/message/content"};
}

Adapter mt_adapter(std::string_view source_language, std::string_view target_language) {
  return {AdapterKind::mt,
          R"({"q": {{payload}}, "source": )" + json(std::string(source_language)).dump() +
              R"(, "target": )" + json(std::string(target_language)).dump() + R"(, "format": "text"})",
          "/data/translations/0/translatedText"};
}

void validate(const BackendConfig& config) {
  if (config.name.empty()) throw Error(Errc::invalid_argument, "backend name is empty");
  if (config.endpoint.find("://") == std::string::npos) {
    throw Error(Errc::invalid_argument, "backend endpoint must be an absolute URL");
  }
  if (!(config.timeout_seconds > 0)) throw Error(Errc::invalid_argument, "timeout must be > 0");
  if (config.max_concurrent < 1) throw Error(Errc::invalid_argument, "max_concurrent must be >= 1");
  if (config.retries < 0 || config.retries > 2) throw Error(Errc::invalid_argument, "retries must be 0..2");
  if (config.adapter.body_template.empty()) throw Error(Errc::invalid_argument, "adapter body template is empty");
  if (config.adapter.response_pointer.empty() || config.adapter.response_pointer.front() != '/') {
    throw Error(Errc::invalid_argument, "adapter response pointer must start with '/'");
  }
}

BackendConfig parse_backend_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("backend config: ") + e.what());
  }
  try {
    BackendConfig c;
    c.name = j.at("name").get<std::string>();
    c.endpoint = j.at("endpoint").get<std::string>();
    c.auth_env = j.value("auth_env", "");
    c.timeout_seconds = j.value("timeout_seconds", 60.0);
    c.max_concurrent = j.value("max_concurrent", 1);
    c.retries = j.value("retries", 0);
    if (j.contains("adapter")) {
      const auto& a = j.at("adapter");
      const std::string kind = a.value("kind", "chat");
      if (kind == "chat") {
        c.adapter = chat_adapter(a.value("model", "gpt-4o"));
      } else if (kind == "mt") {
        c.adapter = mt_adapter(a.value("source", "ja"), a.value("target", "en"));
      } else {
        throw Error(Errc::parse, "backend config: unknown adapter kind '" + kind + "'");
      }
      if (a.contains("body_template")) c.adapter.body_template = a.at("body_template").get<std::string>();
      if (a.contains("response_pointer")) c.adapter.response_pointer = a.at("response_pointer").get<std::string>();
    }
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("backend config: ") + e.what());
  }
}

BackendConfig load_backend_config(const fs::path& path) {
  return parse_backend_config(io::read_file(path));
}

std::string to_json_line(const ExchangeRecord& r) {
  json j = {
      {"request_fingerprint", r.request_fingerprint},
      {"prompt_fingerprint", r.prompt_fingerprint},
      {"mode", r.mode},
      {"prompt_text", r.prompt_text},
      {"request_body", r.request_body},
      {"response_text", r.response_text},
      {"latency_ms", r.latency_ms},
      {"timestamp", r.timestamp},
      {"backend", r.backend},
      {"variant_kind", r.variant_kind},
  };
  return j.dump();
}

ExchangeRecord parse_exchange(std::string_view line) {
  try {
    const json j = json::parse(line);
    ExchangeRecord r;
    r.request_fingerprint = j.at("request_fingerprint").get<std::string>();
    r.prompt_fingerprint = j.at("prompt_fingerprint").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.prompt_text = j.at("prompt_text").get<std::string>();
    r.request_body = j.value("request_body", "");
    r.response_text = j.at("response_text").get<std::string>();
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.timestamp = j.value("timestamp", "");
    r.backend = j.at("backend").get<std::string>();
    r.variant_kind = j.value("variant_kind", "");
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("exchange record: ") + e.what());
  }
}

corpus::Provenance variant_provenance(const ExchangeRecord& record) {
  return {record.backend, record.prompt_fingerprint, record.timestamp};
}

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

ReplayCache::ReplayCache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

std::optional<ExchangeRecord> ReplayCache::find(const std::string& fingerprint) const {
  std::shared_lock lock(mutex_);
  const auto path = dir_ / (fingerprint + ".jsonl");
  if (!fs::exists(path)) return std::nullopt;
  const auto lines = io::lines(io::read_file(path));
  if (lines.empty()) throw Error(Errc::parse, "empty replay record " + path.string());
  auto record = parse_exchange(lines.front());
  if (record.request_fingerprint != fingerprint) {
    throw Error(Errc::parse, "replay record " + path.string() + " is keyed by another fingerprint");
  }
  return record;
}

void ReplayCache::store(const ExchangeRecord& record) {
  if (record.response_text.empty()) throw Error(Errc::empty_response, "refusing to cache an empty response");
  std::unique_lock lock(mutex_);
  io::write_file_atomic(dir_ / (record.request_fingerprint + ".jsonl"), to_json_line(record) + "\n");
}

std::size_t ReplayCache::size() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() == ".jsonl") ++n;
  }
  return n;
}

std::string render_body(const Adapter& adapter, const prompt::RenderedPrompt& prompt) {
  std::string body = replace_all(adapter.body_template, "{{prompt}}", json(prompt.text).dump());
  body = replace_all(body, "{{payload}}", json(prompt.payload).dump());
  if (!json::accept(body)) throw Error(Errc::invalid_argument, "adapter body template does not render to JSON");
  return body;
}

std::string request_fingerprint(const BackendConfig& config, const prompt::RenderedPrompt& prompt) {
  std::string buf = "specmt-request-v1\n";
  buf += config.name + '\n';
  buf += config.adapter.body_template + '\n';
  buf += config.adapter.response_pointer + '\n';
  buf += prompt.fingerprint;
  return sha256_hex(buf);
}

Gateway::Gateway(BackendConfig config, ReplayCache& cache, std::shared_ptr<Transport> transport,
                 CachePolicy policy)
    : config_(std::move(config)), cache_(cache), transport_(std::move(transport)), policy_(policy) {
  validate(config_);
}

std::size_t Gateway::live_calls() const {
  std::lock_guard lock(mutex_);
  return live_calls_;
}

void Gateway::acquire_slot() {
  std::unique_lock lock(mutex_);
  slot_free_.wait(lock, [this] { return in_flight_ < config_.max_concurrent; });
  ++in_flight_;
  ++live_calls_;
}

void Gateway::release_slot() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  slot_free_.notify_one();
}

ExchangeRecord Gateway::call_backend(const prompt::RenderedPrompt& prompt, const std::string& fingerprint,
                                     std::string_view variant_kind) {
  if (!transport_) throw Error(Errc::transport, "no transport configured");
  HttpRequest request;
  request.url = config_.endpoint;
  request.body = render_body(config_.adapter, prompt);
  request.timeout_seconds = config_.timeout_seconds;
  if (!config_.auth_env.empty()) {
    if (const char* token = std::getenv(config_.auth_env.c_str()); token && *token) {
      request.headers.emplace_back("Authorization", std::string("Bearer ") + token);
    }
  }

  HttpResponse response;
  std::int64_t latency_ms = 0;
  for (int attempt = 0;; ++attempt) {
    acquire_slot();
    const auto start = std::chrono::steady_clock::now();
    try {
      response = transport_->post(request);
      release_slot();
    } catch (const Error& e) {
      release_slot();
      if (e.code() == Errc::transport && attempt < config_.retries) continue;
      throw;
    } catch (...) {
      release_slot();
      throw;
    }
    latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    break;
  }

  if (response.status < 200 || response.status >= 300) {
    throw Error(Errc::http_status, config_.name + " returned HTTP " + std::to_string(response.status));
  }
  std::string text;
  try {
    const json body = json::parse(response.body);
    const json& node = body.at(json::json_pointer(config_.adapter.response_pointer));
    if (!node.is_string()) throw Error(Errc::empty_response, config_.name + ": response field is not a string");
    text = node.get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::empty_response, config_.name + ": unusable response body (" + e.what() + ")");
  }
  if (text.empty()) throw Error(Errc::empty_response, config_.name + " returned an empty translation");

  ExchangeRecord record;
  record.request_fingerprint = fingerprint;
  record.prompt_fingerprint = prompt.fingerprint;
  record.mode = std::string(to_string(prompt.mode));
  record.prompt_text = prompt.text;
  record.request_body = request.body;
  record.response_text = std::move(text);
  record.latency_ms = latency_ms;
  record.timestamp = utc_now();
  record.backend = config_.name;
  record.variant_kind = std::string(variant_kind);
  cache_.store(record);
  return record;
}

ExchangeRecord Gateway::execute(const prompt::RenderedPrompt& prompt, std::string_view variant_kind) {
  const std::string fingerprint = request_fingerprint(config_, prompt);
  std::promise<ExchangeRecord> promise;
  std::shared_future<ExchangeRecord> future;
  {
    std::lock_guard lock(mutex_);
    if (const auto it = pending_.find(fingerprint); it != pending_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      pending_.emplace(fingerprint, future);
      future = {};
    }
  }
  if (future.valid()) return future.get();

  try {
    auto cached = cache_.find(fingerprint);
    if (!cached) {
      if (policy_ == CachePolicy::replay_only) {
        throw Error(Errc::not_found, "replay cache has no exchange for fingerprint " + fingerprint);
      }
      cached = call_backend(prompt, fingerprint, variant_kind);
    }
    promise.set_value(*cached);
    return *cached;
  } catch (...) {
    promise.set_exception(std::current_exception());
    throw;
  }
}

ExchangeRecord Gateway::execute_translation(const prompt::RenderedPrompt& prompt) {
  return execute(prompt, variant_kind_for(config_, prompt.mode));
}

ExchangeRecord Gateway::execute_post_edit(const prompt::RenderedPrompt& prompt) {
  if (prompt.mode != prompt::Mode::spec_postedit) {
    throw Error(Errc::mode_mismatch, "post-edit requires a spec_postedit prompt, got " +
                                         std::string(to_string(prompt.mode)));
  }
  return execute(prompt, to_string(corpus::MethodKind::llm_pe_spec));
}

std::vector<ExchangeRecord> Gateway::execute_all(std::span<const prompt::RenderedPrompt> prompts) {
  std::vector<ExchangeRecord> results(prompts.size());
  std::vector<std::exception_ptr> errors(prompts.size());
  std::mutex next_mutex;
  std::size_t next = 0;
  const auto worker = [&] {
    while (true) {
      std::size_t i;
      {
        std::lock_guard lock(next_mutex);
        if (next == prompts.size()) return;
        i = next++;
      }
      try {
        results[i] = prompts[i].mode == prompt::Mode::spec_postedit ? execute_post_edit(prompts[i])
                                                                    : execute_translation(prompts[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers =
      std::min<std::size_t>(prompts.size(), static_cast<std::size_t>(config_.max_concurrent));
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace specmt::gateway
