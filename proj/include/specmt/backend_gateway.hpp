#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specmt/corpus_store.hpp"
#include "specmt/prompt_builder.hpp"

namespace specmt::gateway {

enum class AdapterKind { chat, mt };

/// Request body template plus the JSON pointer of the translated text in the
/// response. `{{prompt}}` expands to the full prompt and `{{payload}}` to the
/// payload alone, each as a JSON string literal.
struct Adapter {
  AdapterKind kind = AdapterKind::chat;
  std::string body_template;
  std::string response_pointer;
};

Adapter chat_adapter(std::string_view model = "gpt-4o");
Adapter mt_adapter(std::string_view source_language = "ja", std::string_view target_language = "en");

struct BackendConfig {
  std::string name;
  std::string endpoint;
  std::string auth_env;  // name of the env var holding a bearer token
  double timeout_seconds = 60.0;
  int max_concurrent = 1;
  int retries = 0;  // transport errors only, at most 2
  Adapter adapter = chat_adapter();
};

void validate(const BackendConfig& config);
BackendConfig parse_backend_config(std::string_view json);
BackendConfig load_backend_config(const std::filesystem::path& path);

struct ExchangeRecord {
  std::string request_fingerprint;
  std::string prompt_fingerprint;
  std::string mode;
  std::string prompt_text;
  std::string request_body;
  std::string response_text;
  std::int64_t latency_ms = 0;
  std::string timestamp;
  std::string backend;
  std::string variant_kind;

  friend bool operator==(const ExchangeRecord&, const ExchangeRecord&) = default;
};

std::string to_json_line(const ExchangeRecord& record);
ExchangeRecord parse_exchange(std::string_view json_line);

/// Provenance for the corpus variant produced by an exchange.
corpus::Provenance variant_provenance(const ExchangeRecord& record);

struct HttpRequest {
  std::string url;
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
  double timeout_seconds = 60.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Issues one POST. Throws Error(Errc::timeout) or Error(Errc::transport).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

std::unique_ptr<Transport> make_http_transport();

/// One file per exchange, named by request fingerprint.
class ReplayCache {
 public:
  explicit ReplayCache(std::filesystem::path dir);

  std::optional<ExchangeRecord> find(const std::string& request_fingerprint) const;
  void store(const ExchangeRecord& record);
  std::size_t size() const;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

enum class CachePolicy {
  replay_or_live,  // serve from cache, call the backend on a miss
  replay_only,     // offline: a miss is an error
};

std::string request_fingerprint(const BackendConfig& config, const prompt::RenderedPrompt& prompt);
std::string render_body(const Adapter& adapter, const prompt::RenderedPrompt& prompt);

/// Runs prompts against one backend. Each fingerprint reaches the network at
/// most once per Gateway instance; only the first output is ever kept.
class Gateway {
 public:
  Gateway(BackendConfig config, ReplayCache& cache, std::shared_ptr<Transport> transport,
          CachePolicy policy = CachePolicy::replay_or_live);

  ExchangeRecord execute_translation(const prompt::RenderedPrompt& prompt);
  /// Requires a spec_postedit prompt; the record is tagged llm-pe-spec.
  ExchangeRecord execute_post_edit(const prompt::RenderedPrompt& prompt);

  /// Runs all prompts with at most max_concurrent requests in flight.
  /// Results are returned in input order. The first failure is rethrown after
  /// all workers finish.
  std::vector<ExchangeRecord> execute_all(std::span<const prompt::RenderedPrompt> prompts);

  std::size_t live_calls() const;

 private:
  ExchangeRecord execute(const prompt::RenderedPrompt& prompt, std::string_view variant_kind);
  ExchangeRecord call_backend(const prompt::RenderedPrompt& prompt, const std::string& fingerprint,
                              std::string_view variant_kind);
  void acquire_slot();
  void release_slot();

  BackendConfig config_;
  ReplayCache& cache_;
  std::shared_ptr<Transport> transport_;
  CachePolicy policy_;

  mutable std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  std::size_t live_calls_ = 0;
  std::map<std::string, std::shared_future<ExchangeRecord>> pending_;
};

}  // namespace specmt::gateway
