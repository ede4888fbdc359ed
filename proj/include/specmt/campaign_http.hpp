#pragma once

#include <memory>
#include <string>

#include "specmt/campaign.hpp"

namespace specmt::campaign {

/// JSON API over a CampaignService:
///   POST /campaigns
///   GET  /campaigns/{id}
///   GET  /campaigns/{id}/tasks/next?evaluator=E   (204 when nothing is left)
///   POST /campaigns/{id}/results
///   GET  /campaigns/{id}/export                    (administrative)
/// Failures answer {"error": {"code": ..., "message": ...}}.
class HttpServer {
 public:
  explicit HttpServer(CampaignService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to `port`, or to a free port when `port` is 0. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for an error category.
int http_status_for(Errc code);

}  // namespace specmt::campaign
