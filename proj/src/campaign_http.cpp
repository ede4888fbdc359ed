#include <httplib.h>

#include "specmt/campaign_http.hpp"

#include <json.hpp>

namespace specmt::campaign {
using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

// Runs a handler, translating exceptions into structured errors.
template <typename F>
httplib::Server::Handler guarded(F&& f) {
  return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, http_status_for(e.code()), e.api_code(), e.what());
    } catch (const Error& e) {
      send_error(res, http_status_for(e.code()), std::string(to_string(e.code())), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "invalid_json", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal_error", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(Errc::parse, "invalid_json", std::string("request body: ") + e.what());
  }
}

}  // namespace

int http_status_for(Errc code) {
  switch (code) {
    case Errc::not_found: return 404;
    case Errc::duplicate:
    case Errc::mode_mismatch: return 409;
    case Errc::parse:
    case Errc::encoding:
    case Errc::empty_input:
    case Errc::invalid_argument:
    case Errc::out_of_range:
    case Errc::precondition: return 400;
    default: return 500;
  }
}

struct HttpServer::Impl {
  CampaignService& service;
  httplib::Server server;

  explicit Impl(CampaignService& s) : service(s) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.Post("/campaigns", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json body = parse_body(req);
      CampaignConfig config = config_from_json(body);
      if (!body.contains("seed")) config.seed = service.default_seed();
      send_json(res, 201, service.create_campaign(std::move(config)));
    }));

    server.Get("/campaigns", guarded([this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"campaigns", service.campaign_ids()}});
    }));

    server.Get(R"(/campaigns/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, service.status(req.matches[1]));
    }));

    server.Get(R"(/campaigns/([^/]+)/tasks/next)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!req.has_param("evaluator")) {
                   throw ServiceError(Errc::invalid_argument, "missing_evaluator", "query parameter 'evaluator' is required");
                 }
                 const auto task = service.next_task(req.matches[1], req.get_param_value("evaluator"));
                 if (!task) {
                   res.status = 204;
                   return;
                 }
                 send_json(res, 200, *task);
               }));

    server.Post(R"(/campaigns/([^/]+)/results)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, service.submit_result(req.matches[1], parse_body(req)));
    }));

    server.Get(R"(/campaigns/([^/]+)/export)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto files = service.export_campaign(req.matches[1]);
      send_json(res, 200,
                {{"annotations", files.annotations},
                 {"rankings", files.rankings},
                 {"questionnaire", files.questionnaire}});
    }));
  }
};

HttpServer::HttpServer(CampaignService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error(Errc::io, "cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error(Errc::io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace specmt::campaign
