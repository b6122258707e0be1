#include <chrono>
#include <fstream>
#include <sstream>

#include "hrc/api.hpp"
#include "hrc/errors.hpp"
#include "httplib.h"

namespace hrc {

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kNdjson = "application/x-ndjson";

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, int status, const std::string& error,
                const std::string& detail) {
  send_json(res, status,
            {{"type", "error"}, {"version", kWireVersion}, {"error", error}, {"detail", detail}});
}

void send_ack(httplib::Response& res, const Ack& ack) {
  send_json(res, ack.accepted ? 200 : 409, to_json(ack));
}

// Maps the library's exception types onto HTTP status codes.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const NotFound& e) {
    send_error(res, 404, "not-found", e.what());
  } catch (const RangeError& e) {
    send_error(res, 416, "range", e.what());
  } catch (const ProtocolError& e) {
    send_error(res, 400, "protocol", e.what());
  } catch (const ParseError& e) {
    send_error(res, 400, "parse", e.what());
  } catch (const ValidationError& e) {
    send_error(res, 422, "validation", e.what());
  } catch (const CapacityError& e) {
    send_error(res, 422, "capacity", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

std::int64_t parse_from(const httplib::Request& req) {
  if (!req.has_param("from")) return 0;
  const std::string text = req.get_param_value("from");
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ProtocolError("'from' must be an integer");
  }
  if (used != text.size()) throw ProtocolError("'from' must be an integer");
  return value;
}

bool flag(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return false;
  const std::string v = req.get_param_value(name);
  return v.empty() || v == "1" || v == "true";
}

}  // namespace

struct HttpFrontend::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) { routes(); }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"}});
    server.Options(R"(/api/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });

    server.Get("/api/v1/state", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, to_json(*service.state())); });
    });

    server.Post("/api/v1/commands", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        nlohmann::json body;
        try {
          body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
          throw ProtocolError(std::string("malformed JSON: ") + e.what());
        }
        send_ack(res, service.post(command_from_json(body)));
      });
    });

    server.Get("/api/v1/events", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::int64_t from = parse_from(req);
        const auto initial = service.events_from(from);
        if (!flag(req, "follow")) {
          std::string body;
          for (const auto& e : initial) body += e.dump() + "\n";
          res.set_content(body, kNdjson);
          return;
        }
        res.set_chunked_content_provider(
            kNdjson, [this, next = from](std::size_t, httplib::DataSink& sink) mutable {
              try {
                if (service.wait_for_events(next, std::chrono::milliseconds(250))) {
                  for (const auto& e : service.events_from(next)) {
                    const std::string line = e.dump() + "\n";
                    if (!sink.write(line.data(), line.size())) return false;
                    ++next;
                  }
                }
                const auto snapshot = service.state();
                if (snapshot->status != RunStatus::Running &&
                    snapshot->status != RunStatus::Paused && next >= snapshot->seq) {
                  sink.done();
                }
                return sink.is_writable();
              } catch (const std::exception&) {
                // The run was replaced or removed under the stream.
                sink.done();
                return true;
              }
            });
      });
    });

    server.Get("/api/v1/job", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const auto job = service.job();
        if (!job) throw NotFound("no job loaded");
        send_json(res, 200, to_json(*job));
      });
    });

    server.Put("/api/v1/job", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::istringstream in(req.body);
        send_ack(res, service.set_job(load_job(in)));
      });
    });

    server.Get("/api/v1/scenario", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const auto scenario = service.scenario();
        if (!scenario) throw NotFound("no scenario loaded");
        std::ostringstream out;
        save_scenario(out, *scenario);
        res.set_content(out.str(), "text/plain");
      });
    });

    server.Put("/api/v1/scenario", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        std::istringstream in(req.body);
        send_ack(res, service.set_scenario(load_scenario(in)));
      });
    });

    server.Delete("/api/v1/scenario", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_ack(res, service.set_scenario(std::nullopt)); });
    });

    server.Get("/api/v1/assignment", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const auto job = service.job();
        if (!job) throw NotFound("no job loaded");
        send_json(res, 200, to_json(solve_assignment(*job)));
      });
    });

    server.Get("/api/v1/log", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        const auto path = service.log_path();
        std::ifstream in(path, std::ios::binary);
        if (!in) throw NotFound("log file missing: " + path.string());
        std::ostringstream body;
        body << in.rdbuf();
        res.set_header("Content-Disposition",
                       "attachment; filename=\"" + path.filename().string() + "\"");
        res.set_content(body.str(), kNdjson);
      });
    });
  }
};

HttpFrontend::HttpFrontend(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpFrontend::~HttpFrontend() { stop(); }

bool HttpFrontend::listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int HttpFrontend::bind_any_port(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpFrontend::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpFrontend::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace hrc
