#include "leafctl/service.hpp"

#include <httplib.h>

#include "leafctl/error.hpp"
#include "leafctl/json.hpp"

namespace leafctl::service {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, json{{"error", {{"code", std::string(to_string(code))}, {"message", message}}}},
            http_status(code));
}

json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? json::object() : json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("request body: ") + e.what());
  }
}

// Wraps a handler so domain errors become coded JSON responses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.detail());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::ParseError, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::IoError, e.what());
    }
  };
}

json summary_json(const session::SessionSummary& s) {
  return {{"id", s.id},       {"seq", s.seq},     {"created_at", s.created_at},
          {"status", std::string(session::to_string(s.status))},
          {"n", s.n},         {"target_k", s.target_k}, {"leaves_done", s.leaves_done}};
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::SessionComplete: return 409;
    case ErrorCode::EmptyMeasurement:
    case ErrorCode::DegenerateRegression:
    case ErrorCode::InfeasibleTarget: return 422;
    case ErrorCode::IoError: return 500;
    default: return 400;
  }
}

void mount(httplib::Server& server, session::SessionStore& store,
           const std::optional<std::filesystem::path>& static_dir) {
  auto* s = &store;

  server.Post("/api/sessions", guarded([s](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    if (!body.contains("plan")) throw Error(ErrorCode::InvalidPlan, "missing 'plan'");
    const auto plan = body.at("plan").get<BuildPlan>();
    ProcessModel model;
    if (body.contains("model")) {
      model = body.at("model").get<ProcessModel>();
    } else if (body.contains("model_name")) {
      model = s->model(body.at("model_name").get<std::string>());
    } else {
      throw Error(ErrorCode::InvalidPlan, "missing 'model' or 'model_name'");
    }
    std::optional<std::string> id;
    if (body.contains("id")) id = body.at("id").get<std::string>();
    send_json(res, session::to_json(s->create(plan, model, id)), 201);
  }));

  server.Get("/api/sessions", guarded([s](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& summary : s->list()) out.push_back(summary_json(summary));
    send_json(res, out);
  }));

  server.Get(R"(/api/sessions/([A-Za-z0-9_-]+))",
             guarded([s](const httplib::Request& req, httplib::Response& res) {
               send_json(res, session::to_json(s->get(req.matches[1])));
             }));

  server.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/measurements)",
              guarded([s](const httplib::Request& req, httplib::Response& res) {
                const auto input = session::measurement_from_json(parse_body(req));
                send_json(res, session::to_json(s->record_measurement(req.matches[1], input)));
              }));

  server.Post(R"(/api/sessions/([A-Za-z0-9_-]+)/override-density)",
              guarded([s](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                if (!body.contains("density")) throw Error(ErrorCode::InvalidPlan, "missing 'density'");
                send_json(res, session::to_json(
                                   s->override_density(req.matches[1], body.at("density").get<double>())));
              }));

  server.Delete(R"(/api/sessions/([A-Za-z0-9_-]+))",
                guarded([s](const httplib::Request& req, httplib::Response& res) {
                  s->remove(req.matches[1]);
                  send_json(res, json{{"deleted", std::string(req.matches[1])}});
                }));

  server.Get("/api/models", guarded([s](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const auto& m : s->models()) out.push_back({{"name", m.name}, {"model", m.model}});
    send_json(res, out);
  }));

  if (static_dir && std::filesystem::is_directory(*static_dir)) {
    server.set_mount_point("/", static_dir->string());
  }
}

void serve(const ServeOptions& options) {
  session::SessionStore store(options.data_dir);
  httplib::Server server;
  // The library default (SO_REUSEPORT) would let a second instance share the
  // port silently; a busy port must be reported instead.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  mount(server, store, options.static_dir);
  if (!server.bind_to_port(options.host, options.port)) {
    throw Error(ErrorCode::IoError,
                "cannot bind " + options.host + ":" + std::to_string(options.port));
  }
  if (!server.listen_after_bind()) {
    throw Error(ErrorCode::IoError, "server stopped unexpectedly");
  }
}

}  // namespace leafctl::service
