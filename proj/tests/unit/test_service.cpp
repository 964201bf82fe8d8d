#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <random>
#include <thread>

#include "leafctl/error.hpp"
#include "leafctl/io.hpp"
#include "leafctl/json.hpp"
#include "leafctl/service.hpp"

using namespace leafctl;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Running {
  fs::path dir;
  session::SessionStore store;
  httplib::Server server;
  int port = 0;
  std::thread thread;

  Running()
      : dir(fs::temp_directory_path() / ("leafctl-svc-" + std::to_string(std::random_device{}()))),
        store(dir) {
    fs::create_directories(dir / "models");
    io::save_model(dir / "models" / "reference.json", {0.3073, 4.5593, 1.0579, 0.6907});
    service::mount(server, store);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~Running() {
    server.stop();
    thread.join();
    fs::remove_all(dir);
  }
};

json body(const httplib::Result& r) { return json::parse(r->body); }

const std::string kCreate =
    R"({"id": "web", "plan": {"n": 3, "target_k": 30}, "model": {"alpha": 0.3073, "beta": 4.5593, "sigma_p": 1.0579, "sigma_o": 0.6907}})";

}  // namespace

TEST_CASE("service routes") {
  Running svc;
  httplib::Client cli("127.0.0.1", svc.port);

  auto created = cli.Post("/api/sessions", kCreate, "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(body(created)["next_density"].get<double>() == doctest::Approx(17.70485).epsilon(1e-6));

  auto by_name = cli.Post("/api/sessions", R"({"plan": {"n": 3, "target_k": 40}, "model_name": "reference"})",
                          "application/json");
  REQUIRE(by_name);
  CHECK(by_name->status == 201);
  CHECK(body(by_name)["next_density"].get<double>() == doctest::Approx(28.55201).epsilon(1e-6));

  auto list = cli.Get("/api/sessions");
  REQUIRE(list);
  CHECK(body(list).size() == 2);
  CHECK(body(list)[0]["id"] == "web");

  auto measured = cli.Post("/api/sessions/web/measurements", R"({"values": [11.53], "repetitions": 5})",
                           "application/json");
  REQUIRE(measured);
  CHECK(measured->status == 200);
  CHECK(body(measured)["next_density"].get<double>() == doctest::Approx(15.41099).epsilon(1e-6));

  auto overridden = cli.Post("/api/sessions/web/override-density", R"({"density": 16})", "application/json");
  REQUIRE(overridden);
  CHECK(body(overridden)["committed_density"] == 16.0);

  auto got = cli.Get("/api/sessions/web");
  REQUIRE(got);
  CHECK(body(got)["status"] == "awaiting_measurement");
  CHECK(body(got)["history"].size() == 1);

  auto models = cli.Get("/api/models");
  REQUIRE(models);
  CHECK(body(models)[0]["name"] == "reference");

  auto deleted = cli.Delete("/api/sessions/web");
  REQUIRE(deleted);
  CHECK(deleted->status == 200);
  CHECK(cli.Get("/api/sessions/web")->status == 404);
}

TEST_CASE("service error responses carry the error code") {
  Running svc;
  httplib::Client cli("127.0.0.1", svc.port);
  REQUIRE(cli.Post("/api/sessions", kCreate, "application/json")->status == 201);

  const auto expect = [](const httplib::Result& r, int status, const char* code) {
    REQUIRE(r);
    CHECK(r->status == status);
    CHECK(json::parse(r->body)["error"]["code"] == code);
  };
  expect(cli.Get("/api/sessions/nope"), 404, "UnknownSession");
  expect(cli.Post("/api/sessions", "{", "application/json"), 400, "ParseError");
  expect(cli.Post("/api/sessions", R"({"plan": {"n": 3, "target_k": 30}})", "application/json"), 400,
         "InvalidPlan");
  expect(cli.Post("/api/sessions",
                  R"({"plan": {"n": 3, "target_k": 300}, "model": {"alpha": 0.3073, "beta": 4.5593, "sigma_p": 1, "sigma_o": 1}})",
                  "application/json"),
         422, "InfeasibleTarget");
  expect(cli.Post("/api/sessions/web/measurements", R"({"values": []})", "application/json"), 422,
         "EmptyMeasurement");
  expect(cli.Post("/api/sessions/web/measurements",
                  R"({"bending": [[{"deflection_mm": 1, "load_kg": 2}, {"deflection_mm": 1, "load_kg": 3}]]})",
                  "application/json"),
         422, "DegenerateRegression");
  for (double v : {11.53, 19.89, 30.43}) {
    cli.Post("/api/sessions/web/measurements", json{{"values", {v}}}.dump(), "application/json");
  }
  expect(cli.Post("/api/sessions/web/measurements", R"({"values": [1]})", "application/json"), 409,
         "SessionComplete");
  auto done = cli.Get("/api/sessions/web");
  CHECK(json::parse(done->body)["final_abs_error_pct"].get<double>() == doctest::Approx(1.43333).epsilon(1e-4));
}

TEST_CASE("status mapping") {
  CHECK(service::http_status(ErrorCode::UnknownSession) == 404);
  CHECK(service::http_status(ErrorCode::SessionComplete) == 409);
  CHECK(service::http_status(ErrorCode::EmptyMeasurement) == 422);
  CHECK(service::http_status(ErrorCode::IoError) == 500);
  CHECK(service::http_status(ErrorCode::InvalidPlan) == 400);
}

TEST_CASE("serve reports a port that is taken") {
  Running svc;
  service::ServeOptions opts;
  opts.port = svc.port;
  opts.data_dir = svc.dir;
  try {
    service::serve(opts);
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}
