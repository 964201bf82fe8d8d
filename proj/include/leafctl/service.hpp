#pragma once

// Local JSON-over-HTTP front end for the session store.
//
//   POST   /api/sessions                         create
//   GET    /api/sessions                         list summaries
//   GET    /api/sessions/{id}                    full session
//   POST   /api/sessions/{id}/measurements       record one leaf's readings
//   POST   /api/sessions/{id}/override-density   commit a different density
//   DELETE /api/sessions/{id}                    remove
//   GET    /api/models                           calibrated model files
//
// Errors are returned as {"error": {"code": "<ErrorCode>", "message": "..."}}.

#include <filesystem>
#include <optional>
#include <string>

#include "leafctl/error.hpp"
#include "leafctl/session.hpp"

namespace httplib {
class Server;
}

namespace leafctl::service {

/// Registers every route on `server`. When `static_dir` is set it is mounted
/// at "/" for the browser console.
void mount(httplib::Server& server, session::SessionStore& store,
           const std::optional<std::filesystem::path>& static_dir = std::nullopt);

int http_status(ErrorCode code);

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "leafctl-data";
  std::optional<std::filesystem::path> static_dir;
};

/// Blocks until the server stops. Throws IoError when the port cannot be bound.
void serve(const ServeOptions& options);

}  // namespace leafctl::service
