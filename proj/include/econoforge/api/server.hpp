#pragma once

#include <memory>
#include <string>

#include "econoforge/api/jobs.hpp"
#include "econoforge/api/workspace.hpp"

namespace econoforge::api {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string cors_origin = "*";
};

/// HTTP+JSON front end over a workspace and a job queue.
class Server {
 public:
  Server(Workspace& workspace, JobQueue& jobs, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the socket and returns the port in use. Throws Error on failure.
  int bind();
  /// Serves until stop(); call after bind().
  void run();
  /// bind() plus run() on a background thread.
  int start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// OpenAPI 3 description of every route.
Json openapi_document();

}  // namespace econoforge::api
