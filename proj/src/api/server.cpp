#include "econoforge/api/server.hpp"

#include <httplib.h>

#include <thread>

#include "econoforge/dsl/parser.hpp"

namespace econoforge::api {

struct Server::Impl {
  Workspace& ws;
  JobQueue& jobs;
  ServerOptions options;
  httplib::Server http;
  std::thread thread;
  int port = 0;

  Impl(Workspace& w, JobQueue& j, ServerOptions o) : ws(w), jobs(j), options(std::move(o)) {}

  static Params params_of(const httplib::Request& req) {
    Params out;
    for (const auto& [k, v] : req.params) out.emplace(k, v);  // first value wins
    return out;
  }

  static void send(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    if (auto it = body.find("version"); it != body.end() && it->is_string()) {
      const auto v = it->get<std::string>();
      res.set_header("X-Econoforge-Version", v);
      res.set_header("ETag", "\"" + v + "\"");
    }
    res.set_content(render(body), "application/json");
  }

  // Runs a handler and turns whatever it throws into an error response.
  template <typename Fn>
  httplib::Server::Handler guarded(Fn fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const std::exception& e) {
        auto [status, body] = error_response(e, ws.version());
        send(res, status, body);
      }
    };
  }

  Json body_json(const httplib::Request& req) {
    try {
      return store::parse_json(req.body);
    } catch (const ParseError& e) {
      throw ApiError(400, "request body is not valid JSON (" + std::string(e.what()) + ")");
    }
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                              {"Access-Control-Expose-Headers", "X-Econoforge-Version, ETag"}});
    http.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Max-Age", "600");
      res.status = 204;
    });

    http.Get("/health", guarded([this](const auto&, auto& res) {
      send(res, 200, Json{{"status", "ok"}, {"version", ws.version()}});
    }));
    http.Get("/openapi.json", guarded([](const auto&, auto& res) { send(res, 200, openapi_document()); }));

    http.Get("/datasets", guarded([this](const auto&, auto& res) {
      const auto all = ws.datasets();
      send(res, 200, datasets_body(all));
    }));
    http.Get(R"(/datasets/([^/]+)/summary)", guarded([this](const auto& req, auto& res) {
      send(res, 200, summary_body(ws.dataset(req.matches[1].str())));
    }));
    http.Get(R"(/datasets/([^/]+)/bins)", guarded([this](const auto& req, auto& res) {
      const auto ds = ws.dataset(req.matches[1].str());
      const auto q = BinsQuery::from(params_of(req));
      std::optional<ModelEntry> model;
      if (q.model_id) model = ws.model(*q.model_id);
      send(res, 200, bins_body(ds, q, model ? &*model : nullptr));
    }));
    http.Get(R"(/datasets/([^/]+)/regions)", guarded([this](const auto& req, auto& res) {
      send(res, 200, regions_body(ws.dataset(req.matches[1].str()), RegionsQuery::from(params_of(req))));
    }));

    http.Get("/models", guarded([this](const auto& req, auto& res) {
      auto models = ws.models();
      const auto p = params_of(req);
      if (auto it = p.find("dataset"); it != p.end() && !it->second.empty()) {
        std::erase_if(models, [&](const ModelEntry& m) { return m->dataset_id != it->second; });
      }
      send(res, 200, models_body(models, ws.version()));
    }));
    http.Post("/models/solve", guarded([this](const auto& req, auto& res) {
      const auto id = jobs.submit(SolveRequest::from_json(body_json(req)));
      send(res, 202, job_body(jobs.get(id), ws.version()));
    }));
    http.Post("/models", guarded([this](const auto& req, auto& res) {
      const auto entry = import_model(ws, body_json(req));
      send(res, 201, model_summary(entry));
    }));
    http.Get(R"(/models/([^/]+))", guarded([this](const auto& req, auto& res) {
      send(res, 200, model_body(ws.model(req.matches[1].str())));
    }));
    http.Get(R"(/models/([^/]+)/flows)", guarded([this](const auto& req, auto& res) {
      const auto m = ws.model(req.matches[1].str());
      send(res, 200, flows_body(m, ws.dataset(m->dataset_id), FlowsQuery::from(params_of(req))));
    }));
    http.Get(R"(/models/([^/]+)/diff/([^/]+))", guarded([this](const auto& req, auto& res) {
      const auto a = ws.model(req.matches[1].str());
      const auto b = ws.model(req.matches[2].str());
      send(res, 200, diff_body(a, ws.dataset(a->dataset_id), b, ws.dataset(b->dataset_id)));
    }));
    http.Get(R"(/models/([^/]+)/export/smtlib)", guarded([this](const auto& req, auto& res) {
      const auto m = ws.model(req.matches[1].str());
      const auto text = smtlib_export(m, ws.dataset(m->dataset_id));
      res.set_header("Content-Disposition", "attachment; filename=\"" + m->model_id + ".smt2\"");
      res.set_header("X-Econoforge-Version", m.version);
      res.set_content(text, "text/plain; charset=utf-8");
    }));

    http.Post("/constraints/parse", guarded([this](const auto& req, auto& res) {
      std::string text = req.body;
      const SectorRegistry* sectors = nullptr;
      std::optional<DatasetSnapshot> ds;
      if (req.get_header_value("Content-Type").starts_with("application/json")) {
        const Json body = body_json(req);
        if (!body.is_object() || !body.contains("text") || !body.at("text").is_string()) {
          throw ApiError(400, "expected {\"text\": \"...\"}");
        }
        text = body.at("text").get<std::string>();
        if (auto it = body.find("dataset_id"); it != body.end() && it->is_string()) {
          ds = ws.dataset(it->template get<std::string>());
          sectors = &(*ds)->sectors;
        }
      }
      auto [status, body] = parse_body(text, sectors);
      body["version"] = ds ? ds->version : ws.version();
      send(res, status, body);
    }));

    http.Get("/jobs", guarded([this](const auto&, auto& res) {
      Json list = Json::array();
      const auto version = ws.version();
      for (const auto& j : jobs.list()) list.push_back(job_body(j, version));
      send(res, 200, Json{{"version", version}, {"jobs", list}});
    }));
    http.Get(R"(/jobs/([^/]+))", guarded([this](const auto& req, auto& res) {
      send(res, 200, job_body(jobs.get(req.matches[1].str()), ws.version()));
    }));
    http.Post(R"(/jobs/([^/]+)/cancel)", guarded([this](const auto& req, auto& res) {
      send(res, 200, job_body(jobs.cancel(req.matches[1].str()), ws.version()));
    }));

    http.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty()) {
        send(res, 404, error_body(404, "no route for " + req.method + " " + req.path, ws.version()));
      }
    });
  }
};

Server::Server(Workspace& workspace, JobQueue& jobs, ServerOptions options)
    : impl_(std::make_unique<Impl>(workspace, jobs, std::move(options))) {
  impl_->routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  auto& i = *impl_;
  if (i.options.port == 0) {
    i.port = i.http.bind_to_any_port(i.options.host);
  } else {
    i.port = i.http.bind_to_port(i.options.host, i.options.port) ? i.options.port : -1;
  }
  if (i.port < 0) throw Error("cannot bind " + i.options.host + ":" + std::to_string(i.options.port));
  return i.port;
}

void Server::run() { impl_->http.listen_after_bind(); }

int Server::start() {
  const int port = bind();
  impl_->thread = std::thread([this] { run(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace econoforge::api
