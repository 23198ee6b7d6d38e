#include "cli.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <sstream>

#include "econoforge/api/jobs.hpp"
#include "econoforge/api/queries.hpp"
#include "econoforge/api/server.hpp"
#include "econoforge/api/workspace.hpp"
#include "econoforge/dsl/parser.hpp"
#include "econoforge/inference/smtlib.hpp"
#include "econoforge/store/dataset_dir.hpp"
#include "econoforge/store/ingest.hpp"
#include "econoforge/store/synthetic.hpp"

namespace econoforge::cli {

namespace fs = std::filesystem;
using api::Json;

namespace {

constexpr const char* kDataDirEnv = "ECONOFORGE_DATA_DIR";

// "-" reads standard input.
std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  return store::read_file(path);
}

// Where a command finds its dataset: a stored dataset directory or loose CSV files.
struct Source {
  std::string data_dir;
  std::string dataset;
  std::string firms;
  std::string io;
  std::string sectors;
  std::string regions;

  void add_options(CLI::App& cmd) {
    cmd.add_option("--data-dir", data_dir, "Directory holding dataset directories")->envname(kDataDirEnv);
    cmd.add_option("--dataset", dataset, "Dataset id (optional when the data dir holds one dataset)");
    cmd.add_option("--firms", firms, "Firm CSV, used instead of a stored dataset");
    cmd.add_option("--io", io, "IO table CSV (with --firms)");
    cmd.add_option("--sectors", sectors, "Sector CSV (with --firms)");
    cmd.add_option("--regions", regions, "Region CSV (with --firms)");
  }

  bool from_csv() const { return !firms.empty(); }
};

struct Loaded {
  std::unique_ptr<api::Workspace> ws;
  api::DatasetSnapshot ds;
};

std::optional<std::string> optional_file(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return store::read_file(path);
}

// `fallback_id` names an in-memory dataset built from CSV files when
// --dataset is not given, so a model file's dataset id can carry over.
Loaded load_source(const Source& src, std::ostream& err, const std::string& fallback_id = "adhoc") {
  Loaded out;
  if (src.from_csv()) {
    store::IngestSources in;
    in.dataset_id = src.dataset.empty() ? fallback_id : src.dataset;
    in.firms_csv = store::read_file(src.firms);
    in.io_csv = optional_file(src.io);
    in.sectors_csv = optional_file(src.sectors);
    in.regions_csv = optional_file(src.regions);
    auto report = store::ingest_dataset(in);
    for (const auto& e : report.firm_errors) err << src.firms << ":" << e.line << ": " << e.message << "\n";
    for (const auto& e : report.io_errors) err << src.io << ":" << e.line << ": " << e.message << "\n";
    if (!report.clean()) {
      throw DomainError(std::to_string(report.firm_errors.size() + report.io_errors.size()) +
                        " input rows rejected");
    }
    out.ws = std::make_unique<api::Workspace>();
    out.ws->add_dataset(api::make_snapshot(std::move(report.dataset)));
    out.ds = out.ws->dataset(in.dataset_id);
    return out;
  }
  if (!src.io.empty() || !src.sectors.empty() || !src.regions.empty()) {
    throw api::ApiError(400, "--io, --sectors and --regions need --firms");
  }
  if (src.data_dir.empty()) {
    throw api::ApiError(400, std::string("give --firms or --data-dir (or set ") + kDataDirEnv + ")");
  }
  out.ws = std::make_unique<api::Workspace>(src.data_dir);
  std::string id = src.dataset;
  if (id.empty()) {
    const auto all = out.ws->datasets();
    if (all.size() != 1) throw api::ApiError(400, "--dataset is required when the data dir holds " + std::to_string(all.size()) + " datasets");
    id = all.front()->dataset_id;
  }
  out.ds = out.ws->dataset(id);
  return out;
}

// A model argument is a file path when such a file exists, otherwise an id
// known to the workspace.
api::ModelEntry resolve_model(const api::Workspace& ws, const std::string& arg) {
  std::error_code ec;
  if (fs::is_regular_file(arg, ec)) {
    auto m = store::load_model(store::read_file(arg));
    if (auto known = ws.find_model(m.model_id); known && *known->model == m) return *known;
    return api::make_model_entry(std::move(m));
  }
  return ws.model(arg);
}

// Reads a model file's dataset id without failing when the argument is an id.
std::string model_dataset_hint(const std::string& arg) {
  std::error_code ec;
  if (!fs::is_regular_file(arg, ec)) return "adhoc";
  return store::load_model(store::read_file(arg)).dataset_id;
}

void print(std::ostream& out, const Json& body, bool json) {
  if (json) {
    out << api::render(body);
  } else {
    out << body.dump(2) << "\n";
  }
}

volatile std::sig_atomic_t g_stop = 0;
extern "C" void on_signal(int) { g_stop = 1; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"econoforge: infer firm-to-firm transaction networks and explore them on a hexagon map", "econoforge"};
  app.require_subcommand(1);
  app.fallthrough();
  bool json = false;
  app.add_flag("--json", json, "Print machine-readable JSON (the same bodies the HTTP API returns)");

  std::function<int()> action;

  // gen
  store::SyntheticSpec gen_spec;
  std::string gen_dir = "data";
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset directory");
  gen->add_option("--data-dir", gen_dir, "Directory the dataset directory is written into")->envname(kDataDirEnv);
  gen->add_option("--id", gen_spec.dataset_id, "Dataset id (default synthetic-<seed>)");
  gen->add_option("--firms", gen_spec.firms, "Firms per year")->capture_default_str();
  gen->add_option("--sectors", gen_spec.sectors, "Number of sectors")->capture_default_str();
  gen->add_option("--districts", gen_spec.districts, "Number of districts")->capture_default_str();
  gen->add_option("--first-year", gen_spec.first_year, "First year")->capture_default_str();
  gen->add_option("--years", gen_spec.years, "Number of consecutive years")->capture_default_str();
  gen->add_option("--seed", gen_spec.seed, "Random seed")->capture_default_str();
  gen->add_option("--unlocated-share", gen_spec.unlocated_share, "Fraction of firms without coordinates")
      ->capture_default_str();
  gen->callback([&] {
    action = [&] {
      store::check_spec(gen_spec);
      const auto ds = store::generate_synthetic(gen_spec);
      const auto manifest = store::save_dataset(ds, gen_dir);
      const fs::path dir = fs::path(gen_dir) / ds.dataset_id;
      if (json) {
        out << api::render(store::manifest_to_json(ds.dataset_id, manifest));
      } else {
        out << "wrote " << dir.string() << " (" << ds.firms.size() << " firm-years, " << ds.years().size()
            << " years)\n";
      }
      return kExitOk;
    };
  });

  // ingest
  Source ingest_src;
  bool ingest_replace = false;
  auto* ingest = app.add_subcommand("ingest", "Read CSV files into a dataset directory");
  ingest->add_option("--data-dir", ingest_src.data_dir, "Directory the dataset directory is written into")
      ->envname(kDataDirEnv)
      ->required();
  ingest->add_option("--dataset", ingest_src.dataset, "Dataset id")->required();
  ingest->add_option("--firms", ingest_src.firms, "Firm CSV")->required();
  ingest->add_option("--io", ingest_src.io, "IO table CSV");
  ingest->add_option("--sectors", ingest_src.sectors, "Sector CSV");
  ingest->add_option("--regions", ingest_src.regions, "Region CSV");
  ingest->add_flag("--replace", ingest_replace, "Overwrite an existing dataset directory");
  ingest->callback([&] {
    action = [&] {
      if (!store::is_safe_id(ingest_src.dataset)) throw api::ApiError(400, "dataset id '" + ingest_src.dataset + "' is not file-safe");
      const fs::path dir = fs::path(ingest_src.data_dir) / ingest_src.dataset;
      if (fs::exists(dir / "manifest.json") && !ingest_replace) {
        throw DomainError("dataset '" + ingest_src.dataset + "' exists; pass --replace to overwrite it");
      }
      store::IngestSources in{ingest_src.dataset, store::read_file(ingest_src.firms), optional_file(ingest_src.io),
                              optional_file(ingest_src.sectors), optional_file(ingest_src.regions)};
      auto report = store::ingest_dataset(in);
      // Accepted rows are stored; rejected rows are listed and fail the run.
      const auto manifest = store::save_dataset(report.dataset, ingest_src.data_dir);
      Json errors = Json::array();
      for (const auto& e : report.firm_errors) {
        err << ingest_src.firms << ":" << e.line << ": " << e.message << "\n";
        errors.push_back(Json{{"file", "firms"}, {"line", e.line}, {"message", e.message}});
      }
      for (const auto& e : report.io_errors) {
        err << ingest_src.io << ":" << e.line << ": " << e.message << "\n";
        errors.push_back(Json{{"file", "io"}, {"line", e.line}, {"message", e.message}});
      }
      if (json) {
        Json body;
        body["dataset_id"] = ingest_src.dataset;
        body["manifest"] = store::manifest_to_json(ingest_src.dataset, manifest);
        body["rejected"] = std::move(errors);
        out << api::render(body);
      } else {
        out << "wrote " << dir.string() << " (" << report.dataset.firms.size() << " firm-years accepted, "
            << errors.size() << " rows rejected)\n";
      }
      return report.clean() ? kExitOk : kExitDomain;
    };
  });

  // parse-rules
  Source parse_src;
  std::string parse_file;
  auto* parse = app.add_subcommand("parse-rules", "Check a rule file and list its constraints");
  parse->add_option("rules", parse_file, "Rule file, - for standard input")->required();
  parse->add_option("--data-dir", parse_src.data_dir, "Check sector codes against a stored dataset")->envname(kDataDirEnv);
  parse->add_option("--dataset", parse_src.dataset, "Dataset whose sectors are checked");
  parse->callback([&] {
    action = [&] {
      const std::string text = read_input(parse_file);
      std::optional<Loaded> loaded;
      if (!parse_src.dataset.empty()) loaded = load_source(parse_src, err);
      auto [status, body] = api::parse_body(text, loaded ? &loaded->ds->sectors : nullptr);
      body["version"] = loaded ? loaded->ds.version : api::combine_versions({});
      if (json) {
        out << api::render(body);
      } else {
        for (const auto& e : body["errors"]) {
          err << parse_file << ":" << e["line"].get<std::size_t>() << ":" << e["column"].get<std::size_t>() << ": "
              << e["message"].get<std::string>() << "\n";
        }
        for (const auto& c : body["constraints"]) {
          out << c["id"].get<std::string>() << "\t" << c["text"].get<std::string>() << "\n";
        }
      }
      return status == 200 ? kExitOk : kExitDomain;
    };
  });

  // solve
  Source solve_src;
  std::string solve_rules, solve_out, solve_model_id;
  int solve_year = 0;
  bool solve_io = false;
  inference::SolverParams solve_params;
  auto* solve = app.add_subcommand("solve", "Infer a transaction model with the heuristic solver");
  solve_src.add_options(*solve);
  solve->add_option("--year", solve_year, "Year to solve")->required();
  solve->add_option("--rules", solve_rules, "Rule file, - for standard input");
  solve->add_flag("--include-io", solve_io, "Add one sector_total rule per IO table entry of the year");
  solve->add_option("--max-iterations", solve_params.max_iterations, "Rebalancing rounds")->capture_default_str();
  solve->add_option("--tolerance", solve_params.tolerance, "Relative tolerance per sector pair")->capture_default_str();
  solve->add_option("--seed", solve_params.seed, "Recorded with the model")->capture_default_str();
  solve->add_option("--model-id", solve_model_id, "Id for the result (default derived from the inputs)");
  solve->add_option("--out", solve_out, "Also write the model JSON here");
  solve->callback([&] {
    action = [&] {
      auto loaded = load_source(solve_src, err);
      api::SolveRequest req;
      req.dataset_id = loaded.ds->dataset_id;
      req.year = solve_year;
      req.rules = solve_rules.empty() ? std::string() : read_input(solve_rules);
      req.include_io = solve_io;
      req.params = solve_params;
      if (!solve_model_id.empty()) req.model_id = solve_model_id;

      api::JobQueue jobs(*loaded.ws, 1);
      const auto id = jobs.submit(req);
      int last_iteration = -1;
      const auto view = jobs.wait(id, [&](const api::JobView& v) {
        if (v.iteration != last_iteration && v.status == api::JobStatus::Running) {
          last_iteration = v.iteration;
          err << "iteration " << v.iteration << "/" << v.max_iterations << "  max relative residual "
              << v.max_relative_residual << "\n";
        }
      });

      if (view.model_registered && !solve_out.empty()) {
        store::write_file_atomic(solve_out, store::save_model(*loaded.ws->model(view.model_id).model));
      }
      if (json) {
        out << api::render(api::job_body(view, loaded.ws->version()));
      } else {
        out << api::to_string(view.status);
        if (view.model_registered) out << " model " << view.model_id;
        if (view.report) {
          out << " iterations " << view.report->iterations << " max_relative_residual "
              << view.report->residuals.max_relative_residual << "\n";
          for (const auto& w : view.report->witnesses) out << "witness " << w << "\n";
          if (!view.report->message.empty()) out << view.report->message << "\n";
        } else {
          out << "\n";
        }
        if (view.error) err << "error: " << *view.error << "\n";
      }
      if (view.status != api::JobStatus::Done) return kExitDomain;
      return view.report && view.report->status == inference::SolveStatus::Satisfied ? kExitOk : kExitDomain;
    };
  });

  // validate
  Source val_src;
  std::string val_model, val_rules;
  auto* validate = app.add_subcommand("validate", "Check a model against rules");
  val_src.add_options(*validate);
  validate->add_option("--model", val_model, "Model JSON file or stored model id")->required();
  validate->add_option("--rules", val_rules, "Rule file (default: the rules stored with the model)");
  validate->callback([&] {
    action = [&] {
      auto loaded = load_source(val_src, err, model_dataset_hint(val_model));
      const auto entry = resolve_model(*loaded.ws, val_model);
      std::string text;
      if (!val_rules.empty()) {
        text = read_input(val_rules);
      } else if (entry.rules) {
        text = *entry.rules;
      }
      const auto cs = dsl::parse_rules(text, dsl::ParseOptions{&loaded.ds->sectors});
      const Json body = api::validate_body(entry, loaded.ds, cs);
      if (json) {
        out << api::render(body);
      } else {
        out << (body["satisfied"].get<bool>() ? "satisfied" : "violated") << " max_relative_residual "
            << body["residuals"]["max_relative_residual"].dump() << "\n";
        for (const auto& c : body["residuals"]["constraints"]) {
          if (!c["satisfied"].get<bool>()) {
            out << "violated " << c["constraint_id"].get<std::string>() << " by " << c["violation"].dump() << "\n";
          }
        }
      }
      return body["satisfied"].get<bool>() ? kExitOk : kExitDomain;
    };
  });

  // emit-smt
  Source smt_src;
  std::string smt_rules, smt_model, smt_out;
  int smt_year = 0;
  bool smt_io = false;
  auto* emit = app.add_subcommand("emit-smt", "Write the SMT-LIB encoding of a solve problem");
  smt_src.add_options(*emit);
  emit->add_option("--year", smt_year, "Year (taken from the model when --model is given)");
  emit->add_option("--rules", smt_rules, "Rule file, - for standard input");
  emit->add_flag("--include-io", smt_io, "Add one sector_total rule per IO table entry of the year");
  emit->add_option("--model", smt_model, "Encode the problem a stored model was solved against");
  emit->add_option("--out", smt_out, "Write the script here instead of standard output");
  emit->callback([&] {
    action = [&] {
      auto loaded = load_source(smt_src, err, smt_model.empty() ? "adhoc" : model_dataset_hint(smt_model));
      std::string text;
      int year = smt_year;
      if (!smt_model.empty()) {
        const auto entry = resolve_model(*loaded.ws, smt_model);
        year = entry->year;
        if (smt_rules.empty()) {
          if (!entry.rules) throw DomainError("rules of model '" + entry->model_id + "' are not stored; pass --rules");
          text = *entry.rules;
        }
      }
      if (!smt_rules.empty()) text = read_input(smt_rules);
      if (smt_model.empty() && smt_year == 0) throw api::ApiError(400, "--year or --model is required");
      auto cs = dsl::parse_rules(text, dsl::ParseOptions{&loaded.ds->sectors});
      if (smt_io) {
        auto it = loaded.ds->io_tables.find(year);
        if (it == loaded.ds->io_tables.end()) throw NotFound("no IO table for " + std::to_string(year));
        for (auto& c : dsl::io_table_to_constraints(it->second, 0)) cs.add(std::move(c));
      }
      const auto firms = loaded.ds->firms_in_year(year);
      if (firms.empty()) throw NotFound("dataset '" + loaded.ds->dataset_id + "' has no firms in " + std::to_string(year));
      const auto doc = inference::emit_smtlib(firms, cs);
      if (!smt_out.empty()) store::write_file_atomic(smt_out, doc.text);
      if (json) {
        Json body;
        body["dataset_id"] = loaded.ds->dataset_id;
        body["year"] = year;
        body["constraint_set_id"] = cs.id();
        body["pair_variables"] = doc.stats.pair_variables;
        body["indicator_variables"] = doc.stats.indicator_variables;
        body["assertions"] = doc.stats.assertions;
        body["version"] = loaded.ds.version;
        if (smt_out.empty()) body["text"] = doc.text;
        out << api::render(body);
      } else if (smt_out.empty()) {
        out << doc.text;
      } else {
        out << "wrote " << smt_out << " (" << doc.stats.pair_variables << " pair variables, " << doc.stats.assertions
            << " assertions)\n";
      }
      return kExitOk;
    };
  });

  // import-smt-model
  Source imp_src;
  std::string imp_text, imp_rules, imp_id, imp_out, imp_cs;
  int imp_year = 0;
  auto* import = app.add_subcommand("import-smt-model", "Turn SMT solver output into a stored model");
  imp_src.add_options(*import);
  import->add_option("solver_output", imp_text, "File with the solver's output, - for standard input")->required();
  import->add_option("--year", imp_year, "Year the problem was encoded for")->required();
  import->add_option("--rules", imp_rules, "Rule file the model is checked against");
  import->add_option("--constraint-set-id", imp_cs, "Constraint set id to record when no rules are given");
  import->add_option("--model-id", imp_id, "Id for the model (default derived from its content)");
  import->add_option("--out", imp_out, "Also write the model JSON here");
  import->callback([&] {
    action = [&] {
      auto loaded = load_source(imp_src, err);
      Json body{{"format", "smt-model"}, {"dataset_id", loaded.ds->dataset_id}, {"year", imp_year},
                {"text", read_input(imp_text)}};
      if (!imp_rules.empty()) body["rules"] = read_input(imp_rules);
      if (!imp_id.empty()) body["model_id"] = imp_id;
      if (!imp_cs.empty()) body["constraint_set_id"] = imp_cs;
      const auto entry = api::import_model(*loaded.ws, body);
      if (!imp_out.empty()) store::write_file_atomic(imp_out, store::save_model(*entry.model));
      const Json summary = api::model_summary(entry);
      if (json) {
        out << api::render(summary);
      } else {
        out << "imported " << entry->model_id << " (" << entry->edges.size() << " edges, "
            << (entry->residuals.all_constraints_satisfied() ? "satisfied" : "violated") << ")\n";
      }
      return entry->residuals.all_constraints_satisfied() ? kExitOk : kExitDomain;
    };
  });

  // diff
  Source diff_src;
  std::string diff_a, diff_b;
  auto* diff = app.add_subcommand("diff", "Compare two models of one dataset");
  diff_src.add_options(*diff);
  diff->add_option("a", diff_a, "First model (file or stored id)")->required();
  diff->add_option("b", diff_b, "Second model (file or stored id)")->required();
  diff->callback([&] {
    action = [&] {
      auto loaded = load_source(diff_src, err, model_dataset_hint(diff_a));
      const auto a = resolve_model(*loaded.ws, diff_a);
      const auto b = resolve_model(*loaded.ws, diff_b);
      print(out, api::diff_body(a, loaded.ds, b, loaded.ds), json);
      return kExitOk;
    };
  });

  // bins
  Source bins_src;
  api::Params bins_params;
  std::string bins_year, bins_res, bins_metric, bins_mode, bins_model;
  bool bins_hide = false;
  auto* bins = app.add_subcommand("bins", "Aggregate one year onto the hexagon grid");
  bins_src.add_options(*bins);
  bins->add_option("--year", bins_year, "Year")->required();
  bins->add_option("--resolution", bins_res, "Hexagon resolution 0..12")->required();
  bins->add_option("--metric", bins_metric, "firm_count or cash_flow (default)");
  bins->add_option("--mode", bins_mode, "absolute (default) or delta");
  bins->add_option("--model", bins_model, "Model id or file");
  bins->add_flag("--hide-unrepresented", bins_hide, "Only count firms the model connects");
  bins->callback([&] {
    action = [&] {
      auto loaded = load_source(bins_src, err);
      api::Params p{{"year", bins_year}, {"resolution", bins_res}, {"metric", bins_metric}, {"mode", bins_mode}};
      std::optional<api::ModelEntry> model;
      if (!bins_model.empty()) {
        model = resolve_model(*loaded.ws, bins_model);
        p["model"] = (*model)->model_id;
      }
      if (bins_hide) p["hide_unrepresented"] = "true";
      print(out, api::bins_body(loaded.ds, api::BinsQuery::from(p), model ? &*model : nullptr), json);
      return kExitOk;
    };
  });

  // serve
  api::ServerOptions serve_opts;
  std::string serve_dir;
  int serve_jobs = 2;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--data-dir", serve_dir, "Directory holding dataset directories")->envname(kDataDirEnv)->required();
  serve->add_option("--host", serve_opts.host, "Bind address")->capture_default_str();
  serve->add_option("--port", serve_opts.port, "Port, 0 for any free port")->capture_default_str();
  serve->add_option("--jobs", serve_jobs, "Solve jobs run in parallel")->capture_default_str()->check(CLI::Range(1, 64));
  serve->add_option("--cors-origin", serve_opts.cors_origin, "Access-Control-Allow-Origin value")->capture_default_str();
  serve->callback([&] {
    action = [&] {
      api::Workspace ws(serve_dir);
      api::JobQueue jobs(ws, serve_jobs);
      api::Server server(ws, jobs, serve_opts);
      g_stop = 0;
      auto old_int = std::signal(SIGINT, on_signal);
      auto old_term = std::signal(SIGTERM, on_signal);
      const int port = server.start();
      err << "serving " << ws.datasets().size() << " datasets on http://" << serve_opts.host << ":" << port << "\n";
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      std::signal(SIGINT, old_int);
      std::signal(SIGTERM, old_term);
      return kExitOk;
    };
  });

  // openapi
  std::string openapi_out;
  auto* openapi = app.add_subcommand("openapi", "Print the OpenAPI document of the HTTP API");
  openapi->add_option("--out", openapi_out, "Write to this file instead");
  openapi->callback([&] {
    action = [&] {
      const std::string text = api::openapi_document().dump(2) + "\n";
      if (openapi_out.empty()) {
        out << text;
      } else {
        store::write_file_atomic(openapi_out, text);
      }
      return kExitOk;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action();
  } catch (const api::ApiError& e) {
    err << "error: " << e.what() << "\n";
    return e.status() == 400 ? kExitUsage : kExitDomain;
  } catch (const ParseError& e) {
    err << "error: rules:" << e.line() << ":" << e.column() << ": " << e.message() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}

}  // namespace econoforge::cli
