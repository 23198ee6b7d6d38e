#include "econoforge/api/jobs.hpp"

#include <cmath>

#include "econoforge/core/hash.hpp"
#include "econoforge/dsl/parser.hpp"

namespace econoforge::api {

std::string_view to_string(JobStatus s) noexcept {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
    case JobStatus::Infeasible: return "infeasible";
    case JobStatus::Cancelled: return "cancelled";
  }
  return "failed";
}

bool is_final(JobStatus s) noexcept { return s != JobStatus::Queued && s != JobStatus::Running; }

SolveRequest SolveRequest::from_json(const Json& body) {
  if (!body.is_object()) throw ApiError(400, "solve request must be a JSON object");
  SolveRequest req;
  try {
    req.dataset_id = body.at("dataset_id").get<std::string>();
    req.year = body.at("year").get<int>();
    req.rules = body.value("rules", std::string());
    req.include_io = body.value("include_io", false);
    if (body.contains("model_id") && !body.at("model_id").is_null()) req.model_id = body.at("model_id").get<std::string>();
    if (body.contains("params")) {
      const Json& p = body.at("params");
      if (!p.is_object()) throw ApiError(400, "params must be an object");
      req.params.max_iterations = p.value("max_iterations", req.params.max_iterations);
      req.params.tolerance = p.value("tolerance", req.params.tolerance);
      req.params.seed = p.value("seed", req.params.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ApiError(400, std::string("malformed solve request: ") + e.what());
  }
  return req;
}

Json job_body(const JobView& job, const std::string& version) {
  Json out;
  out["job_id"] = job.job_id;
  out["status"] = std::string(to_string(job.status));
  out["dataset_id"] = job.dataset_id;
  out["year"] = job.year;
  out["constraint_set_id"] = job.constraint_set_id;
  out["constraint_count"] = job.constraint_count;
  out["include_io"] = job.include_io;
  out["progress"] = Json{{"iteration", job.iteration},
                         {"max_iterations", job.max_iterations},
                         {"max_relative_residual", job.max_relative_residual}};
  out["result_model_id"] = job.model_registered ? Json(job.model_id) : Json(nullptr);
  out["report"] = job.report ? to_json(*job.report) : Json(nullptr);
  out["error"] = job.error ? Json(*job.error) : Json(nullptr);
  out["version"] = version;
  return out;
}

struct JobQueue::Job {
  JobView view;
  DatasetSnapshot dataset;
  dsl::ConstraintSet constraints;
  std::string rules_text;  // canonical
  inference::SolverParams params;
  std::stop_source stop;
};

JobQueue::JobQueue(Workspace& workspace, int workers) : workspace_(workspace) {
  if (workers < 1) throw ApiError(400, "need at least one worker");
  for (int i = 0; i < workers; ++i) {
    workers_.emplace_back([this](std::stop_token st) { work(st); });
  }
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, job] : jobs_) {
      if (job->view.status == JobStatus::Queued) job->view.status = JobStatus::Cancelled;
      job->stop.request_stop();
    }
    pending_.clear();
  }
  for (auto& w : workers_) w.request_stop();
  changed_.notify_all();
  workers_.clear();
}

std::string JobQueue::submit(const SolveRequest& req) {
  auto job = std::make_shared<Job>();
  job->dataset = workspace_.dataset(req.dataset_id);
  const Dataset& ds = *job->dataset;
  if (!ds.has_year(req.year)) {
    throw NotFound("dataset '" + ds.dataset_id + "' has no firms in " + std::to_string(req.year));
  }
  if (req.params.max_iterations < 1 || req.params.max_iterations > 1'000'000) {
    throw ApiError(400, "max_iterations must be in [1, 1000000]");
  }
  if (!std::isfinite(req.params.tolerance) || req.params.tolerance < 0.0) {
    throw ApiError(400, "tolerance must be a non-negative number");
  }
  if (req.model_id && !store::is_safe_id(*req.model_id)) {
    throw ApiError(400, "model id '" + *req.model_id + "' may only use letters, digits, '.', '_' and '-'");
  }

  job->constraints = dsl::parse_rules(req.rules, dsl::ParseOptions{&ds.sectors});
  if (req.include_io) {
    auto io = ds.io_tables.find(req.year);
    if (io == ds.io_tables.end()) throw ApiError(400, "dataset has no IO table for " + std::to_string(req.year));
    try {
      for (auto& c : dsl::io_table_to_constraints(io->second, 0)) job->constraints.add(std::move(c));
    } catch (const DomainError& e) {
      throw ApiError(400, std::string("IO rules clash with the given rules: ") + e.what());
    }
  }
  job->rules_text = dsl::pretty_print(job->constraints);
  job->params = req.params;

  auto& v = job->view;
  v.dataset_id = req.dataset_id;
  v.year = req.year;
  v.constraint_set_id = job->constraints.id();
  v.constraint_count = job->constraints.size();
  v.include_io = req.include_io;
  v.max_iterations = req.params.max_iterations;
  if (req.model_id) {
    v.model_id = *req.model_id;
  } else {
    const std::string key = req.dataset_id + "\n" + std::to_string(req.year) + "\n" + v.constraint_set_id + "\n" +
                            std::to_string(req.params.max_iterations) + "\n" + std::to_string(req.params.tolerance) +
                            "\n" + std::to_string(req.params.seed);
    v.model_id = "m-" + sha1_hex(key).substr(0, 12);
  }

  std::lock_guard lock(mutex_);
  v.job_id = "job-" + std::to_string(next_id_++);
  jobs_.emplace(v.job_id, job);
  pending_.push_back(job);
  changed_.notify_all();
  return v.job_id;
}

std::shared_ptr<JobQueue::Job> JobQueue::find(std::string_view id) const {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw NotFound("unknown job '" + std::string(id) + "'");
  return it->second;
}

JobView JobQueue::get(std::string_view id) const {
  std::lock_guard lock(mutex_);
  return find(id)->view;
}

std::vector<JobView> JobQueue::list() const {
  std::lock_guard lock(mutex_);
  std::vector<JobView> out;
  for (const auto& [id, job] : jobs_) out.push_back(job->view);
  return out;
}

JobView JobQueue::cancel(std::string_view id) {
  std::lock_guard lock(mutex_);
  auto job = find(id);
  auto& v = job->view;
  if (is_final(v.status)) {
    throw ApiError(409, "job " + v.job_id + " already finished (" + std::string(to_string(v.status)) + ")");
  }
  if (v.status == JobStatus::Queued) {
    v.status = JobStatus::Cancelled;
    std::erase(pending_, job);
  } else {
    job->stop.request_stop();  // the worker records the cancellation
  }
  changed_.notify_all();
  return v;
}

JobView JobQueue::wait(std::string_view id, const std::function<void(const JobView&)>& on_change) {
  std::unique_lock lock(mutex_);
  auto job = find(id);
  int seen_iteration = -1;
  JobStatus seen_status = JobStatus::Queued;
  for (;;) {
    const JobView v = job->view;
    if (on_change && (v.iteration != seen_iteration || v.status != seen_status)) {
      seen_iteration = v.iteration;
      seen_status = v.status;
      lock.unlock();
      on_change(v);
      lock.lock();
      continue;
    }
    if (is_final(v.status)) return v;
    changed_.wait(lock, [&] {
      const auto& now = job->view;
      return is_final(now.status) || (on_change && (now.iteration != seen_iteration || now.status != seen_status));
    });
  }
}

void JobQueue::work(std::stop_token stop) {
  for (;;) {
    std::shared_ptr<Job> job;
    {
      std::unique_lock lock(mutex_);
      if (!changed_.wait(lock, stop, [&] { return !pending_.empty(); })) return;
      job = pending_.front();
      pending_.pop_front();
      job->view.status = JobStatus::Running;
      changed_.notify_all();
    }
    run(*job);
  }
}

void JobQueue::run(Job& job) {
  inference::SolveContext ctx;
  ctx.stop = job.stop.get_token();
  ctx.progress = [&](int iteration, double residual) {
    std::lock_guard lock(mutex_);
    job.view.iteration = iteration;
    job.view.max_relative_residual = residual;
    changed_.notify_all();
  };

  JobView result;
  {
    std::lock_guard lock(mutex_);
    result = job.view;
  }
  try {
    auto solved = inference::solve_heuristic(job.dataset->firms_in_year(result.year), job.constraints, job.params, ctx);
    result.report = solved.report;
    result.iteration = solved.report.iterations;
    result.max_relative_residual = solved.report.residuals.max_relative_residual;
    if (solved.report.status == inference::SolveStatus::InfeasibleDetected) {
      result.status = JobStatus::Infeasible;
    } else {
      auto& m = solved.model;
      m.model_id = result.model_id;
      m.dataset_id = result.dataset_id;
      m.year = result.year;
      m.constraint_set_id = result.constraint_set_id;
      workspace_.add_model(std::move(m), job.rules_text);
      result.model_registered = true;
      result.status = JobStatus::Done;
    }
  } catch (const inference::SolveCancelled&) {
    result.status = JobStatus::Cancelled;
  } catch (const std::exception& e) {
    result.status = JobStatus::Failed;
    result.error = e.what();
  }

  std::lock_guard lock(mutex_);
  job.view = std::move(result);
  changed_.notify_all();
}

}  // namespace econoforge::api
