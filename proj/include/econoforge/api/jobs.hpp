#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "econoforge/api/queries.hpp"
#include "econoforge/api/workspace.hpp"
#include "econoforge/inference/solver.hpp"

namespace econoforge::api {

/// queued -> running -> {done, failed, infeasible, cancelled}; a queued job
/// may also be cancelled directly. Nothing moves backwards.
enum class JobStatus { Queued, Running, Done, Failed, Infeasible, Cancelled };

std::string_view to_string(JobStatus s) noexcept;
bool is_final(JobStatus s) noexcept;

struct SolveRequest {
  std::string dataset_id;
  int year = 0;
  std::string rules;  // rule text as typed by the analyst
  bool include_io = false;  // add one sector_total per IO entry of the year
  inference::SolverParams params;
  std::optional<std::string> model_id;

  /// Reads {"dataset_id", "year", "rules", "include_io", "params": {...},
  /// "model_id"}. ApiError 400 on a malformed body.
  static SolveRequest from_json(const Json& body);
};

/// Copy of a job's state at one instant.
struct JobView {
  std::string job_id;
  JobStatus status = JobStatus::Queued;
  std::string dataset_id;
  int year = 0;
  std::string constraint_set_id;
  std::size_t constraint_count = 0;
  bool include_io = false;
  int iteration = 0;
  int max_iterations = 0;
  double max_relative_residual = 0.0;
  std::string model_id;  // the id the result is (or would be) stored under
  bool model_registered = false;
  std::optional<inference::SolveReport> report;
  std::optional<std::string> error;
};

Json job_body(const JobView& job, const std::string& version);

/// Solve jobs run on a fixed pool of worker threads. Finished models are
/// registered in the workspace immediately.
class JobQueue {
 public:
  JobQueue(Workspace& workspace, int workers);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  /// Checks the request and parses the rules before queueing, so bad input
  /// fails here: NotFound for unknown datasets or years, ParseError for bad
  /// rules, ApiError 400 for bad parameters.
  std::string submit(const SolveRequest& req);

  JobView get(std::string_view id) const;
  std::vector<JobView> list() const;
  /// ApiError 409 when the job already finished.
  JobView cancel(std::string_view id);
  /// Blocks until the job finishes; `on_change` sees every progress step.
  JobView wait(std::string_view id, const std::function<void(const JobView&)>& on_change = {});

 private:
  struct Job;

  void work(std::stop_token stop);
  void run(Job& job);
  std::shared_ptr<Job> find(std::string_view id) const;

  Workspace& workspace_;
  mutable std::mutex mutex_;
  std::condition_variable_any changed_;
  std::map<std::string, std::shared_ptr<Job>, std::less<>> jobs_;
  std::deque<std::shared_ptr<Job>> pending_;
  std::size_t next_id_ = 1;
  std::vector<std::jthread> workers_;
};

}  // namespace econoforge::api
