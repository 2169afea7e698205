#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "rcasim/als.hpp"
#include "rcasim/bls.hpp"
#include "rcasim/event_queue.hpp"
#include "rcasim/metrics.hpp"
#include "rcasim/platform.hpp"
#include "rcasim/trace.hpp"
#include "rcasim/workload.hpp"

namespace rcasim {

struct SimConfig {
  int hosts = Platform::kDefaultHosts;
  double bandwidth_bps = Platform::kDefaultBandwidth;
  double latency_s = Platform::kDefaultLatency;
  double message_bytes = 64.0;
  BlsConfig bls;
  FactoringRule fac_rule = FactoringRule::Factoring;
  std::optional<ChunkPolicyKind> policy;  // overrides every job's policy
  bool rca_exclusion = false;             // batch-initiated exclusion requests
  double accept_threshold = 0.05;         // app-side inflation limit
  double history_threshold = 0.10;        // "finishes early" margin for targets
};

struct RcaCounters {
  std::int64_t idle_reports = 0;
  std::int64_t lend_grants = 0;  // hosts handed to queued jobs
  std::int64_t exclusion_requests = 0;
  std::int64_t exclusions_accepted = 0;
  std::int64_t exclusions_rejected = 0;
};

struct SimulationResult {
  Trace trace;
  std::vector<JobRecord> jobs;  // ascending id
  int hosts = 0;
  std::uint64_t events = 0;
  SimTime clock;
  SimTime executed_task_time;  // sum of sampled durations of executed chunks
  RcaCounters rca;
  std::vector<BackfillDecision> backfill_log;
};

/// One simulation instance. Single-threaded; instances share nothing.
///
/// The batch scheduler and every running job's self-scheduler are driven by
/// the same event queue. A SchedulerWake runs one batch pass followed by one
/// scheduling round over all running applications.
class Simulation {
 public:
  Simulation(SimConfig config, const JobSet& jobs);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  std::uint64_t schedule(Event ev);
  /// Processes events until the queue drains (or the next event is past
  /// `stop`). Throws if jobs remain with nothing left to process.
  SimulationResult run(std::optional<SimTime> stop = std::nullopt);
  SimTime now() const { return events_.now(); }

  /// Called with every event before it is handled.
  void set_observer(std::function<void(const Event&)> fn) { observer_ = std::move(fn); }

  struct RcaState;

 private:
  struct Running {
    std::vector<std::int64_t> prefix;  // prefix sums of task durations, us
    SimTime start;
  };

  void dispatch(const Event& ev);
  void on_arrival(const Event& ev);
  void on_wake(const Event& ev);
  void on_job_start(const Event& ev);
  void on_lend_grant(const Event& ev);
  void on_chunk_start(const Event& ev);
  void on_chunk_complete(const Event& ev);
  void on_job_complete(const Event& ev);
  void on_idle_report(const Event& ev);
  void on_exclusion_request(const Event& ev);
  void on_exclusion_response(const Event& ev);
  void on_exclusion_expiry(const Event& ev);
  void request_wake();
  void maybe_request_exclusion();
  JobRecord& record_of(JobId job);

  SimConfig config_;
  Platform platform_;
  EventQueue events_;
  std::unique_ptr<RcaState> rca_;
  BatchScheduler batch_;
  std::map<JobId, JobSpec> specs_;
  std::map<JobId, AppSchedState> apps_;  // all_apps
  std::map<JobId, Running> runtime_;
  std::map<JobId, JobRecord> records_;
  Trace trace_;
  SimTime executed_;
  SimTime message_delay_;
  std::optional<SimTime> wake_pending_;
  std::uint64_t processed_ = 0;
  std::function<void(const Event&)> observer_;
  RcaCounters counters_;
};

SimulationResult simulate(const SimConfig& config, const JobSet& jobs);

}  // namespace rcasim
