#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rcasim/chunk_policy.hpp"
#include "rcasim/sim_time.hpp"

namespace rcasim {

/// One allocated host as seen by its job's application scheduler.
struct WorkerSlot {
  HostId host = 0;
  bool busy = false;      // a chunk is assigned and not yet complete
  bool excluded = false;  // app agreed not to schedule here (exclusion request)
  bool reported = false;  // idle notification already emitted
  bool lent = false;      // owner's host currently used by another job
  bool borrowed = false;  // this job runs here on a host owned by another running job
  SimTime committed_until;
  WorkerStats stats;

  bool schedulable() const { return !busy && !lent && !excluded; }
};

/// Self-scheduling state of one running job.
class AppSchedState {
 public:
  AppSchedState(JobId job, ChunkPolicyKind policy, std::int64_t total_tasks, std::span<const HostId> hosts,
                std::span<const HostId> borrowed, double task_mean, double task_stddev,
                FactoringRule fac_rule = FactoringRule::Factoring);

  JobId job() const { return job_; }
  ChunkPolicyKind policy() const { return policy_; }
  std::int64_t total() const { return total_; }
  std::int64_t remaining() const { return remaining_; }
  std::int64_t issued() const { return total_ - remaining_; }
  std::int64_t next_task() const { return total_ - remaining_; }
  std::int64_t running_chunks() const { return running_; }
  std::int64_t workers() const { return static_cast<std::int64_t>(slots_.size()); }
  bool finished() const { return remaining_ == 0 && running_ == 0; }

  std::vector<WorkerSlot>& slots() { return slots_; }
  const std::vector<WorkerSlot>& slots() const { return slots_; }
  WorkerSlot* slot(HostId host);
  const WorkerSlot* slot(HostId host) const;
  std::size_t slot_index(HostId host) const;

  /// Chunk size the policy would hand to the worker in `slot_index` now.
  std::int64_t chunk_for(std::size_t slot_index);

  /// Commits a chunk of `size` tasks to a slot; returns its first task index.
  std::int64_t issue(std::size_t slot_index, std::int64_t size);
  /// Marks a chunk of the slot complete and, for AF, folds in its timing.
  void complete(std::size_t slot_index, std::int64_t size, double seconds);

  std::int64_t next_chunk_id() { return chunk_ids_++; }

 private:
  JobId job_;
  ChunkPolicyKind policy_;
  std::int64_t total_;
  std::int64_t remaining_;
  std::int64_t running_ = 0;
  std::int64_t chunk_ids_ = 0;
  std::int64_t static_issued_ = 0;
  std::vector<WorkerSlot> slots_;
  std::optional<FactoringState> fac_;
};

struct ChunkAssignment {
  JobId job = 0;
  HostId host = 0;
  std::int64_t chunk_id = 0;
  std::int64_t first_task = 0;
  std::int64_t size = 0;
  int order = 0;  // position among this job's assignments in the round
  bool borrowed = false;
};

struct IdleNotice {
  JobId job = 0;
  HostId host = 0;
  std::int64_t remaining = 0;
  bool borrowed = false;
};

struct RoundResult {
  std::vector<ChunkAssignment> assignments;
  std::vector<IdleNotice> idle;
};

/// One scanning pass over all running applications. For each app, in
/// ascending host order, a schedulable host receives a chunk while
/// unscheduled tasks remain; otherwise a free host that has not yet been
/// reported produces an idle notice.
RoundResult run_scheduling_round(std::map<JobId, AppSchedState>& apps, SimTime clock);
RoundResult run_scheduling_round(AppSchedState& app, SimTime clock);

}  // namespace rcasim
