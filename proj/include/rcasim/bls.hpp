#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "rcasim/platform.hpp"
#include "rcasim/sim_time.hpp"
#include "rcasim/workload.hpp"

namespace rcasim {

class LendLedger;

struct BlsConfig {
  bool backfill = true;
  bool rca = false;
  bool lend_to_backfill = true;  // lent hosts usable by backfilled jobs too
};

struct Allocation {
  JobId job = 0;
  std::vector<HostId> hosts;     // ascending
  std::vector<HostId> borrowed;  // subset obtained through lending
  SimTime start;
  bool backfilled = false;
};

/// EASY reservation of the queue head.
struct Reservation {
  JobId job = 0;
  SimTime start;
  std::vector<HostId> hosts;
};

/// Audit entry for one backfill decision: the head's reserved start before
/// and after the backfilled job was placed.
struct BackfillDecision {
  JobId job = 0;
  JobId head = 0;
  SimTime clock;
  SimTime reserved_before;
  SimTime reserved_after;
};

struct RunningJob {
  JobSpec spec;
  Allocation allocation;
  SimTime estimated_end;
};

/// FCFS with EASY backfilling over a Platform. With RCA enabled, idle hosts
/// in the lend ledger count as available: free hosts are used first
/// (lowest id first) and lendable hosts only top up a shortfall.
class BatchScheduler {
 public:
  BatchScheduler(BlsConfig config, Platform& platform, LendLedger* ledger = nullptr);

  /// Appends the job in arrival order and returns its queue position.
  std::size_t submit(const JobSpec& job, SimTime clock);

  /// Starts jobs from the head while they fit; sets the reservation of
  /// the first job that does not.
  std::vector<Allocation> fcfs_pass(SimTime clock);
  /// EASY backfill behind the reserved head. No-op without a reservation.
  std::vector<Allocation> backfill_pass(SimTime clock);
  /// fcfs_pass followed by backfill_pass when backfilling is enabled.
  std::vector<Allocation> schedule(SimTime clock);

  /// Releases the job's hosts. Lent hosts follow the RCA ownership rules.
  std::vector<HostDisposition> complete(JobId job, SimTime clock);

  /// Reservation the head job would get now, from estimated runtimes.
  std::optional<Reservation> compute_reservation(SimTime clock) const;

  const std::deque<JobSpec>& queue() const { return queue_; }
  const std::map<JobId, RunningJob>& running() const { return running_; }
  const std::optional<Reservation>& reservation() const { return reservation_; }
  const std::vector<BackfillDecision>& backfill_log() const { return backfill_log_; }
  const BlsConfig& config() const { return config_; }
  bool idle() const { return queue_.empty() && running_.empty(); }

  /// Hosts available to a job started now: free, plus lendable when RCA
  /// applies. Counts only.
  std::size_t available_now(bool for_backfill) const;

 private:
  bool lending(bool for_backfill) const;
  std::vector<HostId> lendable_hosts() const;
  SimTime host_available_at(const Host& h, SimTime clock) const;
  Allocation start(const JobSpec& job, std::vector<HostId> free_pick, std::vector<HostId> lend_pick, SimTime clock,
                   bool backfilled);

  BlsConfig config_;
  Platform& platform_;
  LendLedger* ledger_;
  std::deque<JobSpec> queue_;
  std::map<JobId, RunningJob> running_;
  std::set<JobId> seen_;
  std::optional<Reservation> reservation_;
  std::vector<BackfillDecision> backfill_log_;
};

}  // namespace rcasim
