#pragma once

#include <map>
#include <optional>
#include <vector>

#include "rcasim/als.hpp"
#include "rcasim/platform.hpp"
#include "rcasim/sim_time.hpp"

namespace rcasim {

/// Idle hosts reported by their owners, and who (if anyone) borrowed them.
///
/// The owner keeps ownership of a lent host. A host has at most one entry;
/// an entry with a borrower is executing only that borrower's chunks.
struct LendEntry {
  HostId host = 0;
  JobId owner = 0;
  std::optional<JobId> borrower;
  SimTime since;
};

class LendLedger {
 public:
  /// Adds a lendable host. Returns false (no-op) if it is already listed.
  bool add(HostId host, JobId owner, SimTime since);
  void remove(HostId host);
  void set_borrower(HostId host, JobId borrower);

  const LendEntry* find(HostId host) const;
  bool contains(HostId host) const { return entries_.count(host) != 0; }

  /// Unborrowed hosts in ascending id order.
  std::vector<HostId> lendable() const;
  std::size_t lendable_count() const;
  const std::map<HostId, LendEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<HostId, LendEntry> entries_;
};

/// App-to-batch idle report. The host must be owned by the job, not running
/// a chunk, and have nothing assignable left (no remaining work, or
/// excluded). Returns true if the host newly became lendable.
bool report_idle(LendLedger& ledger, const Platform& platform, const AppSchedState& app, HostId host,
                 SimTime clock);

/// Marks up to `needed` lendable hosts (lowest ids first) as borrowed by
/// `queued_job`. Grants nothing when RCA is disabled.
std::vector<HostId> grant_lend(LendLedger& ledger, Platform& platform, JobId queued_job, int needed, bool enabled);

struct ExclusionRequest {
  JobId target = 0;
  int hosts = 0;
  SimTime duration;
  SimTime issued;
};

struct ExclusionResponse {
  JobId job = 0;
  bool accepted = false;
  std::vector<HostId> hosts;
  double predicted_inflation = 0.0;
};

/// Batch-to-app request to stop scheduling on `k` hosts for `duration_s`.
/// Returns nothing for k = 0.
std::optional<ExclusionRequest> request_exclusion(JobId target, int k, double duration_s, SimTime clock,
                                                  bool target_running);

/// Predicted completion-time inflation of giving up k schedulable hosts:
/// 0 when no unscheduled work remains, k / (P - k) otherwise.
double exclusion_inflation(const AppSchedState& app, int k);

/// App-side decision. Accepts iff the predicted inflation is within
/// `threshold`; on accept the k hosts with the least committed work (idle
/// first) become excluded. A rejection leaves the app untouched.
ExclusionResponse decide_exclusion(AppSchedState& app, const ExclusionRequest& request, double threshold);

/// Host bookkeeping when `completed` finishes. Its unlent hosts go free and
/// leave the ledger; hosts it lent move to their borrower for the rest of
/// the borrower's run; hosts it borrowed return to their still-running
/// owner.
std::vector<HostDisposition> reconcile_ownership(JobId completed, LendLedger& ledger, Platform& platform);

/// Completion-vs-estimate history per job category, used to pick
/// exclusion targets.
class ExclusionHistory {
 public:
  void record(char category, double actual_runtime, double estimated_runtime);
  /// Mean actual/estimate of the category, if any job of it completed.
  std::optional<double> mean_ratio(char category) const;
  bool finishes_early(char category, double threshold) const;

 private:
  std::map<char, std::pair<double, int>> sums_;
};

}  // namespace rcasim
