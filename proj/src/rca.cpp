#include "rcasim/rca.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace rcasim {

bool LendLedger::add(HostId host, JobId owner, SimTime since) {
  auto [it, inserted] = entries_.try_emplace(host, LendEntry{host, owner, std::nullopt, since});
  if (!inserted && it->second.owner != owner) {
    throw std::logic_error(fmt::format("ledger: host {} already listed for job {}", host, it->second.owner));
  }
  return inserted;
}

void LendLedger::remove(HostId host) { entries_.erase(host); }

void LendLedger::set_borrower(HostId host, JobId borrower) {
  auto it = entries_.find(host);
  if (it == entries_.end()) throw std::logic_error(fmt::format("ledger: host {} is not lendable", host));
  if (it->second.borrower) throw std::logic_error(fmt::format("ledger: host {} is already lent", host));
  if (it->second.owner == borrower) throw std::logic_error("ledger: a job cannot borrow its own host");
  it->second.borrower = borrower;
}

const LendEntry* LendLedger::find(HostId host) const {
  auto it = entries_.find(host);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<HostId> LendLedger::lendable() const {
  std::vector<HostId> out;
  for (const auto& [h, e] : entries_) {
    if (!e.borrower) out.push_back(h);
  }
  return out;
}

std::size_t LendLedger::lendable_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& kv) { return !kv.second.borrower; }));
}

bool report_idle(LendLedger& ledger, const Platform& platform, const AppSchedState& app, HostId host, SimTime clock) {
  const Host& h = platform.host(host);
  if (h.owner != app.job()) {
    throw std::logic_error(fmt::format("idle report: host {} is not owned by job {}", host, app.job()));
  }
  const WorkerSlot* slot = app.slot(host);
  if (!slot) throw std::logic_error(fmt::format("idle report: host {} not in job {} allocation", host, app.job()));
  if (slot->busy || h.busy) {
    throw std::logic_error(fmt::format("idle report: host {} of job {} is running a chunk", host, app.job()));
  }
  if (app.remaining() > 0 && !slot->excluded) {
    throw std::logic_error(fmt::format("idle report: job {} still has work assignable to host {}", app.job(), host));
  }
  return ledger.add(host, app.job(), clock);
}

std::vector<HostId> grant_lend(LendLedger& ledger, Platform& platform, JobId queued_job, int needed, bool enabled) {
  std::vector<HostId> granted;
  if (!enabled || needed <= 0) return granted;
  for (HostId h : ledger.lendable()) {
    if (static_cast<int>(granted.size()) == needed) break;
    ledger.set_borrower(h, queued_job);
    platform.host(h).borrower = queued_job;
    granted.push_back(h);
  }
  return granted;
}

std::optional<ExclusionRequest> request_exclusion(JobId target, int k, double duration_s, SimTime clock,
                                                  bool target_running) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("exclusion request: duration must be positive");
  if (!target_running) throw std::invalid_argument(fmt::format("exclusion request: job {} is not running", target));
  if (k < 0) throw std::invalid_argument("exclusion request: negative host count");
  if (k == 0) return std::nullopt;
  return ExclusionRequest{target, k, SimTime::from_seconds(duration_s), clock};
}

double exclusion_inflation(const AppSchedState& app, int k) {
  if (k <= 0 || app.remaining() == 0) return 0.0;
  const auto p = std::count_if(app.slots().begin(), app.slots().end(),
                               [](const WorkerSlot& s) { return !s.excluded && !s.lent; });
  if (k >= p) return std::numeric_limits<double>::infinity();
  return static_cast<double>(k) / static_cast<double>(p - k);
}

ExclusionResponse decide_exclusion(AppSchedState& app, const ExclusionRequest& request, double threshold) {
  ExclusionResponse resp;
  resp.job = app.job();
  if (request.target != app.job()) throw std::invalid_argument("exclusion request addressed to another job");
  resp.predicted_inflation = exclusion_inflation(app, request.hosts);
  if (resp.predicted_inflation > threshold) return resp;

  std::vector<WorkerSlot*> candidates;
  for (auto& s : app.slots()) {
    if (!s.excluded && !s.lent && !s.borrowed) candidates.push_back(&s);
  }
  if (static_cast<int>(candidates.size()) < request.hosts) {
    resp.predicted_inflation = std::numeric_limits<double>::infinity();
    return resp;
  }
  std::sort(candidates.begin(), candidates.end(), [](const WorkerSlot* a, const WorkerSlot* b) {
    const SimTime ca = a->busy ? a->committed_until : SimTime{};
    const SimTime cb = b->busy ? b->committed_until : SimTime{};
    return std::tie(a->busy, ca, a->host) < std::tie(b->busy, cb, b->host);
  });
  resp.accepted = true;
  for (int i = 0; i < request.hosts; ++i) {
    candidates[static_cast<std::size_t>(i)]->excluded = true;
    resp.hosts.push_back(candidates[static_cast<std::size_t>(i)]->host);
  }
  std::sort(resp.hosts.begin(), resp.hosts.end());
  return resp;
}

std::vector<HostDisposition> reconcile_ownership(JobId completed, LendLedger& ledger, Platform& platform) {
  std::vector<HostDisposition> out;
  for (Host& h : platform.hosts()) {
    if (h.owner == completed) {
      const LendEntry* e = ledger.find(h.id);
      if (h.borrower) {
        if (!e || e->borrower != h.borrower) {
          throw std::logic_error(fmt::format("ledger inconsistency: host {} lent to job {} without a ledger record",
                                             h.id, *h.borrower));
        }
        out.push_back({h.id, Disposition::TransferredToBorrower, h.borrower});
        h.owner = h.borrower;
        h.borrower.reset();
      } else {
        if (e && e->borrower) {
          throw std::logic_error(fmt::format("ledger inconsistency: host {} recorded as lent but has no borrower", h.id));
        }
        out.push_back({h.id, Disposition::Freed, std::nullopt});
        h.owner.reset();
        h.busy = false;
      }
      ledger.remove(h.id);
    } else if (h.borrower == completed) {
      const LendEntry* e = ledger.find(h.id);
      if (!e || e->borrower != completed) {
        throw std::logic_error(fmt::format("ledger inconsistency: host {} borrowed by job {} without a ledger record",
                                           h.id, completed));
      }
      out.push_back({h.id, Disposition::ReturnedToOwner, h.owner});
      h.borrower.reset();
      h.busy = false;
      ledger.remove(h.id);
    }
  }
  return out;
}

void ExclusionHistory::record(char category, double actual_runtime, double estimated_runtime) {
  if (!(estimated_runtime > 0.0)) return;
  auto& [sum, n] = sums_[category];
  sum += actual_runtime / estimated_runtime;
  ++n;
}

std::optional<double> ExclusionHistory::mean_ratio(char category) const {
  auto it = sums_.find(category);
  if (it == sums_.end() || it->second.second == 0) return std::nullopt;
  return it->second.first / it->second.second;
}

bool ExclusionHistory::finishes_early(char category, double threshold) const {
  auto r = mean_ratio(category);
  return r && *r <= 1.0 - threshold;
}

}  // namespace rcasim
