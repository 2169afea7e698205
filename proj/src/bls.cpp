#include "rcasim/bls.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>
#include <set>
#include <tuple>

#ifndef RCASIM_WITHOUT_RCA
#include "rcasim/rca.hpp"
#endif

namespace rcasim {

BatchScheduler::BatchScheduler(BlsConfig config, Platform& platform, LendLedger* ledger)
    : config_(config), platform_(platform), ledger_(ledger) {
#ifdef RCASIM_WITHOUT_RCA
  if (config_.rca) throw std::invalid_argument("this build has no RCA support");
  ledger_ = nullptr;
#endif
}

std::size_t BatchScheduler::submit(const JobSpec& job, SimTime clock) {
  (void)clock;
  if (!seen_.insert(job.id).second) throw std::invalid_argument(fmt::format("duplicate job id {}", job.id));
  if (job.requested_hosts < 1 || job.requested_hosts > platform_.host_count()) {
    throw std::invalid_argument(fmt::format("job {} requests {} hosts on a {}-host platform", job.id,
                                            job.requested_hosts, platform_.host_count()));
  }
  queue_.push_back(job);
  return queue_.size() - 1;
}

bool BatchScheduler::lending(bool for_backfill) const {
  if (!config_.rca || ledger_ == nullptr) return false;
  return !for_backfill || config_.lend_to_backfill;
}

std::vector<HostId> BatchScheduler::lendable_hosts() const {
#ifndef RCASIM_WITHOUT_RCA
  if (ledger_ != nullptr) return ledger_->lendable();
#endif
  return {};
}

std::size_t BatchScheduler::available_now(bool for_backfill) const {
  std::size_t n = platform_.free_hosts().size();
  if (lending(for_backfill)) n += lendable_hosts().size();
  return n;
}

SimTime BatchScheduler::host_available_at(const Host& h, SimTime clock) const {
  if (h.free()) return clock;
#ifndef RCASIM_WITHOUT_RCA
  if (lending(false) && !h.borrower) {
    if (const LendEntry* e = ledger_->find(h.id); e && !e->borrower) return clock;
  }
#endif
  const auto user = h.user();
  auto it = running_.find(*user);
  if (it == running_.end()) return clock;
  return std::max(clock, it->second.estimated_end);
}

std::optional<Reservation> BatchScheduler::compute_reservation(SimTime clock) const {
  if (queue_.empty()) return std::nullopt;
  const JobSpec& head = queue_.front();
  const auto need = static_cast<std::size_t>(head.requested_hosts);
  if (need > platform_.hosts().size()) return std::nullopt;
  std::vector<SimTime> times;
  times.reserve(platform_.hosts().size());
  for (const Host& h : platform_.hosts()) times.push_back(host_available_at(h, clock));
  std::vector<SimTime> sorted = times;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(need - 1), sorted.end());
  Reservation r;
  r.job = head.id;
  r.start = sorted[need - 1];

  // Any `need` hosts available by the shadow time will do. Reserve the
  // ones that are unusable now first so free and lendable hosts stay open
  // as extra hosts for long backfill candidates.
  const std::set<HostId> lendable = [&] {
    const auto l = lending(false) ? lendable_hosts() : std::vector<HostId>{};
    return std::set<HostId>(l.begin(), l.end());
  }();
  std::vector<std::tuple<int, HostId>> pick;
  for (const Host& h : platform_.hosts()) {
    if (times[static_cast<std::size_t>(h.id)] > r.start) continue;
    const int usable_now = h.free() ? 2 : lendable.count(h.id) ? 1 : 0;
    pick.emplace_back(usable_now, h.id);
  }
  std::sort(pick.begin(), pick.end());
  for (std::size_t i = 0; i < need; ++i) r.hosts.push_back(std::get<1>(pick[i]));
  std::sort(r.hosts.begin(), r.hosts.end());
  return r;
}

Allocation BatchScheduler::start(const JobSpec& job, std::vector<HostId> free_pick, std::vector<HostId> lend_pick,
                                 SimTime clock, bool backfilled) {
  Allocation a;
  a.job = job.id;
  a.start = clock;
  a.backfilled = backfilled;
  for (HostId h : free_pick) {
    Host& host = platform_.host(h);
    if (!host.free()) throw std::logic_error(fmt::format("host {} is not free", h));
    host.owner = job.id;
  }
#ifndef RCASIM_WITHOUT_RCA
  for (HostId h : lend_pick) {
    ledger_->set_borrower(h, job.id);
    platform_.host(h).borrower = job.id;
  }
#else
  if (!lend_pick.empty()) throw std::logic_error("lending in a build without RCA");
#endif
  a.hosts = free_pick;
  a.hosts.insert(a.hosts.end(), lend_pick.begin(), lend_pick.end());
  std::sort(a.hosts.begin(), a.hosts.end());
  a.borrowed = std::move(lend_pick);
  std::sort(a.borrowed.begin(), a.borrowed.end());
  if (static_cast<int>(a.hosts.size()) != job.requested_hosts) {
    throw std::logic_error(fmt::format("allocation of job {} has {} hosts, requested {}", job.id, a.hosts.size(),
                                       job.requested_hosts));
  }
  const SimTime est = SimTime::from_seconds(job.estimated_runtime);
  running_.emplace(job.id, RunningJob{job, a, clock + est});
  return a;
}

std::vector<Allocation> BatchScheduler::fcfs_pass(SimTime clock) {
  std::vector<Allocation> out;
  reservation_.reset();
  while (!queue_.empty()) {
    const JobSpec head = queue_.front();
    const auto need = static_cast<std::size_t>(head.requested_hosts);
    std::vector<HostId> free = platform_.free_hosts();
    std::vector<HostId> lend = lending(false) ? lendable_hosts() : std::vector<HostId>{};
    if (free.size() + lend.size() < need) {
      reservation_ = compute_reservation(clock);
      break;
    }
    const std::size_t from_free = std::min(need, free.size());
    free.resize(from_free);
    lend.resize(need - from_free);
    queue_.pop_front();
    out.push_back(start(head, std::move(free), std::move(lend), clock, false));
  }
  return out;
}

std::vector<Allocation> BatchScheduler::backfill_pass(SimTime clock) {
  std::vector<Allocation> out;
  if (!config_.backfill || !reservation_ || queue_.size() < 2) return out;
  std::size_t i = 1;
  while (i < queue_.size() && reservation_) {
    const JobSpec cand = queue_[i];
    const auto need = static_cast<std::size_t>(cand.requested_hosts);
    const std::vector<HostId> free = platform_.free_hosts();
    const std::vector<HostId> lend = lending(true) ? lendable_hosts() : std::vector<HostId>{};
    if (free.size() + lend.size() < need) {
      ++i;
      continue;
    }
    const bool ends_before_shadow = clock + SimTime::from_seconds(cand.estimated_runtime) <= reservation_->start;
    const auto& reserved = reservation_->hosts;
    auto is_reserved = [&](HostId h) { return std::binary_search(reserved.begin(), reserved.end(), h); };

    std::vector<HostId> free_pick, lend_pick;
    auto take = [&](const std::vector<HostId>& pool, std::vector<HostId>& dst, bool want_reserved) {
      for (HostId h : pool) {
        if (free_pick.size() + lend_pick.size() == need) return;
        if (is_reserved(h) == want_reserved) dst.push_back(h);
      }
    };
    take(free, free_pick, false);
    if (ends_before_shadow) take(free, free_pick, true);
    take(lend, lend_pick, false);
    if (ends_before_shadow) take(lend, lend_pick, true);
    if (free_pick.size() + lend_pick.size() < need) {
      ++i;
      continue;
    }

    const SimTime before = reservation_->start;
    queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
    out.push_back(start(cand, std::move(free_pick), std::move(lend_pick), clock, true));
    reservation_ = compute_reservation(clock);
    backfill_log_.push_back({cand.id, reservation_ ? reservation_->job : 0, clock, before,
                             reservation_ ? reservation_->start : before});
  }
  return out;
}

std::vector<Allocation> BatchScheduler::schedule(SimTime clock) {
  std::vector<Allocation> out = fcfs_pass(clock);
  if (config_.backfill) {
    auto more = backfill_pass(clock);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

std::vector<HostDisposition> BatchScheduler::complete(JobId job, SimTime clock) {
  (void)clock;
  if (running_.erase(job) == 0) throw std::invalid_argument(fmt::format("complete: job {} is not running", job));
#ifndef RCASIM_WITHOUT_RCA
  if (ledger_ != nullptr) return reconcile_ownership(job, *ledger_, platform_);
#endif
  std::vector<HostDisposition> out;
  for (Host& h : platform_.hosts()) {
    if (h.owner == job) {
      h.owner.reset();
      h.busy = false;
      out.push_back({h.id, Disposition::Freed, std::nullopt});
    }
  }
  return out;
}

}  // namespace rcasim
