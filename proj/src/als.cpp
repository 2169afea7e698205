#include "rcasim/als.hpp"

#include <algorithm>
#include <stdexcept>

namespace rcasim {

AppSchedState::AppSchedState(JobId job, ChunkPolicyKind policy, std::int64_t total_tasks,
                             std::span<const HostId> hosts, std::span<const HostId> borrowed, double task_mean,
                             double task_stddev, FactoringRule fac_rule)
    : job_(job), policy_(policy), total_(total_tasks), remaining_(total_tasks) {
  if (total_tasks < 0) throw std::invalid_argument("app: negative task count");
  if (hosts.empty()) throw std::invalid_argument("app: a running job needs at least one host");
  std::vector<HostId> sorted(hosts.begin(), hosts.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("app: duplicate host in allocation");
  }
  slots_.reserve(sorted.size());
  for (HostId h : sorted) {
    WorkerSlot s;
    s.host = h;
    s.borrowed = std::find(borrowed.begin(), borrowed.end(), h) != borrowed.end();
    slots_.push_back(s);
  }
  if (policy == ChunkPolicyKind::Fac) {
    fac_.emplace(task_mean, task_stddev, static_cast<std::int64_t>(slots_.size()), fac_rule);
  }
}

WorkerSlot* AppSchedState::slot(HostId host) {
  auto it = std::lower_bound(slots_.begin(), slots_.end(), host, [](const WorkerSlot& s, HostId h) { return s.host < h; });
  return it != slots_.end() && it->host == host ? &*it : nullptr;
}

const WorkerSlot* AppSchedState::slot(HostId host) const {
  return const_cast<AppSchedState*>(this)->slot(host);
}

std::size_t AppSchedState::slot_index(HostId host) const {
  const WorkerSlot* s = slot(host);
  if (!s) throw std::out_of_range("app: host not in allocation");
  return static_cast<std::size_t>(s - slots_.data());
}

std::int64_t AppSchedState::chunk_for(std::size_t slot_index) {
  if (remaining_ == 0) return 0;
  const auto p = static_cast<std::int64_t>(slots_.size());
  switch (policy_) {
    case ChunkPolicyKind::Static:
      return std::min(remaining_, chunk_static(total_, p, static_issued_));
    case ChunkPolicyKind::Gss:
      return chunk_gss(remaining_, p);
    case ChunkPolicyKind::Fac:
      return fac_->next(remaining_);
    case ChunkPolicyKind::Af: {
      std::vector<WorkerStats> stats;
      stats.reserve(slots_.size());
      for (const auto& s : slots_) stats.push_back(s.stats);
      return chunk_af(stats, slot_index, remaining_);
    }
  }
  return 0;
}

std::int64_t AppSchedState::issue(std::size_t slot_index, std::int64_t size) {
  if (size < 1 || size > remaining_) throw std::logic_error("app: chunk size outside [1, remaining]");
  WorkerSlot& s = slots_.at(slot_index);
  if (s.busy) throw std::logic_error("app: host already executing a chunk");
  const std::int64_t first = total_ - remaining_;
  remaining_ -= size;
  ++running_;
  if (policy_ == ChunkPolicyKind::Static) ++static_issued_;
  s.busy = true;
  s.reported = false;
  return first;
}

void AppSchedState::complete(std::size_t slot_index, std::int64_t size, double seconds) {
  WorkerSlot& s = slots_.at(slot_index);
  if (!s.busy) throw std::logic_error("app: completing a chunk on an idle host");
  s.busy = false;
  --running_;
  if (policy_ == ChunkPolicyKind::Af) s.stats.observe(seconds, size);
}

RoundResult run_scheduling_round(AppSchedState& app, SimTime clock) {
  (void)clock;
  RoundResult out;
  int order = 0;
  auto& slots = app.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    WorkerSlot& s = slots[i];
    if (s.busy || s.lent) continue;
    if (!s.excluded && app.remaining() > 0) {
      const std::int64_t size = app.chunk_for(i);
      if (size > 0) {
        ChunkAssignment a;
        a.job = app.job();
        a.host = s.host;
        a.size = size;
        a.first_task = app.issue(i, size);
        a.chunk_id = app.next_chunk_id();
        a.order = order++;
        a.borrowed = s.borrowed;
        out.assignments.push_back(a);
        continue;
      }
    }
    if (!s.reported) {
      s.reported = true;
      out.idle.push_back({app.job(), s.host, app.remaining(), s.borrowed});
    }
  }
  return out;
}

RoundResult run_scheduling_round(std::map<JobId, AppSchedState>& apps, SimTime clock) {
  RoundResult out;
  for (auto& [id, app] : apps) {
    RoundResult r = run_scheduling_round(app, clock);
    out.assignments.insert(out.assignments.end(), r.assignments.begin(), r.assignments.end());
    out.idle.insert(out.idle.end(), r.idle.begin(), r.idle.end());
  }
  return out;
}

}  // namespace rcasim
