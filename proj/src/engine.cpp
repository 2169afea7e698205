#include "rcasim/engine.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#ifndef RCASIM_WITHOUT_RCA
#include "rcasim/rca.hpp"
#endif

namespace rcasim {

#ifndef RCASIM_WITHOUT_RCA
struct Simulation::RcaState {
  LendLedger ledger;
  ExclusionHistory history;
  std::set<JobId> asked_for;  // heads that already triggered a request
  std::map<std::int64_t, std::pair<JobId, std::vector<HostId>>> exclusions;
  std::int64_t next_exclusion = 0;
};
#else
struct Simulation::RcaState {};
#endif

namespace {

LendLedger* ledger_of(Simulation::RcaState* s) {
#ifndef RCASIM_WITHOUT_RCA
  return &s->ledger;
#else
  (void)s;
  return nullptr;
#endif
}

}  // namespace

Simulation::Simulation(SimConfig config, const JobSet& jobs)
    : config_(config),
      platform_(build_platform(config.hosts, config.bandwidth_bps, config.latency_s)),
      rca_(std::make_unique<RcaState>()),
      batch_(config.bls, platform_, config.bls.rca ? ledger_of(rca_.get()) : nullptr) {
  if (config_.message_bytes < 0) throw std::invalid_argument("message size must be non-negative");
  message_delay_ = platform_.transfer_delay(config_.message_bytes);
  for (const JobSpec& j : jobs.jobs) {
    if (j.requested_hosts < 1 || j.requested_hosts > platform_.host_count()) {
      throw std::invalid_argument(fmt::format("job {} requests {} hosts; the platform has {}", j.id,
                                              j.requested_hosts, platform_.host_count()));
    }
    if (j.task_count < 1) throw std::invalid_argument(fmt::format("job {} has no tasks", j.id));
    JobSpec spec = j;
    if (config_.policy) spec.policy = *config_.policy;
    if (!specs_.emplace(j.id, spec).second) throw std::invalid_argument(fmt::format("duplicate job id {}", j.id));
    Event ev;
    ev.time = j.arrival;
    ev.kind = EventKind::JobArrival;
    ev.job = j.id;
    events_.push(ev);
  }
}

Simulation::~Simulation() = default;

std::uint64_t Simulation::schedule(Event ev) { return events_.push(ev); }

void Simulation::request_wake() {
  if (wake_pending_ && *wake_pending_ == now()) return;
  Event ev;
  ev.time = now();
  ev.kind = EventKind::SchedulerWake;
  events_.push(ev);
  wake_pending_ = now();
}

JobRecord& Simulation::record_of(JobId job) {
  auto it = records_.find(job);
  if (it == records_.end()) throw std::logic_error(fmt::format("no record for job {}", job));
  return it->second;
}

SimulationResult Simulation::run(std::optional<SimTime> stop) {
  int idle_wakes = 0;
  while (!events_.empty()) {
    if (stop && events_.top().time > *stop) break;
    const Event ev = events_.pop();
    ++processed_;
    if (observer_) observer_(ev);
    const std::size_t before = events_.size() + trace_.size();
    const auto running_before = apps_.size();
    dispatch(ev);
    if (ev.kind == EventKind::SchedulerWake) {
      const bool changed = events_.size() + trace_.size() != before || apps_.size() != running_before;
      idle_wakes = changed ? 0 : idle_wakes + 1;
      if (idle_wakes > 1000) {
        throw std::runtime_error(fmt::format("livelock at t={}s: scheduler wakes make no progress", now().seconds()));
      }
    } else {
      idle_wakes = 0;
    }
  }
  if (events_.empty() && !batch_.idle()) {
    const auto& q = batch_.queue();
    throw std::runtime_error(fmt::format("stall at t={}s: {} queued (head {} needs {} hosts, {} available), {} running",
                                         now().seconds(), q.size(), q.empty() ? -1 : q.front().id,
                                         q.empty() ? 0 : q.front().requested_hosts, batch_.available_now(false),
                                         batch_.running().size()));
  }

  SimulationResult out;
  out.trace = trace_;
  out.hosts = platform_.host_count();
  out.events = processed_;
  out.clock = now();
  out.executed_task_time = executed_;
  out.rca = counters_;
  out.backfill_log = batch_.backfill_log();
  for (const auto& [id, rec] : records_) out.jobs.push_back(rec);
  return out;
}

void Simulation::dispatch(const Event& ev) {
  switch (ev.kind) {
    case EventKind::JobArrival: return on_arrival(ev);
    case EventKind::SchedulerWake: return on_wake(ev);
    case EventKind::JobStart: return on_job_start(ev);
    case EventKind::RcaLendGrant: return on_lend_grant(ev);
    case EventKind::ChunkStart: return on_chunk_start(ev);
    case EventKind::ChunkComplete: return on_chunk_complete(ev);
    case EventKind::JobComplete: return on_job_complete(ev);
    case EventKind::RcaIdleReport: return on_idle_report(ev);
    case EventKind::RcaExclusionRequest: return on_exclusion_request(ev);
    case EventKind::RcaExclusionResponse: return on_exclusion_response(ev);
    case EventKind::RcaExclusionExpiry: return on_exclusion_expiry(ev);
  }
}

void Simulation::on_arrival(const Event& ev) {
  const JobSpec& spec = specs_.at(ev.job);
  batch_.submit(spec, now());
  JobRecord rec;
  rec.id = spec.id;
  rec.category = spec.category;
  rec.hosts = spec.requested_hosts;
  rec.arrival = now();
  rec.tasks = spec.task_count;
  records_.emplace(spec.id, rec);
  request_wake();
}

void Simulation::on_wake(const Event& ev) {
  (void)ev;
  if (wake_pending_ && *wake_pending_ == now()) wake_pending_.reset();

  for (const Allocation& a : batch_.schedule(now())) {
    JobRecord& rec = record_of(a.job);
    rec.start = now();
    rec.borrowed_hosts = static_cast<int>(a.borrowed.size());
    for (HostId h : a.borrowed) {
      Event g;
      g.time = now();
      g.kind = EventKind::RcaLendGrant;
      g.job = a.job;
      g.host = h;
      events_.push(g);
    }
    counters_.lend_grants += static_cast<std::int64_t>(a.borrowed.size());
    Event s;
    s.time = now();
    s.kind = EventKind::JobStart;
    s.job = a.job;
    events_.push(s);
  }

  maybe_request_exclusion();

  const RoundResult round = run_scheduling_round(apps_, now());
  for (const ChunkAssignment& a : round.assignments) {
    Host& host = platform_.host(a.host);
    if (host.user() != a.job) {
      throw std::logic_error(fmt::format("job {} assigned a chunk on host {} it does not hold", a.job, a.host));
    }
    if (host.busy) throw std::logic_error(fmt::format("host {} already executing", a.host));
    host.busy = true;
    const auto& prefix = runtime_.at(a.job).prefix;
    const SimTime dur = SimTime::from_micros(prefix[static_cast<std::size_t>(a.first_task + a.size)] -
                                             prefix[static_cast<std::size_t>(a.first_task)]);
    const SimTime start = now() + message_delay_ * (a.order + 1);
    apps_.at(a.job).slot(a.host)->committed_until = start + dur;
    trace_.record({a.host, a.job, a.chunk_id, RecordKind::SchedOverhead, now(), start, a.borrowed});
    Event c;
    c.time = start;
    c.kind = EventKind::ChunkStart;
    c.job = a.job;
    c.host = a.host;
    c.chunk = a.chunk_id;
    c.value = a.size;
    c.aux = a.first_task;
    c.duration = dur;
    c.borrowed = a.borrowed;
    events_.push(c);
  }
#ifndef RCASIM_WITHOUT_RCA
  if (config_.bls.rca) {
    for (const IdleNotice& n : round.idle) {
      if (n.borrowed) continue;  // no chained lending
      Event r;
      r.time = now() + message_delay_;
      r.kind = EventKind::RcaIdleReport;
      r.job = n.job;
      r.host = n.host;
      r.value = n.remaining;
      events_.push(r);
    }
  }
#endif
}

void Simulation::on_job_start(const Event& ev) {
  const JobSpec& spec = specs_.at(ev.job);
  const Allocation& alloc = batch_.running().at(ev.job).allocation;
  const double mean = spec.profile.mean_task_seconds;
  apps_.emplace(std::piecewise_construct, std::forward_as_tuple(spec.id),
                std::forward_as_tuple(spec.id, spec.policy, spec.task_count, alloc.hosts, alloc.borrowed, mean,
                                      spec.profile.cv * mean, config_.fac_rule));
  Running r;
  r.start = now();
  const std::vector<std::int64_t> times = sample_task_times(spec);
  r.prefix.resize(times.size() + 1, 0);
  std::partial_sum(times.begin(), times.end(), r.prefix.begin() + 1);
  runtime_[spec.id] = std::move(r);
  request_wake();
}

void Simulation::on_lend_grant(const Event& ev) {
  const Host& h = platform_.host(ev.host);
  if (!h.owner) throw std::logic_error(fmt::format("lend grant of unowned host {}", ev.host));
  WorkerSlot* slot = apps_.at(*h.owner).slot(ev.host);
  if (!slot || slot->busy) throw std::logic_error(fmt::format("lend grant of host {} that is not idle", ev.host));
  slot->lent = true;
}

void Simulation::on_chunk_start(const Event& ev) {
  const Host& host = platform_.host(ev.host);
  if (host.user() != ev.job) {
    throw std::logic_error(fmt::format("chunk {} of job {} starting on host {} held by another job", ev.chunk, ev.job,
                                       ev.host));
  }
  Event c = ev;
  c.time = now() + ev.duration;
  c.kind = EventKind::ChunkComplete;
  events_.push(c);
}

void Simulation::on_chunk_complete(const Event& ev) {
  AppSchedState& app = apps_.at(ev.job);
  const std::size_t idx = app.slot_index(ev.host);
  trace_.record({ev.host, ev.job, ev.chunk, RecordKind::Compute, now() - ev.duration, now(), ev.borrowed});
  executed_ += ev.duration;
  app.complete(idx, ev.value, ev.duration.seconds());
  platform_.host(ev.host).busy = false;
  if (app.finished()) {
    Event d;
    d.time = now();
    d.kind = EventKind::JobComplete;
    d.job = ev.job;
    events_.push(d);
  }
  request_wake();
}

void Simulation::on_job_complete(const Event& ev) {
  for (const HostDisposition& d : batch_.complete(ev.job, now())) {
    if (d.what == Disposition::Freed) continue;
    WorkerSlot* slot = apps_.at(*d.to).slot(d.host);
    if (!slot) throw std::logic_error(fmt::format("host {} has no slot in job {}", d.host, *d.to));
    if (d.what == Disposition::TransferredToBorrower) {
      slot->borrowed = false;
    } else {
      slot->lent = false;
    }
    slot->reported = false;
  }
  JobRecord& rec = record_of(ev.job);
  rec.end = now();
#ifndef RCASIM_WITHOUT_RCA
  const JobSpec& spec = specs_.at(ev.job);
  rca_->history.record(spec.category, (now() - *rec.start).seconds(), spec.estimated_runtime);
#endif
  apps_.erase(ev.job);
  runtime_.erase(ev.job);
  request_wake();
}

#ifndef RCASIM_WITHOUT_RCA

void Simulation::on_idle_report(const Event& ev) {
  auto it = apps_.find(ev.job);
  if (it == apps_.end()) return;  // owner finished while the report was in flight
  const AppSchedState& app = it->second;
  const Host& h = platform_.host(ev.host);
  const WorkerSlot* slot = app.slot(ev.host);
  if (h.owner != ev.job || h.borrower || !slot || slot->busy || slot->lent || slot->borrowed) return;
  if (app.remaining() > 0 && !slot->excluded) return;
  if (report_idle(rca_->ledger, platform_, app, ev.host, now())) {
    ++counters_.idle_reports;
    request_wake();
  }
}

void Simulation::maybe_request_exclusion() {
  if (!config_.bls.rca || !config_.rca_exclusion) return;
  const auto& res = batch_.reservation();
  if (!res || rca_->asked_for.count(res->job)) return;
  const JobSpec& head = specs_.at(res->job);
  const int shortfall = head.requested_hosts - static_cast<int>(batch_.available_now(false));
  if (shortfall <= 0) return;
  for (const auto& [id, app] : apps_) {
    if (!rca_->history.finishes_early(specs_.at(id).category, config_.history_threshold)) continue;
    const auto usable = std::count_if(app.slots().begin(), app.slots().end(), [](const WorkerSlot& s) {
      return !s.excluded && !s.lent && !s.borrowed;
    });
    const int k = std::min<int>(shortfall, static_cast<int>(usable));
    auto req = request_exclusion(id, k, head.estimated_runtime, now(), true);
    if (!req) continue;
    rca_->asked_for.insert(res->job);
    ++counters_.exclusion_requests;
    Event e;
    e.time = now() + message_delay_;
    e.kind = EventKind::RcaExclusionRequest;
    e.job = id;
    e.value = req->hosts;
    e.duration = req->duration;
    events_.push(e);
    return;
  }
}

void Simulation::on_exclusion_request(const Event& ev) {
  Event r;
  r.time = now() + message_delay_;
  r.kind = EventKind::RcaExclusionResponse;
  r.job = ev.job;
  auto it = apps_.find(ev.job);
  if (it == apps_.end()) {
    events_.push(r);
    return;
  }
  const ExclusionRequest req{ev.job, static_cast<int>(ev.value), ev.duration, now()};
  const ExclusionResponse resp = decide_exclusion(it->second, req, config_.accept_threshold);
  r.value = resp.accepted ? 1 : 0;
  if (resp.accepted) {
    const std::int64_t id = rca_->next_exclusion++;
    rca_->exclusions[id] = {ev.job, resp.hosts};
    r.aux = id;
    Event x;
    x.time = now() + ev.duration;
    x.kind = EventKind::RcaExclusionExpiry;
    x.job = ev.job;
    x.aux = id;
    events_.push(x);
    request_wake();
  }
  events_.push(r);
}

void Simulation::on_exclusion_response(const Event& ev) {
  if (ev.value != 0) {
    ++counters_.exclusions_accepted;
  } else {
    ++counters_.exclusions_rejected;
  }
  request_wake();
}

void Simulation::on_exclusion_expiry(const Event& ev) {
  auto node = rca_->exclusions.extract(ev.aux);
  if (node.empty()) return;
  auto it = apps_.find(node.mapped().first);
  if (it == apps_.end()) return;
  for (HostId h : node.mapped().second) {
    WorkerSlot* slot = it->second.slot(h);
    if (!slot || !slot->excluded) continue;
    slot->excluded = false;
    const LendEntry* e = rca_->ledger.find(h);
    if (!slot->lent && e && !e->borrower && e->owner == ev.job) {
      rca_->ledger.remove(h);
      slot->reported = false;
    }
  }
  request_wake();
}

#else

void Simulation::on_idle_report(const Event&) { throw std::logic_error("RCA event in a build without RCA"); }
void Simulation::maybe_request_exclusion() {}
void Simulation::on_exclusion_request(const Event&) { throw std::logic_error("RCA event in a build without RCA"); }
void Simulation::on_exclusion_response(const Event&) { throw std::logic_error("RCA event in a build without RCA"); }
void Simulation::on_exclusion_expiry(const Event&) { throw std::logic_error("RCA event in a build without RCA"); }

#endif

SimulationResult simulate(const SimConfig& config, const JobSet& jobs) {
  Simulation sim(config, jobs);
  return sim.run();
}

}  // namespace rcasim
