#include "rcasim/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace rcasim {

SystemMetrics compute_system_metrics(const Trace& trace, int hosts) {
  if (hosts < 1) throw std::invalid_argument("system metrics: host count must be positive");
  if (trace.empty()) throw std::invalid_argument("system metrics: empty trace");
  SystemMetrics m;
  m.per_host_busy.assign(static_cast<std::size_t>(hosts), SimTime{});
  m.t_first_start = SimTime::max();
  for (const auto& r : trace.records()) {
    m.t_first_start = std::min(m.t_first_start, r.start);
    m.t_last_complete = std::max(m.t_last_complete, r.end);
    if (r.kind == RecordKind::Compute) {
      if (r.host < 0 || r.host >= hosts) throw std::out_of_range(fmt::format("trace host {} outside platform", r.host));
      m.per_host_busy[static_cast<std::size_t>(r.host)] += r.duration();
      m.busy_total += r.duration();
    } else if (r.kind == RecordKind::SchedOverhead) {
      m.overhead_total += r.duration();
    }
  }
  const SimTime span = m.t_last_complete - m.t_first_start;
  m.makespan_seconds = span.seconds();
  if (span.micros() <= 0) throw std::invalid_argument("system metrics: trace spans zero time");
  m.su_percent = static_cast<double>(m.busy_total.micros()) /
                 (static_cast<double>(hosts) * static_cast<double>(span.micros())) * 100.0;
  return m;
}

double system_utilization(const Trace& trace, int hosts) { return compute_system_metrics(trace, hosts).su_percent; }

double makespan(const Trace& trace) {
  if (trace.empty()) throw std::invalid_argument("makespan: empty trace");
  SimTime first = SimTime::max(), last;
  for (const auto& r : trace.records()) {
    first = std::min(first, r.start);
    last = std::max(last, r.end);
  }
  return (last - first).seconds();
}

double makespan(const Trace& trace, std::span<const JobRecord> jobs) {
  for (const auto& j : jobs) {
    if (!j.end) throw std::invalid_argument(fmt::format("makespan: job {} has not completed", j.id));
  }
  return makespan(trace);
}

std::string_view to_string(SeriesMode mode) {
  return mode == SeriesMode::Cumulative ? "cumulative" : "instantaneous";
}

std::optional<SeriesMode> parse_series_mode(std::string_view s) {
  if (s == "cumulative") return SeriesMode::Cumulative;
  if (s == "instantaneous") return SeriesMode::Instantaneous;
  return std::nullopt;
}

std::vector<SeriesPoint> utilization_timeseries(const Trace& trace, int hosts, double bin_seconds, SeriesMode mode) {
  if (!(bin_seconds > 0.0)) throw std::invalid_argument("utilization series: bin must be positive");
  if (hosts < 1) throw std::invalid_argument("utilization series: host count must be positive");
  if (trace.empty()) return {};
  SimTime first = SimTime::max(), last;
  for (const auto& r : trace.records()) {
    first = std::min(first, r.start);
    last = std::max(last, r.end);
  }
  const std::int64_t span = (last - first).micros();
  if (span <= 0) return {};
  const std::int64_t bin = std::max<std::int64_t>(1, std::llround(bin_seconds * 1e6));
  const std::size_t bins = static_cast<std::size_t>((span + bin - 1) / bin);

  std::vector<std::int64_t> busy(bins, 0);
  for (const auto& r : trace.records()) {
    if (r.kind != RecordKind::Compute) continue;
    std::int64_t s = (r.start - first).micros();
    const std::int64_t e = (r.end - first).micros();
    while (s < e) {
      const auto k = static_cast<std::size_t>(s / bin);
      const std::int64_t bin_end = std::min<std::int64_t>(static_cast<std::int64_t>(k + 1) * bin, span);
      const std::int64_t piece = std::min(e, bin_end) - s;
      busy[k] += piece;
      s += piece;
    }
  }

  std::vector<SeriesPoint> out;
  out.reserve(bins);
  std::int64_t cumulative = 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const std::int64_t start = static_cast<std::int64_t>(k) * bin;
    const std::int64_t width = std::min(bin, span - start);
    cumulative += busy[k];
    SeriesPoint p;
    p.bin_start = static_cast<double>(start) * 1e-6;
    p.bin_width = static_cast<double>(width) * 1e-6;
    if (mode == SeriesMode::Instantaneous) {
      p.percent = static_cast<double>(busy[k]) / (static_cast<double>(hosts) * static_cast<double>(width)) * 100.0;
    } else {
      p.percent = static_cast<double>(cumulative) / (static_cast<double>(hosts) * static_cast<double>(start + width)) * 100.0;
    }
    out.push_back(p);
  }
  return out;
}

double series_average(std::span<const SeriesPoint> series, SeriesMode mode) {
  if (series.empty()) return 0.0;
  if (mode == SeriesMode::Cumulative) return series.back().percent;
  double weighted = 0.0, width = 0.0;
  for (const auto& p : series) {
    weighted += p.percent * p.bin_width;
    width += p.bin_width;
  }
  return weighted / width;
}

JobStats job_stats(const Trace& trace, JobId job, SimTime job_start) {
  std::map<HostId, SimTime> finish;
  JobStats s;
  s.job_id = job;
  for (const auto& r : trace.records()) {
    if (r.job != job || r.kind != RecordKind::Compute) continue;
    auto [it, inserted] = finish.try_emplace(r.host, r.end);
    if (!inserted) it->second = std::max(it->second, r.end);
    ++s.chunks;
  }
  if (finish.empty()) throw std::invalid_argument(fmt::format("job {} executed no chunks", job));
  double sum = 0.0, mx = 0.0;
  for (const auto& [host, end] : finish) {
    const double f = (end - job_start).seconds();
    sum += f;
    mx = std::max(mx, f);
  }
  s.workers = static_cast<int>(finish.size());
  s.max_finish = mx;
  s.mean_finish = sum / static_cast<double>(finish.size());
  s.max_mean_ratio = s.mean_finish > 0.0 ? mx / s.mean_finish : 1.0;
  return s;
}

double max_mean_ratio(const Trace& trace, JobId job, SimTime job_start) {
  return job_stats(trace, job, job_start).max_mean_ratio;
}

std::vector<JobStats> all_job_stats(const Trace& trace, std::span<const JobRecord> jobs) {
  // One pass over the trace instead of one per job.
  struct Acc {
    std::map<HostId, SimTime> finish;
    std::int64_t chunks = 0;
  };
  std::unordered_map<JobId, Acc> acc;
  for (const auto& r : trace.records()) {
    if (r.kind != RecordKind::Compute) continue;
    auto& a = acc[r.job];
    auto [it, inserted] = a.finish.try_emplace(r.host, r.end);
    if (!inserted) it->second = std::max(it->second, r.end);
    ++a.chunks;
  }
  std::vector<JobStats> out;
  out.reserve(jobs.size());
  for (const auto& j : jobs) {
    if (!j.start) continue;
    auto it = acc.find(j.id);
    if (it == acc.end()) continue;
    JobStats s;
    s.job_id = j.id;
    s.chunks = it->second.chunks;
    double sum = 0.0, mx = 0.0;
    for (const auto& [host, end] : it->second.finish) {
      const double f = (end - *j.start).seconds();
      sum += f;
      mx = std::max(mx, f);
    }
    s.workers = static_cast<int>(it->second.finish.size());
    s.max_finish = mx;
    s.mean_finish = sum / s.workers;
    s.max_mean_ratio = s.mean_finish > 0.0 ? mx / s.mean_finish : 1.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace rcasim
