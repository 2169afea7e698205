#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rcasim/sim_time.hpp"
#include "rcasim/trace.hpp"

namespace rcasim {

/// Batch-level lifecycle of one job, as recorded by the engine.
struct JobRecord {
  JobId id = 0;
  char category = '?';
  int hosts = 0;
  SimTime arrival;
  std::optional<SimTime> start;
  std::optional<SimTime> end;
  int borrowed_hosts = 0;  // hosts obtained through RCA lending at start
  std::int64_t tasks = 0;

  bool operator==(const JobRecord&) const = default;
};

struct SystemMetrics {
  double su_percent = 0.0;
  double makespan_seconds = 0.0;
  SimTime t_first_start;
  SimTime t_last_complete;
  std::vector<SimTime> per_host_busy;  // compute time only
  SimTime busy_total;
  SimTime overhead_total;              // scheduling-message intervals
};

/// SU = sum_k T_k / (P * T_batch) * 100, T_k counting compute intervals only.
/// T_batch spans the first record start to the last record end.
SystemMetrics compute_system_metrics(const Trace& trace, int hosts);
double system_utilization(const Trace& trace, int hosts);

/// T_j - T_i in seconds. Throws on an empty trace.
double makespan(const Trace& trace);
/// Same, but also throws if any job never completed.
double makespan(const Trace& trace, std::span<const JobRecord> jobs);

enum class SeriesMode { Cumulative, Instantaneous };

std::string_view to_string(SeriesMode mode);
std::optional<SeriesMode> parse_series_mode(std::string_view s);

struct SeriesPoint {
  double bin_start = 0.0;  // seconds since T_i
  double bin_width = 0.0;  // the last bin may be partial
  double percent = 0.0;
};

/// Instantaneous mode: busy host-seconds in the bin / (P * width) * 100.
/// Cumulative mode: utilization of [T_i, bin end], so the last point is SU.
std::vector<SeriesPoint> utilization_timeseries(const Trace& trace, int hosts, double bin_seconds,
                                                SeriesMode mode = SeriesMode::Cumulative);

/// Width-weighted mean for an instantaneous series, final value for a
/// cumulative one. Either way it reproduces system_utilization.
double series_average(std::span<const SeriesPoint> series, SeriesMode mode);

struct JobStats {
  JobId job_id = 0;
  double max_finish = 0.0;   // seconds after job start
  double mean_finish = 0.0;  // seconds after job start
  double max_mean_ratio = 1.0;
  std::int64_t chunks = 0;
  int workers = 0;
};

/// Per-job imbalance over the hosts that executed at least one of the
/// job's chunks. Throws if the job executed nothing.
JobStats job_stats(const Trace& trace, JobId job, SimTime job_start);
double max_mean_ratio(const Trace& trace, JobId job, SimTime job_start);

/// job_stats for every started job, keyed in the order of `jobs`.
std::vector<JobStats> all_job_stats(const Trace& trace, std::span<const JobRecord> jobs);

}  // namespace rcasim
