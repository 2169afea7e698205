#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcasim/chunk_policy.hpp"
#include "rcasim/sim_time.hpp"

namespace rcasim {

enum class ProfileKind { Balanced, Imbalanced };

std::string_view to_string(ProfileKind kind);
std::optional<ProfileKind> parse_profile(std::string_view name);

/// Per-task execution time model of one job.
///
/// Task times are lognormal with the given mean and coefficient of
/// variation. spatial_correlation in [0, 1) arranges the sampled times along
/// the iteration space: 0 leaves them in random order, larger values
/// concentrate the expensive tasks in the middle of the loop the way the
/// inner rows of a Mandelbrot image are the costly ones. The multiset of
/// sampled times does not depend on it.
struct TaskProfile {
  ProfileKind kind = ProfileKind::Balanced;
  double mean_task_seconds = 1.0;
  double cv = 0.0;
  double spatial_correlation = 0.0;
  /// Upper bound on one task as a multiple of the mean; 0 for none.
  /// Mandelbrot pixels stop at an iteration limit, so their cost is capped.
  double max_task_factor = 0.0;
};

struct JobSpec {
  JobId id = 0;
  char category = '?';  // A..M, Z for ESP jobs
  int requested_hosts = 1;
  std::int64_t task_count = 1;
  TaskProfile profile;
  SimTime arrival;
  double target_runtime = 0.0;     // balanced-execution runtime, seconds
  double estimated_runtime = 0.0;  // user estimate seen by the batch scheduler
  ChunkPolicyKind policy = ChunkPolicyKind::Static;
  std::uint64_t seed = 0;          // base of the job's random streams
};

struct JobSet {
  std::string name;
  std::vector<JobSpec> jobs;
};

struct EspCategory {
  char id;
  int hosts;  // at a 256-host scale
  int count;
};

inline constexpr std::array<EspCategory, 14> kEspCategories{{
    {'A', 8, 75},  {'B', 16, 9},  {'C', 128, 3}, {'D', 64, 3},  {'E', 128, 3},
    {'F', 16, 9},  {'G', 32, 6},  {'H', 40, 6},  {'I', 8, 24},  {'J', 16, 24},
    {'K', 24, 15}, {'L', 32, 36}, {'M', 64, 15}, {'Z', 256, 2},
}};

inline constexpr int kEspJobCount = 230;
inline constexpr int kEspReferenceHosts = 256;

struct EspParams {
  int scale_hosts = kEspReferenceHosts;
  std::int64_t tasks_per_host = 512;
  /// Sum of core-seconds / scale_hosts. Used when a category has no
  /// explicit runtime: every category then contributes an equal share.
  double lower_bound_makespan = 10500.0;
  std::map<char, double> category_runtimes;  // explicit per-category target runtimes
  double balanced_cv = 0.02;
  double imbalanced_cv = 1.5;
  double balanced_correlation = 0.0;
  double imbalanced_correlation = 0.14;
  double balanced_task_cap = 0.0;  // max_task_factor, 0 = uncapped
  double imbalanced_task_cap = 20.0;
  double estimate_factor = 1.2;
};

/// Hosts requested by an ESP category at the given platform scale.
int esp_category_hosts(const EspCategory& cat, int scale_hosts);
/// Target runtime (seconds) of one job of the category.
double esp_category_runtime(const EspCategory& cat, const EspParams& params);

/// Builds the 230-job ESP set. Arrival times are left at zero; see
/// arrival_schedule.
JobSet generate_esp(ProfileKind profile, std::uint64_t seed, const EspParams& params = {});

struct ArrivalParams {
  double estimated_makespan = 10500.0;
  /// Fraction of the estimated makespan over which non-Z jobs are spread
  /// (quiet windows excluded).
  double submission_span_fraction = 0.3;
  double quiet_fraction = 0.10;
};

/// ESP submission scheme: non-Z jobs arrive one by one at a fixed gap in
/// seeded-random order. The first Z job follows the first third of them,
/// the second Z the second third, and each Z opens a quiet window of
/// quiet_fraction * estimated_makespan with no submissions.
JobSet arrival_schedule(JobSet jobset, const ArrivalParams& params, std::uint64_t seed);

/// Per-task durations in whole microseconds (each >= 1). Rescaled so the
/// empirical mean equals the profile mean before rounding; with a cap, the
/// scale is chosen so the capped samples have that mean.
std::vector<std::int64_t> sample_task_times(const JobSpec& job);

/// Sum of core-seconds of a job set at its target runtimes.
double total_core_seconds(const JobSet& jobset);

struct SwfImportParams {
  std::int64_t tasks_per_host = 512;
  TaskProfile profile{ProfileKind::Balanced, 1.0, 0.02, 0.0};  // mean is replaced per job
  double estimate_factor = 1.2;  // used when the record has no requested time
  std::uint64_t seed = 1;
};

/// Parses Standard Workload Format records. Field 1 is the job id, 2 the
/// submit time, 4 the run time (calibration target), 8 the requested
/// processors, 9 the requested time (estimate) and 14 the application
/// number, which maps 1..14 onto ESP categories A..M, Z. Lines starting
/// with ';' are comments.
JobSet read_swf(std::istream& in, const SwfImportParams& params, std::string name = "swf");
JobSet read_swf(const std::string& path, const SwfImportParams& params);

void write_swf(const JobSet& jobset, std::ostream& out);
void write_swf(const JobSet& jobset, const std::string& path);

}  // namespace rcasim
