#include "rcasim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rcasim/rng.hpp"

namespace rcasim {

std::string_view to_string(ProfileKind kind) {
  return kind == ProfileKind::Balanced ? "balanced" : "imbalanced";
}

std::optional<ProfileKind> parse_profile(std::string_view name) {
  if (name == "balanced" || name == "psia") return ProfileKind::Balanced;
  if (name == "imbalanced" || name == "mandelbrot") return ProfileKind::Imbalanced;
  return std::nullopt;
}

int esp_category_hosts(const EspCategory& cat, int scale_hosts) {
  if (cat.id == 'Z') return scale_hosts;
  const double scaled = static_cast<double>(cat.hosts) * scale_hosts / kEspReferenceHosts;
  return std::max(1, static_cast<int>(std::lround(scaled)));
}

double esp_category_runtime(const EspCategory& cat, const EspParams& params) {
  if (auto it = params.category_runtimes.find(cat.id); it != params.category_runtimes.end()) {
    return it->second;
  }
  const double share = params.lower_bound_makespan * params.scale_hosts /
                       static_cast<double>(kEspCategories.size());
  return share / (static_cast<double>(cat.count) * esp_category_hosts(cat, params.scale_hosts));
}

JobSet generate_esp(ProfileKind profile, std::uint64_t seed, const EspParams& params) {
  if (params.scale_hosts < 2) {
    throw std::invalid_argument("generate_esp: scale_hosts too small to give category Z a distinct allocation");
  }
  if (params.tasks_per_host < 1) throw std::invalid_argument("generate_esp: tasks_per_host must be >= 1");
  if (!(params.lower_bound_makespan > 0.0)) {
    throw std::invalid_argument("generate_esp: target makespan must be positive");
  }
  if (!(params.estimate_factor > 0.0)) throw std::invalid_argument("generate_esp: estimate_factor must be positive");
  for (const auto& [cat, runtime] : params.category_runtimes) {
    if (!(runtime > 0.0)) throw std::invalid_argument(std::string("generate_esp: runtime of category ") + cat + " must be positive");
  }

  const bool balanced = profile == ProfileKind::Balanced;
  JobSet out;
  out.name = balanced ? "esp-balanced" : "esp-imbalanced";
  out.jobs.reserve(kEspJobCount);
  JobId next_id = 1;
  for (const auto& cat : kEspCategories) {
    const int hosts = esp_category_hosts(cat, params.scale_hosts);
    const double runtime = esp_category_runtime(cat, params);
    for (int i = 0; i < cat.count; ++i) {
      JobSpec job;
      job.id = next_id++;
      job.category = cat.id;
      job.requested_hosts = hosts;
      job.task_count = static_cast<std::int64_t>(hosts) * params.tasks_per_host;
      job.profile.kind = profile;
      job.profile.mean_task_seconds = runtime / static_cast<double>(params.tasks_per_host);
      job.profile.cv = balanced ? params.balanced_cv : params.imbalanced_cv;
      job.profile.spatial_correlation = balanced ? params.balanced_correlation : params.imbalanced_correlation;
      job.profile.max_task_factor = balanced ? params.balanced_task_cap : params.imbalanced_task_cap;
      job.target_runtime = runtime;
      job.estimated_runtime = runtime * params.estimate_factor;
      job.seed = seed;
      out.jobs.push_back(job);
    }
  }
  return out;
}

JobSet arrival_schedule(JobSet jobset, const ArrivalParams& params, std::uint64_t seed) {
  if (!(params.estimated_makespan > 0.0)) throw std::invalid_argument("arrival_schedule: makespan must be positive");
  if (params.submission_span_fraction < 0.0 || params.quiet_fraction < 0.0) {
    throw std::invalid_argument("arrival_schedule: fractions must be non-negative");
  }
  std::vector<JobSpec> full;
  std::vector<JobSpec> rest;
  for (auto& job : jobset.jobs) (job.category == 'Z' ? full : rest).push_back(job);
  if (full.size() != 2) {
    throw std::invalid_argument("arrival_schedule: ESP scheme needs exactly 2 category-Z jobs, found " +
                                std::to_string(full.size()));
  }
  std::sort(full.begin(), full.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  auto rng = make_stream(seed, 0, "arrival-order");
  std::shuffle(rest.begin(), rest.end(), rng);

  const std::size_t n = rest.size();
  const std::size_t first_cut = n / 3;
  const std::size_t second_cut = (2 * n) / 3;
  const double gap = n > 0 ? params.submission_span_fraction * params.estimated_makespan / static_cast<double>(n) : 0.0;
  const double quiet = params.quiet_fraction * params.estimated_makespan;

  const double z1 = static_cast<double>(first_cut) * gap;
  const double z2 = z1 + quiet + static_cast<double>(second_cut - first_cut) * gap;
  auto time_of = [&](std::size_t i) {
    if (i < first_cut) return static_cast<double>(i) * gap;
    if (i < second_cut) return z1 + quiet + static_cast<double>(i - first_cut) * gap;
    return z2 + quiet + static_cast<double>(i - second_cut) * gap;
  };

  std::vector<JobSpec> ordered;
  ordered.reserve(jobset.jobs.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i == first_cut) {
      full[0].arrival = SimTime::from_seconds(z1);
      ordered.push_back(full[0]);
    }
    if (i == second_cut) {
      full[1].arrival = SimTime::from_seconds(z2);
      ordered.push_back(full[1]);
    }
    rest[i].arrival = SimTime::from_seconds(time_of(i));
    ordered.push_back(rest[i]);
  }
  if (first_cut == n) {
    full[0].arrival = SimTime::from_seconds(z1);
    ordered.push_back(full[0]);
  }
  if (second_cut == n) {
    full[1].arrival = SimTime::from_seconds(z2);
    ordered.push_back(full[1]);
  }
  jobset.jobs = std::move(ordered);
  return jobset;
}

std::vector<std::int64_t> sample_task_times(const JobSpec& job) {
  const auto n = static_cast<std::size_t>(std::max<std::int64_t>(job.task_count, 0));
  const TaskProfile& p = job.profile;
  if (!(p.mean_task_seconds > 0.0)) throw std::invalid_argument("sample_task_times: mean must be positive");
  if (p.cv < 0.0) throw std::invalid_argument("sample_task_times: negative cv");
  if (p.max_task_factor != 0.0 && !(p.max_task_factor > 1.0)) {
    throw std::invalid_argument("sample_task_times: task cap must exceed the mean");
  }
  if (p.spatial_correlation < 0.0 || p.spatial_correlation >= 1.0) {
    throw std::invalid_argument("sample_task_times: spatial correlation must lie in [0, 1)");
  }
  std::vector<std::int64_t> out(n);
  if (n == 0) return out;
  if (p.cv == 0.0) {
    std::fill(out.begin(), out.end(), std::max<std::int64_t>(1, std::llround(p.mean_task_seconds * 1e6)));
    return out;
  }

  const double sigma_ln = std::sqrt(std::log1p(p.cv * p.cv));
  const double mu_ln = std::log(p.mean_task_seconds) - 0.5 * sigma_ln * sigma_ln;
  auto rng = make_stream(job.seed, static_cast<std::uint64_t>(job.id), "task-times");
  std::lognormal_distribution<double> dist(mu_ln, sigma_ln);
  std::vector<double> times(n);
  for (auto& t : times) t = dist(rng);
  const double mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(n);
  double scale = p.mean_task_seconds / mean;
  if (p.max_task_factor > 0.0) {
    // mean(min(s * t, cap)) is non-decreasing in s; bisect for the target.
    const double cap = p.max_task_factor * p.mean_task_seconds;
    auto capped_mean = [&](double s) {
      double sum = 0.0;
      for (double t : times) sum += std::min(s * t, cap);
      return sum / static_cast<double>(n);
    };
    double lo = scale, hi = scale;
    while (capped_mean(hi) < p.mean_task_seconds) hi *= 2.0;
    for (int i = 0; i < 100 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (capped_mean(mid) < p.mean_task_seconds ? lo : hi) = mid;
    }
    scale = hi;
    for (auto& t : times) t = std::min(t * scale, cap);
  } else {
    for (auto& t : times) t *= scale;
  }

  if (p.spatial_correlation > 0.0 && n > 1) {
    // Gaussian rank copula: each position draws a key mixing a centre-heavy
    // profile with noise; the k-th smallest key receives the k-th smallest time.
    auto order_rng = make_stream(job.seed, static_cast<std::uint64_t>(job.id), "task-order");
    std::normal_distribution<double> noise(0.0, 1.0);
    const double rho = p.spatial_correlation;
    const double mix = std::sqrt(1.0 - rho * rho);
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double profile = -std::numbers::sqrt2 * std::cos(2.0 * std::numbers::pi * x);
      key[i] = rho * profile + mix * noise(order_rng);
    }
    std::vector<std::size_t> pos(n);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    std::sort(times.begin(), times.end());
    std::vector<double> arranged(n);
    for (std::size_t k = 0; k < n; ++k) arranged[pos[k]] = times[k];
    times.swap(arranged);
  }

  for (std::size_t i = 0; i < n; ++i) out[i] = std::max<std::int64_t>(1, std::llround(times[i] * 1e6));
  return out;
}

double total_core_seconds(const JobSet& jobset) {
  double sum = 0.0;
  for (const auto& j : jobset.jobs) sum += j.target_runtime * j.requested_hosts;
  return sum;
}

}  // namespace rcasim
