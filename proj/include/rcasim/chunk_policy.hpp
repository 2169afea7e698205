#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace rcasim {

enum class ChunkPolicyKind { Static, Gss, Fac, Af };

std::string_view to_string(ChunkPolicyKind kind);
std::optional<ChunkPolicyKind> parse_policy(std::string_view name);

enum class FactoringRule {
  Factoring,  // batch divisor from (mu, sigma, P, R)
  Fac2,       // fixed divisor 2
};

std::string_view to_string(FactoringRule rule);
std::optional<FactoringRule> parse_factoring_rule(std::string_view name);

/// Size of the chunk handed to the k-th worker under STATIC: every worker
/// gets ceil(N/P) tasks until the loop runs out, so the tail worker(s) may
/// receive a short or empty chunk.
std::int64_t chunk_static(std::int64_t total, std::int64_t workers, std::int64_t worker_index);

/// Guided self-scheduling: ceil(R/P), at least 1 while work remains.
std::int64_t chunk_gss(std::int64_t remaining, std::int64_t workers);

/// Factoring batch divisor. With sigma = 0 the rule degenerates to 2, i.e.
/// every batch schedules half of the remaining work.
double factoring_divisor(double mu, double sigma, std::int64_t workers, std::int64_t remaining);

/// Batched factoring. Each batch hands out P equal chunks of
/// ceil(R_batch / (x * P)) tasks, where R_batch is the remaining work when
/// the batch opens.
class FactoringState {
 public:
  FactoringState(double mu, double sigma, std::int64_t workers, FactoringRule rule);

  /// Next chunk given the current unscheduled count. Advances the batch.
  std::int64_t next(std::int64_t remaining);

  std::int64_t workers() const { return workers_; }
  std::int64_t batch_chunk() const { return batch_chunk_; }
  std::int64_t batch_left() const { return batch_left_; }

 private:
  double mu_;
  double sigma_;
  std::int64_t workers_;
  FactoringRule rule_;
  std::int64_t batch_chunk_ = 0;
  std::int64_t batch_left_ = 0;
};

/// Running per-task time statistics of one worker (Welford).
struct WorkerStats {
  std::int64_t samples = 0;
  double mean = 0.0;
  double m2 = 0.0;

  /// Folds observed_chunk_time / chunk_size in as one observation.
  void observe(double observed_chunk_time, std::int64_t chunk_size);
  /// Sample standard deviation (n - 1 denominator); 0 below two samples.
  double stddev() const;
};

/// Adaptive factoring chunk for `worker`.
///
/// Uses every worker's learned (mu_i, sigma_i): D = sum sigma_j^2 / mu_j,
/// T = 1 / sum 1 / mu_j, and solves for the chunk whose expected completion
/// matches the batch share (half of the remaining work):
///     chunk = (D + 2 T R' - sqrt(D^2 + 4 D T R')) / (2 mu_i),   R' = R / 2.
/// Workers without observations contribute the requesting worker's values.
/// A worker with no observations of its own gets ceil(R / (2P)).
std::int64_t chunk_af(std::span<const WorkerStats> workers, std::size_t worker, std::int64_t remaining);

}  // namespace rcasim
