#include "rcasim/chunk_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rcasim {

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t clamp_chunk(double raw, std::int64_t remaining) {
  if (remaining <= 0) return 0;
  if (!std::isfinite(raw)) return remaining;
  auto c = static_cast<std::int64_t>(std::ceil(raw - 1e-9));
  return std::clamp<std::int64_t>(c, 1, remaining);
}

}  // namespace

std::string_view to_string(ChunkPolicyKind kind) {
  switch (kind) {
    case ChunkPolicyKind::Static: return "static";
    case ChunkPolicyKind::Gss: return "gss";
    case ChunkPolicyKind::Fac: return "fac";
    case ChunkPolicyKind::Af: return "af";
  }
  return "?";
}

std::optional<ChunkPolicyKind> parse_policy(std::string_view name) {
  if (name == "static") return ChunkPolicyKind::Static;
  if (name == "gss") return ChunkPolicyKind::Gss;
  if (name == "fac") return ChunkPolicyKind::Fac;
  if (name == "af") return ChunkPolicyKind::Af;
  return std::nullopt;
}

std::string_view to_string(FactoringRule rule) {
  return rule == FactoringRule::Fac2 ? "fac2" : "factoring";
}

std::optional<FactoringRule> parse_factoring_rule(std::string_view name) {
  if (name == "factoring") return FactoringRule::Factoring;
  if (name == "fac2") return FactoringRule::Fac2;
  return std::nullopt;
}

std::int64_t chunk_static(std::int64_t total, std::int64_t workers, std::int64_t worker_index) {
  if (workers < 1) throw std::invalid_argument("chunk_static: worker count must be positive");
  if (total < 0 || worker_index < 0) throw std::invalid_argument("chunk_static: negative argument");
  const std::int64_t share = ceil_div(total, workers);
  const std::int64_t before = share * worker_index;
  return std::clamp<std::int64_t>(total - before, 0, share);
}

std::int64_t chunk_gss(std::int64_t remaining, std::int64_t workers) {
  if (workers < 1) throw std::invalid_argument("chunk_gss: worker count must be positive");
  if (remaining <= 0) return 0;
  return std::max<std::int64_t>(1, ceil_div(remaining, workers));
}

double factoring_divisor(double mu, double sigma, std::int64_t workers, std::int64_t remaining) {
  if (remaining <= 0 || sigma <= 0.0 || mu <= 0.0) return 2.0;
  const double b = static_cast<double>(workers) * sigma / (2.0 * std::sqrt(static_cast<double>(remaining)) * mu);
  return 2.0 + b * b + b * std::sqrt(b * b + 4.0);
}

FactoringState::FactoringState(double mu, double sigma, std::int64_t workers, FactoringRule rule)
    : mu_(mu), sigma_(sigma), workers_(workers), rule_(rule) {
  if (workers < 1) throw std::invalid_argument("factoring: worker count must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("factoring: mean task time must be positive");
  if (sigma < 0.0) throw std::invalid_argument("factoring: negative standard deviation");
}

std::int64_t FactoringState::next(std::int64_t remaining) {
  if (remaining <= 0) return 0;
  if (batch_left_ == 0) {
    const double x = rule_ == FactoringRule::Fac2 ? 2.0 : factoring_divisor(mu_, sigma_, workers_, remaining);
    batch_chunk_ = clamp_chunk(static_cast<double>(remaining) / (x * static_cast<double>(workers_)), remaining);
    batch_left_ = workers_;
  }
  --batch_left_;
  return std::min(batch_chunk_, remaining);
}

void WorkerStats::observe(double observed_chunk_time, std::int64_t chunk_size) {
  if (chunk_size < 1) throw std::invalid_argument("observe: chunk size must be >= 1");
  const double x = observed_chunk_time / static_cast<double>(chunk_size);
  ++samples;
  const double delta = x - mean;
  mean += delta / static_cast<double>(samples);
  m2 += delta * (x - mean);
}

double WorkerStats::stddev() const {
  if (samples < 2) return 0.0;
  return std::sqrt(std::max(0.0, m2 / static_cast<double>(samples - 1)));
}

std::int64_t chunk_af(std::span<const WorkerStats> workers, std::size_t worker, std::int64_t remaining) {
  if (remaining <= 0) return 0;
  if (worker >= workers.size()) throw std::out_of_range("chunk_af: worker index");
  const auto p = static_cast<std::int64_t>(workers.size());
  const WorkerStats& self = workers[worker];
  if (self.samples == 0 || !(self.mean > 0.0)) {
    return clamp_chunk(static_cast<double>(remaining) / (2.0 * static_cast<double>(p)), remaining);
  }
  double d = 0.0;
  double inv_sum = 0.0;
  for (const auto& w : workers) {
    const bool ready = w.samples > 0 && w.mean > 0.0;
    const double mu = ready ? w.mean : self.mean;
    const double sd = ready ? w.stddev() : self.stddev();
    d += sd * sd / mu;
    inv_sum += 1.0 / mu;
  }
  const double t = 1.0 / inv_sum;
  const double share = static_cast<double>(remaining) / 2.0;
  const double raw = (d + 2.0 * t * share - std::sqrt(d * d + 4.0 * d * t * share)) / (2.0 * self.mean);
  return clamp_chunk(raw, remaining);
}

}  // namespace rcasim
