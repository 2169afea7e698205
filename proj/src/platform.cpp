#include "rcasim/platform.hpp"

#include <cmath>
#include <stdexcept>

namespace rcasim {

Platform::Platform(int host_count, double bandwidth_bps, double latency_s)
    : bandwidth_(bandwidth_bps), latency_(latency_s) {
  if (host_count < 1) throw std::invalid_argument("platform needs at least one host");
  if (!(bandwidth_bps > 0.0) || !std::isfinite(bandwidth_bps)) {
    throw std::invalid_argument("link bandwidth must be positive");
  }
  if (!(latency_s >= 0.0) || !std::isfinite(latency_s)) {
    throw std::invalid_argument("link latency must be non-negative");
  }
  hosts_.resize(static_cast<std::size_t>(host_count));
  for (int i = 0; i < host_count; ++i) hosts_[static_cast<std::size_t>(i)].id = i;
}

double Platform::transfer_time(double message_bytes) const {
  if (message_bytes < 0.0) throw std::invalid_argument("negative message size");
  return latency_ + 8.0 * message_bytes / bandwidth_;
}

SimTime Platform::transfer_delay(double message_bytes) const {
  return SimTime::from_seconds_ceil(transfer_time(message_bytes));
}

std::vector<HostId> Platform::free_hosts() const {
  std::vector<HostId> out;
  for (const auto& h : hosts_) {
    if (h.free()) out.push_back(h.id);
  }
  return out;
}

Platform build_platform(int host_count, double bandwidth_bps, double latency_s) {
  return Platform(host_count, bandwidth_bps, latency_s);
}

}  // namespace rcasim
