#pragma once

#include <optional>
#include <vector>

#include "rcasim/sim_time.hpp"

namespace rcasim {

struct Host {
  HostId id = 0;
  std::optional<JobId> owner;     // allocation owner
  std::optional<JobId> borrower;  // RCA lessee, only while owner is running
  bool busy = false;              // executing (or waiting to start) a chunk

  /// The job whose application scheduler currently drives this host.
  std::optional<JobId> user() const { return borrower ? borrower : owner; }
  bool free() const { return !owner.has_value(); }
};

/// What happened to a host when a job completed.
enum class Disposition { Freed, TransferredToBorrower, ReturnedToOwner };

struct HostDisposition {
  HostId host = 0;
  Disposition what = Disposition::Freed;
  std::optional<JobId> to;
};

/// Homogeneous, fully connected cluster.
class Platform {
 public:
  static constexpr double kDefaultBandwidth = 50e9;   // bits/s
  static constexpr double kDefaultLatency = 500e-9;   // s
  static constexpr int kDefaultHosts = 256;

  Platform(int host_count, double bandwidth_bps, double latency_s);

  /// latency + 8 * bytes / bandwidth, in seconds.
  double transfer_time(double message_bytes) const;
  /// Same, rounded up to whole microseconds (never zero for a positive cost).
  SimTime transfer_delay(double message_bytes) const;

  int host_count() const { return static_cast<int>(hosts_.size()); }
  double bandwidth() const { return bandwidth_; }
  double latency() const { return latency_; }

  Host& host(HostId id) { return hosts_.at(static_cast<std::size_t>(id)); }
  const Host& host(HostId id) const { return hosts_.at(static_cast<std::size_t>(id)); }
  std::vector<Host>& hosts() { return hosts_; }
  const std::vector<Host>& hosts() const { return hosts_; }

  std::vector<HostId> free_hosts() const;

 private:
  std::vector<Host> hosts_;
  double bandwidth_;
  double latency_;
};

Platform build_platform(int host_count, double bandwidth_bps = Platform::kDefaultBandwidth,
                        double latency_s = Platform::kDefaultLatency);

}  // namespace rcasim
