#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace rcasim {

using JobId = std::int64_t;
using HostId = std::int32_t;

/// Simulated time stored as integer microseconds.
///
/// Event ordering compares integers, so two events computed to land on the
/// same instant always compare equal. Conversion to and from real seconds
/// happens only at the module boundaries (config, CSV, workload files).
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_micros(std::int64_t us) { return SimTime(us); }

  static SimTime from_seconds(double s) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("SimTime: seconds must be finite and non-negative");
    }
    return SimTime(static_cast<std::int64_t>(std::llround(s * 1e6)));
  }

  /// Rounds up so a positive duration never collapses to zero.
  static SimTime from_seconds_ceil(double s) {
    if (!std::isfinite(s) || s < 0.0) {
      throw std::invalid_argument("SimTime: seconds must be finite and non-negative");
    }
    return SimTime(static_cast<std::int64_t>(std::ceil(s * 1e6 - 1e-9)));
  }

  static constexpr SimTime max() { return SimTime(std::numeric_limits<std::int64_t>::max()); }

  constexpr std::int64_t micros() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(us_ + o.us_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(us_ - o.us_); }
  constexpr SimTime operator*(std::int64_t k) const { return SimTime(us_ * k); }
  constexpr SimTime& operator+=(SimTime o) {
    us_ += o.us_;
    return *this;
  }

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

}  // namespace rcasim
