#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcasim/sim_time.hpp"

namespace rcasim {

enum class RecordKind : std::uint8_t { Compute, SchedOverhead, IdleMarker };

std::string_view to_string(RecordKind kind);
std::optional<RecordKind> parse_record_kind(std::string_view s);

struct TraceRecord {
  HostId host = 0;
  JobId job = 0;
  std::int64_t chunk = 0;
  RecordKind kind = RecordKind::Compute;
  SimTime start;
  SimTime end;
  bool borrowed = false;

  SimTime duration() const { return end - start; }
  bool operator==(const TraceRecord&) const = default;
};

/// Append-only interval log. Idle time is never stored; it is the gap
/// between records on a host.
class Trace {
 public:
  void record(const TraceRecord& rec);

  const std::vector<TraceRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }

  /// Records ordered by (host, start, end, job, chunk, kind).
  std::vector<TraceRecord> sorted() const;

  /// Throws std::runtime_error naming the host if two records on one host
  /// overlap in time.
  void validate() const;

  bool operator==(const Trace&) const = default;

 private:
  std::vector<TraceRecord> records_;
};

/// Chrome trace-event JSON: one complete ('X') event per non-empty compute
/// record, tid = host, name = "J<job>". Viewable in Perfetto or
/// chrome://tracing.
void export_timeline(const Trace& trace, std::ostream& out, int run_id = 0);
void export_timeline(const Trace& trace, const std::string& path, int run_id = 0);

/// Tab-separated, one line per record after a header line.
void export_events(const Trace& trace, std::ostream& out);
void export_events(const Trace& trace, const std::string& path);
Trace read_events(std::istream& in);
Trace read_events(const std::string& path);

}  // namespace rcasim
