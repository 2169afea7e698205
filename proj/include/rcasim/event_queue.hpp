#pragma once

#include <cstdint>
#include <queue>
#include <string_view>
#include <vector>

#include "rcasim/sim_time.hpp"

namespace rcasim {

enum class EventKind : std::uint8_t {
  JobArrival,
  JobStart,
  ChunkStart,
  ChunkComplete,
  JobComplete,
  RcaIdleReport,
  RcaLendGrant,
  RcaExclusionRequest,
  RcaExclusionResponse,
  RcaExclusionExpiry,
  SchedulerWake,
};

std::string_view to_string(EventKind kind);

/// Rank used to order events that share a timestamp. Lower runs first:
/// completions, then RCA messages, then scheduler wakes, then arrivals,
/// then starts. Completions go first so hosts they free are visible to a
/// scheduler pass invoked at the same instant.
constexpr int kind_priority(EventKind kind) {
  switch (kind) {
    case EventKind::ChunkComplete:
    case EventKind::JobComplete:
      return 0;
    case EventKind::RcaIdleReport:
    case EventKind::RcaLendGrant:
    case EventKind::RcaExclusionRequest:
    case EventKind::RcaExclusionResponse:
    case EventKind::RcaExclusionExpiry:
      return 1;
    case EventKind::SchedulerWake:
      return 2;
    case EventKind::JobArrival:
      return 3;
    case EventKind::JobStart:
    case EventKind::ChunkStart:
      return 4;
  }
  return 5;
}

struct Event {
  SimTime time;
  std::uint64_t seq = 0;  // assigned by EventQueue::push
  EventKind kind = EventKind::SchedulerWake;
  JobId job = -1;
  HostId host = -1;
  std::int64_t chunk = -1;
  std::int64_t value = 0;   // kind-specific: chunk size, exclusion host count, accept flag
  std::int64_t aux = 0;     // kind-specific: first task of a chunk, exclusion id
  SimTime duration;         // chunk or exclusion duration
  bool borrowed = false;    // chunk dispatched on a borrowed host
};

/// Min-priority queue over (time, kind priority, seq).
///
/// seq is a monotone insertion counter, so events with equal time and
/// priority are delivered in insertion order. Pushing an event earlier than
/// the last popped time is a causality bug and throws.
class EventQueue {
 public:
  std::uint64_t push(Event ev);
  Event pop();

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Event& top() const { return heap_.top(); }
  SimTime now() const { return now_; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      const int pa = kind_priority(a.kind), pb = kind_priority(b.kind);
      if (pa != pb) return pa > pb;
      return a.seq > b.seq;
    }
  };

  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_;
};

}  // namespace rcasim
