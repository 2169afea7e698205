#include "rcasim/event_queue.hpp"

#include <stdexcept>
#include <string>

namespace rcasim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::JobArrival: return "JobArrival";
    case EventKind::JobStart: return "JobStart";
    case EventKind::ChunkStart: return "ChunkStart";
    case EventKind::ChunkComplete: return "ChunkComplete";
    case EventKind::JobComplete: return "JobComplete";
    case EventKind::RcaIdleReport: return "RcaIdleReport";
    case EventKind::RcaLendGrant: return "RcaLendGrant";
    case EventKind::RcaExclusionRequest: return "RcaExclusionRequest";
    case EventKind::RcaExclusionResponse: return "RcaExclusionResponse";
    case EventKind::RcaExclusionExpiry: return "RcaExclusionExpiry";
    case EventKind::SchedulerWake: return "SchedulerWake";
  }
  return "?";
}

std::uint64_t EventQueue::push(Event ev) {
  if (ev.time < now_) {
    throw std::logic_error("causality violation: " + std::string(to_string(ev.kind)) + " at " +
                           std::to_string(ev.time.micros()) + "us scheduled while clock is " +
                           std::to_string(now_.micros()) + "us");
  }
  ev.seq = next_seq_++;
  heap_.push(ev);
  return ev.seq;
}

Event EventQueue::pop() {
  if (heap_.empty()) throw std::logic_error("pop from empty event queue");
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.time;
  return ev;
}

}  // namespace rcasim
