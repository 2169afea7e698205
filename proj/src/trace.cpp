#include "rcasim/trace.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"

namespace rcasim {

namespace {

constexpr std::string_view kEventsHeader = "host\tjob\tchunk\tkind\tstart_us\tend_us\tborrowed";

auto sort_key(const TraceRecord& r) {
  return std::make_tuple(r.host, r.start, r.end, r.job, r.chunk, static_cast<int>(r.kind));
}

}  // namespace

std::string_view to_string(RecordKind kind) {
  switch (kind) {
    case RecordKind::Compute: return "compute";
    case RecordKind::SchedOverhead: return "sched_overhead";
    case RecordKind::IdleMarker: return "idle_marker";
  }
  return "?";
}

std::optional<RecordKind> parse_record_kind(std::string_view s) {
  if (s == "compute") return RecordKind::Compute;
  if (s == "sched_overhead") return RecordKind::SchedOverhead;
  if (s == "idle_marker") return RecordKind::IdleMarker;
  return std::nullopt;
}

void Trace::record(const TraceRecord& rec) {
  if (rec.end < rec.start) {
    throw std::invalid_argument(fmt::format("trace record on host {} ends ({}us) before it starts ({}us)", rec.host,
                                            rec.end.micros(), rec.start.micros()));
  }
  records_.push_back(rec);
}

std::vector<TraceRecord> Trace::sorted() const {
  std::vector<TraceRecord> out = records_;
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return sort_key(a) < sort_key(b); });
  return out;
}

void Trace::validate() const {
  const auto recs = sorted();
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const auto& prev = recs[i - 1];
    const auto& cur = recs[i];
    if (prev.host == cur.host && cur.start < prev.end) {
      throw std::runtime_error(fmt::format("overlapping trace records on host {}: [{}, {}) job {} and [{}, {}) job {}",
                                           cur.host, prev.start.micros(), prev.end.micros(), prev.job,
                                           cur.start.micros(), cur.end.micros(), cur.job));
    }
  }
}

void export_timeline(const Trace& trace, std::ostream& out, int run_id) {
  trace.validate();
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const auto& r : trace.sorted()) {
    if (r.kind != RecordKind::Compute || r.duration().micros() == 0) continue;
    nlohmann::ordered_json ev;
    ev["name"] = fmt::format("J{}", r.job);
    ev["ph"] = "X";
    ev["ts"] = r.start.micros();
    ev["dur"] = r.duration().micros();
    ev["pid"] = run_id;
    ev["tid"] = r.host;
    ev["args"] = {{"job", r.job}, {"chunk", r.chunk}, {"borrowed", r.borrowed}};
    events.push_back(std::move(ev));
  }
  nlohmann::ordered_json doc;
  doc["traceEvents"] = std::move(events);
  doc["displayTimeUnit"] = "ms";
  out << doc.dump() << '\n';
}

void export_timeline(const Trace& trace, const std::string& path, int run_id) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write timeline: " + path);
  export_timeline(trace, out, run_id);
  if (!out) throw std::runtime_error("error writing timeline: " + path);
}

void export_events(const Trace& trace, std::ostream& out) {
  out << kEventsHeader << '\n';
  for (const auto& r : trace.sorted()) {
    out << r.host << '\t' << r.job << '\t' << r.chunk << '\t' << to_string(r.kind) << '\t' << r.start.micros() << '\t'
        << r.end.micros() << '\t' << (r.borrowed ? 1 : 0) << '\n';
  }
}

void export_events(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write events file: " + path);
  export_events(trace, out);
  if (!out) throw std::runtime_error("error writing events file: " + path);
}

Trace read_events(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line) || line != kEventsHeader) {
    throw std::runtime_error("events file: missing or unexpected header");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    TraceRecord r;
    std::string kind;
    std::int64_t start = 0, end = 0;
    int borrowed = 0;
    if (!(row >> r.host >> r.job >> r.chunk >> kind >> start >> end >> borrowed)) {
      throw std::runtime_error(fmt::format("events file line {}: malformed record", lineno));
    }
    auto k = parse_record_kind(kind);
    if (!k) throw std::runtime_error(fmt::format("events file line {}: unknown kind '{}'", lineno, kind));
    r.kind = *k;
    r.start = SimTime::from_micros(start);
    r.end = SimTime::from_micros(end);
    r.borrowed = borrowed != 0;
    trace.record(r);
  }
  return trace;
}

Trace read_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open events file: " + path);
  return read_events(in);
}

}  // namespace rcasim
