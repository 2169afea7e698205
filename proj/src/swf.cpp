#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcasim/workload.hpp"

namespace rcasim {

namespace {

constexpr int kSwfFields = 18;

char category_for_application(long long app) {
  if (app >= 1 && app <= static_cast<long long>(kEspCategories.size())) {
    return kEspCategories[static_cast<std::size_t>(app - 1)].id;
  }
  return '?';
}

int application_for_category(char cat) {
  for (std::size_t i = 0; i < kEspCategories.size(); ++i) {
    if (kEspCategories[i].id == cat) return static_cast<int>(i) + 1;
  }
  return -1;
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& what) {
  throw std::runtime_error(fmt::format("{}:{}: {}", name, line, what));
}

}  // namespace

JobSet read_swf(std::istream& in, const SwfImportParams& params, std::string name) {
  if (params.tasks_per_host < 1) throw std::invalid_argument("read_swf: tasks_per_host must be >= 1");
  JobSet out;
  out.name = name;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == ';') continue;

    std::istringstream fields(line);
    std::vector<double> f;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        f.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        fail(name, lineno, "non-numeric field '" + tok + "'");
      }
    }
    if (static_cast<int>(f.size()) != kSwfFields) {
      fail(name, lineno, fmt::format("expected {} fields, found {}", kSwfFields, f.size()));
    }

    const double id = f[0], submit = f[1], runtime = f[3], procs = f[7], req_time = f[8];
    if (procs < 0) fail(name, lineno, fmt::format("negative requested processors ({})", procs));
    if (procs < 1) fail(name, lineno, "requested processors must be >= 1");
    if (submit < 0) fail(name, lineno, "negative submit time");
    const double target = runtime > 0 ? runtime : req_time;
    if (!(target > 0)) fail(name, lineno, "record has neither a run time nor a requested time");

    JobSpec job;
    job.id = static_cast<JobId>(id);
    job.category = category_for_application(static_cast<long long>(f[13]));
    job.requested_hosts = static_cast<int>(procs);
    job.task_count = static_cast<std::int64_t>(job.requested_hosts) * params.tasks_per_host;
    job.profile = params.profile;
    job.profile.mean_task_seconds = target / static_cast<double>(params.tasks_per_host);
    job.arrival = SimTime::from_seconds(submit);
    job.target_runtime = target;
    job.estimated_runtime = req_time > 0 ? req_time : target * params.estimate_factor;
    job.seed = params.seed;
    out.jobs.push_back(job);
  }
  std::stable_sort(out.jobs.begin(), out.jobs.end(),
                   [](const JobSpec& a, const JobSpec& b) { return a.arrival < b.arrival; });
  return out;
}

JobSet read_swf(const std::string& path, const SwfImportParams& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open SWF file: " + path);
  return read_swf(in, params, path);
}

void write_swf(const JobSet& jobset, std::ostream& out) {
  int max_hosts = 0;
  for (const auto& j : jobset.jobs) max_hosts = std::max(max_hosts, j.requested_hosts);
  out << "; Version: 2.2\n";
  out << "; Computer: rcasim\n";
  out << "; Note: " << jobset.name << "\n";
  out << "; MaxJobs: " << jobset.jobs.size() << "\n";
  out << "; MaxProcs: " << max_hosts << "\n";
  out << "; Application numbers 1..14 are ESP categories A..M, Z\n";
  for (const auto& j : jobset.jobs) {
    out << fmt::format("{} {} -1 {} {} -1 -1 {} {} -1 1 -1 -1 {} -1 -1 -1 -1\n", j.id, j.arrival.seconds(),
                       j.target_runtime, j.requested_hosts, j.requested_hosts, j.estimated_runtime,
                       application_for_category(j.category));
  }
}

void write_swf(const JobSet& jobset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write SWF file: " + path);
  write_swf(jobset, out);
  if (!out) throw std::runtime_error("error writing SWF file: " + path);
}

}  // namespace rcasim
