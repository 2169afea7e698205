#include "rcasim/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rcasim {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<bool> parse_switch(const std::string& s) {
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::string on_off(bool b) { return b ? "on" : "off"; }

// Field-level reader that records errors instead of throwing.
class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) {
    known_.insert(section + "." + key);
    auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <class T>
  void number(const std::string& section, const std::string& key, T& dst, std::function<bool(T)> ok,
              std::string_view range) {
    auto v = raw(section, key);
    if (!v) return;
    T parsed{};
    bool good = false;
    if constexpr (std::is_floating_point_v<T>) {
      try {
        std::size_t used = 0;
        parsed = static_cast<T>(std::stod(*v, &used));
        good = used == v->size();
      } catch (const std::exception&) {
        good = false;
      }
    } else {
      const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
      good = ec == std::errc{} && ptr == v->data() + v->size();
    }
    if (!good) {
      errors_.push_back(fmt::format("{}.{}: '{}' is not a number", section, key, *v));
    } else if (!ok(parsed)) {
      errors_.push_back(fmt::format("{}.{}: {} out of range ({})", section, key, *v, range));
    } else {
      dst = parsed;
    }
  }

  void flag(const std::string& section, const std::string& key, bool& dst) {
    auto v = raw(section, key);
    if (!v) return;
    if (auto b = parse_switch(*v)) {
      dst = *b;
    } else {
      errors_.push_back(fmt::format("{}.{}: expected on|off, got '{}'", section, key, *v));
    }
  }

  template <class T, class Parse>
  void list(const std::string& section, const std::string& key, std::vector<T>& dst, Parse parse,
            std::string_view expected) {
    auto v = raw(section, key);
    if (!v) return;
    std::vector<T> out;
    for (const auto& item : split_list(*v)) {
      if (auto p = parse(item)) {
        if (std::find(out.begin(), out.end(), *p) == out.end()) out.push_back(*p);
      } else {
        errors_.push_back(fmt::format("{}.{}: unknown value '{}' (expected {})", section, key, item, expected));
      }
    }
    if (out.empty()) {
      errors_.push_back(fmt::format("{}.{}: needs at least one value", section, key));
    } else {
      dst = std::move(out);
    }
  }

  void unknown_keys() {
    static const std::set<std::string> sections{"platform", "workload", "als", "bls", "rca", "run"};
    for (const auto& [name, sec] : tree_) {
      if (!sections.count(name)) {
        if (sec.empty()) {
          errors_.push_back(fmt::format("{}: key outside any section", name));
        } else {
          errors_.push_back(fmt::format("[{}]: unknown section", name));
        }
        continue;
      }
      for (const auto& [key, value] : sec) {
        if (!known_.count(name + "." + key)) errors_.push_back(fmt::format("{}.{}: unknown key", name, key));
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::vector<std::string>& errors_;
  std::set<std::string> known_;
};

template <class T>
bool positive(T v) {
  return v > 0;
}
template <class T>
bool non_negative(T v) {
  return v >= 0;
}
bool fraction(double v) { return v >= 0.0 && v <= 1.0; }
bool correlation(double v) { return v >= 0.0 && v < 1.0; }

}  // namespace

ExperimentConfig parse_config(std::istream& in, std::optional<bool> force_rca) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({fmt::format("line {}: {}", e.line(), e.message())});
  }
  ExperimentConfig c;
  std::vector<std::string> errors;
  Reader r(tree, errors);

  r.number<int>("platform", "hosts", c.sim.hosts, positive<int>, "> 0");
  r.number<double>("platform", "bandwidth", c.sim.bandwidth_bps, positive<double>, "> 0 bits/s");
  r.number<double>("platform", "latency", c.sim.latency_s, non_negative<double>, ">= 0 s");
  r.number<double>("platform", "message_bytes", c.sim.message_bytes, non_negative<double>, ">= 0");

  if (auto v = r.raw("workload", "source")) {
    if (*v == "esp") {
      c.source = WorkloadSource::Esp;
    } else if (*v == "swf") {
      c.source = WorkloadSource::Swf;
    } else {
      errors.push_back(fmt::format("workload.source: expected esp|swf, got '{}'", *v));
    }
  }
  r.list("workload", "profiles", c.profiles, [](const std::string& s) { return parse_profile(s); },
         "balanced|imbalanced");
  if (auto v = r.raw("workload", "swf_path")) c.swf_path = *v;
  r.number<int>("workload", "scale_hosts", c.esp.scale_hosts, [](int v) { return v >= 2; }, ">= 2");
  r.number<std::int64_t>("workload", "tasks_per_host", c.esp.tasks_per_host, positive<std::int64_t>, ">= 1");
  r.number<double>("workload", "lower_bound_makespan", c.esp.lower_bound_makespan, positive<double>, "> 0 s");
  for (const auto& cat : kEspCategories) {
    const std::string key = fmt::format("runtime_{}", cat.id);
    double v = 0.0;
    bool set = false;
    r.number<double>("workload", key, v, [&](double x) { set = x > 0.0; return set; }, "> 0 s");
    if (set) c.esp.category_runtimes[cat.id] = v;
  }
  r.number<double>("workload", "balanced_cv", c.esp.balanced_cv, non_negative<double>, ">= 0");
  r.number<double>("workload", "imbalanced_cv", c.esp.imbalanced_cv, non_negative<double>, ">= 0");
  r.number<double>("workload", "balanced_correlation", c.esp.balanced_correlation, correlation, "[0, 1)");
  r.number<double>("workload", "imbalanced_correlation", c.esp.imbalanced_correlation, correlation, "[0, 1)");
  auto cap_ok = [](double v) { return v == 0.0 || v > 1.0; };
  r.number<double>("workload", "balanced_task_cap", c.esp.balanced_task_cap, cap_ok, "0 or > 1");
  r.number<double>("workload", "imbalanced_task_cap", c.esp.imbalanced_task_cap, cap_ok, "0 or > 1");
  r.number<double>("workload", "estimate_factor", c.esp.estimate_factor, positive<double>, "> 0");
  c.swf.estimate_factor = c.esp.estimate_factor;
  r.number<double>("workload", "estimated_makespan", c.arrival.estimated_makespan, positive<double>, "> 0 s");
  r.number<double>("workload", "submission_span", c.arrival.submission_span_fraction, non_negative<double>, ">= 0");
  r.number<double>("workload", "quiet_fraction", c.arrival.quiet_fraction, fraction, "[0, 1]");
  c.swf.tasks_per_host = c.esp.tasks_per_host;
  if (auto v = r.raw("workload", "swf_profile")) {
    if (auto p = parse_profile(*v)) {
      c.swf.profile.kind = *p;
      c.swf.profile.cv = *p == ProfileKind::Balanced ? c.esp.balanced_cv : c.esp.imbalanced_cv;
      c.swf.profile.spatial_correlation =
          *p == ProfileKind::Balanced ? c.esp.balanced_correlation : c.esp.imbalanced_correlation;
      c.swf.profile.max_task_factor = *p == ProfileKind::Balanced ? c.esp.balanced_task_cap : c.esp.imbalanced_task_cap;
    } else {
      errors.push_back(fmt::format("workload.swf_profile: unknown value '{}'", *v));
    }
  }

  r.list("als", "policy", c.policies, [](const std::string& s) { return parse_policy(s); }, "static|gss|fac|af");
  if (auto v = r.raw("als", "fac_rule")) {
    if (auto rule = parse_factoring_rule(*v)) {
      c.sim.fac_rule = *rule;
    } else {
      errors.push_back(fmt::format("als.fac_rule: expected factoring|fac2, got '{}'", *v));
    }
  }

  r.flag("bls", "backfill", c.sim.bls.backfill);
  r.list("bls", "rca", c.rca, [](const std::string& s) { return parse_switch(s); }, "on|off");
  r.flag("bls", "lend_to_backfill", c.sim.bls.lend_to_backfill);

  r.flag("rca", "exclusion", c.sim.rca_exclusion);
  r.number<double>("rca", "accept_threshold", c.sim.accept_threshold, non_negative<double>, ">= 0");
  r.number<double>("rca", "history_threshold", c.sim.history_threshold, fraction, "[0, 1]");

  r.list("run", "seeds", c.seeds,
         [](const std::string& s) -> std::optional<std::uint64_t> {
           std::uint64_t v = 0;
           const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
           if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
           return v;
         },
         "non-negative integers");
  std::int64_t seed_count = 0;
  std::uint64_t first_seed = 1;
  const bool has_count = r.raw("run", "seed_count").has_value();
  r.number<std::int64_t>("run", "seed_count", seed_count, positive<std::int64_t>, ">= 1");
  r.number<std::uint64_t>("run", "first_seed", first_seed, [](std::uint64_t) { return true; }, "any");
  if (has_count && r.raw("run", "seeds")) {
    errors.push_back("run.seed_count: give either seeds or seed_count, not both");
  } else if (has_count && seed_count > 0) {
    c.seeds.clear();
    for (std::int64_t i = 0; i < seed_count; ++i) c.seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  }
  if (auto v = r.raw("run", "output")) {
    if (v->empty()) {
      errors.push_back("run.output: empty path");
    } else {
      c.output_dir = *v;
    }
  }
  r.number<double>("run", "series_bin", c.series_bin, positive<double>, "> 0 s");
  if (auto v = r.raw("run", "series_mode")) {
    if (auto m = parse_series_mode(*v)) {
      c.series_mode = *m;
    } else {
      errors.push_back(fmt::format("run.series_mode: expected cumulative|instantaneous, got '{}'", *v));
    }
  }
  r.flag("run", "traces", c.write_traces);

  r.unknown_keys();
  if (c.source == WorkloadSource::Swf && c.swf_path.empty()) {
    errors.push_back("workload.swf_path: required when workload.source = swf");
  }
  if (c.source == WorkloadSource::Esp) {
    const int largest = c.esp.scale_hosts;
    if (largest > c.sim.hosts) {
      errors.push_back(fmt::format("workload.scale_hosts: {} exceeds platform.hosts {}", largest, c.sim.hosts));
    }
  }
  if (force_rca) c.rca = {*force_rca};
#ifdef RCASIM_WITHOUT_RCA
  if (std::find(c.rca.begin(), c.rca.end(), true) != c.rca.end()) {
    errors.push_back("bls.rca: this build has no RCA support; set bls.rca = off or pass --rca off");
  }
#endif
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

ExperimentConfig validate_config(const std::string& path, std::optional<bool> force_rca) {
  std::ifstream in(path);
  if (!in) throw ConfigError({fmt::format("{}: cannot open", path)});
  ExperimentConfig c = parse_config(in, force_rca);
  if (c.source == WorkloadSource::Swf) {
    fs::path swf(c.swf_path);
    if (swf.is_relative()) c.swf_path = (fs::path(path).parent_path() / swf).string();
    if (!fs::exists(c.swf_path)) throw ConfigError({fmt::format("workload.swf_path: {} does not exist", c.swf_path)});
  }
  return c;
}

void write_config(const ExperimentConfig& c, std::ostream& out) {
  auto join = [](const auto& items, auto fn) {
    std::string s;
    for (const auto& i : items) s += (s.empty() ? "" : ",") + std::string(fn(i));
    return s;
  };
  out << "[platform]\n"
      << fmt::format("hosts = {}\nbandwidth = {}\nlatency = {}\nmessage_bytes = {}\n", c.sim.hosts,
                     c.sim.bandwidth_bps, c.sim.latency_s, c.sim.message_bytes);
  out << "\n[workload]\n"
      << "source = " << (c.source == WorkloadSource::Esp ? "esp" : "swf") << "\n"
      << "profiles = " << join(c.profiles, [](ProfileKind p) { return to_string(p); }) << "\n";
  if (!c.swf_path.empty()) out << "swf_path = " << c.swf_path << "\n";
  if (c.source == WorkloadSource::Swf) out << "swf_profile = " << to_string(c.swf.profile.kind) << "\n";
  out << fmt::format("scale_hosts = {}\ntasks_per_host = {}\nlower_bound_makespan = {}\n", c.esp.scale_hosts,
                     c.esp.tasks_per_host, c.esp.lower_bound_makespan);
  for (const auto& cat : kEspCategories) {
    out << fmt::format("runtime_{} = {}\n", cat.id, esp_category_runtime(cat, c.esp));
  }
  out << fmt::format(
      "balanced_cv = {}\nimbalanced_cv = {}\nbalanced_correlation = {}\nimbalanced_correlation = {}\n"
      "balanced_task_cap = {}\nimbalanced_task_cap = {}\n"
      "estimate_factor = {}\nestimated_makespan = {}\nsubmission_span = {}\nquiet_fraction = {}\n",
      c.esp.balanced_cv, c.esp.imbalanced_cv, c.esp.balanced_correlation, c.esp.imbalanced_correlation,
      c.esp.balanced_task_cap, c.esp.imbalanced_task_cap, c.esp.estimate_factor, c.arrival.estimated_makespan, c.arrival.submission_span_fraction,
      c.arrival.quiet_fraction);
  out << "\n[als]\n"
      << "policy = " << join(c.policies, [](ChunkPolicyKind p) { return to_string(p); }) << "\n"
      << "fac_rule = " << to_string(c.sim.fac_rule) << "\n";
  out << "\n[bls]\n"
      << "backfill = " << on_off(c.sim.bls.backfill) << "\n"
      << "rca = " << join(c.rca, [](bool b) { return on_off(b); }) << "\n"
      << "lend_to_backfill = " << on_off(c.sim.bls.lend_to_backfill) << "\n";
  out << "\n[rca]\n"
      << "exclusion = " << on_off(c.sim.rca_exclusion) << "\n"
      << fmt::format("accept_threshold = {}\nhistory_threshold = {}\n", c.sim.accept_threshold,
                     c.sim.history_threshold);
  out << "\n[run]\n"
      << "seeds = " << join(c.seeds, [](std::uint64_t s) { return std::to_string(s); }) << "\n"
      << "output = " << c.output_dir << "\n"
      << fmt::format("series_bin = {}\n", c.series_bin) << "series_mode = " << to_string(c.series_mode) << "\n"
      << "traces = " << on_off(c.write_traces) << "\n";
}

std::string Cell::id() const {
  return fmt::format("{}-{}-rca_{}-s{}", workload, to_string(policy), on_off(rca), seed);
}

std::vector<Cell> expand_matrix(const ExperimentConfig& config) {
  std::vector<Cell> out;
  std::vector<std::pair<std::string, ProfileKind>> workloads;
  if (config.source == WorkloadSource::Esp) {
    for (ProfileKind p : config.profiles) workloads.emplace_back(fmt::format("esp-{}", to_string(p)), p);
  } else {
    workloads.emplace_back(fs::path(config.swf_path).stem().string(), config.swf.profile.kind);
  }
  for (const auto& [name, profile] : workloads) {
    for (ChunkPolicyKind policy : config.policies) {
      for (std::uint64_t seed : config.seeds) {
        for (bool rca : config.rca) out.push_back({name, profile, policy, rca, seed});
      }
    }
  }
  return out;
}

JobSet build_workload(const ExperimentConfig& config, const Cell& cell) {
  if (config.source == WorkloadSource::Swf) {
    SwfImportParams p = config.swf;
    p.seed = cell.seed;
    JobSet js = read_swf(config.swf_path, p);
    js.name = cell.workload;
    return js;
  }
  return arrival_schedule(generate_esp(cell.profile, cell.seed, config.esp), config.arrival, cell.seed);
}

CellResult summarize_cell(const ExperimentConfig& config, const Cell& cell, const SimulationResult& sim) {
  CellResult r;
  r.cell = cell;
  r.jobs = sim.jobs;
  r.rca = sim.rca;
  r.events = sim.events;
  r.executed_task_time = sim.executed_task_time;
  r.backfills = sim.backfill_log.size();
  r.backfill_safe = std::all_of(sim.backfill_log.begin(), sim.backfill_log.end(),
                                [](const BackfillDecision& d) { return d.reserved_after <= d.reserved_before; });
  if (sim.trace.empty()) return r;
  r.metrics = compute_system_metrics(sim.trace, sim.hosts);
  r.series = utilization_timeseries(sim.trace, sim.hosts, config.series_bin, config.series_mode);
  r.series_average = series_average(r.series, config.series_mode);
  std::unordered_map<JobId, JobStats> by_id;
  for (const JobStats& s : all_job_stats(sim.trace, r.jobs)) by_id.emplace(s.job_id, s);
  r.job_stats.reserve(r.jobs.size());
  for (std::size_t i = 0; i < r.jobs.size(); ++i) {
    const JobRecord& j = r.jobs[i];
    auto it = by_id.find(j.id);
    r.job_stats.push_back(it != by_id.end() ? it->second : JobStats{.job_id = j.id});
    if (!j.start || it == by_id.end()) continue;
    CategoryMeans& m = r.categories[j.category];
    m.wait += (*j.start - j.arrival).seconds();
    m.max_mean_ratio += r.job_stats[i].max_mean_ratio;
    ++m.jobs;
  }
  for (auto& [cat, m] : r.categories) {
    m.wait /= m.jobs;
    m.max_mean_ratio /= m.jobs;
  }
  return r;
}

namespace {

SimConfig cell_sim_config(const ExperimentConfig& config, const Cell& cell) {
  SimConfig sim = config.sim;
  sim.bls.rca = cell.rca;
  sim.policy = cell.policy;
  return sim;
}

CellResult run_one(const ExperimentConfig& config, const Cell& cell, bool write_outputs) {
  const SimulationResult sim = simulate(cell_sim_config(config, cell), build_workload(config, cell));
  CellResult r = summarize_cell(config, cell, sim);
  if (write_outputs) write_cell_outputs(config, r, sim);
  return r;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& config, const Cell& cell) { return run_one(config, cell, false); }

std::vector<CellResult> run_matrix(const ExperimentConfig& config, bool write_outputs) {
  const std::vector<Cell> cells = expand_matrix(config);
  std::vector<CellResult> out(cells.size());
  std::vector<std::string> failures(cells.size());
  const auto n = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = run_one(config, cells[k], write_outputs);
    } catch (const std::exception& e) {
      failures[k] = fmt::format("{}: {}", cells[k].id(), e.what());
    }
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw std::runtime_error(f);
  }
  return out;
}

std::vector<CellResult> run_matrix_serial(const ExperimentConfig& config, bool write_outputs) {
  std::vector<CellResult> out;
  for (const Cell& cell : expand_matrix(config)) out.push_back(run_one(config, cell, write_outputs));
  return out;
}

std::string metrics_header() {
  std::string h =
      "workload,profile,als,backfill,rca,seed,su_percent,makespan_s,series_average,overhead_s,t_first_start_s,"
      "t_last_complete_s,jobs,mean_wait_s,mean_max_mean,lend_grants,idle_reports,exclusions_accepted,"
      "exclusions_rejected,backfills";
  for (const auto& cat : kEspCategories) h += fmt::format(",wait_{}", cat.id);
  for (const auto& cat : kEspCategories) h += fmt::format(",max_mean_{}", cat.id);
  return h;
}

std::string metrics_row(const CellResult& r, const ExperimentConfig& config) {
  double wait = 0.0, ratio = 0.0;
  int jobs = 0;
  for (const auto& [cat, m] : r.categories) {
    wait += m.wait * m.jobs;
    ratio += m.max_mean_ratio * m.jobs;
    jobs += m.jobs;
  }
  if (jobs > 0) {
    wait /= jobs;
    ratio /= jobs;
  }
  std::string row = fmt::format(
      "{},{},{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{:.6f},{:.6f},{},{},{},{},{}", r.cell.workload,
      to_string(r.cell.profile), to_string(r.cell.policy), on_off(config.sim.bls.backfill), on_off(r.cell.rca),
      r.cell.seed, r.metrics.su_percent, r.metrics.makespan_seconds, r.series_average, r.metrics.overhead_total.seconds(),
      r.metrics.t_first_start.seconds(), r.metrics.t_last_complete.seconds(), r.jobs.size(), wait, ratio,
      r.rca.lend_grants, r.rca.idle_reports, r.rca.exclusions_accepted, r.rca.exclusions_rejected, r.backfills);
  for (const auto& cat : kEspCategories) {
    auto it = r.categories.find(cat.id);
    row += it == r.categories.end() ? std::string(",") : fmt::format(",{:.6f}", it->second.wait);
  }
  for (const auto& cat : kEspCategories) {
    auto it = r.categories.find(cat.id);
    row += it == r.categories.end() ? std::string(",") : fmt::format(",{:.6f}", it->second.max_mean_ratio);
  }
  return row;
}

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
  return out;
}

}  // namespace

void write_cell_outputs(const ExperimentConfig& config, const CellResult& r, const SimulationResult& sim) {
  const fs::path dir = fs::path(config.output_dir) / r.cell.id();
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "metrics.csv");
    out << metrics_header() << "\n" << metrics_row(r, config) << "\n";
  }
  {
    auto out = open_out(dir / "utilization.csv");
    out << "time_s,percent\n";
    for (const auto& p : r.series) out << fmt::format("{:.6f},{:.6f}\n", p.bin_start + p.bin_width, p.percent);
  }
  {
    auto out = open_out(dir / "jobs.csv");
    out << "job,category,hosts,borrowed_hosts,arrival_s,start_s,end_s,wait_s,max_mean,chunks,workers\n";
    for (std::size_t i = 0; i < r.jobs.size(); ++i) {
      const JobRecord& j = r.jobs[i];
      const JobStats& s = r.job_stats[i];
      if (!j.start || !j.end) {
        out << fmt::format("{},{},{},{},{:.6f},,,,,0,0\n", j.id, j.category, j.hosts, j.borrowed_hosts,
                           j.arrival.seconds());
        continue;
      }
      out << fmt::format("{},{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", j.id, j.category, j.hosts,
                         j.borrowed_hosts, j.arrival.seconds(), j.start->seconds(), j.end->seconds(),
                         (*j.start - j.arrival).seconds(), s.max_mean_ratio, s.chunks, s.workers);
    }
  }
  if (config.write_traces) {
    export_timeline(sim.trace, (dir / "timeline.json").string());
    export_events(sim.trace, (dir / "events.tsv").string());
  }
}

void write_matrix_outputs(const ExperimentConfig& config, const std::vector<CellResult>& results) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "metrics.csv");
    out << metrics_header() << "\n";
    for (const auto& r : results) out << metrics_row(r, config) << "\n";
  }
  auto out = open_out(dir / "summary.csv");
  out << "workload,als,seed,su_off,su_on,delta_su,makespan_off_s,makespan_on_s,delta_makespan_s,"
         "delta_makespan_percent\n";
  std::map<std::tuple<std::string, ChunkPolicyKind, std::uint64_t>, std::pair<const CellResult*, const CellResult*>>
      pairs;
  std::vector<std::tuple<std::string, ChunkPolicyKind, std::uint64_t>> order;
  for (const auto& r : results) {
    const auto key = std::make_tuple(r.cell.workload, r.cell.policy, r.cell.seed);
    auto [it, inserted] = pairs.try_emplace(key);
    if (inserted) order.push_back(key);
    (r.cell.rca ? it->second.second : it->second.first) = &r;
  }
  for (const auto& key : order) {
    const auto [off, on] = pairs.at(key);
    if (!off || !on) continue;
    const double dm = on->metrics.makespan_seconds - off->metrics.makespan_seconds;
    out << fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", std::get<0>(key),
                       to_string(std::get<1>(key)), std::get<2>(key), off->metrics.su_percent, on->metrics.su_percent,
                       on->metrics.su_percent - off->metrics.su_percent, off->metrics.makespan_seconds,
                       on->metrics.makespan_seconds, dm, 100.0 * dm / off->metrics.makespan_seconds);
  }
}

std::vector<CellResult> run_experiment(const ExperimentConfig& config, bool parallel) {
  std::vector<CellResult> results = parallel ? run_matrix(config, true) : run_matrix_serial(config, true);
  write_matrix_outputs(config, results);
  return results;
}

}  // namespace rcasim
