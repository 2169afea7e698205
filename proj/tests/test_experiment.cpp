#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rcasim/experiment.hpp"

using namespace rcasim;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

// ESP shrunk to 16 hosts and short jobs so a matrix runs in well under a second.
const char* kMini =
    "[platform]\nhosts = 16\n"
    "[workload]\nscale_hosts = 16\ntasks_per_host = 16\nlower_bound_makespan = 300\n"
    "estimated_makespan = 300\n"
    "[run]\nseeds = 1, 2\ntraces = on\nseries_bin = 5\n";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rcasim_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const auto c = parse("");
  CHECK(c.sim.hosts == 256);
  CHECK(c.sim.bandwidth_bps == 50e9);
  CHECK(c.sim.latency_s == 500e-9);
  CHECK(c.profiles.size() == 2);
  CHECK(c.policies.size() == 3);
  CHECK(c.rca == std::vector<bool>{false, true});
  CHECK(c.seeds == std::vector<std::uint64_t>{1});
  CHECK(c.sim.bls.backfill);
  CHECK_FALSE(c.sim.rca_exclusion);
  CHECK(c.series_mode == SeriesMode::Cumulative);
  CHECK(expand_matrix(c).size() == 12);
}

TEST_CASE("config errors are named") {
  auto e = errors_of("[platform]\nhostz = 4\n");
  REQUIRE(e.size() == 1);
  CHECK(e[0].find("platform.hostz") != std::string::npos);

  e = errors_of("[run]\nseed_count = -2\n");
  REQUIRE(e.size() == 1);
  CHECK(e[0].find("run.seed_count") != std::string::npos);

  e = errors_of("[als]\npolicy = gss, dynamic\n[platform]\nhosts = 0\n[nope]\nx = 1\n");
  CHECK(e.size() == 3);

  CHECK_FALSE(errors_of("[workload]\nsource = swf\n").empty());
  CHECK_FALSE(errors_of("[platform]\nhosts = 64\n").empty());  // ESP scale 256 > 64 hosts
  CHECK_FALSE(errors_of("[bls]\nrca = maybe\n").empty());
  CHECK_FALSE(errors_of("[run]\nseeds = 1\nseed_count = 3\n").empty());
  CHECK(errors_of("[run]\nseed_count = 3\nfirst_seed = 10\n").empty());
  CHECK(parse("[run]\nseed_count = 3\nfirst_seed = 10\n").seeds == std::vector<std::uint64_t>{10, 11, 12});
}

TEST_CASE("normalized config round trips") {
  const auto c = parse(kMini);
  std::ostringstream out;
  write_config(c, out);
  const auto back = parse(out.str());
  std::ostringstream again;
  write_config(back, again);
  CHECK(again.str() == out.str());
}

TEST_CASE("matrix cardinality and order") {
  const auto c = parse("[als]\npolicy = static, gss, af\n[bls]\nrca = off, on\n");
  const auto cells = expand_matrix(c);
  REQUIRE(cells.size() == 12);
  CHECK(cells[0].id() == "esp-balanced-static-rca_off-s1");
  CHECK(cells[1].id() == "esp-balanced-static-rca_on-s1");
  CHECK(cells[11].id() == "esp-imbalanced-af-rca_on-s1");
}

TEST_CASE("parallel matrix equals the serial reference") {
  const auto c = parse(kMini);
  const auto par = run_matrix(c);
  const auto ser = run_matrix_serial(c);
  REQUIRE(par.size() == ser.size());
  REQUIRE(par.size() == 24);
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].cell.id() == ser[i].cell.id());
    CHECK(metrics_row(par[i], c) == metrics_row(ser[i], c));
    CHECK(par[i].jobs == ser[i].jobs);
    CHECK(par[i].executed_task_time == ser[i].executed_task_time);
  }
}

TEST_CASE("outputs are written and reproducible") {
  auto c = parse(kMini);
  c.seeds = {1};
  c.profiles = {ProfileKind::Imbalanced};
  c.policies = {ChunkPolicyKind::Static};
  const fs::path a = scratch("a"), b = scratch("b");
  c.output_dir = a.string();
  const auto results = run_experiment(c);
  c.output_dir = b.string();
  run_experiment(c, false);
  REQUIRE(results.size() == 2);

  const std::vector<std::string> per_cell{"metrics.csv", "utilization.csv", "jobs.csv", "timeline.json", "events.tsv"};
  for (const auto& r : results) {
    for (const auto& f : per_cell) {
      const auto pa = a / r.cell.id() / f;
      REQUIRE(fs::exists(pa));
      CHECK(slurp(pa) == slurp(b / r.cell.id() / f));
    }
  }
  for (const auto* f : {"metrics.csv", "summary.csv"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string metrics = slurp(a / "metrics.csv");
  CHECK(metrics.rfind(metrics_header(), 0) == 0);
  std::size_t lines = 0;
  for (char ch : metrics) lines += ch == '\n';
  CHECK(lines == 3);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cell summaries") {
  auto c = parse(kMini);
  c.seeds = {1};
  for (const auto& cell : expand_matrix(c)) {
    const auto r = run_cell(c, cell);
    CHECK(r.jobs.size() == 230);
    CHECK(r.job_stats.size() == r.jobs.size());
    CHECK(r.metrics.su_percent > 0.0);
    CHECK(r.metrics.su_percent <= 100.0);
    CHECK(std::abs(r.series_average - r.metrics.su_percent) <= 1e-6 * r.metrics.su_percent);
    CHECK(r.backfill_safe);
    CHECK(r.metrics.busy_total == r.executed_task_time);
    int counted = 0;
    for (const auto& [cat, m] : r.categories) {
      counted += m.jobs;
      CHECK(m.max_mean_ratio >= 1.0);
    }
    CHECK(counted == 230);
    if (!cell.rca) CHECK(r.rca.lend_grants == 0);
  }
}

TEST_CASE("SWF source") {
  const fs::path dir = scratch("swf");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "w.swf");
    out << "1 0 -1 20 4 -1 -1 4 30 -1 1 -1 -1 1 -1 -1 -1 -1\n"
        << "2 5 -1 10 2 -1 -1 2 12 -1 1 -1 -1 2 -1 -1 -1 -1\n";
  }
  {
    std::ofstream out(dir / "c.ini");
    out << "[platform]\nhosts = 4\n[workload]\nsource = swf\nswf_path = w.swf\nswf_profile = imbalanced\n"
        << "tasks_per_host = 8\n[als]\npolicy = gss\n[run]\ntraces = off\n";
  }
  const auto c = validate_config((dir / "c.ini").string());
  CHECK(fs::path(c.swf_path).is_absolute());
  const auto cells = expand_matrix(c);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].workload == "w");
  const auto r = run_cell(c, cells[0]);
  CHECK(r.jobs.size() == 2);
  std::ostringstream normalized;
  write_config(c, normalized);
  std::istringstream back(normalized.str());
  const auto again = parse_config(back);
  CHECK(again.swf.profile.kind == ProfileKind::Imbalanced);
  CHECK(again.swf.profile.cv == c.swf.profile.cv);
  fs::remove_all(dir);
  CHECK_THROWS_AS(validate_config((dir / "c.ini").string()), ConfigError);
}
