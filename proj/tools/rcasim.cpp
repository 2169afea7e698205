// rcasim command line: run / validate an experiment config, generate ESP
// workloads as SWF.

#include <fmt/format.h>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rcasim/experiment.hpp"
#include "rcasim/workload.hpp"

using namespace rcasim;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> rca;
};

ExperimentConfig load(const std::string& path, const Overrides& o) {
  std::optional<bool> rca;
  if (o.rca) rca = *o.rca == "on";
  ExperimentConfig c = validate_config(path, rca);
  if (o.seed) c.seeds = {*o.seed};
  if (o.out) c.output_dir = *o.out;
  return c;
}

void add_overrides(CLI::App* cmd, Overrides& o, bool with_out) {
  cmd->add_option("--seed", o.seed, "Run only this seed");
  if (with_out) cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--rca", o.rca, "Force RCA on or off for every cell")->check(CLI::IsMember({"on", "off"}));
}

int run(const std::string& path, const Overrides& o) {
  const ExperimentConfig c = load(path, o);
  const auto results = run_experiment(c);
  for (const auto& r : results) {
    fmt::print("{:<40} SU {:7.3f}%  makespan {:10.1f} s  lent {}\n", r.cell.id(), r.metrics.su_percent,
               r.metrics.makespan_seconds, r.rca.lend_grants);
  }
  fmt::print("{} cells -> {}\n", results.size(), c.output_dir);
  return 0;
}

int validate(const std::string& path, const Overrides& o) {
  const ExperimentConfig c = load(path, o);
  write_config(c, std::cout);
  fmt::print("# {} cells\n", expand_matrix(c).size());
  return 0;
}

int gen_esp(const std::string& profile_name, const std::string& out, const Overrides& o) {
  const auto profile = parse_profile(profile_name);
  if (!profile) throw std::invalid_argument(fmt::format("unknown profile '{}' (balanced|imbalanced)", profile_name));
  const std::uint64_t seed = o.seed.value_or(1);
  const JobSet js = arrival_schedule(generate_esp(*profile, seed), ArrivalParams{}, seed);
  write_swf(js, out);
  fmt::print("{} jobs -> {}\n", js.jobs.size(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level HPC scheduling simulator"};
  app.require_subcommand(1);

  Overrides o;
  std::string config_path, profile, out_path;

  auto* run_cmd = app.add_subcommand("run", "Simulate the experiment matrix of a config");
  run_cmd->add_option("config", config_path, "INI config")->required();
  add_overrides(run_cmd, o, true);

  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print it normalized");
  validate_cmd->add_option("config", config_path, "INI config")->required();
  add_overrides(validate_cmd, o, true);

  auto* gen_cmd = app.add_subcommand("gen-esp", "Write the ESP workload as SWF");
  gen_cmd->add_option("profile", profile, "balanced|imbalanced")->required();
  gen_cmd->add_option("out", out_path, "Output SWF path")->required();
  gen_cmd->add_option("--seed", o.seed, "Workload seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config_path, o);
    if (*validate_cmd) return validate(config_path, o);
    if (*gen_cmd) return gen_esp(profile, out_path, o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
