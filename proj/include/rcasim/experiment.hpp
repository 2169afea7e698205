#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcasim/engine.hpp"
#include "rcasim/metrics.hpp"
#include "rcasim/workload.hpp"

namespace rcasim {

enum class WorkloadSource { Esp, Swf };

struct ExperimentConfig {
  SimConfig sim;  // bls.rca is overwritten per cell
  WorkloadSource source = WorkloadSource::Esp;
  std::vector<ProfileKind> profiles{ProfileKind::Balanced, ProfileKind::Imbalanced};
  std::string swf_path;
  EspParams esp;
  ArrivalParams arrival;
  SwfImportParams swf;
  std::vector<ChunkPolicyKind> policies{ChunkPolicyKind::Static, ChunkPolicyKind::Gss, ChunkPolicyKind::Af};
  std::vector<bool> rca{false, true};
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  double series_bin = 60.0;  // seconds
  SeriesMode series_mode = SeriesMode::Cumulative;
  bool write_traces = true;  // timeline.json and events.tsv per cell
};

/// All validation problems of a config, one message per field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Parses an INI config (sections platform, workload, als, bls, rca, run).
/// Missing keys take defaults; unknown keys and bad values are collected
/// and thrown together as a ConfigError. force_rca replaces bls.rca before
/// validation, so an RCA-free build accepts a matrix config run with RCA off.
ExperimentConfig parse_config(std::istream& in, std::optional<bool> force_rca = std::nullopt);
ExperimentConfig validate_config(const std::string& path, std::optional<bool> force_rca = std::nullopt);
/// The normalized config in the same INI form, every key spelled out.
void write_config(const ExperimentConfig& config, std::ostream& out);

struct Cell {
  std::string workload;  // "esp-balanced", "esp-imbalanced" or the SWF name
  ProfileKind profile = ProfileKind::Balanced;
  ChunkPolicyKind policy = ChunkPolicyKind::Static;
  bool rca = false;
  std::uint64_t seed = 1;

  /// Directory name of the cell's outputs.
  std::string id() const;
};

/// Workload-major, then policy, seed, rca off before on.
std::vector<Cell> expand_matrix(const ExperimentConfig& config);

JobSet build_workload(const ExperimentConfig& config, const Cell& cell);

struct CategoryMeans {
  double wait = 0.0;            // start - arrival, seconds
  double max_mean_ratio = 0.0;
  int jobs = 0;
};

struct CellResult {
  Cell cell;
  SystemMetrics metrics;
  double series_average = 0.0;
  std::vector<SeriesPoint> series;
  std::vector<JobRecord> jobs;
  std::vector<JobStats> job_stats;  // parallel to jobs; chunks == 0 if a job never ran
  std::map<char, CategoryMeans> categories;
  RcaCounters rca;
  std::uint64_t events = 0;
  SimTime executed_task_time;
  bool backfill_safe = true;  // no decision moved the head's reserved start later
  std::size_t backfills = 0;
};

/// Metrics of one finished simulation.
CellResult summarize_cell(const ExperimentConfig& config, const Cell& cell, const SimulationResult& sim);
CellResult run_cell(const ExperimentConfig& config, const Cell& cell);

/// Cells in parallel (OpenMP); results in expand_matrix order. With
/// write_outputs each cell also writes its directory (write_cell_outputs).
std::vector<CellResult> run_matrix(const ExperimentConfig& config, bool write_outputs = false);
/// Same, one cell after another. Kept as the reference for run_matrix.
std::vector<CellResult> run_matrix_serial(const ExperimentConfig& config, bool write_outputs = false);

std::string metrics_header();
std::string metrics_row(const CellResult& r, const ExperimentConfig& config);

/// Per-cell directory (metrics.csv, utilization.csv, jobs.csv and, when
/// enabled, timeline.json and events.tsv) for one simulated cell.
void write_cell_outputs(const ExperimentConfig& config, const CellResult& r, const SimulationResult& sim);
/// Aggregate metrics.csv and summary.csv (RCA on/off deltas) in the output
/// directory.
void write_matrix_outputs(const ExperimentConfig& config, const std::vector<CellResult>& results);

/// run_matrix plus every output file. Returns the results.
std::vector<CellResult> run_experiment(const ExperimentConfig& config, bool parallel = true);

}  // namespace rcasim
