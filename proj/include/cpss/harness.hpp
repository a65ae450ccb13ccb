// Monte Carlo driver: scenario configuration, per-sample pipeline runs,
// aggregation into metric tables, and CSV/SVG emission. Everything here is
// deterministic given (config, master_seed), including output bytes.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpss/allocation.hpp"
#include "cpss/channel.hpp"
#include "cpss/wmmse.hpp"

namespace cpss {

/// One experiment description. SNR values are 10*log10(p_max / sigma^2) with
/// sigma^2 = 1, so p_max = 10^(snr_db / 10).
struct ScenarioConfig {
  Topology topo{{10, 10}, {4, 4}, {2, 2}, {3, 3}, 1};
  std::vector<double> snr_db{10.0};
  int samples = 200;
  uint64_t master_seed = 1;
  std::string method = "both";  // gale_shapley | transportation | both
  std::vector<double> weights;  // per user id, padded with 1.0; empty = all ones
  WmmseSettings wmmse;
  std::string sweep = "snr";  // iterations | snr | users
  std::vector<double> sweep_values;

  void validate() const;  // throws ConfigError
};

/// Parses a JSON object with snake_case ScenarioConfig field names. Counts
/// that are per cell (users_per_cell, tx_antennas, rx_antennas,
/// dedicated_subcarriers) accept either a scalar or a two-element array.
/// Unknown keys are rejected. For sweep == "snr", empty sweep_values default
/// to snr_db.
ScenarioConfig parse_config(const std::string& json_text);

std::vector<AllocationMethod> methods_of(const ScenarioConfig& config);
std::string method_token(AllocationMethod method);  // "gs" | "tp"

struct SampleResult {
  std::vector<double> trace;  // weighted sum rate per iteration
  double final_wsr = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// One full pipeline pass: channels for (master_seed, sample_index), two-stage
/// allocation per cell with capacity = tx antennas, WMMSE solve. Uses the
/// first snr_db entry; unmatched users contribute zero rate.
SampleResult run_sample(const ScenarioConfig& config, uint64_t sample_index,
                        AllocationMethod method);

struct MetricsRow {
  std::string method;  // "gs" | "tp"
  std::string sweep;   // "iterations" | "snr" | "users"
  double sweep_value = 0.0;
  double snr_db = 0.0;
  double mean_wsr = 0.0;
  double std_error = 0.0;
  int samples = 0;  // samples that completed
  double mean_iters = 0.0;
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
};

struct ExperimentResult {
  MetricsTable table;
  int attempted = 0;
  int failed = 0;
  std::vector<std::string> failure_log;  // one entry per aborted sample
};

/// Full grid: method x sweep value x SNR point, `samples` samples each.
/// Samples that throw are excluded from the aggregates and logged; the caller
/// decides what failure rate is tolerable. The iterations sweep reuses one
/// solve per sample and reads the trace at each requested iteration, carrying
/// the last value forward for samples that converged earlier.
ExperimentResult run_experiment(const ScenarioConfig& config);

/// Header `method,sweep,sweep_value,snr_db,mean_wsr,std_error,samples,
/// mean_iters`; one row per table row, 6 significant digits, rows ordered by
/// (method, sweep_value, snr_db).
std::string render_csv(const MetricsTable& table);
void emit_csv(const MetricsTable& table, const std::string& path);
MetricsTable parse_csv(const std::string& csv_text);

/// Static SVG line chart: one polyline per series, where a series is a method
/// for the snr sweep and a (method, snr_db) pair otherwise. Axis ranges cover
/// the plotted values with a 5% margin.
std::string render_plot(const MetricsTable& table, const std::string& kind);
void emit_plot(const MetricsTable& table, const std::string& kind, const std::string& path);

}  // namespace cpss
