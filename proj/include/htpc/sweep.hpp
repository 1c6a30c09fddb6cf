#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace htpc {

// A reproducible experiment grid: (n values) x (lambda or c values) points,
// `replicates` runs each. Every (point, replicate) pair maps to a unique
// derived seed, so reruns reproduce every row bit-identically.
struct SweepPlan {
  enum class Regime { lambda_scale, log_scale };

  int d = 0;
  Eigen::VectorXd a;
  std::vector<long> n_values;
  Regime regime = Regime::lambda_scale;
  std::vector<double> values;  // lambda list or c list
  long replicates = 1;
  std::uint64_t seed = 0;
  std::string out_base;  // output path prefix; empty = stdout only
  bool histograms = false;  // also collect per-point size histograms (large)

  void validate() const;  // throws std::invalid_argument
};

// Flat key-value config: lines of `key = value`, '#' comments. Keys: d, a, n,
// regime (lambda|log), values, replicates, seed, out. Lists are
// comma-separated.
SweepPlan parse_plan(std::istream& in);
SweepPlan parse_plan_file(const std::string& path);

struct SweepRow {
  // Point parameters.
  int point_index = 0;
  long n = 0;
  double value = 0.0;  // lambda or c
  double p = 0.0;
  long replicate = 0;
  std::uint64_t row_seed = 0;
  // Simulation results.
  std::int64_t occupied_count = 0;
  std::int64_t largest = 0;
  std::int64_t second_largest = 0;
  std::int64_t isolated_count = 0;
  std::int64_t component_count = 0;
  bool is_connected = false;
  double largest_over_log_n = 0.0;
  double largest_normalized = 0.0;  // largest / (lambda_eff prod(a) n^(d-1))
  // Theory columns, identical across replicates of a point.
  double lambda_c = 0.0;
  double giant_fraction_pred = 0.0;  // 1 - q at lambda_eff (0 when subcritical)
  double c_conn = 0.0;
  double c_iso_giant = 0.0;
  // Timing; reported in the JSON summary, never in the CSV.
  double wall_ms = 0.0;
  // Filled only when plan.histograms is set.
  std::map<std::int64_t, std::int64_t> size_histogram;
};

// Runs the grid on a worker pool (threads == 0: HTPC_THREADS or hardware).
// Rows come back in canonical (point, replicate) order regardless of
// schedule.
std::vector<SweepRow> run_sweep(const SweepPlan& plan, int threads = 0);

// RFC-4180 CSV; contains only deterministic columns.
void write_rows_csv(const SweepPlan& plan, const std::vector<SweepRow>& rows,
                    std::ostream& out);

// Per-point aggregation: mean/CI of the normalized giant size, deviation from
// the predicted fraction, connectivity rates. JSON text.
std::string compare_report(const SweepPlan& plan,
                           const std::vector<SweepRow>& rows);

// One (size,count) CSV per grid point, replicates merged, written to
// <out_base>.hist<point>.csv. Requires a plan run with histograms enabled.
void write_point_histograms(const SweepPlan& plan,
                            const std::vector<SweepRow>& rows);

}  // namespace htpc
