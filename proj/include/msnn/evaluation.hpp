#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msnn/a2rl.hpp"
#include "msnn/model_spec.hpp"
#include "msnn/telemetry.hpp"
#include "msnn/training.hpp"

namespace msnn {

inline constexpr double kRadToDeg = 57.295779513082320876798154814105;

/// Root mean square of pred - target, converted from rad to deg.
double rmse(std::span<const double> pred, std::span<const double> target);
/// Mean squared error over the population variance of the target.
double fvu(std::span<const double> pred, std::span<const double> target);
/// n ln(mse) + 2k.
double aic(std::size_t n_samples, double mse, std::size_t n_params);

struct Metrics {
  double rmse = 0.0;  // [deg]
  double fvu = 0.0;
  std::size_t n_samples = 0;
};
Metrics compute_metrics(std::span<const double> pred, std::span<const double> target);

/// Boxplot statistics of the steering error pred - target [deg].
struct ErrorStats {
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest error >= q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest error <= q3 + 1.5 IQR
  double max_abs = 0.0;
  std::size_t outliers = 0;
};
ErrorStats error_stats(std::span<const double> pred, std::span<const double> target);

/// Linear-interpolation quantile of sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

/// Training and validation telemetry for one split choice.
struct Datasets {
  Telemetry train;
  Telemetry valid;
  SplitName train_split = SplitName::Large;

  static Datasets from(const Telemetry& records, SplitName train_split);
};

/// Windows of `records` for horizon q, optionally restricted to the start
/// indices that are also valid for the longer horizon `common_q`.
std::vector<WindowedSample> windows_for(const Telemetry& records, std::size_t q,
                                        std::optional<std::size_t> common_q, double sample_time);

// ---- grid search -----------------------------------------------------------

struct GridSpec {
  std::vector<std::size_t> q{4, 9, 14};
  std::vector<std::size_t> n_y{3, 5, 7};
  std::vector<std::size_t> n_x{3, 4, 5, 6, 7};
  std::vector<std::size_t> n_v{3, 4, 5, 6, 7};

  std::size_t size() const { return q.size() * n_y.size() * n_x.size() * n_v.size(); }
  void validate() const;
  static GridSpec reduced();  // q {4,9}, n_y {3,5}, n_x {3,5}, n_v {3,5}
};

struct GridCell {
  std::size_t q = 0, n_y = 0, n_x = 0, n_v = 0;
  std::size_t n_params = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double mse = 0.0;   // validation [rad^2]
  double rmse = 0.0;  // validation [deg]
  double aic = 0.0;
  bool ok = false;
  std::string error;
};

struct GridResult {
  std::vector<GridCell> cells;  // lexicographic (q, n_y, n_x, n_v)
  std::optional<std::size_t> best;
  std::size_t failures() const;
};

/// Lowest AIC among successful cells; ties go to fewer parameters, then to
/// the lexicographically smaller (q, n_y, n_x, n_v).
std::optional<std::size_t> grid_argmin(std::span<const GridCell> cells);

/// Per-cell seed from the base seed and the cell index.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t cell_index);

/// Trains one MS-NN-steer per cell on `jobs` workers. Every cell sees the
/// samples valid for the largest q so n is identical grid-wide.
GridResult grid_search(const GridSpec& spec, const Datasets& data, const TrainConfig& tc,
                       const Hyper& base = {}, std::size_t jobs = 0);

void write_grid_csv(const std::filesystem::path& path, const GridResult& result);
nlohmann::json to_json(const GridResult& result);

// ---- controller comparison -------------------------------------------------

struct TrainedModel {
  ModelSpec spec;
  ParamVector params;
  TrainResult training;  // empty when the parameters were loaded
};

struct TrainedControllers {
  std::map<ModelKind, TrainedModel> models;
  A2rlFit a2rl;
  Hyper hyper;
};

inline constexpr const char* kA2rlName = "a2rl-control";

/// Trains the three learned controllers (in parallel) and fits A2RL-control
/// on the training split.
TrainedControllers fit_controllers(const Datasets& data, const TrainConfig& tc, const Hyper& hyper,
                                   std::size_t jobs = 0);

/// Fits only A2RL-control on the training split.
A2rlFit fit_a2rl_on(const Telemetry& train, const Hyper& hyper, std::uint64_t seed = 1);

struct ControllerRow {
  std::string controller;
  std::string split;  // "train" or "valid"
  Metrics metrics;
};

struct TracePoint {
  double t = 0.0;
  int lap = 0;
  int sector = 0;
  double measured = 0.0;
  std::map<std::string, double> predicted;  // by controller name [rad]
};

struct ComparisonReport {
  std::vector<ControllerRow> rows;
  std::map<std::string, ErrorStats> valid_errors;
  std::vector<TracePoint> valid_trace;

  const Metrics& at(const std::string& controller, const std::string& split) const;
};

/// Pure evaluation of already trained controllers.
ComparisonReport compare_controllers(const TrainedControllers& trained, const Datasets& data);

/// Per-record predictions of one controller on the scored window starts.
std::vector<double> controller_predictions(const TrainedControllers& trained,
                                           const std::string& controller,
                                           const Telemetry& records,
                                           std::span<const WindowedSample> samples);

void write_comparison_csv(const std::filesystem::path& path, const ComparisonReport& report);
void write_error_stats_csv(const std::filesystem::path& path, const ComparisonReport& report);
void write_trace_csv(const std::filesystem::path& path, const ComparisonReport& report);
nlohmann::json to_json(const ComparisonReport& report);

std::string controller_name(ModelKind kind);
const std::vector<std::string>& controller_order();

}  // namespace msnn
