#include "msnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <tuple>
#include <numeric>
#include <set>

#include "msnn/error.hpp"
#include "msnn/jobs.hpp"

namespace msnn {

using nlohmann::json;

namespace {

void check_pair(std::span<const double> pred, std::span<const double> target, std::size_t min_n,
                const char* op) {
  if (pred.size() != target.size()) {
    throw ConfigError(std::string(op) + ": prediction and target lengths differ (" +
                      std::to_string(pred.size()) + " vs " + std::to_string(target.size()) + ")");
  }
  if (pred.size() < min_n) {
    throw ConfigError(std::string(op) + ": need at least " + std::to_string(min_n) + " samples");
  }
}

double mse_of(std::span<const double> pred, std::span<const double> target) {
  double sq = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sq += (pred[i] - target[i]) * (pred[i] - target[i]);
  return sq / static_cast<double>(pred.size());
}

std::vector<double> targets_of(std::span<const WindowedSample> samples) {
  std::vector<double> t(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) t[i] = samples[i].target;
  return t;
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 1, "rmse");
  return std::sqrt(mse_of(pred, target)) * kRadToDeg;
}

double fvu(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 1, "fvu");
  const auto [lo, hi] = std::minmax_element(target.begin(), target.end());
  if (*lo == *hi) throw DomainError("fvu is undefined for a constant target");
  const double mean = std::accumulate(target.begin(), target.end(), 0.0) / target.size();
  double var = 0.0;
  for (double t : target) var += (t - mean) * (t - mean);
  var /= static_cast<double>(target.size());
  if (!(var > 0.0)) throw DomainError("fvu is undefined for a constant target");
  return mse_of(pred, target) / var;
}

double aic(std::size_t n_samples, double mse, std::size_t n_params) {
  if (n_samples < 1) throw ConfigError("aic: n_samples must be >= 1");
  if (!(mse > 0.0)) throw DomainError("aic: mse must be > 0");
  return static_cast<double>(n_samples) * std::log(mse) + 2.0 * static_cast<double>(n_params);
}

Metrics compute_metrics(std::span<const double> pred, std::span<const double> target) {
  return Metrics{rmse(pred, target), fvu(pred, target), pred.size()};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ConfigError("quantile of empty data");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ErrorStats error_stats(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target, 5, "error_stats");
  std::vector<double> e(pred.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = (pred[i] - target[i]) * kRadToDeg;
  ErrorStats s;
  const double n = static_cast<double>(e.size());
  s.mean = std::accumulate(e.begin(), e.end(), 0.0) / n;
  double var = 0.0;
  for (double x : e) {
    var += (x - s.mean) * (x - s.mean);
    s.max_abs = std::max(s.max_abs, std::abs(x));
  }
  s.stddev = std::sqrt(var / n);
  std::sort(e.begin(), e.end());
  s.q1 = quantile_sorted(e, 0.25);
  s.median = quantile_sorted(e, 0.5);
  s.q3 = quantile_sorted(e, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double x : e) {
    if (x < lo_fence || x > hi_fence) {
      ++s.outliers;
    } else {
      s.whisker_low = std::min(s.whisker_low, x);
      s.whisker_high = std::max(s.whisker_high, x);
    }
  }
  return s;
}

Datasets Datasets::from(const Telemetry& records, SplitName train_split) {
  if (train_split == SplitName::Validation) {
    throw ConfigError("the validation split cannot be used for training");
  }
  Datasets d;
  d.train_split = train_split;
  d.train = select_split(records, DatasetSplit::named(train_split));
  d.valid = select_split(records, DatasetSplit::named(SplitName::Validation));
  return d;
}

std::vector<WindowedSample> windows_for(const Telemetry& records, std::size_t q,
                                        std::optional<std::size_t> common_q, double sample_time) {
  auto windows = make_windows(records, q, sample_time);
  if (common_q && *common_q > q) {
    std::set<std::size_t> keep;
    for (const auto& s : make_windows(records, *common_q, sample_time)) keep.insert(s.index);
    std::erase_if(windows, [&](const WindowedSample& s) { return !keep.contains(s.index); });
  }
  if (windows.empty()) {
    throw DataError("no complete window of " + std::to_string(q + 1) + " samples in the data");
  }
  return windows;
}

// ---- grid search -----------------------------------------------------------

void GridSpec::validate() const {
  if (q.empty() || n_y.empty() || n_x.empty() || n_v.empty()) {
    throw ConfigError("grid spec ranges must be non-empty");
  }
}

GridSpec GridSpec::reduced() { return GridSpec{{4, 9}, {3, 5}, {3, 5}, {3, 5}}; }

std::size_t GridResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const GridCell& c) { return !c.ok; }));
}

std::optional<std::size_t> grid_argmin(std::span<const GridCell> cells) {
  std::optional<std::size_t> best;
  auto key = [](const GridCell& c) { return std::tuple(c.aic, c.n_params, c.q, c.n_y, c.n_x, c.n_v); };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].ok) continue;
    if (!best || key(cells[i]) < key(cells[*best])) best = i;
  }
  return best;
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t cell_index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (cell_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

GridResult grid_search(const GridSpec& spec, const Datasets& data, const TrainConfig& tc,
                       const Hyper& base, std::size_t jobs) {
  spec.validate();
  tc.validate();
  const std::size_t q_max = *std::max_element(spec.q.begin(), spec.q.end());

  GridResult result;
  for (auto q : spec.q)
    for (auto ny : spec.n_y)
      for (auto nx : spec.n_x)
        for (auto nv : spec.n_v) {
          GridCell c;
          c.q = q;
          c.n_y = ny;
          c.n_x = nx;
          c.n_v = nv;
          result.cells.push_back(c);
        }
  std::sort(result.cells.begin(), result.cells.end(), [](const GridCell& a, const GridCell& b) {
    return std::tie(a.q, a.n_y, a.n_x, a.n_v) < std::tie(b.q, b.n_y, b.n_x, b.n_v);
  });

  // Windows depend only on q; build them once per horizon.
  std::map<std::size_t, std::pair<std::vector<WindowedSample>, std::vector<WindowedSample>>> sets;
  for (auto q : spec.q) {
    sets[q] = {windows_for(data.train, q, q_max, base.sample_time),
               windows_for(data.valid, q, q_max, base.sample_time)};
  }

  const auto errors = run_jobs(result.cells.size(), jobs, [&](std::size_t i) {
    GridCell& c = result.cells[i];
    c.seed = cell_seed(tc.seed, i);
    Hyper h = base;
    h.q = c.q;
    h.n_y = c.n_y;
    h.n_x = c.n_x;
    h.n_v = c.n_v;
    const ModelSpec ms = make_spec(ModelKind::MsNnSteer, h, data.train);
    c.n_params = ms.param_count();
    TrainConfig cell_tc = tc;
    cell_tc.seed = c.seed;
    const auto& [train_set, valid_set] = sets.at(c.q);
    const TrainResult r = train(ms, train_set, valid_set, cell_tc);
    const double best = r.best_valid_rmse();
    c.n_samples = valid_set.size();
    c.mse = best * best;
    c.rmse = best * kRadToDeg;
    c.aic = aic(c.n_samples, c.mse, c.n_params);
    c.ok = true;
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    auto& c = result.cells[i];
    c.ok = false;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  }
  result.best = grid_argmin(result.cells);
  return result;
}

void write_grid_csv(const std::filesystem::path& path, const GridResult& result) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "q,n_y,n_x,n_v,aic,rmse,n_params\n";
  for (const auto& c : result.cells) {
    out << c.q << ',' << c.n_y << ',' << c.n_x << ',' << c.n_v << ',';
    if (c.ok) {
      out << c.aic << ',' << c.rmse;
    } else {
      out << "nan,nan";
    }
    out << ',' << c.n_params << '\n';
  }
}

json to_json(const GridResult& result) {
  json cells = json::array();
  for (const auto& c : result.cells) {
    json j{{"q", c.q},       {"n_y", c.n_y},   {"n_x", c.n_x},         {"n_v", c.n_v},
           {"ok", c.ok},     {"seed", c.seed}, {"n_params", c.n_params}};
    if (c.ok) {
      j["aic"] = c.aic;
      j["rmse_deg"] = c.rmse;
      j["n_samples"] = c.n_samples;
    } else {
      j["error"] = c.error;
    }
    cells.push_back(j);
  }
  json doc{{"cells", cells}, {"failures", result.failures()}};
  if (result.best) {
    const auto& b = result.cells[*result.best];
    doc["best"] = {{"q", b.q}, {"n_y", b.n_y}, {"n_x", b.n_x}, {"n_v", b.n_v}, {"aic", b.aic}};
  } else {
    doc["best"] = nullptr;
  }
  return doc;
}

// ---- controller comparison -------------------------------------------------

std::string controller_name(ModelKind kind) { return to_string(kind); }

const std::vector<std::string>& controller_order() {
  static const std::vector<std::string> order{"msnn-steer", "msnn-base", "gnn", kA2rlName};
  return order;
}

namespace {

struct Signals {
  std::vector<double> ay, ax, vx, delta;
  std::unique_ptr<bool[]> start_flags;  // contiguous, unlike std::vector<bool>
  std::span<const bool> starts() const { return {start_flags.get(), ay.size()}; }
};

Signals signals_of(const Telemetry& records) {
  Signals s;
  for (const auto& r : records) {
    s.ay.push_back(r.a_y);
    s.ax.push_back(r.a_x);
    s.vx.push_back(r.v_x);
    s.delta.push_back(r.delta);
  }
  const auto flags = segment_starts(records);
  s.start_flags = std::make_unique<bool[]>(flags.size());
  std::copy(flags.begin(), flags.end(), s.start_flags.get());
  return s;
}

A2rlParams a2rl_base(const Hyper& h) {
  A2rlParams p;
  p.dt = h.sample_time;
  p.wheelbase = h.wheelbase;
  p.vx_min = h.vx_min;
  return p;
}

std::vector<double> a2rl_predictions(const A2rlParams& p, const Telemetry& records) {
  const auto s = signals_of(records);
  return a2rl_run(p, s.ay, s.ax, s.vx, s.starts());
}

}  // namespace

A2rlFit fit_a2rl_on(const Telemetry& train, const Hyper& hyper, std::uint64_t seed) {
  const auto s = signals_of(train);
  std::vector<std::size_t> scored;
  for (const auto& w : windows_for(train, hyper.q, std::nullopt, hyper.sample_time)) {
    scored.push_back(w.index);
  }
  return fit_a2rl(a2rl_base(hyper), s.ay, s.ax, s.vx, s.starts(), s.delta, scored, 5, seed);
}

TrainedControllers fit_controllers(const Datasets& data, const TrainConfig& tc, const Hyper& hyper,
                                   std::size_t jobs) {
  tc.validate();
  TrainedControllers out;
  out.hyper = hyper;
  const auto train_set = windows_for(data.train, hyper.q, std::nullopt, hyper.sample_time);
  const auto valid_set = windows_for(data.valid, hyper.q, std::nullopt, hyper.sample_time);
  const std::vector<ModelKind> kinds{ModelKind::MsNnSteer, ModelKind::MsNnBase, ModelKind::Gnn};
  std::vector<TrainedModel> trained(kinds.size());
  const auto errors = run_jobs(kinds.size(), jobs, [&](std::size_t i) {
    TrainedModel& m = trained[i];
    m.spec = make_spec(kinds[i], hyper, data.train);
    m.training = train(m.spec, train_set, valid_set, tc);
    m.params = m.training.best_params;
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.models[kinds[i]] = std::move(trained[i]);
  }
  out.a2rl = fit_a2rl_on(data.train, hyper, tc.seed + 1);
  return out;
}

std::vector<double> controller_predictions(const TrainedControllers& trained,
                                           const std::string& controller,
                                           const Telemetry& records,
                                           std::span<const WindowedSample> samples) {
  if (controller == kA2rlName) {
    const auto all = a2rl_predictions(trained.a2rl.params, records);
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = all.at(samples[i].index);
    return out;
  }
  const auto it = trained.models.find(model_kind_from_string(controller));
  if (it == trained.models.end()) throw ConfigError("controller '" + controller + "' is not trained");
  const auto model = it->second.spec.make_model();
  return predict_all(*model, it->second.params.values, samples);
}

const Metrics& ComparisonReport::at(const std::string& controller, const std::string& split) const {
  for (const auto& r : rows) {
    if (r.controller == controller && r.split == split) return r.metrics;
  }
  throw ConfigError("no report row for " + controller + "/" + split);
}

ComparisonReport compare_controllers(const TrainedControllers& trained, const Datasets& data) {
  // Every controller is scored on the window starts valid for the longest horizon.
  std::size_t q_max = 0;
  for (const auto& [kind, m] : trained.models) q_max = std::max(q_max, m.spec.q());
  const double T = trained.hyper.sample_time;

  ComparisonReport report;
  for (const auto& [split, records] :
       {std::pair<std::string, const Telemetry*>{"train", &data.train}, {"valid", &data.valid}}) {
    const auto reference = windows_for(*records, q_max, std::nullopt, T);
    const auto target = targets_of(reference);
    for (const auto& name : controller_order()) {
      std::vector<double> pred;
      if (name == kA2rlName) {
        pred = controller_predictions(trained, name, *records, reference);
      } else {
        const auto it = trained.models.find(model_kind_from_string(name));
        if (it == trained.models.end()) continue;
        const auto samples = windows_for(*records, it->second.spec.q(), q_max, T);
        pred = controller_predictions(trained, name, *records, samples);
      }
      report.rows.push_back({name, split, compute_metrics(pred, target)});
      if (split == "valid") {
        report.valid_errors[name] = error_stats(pred, target);
        if (report.valid_trace.empty()) {
          for (const auto& s : reference) {
            const auto& r = (*records)[s.index];
            report.valid_trace.push_back({r.t, r.lap, r.sector, r.delta, {}});
          }
        }
        for (std::size_t i = 0; i < pred.size(); ++i) report.valid_trace[i].predicted[name] = pred[i];
      }
    }
  }
  return report;
}

void write_comparison_csv(const std::filesystem::path& path, const ComparisonReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(10);
  out << "controller,split,rmse_deg,fvu\n";
  for (const auto& r : report.rows) {
    out << r.controller << ',' << r.split << ',' << r.metrics.rmse << ',' << r.metrics.fvu << '\n';
  }
}

void write_error_stats_csv(const std::filesystem::path& path, const ComparisonReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(10);
  out << "controller,mean,stddev,median,q1,q3,whisker_low,whisker_high,max_abs,outliers\n";
  for (const auto& name : controller_order()) {
    const auto it = report.valid_errors.find(name);
    if (it == report.valid_errors.end()) continue;
    const auto& s = it->second;
    out << name << ',' << s.mean << ',' << s.stddev << ',' << s.median << ',' << s.q1 << ','
        << s.q3 << ',' << s.whisker_low << ',' << s.whisker_high << ',' << s.max_abs << ','
        << s.outliers << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const ComparisonReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(12);
  out << "t,delta_meas,delta_msnn_steer,delta_msnn_base,delta_gnn,delta_a2rl\n";
  auto value = [](const TracePoint& p, const char* name) -> std::string {
    const auto it = p.predicted.find(name);
    if (it == p.predicted.end()) return "";
    std::ostringstream s;
    s.precision(12);
    s << it->second;
    return s.str();
  };
  for (const auto& p : report.valid_trace) {
    out << p.t << ',' << p.measured << ',' << value(p, "msnn-steer") << ','
        << value(p, "msnn-base") << ',' << value(p, "gnn") << ',' << value(p, kA2rlName) << '\n';
  }
}

json to_json(const ComparisonReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"controller", r.controller},
                    {"split", r.split},
                    {"rmse_deg", r.metrics.rmse},
                    {"fvu", r.metrics.fvu},
                    {"n_samples", r.metrics.n_samples}});
  }
  json errors = json::object();
  for (const auto& [name, s] : report.valid_errors) {
    errors[name] = {{"mean", s.mean},       {"stddev", s.stddev},
                    {"median", s.median},   {"q1", s.q1},
                    {"q3", s.q3},           {"whisker_low", s.whisker_low},
                    {"whisker_high", s.whisker_high}, {"max_abs", s.max_abs},
                    {"outliers", s.outliers}};
  }
  return json{{"rows", rows}, {"valid_error_stats_deg", errors}};
}

}  // namespace msnn
