#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "msnn/error.hpp"
#include "msnn/evaluation.hpp"
#include "msnn/grad.hpp"
#include "msnn/jobs.hpp"
#include "msnn/model_spec.hpp"
#include "msnn/simulator.hpp"
#include "msnn/telemetry.hpp"
#include "msnn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace msnn;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Common {
  std::string out;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  double sample_time = kDefaultSampleTime;
};

// Collects what a run did; written as <command>.manifest.json on success.
class Manifest {
 public:
  explicit Manifest(std::string command)
      : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void input(const fs::path& p) { inputs_.push_back(p.string()); }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  json& config() { return config_; }
  json& extra() { return extra_; }

  void write(const fs::path& dir, const std::vector<std::string>& argv, std::uint64_t seed) {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j{{"command", command_},
           {"argv", argv},
           {"config", config_},
           {"inputs", inputs_},
           {"outputs", outputs_},
           {"seed", seed},
           {"tool_version", kVersion},
           {"wall_clock_seconds", secs}};
    if (!extra_.empty()) j["results"] = extra_;
    std::ofstream f(dir / (command_ + ".manifest.json"));
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write manifest in " + dir.string());
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> inputs_, outputs_;
  json config_ = json::object();
  json extra_ = json::object();
};

fs::path output_dir(const Common& c, const std::string& command) {
  fs::path dir;
  if (!c.out.empty()) {
    dir = c.out;
  } else if (const char* root = std::getenv("MSNN_OUT_ROOT"); root && *root) {
    dir = fs::path(root) / command;
  } else {
    dir = fs::path("msnn_out") / command;
  }
  fs::create_directories(dir);
  return dir;
}

fs::path telemetry_path(const std::string& data) {
  fs::path p(data);
  if (fs::is_directory(p)) p /= "telemetry.csv";
  if (!fs::exists(p)) throw DataError("telemetry not found: " + p.string());
  return p;
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

json to_json(const Hyper& h) {
  return {{"q", h.q},         {"n_y", h.n_y},
          {"n_x", h.n_x},     {"n_v", h.n_v},
          {"n_p1", h.n_p1},   {"n_p2", h.n_p2},
          {"n_neur", h.n_neur}, {"wheelbase", h.wheelbase},
          {"sample_time", h.sample_time}, {"vx_min", h.vx_min}};
}

Hyper hyper_from_json(const json& j, Hyper h) {
  for (const auto& [key, value] : j.items()) {
    if (key == "q") h.q = value.get<std::size_t>();
    else if (key == "n_y") h.n_y = value.get<std::size_t>();
    else if (key == "n_x") h.n_x = value.get<std::size_t>();
    else if (key == "n_v") h.n_v = value.get<std::size_t>();
    else if (key == "n_p1") h.n_p1 = value.get<std::size_t>();
    else if (key == "n_p2") h.n_p2 = value.get<std::size_t>();
    else if (key == "n_neur") h.n_neur = value.get<std::size_t>();
    else if (key == "wheelbase") h.wheelbase = value.get<double>();
    else if (key == "sample_time") h.sample_time = value.get<double>();
    else if (key == "vx_min") h.vx_min = value.get<double>();
    else throw ConfigError("unknown hyperparameter '" + key + "'");
  }
  return h;
}

VehicleParams vehicle_from_json(const json& j) {
  VehicleParams p;
  auto tire = [](const json& t, TireParams base) {
    base.B = t.value("B", base.B);
    base.C = t.value("C", base.C);
    base.mu = t.value("mu", base.mu);
    return base;
  };
  for (const auto& [key, value] : j.items()) {
    if (key == "mass") p.mass = value.get<double>();
    else if (key == "wheelbase") p.wheelbase = value.get<double>();
    else if (key == "a") p.a = value.get<double>();
    else if (key == "yaw_inertia") p.yaw_inertia = value.get<double>();
    else if (key == "cog_height") p.cog_height = value.get<double>();
    else if (key == "front") p.front = tire(value, p.front);
    else if (key == "rear") p.rear = tire(value, p.rear);
    else if (key == "k_aero") p.k_aero = value.get<double>();
    else if (key == "aero_front_share") p.aero_front_share = value.get<double>();
    else if (key == "g") p.g = value.get<double>();
    else if (key == "vx_min") p.vx_min = value.get<double>();
    else throw ConfigError("unknown vehicle field '" + key + "'");
  }
  p.validate();
  return p;
}

json to_json(const VehicleParams& p) {
  auto tire = [](const TireParams& t) { return json{{"B", t.B}, {"C", t.C}, {"mu", t.mu}}; };
  return {{"mass", p.mass},           {"wheelbase", p.wheelbase},
          {"a", p.a},                 {"yaw_inertia", p.yaw_inertia},
          {"cog_height", p.cog_height}, {"front", tire(p.front)},
          {"rear", tire(p.rear)},     {"k_aero", p.k_aero},
          {"aero_front_share", p.aero_front_share}, {"g", p.g},
          {"vx_min", p.vx_min}};
}

// Training options shared by train, gridsearch, seedsweep and compare.
struct TrainFlags {
  std::string config;
  std::optional<int> epochs;
  std::optional<int> patience;
  std::optional<double> lr;
  std::optional<std::size_t> batch;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON file with \"train\" and \"hyper\" sections")
        ->check(CLI::ExistingFile);
    app->add_option("--epochs", epochs, "maximum epochs");
    app->add_option("--patience", patience, "early-stopping patience in epochs");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--batch", batch, "mini-batch size");
  }

  // File values first, flags override.
  std::pair<TrainConfig, Hyper> resolve(const Common& c, Manifest& m) const {
    TrainConfig tc;
    Hyper h;
    h.sample_time = c.sample_time;
    if (!config.empty()) {
      const json j = read_json(config);
      for (const auto& [key, _] : j.items()) {
        if (key != "train" && key != "hyper") throw ConfigError("unknown config section '" + key + "'");
      }
      if (j.contains("train")) tc = train_config_from_json(j["train"], tc);
      if (j.contains("hyper")) h = hyper_from_json(j["hyper"], h);
      m.input(config);
    }
    tc.seed = c.seed;
    if (epochs) tc.max_epochs = *epochs;
    if (patience) tc.patience = *patience;
    if (epochs && !patience) tc.patience = std::min(tc.patience, tc.max_epochs);
    if (lr) tc.learning_rate = *lr;
    if (batch) tc.batch_size = *batch;
    tc.validate();
    m.config()["train"] = to_json(tc);
    m.config()["hyper"] = to_json(h);
    return {tc, h};
  }
};

Telemetry load_data(const std::string& data, const Hyper& h, Manifest& m) {
  const auto path = telemetry_path(data);
  m.input(path);
  return load_csv(path, h.vx_min);
}

// ---- commands --------------------------------------------------------------

struct SimulateArgs {
  std::string vehicle;
};

void cmd_simulate(const Common& c, const SimulateArgs& a, Manifest& m) {
  VehicleParams vehicle;
  if (!a.vehicle.empty()) {
    vehicle = vehicle_from_json(read_json(a.vehicle));
    m.input(a.vehicle);
  }
  m.config()["vehicle"] = to_json(vehicle);
  const auto dir = output_dir(c, "simulate");
  const auto gen = generate_laps(vehicle, c.seed);
  save_csv(dir / "telemetry.csv", gen.records);
  m.output(dir / "telemetry.csv");
  {
    std::ofstream f(dir / "splits.json");
    f << splits_manifest_json() << '\n';
  }
  m.output(dir / "splits.json");
  m.extra()["records"] = gen.records.size();
  m.extra()["segments"] = segments(gen.records).size();
  m.extra()["notes"] = gen.notes;
  for (const auto& note : gen.notes) std::cerr << "note: " << note << '\n';
  std::cout << "wrote " << gen.records.size() << " records to " << (dir / "telemetry.csv") << '\n';
}

struct TrainArgs {
  std::string model = "msnn-steer";
  std::string data;
  std::string split = "large";
  TrainFlags flags;
};

void cmd_train(const Common& c, const TrainArgs& a, Manifest& m) {
  const auto [tc, h] = a.flags.resolve(c, m);
  const auto kind = model_kind_from_string(a.model);
  const auto records = load_data(a.data, h, m);
  const auto data = Datasets::from(records, DatasetSplit::named(a.split).name);
  const auto spec = make_spec(kind, h, data.train);
  const auto train_set = make_windows(data.train, spec.q(), h.sample_time);
  const auto valid_set = make_windows(data.valid, spec.q(), h.sample_time);
  m.config()["model"] = a.model;
  m.config()["split"] = a.split;
  m.extra()["param_count"] = spec.param_count();
  std::cout << a.model << ": " << spec.param_count() << " parameters, " << train_set.size()
            << " training samples\n";

  const auto result = train(spec, train_set, valid_set, tc);
  const auto dir = output_dir(c, "train");
  save_model(dir / "model.json", spec, result.best_params);
  write_json(dir / "train_result.json", to_json(result));
  write_curves_csv(dir / "curves.csv", result);
  for (const char* f : {"model.json", "train_result.json", "curves.csv"}) m.output(dir / f);
  m.extra()["best_epoch"] = result.best_epoch;
  m.extra()["best_valid_rmse_deg"] = result.best_valid_rmse() * kRadToDeg;
  std::cout << "best validation RMSE " << result.best_valid_rmse() * kRadToDeg << " deg at epoch "
            << result.best_epoch << '\n';
}

struct EvalArgs {
  std::string model_file;
  std::string data;
  std::string on = "validation";
};

void cmd_eval(const Common& c, const EvalArgs& a, Manifest& m) {
  const auto [spec, params] = load_model(a.model_file);
  m.input(a.model_file);
  Hyper h;
  h.sample_time = c.sample_time;
  if (spec.kind != ModelKind::Gnn) h.vx_min = spec.msnn.vx_min;
  const auto records = load_data(a.data, h, m);
  const auto subset = select_split(records, DatasetSplit::named(a.on));
  const auto samples = make_windows(subset, spec.q(), h.sample_time);
  const auto model = spec.make_model();
  const auto pred = predict_all(*model, params.values, samples);
  std::vector<double> target(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) target[i] = samples[i].target;
  const auto metrics = compute_metrics(pred, target);

  m.config()["model"] = to_string(spec.kind);
  m.config()["on"] = a.on;
  const auto dir = output_dir(c, "eval");
  json j;
  j["model"] = to_string(spec.kind);
  j["split"] = a.on;
  j["rmse_deg"] = metrics.rmse;
  j["fvu"] = metrics.fvu;
  j["n_samples"] = metrics.n_samples;
  write_json(dir / "metrics.json", j);
  m.output(dir / "metrics.json");
  m.extra() = j;
  std::cout << to_string(spec.kind) << " on " << a.on << ": RMSE " << metrics.rmse
            << " deg, FVU " << metrics.fvu << '\n';
}

struct GridArgs {
  std::string data;
  std::string split = "large";
  bool reduced = false;
  TrainFlags flags;
};

void cmd_gridsearch(const Common& c, GridArgs a, Manifest& m) {
  if (!a.flags.epochs) a.flags.epochs = 2000;
  const auto [tc, h] = a.flags.resolve(c, m);
  const auto records = load_data(a.data, h, m);
  const auto data = Datasets::from(records, DatasetSplit::named(a.split).name);
  const GridSpec grid = a.reduced ? GridSpec::reduced() : GridSpec{};
  m.config()["split"] = a.split;
  m.config()["grid"] = {{"q", grid.q}, {"n_y", grid.n_y}, {"n_x", grid.n_x}, {"n_v", grid.n_v}};
  std::cout << "grid search over " << grid.size() << " cells on " << c.jobs << " workers\n";
  const auto result = grid_search(grid, data, tc, h, c.jobs);
  const auto dir = output_dir(c, "gridsearch");
  write_grid_csv(dir / "grid.csv", result);
  write_json(dir / "grid.json", to_json(result));
  m.output(dir / "grid.csv");
  m.output(dir / "grid.json");
  m.extra()["failures"] = result.failures();
  if (result.best) {
    const auto& b = result.cells[*result.best];
    m.extra()["best"] = {{"q", b.q}, {"n_y", b.n_y}, {"n_x", b.n_x}, {"n_v", b.n_v}, {"aic", b.aic}};
    std::cout << "best cell q=" << b.q << " n_y=" << b.n_y << " n_x=" << b.n_x << " n_v=" << b.n_v
              << " AIC=" << b.aic << '\n';
  }
  if (!result.best) throw NumericError("every grid cell failed");
}

struct HdArgs {
  std::string data;
  double ax_limit = 1.0;
  double ay_min = 1.0;
  double wheelbase = 3.0;
  std::size_t degree = 3;
};

void cmd_hd(const Common& c, const HdArgs& a, Manifest& m) {
  Hyper h;
  const auto records = load_data(a.data, h, m);
  const auto points = handling_points(records, a.wheelbase, a.ax_limit, a.ay_min);
  m.config()["hd"] = {{"ax_limit", a.ax_limit},
                      {"ay_min", a.ay_min},
                      {"wheelbase", a.wheelbase},
                      {"degree", a.degree}};
  const auto dir = output_dir(c, "hd");
  auto write_points = [&](const fs::path& path, std::span<const HandlingPoint> pts) {
    std::ofstream f(path);
    f << "v_x,a_y,hd_ordinate\n" << std::setprecision(17);
    for (const auto& p : pts) f << p.v_x << ',' << p.a_y << ',' << p.hd_ordinate << '\n';
    m.output(path);
  };
  write_points(dir / "hd_points.csv", points);

  json fits = json::array();
  const auto bins = speed_tercile_bins(points);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const auto fit = fit_hd_polynomial(bins[b], a.degree);
    auto [lo, hi] = std::minmax_element(bins[b].begin(), bins[b].end(),
                                        [](const auto& x, const auto& y) { return x.v_x < y.v_x; });
    const json f{{"bin", b + 1},
                 {"v_x_min", lo->v_x},
                 {"v_x_max", hi->v_x},
                 {"coefficients", fit.coefficients},
                 {"rmse", fit.rmse},
                 {"points", fit.points}};
    const auto name = "hd_fit_bin" + std::to_string(b + 1);
    write_json(dir / (name + ".json"), f);
    write_points(dir / (name + "_points.csv"), bins[b]);
    m.output(dir / (name + ".json"));
    fits.push_back(f);
  }
  m.extra()["fits"] = fits;
  std::cout << points.size() << " handling points in " << bins.size() << " speed bins\n";
}

std::vector<double> parse_doubles(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

struct SeedSweepArgs {
  std::string data;
  std::string split = "large";
  std::size_t seeds = 10;
  std::vector<std::string> models{"msnn-steer", "gnn"};
  std::string lrs;
  TrainFlags flags;
};

double variance(const std::vector<double>& x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size() - 1);
}

void cmd_seedsweep(const Common& c, SeedSweepArgs a, Manifest& m) {
  if (!a.flags.epochs) a.flags.epochs = 2000;
  const auto [tc, h] = a.flags.resolve(c, m);
  const auto records = load_data(a.data, h, m);
  const auto data = Datasets::from(records, DatasetSplit::named(a.split).name);
  const std::vector<double> rates = a.lrs.empty() ? std::vector<double>{tc.learning_rate}
                                                  : parse_doubles(a.lrs);
  std::vector<std::uint64_t> seeds(a.seeds);
  std::iota(seeds.begin(), seeds.end(), c.seed);
  m.config()["split"] = a.split;
  m.config()["models"] = a.models;
  m.config()["learning_rates"] = rates;
  m.config()["seeds"] = seeds;

  const auto dir = output_dir(c, "seedsweep");
  json summary = json::array();
  for (const auto& name : a.models) {
    const auto spec = make_spec(model_kind_from_string(name), h, data.train);
    const auto train_set = make_windows(data.train, spec.q(), h.sample_time);
    const auto valid_set = make_windows(data.valid, spec.q(), h.sample_time);
    const auto path = dir / ("seedsweep_" + name + ".csv");
    std::ofstream f(path);
    f << "seed,learning_rate,valid_rmse_deg\n" << std::setprecision(17);
    for (double lr : rates) {
      TrainConfig run = tc;
      run.learning_rate = lr;
      const auto runs = seed_sweep(spec, train_set, valid_set, run, seeds, c.jobs);
      std::vector<double> rmse;
      for (const auto& r : runs) {
        f << r.seed << ',' << lr << ',' << r.valid_rmse * kRadToDeg << '\n';
        rmse.push_back(r.valid_rmse * kRadToDeg);
      }
      summary.push_back({{"model", name},
                         {"learning_rate", lr},
                         {"mean_rmse_deg", std::accumulate(rmse.begin(), rmse.end(), 0.0) /
                                               static_cast<double>(rmse.size())},
                         {"variance_rmse_deg2", variance(rmse)}});
      std::cout << name << " lr=" << lr << ": variance " << summary.back()["variance_rmse_deg2"]
                << " deg^2\n";
    }
    m.output(path);
  }
  write_json(dir / "seedsweep_summary.json", summary);
  m.output(dir / "seedsweep_summary.json");
  m.extra()["summary"] = summary;
}

struct CompareArgs {
  std::string data;
  std::string split = "large";
  TrainFlags flags;
};

void cmd_compare(const Common& c, CompareArgs a, Manifest& m) {
  if (!a.flags.epochs) a.flags.epochs = 2000;
  const auto [tc, h] = a.flags.resolve(c, m);
  const auto records = load_data(a.data, h, m);
  const auto data = Datasets::from(records, DatasetSplit::named(a.split).name);
  m.config()["split"] = a.split;
  const auto trained = fit_controllers(data, tc, h, c.jobs);
  const auto report = compare_controllers(trained, data);

  const auto dir = output_dir(c, "compare");
  write_comparison_csv(dir / "comparison.csv", report);
  write_error_stats_csv(dir / "error_stats.csv", report);
  write_trace_csv(dir / "trace.csv", report);
  write_json(dir / "comparison.json", to_json(report));
  for (const auto& [kind, model] : trained.models) {
    const auto name = to_string(kind);
    save_model(dir / ("model_" + name + ".json"), model.spec, model.params);
    write_curves_csv(dir / ("curves_" + name + ".csv"), model.training);
    m.output(dir / ("model_" + name + ".json"));
    m.output(dir / ("curves_" + name + ".csv"));
  }
  for (const char* f : {"comparison.csv", "error_stats.csv", "trace.csv", "comparison.json"}) {
    m.output(dir / f);
  }
  m.extra()["a2rl"] = {{"K_us", trained.a2rl.params.K_us},
                       {"T_us", trained.a2rl.params.T_us},
                       {"K_ax", trained.a2rl.params.K_ax},
                       {"T_ax", trained.a2rl.params.T_ax},
                       {"delta_off", trained.a2rl.params.delta_off}};
  std::cout << std::left << std::setw(14) << "controller" << std::setw(8) << "split"
            << std::setw(12) << "rmse_deg"
            << "fvu\n";
  for (const auto& row : report.rows) {
    std::cout << std::setw(14) << row.controller << std::setw(8) << row.split << std::setw(12)
              << row.metrics.rmse << row.metrics.fvu << '\n';
  }
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const LayoutError*>(&e)) return kExitUsage;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kExitData;
  if (dynamic_cast<const NumericError*>(&e) || dynamic_cast<const InstabilityError*>(&e)) {
    return kExitNumeric;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured neural steering controllers: simulation, training and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;
  common.jobs = default_jobs();
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "output directory (default $MSNN_OUT_ROOT/<command>)");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--jobs", common.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--sample-time", common.sample_time, "sampling time T [s]")
        ->check(CLI::PositiveNumber);
  };

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate two laps of synthetic telemetry");
  add_common(simulate);
  simulate->add_option("--vehicle", sim.vehicle, "vehicle parameter JSON")->check(CLI::ExistingFile);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train one controller");
  add_common(train_cmd);
  train_cmd->add_option("--model", tr.model, "msnn-steer, msnn-base or gnn");
  train_cmd->add_option("--data", tr.data, "telemetry CSV or directory")->required();
  train_cmd->add_option("--split", tr.split, "small, medium or large");
  tr.flags.add(train_cmd);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "evaluate a saved model");
  add_common(eval);
  eval->add_option("--model-file", ev.model_file, "model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", ev.data, "telemetry CSV or directory")->required();
  eval->add_option("--on", ev.on, "split to evaluate on");

  GridArgs gr;
  auto* grid = app.add_subcommand("gridsearch", "AIC grid search over MS-NN-steer sizes");
  add_common(grid);
  grid->add_option("--data", gr.data, "telemetry CSV or directory")->required();
  grid->add_option("--split", gr.split, "small, medium or large");
  grid->add_flag("--reduced", gr.reduced, "16-cell grid");
  gr.flags.add(grid);

  HdArgs hd;
  auto* hd_cmd = app.add_subcommand("hd", "handling-diagram points and per-speed-bin fits");
  add_common(hd_cmd);
  hd_cmd->add_option("--data", hd.data, "telemetry CSV or directory")->required();
  hd_cmd->add_option("--ax-limit", hd.ax_limit, "quasi-steady |a_x| bound [m/s^2]");
  hd_cmd->add_option("--ay-min", hd.ay_min, "minimum |a_y| [m/s^2]");
  hd_cmd->add_option("--wheelbase", hd.wheelbase, "wheelbase [m]");
  hd_cmd->add_option("--degree", hd.degree, "polynomial degree");

  SeedSweepArgs ss;
  auto* sweep = app.add_subcommand("seedsweep", "validation RMSE spread over seeds");
  add_common(sweep);
  sweep->add_option("--data", ss.data, "telemetry CSV or directory")->required();
  sweep->add_option("--split", ss.split, "small, medium or large");
  sweep->add_option("--seeds", ss.seeds, "number of seeds")->check(CLI::Range(2, 1000));
  sweep->add_option("--models", ss.models, "models to sweep");
  sweep->add_option("--lrs", ss.lrs, "comma-separated learning rates");
  ss.flags.add(sweep);

  CompareArgs cp;
  auto* compare = app.add_subcommand("compare", "train all controllers and compare them");
  add_common(compare);
  compare->add_option("--data", cp.data, "telemetry CSV or directory")->required();
  compare->add_option("--split", cp.split, "small, medium or large");
  cp.flags.add(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  const std::vector<std::string> args(argv, argv + argc);
  CLI::App* sub = app.get_subcommands().front();
  Manifest manifest(sub->get_name());
  try {
    if (sub == simulate) cmd_simulate(common, sim, manifest);
    else if (sub == train_cmd) cmd_train(common, tr, manifest);
    else if (sub == eval) cmd_eval(common, ev, manifest);
    else if (sub == grid) cmd_gridsearch(common, gr, manifest);
    else if (sub == hd_cmd) cmd_hd(common, hd, manifest);
    else if (sub == sweep) cmd_seedsweep(common, ss, manifest);
    else if (sub == compare) cmd_compare(common, cp, manifest);
    manifest.config()["jobs"] = common.jobs;
    manifest.config()["sample_time"] = common.sample_time;
    manifest.write(output_dir(common, sub->get_name()), args, common.seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 0;
}
