#include "msnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "msnn/error.hpp"
#include "msnn/jobs.hpp"

namespace msnn {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (max_epochs < 0) throw ConfigError("max_epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience < 0 || patience > max_epochs) {
    throw ConfigError("patience must lie in [0, max_epochs] (got " + std::to_string(patience) +
                      " with max_epochs " + std::to_string(max_epochs) + ")");
  }
  if (!(init_std >= 0.0)) throw ConfigError("init_std must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
}

json to_json(const TrainConfig& tc) {
  return json{{"learning_rate", tc.learning_rate}, {"max_epochs", tc.max_epochs},
              {"batch_size", tc.batch_size},       {"patience", tc.patience},
              {"seed", tc.seed},                   {"init_std", tc.init_std},
              {"beta1", tc.beta1},                 {"beta2", tc.beta2},
              {"epsilon", tc.epsilon}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig tc) {
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "learning_rate") tc.learning_rate = value.get<double>();
      else if (key == "max_epochs") tc.max_epochs = value.get<int>();
      else if (key == "batch_size") tc.batch_size = value.get<std::size_t>();
      else if (key == "patience") tc.patience = value.get<int>();
      else if (key == "seed") tc.seed = value.get<std::uint64_t>();
      else if (key == "init_std") tc.init_std = value.get<double>();
      else if (key == "beta1") tc.beta1 = value.get<double>();
      else if (key == "beta2") tc.beta2 = value.get<double>();
      else if (key == "epsilon") tc.epsilon = value.get<double>();
      else throw ConfigError("unknown training config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid training config: ") + e.what());
  }
  tc.validate();
  return tc;
}

double TrainResult::best_valid_rmse() const {
  if (valid_rmse.empty()) throw ConfigError("no epoch was run");
  return *std::min_element(valid_rmse.begin(), valid_rmse.end());
}

json to_json(const TrainResult& r) {
  json j{{"epochs_run", r.epochs_run},
         {"stopped_early", r.stopped_early},
         {"best_epoch", r.best_epoch},
         {"train_rmse", r.train_rmse},
         {"valid_rmse", r.valid_rmse},
         {"best_params", r.best_params.values}};
  if (!r.valid_rmse.empty()) j["best_valid_rmse"] = r.best_valid_rmse();
  return j;
}

void write_curves_csv(const std::filesystem::path& path, const TrainResult& r) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "epoch,train_rmse,valid_rmse\n";
  for (std::size_t e = 0; e < r.valid_rmse.size(); ++e) {
    out << e + 1 << ',' << r.train_rmse[e] << ',' << r.valid_rmse[e] << '\n';
  }
}

namespace {

double rmse_of(const DifferentiableModel& model, std::span<const double> params,
               std::span<const WindowedSample> set) {
  const auto pred = predict_all(model, params, set);
  double sq = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double r = pred[i] - set[i].target;
    sq += r * r;
  }
  return std::sqrt(sq / static_cast<double>(set.size()));
}

}  // namespace

TrainResult train(const DifferentiableModel& model, ParamVector init,
                  std::span<const WindowedSample> train_set,
                  std::span<const WindowedSample> valid_set, const TrainConfig& tc) {
  tc.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (valid_set.empty()) throw ConfigError("validation set is empty");
  init.layout.validate();
  if (!(init.layout == model.layout()) || init.size() != model.param_count()) {
    throw LayoutError("initial parameters do not match the model layout");
  }

  TrainResult result;
  result.best_params = init;
  std::vector<double>& w = init.values;
  const std::size_t p = w.size();
  std::vector<double> m(p, 0.0), v(p, 0.0);
  double beta1_t = 1.0, beta2_t = 1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(tc.seed ^ 0x9e3779b97f4a7c15ULL);

  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double sq_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + tc.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      GradResult g;
      try {
        g = eval_loss_and_grad(model, w, train_set, idx);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
      if (!std::isfinite(g.loss)) {
        throw NumericError("NaN loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      sq_sum += g.loss * static_cast<double>(idx.size());
      beta1_t *= tc.beta1;
      beta2_t *= tc.beta2;
      const double c1 = 1.0 / (1.0 - beta1_t);
      const double c2 = 1.0 / (1.0 - beta2_t);
      for (std::size_t k = 0; k < p; ++k) {
        const double gk = g.gradient[k];
        m[k] = tc.beta1 * m[k] + (1.0 - tc.beta1) * gk;
        v[k] = tc.beta2 * v[k] + (1.0 - tc.beta2) * gk * gk;
        w[k] -= tc.learning_rate * (m[k] * c1) / (std::sqrt(v[k] * c2) + tc.epsilon);
      }
    }
    const double train_rmse = std::sqrt(sq_sum / static_cast<double>(order.size()));
    double valid_rmse = 0.0;
    try {
      valid_rmse = rmse_of(model, w, valid_set);
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) + ", validation: " + e.what());
    }
    result.train_rmse.push_back(train_rmse);
    result.valid_rmse.push_back(valid_rmse);
    result.epochs_run = epoch;
    if (valid_rmse < best) {
      best = valid_rmse;
      result.best_epoch = epoch;
      result.best_params.values = w;
      since_best = 0;
    } else if (++since_best >= tc.patience && epoch < tc.max_epochs) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

TrainResult train(const ModelSpec& spec, std::span<const WindowedSample> train_set,
                  std::span<const WindowedSample> valid_set, const TrainConfig& tc) {
  tc.validate();
  const auto model = spec.make_model();
  return train(*model, spec.init(tc.seed, tc.init_std), train_set, valid_set, tc);
}

std::vector<SeedRun> seed_sweep(const ModelSpec& spec, std::span<const WindowedSample> train_set,
                                std::span<const WindowedSample> valid_set, const TrainConfig& base,
                                std::span<const std::uint64_t> seeds, std::size_t jobs) {
  if (seeds.size() < 2) throw ConfigError("seed_sweep needs at least two seeds");
  base.validate();
  std::vector<SeedRun> runs(seeds.size());
  const auto errors = run_jobs(seeds.size(), jobs, [&](std::size_t i) {
    TrainConfig tc = base;
    tc.seed = seeds[i];
    runs[i] = SeedRun{seeds[i], train(spec, train_set, valid_set, tc).best_valid_rmse()};
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    const std::string tag = "seed " + std::to_string(seeds[i]) + ": ";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const NumericError& e) {
      throw NumericError(tag + e.what());
    } catch (const DataError& e) {
      throw DataError(tag + e.what());
    } catch (const Error& e) {
      throw ConfigError(tag + e.what());
    }
  }
  return runs;
}

}  // namespace msnn
