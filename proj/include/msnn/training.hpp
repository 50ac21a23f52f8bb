#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <vector>

#include "msnn/model_spec.hpp"

namespace msnn {

struct TrainConfig {
  double learning_rate = 1e-3;
  int max_epochs = 8000;
  std::size_t batch_size = 1000;
  int patience = 1500;  // epochs without validation improvement
  std::uint64_t seed = 0;
  double init_std = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& tc);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct TrainResult {
  ParamVector best_params;
  std::vector<double> train_rmse;  // per epoch [rad]
  std::vector<double> valid_rmse;  // per epoch [rad]
  int epochs_run = 0;
  bool stopped_early = false;
  int best_epoch = 0;  // 1-based; 0 when no epoch ran
  double best_valid_rmse() const;
};

nlohmann::json to_json(const TrainResult& r);
void write_curves_csv(const std::filesystem::path& path, const TrainResult& r);

/// Adam on the mini-batch MSE starting from `init`.
TrainResult train(const DifferentiableModel& model, ParamVector init,
                  std::span<const WindowedSample> train_set,
                  std::span<const WindowedSample> valid_set, const TrainConfig& tc);

/// Initializes from the spec with tc.seed and tc.init_std, then trains.
TrainResult train(const ModelSpec& spec, std::span<const WindowedSample> train_set,
                  std::span<const WindowedSample> valid_set, const TrainConfig& tc);

struct SeedRun {
  std::uint64_t seed = 0;
  double valid_rmse = 0.0;  // best validation RMSE [rad]
};

/// Independent runs differing only in the seed, executed on `jobs` workers.
std::vector<SeedRun> seed_sweep(const ModelSpec& spec, std::span<const WindowedSample> train_set,
                                std::span<const WindowedSample> valid_set, const TrainConfig& base,
                                std::span<const std::uint64_t> seeds, std::size_t jobs = 0);

}  // namespace msnn
