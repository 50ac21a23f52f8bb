#pragma once

#include <cstddef>
#include <cstdint>

#include "msnn/grad.hpp"

namespace msnn {

/// Two-layer dense network on the concatenated windows [a_y | a_x | v_x]:
/// delta = W2 . ELU(W1 x + b1) + b2, with ELU alpha = 1.
struct GnnConfig {
  std::size_t q = 9;
  std::size_t n_neur = 5;

  std::size_t inputs() const { return 3 * (q + 1); }
  void validate() const;
};

std::size_t param_count(const GnnConfig& config);
ParamLayout gnn_layout(const GnnConfig& config);

/// Weights ~ N(0, std^2), biases 0.
ParamVector init_params(const GnnConfig& config, std::uint64_t seed, double std);

double elu(double x);

class GnnModel final : public DifferentiableModel {
 public:
  explicit GnnModel(GnnConfig config);

  const GnnConfig& config() const { return config_; }
  std::size_t param_count() const override { return msnn::param_count(config_); }
  ParamLayout layout() const override { return gnn_layout(config_); }

  double predict(const WindowInput& input, std::span<const double> params) const override;
  double predict_and_accumulate(const WindowInput& input, std::span<const double> params,
                                const std::function<double(double)>& seed,
                                std::span<double> grad) const override;

 private:
  void check(const WindowInput& input, std::span<const double> params) const;
  GnnConfig config_;
};

}  // namespace msnn
