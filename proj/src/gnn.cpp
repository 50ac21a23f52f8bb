#include "msnn/gnn.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "msnn/error.hpp"

namespace msnn {

void GnnConfig::validate() const {
  if (q < 1) throw ConfigError("q must be >= 1");
  if (n_neur < 1) throw ConfigError("n_neur must be >= 1");
}

std::size_t param_count(const GnnConfig& c) { return (c.inputs() + 1) * c.n_neur + (c.n_neur + 1); }

ParamLayout gnn_layout(const GnnConfig& c) {
  ParamLayout layout;
  layout.add("w1", c.n_neur * c.inputs());
  layout.add("b1", c.n_neur);
  layout.add("w2", c.n_neur);
  layout.add("b2", 1);
  return layout;
}

ParamVector init_params(const GnnConfig& config, std::uint64_t seed, double std) {
  config.validate();
  if (!(std >= 0.0)) throw ConfigError("init std must be >= 0");
  ParamVector p;
  p.layout = gnn_layout(config);
  p.values.assign(p.layout.total(), 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (double& w : p.view("w1")) w = std * noise(rng);
  for (double& w : p.view("w2")) w = std * noise(rng);
  return p;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

GnnModel::GnnModel(GnnConfig config) : config_(config) { config_.validate(); }

void GnnModel::check(const WindowInput& input, std::span<const double> params) const {
  if (params.size() != param_count()) {
    throw LayoutError("parameter vector has " + std::to_string(params.size()) +
                      " entries, G-NN layout expects " + std::to_string(param_count()));
  }
  if (!input.consistent() || input.length() != config_.q + 1) {
    throw ConfigError("window length must be q+1 = " + std::to_string(config_.q + 1));
  }
}

namespace {

// Concatenated input value at flat position k.
inline double input_at(const WindowInput& in, std::size_t w, std::size_t k) {
  if (k < w) return in.ay[k];
  if (k < 2 * w) return in.ax[k - w];
  return in.vx[k - 2 * w];
}

}  // namespace

double GnnModel::predict(const WindowInput& input, std::span<const double> p) const {
  check(input, p);
  const std::size_t n_in = config_.inputs(), w = config_.q + 1, h = config_.n_neur;
  const double* w1 = p.data();
  const double* b1 = w1 + h * n_in;
  const double* w2 = b1 + h;
  double out = w2[h];  // b2
  for (std::size_t u = 0; u < h; ++u) {
    double a = b1[u];
    for (std::size_t k = 0; k < n_in; ++k) a += w1[u * n_in + k] * input_at(input, w, k);
    out += w2[u] * elu(a);
  }
  return out;
}

double GnnModel::predict_and_accumulate(const WindowInput& input, std::span<const double> p,
                                        const std::function<double(double)>& seed,
                                        std::span<double> grad) const {
  check(input, p);
  if (grad.size() != p.size()) throw LayoutError("gradient buffer does not match G-NN layout");
  const std::size_t n_in = config_.inputs(), w = config_.q + 1, h = config_.n_neur;
  const std::size_t o_b1 = h * n_in, o_w2 = o_b1 + h, o_b2 = o_w2 + h;

  std::vector<double> x(n_in), pre(h);
  for (std::size_t k = 0; k < n_in; ++k) x[k] = input_at(input, w, k);
  double out = p[o_b2];
  for (std::size_t u = 0; u < h; ++u) {
    double a = p[o_b1 + u];
    for (std::size_t k = 0; k < n_in; ++k) a += p[u * n_in + k] * x[k];
    pre[u] = a;
    out += p[o_w2 + u] * elu(a);
  }

  const double sigma = seed(out);
  if (sigma == 0.0 || !std::isfinite(out)) return out;
  grad[o_b2] += sigma;
  for (std::size_t u = 0; u < h; ++u) {
    grad[o_w2 + u] += sigma * elu(pre[u]);
    const double dh = sigma * p[o_w2 + u] * (pre[u] > 0.0 ? 1.0 : std::exp(pre[u]));
    grad[o_b1 + u] += dh;
    for (std::size_t k = 0; k < n_in; ++k) grad[u * n_in + k] += dh * x[k];
  }
  return out;
}

}  // namespace msnn
