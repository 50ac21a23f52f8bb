#include "msnn/msnn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "msnn/error.hpp"

namespace msnn {

std::string to_string(Variant v) { return v == Variant::Base ? "base" : "steer"; }

Variant variant_from_string(const std::string& s) {
  if (s == "base" || s == "msnn-base") return Variant::Base;
  if (s == "steer" || s == "msnn-steer") return Variant::Steer;
  throw ConfigError("unknown MS-NN variant '" + s + "' (expected base or steer)");
}

void MsNnConfig::validate() const {
  if (q < 1) throw ConfigError("q must be >= 1");
  if (n_y < 2 || n_x < 2 || n_v < 2) throw ConfigError("n_y, n_x, n_v must be >= 2");
  if (!(wheelbase > 0.0)) throw ConfigError("wheelbase must be positive");
  if (!(sample_time > 0.0)) throw ConfigError("sample time must be positive");
  if (!(vx_min > 0.0)) throw ConfigError("vx_min must be positive");
  if (!(speed_scale > 0.0)) throw ConfigError("speed_scale must be positive");
  if (!std::isfinite(speed_offset)) throw ConfigError("speed_offset must be finite");
  if (grid.ay.size() != n_y || grid.ax.size() != n_x || grid.vx.size() != n_v) {
    throw ConfigError("membership grid sizes do not match n_y/n_x/n_v");
  }
  if (grid.ay.center(0) < 0.0) throw ConfigError("a_y centers live on |a_y| and must be >= 0");
}

ParamLayout msnn_layout(const MsNnConfig& c) {
  ParamLayout layout;
  if (c.variant == Variant::Base) {
    layout.add("ky", 6 * c.n_y);
  } else {
    layout.add("c1", (c.n_p1 + 1) * c.n_y);
    layout.add("c2", (c.n_p2 + 1) * c.n_y);
    layout.add("ky", 4 * c.n_y);
  }
  layout.add("kx", 5 * c.n_x);
  layout.add("mixer", c.window() * c.n_x * c.n_v);
  return layout;
}

std::size_t param_count(const MsNnConfig& c) {
  const std::size_t per_y = c.variant == Variant::Base ? 6 : (c.n_p1 + 1) + (c.n_p2 + 1) + 4;
  return per_y * c.n_y + 5 * c.n_x + c.window() * c.n_x * c.n_v;
}

namespace {

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Intermediate terms of one local model shared by the value and its partials.
struct LocalTerms {
  double s, e, dx, A, P, Q, R, value;
};

LocalTerms local_terms(double ay, double vx, double ax, const LocalGains& g, double ay0,
                       double ax0, double wheelbase) {
  LocalTerms t{};
  t.s = sign(ay);
  t.e = ay - ay0 * t.s;
  t.dx = ax - ax0;
  t.A = g.ky[2] * g.kx[0];
  t.P = ay - (ay0 + g.ky[3]) * t.s;
  t.Q = g.kx[1] + ax + ax0;
  t.R = 1.0 + g.ky[4] * t.e + g.kx[2] * t.dx + g.kx[3] * t.dx * t.dx +
        g.ky[5] * g.kx[4] * t.e * t.dx;
  t.value = ay / (vx * vx) * wheelbase + g.ky[0] * t.s + g.ky[1] * t.e + t.A * t.P * t.Q * t.R;
  return t;
}

}  // namespace

double local_model(double ay, double vx, double ax, const LocalGains& gains, double ay_center,
                   double ax_center, double wheelbase) {
  return local_terms(ay, vx, ax, gains, ay_center, ax_center, wheelbase).value;
}

ParamVector init_params(const MsNnConfig& config, std::uint64_t seed, double std,
                        MixerInit mixer) {
  config.validate();
  if (!(std >= 0.0)) throw ConfigError("init std must be >= 0");
  ParamVector p;
  p.layout = msnn_layout(config);
  p.values.assign(p.layout.total(), 0.0);

  auto kx = p.view("kx");
  for (std::size_t l = 0; l < config.n_x; ++l) {
    kx[5 * l + 0] = 1.0;
    kx[5 * l + 4] = 1.0;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double offset = mixer == MixerInit::Averaging ? 1.0 / static_cast<double>(config.window()) : 0.0;
  for (double& f : p.view("mixer")) f = offset + std * noise(rng);
  return p;
}

MsNnModel::MsNnModel(MsNnConfig config) : config_(std::move(config)) {
  config_.validate();
  count_ = msnn::param_count(config_);
  const auto layout = msnn_layout(config_);
  if (layout.total() != count_) throw LayoutError("layout does not match parameter count");
  if (config_.variant == Variant::Steer) {
    off_.c1 = layout.segment("c1").offset;
    off_.c2 = layout.segment("c2").offset;
  }
  off_.ky = layout.segment("ky").offset;
  off_.kx = layout.segment("kx").offset;
  off_.mixer = layout.segment("mixer").offset;
}

LocalGains MsNnModel::gains(std::span<const double> p, std::size_t i, std::size_t l,
                            double vx) const {
  LocalGains g;
  if (config_.variant == Variant::Base) {
    for (int k = 0; k < 6; ++k) g.ky[k] = p[off_.ky + 6 * i + static_cast<std::size_t>(k)];
  } else {
    const double u = (vx - config_.speed_offset) / config_.speed_scale;
    // Horner on both speed polynomials.
    const std::size_t d1 = config_.n_p1 + 1;
    const std::size_t d2 = config_.n_p2 + 1;
    double k1 = 0.0;
    for (std::size_t s = d1; s-- > 0;) k1 = k1 * u + p[off_.c1 + d1 * i + s];
    double k2 = 0.0;
    for (std::size_t w = d2; w-- > 0;) k2 = k2 * u + p[off_.c2 + d2 * i + w];
    g.ky[0] = k1;
    g.ky[1] = k2;
    for (int k = 0; k < 4; ++k) g.ky[k + 2] = p[off_.ky + 4 * i + static_cast<std::size_t>(k)];
  }
  for (int k = 0; k < 5; ++k) g.kx[k] = p[off_.kx + 5 * l + static_cast<std::size_t>(k)];
  return g;
}

double MsNnModel::g_il(double ay, double vx, double ax, std::size_t i, std::size_t l,
                       std::span<const double> params) const {
  if (params.size() != count_) throw LayoutError("parameter vector does not match MS-NN layout");
  if (i >= config_.n_y || l >= config_.n_x) throw ConfigError("local model index out of range");
  if (!(vx >= config_.vx_min)) {
    throw DomainError("v_x = " + std::to_string(vx) + " m/s is below vx_min");
  }
  return local_model(ay, vx, ax, gains(params, i, l, vx), config_.grid.ay.center(i),
                     config_.grid.ax.center(l), config_.wheelbase);
}

void MsNnModel::check_input(const WindowInput& input, std::span<const double> params) const {
  if (params.size() != count_) {
    throw LayoutError("parameter vector has " + std::to_string(params.size()) +
                      " entries, MS-NN layout expects " + std::to_string(count_));
  }
  if (!input.consistent() || input.length() != config_.window()) {
    throw ConfigError("window length must be q+1 = " + std::to_string(config_.window()));
  }
  for (std::size_t t = 0; t < input.length(); ++t) {
    if (!(input.vx[t] >= config_.vx_min)) {
      throw DomainError("v_x = " + std::to_string(input.vx[t]) + " m/s below vx_min at window index " +
                        std::to_string(t));
    }
  }
}

std::vector<double> MsNnModel::G_eval(const WindowInput& input, std::span<const double> params) const {
  check_input(input, params);
  std::vector<double> out(input.length(), 0.0);
  for (std::size_t t = 0; t < input.length(); ++t) {
    const double ay = input.ay[t], ax = input.ax[t], vx = input.vx[t];
    const auto act_y = config_.grid.ay.activate(std::abs(ay));
    const auto act_x = config_.grid.ax.activate(ax);
    double sum = 0.0;
    act_y.for_each([&](std::size_t i, double wi) {
      act_x.for_each([&](std::size_t l, double wl) {
        sum += wi * wl *
               local_model(ay, vx, ax, gains(params, i, l, vx), config_.grid.ay.center(i),
                           config_.grid.ax.center(l), config_.wheelbase);
      });
    });
    out[t] = sum;
  }
  return out;
}

double MsNnModel::predict(const WindowInput& input, std::span<const double> params) const {
  const auto G = G_eval(input, params);
  double delta = 0.0;
  for (std::size_t t = 0; t < G.size(); ++t) {
    const auto act_x = config_.grid.ax.activate(input.ax[t]);
    const auto act_v = config_.grid.vx.activate(input.vx[t]);
    double w = 0.0;
    act_v.for_each([&](std::size_t j, double wj) {
      act_x.for_each([&](std::size_t l, double wl) { w += wj * wl * params[mixer_index(j, l, t)]; });
    });
    delta += G[t] * w;
  }
  return delta;
}

double MsNnModel::predict_and_accumulate(const WindowInput& input, std::span<const double> params,
                                         const std::function<double(double)>& seed,
                                         std::span<double> grad) const {
  if (grad.size() != count_) throw LayoutError("gradient buffer does not match MS-NN layout");
  const auto G = G_eval(input, params);
  const std::size_t n = G.size();
  std::vector<double> w(n, 0.0);
  double delta = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const auto act_x = config_.grid.ax.activate(input.ax[t]);
    const auto act_v = config_.grid.vx.activate(input.vx[t]);
    act_v.for_each([&](std::size_t j, double wj) {
      act_x.for_each([&](std::size_t l, double wl) { w[t] += wj * wl * params[mixer_index(j, l, t)]; });
    });
    delta += G[t] * w[t];
  }

  const double sigma = seed(delta);
  if (sigma == 0.0 || !std::isfinite(delta)) return delta;

  const bool steer = config_.variant == Variant::Steer;
  const std::size_t d1 = config_.n_p1 + 1;
  const std::size_t d2 = config_.n_p2 + 1;
  const std::size_t ky_stride = steer ? 4 : 6;
  const std::size_t ky_base = steer ? 2 : 0;  // index of k_y3 within the stored row, minus 2

  for (std::size_t t = 0; t < n; ++t) {
    const double ay = input.ay[t], ax = input.ax[t], vx = input.vx[t];
    const auto act_y = config_.grid.ay.activate(std::abs(ay));
    const auto act_x = config_.grid.ax.activate(ax);
    const auto act_v = config_.grid.vx.activate(vx);

    // Mixer weights: d(delta)/dF_{jl,t} = G_t * phi_j * phi_l.
    act_v.for_each([&](std::size_t j, double wj) {
      act_x.for_each([&](std::size_t l, double wl) {
        grad[mixer_index(j, l, t)] += sigma * G[t] * wj * wl;
      });
    });

    const double u = (vx - config_.speed_offset) / config_.speed_scale;
    act_y.for_each([&](std::size_t i, double wi) {
      act_x.for_each([&](std::size_t l, double wl) {
        const double omega = sigma * w[t] * wi * wl;
        const LocalGains g = gains(params, i, l, vx);
        const auto lt = local_terms(ay, vx, ax, g, config_.grid.ay.center(i),
                                    config_.grid.ax.center(l), config_.wheelbase);
        const double PQ = lt.P * lt.Q;
        const double APQ = lt.A * PQ;
        const double pair6 = lt.e * lt.dx;

        if (steer) {
          double pw = 1.0;
          for (std::size_t s = 0; s < d1; ++s, pw *= u) grad[off_.c1 + d1 * i + s] += omega * lt.s * pw;
          pw = 1.0;
          for (std::size_t s = 0; s < d2; ++s, pw *= u) grad[off_.c2 + d2 * i + s] += omega * lt.e * pw;
        } else {
          grad[off_.ky + 6 * i + 0] += omega * lt.s;
          grad[off_.ky + 6 * i + 1] += omega * lt.e;
        }
        const std::size_t row = off_.ky + ky_stride * i - ky_base;  // row + k addresses k_y(k+1)
        grad[row + 2] += omega * g.kx[0] * PQ * lt.R;
        grad[row + 3] += omega * lt.A * (-lt.s) * lt.Q * lt.R;
        grad[row + 4] += omega * APQ * lt.e;
        grad[row + 5] += omega * APQ * g.kx[4] * pair6;

        const std::size_t col = off_.kx + 5 * l;
        grad[col + 0] += omega * g.ky[2] * PQ * lt.R;
        grad[col + 1] += omega * lt.A * lt.P * lt.R;
        grad[col + 2] += omega * APQ * lt.dx;
        grad[col + 3] += omega * APQ * lt.dx * lt.dx;
        grad[col + 4] += omega * APQ * g.ky[5] * pair6;
      });
    });
  }
  return delta;
}

}  // namespace msnn
