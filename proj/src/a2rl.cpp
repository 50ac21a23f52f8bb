#include "msnn/a2rl.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "msnn/error.hpp"

namespace msnn {

void A2rlParams::validate() const {
  if (!(dt > 0.0)) throw ConfigError("A2RL dt must be positive");
  if (!(T_us > 0.0) || !(T_ax > 0.0)) throw ConfigError("A2RL time constants must be positive");
  if (dt > T_us || dt > T_ax) throw ConfigError("A2RL filters need dt <= T_us and dt <= T_ax");
  if (!(wheelbase > 0.0)) throw ConfigError("A2RL wheelbase must be positive");
}

std::pair<double, A2rlState> a2rl_step(double ay, double ax, double vx, const A2rlParams& p,
                                       const A2rlState& state) {
  if (!(vx >= p.vx_min)) {
    throw DomainError("v_x = " + std::to_string(vx) + " m/s is below vx_min");
  }
  A2rlState next;
  const double kin = ay * p.wheelbase / (vx * vx);
  next.delta_us_prev = state.delta_us_prev + (p.K_us * ay - state.delta_us_prev) * p.dt / p.T_us;
  next.ax_filter_prev = state.ax_filter_prev + (p.K_ax * ax - state.ax_filter_prev) * p.dt / p.T_ax;
  const double delta_ax = next.ax_filter_prev * ay;
  return {kin + next.delta_us_prev + delta_ax + p.delta_off, next};
}

std::vector<double> a2rl_run(const A2rlParams& params, std::span<const double> ay,
                             std::span<const double> ax, std::span<const double> vx,
                             std::span<const bool> segment_start) {
  params.validate();
  const std::size_t n = ay.size();
  if (ax.size() != n || vx.size() != n || segment_start.size() != n) {
    throw ConfigError("a2rl_run: signal lengths differ");
  }
  std::vector<double> out(n);
  A2rlState state;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || segment_start[k]) state = A2rlState{};
    auto [delta, next] = a2rl_step(ay[k], ax[k], vx[k], params, state);
    out[k] = delta;
    state = next;
  }
  return out;
}

namespace {

// Optimizer coordinates are scaled so unit steps are physically comparable.
constexpr double kKusScale = 1e-3;
constexpr double kKaxScale = 1e-4;
constexpr double kOffScale = 1e-3;

A2rlParams decode(const A2rlParams& base, const double* x) {
  A2rlParams p = base;
  p.K_us = kKusScale * x[0];
  p.T_us = base.dt * (1.0 + std::exp(x[1]));
  p.K_ax = kKaxScale * x[2];
  p.T_ax = base.dt * (1.0 + std::exp(x[3]));
  p.delta_off = kOffScale * x[4];
  return p;
}

struct FitProblem {
  A2rlParams base;
  std::span<const double> ay, ax, vx;
  std::span<const bool> starts;
  std::span<const double> target;
  std::span<const std::size_t> scored;
  std::size_t evaluations = 0;

  double rmse(const A2rlParams& p) {
    ++evaluations;
    const auto pred = a2rl_run(p, ay, ax, vx, starts);
    double sq = 0.0;
    for (auto k : scored) sq += (pred[k] - target[k]) * (pred[k] - target[k]);
    return std::sqrt(sq / static_cast<double>(scored.size()));
  }
};

double objective(const gsl_vector* x, void* data) {
  auto* prob = static_cast<FitProblem*>(data);
  const double v = prob->rmse(decode(prob->base, x->data));
  return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

A2rlFit fit_a2rl(const A2rlParams& base, std::span<const double> ay, std::span<const double> ax,
                 std::span<const double> vx, std::span<const bool> segment_start,
                 std::span<const double> target, std::span<const std::size_t> scored,
                 int restarts, std::uint64_t seed) {
  base.validate();
  if (scored.empty()) throw DataError("fit_a2rl: no scored samples");
  if (target.size() != ay.size()) throw ConfigError("fit_a2rl: target length differs");
  if (restarts < 1) throw ConfigError("fit_a2rl: need at least one start");

  gsl_set_error_handler_off();
  FitProblem prob{base, ay, ax, vx, segment_start, target, scored};
  gsl_multimin_function fn{&objective, 5, &prob};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  A2rlFit best;
  best.rmse = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(5));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(5));
    // First start at a neutral guess, later ones spread around it.
    const double spread = r == 0 ? 0.0 : 1.0;
    const double x0[5] = {spread * 2.0 * jitter(rng), std::log(3.0) + spread * jitter(rng),
                          spread * 2.0 * jitter(rng), std::log(3.0) + spread * jitter(rng),
                          spread * jitter(rng)};
    for (std::size_t k = 0; k < 5; ++k) {
      gsl_vector_set(x.get(), k, x0[k]);
      gsl_vector_set(step.get(), k, 0.5);
    }
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 5));
    gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), step.get());
    for (int it = 0; it < 4000; ++it) {
      if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), 1e-7) == GSL_SUCCESS) break;
    }
    const double f = gsl_multimin_fminimizer_minimum(m.get());
    if (f < best.rmse) {
      best.rmse = f;
      best.params = decode(base, gsl_multimin_fminimizer_x(m.get())->data);
    }
  }
  best.evaluations = prob.evaluations;
  return best;
}

}  // namespace msnn
