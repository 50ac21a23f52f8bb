#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace msnn {

/// Feedforward steering law: kinematic term plus a filtered understeer term,
/// a filtered a_x compensation scaled by a_y, and a static offset.
struct A2rlParams {
  double K_us = 0.0;       // [rad s^2/m]
  double T_us = 0.2;       // [s]
  double K_ax = 0.0;       // [s^2/m]
  double T_ax = 0.2;       // [s]
  double delta_off = 0.0;  // [rad]
  double dt = 0.05;        // [s]
  double wheelbase = 3.0;  // [m]
  double vx_min = 5.0;     // [m/s]

  void validate() const;
};

struct A2rlState {
  double delta_us_prev = 0.0;
  double ax_filter_prev = 0.0;  // filtered K_ax * a_x before the a_y product
};

/// One controller step. Returns the steering angle and the updated state.
std::pair<double, A2rlState> a2rl_step(double ay, double ax, double vx, const A2rlParams& params,
                                       const A2rlState& state);

/// Runs the controller over a signal, resetting the filters wherever
/// `segment_start[k]` is true (and at k = 0).
std::vector<double> a2rl_run(const A2rlParams& params, std::span<const double> ay,
                             std::span<const double> ax, std::span<const double> vx,
                             std::span<const bool> segment_start);

struct A2rlFit {
  A2rlParams params;
  double rmse = 0.0;  // [rad] on the scored indices
  std::size_t evaluations = 0;
};

/// Nelder-Mead over (K_us, T_us, K_ax, T_ax, delta_off) minimizing the RMSE of
/// the controller against `target` at `scored` indices. Time constants are
/// kept above dt by construction. Restart points are drawn from `seed`.
A2rlFit fit_a2rl(const A2rlParams& base, std::span<const double> ay, std::span<const double> ax,
                 std::span<const double> vx, std::span<const bool> segment_start,
                 std::span<const double> target, std::span<const std::size_t> scored,
                 int restarts = 5, std::uint64_t seed = 1);

}  // namespace msnn
