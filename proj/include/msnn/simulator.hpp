#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msnn/telemetry.hpp"

namespace msnn {

struct TireParams {
  double B = 12.0;  // stiffness factor [1/rad]
  double C = 1.5;   // shape factor [-]
  double mu = 1.6;  // friction coefficient [-]
};

/// Single-track vehicle with speed-dependent aerodynamic downforce.
struct VehicleParams {
  double mass = 800.0;           // [kg]
  double wheelbase = 3.0;        // [m]
  double a = 1.4;                // CoG to front axle [m]
  double yaw_inertia = 1000.0;   // [kg m^2]
  double cog_height = 0.3;       // [m]
  TireParams front{10.0, 1.5, 1.6};
  TireParams rear{12.0, 1.5, 1.6};
  double k_aero = 2.5;           // downforce coefficient [N s^2/m^2]
  double aero_front_share = 0.4; // fraction of downforce on the front axle
  double g = 9.81;               // [m/s^2]
  double vx_min = 5.0;           // [m/s]

  double b() const { return wheelbase - a; }
  void validate() const;
};

struct SimState {
  double v_x = 20.0;  // [m/s]
  double v_y = 0.0;   // [m/s]
  double r = 0.0;     // yaw rate [rad/s]
};

struct AxleLoads {
  double front = 0.0;  // [N]
  double rear = 0.0;   // [N]
};

/// Static + aero + longitudinal transfer (m a_x h / L) normal loads.
AxleLoads axle_loads(const VehicleParams& p, double v_x, double a_x);

/// Lateral force of one axle from the simplified magic formula.
double tire_force(const TireParams& tire, double normal_load, double slip);

struct SlipAngles {
  double front = 0.0;  // alpha_1 [rad]
  double rear = 0.0;   // alpha_2 [rad]
};
SlipAngles slip_angles(const VehicleParams& p, const SimState& s, double delta);

/// Body-frame lateral acceleration (F_1 + F_2) / m at the given inputs.
double lateral_acceleration(const VehicleParams& p, const SimState& s, double delta, double a_x);

/// Semi-implicit Euler step. Throws InstabilityError when a slip angle exceeds 30 deg.
SimState step(const SimState& state, double delta, double a_x_cmd, const VehicleParams& p,
              double dt);

/// Largest steady-state a_y at speed v_x (whichever axle saturates first).
double max_lateral_acceleration(const VehicleParams& p, double v_x);

/// Linear-range understeer gradient (m/L)(b/C_f - a/C_r) at speed v_x [rad s^2/m].
double linear_understeer_gradient(const VehicleParams& p, double v_x);

struct HandlingPoint {
  double a_y = 0.0;          // [m/s^2]
  double v_x = 0.0;          // [m/s]
  double hd_ordinate = 0.0;  // delta - a_y L / v_x^2 [rad]
};

struct SteadyCornering {
  double delta = 0.0;  // [rad]
  SimState state;
  double a_y_achieved = 0.0;
};

/// Steady-state cornering at (v_x, a_y): axle forces follow from force and
/// moment balance, slip angles from the inverse tire curve on its stable
/// branch, and the steering angle from the slip-angle kinematics.
SteadyCornering solve_steady_state(const VehicleParams& p, double v_x, double a_y);

std::vector<HandlingPoint> run_handling_sweep(const VehicleParams& p, std::span<const double> speeds,
                                              std::span<const double> ay_targets);

struct PolyFit {
  std::vector<double> coefficients;  // ascending powers of a_y
  double rmse = 0.0;                 // residual RMSE [rad]
  std::size_t points = 0;

  double operator()(double a_y) const;
};

/// Least-squares polynomial of hd_ordinate in a_y.
PolyFit fit_hd_polynomial(std::span<const HandlingPoint> points, std::size_t degree = 3);

/// Handling points from telemetry: quasi-steady samples (|a_x| below
/// `ax_limit`, |a_y| above `ay_min`), mirrored onto a_y >= 0.
std::vector<HandlingPoint> handling_points(const Telemetry& records, double wheelbase,
                                           double ax_limit = 1.0, double ay_min = 1.0);

/// Splits points into three bins at the v_x terciles.
std::array<std::vector<HandlingPoint>, 3> speed_tercile_bins(std::span<const HandlingPoint> points);

struct LapGeneration {
  Telemetry records;
  std::vector<std::string> notes;  // speed-scale reductions after instabilities
};

struct TrackElement {
  double length = 0.0;     // [m]
  double curvature = 0.0;  // [1/m], signed
  int sector = 1;
};

/// The built-in three-sector circuit.
std::vector<TrackElement> default_track();

/// Two laps at T = 0.05 s: lap 2 at 1.05x reference speed with 0.97x grip.
LapGeneration generate_laps(const VehicleParams& p, std::uint64_t seed);

}  // namespace msnn
