#include "msnn/simulator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "msnn/error.hpp"

namespace msnn {

void VehicleParams::validate() const {
  if (!(mass > 0.0) || !(wheelbase > 0.0) || !(yaw_inertia > 0.0)) {
    throw ConfigError("mass, wheelbase and yaw inertia must be positive");
  }
  if (!(a > 0.0 && a < wheelbase)) throw ConfigError("front axle distance must lie in (0, L)");
  for (const auto* t : {&front, &rear}) {
    if (!(t->mu > 0.0 && t->mu < 3.0)) throw ConfigError("tire mu must lie in (0, 3)");
    if (!(t->C > 1.0 && t->C < 2.0)) throw ConfigError("tire C must lie in (1, 2)");
    if (!(t->B > 0.0)) throw ConfigError("tire B must be positive");
  }
  if (k_aero < 0.0) throw ConfigError("k_aero must be >= 0");
  if (!(aero_front_share >= 0.0 && aero_front_share <= 1.0)) {
    throw ConfigError("aero front share must lie in [0, 1]");
  }
}

AxleLoads axle_loads(const VehicleParams& p, double v_x, double a_x) {
  const double aero = p.k_aero * v_x * v_x;
  const double transfer = p.mass * a_x * p.cog_height / p.wheelbase;
  AxleLoads z;
  z.front = p.mass * p.g * p.b() / p.wheelbase + p.aero_front_share * aero - transfer;
  z.rear = p.mass * p.g * p.a / p.wheelbase + (1.0 - p.aero_front_share) * aero + transfer;
  z.front = std::max(z.front, 0.0);
  z.rear = std::max(z.rear, 0.0);
  return z;
}

double tire_force(const TireParams& tire, double normal_load, double slip) {
  return tire.mu * normal_load * std::sin(tire.C * std::atan(tire.B * slip));
}

namespace {

// Slip on the stable (pre-peak) branch producing `force`; NaN when saturated.
double inverse_tire(const TireParams& tire, double normal_load, double force) {
  const double ratio = force / (tire.mu * normal_load);
  if (!(std::abs(ratio) <= 1.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::tan(std::asin(ratio) / tire.C) / tire.B;
}

constexpr double kSpinOut = 30.0 * std::numbers::pi / 180.0;

}  // namespace

SlipAngles slip_angles(const VehicleParams& p, const SimState& s, double delta) {
  return {delta - (s.v_y + p.a * s.r) / s.v_x, -(s.v_y - p.b() * s.r) / s.v_x};
}

double lateral_acceleration(const VehicleParams& p, const SimState& s, double delta, double a_x) {
  const auto z = axle_loads(p, s.v_x, a_x);
  const auto alpha = slip_angles(p, s, delta);
  return (tire_force(p.front, z.front, alpha.front) + tire_force(p.rear, z.rear, alpha.rear)) /
         p.mass;
}

SimState step(const SimState& state, double delta, double a_x_cmd, const VehicleParams& p,
              double dt) {
  if (!(dt > 0.0 && dt <= 0.01)) throw ConfigError("simulator dt must lie in (0, 0.01] s");
  if (!(state.v_x >= p.vx_min)) throw DomainError("simulator v_x below vx_min");
  const auto alpha = slip_angles(p, state, delta);
  if (std::abs(alpha.front) > kSpinOut || std::abs(alpha.rear) > kSpinOut) {
    std::ostringstream msg;
    msg << "spin-out: slip angles " << alpha.front << ", " << alpha.rear << " rad at v_x "
        << state.v_x << " m/s";
    throw InstabilityError(msg.str());
  }
  const auto z = axle_loads(p, state.v_x, a_x_cmd);
  const double f1 = tire_force(p.front, z.front, alpha.front);
  const double f2 = tire_force(p.rear, z.rear, alpha.rear);

  SimState next = state;
  next.r = state.r + dt * (p.a * f1 - p.b() * f2) / p.yaw_inertia;
  next.v_y = state.v_y + dt * ((f1 + f2) / p.mass - state.v_x * next.r);
  next.v_x = state.v_x + dt * a_x_cmd;
  if (!std::isfinite(next.v_y) || !std::isfinite(next.r)) {
    throw InstabilityError("non-finite simulator state");
  }
  return next;
}

double max_lateral_acceleration(const VehicleParams& p, double v_x) {
  const auto z = axle_loads(p, v_x, 0.0);
  const double front = p.front.mu * z.front * p.wheelbase / (p.mass * p.b());
  const double rear = p.rear.mu * z.rear * p.wheelbase / (p.mass * p.a);
  return std::min(front, rear);
}

double linear_understeer_gradient(const VehicleParams& p, double v_x) {
  const auto z = axle_loads(p, v_x, 0.0);
  const double cf = p.front.mu * z.front * p.front.C * p.front.B;
  const double cr = p.rear.mu * z.rear * p.rear.C * p.rear.B;
  return p.mass / p.wheelbase * (p.b() / cf - p.a / cr);
}

SteadyCornering solve_steady_state(const VehicleParams& p, double v_x, double a_y) {
  p.validate();
  if (!(v_x >= p.vx_min)) throw DomainError("steady state requested below vx_min");
  const auto z = axle_loads(p, v_x, 0.0);
  const double f1 = p.mass * a_y * p.b() / p.wheelbase;
  const double f2 = p.mass * a_y * p.a / p.wheelbase;
  const double alpha1 = inverse_tire(p.front, z.front, f1);
  const double alpha2 = inverse_tire(p.rear, z.rear, f2);
  if (std::isnan(alpha1) || std::isnan(alpha2)) {
    std::ostringstream msg;
    msg << "a_y = " << a_y << " m/s^2 is not reachable at v_x = " << v_x
        << " m/s; max achievable a_y is " << max_lateral_acceleration(p, v_x) << " m/s^2";
    throw DomainError(msg.str());
  }
  SteadyCornering out;
  out.state.v_x = v_x;
  out.state.r = a_y / v_x;
  out.state.v_y = p.b() * out.state.r - alpha2 * v_x;
  out.delta = alpha1 + (out.state.v_y + p.a * out.state.r) / v_x;
  out.a_y_achieved = lateral_acceleration(p, out.state, out.delta, 0.0);
  if (std::abs(out.a_y_achieved - a_y) > 1e-6) {
    throw NumericError("steady-state solution misses the a_y target");
  }
  return out;
}

std::vector<HandlingPoint> run_handling_sweep(const VehicleParams& p, std::span<const double> speeds,
                                              std::span<const double> ay_targets) {
  std::vector<HandlingPoint> out;
  out.reserve(speeds.size() * ay_targets.size());
  for (double v : speeds) {
    for (double ay : ay_targets) {
      const auto ss = solve_steady_state(p, v, ay);
      out.push_back({ay, v, ss.delta - ay * p.wheelbase / (v * v)});
    }
  }
  return out;
}

double PolyFit::operator()(double a_y) const {
  double y = 0.0;
  for (std::size_t k = coefficients.size(); k-- > 0;) y = y * a_y + coefficients[k];
  return y;
}

PolyFit fit_hd_polynomial(std::span<const HandlingPoint> points, std::size_t degree) {
  if (points.size() < degree + 2) {
    throw DataError("polynomial fit of degree " + std::to_string(degree) + " needs at least " +
                    std::to_string(degree + 2) + " points");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  const auto m = static_cast<Eigen::Index>(degree + 1);
  Eigen::MatrixXd A(n, m);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double pw = 1.0;
    for (Eigen::Index k = 0; k < m; ++k, pw *= points[static_cast<std::size_t>(i)].a_y) A(i, k) = pw;
    y(i) = points[static_cast<std::size_t>(i)].hd_ordinate;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  if (qr.rank() < m) throw DataError("degenerate polynomial fit: design matrix is rank deficient");
  const Eigen::VectorXd c = qr.solve(y);
  PolyFit fit;
  fit.coefficients.assign(c.data(), c.data() + m);
  fit.points = points.size();
  fit.rmse = std::sqrt((A * c - y).squaredNorm() / static_cast<double>(n));
  return fit;
}

std::vector<HandlingPoint> handling_points(const Telemetry& records, double wheelbase,
                                           double ax_limit, double ay_min) {
  std::vector<HandlingPoint> out;
  for (const auto& r : records) {
    if (std::abs(r.a_x) > ax_limit || std::abs(r.a_y) < ay_min) continue;
    const double hd = r.delta - r.a_y * wheelbase / (r.v_x * r.v_x);
    const double s = r.a_y > 0.0 ? 1.0 : -1.0;
    out.push_back({std::abs(r.a_y), r.v_x, s * hd});
  }
  return out;
}

std::array<std::vector<HandlingPoint>, 3> speed_tercile_bins(std::span<const HandlingPoint> points) {
  std::array<std::vector<HandlingPoint>, 3> bins;
  if (points.empty()) return bins;
  std::vector<double> v;
  v.reserve(points.size());
  for (const auto& p : points) v.push_back(p.v_x);
  std::sort(v.begin(), v.end());
  const double e1 = v[v.size() / 3];
  const double e2 = v[2 * v.size() / 3];
  for (const auto& p : points) {
    const std::size_t bin = p.v_x < e1 ? 0 : (p.v_x < e2 ? 1 : 2);
    bins[bin].push_back(p);
  }
  return bins;
}

std::vector<TrackElement> default_track() {
  // length [m], curvature [1/m] (left positive), sector
  return {
      // Sector 1: long straight, hairpin, medium corners and a chicane.
      {500, 0.0, 1}, {220, 1.0 / 150, 1}, {260, 0.0, 1}, {75, -1.0 / 28, 1},
      {330, 0.0, 1}, {160, 1.0 / 80, 1}, {220, 0.0, 1}, {60, -1.0 / 45, 1},
      {60, 1.0 / 45, 1}, {350, 0.0, 1}, {140, -1.0 / 110, 1}, {200, 0.0, 1},
      // Sector 2: fast sweepers.
      {320, 1.0 / 300, 2}, {180, 0.0, 2}, {260, -1.0 / 200, 2}, {200, 1.0 / 120, 2},
      {380, 0.0, 2}, {300, -1.0 / 250, 2}, {260, 0.0, 2}, {150, 1.0 / 90, 2},
      {200, 0.0, 2}, {220, -1.0 / 160, 2}, {250, 0.0, 2},
      // Sector 3: slow, medium and fast corners with braking zones.
      {300, 0.0, 3}, {70, 1.0 / 30, 3}, {240, 0.0, 3}, {120, -1.0 / 60, 3},
      {330, 0.0, 3}, {240, 1.0 / 130, 3}, {200, 0.0, 3}, {85, -1.0 / 42, 3},
      {85, 1.0 / 42, 3}, {380, 0.0, 3}, {180, -1.0 / 100, 3}, {220, 0.0, 3},
      {260, 1.0 / 210, 3}, {200, -1.0 / 130, 3}, {250, 0.0, 3}, {280, -1.0 / 300, 3},
      {200, 0.0, 3}, {120, 1.0 / 70, 3}, {300, 0.0, 3},
  };
}

namespace {

constexpr double kSimDt = 0.001;
constexpr int kDecimation = 50;  // 0.001 s -> 0.05 s
constexpr double kGridStep = 1.0;  // speed-profile resolution [m]
constexpr double kTransition = 40.0;  // curvature ramp length between elements [m]
constexpr double kLateralUsage = 0.62;
constexpr double kMaxSpeed = 72.0;
constexpr double kBrake = 13.0;
constexpr double kProfileBrake = 10.0;  // leaves the speed tracker braking margin
constexpr double kDeltaNoise = 0.02 * std::numbers::pi / 180.0;

struct TrackProfile {
  std::vector<double> curvature;  // on a kGridStep grid
  std::vector<int> sector;
  std::vector<double> speed;
  double length = 0.0;

  std::size_t cell(double s) const {
    const auto i = static_cast<std::size_t>(std::max(0.0, s / kGridStep));
    return std::min(i, curvature.size() - 1);
  }
};

TrackProfile build_profile(const VehicleParams& p, const std::vector<TrackElement>& track,
                           double speed_scale) {
  TrackProfile prof;
  std::vector<double> ends;
  for (const auto& e : track) {
    prof.length += e.length;
    ends.push_back(prof.length);
  }
  const auto n = static_cast<std::size_t>(prof.length / kGridStep) + 1;
  prof.curvature.resize(n);
  prof.sector.resize(n);
  std::size_t el = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) * kGridStep;
    while (el + 1 < track.size() && s >= ends[el]) ++el;
    prof.sector[i] = track[el].sector;
    // Linear ramp across each element boundary.
    double k = track[el].curvature;
    const double start = ends[el] - track[el].length;
    if (el > 0 && s - start < kTransition / 2) {
      const double w = 0.5 + (s - start) / kTransition;
      k = w * k + (1.0 - w) * track[el - 1].curvature;
    } else if (el + 1 < track.size() && ends[el] - s < kTransition / 2) {
      const double w = 0.5 + (ends[el] - s) / kTransition;
      k = w * k + (1.0 - w) * track[el + 1].curvature;
    }
    prof.curvature[i] = k;
  }

  // Corner speed limit: each axle's a_y capacity is c0 + c1 v^2, so
  // usage * capacity = |kappa| v^2 solves in closed form per axle.
  const double u = kLateralUsage;
  const auto z0 = axle_loads(p, 0.0, 0.0);
  const double L = p.wheelbase;
  const double c0[2] = {p.front.mu * z0.front * L / (p.mass * p.b()),
                        p.rear.mu * z0.rear * L / (p.mass * p.a)};
  const double c1[2] = {p.front.mu * p.aero_front_share * p.k_aero * L / (p.mass * p.b()),
                        p.rear.mu * (1.0 - p.aero_front_share) * p.k_aero * L / (p.mass * p.a)};
  prof.speed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = std::abs(prof.curvature[i]);
    double v = kMaxSpeed * speed_scale;
    for (int axle = 0; axle < 2; ++axle) {
      const double denom = k - u * c1[axle];
      if (denom > 0.0) v = std::min(v, speed_scale * std::sqrt(u * c0[axle] / denom));
    }
    prof.speed[i] = v;
  }
  // Friction ellipse: longitudinal capacity shrinks with the lateral share in use.
  const auto longitudinal_share = [&](std::size_t i, double v) {
    const double k = std::abs(prof.curvature[i]);
    const double cap = std::min(c0[0] + c1[0] * v * v, c0[1] + c1[1] * v * v);
    const double used = k * v * v / cap;
    return std::max(0.15, std::sqrt(std::max(0.0, 1.0 - used * used)));
  };
  for (std::size_t i = 1; i < n; ++i) {
    const double v = prof.speed[i - 1];
    const double acc = std::min(9.0, 300000.0 / (p.mass * std::max(v, 1.0))) * longitudinal_share(i - 1, v);
    prof.speed[i] = std::min(prof.speed[i], std::sqrt(v * v + 2.0 * acc * kGridStep));
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    const double v = prof.speed[i + 1];
    const double brake = kProfileBrake * longitudinal_share(i + 1, v);
    prof.speed[i] = std::min(prof.speed[i], std::sqrt(v * v + 2.0 * brake * kGridStep));
  }
  return prof;
}

void simulate_lap(const VehicleParams& p, const TrackProfile& prof, int lap, std::size_t& tick,
                  std::mt19937_64& rng, Telemetry& out) {
  std::normal_distribution<double> noise(0.0, kDeltaNoise);
  SimState state;
  state.v_x = prof.speed.front();
  double s = 0.0;
  double integral = 0.0;
  const double L = p.wheelbase;
  int sub = 0;
  while (s < prof.length) {
    const auto i = prof.cell(s);
    const auto i_next = std::min(i + 1, prof.speed.size() - 1);
    const double v_ref = prof.speed[i];
    const double dv_ds = (prof.speed[i_next] - prof.speed[i]) / kGridStep;
    const double a_x = std::clamp(state.v_x * dv_ds + 2.0 * (v_ref - state.v_x), -kBrake, 9.0);

    const double kappa = prof.curvature[i];
    const double yaw_error = kappa * state.v_x - state.r;
    integral += yaw_error * kSimDt;
    const double delta = L * kappa + 0.05 * yaw_error + 0.4 * integral;

    if (sub == 0) {
      TelemetryRecord rec;
      rec.t = static_cast<double>(tick) * kDefaultSampleTime;
      rec.v_x = state.v_x;
      rec.a_x = a_x;
      rec.a_y = lateral_acceleration(p, state, delta, a_x);
      rec.delta = delta + noise(rng);
      rec.sector = prof.sector[i];
      rec.lap = lap;
      out.push_back(rec);
      ++tick;
    }
    sub = (sub + 1) % kDecimation;

    state = step(state, delta, a_x, p, kSimDt);
    s += state.v_x * kSimDt;
  }
}

}  // namespace

LapGeneration generate_laps(const VehicleParams& params, std::uint64_t seed) {
  params.validate();
  LapGeneration gen;
  const auto track = default_track();
  std::size_t tick = 0;
  std::mt19937_64 rng(seed);
  for (int lap = 1; lap <= 2; ++lap) {
    VehicleParams p = params;
    double scale = 1.0;
    if (lap == 2) {
      scale = 1.05;
      p.front.mu *= 0.97;
      p.rear.mu *= 0.97;
    }
    for (int attempt = 0;; ++attempt) {
      Telemetry lap_records;
      std::size_t lap_tick = tick;
      auto lap_rng = rng;
      try {
        const auto prof = build_profile(params, track, scale);
        simulate_lap(p, prof, lap, lap_tick, lap_rng, lap_records);
      } catch (const InstabilityError& e) {
        if (attempt >= 10) throw;
        std::ostringstream note;
        note << "lap " << lap << ": " << e.what() << "; retrying with speed scale "
             << scale * 0.95;
        gen.notes.push_back(note.str());
        scale *= 0.95;
        continue;
      }
      gen.records.insert(gen.records.end(), lap_records.begin(), lap_records.end());
      tick = lap_tick;
      rng = lap_rng;
      break;
    }
  }
  return gen;
}

}  // namespace msnn
