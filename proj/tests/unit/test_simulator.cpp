#include <map>
#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "msnn/error.hpp"
#include "msnn/simulator.hpp"

using namespace msnn;

namespace {

VehicleParams neutral_vehicle() {
  VehicleParams p;
  p.front.B = p.rear.B = 12.0;
  p.k_aero = 0.0;
  return p;
}

std::vector<HandlingPoint> cubic_points(const std::array<double, 4>& c, double noise_std,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, noise_std);
  std::vector<HandlingPoint> pts;
  for (int k = 0; k <= 40; ++k) {
    const double ay = 0.5 * k;
    const double y = c[0] + c[1] * ay + c[2] * ay * ay + c[3] * ay * ay * ay;
    pts.push_back({ay, 30.0, y + (noise_std > 0.0 ? n(rng) : 0.0)});
  }
  return pts;
}

}  // namespace

TEST_CASE("vehicle parameter validation") {
  VehicleParams p;
  CHECK_NOTHROW(p.validate());
  p.a = 3.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = VehicleParams{};
  p.front.C = 2.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = VehicleParams{};
  p.rear.mu = 3.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("straight-line equilibrium is preserved") {
  const VehicleParams p;
  const SimState s{30.0, 0.0, 0.0};
  const auto next = step(s, 0.0, 0.0, p, 0.001);
  CHECK(next.v_x == s.v_x);
  CHECK(next.v_y == 0.0);
  CHECK(next.r == 0.0);
  CHECK_THROWS_AS(step(s, 0.0, 0.0, p, 0.02), ConfigError);
}

TEST_CASE("constant steering converges to a_y = v_x r") {
  const VehicleParams p;
  SimState s{30.0, 0.0, 0.0};
  const double delta = 0.01;
  for (int k = 0; k < 200000; ++k) {
    const auto next = step(s, delta, 0.0, p, 0.001);
    const double change = std::abs(next.v_y - s.v_y) + std::abs(next.r - s.r);
    s = next;
    if (change < 1e-13) break;
  }
  const double ay = lateral_acceleration(p, s, delta, 0.0);
  CHECK(std::abs(ay - s.v_x * s.r) < 1e-6);
}

TEST_CASE("spin-out raises an instability error") {
  const VehicleParams p;
  SimState s{40.0, 0.0, 0.0};
  CHECK_THROWS_AS(
      [&] {
        for (int k = 0; k < 20000; ++k) s = step(s, 0.6, 0.0, p, 0.001);
      }(),
      InstabilityError);
}

TEST_CASE("steady state satisfies the kinematic identity") {
  const VehicleParams p;
  for (double v : {20.0, 45.0, 70.0}) {
    for (double ay : {1.0, 8.0, 0.9 * max_lateral_acceleration(p, v)}) {
      const auto sc = solve_steady_state(p, v, ay);
      CHECK(std::abs(sc.a_y_achieved - ay) < 1e-6);
      CHECK(std::abs(sc.a_y_achieved - v * sc.state.r) < 1e-6);
    }
  }
}

TEST_CASE("unreachable lateral acceleration names the limit") {
  const VehicleParams p;
  try {
    solve_steady_state(p, 30.0, 80.0);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("max") != std::string::npos);
  }
}

TEST_CASE("aero load raises the grip limit with speed") {
  const VehicleParams p;
  double prev = 0.0;
  for (double v = 10.0; v <= 80.0; v += 5.0) {
    const double a = max_lateral_acceleration(p, v);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("linear-range slope matches the linear bicycle gradient") {
  const VehicleParams p;
  for (double v : {25.0, 50.0}) {
    const double h = 1e-3;
    const double slope =
        (solve_steady_state(p, v, 2 * h).delta - solve_steady_state(p, v, h).delta) / h;
    const double expected = p.wheelbase / (v * v) + linear_understeer_gradient(p, v);
    CHECK(std::abs(slope - expected) < 0.01 * std::abs(expected));
  }
}

TEST_CASE("neutral-steer vehicle has a flat handling diagram") {
  const auto p = neutral_vehicle();
  const std::vector<double> speeds{30.0};
  const std::vector<double> ay{0.5, 1.0, 2.0, 3.0};
  for (const auto& h : run_handling_sweep(p, speeds, ay)) CHECK(std::abs(h.hd_ordinate) < 1e-4);
}

TEST_CASE("understeering vehicle: HD linear in a_y in the linear range") {
  VehicleParams p;
  p.k_aero = 0.0;
  const std::vector<double> speeds{40.0};
  const std::vector<double> ay{0.01, 0.02, 0.03, 0.04};
  const auto pts = run_handling_sweep(p, speeds, ay);
  const double d1 = pts[1].hd_ordinate - pts[0].hd_ordinate;
  CHECK(d1 > 0.0);
  for (std::size_t k = 2; k < pts.size(); ++k) {
    CHECK(pts[k].hd_ordinate - pts[k - 1].hd_ordinate == doctest::Approx(d1).epsilon(1e-3));
  }
}

TEST_CASE("cubic HD fit recovers exact and noisy cubics") {
  const std::array<double, 4> c{1e-3, 2e-4, -3e-6, 4e-7};
  const auto exact = fit_hd_polynomial(cubic_points(c, 0.0, 1));
  for (int k = 0; k < 4; ++k) CHECK(std::abs(exact.coefficients[k] - c[k]) < 1e-9);

  // Coefficients within 3 sigma of the least-squares covariance sigma^2 (X^T X)^-1.
  const double sigma = 1e-4;
  const auto pts = cubic_points(c, sigma, 5);
  const auto fit = fit_hd_polynomial(pts);
  Eigen::MatrixXd X(pts.size(), 4);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int k = 0; k < 4; ++k) X(static_cast<Eigen::Index>(i), k) = std::pow(pts[i].a_y, k);
  }
  const Eigen::MatrixXd cov = sigma * sigma * (X.transpose() * X).inverse();
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(fit.coefficients[k] - c[k]) <= 3.0 * std::sqrt(cov(k, k)));
  }
}

TEST_CASE("neutral vehicle fit coefficients vanish") {
  const auto p = neutral_vehicle();
  const std::vector<double> speeds{25.0, 40.0};
  std::vector<double> ay;
  for (double a = 0.5; a <= 10.0; a += 0.5) ay.push_back(a);
  const auto fit = fit_hd_polynomial(run_handling_sweep(p, speeds, ay));
  for (double c : fit.coefficients) CHECK(std::abs(c) < 1e-6);
}

TEST_CASE("degenerate fits are rejected") {
  std::vector<HandlingPoint> same(8, HandlingPoint{3.0, 30.0, 0.01});
  CHECK_THROWS_AS(fit_hd_polynomial(same), DataError);
  std::vector<HandlingPoint> few{{1, 30, 0}, {2, 30, 0}, {3, 30, 0}, {4, 30, 0}};
  CHECK_THROWS_AS(fit_hd_polynomial(few), DataError);
}

TEST_CASE("tercile bins split by speed") {
  std::vector<HandlingPoint> pts;
  for (int k = 0; k < 30; ++k) pts.push_back({1.0 + k, 10.0 + k, 0.0});
  const auto bins = speed_tercile_bins(pts);
  CHECK(bins[0].size() + bins[1].size() + bins[2].size() == pts.size());
  for (const auto& a : bins[0])
    for (const auto& b : bins[1]) CHECK(a.v_x <= b.v_x);
  for (const auto& a : bins[1])
    for (const auto& b : bins[2]) CHECK(a.v_x <= b.v_x);
}

TEST_CASE("generated laps") {
  const auto gen = generate_laps(VehicleParams{}, 42);
  const auto& rec = gen.records;
  CHECK(segments(rec).size() == 6);

  double v[3] = {0, 0, 0};
  std::size_t n[3] = {0, 0, 0};
  std::map<std::pair<int, int>, std::size_t> per_sector;
  for (const auto& r : rec) {
    v[r.lap] += r.v_x;
    ++n[r.lap];
    ++per_sector[{r.lap, r.sector}];
    CHECK(r.v_x >= 5.0);
  }
  CHECK(v[2] / n[2] > v[1] / n[1]);
  CHECK(per_sector.size() == 6);
  for (const auto& [key, count] : per_sector) CHECK(count >= 600);

  std::ostringstream a, b;
  write_csv(a, rec);
  write_csv(b, generate_laps(VehicleParams{}, 42).records);
  CHECK(a.str() == b.str());
  std::ostringstream c;
  write_csv(c, generate_laps(VehicleParams{}, 43).records);
  CHECK(a.str() != c.str());
}
