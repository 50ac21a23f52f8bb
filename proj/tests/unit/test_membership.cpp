#include <cmath>
#include <random>

#include "doctest.h"
#include "msnn/error.hpp"
#include "msnn/membership.hpp"

using namespace msnn;

TEST_CASE("triangular memberships on [0,10,20]") {
  MembershipAxis axis({0.0, 10.0, 20.0});
  CHECK(axis.evaluate(10.0) == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(axis.evaluate(5.0) == std::vector<double>{0.5, 0.5, 0.0});
  CHECK(axis.evaluate(25.0) == std::vector<double>{0.0, 0.0, 1.0});
  CHECK(axis.evaluate(-3.0) == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("axis construction errors") {
  CHECK_THROWS_AS(MembershipAxis({1.0}), ConfigError);
  CHECK_THROWS_AS(MembershipAxis({0.0, 0.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(MembershipAxis({2.0, 1.0}), ConfigError);
  MembershipAxis axis({0.0, 1.0});
  CHECK_THROWS_AS(axis.activate(std::nan("")), NumericError);
}

TEST_CASE("half-widths equal the neighbour spacing") {
  MembershipAxis axis({0.0, 2.0, 5.0});
  const auto hw = axis.half_widths();
  CHECK(hw[0] == std::pair<double, double>{2.0, 2.0});
  CHECK(hw[1] == std::pair<double, double>{2.0, 3.0});
  CHECK(hw[2] == std::pair<double, double>{3.0, 3.0});
}

TEST_CASE("partition of unity and range on random sweeps") {
  std::mt19937_64 rng(9);
  for (std::size_t n : {2u, 3u, 5u, 7u}) {
    const auto axis = MembershipAxis::uniform(-10.0, 9.0, n);
    std::uniform_real_distribution<double> x(-15.0, 14.0);
    for (int k = 0; k < 1000; ++k) {
      const auto phi = axis.evaluate(x(rng));
      double sum = 0.0;
      for (double p : phi) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        sum += p;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("uniform grid spans the data ranges") {
  std::vector<double> ay{-12.0, 3.0, 8.0}, ax{-4.0, 2.0, 6.0}, vx{20.0, 40.0, 60.0};
  const auto g = uniform_grid(ay, ax, vx, 5, 3, 3);
  CHECK(g.ay.centers().front() == 0.0);
  CHECK(g.ay.centers().back() == doctest::Approx(12.0));
  CHECK(g.ax.centers() == std::vector<double>{-4.0, 1.0, 6.0});
  CHECK(g.vx.centers() == std::vector<double>{20.0, 40.0, 60.0});
}
