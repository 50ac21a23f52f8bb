#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "msnn/msnn.hpp"
#include "msnn/sample.hpp"

namespace msnn::testing {

/// Random windows inside a realistic operating envelope; a_y stays away from 0.
inline std::vector<WindowedSample> random_samples(std::size_t n, std::size_t q, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.5, 24.0), ax(-10.0, 9.0), vx(15.0, 75.0),
      target(-0.1, 0.1);
  std::bernoulli_distribution neg(0.5);
  std::vector<WindowedSample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& s = out[k];
    for (std::size_t t = 0; t <= q; ++t) {
      s.input.ay.push_back(neg(rng) ? -mag(rng) : mag(rng));
      s.input.ax.push_back(ax(rng));
      s.input.vx.push_back(vx(rng));
    }
    s.target = target(rng);
    s.index = k;
  }
  return out;
}

inline MsNnConfig small_config(Variant variant, std::size_t q = 4) {
  MsNnConfig c;
  c.variant = variant;
  c.q = q;
  c.n_y = 3;
  c.n_x = 3;
  c.n_v = 3;
  c.speed_scale = 75.0;
  c.grid.ay = MembershipAxis::uniform(0.0, 24.0, 3);
  c.grid.ax = MembershipAxis::uniform(-10.0, 9.0, 3);
  c.grid.vx = MembershipAxis::uniform(15.0, 75.0, 3);
  return c;
}

inline MsNnConfig reference_config(Variant variant) {
  MsNnConfig c;
  c.variant = variant;
  c.speed_scale = 75.0;
  c.grid.ay = MembershipAxis::uniform(0.0, 24.0, 5);
  c.grid.ax = MembershipAxis::uniform(-10.0, 9.0, 3);
  c.grid.vx = MembershipAxis::uniform(15.0, 75.0, 3);
  return c;
}

/// Parameters with every gain O(0.1..1) so all gradient paths are exercised.
inline std::vector<double> random_params(std::size_t n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> p(n);
  for (auto& v : p) v = d(rng);
  return p;
}

}  // namespace msnn::testing
