#pragma once

#include <cstddef>
#include <vector>

namespace msnn {

/// Future windows of planned signals starting at step k, each of length q+1.
struct WindowInput {
  std::vector<double> ay;  // [m/s^2]
  std::vector<double> ax;  // [m/s^2]
  std::vector<double> vx;  // [m/s]

  std::size_t length() const { return ay.size(); }
  bool consistent() const { return !ay.empty() && ax.size() == ay.size() && vx.size() == ay.size(); }
};

struct WindowedSample {
  WindowInput input;
  double target = 0.0;    // measured steering at the window start [rad]
  std::size_t index = 0;  // record index k the window starts at
};

}  // namespace msnn
