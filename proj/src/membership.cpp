#include "msnn/membership.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msnn/error.hpp"

namespace msnn {

MembershipAxis::MembershipAxis(std::vector<double> centers) : centers_(std::move(centers)) {
  if (centers_.size() < 2) throw ConfigError("membership axis needs at least 2 centers");
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    if (!std::isfinite(centers_[i])) throw ConfigError("membership center is not finite");
    if (i > 0 && !(centers_[i] > centers_[i - 1])) {
      throw ConfigError("membership centers must be strictly increasing");
    }
  }
}

MembershipAxis MembershipAxis::uniform(double lo, double hi, std::size_t n) {
  if (n < 2) throw ConfigError("membership axis needs at least 2 centers");
  if (!(hi > lo)) throw ConfigError("membership range is empty");
  std::vector<double> c(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) c[i] = lo + step * static_cast<double>(i);
  c.back() = hi;
  return MembershipAxis(std::move(c));
}

std::vector<std::pair<double, double>> MembershipAxis::half_widths() const {
  const std::size_t n = centers_.size();
  std::vector<std::pair<double, double>> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double right = i + 1 < n ? centers_[i + 1] - centers_[i] : centers_[i] - centers_[i - 1];
    const double left = i > 0 ? centers_[i] - centers_[i - 1] : right;
    w[i] = {left, right};
  }
  return w;
}

Activation MembershipAxis::activate(double x) const {
  if (std::isnan(x)) throw NumericError("membership evaluated at NaN");
  const std::size_t n = centers_.size();
  if (x <= centers_.front()) return {0, 1.0, 0.0};
  if (x >= centers_.back()) return {n - 1, 1.0, 0.0};
  // upper_bound gives the first center > x; x lies in [c[i], c[i+1]).
  const auto it = std::upper_bound(centers_.begin(), centers_.end(), x);
  const auto i = static_cast<std::size_t>(it - centers_.begin()) - 1;
  const double hi = (x - centers_[i]) / (centers_[i + 1] - centers_[i]);
  return {i, 1.0 - hi, hi};
}

std::vector<double> MembershipAxis::evaluate(double x) const {
  std::vector<double> phi(centers_.size(), 0.0);
  activate(x).for_each([&](std::size_t i, double w) { phi[i] = w; });
  return phi;
}

namespace {

std::pair<double, double> min_max(std::span<const double> v, const char* what) {
  if (v.empty()) throw DataError(std::string("no data to place ") + what + " centers");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

MembershipGrid uniform_grid(std::span<const double> ay, std::span<const double> ax,
                            std::span<const double> vx, std::size_t n_y, std::size_t n_x,
                            std::size_t n_v) {
  if (ay.empty()) throw DataError("no data to place a_y centers");
  double ay_max = 0.0;
  for (double a : ay) ay_max = std::max(ay_max, std::abs(a));
  const auto [ax_lo, ax_hi] = min_max(ax, "a_x");
  const auto [vx_lo, vx_hi] = min_max(vx, "v_x");
  return MembershipGrid{MembershipAxis::uniform(0.0, ay_max, n_y),
                        MembershipAxis::uniform(ax_lo, ax_hi, n_x),
                        MembershipAxis::uniform(vx_lo, vx_hi, n_v)};
}

}  // namespace msnn
