#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace msnn {

/// At most two neighbouring memberships are non-zero for triangular functions.
struct Activation {
  std::size_t first = 0;  // index of the lower active center
  double w_first = 1.0;
  double w_second = 0.0;  // weight of center first+1 (0 when saturated)

  template <typename F>
  void for_each(F&& f) const {
    f(first, w_first);
    if (w_second != 0.0) f(first + 1, w_second);
  }
};

/// Normalized triangular memberships over strictly increasing centers.
///
/// phi_i is 1 at center i, falls linearly to 0 at the neighbouring centers
/// (half-width equals the spacing on each side) and saturates to 1 beyond the
/// outer centers, so the memberships form an exact partition of unity.
class MembershipAxis {
 public:
  MembershipAxis() = default;
  explicit MembershipAxis(std::vector<double> centers);

  /// n centers uniformly spaced over [lo, hi].
  static MembershipAxis uniform(double lo, double hi, std::size_t n);

  std::size_t size() const { return centers_.size(); }
  const std::vector<double>& centers() const { return centers_; }
  double center(std::size_t i) const { return centers_[i]; }

  /// (left, right) half-widths per center; outer sides mirror the inner spacing.
  std::vector<std::pair<double, double>> half_widths() const;

  Activation activate(double x) const;
  std::vector<double> evaluate(double x) const;

 private:
  std::vector<double> centers_;
};

/// Local-model centers on |a_y|, a_x and v_x.
struct MembershipGrid {
  MembershipAxis ay;  // evaluated on |a_y|, centers >= 0
  MembershipAxis ax;
  MembershipAxis vx;
};

/// Uniform grid spanning the ranges seen in the given signals.
MembershipGrid uniform_grid(std::span<const double> ay, std::span<const double> ax,
                            std::span<const double> vx, std::size_t n_y, std::size_t n_x,
                            std::size_t n_v);

}  // namespace msnn
