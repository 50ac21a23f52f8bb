#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msnn/grad.hpp"
#include "msnn/membership.hpp"
#include "msnn/sample.hpp"

namespace msnn {

enum class Variant { Base, Steer };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct MsNnConfig {
  Variant variant = Variant::Steer;
  std::size_t q = 9;
  std::size_t n_y = 5;
  std::size_t n_x = 3;
  std::size_t n_v = 3;
  std::size_t n_p1 = 3;  // degree of k_y1(v_x), steer only
  std::size_t n_p2 = 1;  // degree of k_y2(v_x), steer only
  double wheelbase = 3.0;    // [m]
  double sample_time = 0.05; // [s]
  double vx_min = 5.0;       // [m/s]
  // The speed polynomials are evaluated in (v_x - speed_offset) / speed_scale.
  // The defaults keep raw m/s.
  double speed_offset = 0.0;  // [m/s]
  double speed_scale = 1.0;   // [m/s]
  MembershipGrid grid;

  std::size_t window() const { return q + 1; }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

std::size_t param_count(const MsNnConfig& config);
ParamLayout msnn_layout(const MsNnConfig& config);

/// Gains of one local model g_il after resolving the speed polynomials.
struct LocalGains {
  double ky[6] = {};  // k_y1 .. k_y6 (k_y1, k_y2 already evaluated at v_x for steer)
  double kx[5] = {};  // k_x1 .. k_x5
};

/// Evaluates one local model with explicit gains and centers.
double local_model(double ay, double vx, double ax, const LocalGains& gains, double ay_center,
                   double ax_center, double wheelbase);

enum class MixerInit {
  Averaging,  // F = 1/(q+1) + N(0, std^2): the untrained model averages G over the window
  Zero,       // F = N(0, std^2)
};

/// Local gains are zero except the multiplicative pair gains k_x1 = k_x5 = 1,
/// so every gain receives a non-zero gradient once k_y3 and k_y6 move.
ParamVector init_params(const MsNnConfig& config, std::uint64_t seed, double std,
                        MixerInit mixer = MixerInit::Averaging);

class MsNnModel final : public DifferentiableModel {
 public:
  explicit MsNnModel(MsNnConfig config);

  const MsNnConfig& config() const { return config_; }
  std::size_t param_count() const override { return count_; }
  ParamLayout layout() const override { return msnn_layout(config_); }

  /// Gains of local model (i, l) at speed v_x.
  LocalGains gains(std::span<const double> params, std::size_t i, std::size_t l, double vx) const;

  /// g_il(a_y, v_x, a_x) for 0-based indices i, l.
  double g_il(double ay, double vx, double ax, std::size_t i, std::size_t l,
              std::span<const double> params) const;

  /// Steady-state steering predictions over the window.
  std::vector<double> G_eval(const WindowInput& input, std::span<const double> params) const;

  double predict(const WindowInput& input, std::span<const double> params) const override;
  double predict_and_accumulate(const WindowInput& input, std::span<const double> params,
                                const std::function<double(double)>& seed,
                                std::span<double> grad) const override;

 private:
  struct Offsets {
    std::size_t c1 = 0, c2 = 0, ky = 0, kx = 0, mixer = 0;
  };

  void check_input(const WindowInput& input, std::span<const double> params) const;
  std::size_t mixer_index(std::size_t j, std::size_t l, std::size_t t) const {
    return off_.mixer + (j * config_.n_x + l) * config_.window() + t;
  }

  MsNnConfig config_;
  std::size_t count_;
  Offsets off_;
};

}  // namespace msnn
