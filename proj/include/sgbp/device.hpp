#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sgbp/error.hpp"
#include "sgbp/scaling.hpp"

namespace sgbp {

/// Physical description of the 1D n+ - n - n+ diode.
struct DiodeGeometry {
  double n_plus = 5e23;          // 1/m^3
  double n_channel = 2e21;       // 1/m^3
  double channel_begin = 0.3;    // dimensionless position (units of the device length)
  double channel_end = 0.7;
  double bias = 0.5;             // V
};

/// Piecewise-constant dimensionless doping on [0, 1], bias and permittivity.
/// levels[j] applies on [junctions[j-1], junctions[j]).
class DeviceProfile {
 public:
  DeviceProfile(std::vector<double> junctions, std::vector<double> levels, double relative_permittivity,
                double bias)
      : junctions_(std::move(junctions)),
        levels_(std::move(levels)),
        permittivity_(relative_permittivity),
        bias_(bias) {
    if (levels_.size() != junctions_.size() + 1) throw ConfigError("device: need one doping level per region");
    for (std::size_t j = 0; j < junctions_.size(); ++j) {
      if (!(junctions_[j] > 0.0 && junctions_[j] < 1.0)) throw ConfigError("device: junctions must lie in (0, 1)");
      if (j > 0 && !(junctions_[j] > junctions_[j - 1])) throw ConfigError("device: junctions must increase");
    }
    for (double v : levels_)
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("device: doping must be positive and finite");
    if (!(permittivity_ > 0.0)) throw ConfigError("device: relative permittivity must be positive");
    if (!std::isfinite(bias_)) throw ConfigError("device: bias must be finite");
  }

  static DeviceProfile uniform(double level, double relative_permittivity, double bias) {
    return DeviceProfile({}, {level}, relative_permittivity, bias);
  }

  const std::vector<double>& junctions() const { return junctions_; }
  const std::vector<double>& levels() const { return levels_; }
  double relative_permittivity() const { return permittivity_; }
  double bias() const { return bias_; }

  /// Doping at x; at a junction the right-hand region wins.
  double doping(double x) const {
    const auto it = std::upper_bound(junctions_.begin(), junctions_.end(), x);
    return levels_[static_cast<std::size_t>(it - junctions_.begin())];
  }

  /// Exact mean doping over [a, b].
  double average_doping(double a, double b) const {
    if (b <= a) return doping(a);
    double acc = 0.0, lo = a;
    for (double j : junctions_) {
      if (j <= lo) continue;
      if (j >= b) break;
      acc += doping(lo) * (j - lo);
      lo = j;
    }
    acc += doping(lo) * (b - lo);
    return acc / (b - a);
  }

 private:
  std::vector<double> junctions_;
  std::vector<double> levels_;
  double permittivity_;
  double bias_;
};

/// Nondimensionalises the diode: doping / k_scale^3, bias / potential_scale.
inline DeviceProfile make_diode(const DiodeGeometry& g, const ScalingContext& s) {
  if (!(g.channel_begin > 0.0 && g.channel_begin < g.channel_end && g.channel_end < 1.0))
    throw ConfigError("device: channel must satisfy 0 < begin < end < 1");
  if (!(g.n_plus > 0.0) || !(g.n_channel > 0.0)) throw ConfigError("device: doping must be positive");
  const double np = g.n_plus / s.density_scale;
  const double nc = g.n_channel / s.density_scale;
  return DeviceProfile({g.channel_begin, g.channel_end}, {np, nc, np}, s.relative_permittivity,
                       g.bias / s.potential_scale);
}

}  // namespace sgbp
