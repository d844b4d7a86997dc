#pragma once

// Greenshields fundamental diagram and the Godunov fluxes built on it.
// Densities are dimensionless occupancies in [0,1]; speeds are km/h and the
// diffusion coefficient is km^2/h.

#include <algorithm>
#include <cmath>
#include <string>

#include "pvobs/errors.hpp"

namespace pvobs {

inline constexpr double kCriticalDensity = 0.5;

class ModelParams {
 public:
  ModelParams(double free_flow_speed, double viscosity)
      : free_flow_speed_(free_flow_speed), viscosity_(viscosity) {
    if (!(free_flow_speed > 0.0) || !std::isfinite(free_flow_speed)) {
      throw DomainError("free-flow speed must be positive, got " + std::to_string(free_flow_speed));
    }
    if (!(viscosity >= 0.0) || !std::isfinite(viscosity)) {
      throw DomainError("viscosity must be non-negative, got " + std::to_string(viscosity));
    }
  }

  [[nodiscard]] double free_flow_speed() const noexcept { return free_flow_speed_; }
  [[nodiscard]] double viscosity() const noexcept { return viscosity_; }
  /// Zero viscosity selects the inviscid (pure LWR) code paths.
  [[nodiscard]] bool inviscid() const noexcept { return viscosity_ == 0.0; }

 private:
  double free_flow_speed_;
  double viscosity_;
};

/// Occupancy in [0,1]. Construction rejects anything else, including NaN.
class Density {
 public:
  explicit Density(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw DomainError("density must lie in [0,1], got " + std::to_string(value));
    }
  }

  [[nodiscard]] double value() const noexcept { return value_; }
  friend bool operator==(Density, Density) = default;

 private:
  double value_;
};

/// Q(rho) = v_f rho (1 - rho).
[[nodiscard]] inline double flux(Density rho, const ModelParams& params) {
  const double r = rho.value();
  return params.free_flow_speed() * r * (1.0 - r);
}

/// Mean vehicle speed V(rho) = v_f (1 - rho); probe vehicles travel at it.
[[nodiscard]] inline double avg_speed(Density rho, const ModelParams& params) {
  return params.free_flow_speed() * (1.0 - rho.value());
}

/// Characteristic speed Q'(rho) = v_f (1 - 2 rho).
[[nodiscard]] inline double char_speed(Density rho, const ModelParams& params) {
  return params.free_flow_speed() * (1.0 - 2.0 * rho.value());
}

/// Exact Riemann flux for f(rho) = Q(rho) - s rho, observed from a frame moving
/// at speed s. f stays strictly concave, so the Godunov flux is the minimum of
/// the upstream demand and the downstream supply around the maximiser of f.
[[nodiscard]] inline double godunov_flux_moving(Density rho_left, Density rho_right,
                                                double frame_speed, const ModelParams& params) {
  const double vf = params.free_flow_speed();
  const double peak = std::clamp(0.5 * (1.0 - frame_speed / vf), 0.0, 1.0);
  const auto f = [&](double r) { return vf * r * (1.0 - r) - frame_speed * r; };
  const double demand = f(std::min(rho_left.value(), peak));
  const double supply = f(std::max(rho_right.value(), peak));
  return std::min(demand, supply);
}

/// Godunov flux in the road frame: min(demand(rho_L), supply(rho_R)).
[[nodiscard]] inline double godunov_flux(Density rho_left, Density rho_right,
                                         const ModelParams& params) {
  return godunov_flux_moving(rho_left, rho_right, 0.0, params);
}

}  // namespace pvobs
