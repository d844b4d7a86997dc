#pragma once

// Explicit solution of the viscous model through the Cole-Hopf transform.
//
// With u = v_f (1 - 2 rho) the model becomes u_t + u u_x = gamma u_xx, and
// u = -2 gamma w_x / w linearises it to the heat equation w_t = gamma w_xx.
// Hence rho = 1/2 + (gamma / v_f) w_x / w, where
//
//   w(t,x) = int phi0(s) exp(-(x - s)^2 / (4 gamma t)) ds,
//   phi0(s) = exp(-U0(s) / (2 gamma)),  U0(s) = int_0^s u(0, r) dr.
//
// Differentiating under the integral gives
//   rho(t,x) = 1/2 - E[x - s] / (2 v_f t)
// with E the mean under the weight phi0(s) exp(-(x-s)^2/(4 gamma t)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pvobs/errors.hpp"
#include "pvobs/initial_condition.hpp"
#include "pvobs/traffic_model.hpp"

namespace pvobs {

struct ColeHopfOptions {
  double relative_tolerance = 1e-11;
  unsigned max_depth = 18;
};

[[nodiscard]] inline Density cole_hopf_oracle(const InitialCondition& ic, double t, double x,
                                              const ModelParams& params, const ColeHopfOptions& options = {}) {
  const double gamma = params.viscosity();
  const double vf = params.free_flow_speed();
  if (!(gamma > 0.0)) throw DomainError("Cole-Hopf oracle needs a positive viscosity");
  if (!(t > 0.0)) throw DomainError("Cole-Hopf oracle needs t > 0");

  const auto exponent = [&](double s) {
    const double primitive = vf * (s - 2.0 * ic.integral(0.0, s));
    const double z = x - s;
    return -primitive / (2.0 * gamma) - z * z / (4.0 * gamma * t);
  };

  // Characteristics travel at most v_f, so the weight concentrates within
  // v_f t of x; beyond 2 v_f t + 12 kernel widths it is below e^-100.
  const double width = std::sqrt(4.0 * gamma * t);
  const double a = x - 2.0 * vf * t - 12.0 * width;
  const double b = x + 2.0 * vf * t + 12.0 * width;

  constexpr int kProbe = 4001;
  double peak = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kProbe; ++k) {
    peak = std::max(peak, exponent(a + (b - a) * k / (kProbe - 1)));
  }

  std::vector<double> cuts{a};
  for (double bp : ic.breakpoints()) {
    if (bp > a && bp < b) cuts.push_back(bp);
  }
  cuts.push_back(b);

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  double mass = 0.0;
  double moment = 0.0;
  double mass_err = 0.0;
  double moment_err = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    mass += Quadrature::integrate([&](double s) { return std::exp(exponent(s) - peak); }, cuts[k],
                                  cuts[k + 1], options.max_depth, options.relative_tolerance, &err);
    mass_err += err;
    moment += Quadrature::integrate([&](double s) { return (x - s) * std::exp(exponent(s) - peak); },
                                    cuts[k], cuts[k + 1], options.max_depth, options.relative_tolerance, &err);
    moment_err += err;
  }
  // The moment error is judged against the kernel scale of its integrand.
  const double moment_scale = mass * (width + vf * t);
  if (!(mass > 0.0) || !std::isfinite(moment) || mass_err > 1e3 * options.relative_tolerance * mass ||
      moment_err > 1e3 * options.relative_tolerance * moment_scale) {
    throw QuadratureError("Cole-Hopf quadrature did not converge at t=" + std::to_string(t) +
                          ", x=" + std::to_string(x));
  }
  const double rho = 0.5 - moment / mass / (2.0 * vf * t);
  // Quadrature noise may push a saturated state past [0,1] by a few ulps.
  return Density(std::clamp(rho, 0.0, 1.0));
}

}  // namespace pvobs
