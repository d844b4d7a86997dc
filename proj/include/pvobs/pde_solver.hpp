#pragma once

// Ground-truth solver for rho_t + (v_f rho (1 - rho))_x = gamma rho_xx on a
// uniform finite-volume grid: Godunov convective fluxes, explicit three-point
// diffusion, forward Euler in time, zero-gradient ghost cells at both ends.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pvobs/errors.hpp"
#include "pvobs/initial_condition.hpp"
#include "pvobs/traffic_model.hpp"

namespace pvobs {

class Grid {
 public:
  Grid(double x_min, double x_max, std::size_t n_cells) : x_min_(x_min), x_max_(x_max), n_cells_(n_cells) {
    if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw DomainError("grid needs finite x_min < x_max");
    }
    if (n_cells < 2) throw DomainError("grid needs at least 2 cells");
  }

  [[nodiscard]] double x_min() const noexcept { return x_min_; }
  [[nodiscard]] double x_max() const noexcept { return x_max_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_cells_; }
  [[nodiscard]] double dx() const noexcept { return (x_max_ - x_min_) / static_cast<double>(n_cells_); }
  [[nodiscard]] double center(std::size_t j) const noexcept {
    return x_min_ + (static_cast<double>(j) + 0.5) * dx();
  }
  [[nodiscard]] bool contains(double x) const noexcept { return x >= x_min_ && x <= x_max_; }

 private:
  double x_min_;
  double x_max_;
  std::size_t n_cells_;
};

/// Snapshot of the density on a grid at one instant.
struct DensityField {
  Grid grid;
  std::vector<double> values;
  double time = 0.0;

  /// Exact cell averages of an initial condition.
  static DensityField from_initial_condition(const InitialCondition& ic, const Grid& grid) {
    const auto range = ic.range();
    DensityField f{grid, std::vector<double>(grid.size()), 0.0};
    const double dx = grid.dx();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double a = grid.x_min() + static_cast<double>(j) * dx;
      // Averages cannot leave [inf, sup]; the clamp only absorbs rounding.
      f.values[j] = std::clamp(ic.integral(a, a + dx) / dx, range.lo, range.hi);
    }
    return f;
  }

  [[nodiscard]] double mass() const {
    double m = 0.0;
    for (double v : values) m += v;
    return m * grid.dx();
  }

  [[nodiscard]] double min() const { return *std::min_element(values.begin(), values.end()); }
  [[nodiscard]] double max() const { return *std::max_element(values.begin(), values.end()); }
};

/// Largest stable step scaled by `safety`: safety / (v_f/dx + 2 gamma/dx^2).
/// Under this bound the combined update is monotone, hence bounded by the
/// extrema of its inputs.
[[nodiscard]] inline double cfl_timestep(const Grid& grid, const ModelParams& params, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw DomainError("CFL safety factor must lie in (0,1]");
  const double dx = grid.dx();
  return safety / (params.free_flow_speed() / dx + 2.0 * params.viscosity() / (dx * dx));
}

/// Net inflow rate through the two domain ends for the current state
/// (zero-gradient ghosts make each boundary flux Q of the adjacent cell).
[[nodiscard]] inline double boundary_inflow(const DensityField& field, const ModelParams& params) {
  return flux(Density(field.values.front()), params) - flux(Density(field.values.back()), params);
}

[[nodiscard]] inline DensityField step(const DensityField& field, double dt, const ModelParams& params) {
  const double limit = cfl_timestep(field.grid, params, 1.0);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12)) {
    throw CflViolation("time step " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(limit));
  }
  const auto& u = field.values;
  const std::size_t n = u.size();
  const double dx = field.grid.dx();
  const double gamma = params.viscosity();

  // face k sits between cells k-1 and k; faces 0 and n are the domain ends.
  std::vector<double> face(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double left = u[k == 0 ? 0 : k - 1];
    const double right = u[k == n ? n - 1 : k];
    face[k] = godunov_flux(Density(left), Density(right), params) - gamma * (right - left) / dx;
  }

  DensityField next{field.grid, std::vector<double>(n), field.time + dt};
  const double ratio = dt / dx;
  for (std::size_t j = 0; j < n; ++j) {
    // The update is a convex combination under the CFL bound; the clamp only
    // absorbs last-ulp rounding when the data touch 0 or 1.
    next.values[j] = std::clamp(u[j] - ratio * (face[j + 1] - face[j]), 0.0, 1.0);
  }
  return next;
}

struct SimulateOptions {
  double safety = 0.9;
  /// Keep every n-th accepted step (the initial and final fields are always kept).
  std::size_t save_every = 1;
};

/// March from the cell averages of `ic` to t_end with the fixed CFL step
/// (the last step is shortened to land on t_end).
[[nodiscard]] inline std::vector<DensityField> simulate(const InitialCondition& ic, const Grid& grid,
                                                        const ModelParams& params, double t_end,
                                                        const SimulateOptions& options = {}) {
  if (!(t_end > 0.0)) throw DomainError("simulation horizon must be positive");
  if (options.save_every == 0) throw DomainError("save_every must be at least 1");
  const double dt = cfl_timestep(grid, params, options.safety);
  std::vector<DensityField> out;
  DensityField current = DensityField::from_initial_condition(ic, grid);
  out.push_back(current);
  std::size_t steps = 0;
  while (current.time < t_end) {
    const double remaining = t_end - current.time;
    const bool last = remaining <= dt * (1.0 + 1e-9);
    current = step(current, last ? remaining : dt, params);
    if (last) current.time = t_end;
    ++steps;
    if (last || steps % options.save_every == 0) out.push_back(current);
  }
  return out;
}

}  // namespace pvobs
