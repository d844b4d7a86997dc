#pragma once

// Error norms, the weighted Lyapunov functional, decay-envelope checks and the
// car-count diagnostic. Quadratures are midpoint rules on the cells of the
// solver that owns the data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pvobs/errors.hpp"
#include "pvobs/observer.hpp"
#include "pvobs/pde_solver.hpp"
#include "pvobs/probes.hpp"

namespace pvobs {

struct TraceSample {
  double time = 0.0;
  std::vector<double> norms;  ///< ||e(t)||_i per segment
  double aggregate = 0.0;     ///< sqrt of the sum of squares over segments
};

struct ErrorTrace {
  std::vector<double> initial;  ///< ||e(0)||_i per segment
  std::vector<TraceSample> samples;

  void push(double time, std::vector<double> norms) {
    double sq = 0.0;
    for (double n : norms) sq += n * n;
    if (samples.empty() && initial.empty()) initial = norms;
    samples.push_back({time, std::move(norms), std::sqrt(sq)});
  }

  [[nodiscard]] double initial_aggregate() const {
    double sq = 0.0;
    for (double n : initial) sq += n * n;
    return std::sqrt(sq);
  }
};

/// Pointwise error truth - estimate at the segment's cell centres.
[[nodiscard]] inline std::vector<double> segment_error(const DensityField& truth, const GlobalEstimate& est,
                                                       const ObserverSegment& seg) {
  if (!truth.grid.contains(seg.x_left) || !truth.grid.contains(seg.x_right)) {
    throw DomainError("segment " + std::to_string(seg.index) + " leaves the ground-truth grid");
  }
  if (seg.x_left < est.x_begin() || seg.x_right > est.x_end()) {
    throw DomainError("segment " + std::to_string(seg.index) + " leaves the estimate domain");
  }
  std::vector<double> eps(seg.cells());
  for (std::size_t k = 0; k < seg.cells(); ++k) {
    const double x = seg.cell_center(k);
    eps[k] = sample_density(truth, x).value() - est.at(x);
  }
  return eps;
}

/// L2 norm of a field sampled at the midpoints of `values.size()` equal cells
/// spanning a length `width`.
[[nodiscard]] inline double midpoint_l2(std::span<const double> values, double width) {
  if (values.empty()) return 0.0;
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return std::sqrt(sq * width / static_cast<double>(values.size()));
}

/// ||e(t)||_i over one segment.
[[nodiscard]] inline double error_norm(const DensityField& truth, const GlobalEstimate& est,
                                       const ObserverSegment& seg) {
  const auto eps = segment_error(truth, est, seg);
  return midpoint_l2(eps, seg.width());
}

/// V = int e^2 exp(-lambda (x_right - x)) dx on [x_left, x_right], midpoint rule.
[[nodiscard]] inline double lyapunov_value(std::span<const double> eps, double x_left, double x_right,
                                           double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("Lyapunov weight rate must be non-negative");
  if (eps.empty()) return 0.0;
  const double h = (x_right - x_left) / static_cast<double>(eps.size());
  double v = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const double x = x_left + (static_cast<double>(k) + 0.5) * h;
    v += eps[k] * eps[k] * std::exp(-lambda * (x_right - x));
  }
  return v * h;
}

/// True iff ||e(t)||_i <= K ||e(0)||_i exp(-alpha t) (1 + tol) at every sample.
[[nodiscard]] inline bool envelope_check(const ErrorTrace& trace, double overshoot, double decay_rate,
                                         double tol = 0.1) {
  if (trace.samples.empty()) throw DomainError("envelope check needs a non-empty trace");
  for (const auto& s : trace.samples) {
    if (s.norms.size() != trace.initial.size()) throw DomainError("trace sample has the wrong segment count");
    for (std::size_t i = 0; i < s.norms.size(); ++i) {
      const double bound = overshoot * trace.initial[i] * std::exp(-decay_rate * s.time) * (1.0 + tol);
      if (s.norms[i] > bound) return false;
    }
  }
  return true;
}

/// N_i = int rho over [x_left, x_right], integrating the piecewise-constant
/// cell values exactly.
[[nodiscard]] inline double car_count(const DensityField& truth, double x_left, double x_right) {
  const auto& g = truth.grid;
  if (!g.contains(x_left) || !g.contains(x_right) || !(x_left <= x_right)) {
    throw DomainError("car count bounds [" + std::to_string(x_left) + ", " + std::to_string(x_right) +
                      "] are outside the grid");
  }
  const double dx = g.dx();
  const auto first = static_cast<std::size_t>(std::min((x_left - g.x_min()) / dx, static_cast<double>(g.size() - 1)));
  double total = 0.0;
  for (std::size_t j = first; j < g.size(); ++j) {
    const double a = g.x_min() + static_cast<double>(j) * dx;
    if (a >= x_right) break;
    const double overlap = std::min(a + dx, x_right) - std::max(a, x_left);
    if (overlap > 0.0) total += truth.values[j] * overlap;
  }
  return total;
}

/// Norms for the discrete Wirtinger inequality on nodes 0..m with spacing h
/// and zero end values: ||f|| over the nodes and ||f'|| with the derivative
/// centred at the half nodes, (f_{k+1} - f_k) / h.
[[nodiscard]] inline double node_l2(std::span<const double> f, double h) {
  double sq = 0.0;
  for (double v : f) sq += v * v;
  return std::sqrt(sq * h);
}

[[nodiscard]] inline double half_node_derivative_l2(std::span<const double> f, double h) {
  double sq = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    const double g = (f[k + 1] - f[k]) / h;
    sq += g * g;
  }
  return std::sqrt(sq * h);
}

}  // namespace pvobs
