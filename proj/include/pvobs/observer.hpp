#pragma once

// Moving-boundary observers between consecutive probe vehicles.
//
// Segment i lives on [x_i(t), x_{i+1}(t)] and is solved on the fixed
// coordinate y = (x - x_i) / d_i in [0,1]. In conservative form the
// transported quantity is d_i v:
//
//   (d v)_t + (Q(v) - s(y) v)_y = (gamma / d) v_yy,   s(y) = x_i' + y d_i',
//
// which reduces to v_t + a(y,v) v_y = (gamma/d^2) v_yy with
// a = (Q'(v) - s(y)) / d. Convection uses the exact Godunov flux of the
// frame-shifted concave flux, i.e. upwinding on the sign of a. Boundary
// speeds come from the realised fleet displacement, so a constant state is
// reproduced exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pvobs/errors.hpp"
#include "pvobs/initial_condition.hpp"
#include "pvobs/probes.hpp"
#include "pvobs/traffic_model.hpp"

namespace pvobs {

enum class ObserverMode { viscous, inviscid };

/// How a segment estimate is initialised.
enum class ObserverPrior {
  left_probe_value,   ///< constant rho0(x_i(0)) across the segment
  initial_condition,  ///< the exact restriction of rho0 (perfect-information runs)
};

struct ObserverSegment {
  std::size_t index = 0;  ///< segment between vehicles index and index + 1 (0-based)
  double x_left = 0.0;
  double x_right = 0.0;
  std::vector<double> values;  ///< cell averages on the y grid
  double left_value = 0.0;     ///< boundary data at y = 0
  double right_value = 0.0;    ///< boundary data at y = 1
  ObserverMode mode = ObserverMode::viscous;

  [[nodiscard]] double width() const noexcept { return x_right - x_left; }
  [[nodiscard]] std::size_t cells() const noexcept { return values.size(); }
  [[nodiscard]] double cell_center(std::size_t k) const noexcept {
    return x_left + (static_cast<double>(k) + 0.5) / static_cast<double>(values.size()) * width();
  }
};

/// max(8, round(d / dx)): ground-truth resolution without starving thin segments.
[[nodiscard]] inline std::size_t default_segment_cells(double width, double dx) {
  return std::max<std::size_t>(8, static_cast<std::size_t>(std::lround(width / dx)));
}

[[nodiscard]] inline ObserverSegment init_segment(std::size_t i, const ProbeFleet& fleet, const InitialCondition& ic,
                                                  ObserverMode mode, std::size_t m_cells,
                                                  ObserverPrior prior = ObserverPrior::left_probe_value) {
  if (i + 1 >= fleet.size()) {
    throw DomainError("segment index " + std::to_string(i) + " needs vehicles " + std::to_string(i) + " and " +
                      std::to_string(i + 1) + " but the fleet has " + std::to_string(fleet.size()));
  }
  if (m_cells < 1) throw DomainError("a segment needs at least one cell");
  ObserverSegment seg;
  seg.index = i;
  seg.x_left = fleet.positions()[i];
  seg.x_right = fleet.positions()[i + 1];
  seg.mode = mode;
  const double fill = ic(seg.x_left);
  seg.values.assign(m_cells, fill);
  if (prior == ObserverPrior::initial_condition) {
    const double h = seg.width() / static_cast<double>(m_cells);
    for (std::size_t k = 0; k < m_cells; ++k) {
      const double a = seg.x_left + static_cast<double>(k) * h;
      seg.values[k] = std::clamp(ic.integral(a, a + h) / h, 0.0, 1.0);
    }
  }
  seg.left_value = prior == ObserverPrior::initial_condition ? ic(seg.x_left) : fill;
  seg.right_value = prior == ObserverPrior::initial_condition ? ic(seg.x_right) : fill;
  return seg;
}

/// Characteristic speed of state v seen from a vehicle riding density
/// rho_frame: v_f (1 - 2v) - v_f (1 - rho_frame) = v_f (rho_frame - 2v).
[[nodiscard]] inline double relative_char_speed(Density v, Density rho_frame, const ModelParams& params) {
  return char_speed(v, params) - avg_speed(rho_frame, params);
}

struct ObserverStepOptions {
  double safety = 0.9;
  std::size_t max_substeps = 100000;
};

/// Advance one segment across a solver step of length dt. `measurement` holds
/// the readings at the end of the step; the boundary vehicles move from
/// `before` to `after`. Boundary data are interpolated linearly in time across
/// the sub-steps. In inviscid mode the left reading is never accessed.
[[nodiscard]] inline ObserverSegment step_segment(const ObserverSegment& seg, const MeasurementSet& measurement,
                                                  const ProbeFleet& before, const ProbeFleet& after, double dt,
                                                  const ModelParams& params, const ObserverStepOptions& options = {}) {
  const std::size_t i = seg.index;
  if (i + 1 >= before.size() || before.size() != after.size() || measurement.readings.size() != after.size()) {
    throw DomainError("segment " + std::to_string(i) + " does not match the fleet or measurement size");
  }
  if (!(dt > 0.0)) throw DomainError("observer step needs dt > 0");
  const double xl0 = before.positions()[i];
  const double xr0 = before.positions()[i + 1];
  const double xl1 = after.positions()[i];
  const double xr1 = after.positions()[i + 1];
  const double tol = 1e-9 * std::max(1.0, std::abs(xr0));
  if (std::abs(seg.x_left - xl0) > tol || std::abs(seg.x_right - xr0) > tol) {
    throw DomainError("segment " + std::to_string(i) + " boundaries do not match the fleet positions");
  }
  if (!(xl1 < xr1)) throw OrderingViolation("segment " + std::to_string(i) + " collapsed during the step");

  const bool viscous = seg.mode == ObserverMode::viscous;
  const double gamma = viscous ? params.viscosity() : 0.0;
  const double vf = params.free_flow_speed();
  const double speed_left = (xl1 - xl0) / dt;
  const double speed_right = (xr1 - xr0) / dt;
  const double width_rate = speed_right - speed_left;
  const std::size_t m = seg.cells();
  const double dy = 1.0 / static_cast<double>(m);

  // |Q'(v) - s| <= v_f + max|s|, and s stays between the two boundary speeds.
  const double max_speed = vf + std::max(std::abs(speed_left), std::abs(speed_right));
  const double thinnest = std::min(xr0 - xl0, xr1 - xl1) * dy;
  const double rate = max_speed / thinnest + 2.0 * gamma / (thinnest * thinnest);
  const double dt_obs = options.safety / rate;
  const auto substeps = static_cast<std::size_t>(std::ceil(dt / dt_obs));
  if (substeps > options.max_substeps) {
    throw CflViolation("segment " + std::to_string(i) + " needs " + std::to_string(substeps) +
                       " sub-steps, more than the allowed " + std::to_string(options.max_substeps));
  }
  const double h = dt / static_cast<double>(substeps);

  const double right_target = measurement.readings[i + 1];
  const double left_target = viscous ? measurement.readings[i] : 0.0;

  std::vector<double> v = seg.values;
  std::vector<double> face(m + 1);
  for (std::size_t step = 0; step < substeps; ++step) {
    const double w0 = static_cast<double>(step) / static_cast<double>(substeps);
    const double w1 = static_cast<double>(step + 1) / static_cast<double>(substeps);
    const double d_now = (xr0 + w0 * (xr1 - xr0)) - (xl0 + w0 * (xl1 - xl0));
    const double d_next = (xr0 + w1 * (xr1 - xr0)) - (xl0 + w1 * (xl1 - xl0));
    if (!(d_next > 0.0)) throw OrderingViolation("segment " + std::to_string(i) + " collapsed during a sub-step");

    const double ghost_right = seg.right_value + w1 * (right_target - seg.right_value);
    // Inviscid: no left condition; the ghost extrapolates the first cell.
    const double ghost_left = viscous ? seg.left_value + w1 * (left_target - seg.left_value) : v.front();

    for (std::size_t k = 0; k <= m; ++k) {
      const double left = k == 0 ? ghost_left : v[k - 1];
      const double right = k == m ? ghost_right : v[k];
      const double s = speed_left + static_cast<double>(k) * dy * width_rate;
      face[k] = godunov_flux_moving(Density(left), Density(right), s, params) - gamma / d_now * (right - left) / dy;
    }
    for (std::size_t k = 0; k < m; ++k) {
      v[k] = std::clamp((d_now * v[k] - h / dy * (face[k + 1] - face[k])) / d_next, 0.0, 1.0);
    }
  }

  ObserverSegment next = seg;
  next.values = std::move(v);
  next.x_left = xl1;
  next.x_right = xr1;
  next.right_value = right_target;
  next.left_value = viscous ? left_target : next.values.front();
  return next;
}

/// Piecewise-linear global estimate on [x_1(t), x_N(t)] through the segment
/// boundary data and cell centres.
class GlobalEstimate {
 public:
  GlobalEstimate(std::vector<double> nodes, std::vector<double> values)
      : nodes_(std::move(nodes)), values_(std::move(values)) {}

  [[nodiscard]] const std::vector<double>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] double x_begin() const { return nodes_.front(); }
  [[nodiscard]] double x_end() const { return nodes_.back(); }

  [[nodiscard]] double at(double x) const {
    if (!(x >= nodes_.front() && x <= nodes_.back())) {
      throw DomainError("estimate queried at " + std::to_string(x) + " outside [" + std::to_string(nodes_.front()) +
                        ", " + std::to_string(nodes_.back()) + "]");
    }
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
    const auto k = static_cast<std::size_t>(it - nodes_.begin());
    if (nodes_[k] == x) return values_[k];
    const double w = (x - nodes_[k - 1]) / (nodes_[k] - nodes_[k - 1]);
    return (1.0 - w) * values_[k - 1] + w * values_[k];
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
};

/// Join the segments into one estimate. A shared probe position takes the
/// right boundary datum of the segment on its left, which is always a
/// measurement.
[[nodiscard]] inline GlobalEstimate stitch(const std::vector<ObserverSegment>& segments, const ProbeFleet& fleet) {
  if (segments.size() + 1 != fleet.size()) {
    throw DomainError("stitch needs one segment per adjacent vehicle pair");
  }
  std::vector<double> nodes;
  std::vector<double> values;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    const double tol = 1e-9 * std::max(1.0, std::abs(seg.x_right));
    if (seg.index != k || std::abs(seg.x_left - fleet.positions()[k]) > tol ||
        std::abs(seg.x_right - fleet.positions()[k + 1]) > tol) {
      throw DomainError("segment " + std::to_string(k) + " leaves a gap or overlap against the fleet");
    }
    if (k == 0) {
      nodes.push_back(seg.x_left);
      values.push_back(seg.left_value);
    } else if (segments[k - 1].x_right != seg.x_left) {
      throw DomainError("segments " + std::to_string(k - 1) + " and " + std::to_string(k) + " do not meet");
    }
    for (std::size_t c = 0; c < seg.cells(); ++c) {
      nodes.push_back(seg.cell_center(c));
      values.push_back(seg.values[c]);
    }
    nodes.push_back(seg.x_right);
    values.push_back(seg.right_value);
  }
  return GlobalEstimate(std::move(nodes), std::move(values));
}

}  // namespace pvobs
