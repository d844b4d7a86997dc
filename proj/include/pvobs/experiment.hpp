#pragma once

// Closed-loop runs: ground truth, probe fleet and segment observers advanced
// in lock step, plus the files that document a run.
//
// One step of length dt, starting from (truth, fleet, segments) at t:
//   truth'    = step(truth, dt)
//   fleet'    = advance_fleet(fleet, truth, dt)
//   readings' = measure(fleet', truth')
//   segment'  = step_segment(segment, readings', fleet, fleet', dt)

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pvobs/analysis.hpp"
#include "pvobs/errors.hpp"
#include "pvobs/io.hpp"
#include "pvobs/observer.hpp"
#include "pvobs/pde_solver.hpp"
#include "pvobs/probes.hpp"
#include "pvobs/report.hpp"
#include "pvobs/scenario.hpp"
#include "pvobs/stability.hpp"

namespace pvobs {

struct EstimateSnapshot {
  double time = 0.0;
  std::vector<ObserverSegment> segments;
};

struct TrajectorySample {
  double time = 0.0;
  std::vector<double> positions;
  std::vector<double> readings;
};

struct ExperimentResult {
  std::vector<DensityField> truth;         ///< saved at the output cadence
  std::vector<EstimateSnapshot> estimate;  ///< same instants as `truth`
  std::vector<TrajectorySample> trajectories;  ///< every step
  ErrorTrace trace;                            ///< every step
  std::vector<std::vector<double>> lyapunov;   ///< V per segment, every step
  double lambda = 0.0;  ///< weight rate used for V (xi / gamma, or 0 without a certificate)
  std::optional<StabilityCertificate> certificate;
  std::optional<CertificateQuery> certificate_query;
  double max_distance = 0.0;
  std::optional<double> convergence_time;  ///< first t with aggregate < 5% of initial
  std::size_t steps = 0;

  /// First sampled time at which the aggregate error drops below `fraction`
  /// of its initial value.
  [[nodiscard]] std::optional<double> first_time_below(double fraction) const {
    const double e0 = trace.initial_aggregate();
    for (const auto& s : trace.samples) {
      if (s.aggregate < fraction * e0) return s.time;
    }
    return std::nullopt;
  }

  /// Aggregate error at the last sample with time <= t.
  [[nodiscard]] double aggregate_at(double t) const {
    double value = trace.samples.front().aggregate;
    for (const auto& s : trace.samples) {
      if (s.time > t) break;
      value = s.aggregate;
    }
    return value;
  }
};

namespace detail {

inline ProbeFleet initial_fleet(const Scenario& sc) {
  return ProbeFleet(sc.probe_positions, sc.measurement_noise, sc.seed);
}

inline double step_length(double t, double dt, double horizon, bool& last) {
  const double remaining = horizon - t;
  last = remaining <= dt * (1.0 + 1e-9);
  return last ? remaining : dt;
}

}  // namespace detail

/// Largest inter-vehicle distance over the horizon, from a truth-and-fleet
/// run without observers. The fleet is driven by the truth only, so this is
/// the spacing the full run will see.
[[nodiscard]] inline double realised_max_spacing(const Scenario& sc) {
  DensityField truth = DensityField::from_initial_condition(sc.ic, sc.grid);
  ProbeFleet fleet = detail::initial_fleet(sc);
  const double dt = cfl_timestep(sc.grid, sc.params, sc.cfl_safety);
  double widest = fleet.max_spacing();
  bool last = false;
  while (!last) {
    const double h = detail::step_length(truth.time, dt, sc.horizon, last);
    fleet = advance_fleet(fleet, truth, h, sc.params);
    truth = step(truth, h, sc.params);
    if (last) truth.time = sc.horizon;
    widest = std::max(widest, fleet.max_spacing());
  }
  return widest;
}

[[nodiscard]] inline ExperimentResult run_experiment(const Scenario& sc) {
  sc.validate();
  ExperimentResult out;

  if (!sc.params.inviscid()) {
    const auto range = sc.ic.range();
    if (range.lo > 0.0) {
      const double spacing = sc.certificate_spacing ? *sc.certificate_spacing : realised_max_spacing(sc);
      CertificateQuery q{sc.params.free_flow_speed(), sc.params.viscosity(), range.lo, range.hi, spacing};
      out.certificate_query = q;
      out.certificate = max_beta(q);
      if (out.certificate) out.lambda = out.certificate->candidate.lambda(sc.params.viscosity());
    }
  }

  DensityField truth = DensityField::from_initial_condition(sc.ic, sc.grid);
  ProbeFleet fleet = detail::initial_fleet(sc);
  MeasurementSet readings = measure(fleet, truth);
  const std::size_t n_seg = fleet.size() - 1;
  std::vector<ObserverSegment> segments;
  for (std::size_t i = 0; i < n_seg; ++i) {
    const std::size_t m = sc.observer_cells ? *sc.observer_cells
                                            : default_segment_cells(fleet.spacing(i), sc.grid.dx());
    auto seg = init_segment(i, fleet, sc.ic, sc.mode, m, sc.prior);
    seg.right_value = readings.readings[i + 1];
    if (sc.mode == ObserverMode::viscous) seg.left_value = readings.readings[i];
    segments.push_back(std::move(seg));
  }

  const auto record = [&](bool snapshot) {
    const auto est = stitch(segments, fleet);
    std::vector<double> norms(n_seg);
    std::vector<double> v(n_seg);
    for (std::size_t i = 0; i < n_seg; ++i) {
      const auto eps = segment_error(truth, est, segments[i]);
      norms[i] = midpoint_l2(eps, segments[i].width());
      v[i] = lyapunov_value(eps, segments[i].x_left, segments[i].x_right, out.lambda);
    }
    out.trace.push(truth.time, std::move(norms));
    out.lyapunov.push_back(std::move(v));
    out.trajectories.push_back({truth.time, fleet.positions(), readings.readings});
    out.max_distance = std::max(out.max_distance, fleet.max_spacing());
    if (snapshot) {
      out.truth.push_back(truth);
      out.estimate.push_back({truth.time, segments});
    }
  };

  record(true);
  const double dt = cfl_timestep(sc.grid, sc.params, sc.cfl_safety);
  bool last = false;
  while (!last) {
    const double h = detail::step_length(truth.time, dt, sc.horizon, last);
    DensityField next_truth = step(truth, h, sc.params);
    if (last) next_truth.time = sc.horizon;
    ProbeFleet next_fleet = advance_fleet(fleet, truth, h, sc.params);
    readings = measure(next_fleet, next_truth);
    for (auto& seg : segments) seg = step_segment(seg, readings, fleet, next_fleet, h, sc.params);
    truth = std::move(next_truth);
    fleet = std::move(next_fleet);
    ++out.steps;
    record(last || out.steps % sc.save_every == 0);
  }
  out.convergence_time = out.first_time_below(0.05);
  return out;
}

namespace detail {

inline void write_truth_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::CsvWriter csv(path, {"t", "x", "rho"});
  for (const auto& f : r.truth) {
    for (std::size_t j = 0; j < f.grid.size(); ++j) csv.row(f.time, f.grid.center(j), f.values[j]);
  }
}

inline void write_estimate_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::CsvWriter csv(path, {"t", "x", "rho_hat"});
  for (const auto& snap : r.estimate) {
    for (const auto& seg : snap.segments) {
      for (std::size_t k = 0; k < seg.cells(); ++k) csv.row(snap.time, seg.cell_center(k), seg.values[k]);
    }
  }
}

inline void write_trajectories_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::CsvWriter csv(path, {"t", "pv_index", "x", "rho_measured"});
  for (const auto& s : r.trajectories) {
    for (std::size_t i = 0; i < s.positions.size(); ++i) csv.row(s.time, i, s.positions[i], s.readings[i]);
  }
}

inline void write_segments_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::CsvWriter csv(path, {"t", "i", "x_left", "x_right", "d_i", "err_L2"});
  for (std::size_t n = 0; n < r.trajectories.size(); ++n) {
    const auto& s = r.trajectories[n];
    for (std::size_t i = 0; i + 1 < s.positions.size(); ++i) {
      csv.row(s.time, i, s.positions[i], s.positions[i + 1], s.positions[i + 1] - s.positions[i],
              r.trace.samples[n].norms[i]);
    }
  }
}

inline void write_error_trace_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::CsvWriter csv(path, {"t", "segment", "err_L2", "V", "envelope_bound"});
  for (std::size_t n = 0; n < r.trace.samples.size(); ++n) {
    const auto& s = r.trace.samples[n];
    for (std::size_t i = 0; i < s.norms.size(); ++i) {
      const double bound = r.certificate ? r.certificate->constants.overshoot * r.trace.initial[i] *
                                               std::exp(-r.certificate->constants.decay_rate * s.time)
                                         : std::nan("");
      csv.row(s.time, i, s.norms[i], r.lyapunov[n][i], bound);
    }
  }
}

inline void write_distances_csv(const std::filesystem::path& path, const ExperimentResult& r) {
  io::CsvWriter csv(path, {"t", "i", "distance"});
  for (const auto& s : r.trajectories) {
    for (std::size_t i = 0; i + 1 < s.positions.size(); ++i) csv.row(s.time, i, s.positions[i + 1] - s.positions[i]);
  }
}

inline void write_summary_json(const std::filesystem::path& path, const Scenario& sc, const ExperimentResult& r) {
  nlohmann::json j;
  j["scenario"] = sc.name;
  j["horizon"] = sc.horizon;
  j["steps"] = r.steps;
  j["cells"] = sc.grid.size();
  j["initial_error"] = r.trace.initial_aggregate();
  j["final_error"] = r.trace.samples.back().aggregate;
  j["convergence_time"] = r.convergence_time ? nlohmann::json(*r.convergence_time) : nlohmann::json(nullptr);
  j["max_distance"] = r.max_distance;
  j["lyapunov_weight_rate"] = r.lambda;
  if (r.certificate_query) j["certificate"] = report::certificate_json(*r.certificate_query, r.certificate);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline void write_heatmaps(const std::filesystem::path& truth_svg, const std::filesystem::path& estimate_svg,
                           const Scenario& sc, const ExperimentResult& r) {
  const auto& times = r.truth;
  const auto row_span = [&](std::size_t n) {
    const double t0 = n == 0 ? times[0].time : 0.5 * (times[n - 1].time + times[n].time);
    const double t1 = n + 1 == times.size() ? times[n].time : 0.5 * (times[n].time + times[n + 1].time);
    return std::pair{t0, t1};
  };
  const auto range = sc.ic.range();
  const double v_lo = std::min(range.lo, 0.0);
  const double v_hi = std::max(range.hi, 1.0);
  io::HeatmapSpec spec{"density", "x (km)", "t (h)", "rho", sc.grid.x_min(), sc.grid.x_max(), 0.0, sc.horizon,
                       v_lo, v_hi};

  std::vector<io::HeatCell> cells;
  for (std::size_t n = 0; n < times.size(); ++n) {
    const auto [t0, t1] = row_span(n);
    const double dx = times[n].grid.dx();
    for (std::size_t j = 0; j < times[n].grid.size(); ++j) {
      const double x0 = times[n].grid.x_min() + static_cast<double>(j) * dx;
      cells.push_back({x0, x0 + dx, t0, t1, times[n].values[j]});
    }
  }
  spec.title = sc.name + ": ground truth";
  io::write_heatmap_svg(truth_svg, spec, cells);

  // The estimate covers the span between the lead and tail vehicles only.
  cells.clear();
  double x_lo = sc.probe_positions.front();
  double x_hi = sc.probe_positions.back();
  for (const auto& snap : r.estimate) {
    x_lo = std::min(x_lo, snap.segments.front().x_left);
    x_hi = std::max(x_hi, snap.segments.back().x_right);
  }
  for (std::size_t n = 0; n < r.estimate.size(); ++n) {
    const auto [t0, t1] = row_span(n);
    for (const auto& seg : r.estimate[n].segments) {
      const double h = seg.width() / static_cast<double>(seg.cells());
      for (std::size_t k = 0; k < seg.cells(); ++k) {
        const double x0 = seg.x_left + static_cast<double>(k) * h;
        cells.push_back({x0, x0 + h, t0, t1, seg.values[k]});
      }
    }
  }
  spec.title = sc.name + ": observer estimate";
  spec.x_min = x_lo;
  spec.x_max = x_hi;
  io::write_heatmap_svg(estimate_svg, spec, cells);
}

}  // namespace detail

/// File names written by write_experiment, in emission order.
[[nodiscard]] inline std::vector<std::string> experiment_files() {
  return {"truth.csv",   "estimate.csv",  "trajectories.csv", "segments.csv", "error_trace.csv",
          "distances.csv", "summary.json", "truth.svg",        "estimate.svg"};
}

/// Write every output of a run into `dir`. On failure, files written so far
/// are removed before the exception propagates.
inline void write_experiment(const std::filesystem::path& dir, const Scenario& sc, const ExperimentResult& r) {
  std::filesystem::create_directories(dir);
  const auto names = experiment_files();
  std::vector<std::filesystem::path> written;
  try {
    const auto path = [&](std::size_t k) {
      written.push_back(dir / names[k]);
      return written.back();
    };
    detail::write_truth_csv(path(0), r);
    detail::write_estimate_csv(path(1), r);
    detail::write_trajectories_csv(path(2), r);
    detail::write_segments_csv(path(3), r);
    detail::write_error_trace_csv(path(4), r);
    detail::write_distances_csv(path(5), r);
    detail::write_summary_json(path(6), sc, r);
    const auto truth_svg = path(7);
    detail::write_heatmaps(truth_svg, path(8), sc, r);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
}

}  // namespace pvobs
