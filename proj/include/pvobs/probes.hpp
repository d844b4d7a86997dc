#pragma once

// Probe vehicles: particles riding the flow at V(rho) that report the local
// density along their trajectories.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pvobs/errors.hpp"
#include "pvobs/pde_solver.hpp"
#include "pvobs/traffic_model.hpp"

namespace pvobs {

class ProbeFleet {
 public:
  explicit ProbeFleet(std::vector<double> positions, double measurement_noise = 0.0, std::uint64_t rng_seed = 0)
      : positions_(std::move(positions)), noise_(measurement_noise), seed_(rng_seed) {
    if (positions_.size() < 2) throw DomainError("a probe fleet needs at least two vehicles");
    check_ordering(positions_);
    if (!(measurement_noise >= 0.0)) throw DomainError("measurement noise must be non-negative");
  }

  [[nodiscard]] const std::vector<double>& positions() const noexcept { return positions_; }
  [[nodiscard]] std::size_t size() const noexcept { return positions_.size(); }
  [[nodiscard]] double measurement_noise() const noexcept { return noise_; }
  [[nodiscard]] std::uint64_t rng_seed() const noexcept { return seed_; }
  [[nodiscard]] double spacing(std::size_t i) const { return positions_.at(i + 1) - positions_.at(i); }
  [[nodiscard]] double max_spacing() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < positions_.size(); ++i) m = std::max(m, spacing(i));
    return m;
  }

  [[nodiscard]] ProbeFleet with_positions(std::vector<double> positions) const {
    return ProbeFleet(std::move(positions), noise_, seed_);
  }

 private:
  static void check_ordering(const std::vector<double>& x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!std::isfinite(x[i])) throw DomainError("probe position " + std::to_string(i) + " is not finite");
      if (i > 0 && !(x[i - 1] < x[i])) {
        throw OrderingViolation("probe positions must be strictly increasing (vehicles " + std::to_string(i - 1) +
                                " and " + std::to_string(i) + ")");
      }
    }
  }

  std::vector<double> positions_;
  double noise_;
  std::uint64_t seed_;
};

struct MeasurementSet {
  double time = 0.0;
  std::vector<double> readings;
};

/// Linear interpolation between cell centres; constant in the half cells at
/// either end of the grid.
[[nodiscard]] inline Density sample_density(const DensityField& field, double x) {
  const auto& g = field.grid;
  if (!g.contains(x)) {
    throw DomainError("sample point " + std::to_string(x) + " lies outside [" + std::to_string(g.x_min()) + ", " +
                      std::to_string(g.x_max()) + "]");
  }
  const double p = (x - g.x_min()) / g.dx() - 0.5;
  const std::size_t n = field.values.size();
  if (p <= 0.0) return Density(field.values.front());
  if (p >= static_cast<double>(n - 1)) return Density(field.values.back());
  const auto j = static_cast<std::size_t>(p);
  const double w = p - static_cast<double>(j);
  return Density((1.0 - w) * field.values[j] + w * field.values[j + 1]);
}

/// One explicit Euler step of x_i' = V(rho(t, x_i)).
[[nodiscard]] inline ProbeFleet advance_fleet(const ProbeFleet& fleet, const DensityField& field, double dt,
                                              const ModelParams& params) {
  std::vector<double> next(fleet.positions());
  for (auto& x : next) x += dt * avg_speed(sample_density(field, x), params);
  for (std::size_t i = 1; i < next.size(); ++i) {
    if (!(next[i - 1] < next[i])) {
      throw OrderingViolation("probe vehicles " + std::to_string(i - 1) + " and " + std::to_string(i) +
                              " crossed; the time step is too large");
    }
  }
  return fleet.with_positions(std::move(next));
}

/// Density readings at every probe. Noise (if enabled) is a pure function of
/// the fleet seed and the field time, so reruns reproduce it bit for bit.
[[nodiscard]] inline MeasurementSet measure(const ProbeFleet& fleet, const DensityField& field) {
  MeasurementSet out{field.time, {}};
  out.readings.reserve(fleet.size());
  for (double x : fleet.positions()) out.readings.push_back(sample_density(field, x).value());
  if (fleet.measurement_noise() > 0.0) {
    const auto bits = std::bit_cast<std::uint64_t>(field.time);
    std::seed_seq seq{static_cast<std::uint32_t>(fleet.rng_seed()), static_cast<std::uint32_t>(fleet.rng_seed() >> 32),
                      static_cast<std::uint32_t>(bits), static_cast<std::uint32_t>(bits >> 32)};
    std::mt19937_64 engine(seq);
    std::normal_distribution<double> noise(0.0, fleet.measurement_noise());
    for (auto& r : out.readings) r = std::clamp(r + noise(engine), 0.0, 1.0);
  }
  return out;
}

}  // namespace pvobs
