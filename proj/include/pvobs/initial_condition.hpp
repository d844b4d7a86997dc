#pragma once

// Piecewise initial density profiles on the whole real line. Each piece is a
// half-open interval [from, to) carrying either a constant or a sinusoid
// offset + amplitude * sin(frequency * x).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pvobs/errors.hpp"

namespace pvobs {

struct ConstantProfile {
  double value = 0.0;
};

struct SinusoidProfile {
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
};

using Profile = std::variant<ConstantProfile, SinusoidProfile>;

struct IcPiece {
  double from = -std::numeric_limits<double>::infinity();
  double to = std::numeric_limits<double>::infinity();
  Profile profile;
};

struct DensityRange {
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

inline double profile_value(const Profile& p, double x) {
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return c->value;
  const auto& s = std::get<SinusoidProfile>(p);
  return s.offset + s.amplitude * std::sin(s.frequency * x);
}

// Antiderivative of the profile, up to a constant.
inline double profile_primitive(const Profile& p, double x) {
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return c->value * x;
  const auto& s = std::get<SinusoidProfile>(p);
  if (s.frequency == 0.0) return s.offset * x;
  return s.offset * x - s.amplitude / s.frequency * std::cos(s.frequency * x);
}

// Exact range of the profile over [a, b] (either end may be infinite).
inline DensityRange profile_range(const Profile& p, double a, double b) {
  if (const auto* c = std::get_if<ConstantProfile>(&p)) return {c->value, c->value};
  const auto& s = std::get<SinusoidProfile>(p);
  const double amp = std::abs(s.amplitude);
  const double w = std::abs(s.frequency);
  if (amp == 0.0 || w == 0.0) return {s.offset, s.offset};
  if (!std::isfinite(a) || !std::isfinite(b) || (b - a) * w >= 2.0 * std::numbers::pi) {
    return {s.offset - amp, s.offset + amp};
  }
  DensityRange r{std::min(profile_value(p, a), profile_value(p, b)),
                 std::max(profile_value(p, a), profile_value(p, b))};
  // Interior extrema sit where frequency * x = pi/2 + k pi.
  const double lo_arg = std::min(s.frequency * a, s.frequency * b);
  const double hi_arg = std::max(s.frequency * a, s.frequency * b);
  for (double k = std::ceil((lo_arg - std::numbers::pi / 2) / std::numbers::pi);
       std::numbers::pi / 2 + k * std::numbers::pi <= hi_arg; k += 1.0) {
    const double v = s.offset + s.amplitude * std::sin(std::numbers::pi / 2 + k * std::numbers::pi);
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  return r;
}

}  // namespace detail

class InitialCondition {
 public:
  explicit InitialCondition(std::vector<IcPiece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw DomainError("initial condition needs at least one piece");
    if (pieces_.front().from != -std::numeric_limits<double>::infinity() ||
        pieces_.back().to != std::numeric_limits<double>::infinity()) {
      throw DomainError("initial condition pieces must cover the whole real line");
    }
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const auto& pc = pieces_[k];
      if (!(pc.from < pc.to)) {
        throw DomainError("initial condition piece " + std::to_string(k) + " has an empty interval");
      }
      if (k > 0 && pieces_[k - 1].to != pc.from) {
        throw DomainError("initial condition pieces " + std::to_string(k - 1) + " and " +
                          std::to_string(k) + " do not share an endpoint");
      }
      if (const auto* s = std::get_if<SinusoidProfile>(&pc.profile)) {
        if (!std::isfinite(s->offset) || !std::isfinite(s->amplitude) || !std::isfinite(s->frequency)) {
          throw DomainError("initial condition piece " + std::to_string(k) + " is not finite");
        }
        const double amp = std::abs(s->amplitude);
        if (s->offset - amp < 0.0 || s->offset + amp > 1.0) {
          throw DomainError("initial condition piece " + std::to_string(k) +
                            ": offset +/- amplitude must stay in [0,1]");
        }
      } else {
        const double c = std::get<ConstantProfile>(pc.profile).value;
        if (!(c >= 0.0 && c <= 1.0)) {
          throw DomainError("initial condition piece " + std::to_string(k) + ": constant outside [0,1]");
        }
      }
    }
  }

  static InitialCondition constant(double value) {
    return InitialCondition({IcPiece{.profile = ConstantProfile{value}}});
  }

  /// Two constant states separated at `at` (left state on (-inf, at)).
  static InitialCondition riemann(double left, double right, double at = 0.0) {
    return InitialCondition({IcPiece{.to = at, .profile = ConstantProfile{left}},
                             IcPiece{.from = at, .profile = ConstantProfile{right}}});
  }

  [[nodiscard]] const std::vector<IcPiece>& pieces() const noexcept { return pieces_; }

  [[nodiscard]] double operator()(double x) const { return detail::profile_value(piece_at(x).profile, x); }

  /// Exact integral of the profile over [a, b] for finite a <= b.
  [[nodiscard]] double integral(double a, double b) const {
    if (a == b) return 0.0;
    if (a > b) return -integral(b, a);
    double total = 0.0;
    for (const auto& pc : pieces_) {
      const double lo = std::max(a, pc.from);
      const double hi = std::min(b, pc.to);
      if (lo < hi) {
        total += detail::profile_primitive(pc.profile, hi) - detail::profile_primitive(pc.profile, lo);
      }
    }
    return total;
  }

  /// inf and sup of the profile over the whole real line.
  [[nodiscard]] DensityRange range() const {
    DensityRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& pc : pieces_) {
      const auto pr = detail::profile_range(pc.profile, pc.from, pc.to);
      r.lo = std::min(r.lo, pr.lo);
      r.hi = std::max(r.hi, pr.hi);
    }
    return r;
  }

  /// Finite interior breakpoints between pieces.
  [[nodiscard]] std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t k = 1; k < pieces_.size(); ++k) out.push_back(pieces_[k].from);
    return out;
  }

 private:
  [[nodiscard]] const IcPiece& piece_at(double x) const {
    const auto it = std::upper_bound(pieces_.begin(), pieces_.end(), x,
                                     [](double v, const IcPiece& pc) { return v < pc.to; });
    return it == pieces_.end() ? pieces_.back() : *it;
  }

  std::vector<IcPiece> pieces_;
};

}  // namespace pvobs
