#pragma once

// Convergence certificates for the viscous observer error.
//
// For a density range [rho_min, rho_max] and a bound d_M on the probe spacing,
// a certificate is a tuple (xi, beta, p0, p1), xi, beta > 0, p0 >= 0, such that
// the symmetric 2x2 matrices Psi(rho_min) and Psi(rho_max) are negative
// semidefinite, with
//
//   Psi11(r) = v_f (rho_max - 8/3 r - 4/3 rho_min) xi + p1 xi + xi^2 - gamma p0 + 2 xi beta
//   Psi12(r) = p1 - 2 v_f r
//   Psi22    = -2 + p0 d_M^2 / (gamma pi^2) exp(xi d_M / gamma)
//
// It yields ||e(t)|| <= K ||e(0)|| exp(-alpha t) with K = exp(xi d_M / (2 gamma))
// and alpha = (xi / gamma) beta.
//
// Every matrix here is 2x2, so semidefiniteness is closed form and the search
// is deterministic: a log-spaced line search over xi refined by golden
// sections, a grid over p0 refined by golden sections (beta is concave in
// (p0, p1) for fixed xi), and an exact maximisation over p1 (the minimum of
// two concave quadratics).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pvobs/errors.hpp"

namespace pvobs {

struct CertificateQuery {
  double free_flow_speed = 0.0;
  double viscosity = 0.0;
  double rho_min = 0.0;
  double rho_max = 0.0;
  double max_spacing = 0.0;  ///< d_M, km

  void validate() const {
    if (!(free_flow_speed > 0.0)) throw DomainError("certificate query: free-flow speed must be positive");
    if (!(viscosity > 0.0)) throw DomainError("certificate query: viscosity must be positive");
    if (!(rho_min > 0.0)) throw DomainError("certificate query: rho_min must be positive");
    if (!(rho_min <= rho_max && rho_max <= 1.0)) {
      throw DomainError("certificate query: need rho_min <= rho_max <= 1");
    }
    if (!(max_spacing > 0.0) || !std::isfinite(max_spacing)) {
      throw DomainError("certificate query: d_M must be positive and finite");
    }
  }

  [[nodiscard]] CertificateQuery with_spacing(double d) const {
    CertificateQuery q = *this;
    q.max_spacing = d;
    return q;
  }
};

struct CertificateCandidate {
  double xi = 0.0;
  double beta = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;

  /// Weight rate of the Lyapunov functional, xi / gamma.
  [[nodiscard]] double lambda(double viscosity) const { return xi / viscosity; }
};

struct CertificateConstants {
  double overshoot = 1.0;    ///< K
  double decay_rate = 0.0;   ///< alpha
  double finite_time = 0.0;  ///< t*
};

struct StabilityCertificate {
  CertificateCandidate candidate;
  CertificateConstants constants;
};

struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;
};

struct SearchOptions {
  std::size_t xi_points = 64;
  std::size_t p0_points = 32;
  /// Lower end of the xi line search as a fraction of its upper end.
  double xi_floor_fraction = 1e-3;
  /// Search p1 over the whole real line instead of [0, 2 v_f rho_max].
  bool wide_p1 = false;
  double spacing_cap = 10.0;          ///< km
  double spacing_rel_tolerance = 1e-3;
  /// Worker threads for the feasibility map (0 = hardware concurrency).
  unsigned threads = 0;
};

/// Psi evaluated at density r.
[[nodiscard]] inline Sym2 psi_matrix(const CertificateQuery& q, const CertificateCandidate& c, double r) {
  const double vf = q.free_flow_speed;
  const double gamma = q.viscosity;
  const double d = q.max_spacing;
  Sym2 m;
  m.a11 = vf * (q.rho_max - 8.0 / 3.0 * r - 4.0 / 3.0 * q.rho_min) * c.xi + c.p1 * c.xi + c.xi * c.xi -
          gamma * c.p0 + 2.0 * c.xi * c.beta;
  m.a12 = c.p1 - 2.0 * vf * r;
  m.a22 = -2.0 + c.p0 * d * d / (gamma * std::numbers::pi * std::numbers::pi) * std::exp(c.xi * d / gamma);
  return m;
}

/// M <= 0 via the Schur test: both diagonal entries non-positive and
/// non-negative determinant. `tolerance` relaxes each test (default exact).
[[nodiscard]] inline bool is_nsd_2x2(const Sym2& m, double tolerance = 0.0) {
  return m.a11 <= tolerance && m.a22 <= tolerance && m.a11 * m.a22 - m.a12 * m.a12 >= -tolerance;
}

[[nodiscard]] inline bool check_candidate(const CertificateQuery& q, const CertificateCandidate& c) {
  return is_nsd_2x2(psi_matrix(q, c, q.rho_max)) && is_nsd_2x2(psi_matrix(q, c, q.rho_min));
}

/// Minimiser in xi of the xi-dependent diagonal terms at density r. Negative
/// values mean the line search is empty.
[[nodiscard]] inline double xi_star(const CertificateQuery& q, double r) {
  return -q.free_flow_speed * (q.rho_max - 8.0 / 3.0 * r - 4.0 / 3.0 * q.rho_min) / 2.0;
}

[[nodiscard]] inline CertificateConstants certificate_constants(const CertificateCandidate& c,
                                                                const CertificateQuery& q) {
  return {std::exp(c.xi * q.max_spacing / (2.0 * q.viscosity)), c.xi / q.viscosity * c.beta,
          q.max_spacing / (2.0 * c.beta)};
}

namespace detail {

// Scalar form of the condition at density r, assembled from the proof's
// weighted matrices in lambda units (Phi, Phi0, Phi1) and reduced by a Schur
// complement. Kept apart from psi_matrix so the two routes check each other.
// Only meaningful when the (2,2) entry is negative.
[[nodiscard]] inline double theta(const CertificateQuery& q, const CertificateCandidate& c, double r) {
  const double vf = q.free_flow_speed;
  const double gamma = q.viscosity;
  const double lambda = c.xi / gamma;
  const double d = q.max_spacing;
  // Phi with the worst-case bounds rho(x_{i+1}) <= rho_max, rho >= rho_min.
  const double phi11 = lambda * vf * (q.rho_max - 8.0 / 3.0 * r - 4.0 / 3.0 * q.rho_min) + lambda * lambda * gamma;
  const double phi12 = -2.0 * vf * r;
  const double phi22 = -2.0 * gamma;
  const std::array<double, 3> phi0{-1.0, 0.0, d * d / (std::numbers::pi * std::numbers::pi) * std::exp(lambda * d)};
  const std::array<double, 3> phi1{lambda, 1.0, 0.0};
  const double m11 = phi11 + c.p0 * phi0[0] + c.p1 * phi1[0] + 2.0 * lambda * c.beta;
  const double m12 = phi12 + c.p0 * phi0[1] + c.p1 * phi1[1];
  const double m22 = phi22 + c.p0 * phi0[2] + c.p1 * phi1[2];
  return gamma * (m11 - m12 * m12 / m22);
}

struct Witness {
  double numerator = -std::numeric_limits<double>::infinity();  // 2 xi beta
  double p0 = 0.0;
  double p1 = 0.0;
};

class BetaSearch {
 public:
  BetaSearch(const CertificateQuery& q, const SearchOptions& o) : q_(q), opt_(o) {}

  // 2 xi beta_max(xi, p0) with p1 maximised exactly. Each density endpoint r
  // contributes the concave quadratic
  //   g_r(p1) = -(p1 - 2 v_f r)^2 / D - xi p1 + const_r,   D = -Psi22 > 0,
  // and the objective is their minimum.
  [[nodiscard]] Witness best_over_p1(double xi, double p0) const {
    const double D = -psi22(xi, p0);
    if (!(D > 0.0)) return {};
    const double lo = opt_.wide_p1 ? -std::numeric_limits<double>::infinity() : 0.0;
    const double hi = opt_.wide_p1 ? std::numeric_limits<double>::infinity()
                                   : 2.0 * q_.free_flow_speed * q_.rho_max;
    const double c1 = 2.0 * q_.free_flow_speed * q_.rho_min;
    const double c2 = 2.0 * q_.free_flow_speed * q_.rho_max;
    std::array<double, 3> trial{c1 - xi * D / 2.0, c2 - xi * D / 2.0, 0.0};
    std::size_t count = 2;
    if (c1 != c2) {
      // g_1 = g_2 is linear in p1: the quadratic parts cancel.
      const double k1 = rest(xi, p0, q_.rho_min);
      const double k2 = rest(xi, p0, q_.rho_max);
      trial[count++] = (c1 + c2) / 2.0 + D * (k1 - k2) / (2.0 * (c1 - c2));
    }
    Witness best;
    for (std::size_t k = 0; k < count; ++k) {
      const double p1 = std::clamp(trial[k], lo, hi);
      const double val = numerator(xi, p0, p1, D);
      if (val > best.numerator) best = {val, p0, p1};
    }
    return best;
  }

  // Grid over p0 in [0, 0.999 p0_max), then golden sections around the best
  // node (the objective is concave in p0).
  [[nodiscard]] Witness best_at_xi(double xi) const {
    const double p0_max = 0.999 * p0_ceiling(xi);
    const std::size_t n = std::max<std::size_t>(opt_.p0_points, 2);
    Witness best;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double p0 = p0_max * static_cast<double>(k) / static_cast<double>(n);
      const auto w = best_over_p1(xi, p0);
      if (w.numerator > best.numerator) {
        best = w;
        arg = k;
      }
    }
    const double step = p0_max / static_cast<double>(n);
    const double a = arg == 0 ? 0.0 : step * static_cast<double>(arg - 1);
    const double b = std::min(p0_max, step * static_cast<double>(arg + 1));
    const auto refined = golden_max([&](double p0) { return best_over_p1(xi, p0).numerator; }, a, b);
    const auto w = best_over_p1(xi, refined);
    if (w.numerator > best.numerator) best = w;
    return best;
  }

  [[nodiscard]] std::optional<CertificateCandidate> run() const {
    const double xi_hi = std::min(xi_star(q_, q_.rho_min), xi_star(q_, q_.rho_max));
    if (!(xi_hi > 0.0)) return std::nullopt;
    const double xi_lo = opt_.xi_floor_fraction * xi_hi;
    const std::size_t n = std::max<std::size_t>(opt_.xi_points, 2);
    const auto beta_at = [&](double xi) { return best_at_xi(xi).numerator / (2.0 * xi); };

    std::vector<double> xis(n);
    double best_beta = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < n; ++k) {
      xis[k] = xi_lo * std::pow(xi_hi / xi_lo, static_cast<double>(k) / static_cast<double>(n - 1));
      const double b = beta_at(xis[k]);
      if (b > best_beta) {
        best_beta = b;
        arg = k;
      }
    }
    double xi = xis[arg];
    const double a = xis[arg == 0 ? 0 : arg - 1];
    const double b = xis[std::min(arg + 1, n - 1)];
    const double refined = golden_max(beta_at, a, b);
    if (beta_at(refined) > best_beta) xi = refined;

    const auto w = best_at_xi(xi);
    const double beta = w.numerator / (2.0 * xi);
    if (!(beta > 0.0) || !std::isfinite(beta)) return std::nullopt;
    // Shrink so the reported witness satisfies the inequalities strictly.
    return CertificateCandidate{xi, beta - 1e-9 * std::max(1.0, beta), w.p0, w.p1};
  }

 private:
  [[nodiscard]] double spacing_factor(double xi) const {
    const double d = q_.max_spacing;
    return d * d / (q_.viscosity * std::numbers::pi * std::numbers::pi) * std::exp(xi * d / q_.viscosity);
  }
  [[nodiscard]] double p0_ceiling(double xi) const { return 2.0 / spacing_factor(xi); }
  [[nodiscard]] double psi22(double xi, double p0) const { return -2.0 + p0 * spacing_factor(xi); }

  // Psi11 without the beta and p1 terms.
  [[nodiscard]] double rest(double xi, double p0, double r) const {
    return q_.free_flow_speed * (q_.rho_max - 8.0 / 3.0 * r - 4.0 / 3.0 * q_.rho_min) * xi + xi * xi -
           q_.viscosity * p0;
  }

  // max 2 xi beta admitted by both endpoints: min_r Psi12^2/Psi22 - Psi11|_{beta=0}.
  [[nodiscard]] double numerator(double xi, double p0, double p1, double D) const {
    const auto at = [&](double r) {
      const double off = p1 - 2.0 * q_.free_flow_speed * r;
      return -off * off / D - rest(xi, p0, r) - p1 * xi;
    };
    return std::min(at(q_.rho_min), at(q_.rho_max));
  }

  template <class F>
  static double golden_max(F&& f, double a, double b) {
    constexpr double kInv = 0.6180339887498949;
    double c = b - kInv * (b - a);
    double d = a + kInv * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInv * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInv * (b - a);
        fd = f(d);
      }
    }
    return fc >= fd ? c : d;
  }

  CertificateQuery q_;
  SearchOptions opt_;
};

}  // namespace detail

/// Largest beta found by the search, with its witnesses and derived
/// constants; empty when the inequalities are infeasible.
[[nodiscard]] inline std::optional<StabilityCertificate> max_beta(const CertificateQuery& q,
                                                                  const SearchOptions& options = {}) {
  q.validate();
  const auto cand = detail::BetaSearch(q, options).run();
  if (!cand) return std::nullopt;
  return StabilityCertificate{*cand, certificate_constants(*cand, q)};
}

/// sup { d_M : certificate exists }, by bisection to the configured relative
/// tolerance and capped at options.spacing_cap. Returns 0 if no spacing down
/// to cap * 2^-40 is feasible.
[[nodiscard]] inline double max_dM(double free_flow_speed, double viscosity, double rho_min, double rho_max,
                                   const SearchOptions& options = {}) {
  const CertificateQuery base{free_flow_speed, viscosity, rho_min, rho_max, options.spacing_cap};
  base.validate();
  const auto feasible = [&](double d) { return detail::BetaSearch(base.with_spacing(d), options).run().has_value(); };
  double hi = options.spacing_cap;
  if (feasible(hi)) return hi;
  double lo = hi;
  for (int k = 0; k < 40; ++k) {
    lo /= 2.0;
    if (feasible(lo)) break;
    hi = lo;
    if (k == 39) return 0.0;
  }
  while ((hi - lo) > options.spacing_rel_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return lo;
}

struct FeasibilityCell {
  double rho_min = 0.0;
  double rho_max = 0.0;
  double max_spacing = 0.0;
};

struct FeasibilityMap {
  std::vector<double> levels;        ///< density levels shared by both axes
  std::vector<FeasibilityCell> cells;  ///< row-major over (rho_min, rho_max) with rho_min <= rho_max

  /// Value at level indices (i for rho_min, j for rho_max), j >= i.
  [[nodiscard]] double at(std::size_t i, std::size_t j) const {
    const std::size_t n = levels.size();
    if (i >= n || j >= n || j < i) throw DomainError("feasibility map index outside the triangle");
    // Rows before i hold n, n-1, ..., n-i+1 cells.
    const std::size_t offset = i * n - i * (i - 1) / 2;
    return cells[offset + (j - i)].max_spacing;
  }
};

/// Cell-centred density levels (k + 1/2) / n.
[[nodiscard]] inline std::vector<double> density_levels(std::size_t n) {
  std::vector<double> levels(n);
  for (std::size_t k = 0; k < n; ++k) levels[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
  return levels;
}

[[nodiscard]] inline FeasibilityMap feasibility_map(const std::vector<double>& levels, double free_flow_speed,
                                                    double viscosity, const SearchOptions& options = {}) {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0 && levels[k] <= 1.0) || (k > 0 && !(levels[k - 1] < levels[k]))) {
      throw DomainError("feasibility map levels must increase strictly inside (0,1]");
    }
  }
  FeasibilityMap map{levels, {}};
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = i; j < levels.size(); ++j) map.cells.push_back({levels[i], levels[j], 0.0});
  }
  unsigned workers = options.threads != 0 ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, map.cells.size()));
  // Strided assignment; every cell is written by exactly one worker.
  const auto work = [&](unsigned w) {
    for (std::size_t k = w; k < map.cells.size(); k += workers) {
      auto& c = map.cells[k];
      c.max_spacing = max_dM(free_flow_speed, viscosity, c.rho_min, c.rho_max, options);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return map;
}

}  // namespace pvobs
