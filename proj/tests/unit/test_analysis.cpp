#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pvobs/analysis.hpp"

namespace pvobs {
namespace {

DensityField field_from(double x_min, double x_max, std::size_t n, auto f) {
  DensityField d{Grid(x_min, x_max, n), std::vector<double>(n), 0.0};
  for (std::size_t j = 0; j < n; ++j) d.values[j] = f(d.grid.center(j));
  return d;
}

ObserverSegment segment(double xl, double xr, std::size_t m, auto f) {
  ObserverSegment s;
  s.x_left = xl;
  s.x_right = xr;
  s.values.resize(m);
  for (std::size_t k = 0; k < m; ++k) s.values[k] = f(s.cell_center(k));
  s.left_value = f(xl);
  s.right_value = f(xr);
  return s;
}

GlobalEstimate estimate_of(const ObserverSegment& s) {
  return stitch({s}, ProbeFleet({s.x_left, s.x_right}));
}

TEST(ErrorNorm, ZeroWhenEstimateMatchesTruth) {
  const auto truth = field_from(-1.0, 3.0, 400, [](double) { return 0.4; });
  const auto seg = segment(0.0, 2.0, 20, [](double) { return 0.4; });
  EXPECT_EQ(error_norm(truth, estimate_of(seg), seg), 0.0);
}

TEST(ErrorNorm, ConstantOffset) {
  const auto truth = field_from(-1.0, 3.0, 400, [](double) { return 0.5; });
  const auto seg = segment(0.0, 2.0, 20, [](double) { return 0.3; });
  EXPECT_NEAR(error_norm(truth, estimate_of(seg), seg), 0.2 * std::sqrt(2.0), 1e-14);
}

TEST(ErrorNorm, SineModeOnUnitSegment) {
  const auto truth = field_from(-1.0, 2.0, 3000, [](double) { return 0.5; });
  const auto seg = segment(0.0, 1.0, 200, [](double x) { return 0.5 - 0.2 * std::sin(std::numbers::pi * x); });
  // epsilon = 0.2 sin(pi x); ||epsilon|| = 0.2 / sqrt(2).
  EXPECT_NEAR(error_norm(truth, estimate_of(seg), seg), 0.2 * std::sqrt(0.5), 1e-5);
  EXPECT_NEAR(midpoint_l2(std::vector<double>(1000, 1.0), 1.0), 1.0, 1e-14);
}

TEST(ErrorNorm, RejectsSegmentsOutsideTheTruthGrid) {
  const auto truth = field_from(0.0, 1.0, 10, [](double) { return 0.5; });
  const auto seg = segment(0.5, 1.5, 8, [](double) { return 0.5; });
  EXPECT_THROW((void)error_norm(truth, estimate_of(seg), seg), DomainError);
}

TEST(Lyapunov, KnownValues) {
  const std::vector<double> zero(50, 0.0);
  EXPECT_EQ(lyapunov_value(zero, 0.0, 1.0, 2.0), 0.0);
  const std::vector<double> c(2000, 0.3);
  EXPECT_NEAR(lyapunov_value(c, 0.0, 1.0, 0.0), 0.09, 1e-14);
  EXPECT_NEAR(lyapunov_value(c, 0.0, 1.0, 1.0), 0.09 * (1.0 - std::exp(-1.0)), 1e-7);
  EXPECT_THROW((void)lyapunov_value(c, 0.0, 1.0, -1.0), DomainError);
}

TEST(Lyapunov, SandwichedByTheNorm) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> eps(8 + k % 40);
    for (auto& e : eps) e = u(rng);
    const double d = 0.1 + std::abs(u(rng)) * 3.0;
    const double lambda = std::abs(u(rng)) * 5.0;
    const double norm2 = std::pow(midpoint_l2(eps, d), 2);
    const double v = lyapunov_value(eps, 1.0, 1.0 + d, lambda);
    EXPECT_LE(v, norm2 * (1.0 + 1e-12));
    EXPECT_GE(v, std::exp(-lambda * d) * norm2 * (1.0 - 1e-12));
  }
}

ErrorTrace synthetic(double k, double alpha, double scale) {
  ErrorTrace t;
  for (int n = 0; n <= 20; ++n) {
    const double time = 0.01 * n;
    const double e = n == 0 ? 1.0 : scale * k * std::exp(-alpha * time);
    t.push(time, {e, 2.0 * e});
  }
  return t;
}

TEST(EnvelopeCheck, Examples) {
  ErrorTrace zero;
  for (int n = 0; n < 5; ++n) zero.push(0.1 * n, {0.0, 0.0});
  EXPECT_TRUE(envelope_check(zero, 1.0, 3.0));
  EXPECT_TRUE(envelope_check(synthetic(2.0, 5.0, 1.0), 2.0, 5.0, 0.01));
  EXPECT_FALSE(envelope_check(synthetic(2.0, 5.0, 1.5), 2.0, 5.0, 0.1));
  EXPECT_THROW((void)envelope_check(ErrorTrace{}, 1.0, 1.0), DomainError);
}

TEST(ErrorTrace, AggregateIsEuclidean) {
  ErrorTrace t;
  t.push(0.0, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(t.samples[0].aggregate, 5.0);
  EXPECT_DOUBLE_EQ(t.initial_aggregate(), 5.0);
}

TEST(CarCount, Examples) {
  const auto half = field_from(-1.0, 5.0, 60, [](double) { return 0.5; });
  EXPECT_NEAR(car_count(half, 0.0, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(car_count(half, 0.03, 2.07), 1.02, 1e-14);
  const auto empty = field_from(-1.0, 5.0, 60, [](double) { return 0.0; });
  EXPECT_EQ(car_count(empty, 0.0, 2.0), 0.0);
  EXPECT_THROW((void)car_count(half, 4.0, 6.0), DomainError);
}

// Zero-boundary fields: ||f|| <= (d/pi) ||f'|| (1 + 5 dy), near-equality for the
// first sine mode.
TEST(Wirtinger, FirstModeNearlyTight) {
  const std::size_t m = 512;
  const double d = 1.7, h = d / m;
  std::vector<double> f(m + 1);
  for (std::size_t k = 0; k <= m; ++k) f[k] = std::sin(std::numbers::pi * k / m);
  const double lhs = node_l2(f, h);
  const double rhs = d / std::numbers::pi * half_node_derivative_l2(f, h);
  // The discrete first mode exceeds the continuum bound by (pi/2m)/sin(pi/2m).
  EXPECT_LE(lhs, rhs * (1.0 + 5.0 / m));
  EXPECT_GE(lhs, 0.98 * rhs);
}

TEST(Wirtinger, HoldsOnRandomFields) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 8 + trial * 5;
    const double d = 0.2 + trial * 0.03, h = d / static_cast<double>(m);
    std::vector<double> f(m + 1, 0.0);
    for (std::size_t k = 1; k < m; ++k) f[k] = g(rng);
    const double dy = 1.0 / static_cast<double>(m);
    EXPECT_LE(node_l2(f, h), d / std::numbers::pi * half_node_derivative_l2(f, h) * (1.0 + 5.0 * dy));
  }
}

}  // namespace
}  // namespace pvobs
