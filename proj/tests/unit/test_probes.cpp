#include <gtest/gtest.h>

#include "pvobs/probes.hpp"

namespace pvobs {
namespace {

DensityField constant_field(double c, std::size_t n = 100) {
  return DensityField::from_initial_condition(InitialCondition::constant(c), Grid(-2.0, 30.0, n));
}

TEST(ProbeFleet, ValidatesOrdering) {
  EXPECT_THROW(ProbeFleet({1.0}), DomainError);
  EXPECT_THROW(ProbeFleet({0.1, 0.6, 0.6}), OrderingViolation);
  EXPECT_THROW(ProbeFleet({0.6, 0.1}), OrderingViolation);
  EXPECT_THROW(ProbeFleet({0.1, 0.6}, -0.1), DomainError);
  const ProbeFleet f({0.1, 0.6, 0.8, 1.1});
  EXPECT_DOUBLE_EQ(f.spacing(0), 0.5);
  EXPECT_DOUBLE_EQ(f.max_spacing(), 0.5);
}

TEST(SampleDensity, InterpolatesBetweenCentres) {
  DensityField f{Grid(0.0, 1.0, 2), {0.4, 0.6}, 0.0};
  EXPECT_DOUBLE_EQ(sample_density(f, 0.25).value(), 0.4);
  EXPECT_DOUBLE_EQ(sample_density(f, 0.75).value(), 0.6);
  EXPECT_NEAR(sample_density(f, 0.5).value(), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(sample_density(f, 0.0).value(), 0.4);
  EXPECT_DOUBLE_EQ(sample_density(f, 1.0).value(), 0.6);
  EXPECT_THROW((void)sample_density(f, 1.01), DomainError);
}

TEST(SampleDensity, ConstantFieldIsConstant) {
  const auto f = constant_field(0.33);
  for (double x = -2.0; x <= 30.0; x += 0.37) EXPECT_DOUBLE_EQ(sample_density(f, x).value(), 0.33);
}

TEST(AdvanceFleet, MovesAtTrafficSpeed) {
  const ModelParams p(70.0, 0.0);
  const ProbeFleet fleet({0.1, 0.6, 0.8, 1.1});
  const auto empty = advance_fleet(fleet, constant_field(0.0), 0.01, p);
  const auto jammed = advance_fleet(fleet, constant_field(1.0), 0.01, p);
  const auto critical = advance_fleet(fleet, constant_field(0.5), 0.01, p);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    EXPECT_NEAR(empty.positions()[i], fleet.positions()[i] + 0.7, 1e-14);
    EXPECT_DOUBLE_EQ(jammed.positions()[i], fleet.positions()[i]);
    EXPECT_NEAR(critical.positions()[i], fleet.positions()[i] + 0.35, 1e-14);
  }
}

TEST(AdvanceFleet, DetectsCrossing) {
  // Follower on an empty road, leader in a jam just ahead.
  DensityField f = constant_field(0.0, 320);
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    if (f.grid.center(j) > 0.5) f.values[j] = 1.0;
  }
  EXPECT_THROW((void)advance_fleet(ProbeFleet({0.2, 0.6}), f, 0.01, ModelParams(70.0, 0.0)), OrderingViolation);
}

TEST(Measure, NoiselessReadingsSampleTheField) {
  const ProbeFleet fleet({0.1, 0.6, 0.8, 1.1});
  const auto c = measure(fleet, constant_field(0.42));
  for (double r : c.readings) EXPECT_DOUBLE_EQ(r, 0.42);

  auto f = constant_field(0.0, 320);
  for (std::size_t j = 0; j < f.values.size(); ++j) f.values[j] = 0.5 + 0.3 * std::sin(f.grid.center(j));
  const auto m = measure(fleet, f);
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    EXPECT_EQ(m.readings[i], sample_density(f, fleet.positions()[i]).value());
  }
}

TEST(Measure, NoiseIsSeededAndBounded) {
  const ProbeFleet a({0.1, 0.6, 0.8, 1.1}, 0.01, 1234);
  const ProbeFleet b({0.1, 0.6, 0.8, 1.1}, 0.01, 1235);
  auto f = constant_field(0.5);
  f.time = 0.125;
  const auto m1 = measure(a, f);
  const auto m2 = measure(a, f);
  const auto m3 = measure(b, f);
  EXPECT_EQ(m1.readings, m2.readings);
  EXPECT_NE(m1.readings, m3.readings);
  bool any_noise = false;
  for (double r : m1.readings) {
    any_noise |= r != 0.5;
    EXPECT_NEAR(r, 0.5, 0.1);
  }
  EXPECT_TRUE(any_noise);
  const ProbeFleet loud({0.1, 0.6}, 5.0, 9);
  for (double r : measure(loud, constant_field(0.0)).readings) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

}  // namespace
}  // namespace pvobs
