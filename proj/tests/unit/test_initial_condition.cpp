#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "pvobs/initial_condition.hpp"

namespace pvobs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

InitialCondition example_ic() {
  return InitialCondition({{-kInf, 3.0, SinusoidProfile{0.5, 0.1, 5.0}},
                           {3.0, 3.6, ConstantProfile{0.4}},
                           {3.6, 3.7, ConstantProfile{0.5}},
                           {3.7, kInf, ConstantProfile{0.65}}});
}

TEST(InitialCondition, EvaluatesPieces) {
  const auto ic = example_ic();
  EXPECT_DOUBLE_EQ(ic(0.1), 0.5 + 0.1 * std::sin(0.5));
  EXPECT_DOUBLE_EQ(ic(3.0), 0.4);
  EXPECT_DOUBLE_EQ(ic(3.65), 0.5);
  EXPECT_DOUBLE_EQ(ic(3.7), 0.65);
  EXPECT_DOUBLE_EQ(ic(100.0), 0.65);
}

TEST(InitialCondition, IntegralMatchesClosedForm) {
  const auto ic = example_ic();
  const double expected = 0.5 * 3.0 - 0.1 / 5.0 * (std::cos(15.0) - std::cos(0.0)) + 0.4 * 0.6 + 0.5 * 0.1 + 0.65 * 1.3;
  EXPECT_NEAR(ic.integral(0.0, 5.0), expected, 1e-13);
  EXPECT_NEAR(ic.integral(5.0, 0.0), -expected, 1e-13);
  EXPECT_NEAR(ic.integral(3.1, 3.2), 0.04, 1e-15);
}

TEST(InitialCondition, RangeIsExact) {
  const auto r = example_ic().range();
  EXPECT_DOUBLE_EQ(r.lo, 0.4);
  EXPECT_DOUBLE_EQ(r.hi, 0.65);
  const InitialCondition narrow({{-kInf, 0.0, ConstantProfile{0.5}},
                                 {0.0, 0.2, SinusoidProfile{0.5, 0.1, 1.0}},
                                 {0.2, kInf, ConstantProfile{0.5}}});
  EXPECT_DOUBLE_EQ(narrow.range().lo, 0.5);
  EXPECT_NEAR(narrow.range().hi, 0.5 + 0.1 * std::sin(0.2), 1e-15);
}

TEST(InitialCondition, Breakpoints) {
  const auto b = example_ic().breakpoints();
  ASSERT_EQ(b.size(), 3u);
  EXPECT_DOUBLE_EQ(b[0], 3.0);
  EXPECT_DOUBLE_EQ(b[2], 3.7);
}

TEST(InitialCondition, RejectsBadPartitions) {
  EXPECT_THROW(InitialCondition({}), DomainError);
  EXPECT_THROW(InitialCondition({{0.0, kInf, ConstantProfile{0.5}}}), DomainError);
  EXPECT_THROW(InitialCondition({{-kInf, 1.0, ConstantProfile{0.5}}, {2.0, kInf, ConstantProfile{0.5}}}), DomainError);
  EXPECT_THROW(InitialCondition({{-kInf, kInf, ConstantProfile{1.5}}}), DomainError);
  EXPECT_THROW(InitialCondition({{-kInf, kInf, SinusoidProfile{0.95, 0.1, 1.0}}}), DomainError);
}

TEST(InitialCondition, RiemannFactory) {
  const auto ic = InitialCondition::riemann(0.7, 0.3, 1.0);
  EXPECT_DOUBLE_EQ(ic(0.999), 0.7);
  EXPECT_DOUBLE_EQ(ic(1.0), 0.3);
}

}  // namespace
}  // namespace pvobs
