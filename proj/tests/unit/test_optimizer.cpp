#include <gtest/gtest.h>

#include "tv/tv.hpp"

using namespace tv;

TEST(Optimizer, GridEndpointsExact) {
  const auto x = SweepSpec{"C", GridKind::Log, 1e-3, 1e4, 200, 1e-6}.points();
  EXPECT_EQ(x.size(), 200u);
  EXPECT_EQ(x.front(), 1e-3);
  EXPECT_EQ(x.back(), 1e4);
  EXPECT_NEAR(x[100] / x[99], x[1] / x[0], 1e-12);
}

TEST(Optimizer, GridValidation) {
  EXPECT_THROW((SweepSpec{"C", GridKind::Log, 0.0, 1.0, 10, 1e-6}.points()), Error);
  EXPECT_THROW((SweepSpec{"C", GridKind::Linear, 1.0, 1.0, 10, 1e-6}.points()), Error);
  EXPECT_THROW((SweepSpec{"C", GridKind::Linear, 0.0, 1.0, 1, 1e-6}.points()), Error);
}

TEST(Optimizer, MinimizesSmoothFunction) {
  const auto r = minimize_scalar([](double x) { return std::pow(std::log(x / 3.7), 2); },
                                 SweepSpec{"x", GridKind::Log, 1e-2, 1e2, 40, 1e-9});
  EXPECT_NEAR(r.x, 3.7, 1e-6);
  EXPECT_FALSE(r.at_boundary);
}

TEST(Optimizer, ReportsBoundaryMinimum) {
  const auto r = minimize_scalar([](double x) { return x; }, SweepSpec{"x", GridKind::Linear, 1.0, 2.0, 10, 1e-9});
  EXPECT_TRUE(r.at_boundary);
  EXPECT_DOUBLE_EQ(r.x, 1.0);
}

TEST(Optimizer, FailingPointsAreSkipped) {
  auto f = [](double x) {
    if (x < 0.5) throw Error(ErrorKind::SingularAtFrequency, "test");
    return (x - 0.8) * (x - 0.8);
  };
  const auto r = minimize_scalar(f, SweepSpec{"x", GridKind::Linear, 0.0, 1.0, 21, 1e-9});
  EXPECT_NEAR(r.x, 0.8, 1e-6);
}

TEST(Optimizer, ThresholdBisection) {
  EXPECT_NEAR(find_threshold([](double x) { return x * x; }, 2.0, 0.0, 3.0, 1e-12), std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(find_threshold([](double x) { return 1.0 / x; }, 0.5, 0.1, 100.0, 1e-12, GridKind::Log), 2.0, 1e-10);
}

TEST(Optimizer, ThresholdNeedsBracket) {
  try {
    find_threshold([](double x) { return x; }, 5.0, 0.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoBracket);
  }
}

TEST(Optimizer, GeneralizedSqlOfIdealQndIsAtLargestC) {
  const BathSpec b = BathSpec::thermal(1.0);
  const auto o = generalized_sql([&](double C) { return evaluate(ideal_qnd_model(10.0, 0.01, Coupling::from_C(C), b), 0.0); },
                                 1e-2, 1e2, 50);
  EXPECT_TRUE(o.at_boundary);
  EXPECT_DOUBLE_EQ(o.arg, 1e2);
}

TEST(Optimizer, FrequencyOptimumBeatsFixedFrequency) {
  CqncParams p;
  p.coupling = Coupling::from_C(1e6);
  const auto m = cqnc_model(p, BathSpec::thermal(1.0));
  auto eval = [&](double w) { return evaluate(m, w, Conditioning::MeterAncilla, kCqncAncilla); };
  const auto o = minimize_vc_over_frequency(eval, 1e-3, 1e3);
  EXPECT_LT(o.figures.Vc, eval(1.0).Vc);
}
