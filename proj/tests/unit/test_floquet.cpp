#include <gtest/gtest.h>

#include <numbers>

#include "tv/tv.hpp"

using namespace tv;

namespace {

FloquetParams params(double kappa, double gamma, double C, int order = 1) {
  return {kappa, gamma, 1.0, Coupling::from_C(C), order};
}

}  // namespace

TEST(Floquet, CarrierIsPeriodAverage) {
  const auto fd = decompose_drift(params(0.5, 0.01, 3.0));
  const int n = 64;
  const double T = std::numbers::pi;
  Mat avg = Mat::Zero(4, 4);
  for (int i = 0; i < n; ++i) avg += drift_at(fd, T * i / n) / n;
  EXPECT_LT((avg - fd.A_zero).norm(), 1e-13);
}

TEST(Floquet, OrderZeroIsTheRotatingWaveModel) {
  const auto p = params(0.5, 0.01, 2.0, 0);
  const BathSpec b = BathSpec::thermal(1.0);
  const auto f = floquet_metrics(p, b, 0.0);
  const auto q = evaluate(ideal_qnd_model(0.5, 0.01, Coupling::from_C(2.0), b), 0.0);
  EXPECT_NEAR(f.Vc, q.Vc, 1e-12 * q.Vc);
  EXPECT_NEAR(f.Tm, q.Tm, 1e-12);
}

TEST(Floquet, RotatingWaveLimitForNarrowCavity) {
  const BathSpec b = BathSpec::thermal(1.0);
  for (double C : {0.1, 10.0}) {
    const auto f = floquet_metrics(params(1e-3, 1e-5, C), b, 0.0);
    const auto q = ideal_qnd_metrics(C, b.Vx());
    EXPECT_NEAR(f.Vc, q.Vc, 1e-3);
    EXPECT_NEAR(f.Ts, q.Ts, 1e-3);
    EXPECT_NEAR(f.Tm, q.Tm, 1e-3);
  }
}

TEST(Floquet, ClosedFormConditionalVariance) {
  const BathSpec b = BathSpec::thermal(1.0);
  for (double C : {0.1, 1.0, 10.0}) {
    const auto f = floquet_metrics(params(0.5, 0.01, C), b, 0.0);
    const auto c = floquet_qnd_metrics_closed(C, 0.5, 1.0, b.Vx());
    EXPECT_NEAR(f.Vc, c.Vc, 0.01 * c.Vc);
  }
}

TEST(Floquet, CoherentAssemblyMatchesCorrectedSignalTransfer) {
  const BathSpec b = BathSpec::thermal(1.0);
  const double kappa = 0.5, C = 5.0;
  const auto f = floquet_metrics(params(kappa, 1e-6, C), b, 0.0, FloquetAssembly::Coherent);
  const double q = 4.0 * kappa / (kappa * kappa + 16.0);
  EXPECT_NEAR(f.Ts, 1.0 / (1.0 + 8.0 * C * q * q / b.Vx()), 1e-4);
}

TEST(Floquet, HigherOrderConverges) {
  const BathSpec b = BathSpec::thermal(1.0);
  const auto f2 = floquet_metrics(params(0.5, 0.01, 5.0, 2), b, 0.0);
  const auto f3 = floquet_metrics(params(0.5, 0.01, 5.0, 3), b, 0.0);
  EXPECT_NEAR(f2.Vc, f3.Vc, 1e-3 * f3.Vc);
}

TEST(Floquet, ClosedFormValidity) {
  EXPECT_TRUE(floquet_closed_form_valid(0.001, 0.5, 1.0));
  EXPECT_FALSE(floquet_closed_form_valid(0.1, 0.5, 1.0));
}
