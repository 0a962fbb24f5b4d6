#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "../oracles.hpp"
#include "tv/tv.hpp"

using namespace tv;

namespace {

PulsedParams base(PulseShape s = PulseShape::Exponential) {
  PulsedParams p;
  p.bath.n_m = 1e7 - 0.5;
  p.V0 = 0.447149;
  p.shape = s;
  return p;
}

}  // namespace

TEST(OrderedIntegral, SimplexVolume) {
  EXPECT_NEAR(oi::simplex({0.0, 0.0, 0.0}, 2.0), 2.0 * 2.0 / 2.0, 1e-14);
  EXPECT_NEAR(oi::simplex({1.0, 1.0}, 1.5), 1.5 * std::exp(-1.5), 1e-14);
}

TEST(OrderedIntegral, KernelMatchesQuadrature) {
  const auto p = base();
  for (double t : {0.1, 1.0, 7.0}) {
    const double q = oracle::integrate([&](double v) { return std::exp(-p.lambda() * (t - v) - p.rho() * v); }, 0.0, t);
    EXPECT_NEAR(response_kernel(p, t), q, 1e-12 * q);
  }
}

TEST(OrderedIntegral, KernelSquareMatchesQuadrature) {
  const auto p = base();
  for (double tau : {0.5, 4.0, 30.0}) {
    const double q = oracle::integrate([&](double t) { return std::pow(response_kernel(p, t), 2); }, 0.0, tau);
    EXPECT_NEAR(detail::kernel_square_integral(p, tau), q, 1e-10 * q);
  }
}

TEST(Pulsed, PropagatorMatchesMatrixExponential) {
  const auto p = base();
  for (double t : {0.3, 2.0, 10.0}) {
    const Mat E = (pulsed_drift(p) * t).exp();
    EXPECT_LT((propagator(p, t) - E).norm(), 1e-12 * E.norm());
  }
}

TEST(Pulsed, GainIdentity) {
  const auto p = base();
  for (double tau : {1.0, 10.0}) {
    const auto st = pulsed_covariances(p, tau);
    EXPECT_NEAR(st.signal_gain * st.signal_gain, st.gain - 1.0, 1e-10 * st.gain);
    EXPECT_NEAR(st.bracket, 0.0, 1e-10);
  }
}

TEST(Pulsed, CovariancesMatchTimeDomainIntegration) {
  for (auto s : {PulseShape::Exponential, PulseShape::Constant})
    for (double tau : {0.5, 5.0, 20.0}) {
      const auto p = base(s);
      const auto st = pulsed_covariances(p, tau);
      const auto o = oracle::pulsed_ode(p, tau);
      EXPECT_NEAR(st.V33, o.V33, 1e-8 * o.V33);
      EXPECT_NEAR(st.V22, o.V22, 1e-8 * o.V22);
      EXPECT_NEAR(st.V32, o.V32, 1e-8 * std::sqrt(o.V33 * o.V22));
    }
}

TEST(Pulsed, ShortPulseKeepsPreparedState) {
  const auto f = pulsed_metrics(base(), 1e-4);
  EXPECT_NEAR(f.Vc, 0.447149, 1e-3);
}

TEST(Pulsed, LongPulseReachesQnd) {
  const auto f = pulsed_metrics(base(), 10.0);
  EXPECT_LT(f.Vc, 0.5);
  EXPECT_GT(f.T_sum(), 1.0);
  EXPECT_EQ(f.regime, Regime::QND);
}

TEST(Pulsed, RejectsNonPositiveDuration) { EXPECT_THROW(pulsed_covariances(base(), 0.0), Error); }
