#include <gtest/gtest.h>

#include <random>

#include "tv/tv.hpp"

using namespace tv;

TEST(Metrics, RegimeClassification) {
  EXPECT_EQ(classify_regime(0.4, 0.9, 0.3), Regime::QND);
  EXPECT_EQ(classify_regime(0.4, 0.5, 0.3), Regime::QSP);
  EXPECT_EQ(classify_regime(0.6, 0.9, 0.3), Regime::IDT);
  EXPECT_EQ(classify_regime(0.6, 0.5, 0.3), Regime::Classical);
  EXPECT_STREQ(to_string(Regime::QND), "QND");
}

TEST(Metrics, ConditionalVarianceOfTwoByTwo) {
  Mat V(3, 3);
  V << 2.0, 0.5, 0.0,
       0.5, 1.0, 0.3,
       0.0, 0.3, 3.0;
  EXPECT_NEAR(conditional_variance(V, 2, 1), 3.0 - 0.09, 1e-15);
  EXPECT_NEAR(conditional_variance(V, 0, 1), 2.0 - 0.25, 1e-15);
}

TEST(Metrics, DegenerateMeterRejected) {
  Mat V = Mat::Identity(2, 2);
  V(1, 1) = 0.0;
  try {
    conditional_variance(V, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateMeter);
  }
}

TEST(Metrics, FactoredMatchesSchurComplement) {
  for (double C : {0.01, 0.5, 20.0})
    for (double w : {0.0, 0.5, 2.0}) {
      const auto m = displacement_model({10.0, 0.01, 1.0, Coupling::from_C(C)}, BathSpec::thermal(3.0));
      const auto S = build_scattering(m, w);
      const Mat V = output_covariance(S, m.Vin);
      const double direct = conditional_variance(V, m.layout);
      const double fact = conditional_variance_factored({S.S}, m.Vin, m.layout.signal, {m.layout.meter});
      EXPECT_NEAR(fact, direct, 1e-12 * direct);
    }
}

TEST(Metrics, FactoredWithAncillaMatchesGeneralSchur) {
  CqncParams p;
  p.coupling = Coupling::from_C(3.0);
  const auto m = cqnc_model(p, BathSpec::thermal(1.0));
  const auto S = build_scattering(m, 0.7);
  const Mat V = output_covariance(S, m.Vin);
  const double direct = cqnc_conditional_variance(V, 2, 1, kCqncAncilla, true);
  const double fact = conditional_variance_factored({S.S}, m.Vin, 2, {1, kCqncAncilla});
  EXPECT_NEAR(fact, direct, 1e-10 * direct);
}

TEST(Metrics, TransferCoefficientLimits) {
  EXPECT_DOUBLE_EQ(transfer_coefficient(2.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(transfer_coefficient(2.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(transfer_coefficient(2.0, std::numeric_limits<double>::infinity()), 0.0);
}

TEST(Metrics, LinearLawForIdealQnd) {
  for (double C : {0.02, 1.0, 50.0}) {
    const BathSpec b = BathSpec::thermal(4.0);
    const auto f = evaluate(ideal_qnd_model(10.0, 0.01, Coupling::from_C(C), b), 0.0);
    EXPECT_NEAR(f.Vc + (f.T_sum() - 2.0) * b.Vx(), 0.0, 1e-10);
    EXPECT_NEAR(f.Ts, 1.0, 1e-12);
  }
}

TEST(Metrics, EquivalentNoiseConsistentWithTransfer) {
  const auto m = displacement_model({10.0, 0.01, 1.0, Coupling::from_C(2.0)}, BathSpec::thermal(1.0));
  const auto f = evaluate(m, 1.0);
  const double Vx = m.Vin(2, 2);
  EXPECT_NEAR(f.Tm, Vx / (Vx + f.nm_eq), 1e-14);
  EXPECT_NEAR(f.Ts, Vx / (Vx + f.ns_eq), 1e-14);
}
