#include <gtest/gtest.h>

#include "tv/tv.hpp"

using namespace tv;

TEST(Models, CouplingConversionRoundTrip) {
  const auto c = Coupling::from_C(2.5);
  const double g = c.g(10.0, 0.01);
  EXPECT_NEAR(Coupling::from_g(g).C(10.0, 0.01), 2.5, 1e-13);
  EXPECT_FALSE(Coupling::from_g(g).given_as_C());
}

TEST(Models, IdealQndClosedForm) {
  const auto f = ideal_qnd_metrics(1.0 / 16, 0.5);
  EXPECT_NEAR(f.Vc, 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(f.Ts, 1.0);
  EXPECT_NEAR(f.Tm, 0.5, 1e-15);
  for (double eta : {1.0, 0.3})
    for (double nc : {0.0, 1.0}) {
      BathSpec b = BathSpec::thermal(2.0);
      b.eta = eta;
      b.n_c = nc;
      const auto p = evaluate(ideal_qnd_model(10.0, 0.01, Coupling::from_C(0.7), b), 0.0);
      const auto c = ideal_qnd_metrics(0.7, b.Vx(), eta, nc);
      EXPECT_NEAR(p.Vc, c.Vc, 1e-12 * c.Vc);
      EXPECT_NEAR(p.Tm, c.Tm, 1e-12);
    }
}

TEST(Models, CooperativityThreshold) {
  EXPECT_DOUBLE_EQ(qnd_cooperativity_threshold(0.5), 0.0);
  const double Vx = 7.5, C = qnd_cooperativity_threshold(Vx);
  EXPECT_NEAR(ideal_qnd_metrics(C, Vx).Vc, 0.5, 1e-14);
}

TEST(Models, DisplacementSqlBalancesResponses) {
  const double Cs = c_sql(10.0, 0.01, 1.0, 1.0);
  const CMat S = displacement_scattering_closed(10.0, 0.01, 1.0, Cs, 1.0);
  EXPECT_NEAR(std::abs(S(1, 0)), std::abs(S(1, 1)), 1e-12);
  EXPECT_NEAR(c_sql_approx(10.0, 1.0), 0.26, 1e-15);
}

TEST(Models, DetunedCavityRescalesCooperativity) {
  ImperfectQndParams p;
  p.coupling = Coupling::from_C(2.0);
  p.delta_c = 7.0;
  p.mu = 0.3;
  const BathSpec b = BathSpec::thermal(1.0);
  const auto f = evaluate(imperfect_qnd_model(p, b), 0.0);
  const auto c = ideal_qnd_metrics(detuned_effective_cooperativity(2.0, 10.0, 7.0), b.Vx());
  EXPECT_NEAR(f.Vc, c.Vc, 1e-12 * c.Vc);
  EXPECT_NEAR(f.Tm, c.Tm, 1e-12);
}

TEST(Models, NuModelClosedForm) {
  BathSpec b = BathSpec::thermal(1.5);
  b.m_sq = cplx(0.4, 0.3);
  for (double nu : {0.001, 0.004})
    for (double C : {0.1, 3.0}) {
      ImperfectQndParams p;
      p.coupling = Coupling::from_C(C);
      p.nu = nu;
      const auto f = evaluate(imperfect_qnd_model(p, b), 0.0);
      const auto c = nu_model_closed_metrics(C, nu, p.gamma, b);
      EXPECT_NEAR(f.Vc, c.Vc, 1e-10 * c.Vc);
      EXPECT_NEAR(f.Ts, c.Ts, 1e-10);
      EXPECT_NEAR(f.Tm, c.Tm, 1e-10);
    }
}

TEST(Models, XiModelClosedForm) {
  const BathSpec b = BathSpec::thermal(1.0);
  ImperfectQndParams p;
  p.coupling = Coupling::from_C(0.5);
  p.xi = 0.002;
  const auto f = evaluate(imperfect_qnd_model(p, b), 0.0);
  const auto c = xi_model_closed_metrics(0.5, 0.002, 0.01, b.Vx());
  EXPECT_NEAR(f.Vc, c.Vc, 1e-12 * c.Vc);
  EXPECT_THROW(xi_model_closed_metrics(0.5, 0.006, 0.01, 1.0), Error);
}

TEST(Models, CqncCancelsBackAction) {
  CqncParams p;
  p.coupling = Coupling::from_C(10.0);
  const auto m = cqnc_model(p, BathSpec::thermal(1.0));
  for (double w : {0.01, 1.0, 30.0}) {
    const CMat S = build_scattering(m, w).S;
    EXPECT_LT(std::abs(S(1, 0)), 1e-13);
  }
}

TEST(Models, CqncClassicalAtMechanicalFrequency) {
  for (double C : {1e-2, 1.0, 1e3}) {
    CqncParams p;
    p.coupling = Coupling::from_C(C);
    const auto f = evaluate(cqnc_model(p, BathSpec::thermal(1.0)), 1.0, Conditioning::MeterAncilla, kCqncAncilla);
    EXPECT_GE(f.Vc, 0.5);
    EXPECT_LE(f.T_sum(), 1.0 + 1e-12);
  }
}
