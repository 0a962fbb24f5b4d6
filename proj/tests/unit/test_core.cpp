#include <gtest/gtest.h>

#include <random>

#include "tv/tv.hpp"

using namespace tv;

namespace {

LinearModel sample_model(double C) { return displacement_model({10.0, 0.01, 1.0, Coupling::from_C(C)}, BathSpec::thermal(2.0)); }

}  // namespace

TEST(Core, ScatteringMatchesClosedDisplacementForm) {
  for (double C : {0.0, 0.3, 5.0})
    for (double w : {0.0, 0.7, 1.0, 3.0}) {
      const CMat S = build_scattering(sample_model(C), w).S;
      const CMat E = displacement_scattering_closed(10.0, 0.01, 1.0, C, w);
      EXPECT_LT((S - E).norm(), 1e-12 * E.norm()) << "C=" << C << " w=" << w;
    }
}

TEST(Core, ScatteringIsSymplectic) {
  Mat J = Mat::Zero(4, 4);
  J(0, 1) = J(2, 3) = 1.0;
  J(1, 0) = J(3, 2) = -1.0;
  for (double w : {0.0, 0.4, 2.5}) {
    const CMat S = build_scattering(sample_model(2.0), w).S;
    const CMat R = S * J.cast<cplx>() * S.adjoint();
    EXPECT_LT((R - J.cast<cplx>()).norm(), 1e-12);
  }
}

TEST(Core, ConjugateSymmetryInFrequency) {
  const auto m = sample_model(1.0);
  const CMat a = build_scattering(m, 0.8).S, b = build_scattering(m, -0.8).S;
  EXPECT_LT((a.conjugate() - b).norm(), 1e-13);
}

TEST(Core, OutputCovarianceIsSymmetricAndPositive) {
  const auto m = sample_model(3.0);
  const Mat V = output_covariance(build_scattering(m, 0.9), m.Vin);
  EXPECT_LT((V - V.transpose()).norm(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(V);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Core, VacuumInVacuumOutWithoutCoupling) {
  const auto m = displacement_model({10.0, 0.01, 1.0, Coupling::from_C(0.0)}, BathSpec::thermal(0.0));
  const Mat V = output_covariance(build_scattering(m, 0.3), m.Vin);
  EXPECT_LT((V - 0.5 * Mat::Identity(4, 4)).norm(), 1e-13);
}

TEST(Core, LyapunovSolution) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Mat A(5, 5), B(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      A(i, j) = 0.3 * n(rng);
      B(i, j) = n(rng);
    }
  A.diagonal().array() -= 2.0;
  const Mat D = B * B.transpose();
  const Mat V = lyapunov_steady_state(A, D);
  EXPECT_LT(lyapunov_residual(A, V, D), 1e-10 * D.norm());
  EXPECT_LT((V - V.transpose()).norm(), 1e-12 * V.norm());
}

TEST(Core, UnstableDriftRejected) {
  Mat A = Mat::Identity(2, 2);
  try {
    check_stable(A, "test");
    FAIL() << "expected an exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnstableModel);
  }
}

TEST(Core, InvalidRatesRejected) {
  EXPECT_THROW(displacement_model({-1.0, 0.01, 1.0, Coupling::from_C(1.0)}, BathSpec{}), Error);
  EXPECT_THROW(displacement_model({1.0, 0.0, 1.0, Coupling::from_C(1.0)}, BathSpec{}), Error);
  EXPECT_THROW(Coupling::from_C(-1.0), Error);
}

TEST(Core, BathValidation) {
  BathSpec b = BathSpec::thermal(1.0);
  b.m_sq = cplx(2.0, 0.0);
  EXPECT_THROW(b.validate(), Error);
  b.m_sq = cplx(1.0, 0.5);
  EXPECT_NO_THROW(b.validate());
  EXPECT_DOUBLE_EQ(b.Vx(), 2.5);
  EXPECT_DOUBLE_EQ(b.Vp(), 0.5);
  EXPECT_DOUBLE_EQ(b.Vxp(), 0.5);
}

TEST(Core, DetectionLossAtZeroEfficiencyRemovesTransfer) {
  BathSpec b = BathSpec::thermal(1.0);
  b.eta = 0.0;
  const auto f = evaluate(ideal_qnd_model(10.0, 0.01, Coupling::from_C(1.0), b), 0.0);
  EXPECT_NEAR(f.Tm, 0.0, 1e-14);
  EXPECT_NEAR(f.Vc, b.Vx(), 1e-12);
}
