#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "tv/errors.hpp"

namespace tv {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

inline constexpr double kStabilityTol = 1e-10;
inline constexpr double kRcondTol = 1e-12;
inline constexpr double kHermitianTol = 1e-10;

inline void require_rates(double kappa, double gamma) {
  require(kappa > 0.0 && std::isfinite(kappa), "kappa must be positive");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma must be positive");
}

struct ModeLayout {
  std::vector<std::string> labels;
  int signal = 2;
  int meter = 1;
  int conjugate = 3;

  int size() const { return static_cast<int>(labels.size()); }
  int modes() const { return size() / 2; }

  void validate() const {
    const int n = size();
    require(n > 0 && n % 2 == 0, "layout needs an even, nonzero number of quadratures");
    auto in_range = [n](int i) { return i >= 0 && i < n; };
    require(in_range(signal) && in_range(meter) && in_range(conjugate), "layout index out of range");
    require(signal != meter && signal != conjugate && meter != conjugate, "layout indices must be distinct");
  }

  static ModeLayout optomech() { return {{"X", "Y", "x", "p"}, 2, 1, 3}; }
};

struct BathSpec {
  double n_m = 0.0;
  cplx m_sq = 0.0;
  double n_c = 0.0;
  double eta = 1.0;

  double Vx() const { return n_m + m_sq.real() + 0.5; }
  double Vp() const { return n_m - m_sq.real() + 0.5; }
  double Vxp() const { return m_sq.imag(); }

  void validate() const {
    require(n_m >= 0.0, "n_m must be nonnegative");
    require(n_c >= 0.0, "n_c must be nonnegative");
    require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
    require(std::norm(m_sq) <= n_m * (n_m + 1.0) * (1.0 + 1e-12) + 1e-15,
            "|m_sq|^2 must not exceed n_m (n_m + 1)");
  }

  static BathSpec thermal(double n_m) {
    BathSpec b;
    b.n_m = n_m;
    return b;
  }
};

struct LinearModel {
  Mat A;
  Vec h;        // diagonal of the input-coupling matrix
  Mat Vin;      // includes ancilla channels when loss-augmented
  ModeLayout layout;
  double eta = 1.0;
  std::vector<int> lossy_rows;  // rows mixed with ancilla vacuum

  int dim() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(Vin.rows()); }
};

struct ScatteringMatrix {
  CMat S;
  double omega = 0.0;
};

inline double max_real_eigenvalue(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().real().maxCoeff();
}

inline void check_stable(const Mat& A, const std::string& who) {
  const double re = max_real_eigenvalue(A);
  if (!(re < -kStabilityTol))
    throw Error(ErrorKind::UnstableModel, who + ": drift eigenvalue with real part " + std::to_string(re));
}

// vacuum-normalized block for a mode in a thermal-squeezed bath
inline Eigen::Matrix2d mechanical_block(const BathSpec& b) {
  Eigen::Matrix2d m;
  m << b.Vx(), b.Vxp(), b.Vxp(), b.Vp();
  return m;
}

inline Mat input_covariance(const BathSpec& bath, const ModeLayout& layout) {
  bath.validate();
  layout.validate();
  const int n = layout.size();
  Mat V = Mat::Identity(n, n) * (bath.n_c + 0.5);
  const int m0 = layout.signal - layout.signal % 2;
  V.block<2, 2>(m0, m0) = mechanical_block(bath);
  return V;
}

inline CMat scattering_core(const Mat& A, const Vec& h, double omega) {
  const int n = static_cast<int>(A.rows());
  CMat M = A.cast<cplx>();
  M.diagonal().array() += cplx(0.0, omega);
  Eigen::PartialPivLU<CMat> lu(M);
  if (!(lu.rcond() >= kRcondTol))
    throw Error(ErrorKind::SingularAtFrequency, "A + i w I singular at w = " + std::to_string(omega));
  const CMat H = h.cast<cplx>().asDiagonal();
  CMat S = -(H * lu.solve(H) + CMat::Identity(n, n));
  return S;
}

inline ScatteringMatrix build_scattering(const LinearModel& model, double omega) {
  CMat core = scattering_core(model.A, model.h, omega);
  const int n = model.dim();
  const int k = static_cast<int>(model.lossy_rows.size());
  if (k == 0) return {core, omega};
  CMat S = CMat::Zero(n, n + k);
  S.leftCols(n) = core;
  const double se = std::sqrt(model.eta), sl = std::sqrt(1.0 - model.eta);
  for (int i = 0; i < k; ++i) {
    const int r = model.lossy_rows[i];
    S.row(r).head(n) *= se;
    S(r, n + i) = sl;
  }
  return {S, omega};
}

inline Mat hermitian_real_part(const CMat& V) {
  const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
  const double residue = V.imag().cwiseAbs().maxCoeff();
  if (residue > kHermitianTol * scale)
    throw Error(ErrorKind::NonHermitianResult, "imaginary residue " + std::to_string(residue));
  Mat R = V.real();
  return 0.5 * (R + R.transpose());
}

// symmetrized two-frequency rule; S_minus is the matrix evaluated at -omega
inline Mat output_covariance(const ScatteringMatrix& S_plus, const ScatteringMatrix& S_minus, const Mat& Vin) {
  require(S_plus.S.cols() == Vin.rows() && S_minus.S.cols() == Vin.rows(), "Vin does not match scattering columns");
  const CMat Vc = Vin.cast<cplx>();
  CMat V = 0.5 * (S_plus.S * Vc * S_minus.S.transpose() + S_minus.S * Vc * S_plus.S.transpose());
  return hermitian_real_part(V);
}

// S(-w) = conj S(w) for real A and H
inline Mat output_covariance(const ScatteringMatrix& S, const Mat& Vin) {
  return output_covariance(S, ScatteringMatrix{S.S.conjugate(), -S.omega}, Vin);
}

inline LinearModel apply_detection_loss(LinearModel model, double eta) {
  require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  require(model.lossy_rows.empty(), "model already carries detection loss");
  const int n = model.dim();
  const int r0 = model.layout.meter - model.layout.meter % 2;
  model.lossy_rows = {r0, r0 + 1};
  model.eta = eta;
  Mat V = Mat::Zero(n + 2, n + 2);
  V.topLeftCorner(n, n) = model.Vin;
  V.bottomRightCorner(2, 2) = model.Vin.block(r0, r0, 2, 2);
  model.Vin = V;
  return model;
}

inline Mat diffusion(const LinearModel& model) {
  const int n = model.dim();
  return model.h.asDiagonal() * model.Vin.topLeftCorner(n, n) * model.h.asDiagonal();
}

// solves A V + V A^T + D = 0 through the vectorized Kronecker system
inline Mat lyapunov_steady_state(const Mat& A, const Mat& D) {
  const int n = static_cast<int>(A.rows());
  const Mat I = Mat::Identity(n, n);
  Mat K = Eigen::kroneckerProduct(I, A) + Eigen::kroneckerProduct(A, I);
  Vec d = Eigen::Map<const Vec>(D.data(), n * n);
  Eigen::PartialPivLU<Mat> lu(K);
  if (!(lu.rcond() >= kRcondTol * 1e-4))
    throw Error(ErrorKind::UnstableModel, "Lyapunov operator is singular");
  Vec v = lu.solve(-d);
  Mat V = Eigen::Map<Mat>(v.data(), n, n);
  return 0.5 * (V + V.transpose());
}

inline double lyapunov_residual(const Mat& A, const Mat& V, const Mat& D) {
  return (A * V + V * A.transpose() + D).cwiseAbs().maxCoeff();
}

}  // namespace tv
