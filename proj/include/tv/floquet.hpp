#pragma once

#include <cmath>
#include <vector>

#include "tv/core.hpp"
#include "tv/metrics.hpp"
#include "tv/models.hpp"

namespace tv {

struct FloquetDrift {
  CMat A_minus;
  Mat A_zero;
  CMat A_plus;
  double omega_m = 1.0;
  int order = 1;
};

struct FloquetParams {
  double kappa = 0.5;
  double gamma = 0.01;
  double omega_m = 1.0;
  Coupling coupling = Coupling::from_C(0.0);
  int order = 1;
};

// Incoherent sums sideband noise powers; Coherent adds the sideband matrices first
enum class FloquetAssembly { Incoherent, Coherent };

inline FloquetDrift decompose_drift(const FloquetParams& p) {
  require_rates(p.kappa, p.gamma);
  require(p.omega_m > 0.0, "omega_m must be positive");
  require(p.order >= 0, "Floquet order must be nonnegative");
  const double g = p.coupling.g(p.kappa, p.gamma);
  FloquetDrift fd;
  fd.omega_m = p.omega_m;
  fd.order = p.order;
  fd.A_zero = Mat::Zero(4, 4);
  fd.A_zero(0, 0) = fd.A_zero(1, 1) = -p.kappa / 2;
  fd.A_zero(2, 2) = fd.A_zero(3, 3) = -p.gamma / 2;
  fd.A_zero(1, 2) = fd.A_zero(3, 0) = -2 * g;
  const cplx i(0.0, 1.0);
  fd.A_plus = CMat::Zero(4, 4);
  fd.A_plus(1, 2) = -g;
  fd.A_plus(1, 3) = -i * g;
  fd.A_plus(2, 0) = i * g;
  fd.A_plus(3, 0) = -g;
  fd.A_minus = fd.A_plus.conjugate();
  return fd;
}

// real drift A(t) reconstructed from the harmonic components
inline Mat drift_at(const FloquetDrift& fd, double t) {
  const cplx e = std::exp(cplx(0.0, 2.0 * fd.omega_m * t));
  CMat A = fd.A_minus * std::conj(e) + fd.A_zero.cast<cplx>() + fd.A_plus * e;
  return A.real();
}

inline Vec floquet_coupling_diag(const FloquetParams& p) {
  Vec h(4);
  h << std::sqrt(p.kappa), std::sqrt(p.kappa), std::sqrt(p.gamma), std::sqrt(p.gamma);
  return h;
}

// block-tridiagonal solve over harmonics -N..N with the input entering block 0
inline CMat floquet_response(const FloquetDrift& fd, const Vec& h, double omega) {
  const int N = fd.order, nb = 2 * N + 1;
  CMat M = CMat::Zero(4 * nb, 4 * nb);
  for (int b = 0; b < nb; ++b) {
    const int n = b - N;
    CMat D = fd.A_zero.cast<cplx>();
    D.diagonal().array() += cplx(0.0, omega - 2.0 * n * fd.omega_m);
    M.block(4 * b, 4 * b, 4, 4) = D;
    if (b + 1 < nb) M.block(4 * b, 4 * (b + 1), 4, 4) = fd.A_minus;
    if (b > 0) M.block(4 * b, 4 * (b - 1), 4, 4) = fd.A_plus;
  }
  Eigen::PartialPivLU<CMat> lu(M);
  if (!(lu.rcond() >= kRcondTol))
    throw Error(ErrorKind::SingularAtFrequency, "Floquet block system singular at w = " + std::to_string(omega));
  CMat rhs = CMat::Zero(4 * nb, 4);
  rhs.block(4 * N, 0, 4, 4) = (-h).cast<cplx>().asDiagonal().toDenseMatrix();
  return lu.solve(rhs);
}

struct FloquetScattering {
  std::vector<CMat> sidebands;  // index n + order
  double omega = 0.0;
  int order = 1;

  const CMat& at(int n) const { return sidebands.at(n + order); }
  CMat coherent_sum() const {
    CMat S = CMat::Zero(sidebands.front().rows(), sidebands.front().cols());
    for (const auto& s : sidebands) S += s;
    return S;
  }
};

// sideband n maps inputs at omega + 2 n omega_m onto the output at omega
inline FloquetScattering floquet_scattering(const FloquetDrift& fd, const Vec& h, double omega) {
  FloquetScattering out;
  out.omega = omega;
  out.order = fd.order;
  const CMat H = h.cast<cplx>().asDiagonal();
  for (int n = -fd.order; n <= fd.order; ++n) {
    const CMat G = floquet_response(fd, h, omega + 2.0 * n * fd.omega_m);
    CMat S = H * G.block(4 * (n + fd.order), 0, 4, 4);
    if (n == 0) S -= CMat::Identity(4, 4);
    out.sidebands.push_back(std::move(S));
  }
  return out;
}

// meter rows scaled by sqrt(eta); ancilla vacuum only enters through the carrier
inline FloquetScattering apply_floquet_loss(FloquetScattering fs, double eta, int meter) {
  require(eta >= 0.0 && eta <= 1.0, "eta must lie in [0, 1]");
  const int r0 = meter - meter % 2;
  for (int n = -fs.order; n <= fs.order; ++n) {
    CMat& S = fs.sidebands[n + fs.order];
    CMat W = CMat::Zero(S.rows(), S.cols() + 2);
    W.leftCols(S.cols()) = S;
    for (int k = 0; k < 2; ++k) {
      W.row(r0 + k).head(S.cols()) *= std::sqrt(eta);
      if (n == 0) W(r0 + k, S.cols() + k) = std::sqrt(1.0 - eta);
    }
    S = std::move(W);
  }
  return fs;
}

inline Mat floquet_output_covariance(const FloquetScattering& fs, const Mat& Vin, FloquetAssembly assembly) {
  if (assembly == FloquetAssembly::Coherent) return output_covariance(ScatteringMatrix{fs.coherent_sum(), fs.omega}, Vin);
  Mat V = Mat::Zero(fs.sidebands.front().rows(), fs.sidebands.front().rows());
  for (const auto& s : fs.sidebands) V += output_covariance(ScatteringMatrix{s, fs.omega}, Vin);
  return V;
}

inline MeasurementFigures floquet_metrics(const FloquetParams& p, const BathSpec& bath, double omega,
                                          FloquetAssembly assembly = FloquetAssembly::Incoherent) {
  const FloquetDrift fd = decompose_drift(p);
  check_stable(fd.A_zero, "Floquet carrier");
  const auto L = ModeLayout::optomech();
  FloquetScattering fs = floquet_scattering(fd, floquet_coupling_diag(p), omega);
  Mat Vin = input_covariance(bath, L);
  if (bath.eta != 1.0) {
    fs = apply_floquet_loss(std::move(fs), bath.eta, L.meter);
    Mat W = Mat::Zero(6, 6);
    W.topLeftCorner(4, 4) = Vin;
    W(4, 4) = W(5, 5) = bath.n_c + 0.5;
    Vin = W;
  }
  if (assembly == FloquetAssembly::Coherent) {
    const ScatteringMatrix S{fs.coherent_sum(), omega};
    return figures_from(S, Vin, L, conditional_variance_factored({S.S}, Vin, L.signal, {L.meter}));
  }
  const Mat V = floquet_output_covariance(fs, Vin, assembly);
  const double Vc = conditional_variance_factored(fs.sidebands, Vin, L.signal, {L.meter});

  // signal power carried by the carrier only; everything else counts as noise
  const double Vx = Vin(L.signal, L.signal);
  const CMat& S0 = fs.at(0);
  auto neq = [&](int r) {
    const double path = std::norm(S0(r, L.signal));
    if (std::sqrt(path) < kZeroPath) return std::numeric_limits<double>::infinity();
    return V(r, r) / path - Vx;
  };
  MeasurementFigures f;
  f.omega = omega;
  f.Vc = Vc;
  f.ns_eq = neq(L.signal);
  f.nm_eq = neq(L.meter);
  f.Ts = transfer_coefficient(Vx, f.ns_eq);
  f.Tm = transfer_coefficient(Vx, f.nm_eq);
  f.regime = classify_regime(f.Vc, f.Ts, f.Tm);
  return f;
}

// closed forms for the n in {-1,0,1} truncation, valid for gamma << kappa, omega_m
inline MeasurementFigures floquet_qnd_metrics_closed(double C, double kappa, double omega_m, double Vx) {
  const double den = kappa * kappa + 16.0 * omega_m * omega_m;
  const double r = kappa * kappa / den;
  const double q = 4.0 * kappa * omega_m / den;
  const double iv = 1.0 / Vx;
  const double Vc = (1.0 + (8.0 * C + iv) * 4.0 * C * r) / (iv + 32.0 * C + iv * 32.0 * C * C * r);
  const double Ts = 1.0 / (1.0 + 8.0 * iv * q * q);
  const double Tm = 32.0 * C / (32.0 * C + iv * (1.0 + 64.0 * (C * q) * (C * q)));
  return make_figures(Vc, Ts, Tm, Vx);
}

inline bool floquet_closed_form_valid(double gamma, double kappa, double omega_m) {
  return gamma < 0.1 * std::min(kappa, omega_m);
}

}  // namespace tv
