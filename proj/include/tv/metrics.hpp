#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tv/core.hpp"

namespace tv {

enum class Regime { Classical, IDT, QSP, QND };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Classical: return "Classical";
    case Regime::IDT: return "IDT";
    case Regime::QSP: return "QSP";
    case Regime::QND: return "QND";
  }
  return "Unknown";
}

// MeterAncilla keeps the meter/ancilla cross term; MeterAncillaSimplified drops it
enum class Conditioning { MeterOnly, MeterAncilla, MeterAncillaSimplified };

struct MeasurementFigures {
  double omega = 0.0;
  double Vc = 0.0;
  double Ts = 0.0;
  double Tm = 0.0;
  double ns_eq = 0.0;
  double nm_eq = 0.0;
  Regime regime = Regime::Classical;

  double T_sum() const { return Ts + Tm; }
};

inline constexpr double kZeroPath = 1e-14;
inline constexpr double kVcClamp = 1e-12;

inline Regime classify_regime(double Vc, double Ts, double Tm) {
  const bool squeezed = Vc < 0.5;
  const bool transfer = Ts + Tm > 1.0;
  if (squeezed && transfer) return Regime::QND;
  if (squeezed) return Regime::QSP;
  if (transfer) return Regime::IDT;
  return Regime::Classical;
}

inline double clamp_vc(double vc, double scale) {
  if (vc < 0.0 && vc > -kVcClamp * std::max(1.0, scale)) return 0.0;
  return vc;
}

inline double conditional_variance(const Mat& V, int signal, int meter) {
  const double m = V(meter, meter);
  if (!(m > kZeroPath)) throw Error(ErrorKind::DegenerateMeter, "meter variance " + std::to_string(m));
  const double s = V(signal, signal);
  return clamp_vc(s - V(signal, meter) * V(signal, meter) / m, s);
}

inline double conditional_variance(const Mat& V, const ModeLayout& layout) {
  return conditional_variance(V, layout.signal, layout.meter);
}

// joint conditioning on the meter and an ancilla quadrature
inline double cqnc_conditional_variance(const Mat& V, int signal, int meter, int ancilla, bool keep_cross_term = true) {
  const double v22 = V(meter, meter), v55 = V(ancilla, ancilla);
  if (!(v22 > kZeroPath) || !(v55 > kZeroPath))
    throw Error(ErrorKind::DegenerateMeter, "meter or ancilla variance vanishes");
  const double v33 = V(signal, signal), v23 = V(signal, meter), v35 = V(signal, ancilla);
  if (!keep_cross_term) return clamp_vc(v33 - v23 * v23 / v22 - v35 * v35 / v55, v33);
  const double v25 = V(meter, ancilla);
  const double det = v22 * v55 - v25 * v25;
  if (!(det > kZeroPath * v22 * v55))
    throw Error(ErrorKind::DegenerateMeter, "meter and ancilla outputs are linearly dependent");
  return clamp_vc(v33 - (v22 * v35 * v35 + v23 * v23 * v55 - 2.0 * v23 * v25 * v35) / det, v33);
}

// conditional variance from the factored covariance V = Re(M M^H), M = [S_k L] stacked over
// blocks, Vin = L L^T; the QR residual avoids the cancellation in V33 - V32^2/V22
inline double conditional_variance_factored(const std::vector<CMat>& blocks, const Mat& Vin, int signal,
                                            const std::vector<int>& conditioners) {
  require(!blocks.empty(), "no scattering blocks");
  Eigen::LLT<Mat> llt(Vin);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::InvalidArgument, "input covariance is not positive definite");
  const Mat L = llt.matrixL();
  const int cols = static_cast<int>(Vin.rows());
  const int k = static_cast<int>(conditioners.size());
  Mat R(2 * cols * static_cast<int>(blocks.size()), k + 1);
  int off = 0;
  for (const auto& S : blocks) {
    require(S.cols() == cols, "Vin does not match scattering columns");
    for (int c = 0; c <= k; ++c) {
      const int row = c < k ? conditioners[c] : signal;
      const Eigen::RowVectorXcd m = S.row(row) * L.cast<cplx>();
      R.block(off, c, cols, 1) = m.real().transpose();
      R.block(off + cols, c, cols, 1) = m.imag().transpose();
    }
    off += 2 * cols;
  }
  Eigen::HouseholderQR<Mat> qr(R);
  const Mat T = qr.matrixQR().topRows(k + 1).triangularView<Eigen::Upper>();
  double det = 1.0, diag = 1.0;
  for (int c = 0; c < k; ++c) {
    det *= T(c, c) * T(c, c);
    diag *= R.col(c).squaredNorm();
  }
  if (!(diag > 0.0) || !(det > kZeroPath * diag) || (k == 1 && !(diag > kZeroPath)))
    throw Error(ErrorKind::DegenerateMeter, "conditioning outputs vanish or are linearly dependent");
  const double s = R.col(k).squaredNorm();
  return clamp_vc(T(k, k) * T(k, k), s);
}

// noise referred to the signal input; +inf when the signal path vanishes
inline double equivalent_noise(const CMat& S, const Mat& Vin, int row, int signal) {
  const double path = std::norm(S(row, signal));
  if (std::sqrt(path) < kZeroPath) return std::numeric_limits<double>::infinity();
  Mat W = Vin;
  W(signal, signal) = 0.0;
  const cplx n = S.row(row) * W.cast<cplx>() * S.row(row).adjoint();
  return n.real() / path;
}

inline double transfer_coefficient(double Vx, double n_eq) {
  if (!std::isfinite(n_eq)) return 0.0;
  return Vx / (Vx + n_eq);
}

struct EquivalentNoises {
  double ns_eq;
  double nm_eq;
};

inline EquivalentNoises equivalent_noises(const ScatteringMatrix& S, const Mat& Vin, const ModeLayout& layout) {
  return {equivalent_noise(S.S, Vin, layout.signal, layout.signal),
          equivalent_noise(S.S, Vin, layout.meter, layout.signal)};
}

inline MeasurementFigures figures_from(const ScatteringMatrix& S, const Mat& Vin, const ModeLayout& layout,
                                       double Vc) {
  MeasurementFigures f;
  f.omega = S.omega;
  f.Vc = Vc;
  const auto n = equivalent_noises(S, Vin, layout);
  f.ns_eq = n.ns_eq;
  f.nm_eq = n.nm_eq;
  const double Vx = Vin(layout.signal, layout.signal);
  f.Ts = transfer_coefficient(Vx, n.ns_eq);
  f.Tm = transfer_coefficient(Vx, n.nm_eq);
  f.regime = classify_regime(f.Vc, f.Ts, f.Tm);
  return f;
}

// ancilla_index is only read for the two ancilla conditioning modes
inline MeasurementFigures evaluate(const LinearModel& model, double omega,
                                   Conditioning cond = Conditioning::MeterOnly, int ancilla_index = 4) {
  const ScatteringMatrix S = build_scattering(model, omega);
  const auto& L = model.layout;
  double Vc = 0.0;
  if (cond == Conditioning::MeterOnly) {
    Vc = conditional_variance_factored({S.S}, model.Vin, L.signal, {L.meter});
  } else {
    require(ancilla_index >= 0 && ancilla_index < model.dim(), "ancilla index out of range");
    if (cond == Conditioning::MeterAncilla) {
      Vc = conditional_variance_factored({S.S}, model.Vin, L.signal, {L.meter, ancilla_index});
    } else {
      const Mat V = output_covariance(S, model.Vin);
      Vc = cqnc_conditional_variance(V, L.signal, L.meter, ancilla_index, false);
    }
  }
  return figures_from(S, model.Vin, L, Vc);
}

}  // namespace tv
