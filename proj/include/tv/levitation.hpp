#pragma once

#include <cmath>
#include <optional>

#include "tv/core.hpp"
#include "tv/metrics.hpp"
#include "tv/models.hpp"

namespace tv {

inline double qnd_modulation_frequency(double omega_m, double alpha) {
  require(alpha >= 0.0, "modulation depth must be nonnegative");
  const double a2 = alpha * alpha;
  return omega_m * (16.0 + 7.0 * a2) / (16.0 + 8.0 * a2);
}

inline double renormalized_frequency(double omega_tr, double alpha) {
  return omega_tr * std::sqrt(1.0 + 0.5 * alpha * alpha);
}

struct TweezerParams {
  double omega_m = 1.0;
  double alpha = 0.2;
  double phi = 0.0;
  double g = 0.0;
  std::optional<double> Omega;  // defaults to the QND modulation frequency
  double kappa = 1.0;
  double gamma = 1e-9;

  double modulation() const { return Omega.value_or(qnd_modulation_frequency(omega_m, alpha)); }
};

// quadratic terms of the rotating-frame Hamiltonian expressed as mu x^2 + nu p^2
inline ImperfectQndParams single_tweezer_mapping(const TweezerParams& p) {
  require(p.alpha >= 0.0, "modulation depth must be nonnegative");
  const double a2 = p.alpha * p.alpha * p.omega_m / (16.0 * (2.0 + p.alpha * p.alpha));
  const double free = 0.5 * (p.omega_m - p.modulation());
  ImperfectQndParams q;
  q.kappa = p.kappa;
  q.gamma = p.gamma;
  q.coupling = Coupling::from_g(-p.alpha * p.g / 4.0);
  q.mu = free + a2;
  q.nu = free - a2;
  return q;
}

inline BathSpec rotate_bath(const BathSpec& bath, double phi) {
  if (phi == 0.0) return bath;
  // b -> b exp(i phi) under x_phi = x cos(phi) - p sin(phi)
  BathSpec b = bath;
  b.m_sq = bath.m_sq * std::exp(cplx(0.0, 2.0 * phi));
  return b;
}

inline LinearModel single_tweezer_qnd_model(const TweezerParams& p, const BathSpec& bath) {
  return imperfect_qnd_model(single_tweezer_mapping(p), rotate_bath(bath, p.phi));
}

struct DualTweezerParams {
  double omega_m = 1.0;
  double gamma = 1e-9;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double alpha1 = 0.2;
  double alpha2 = 0.2;
  std::optional<double> omega_tr1;
  std::optional<double> omega_tr2;

  double C1() const { return g1 * g1 / (4.0 * gamma * kappa1); }
  double C2() const { return g2 * g2 / (4.0 * gamma * kappa2); }
  void set_C1(double C) { g1 = std::sqrt(4.0 * gamma * kappa1 * C); }
  void set_C2(double C) { g2 = std::sqrt(4.0 * gamma * kappa2 * C); }

  // equal trap frequencies unless given
  double trap1() const { return omega_tr1.value_or(default_trap()); }
  double trap2() const { return omega_tr2.value_or(default_trap()); }
  double alpha_tilde1() const { return alpha1 * trap1() * trap1() / (4.0 * omega_m); }
  double alpha_tilde2() const { return alpha2 * alpha2 * trap2() * trap2() / (16.0 * omega_m); }
  double gamma_m() const { return gamma + g1 * g1 * (1.0 - alpha1 * alpha1 / 4.0) / kappa1; }

  // split of a fixed total coupling g_T^2 = g1^2 + g2^2
  static DualTweezerParams with_total_coupling(DualTweezerParams p, double g_total, double readout_fraction) {
    require(readout_fraction >= 0.0 && readout_fraction <= 1.0, "readout fraction must lie in [0, 1]");
    p.g2 = g_total * std::sqrt(readout_fraction);
    p.g1 = g_total * std::sqrt(1.0 - readout_fraction);
    return p;
  }

  void validate() const {
    require_rates(kappa1, gamma);
    require_rates(kappa2, gamma);
    require(omega_m > 0.0, "omega_m must be positive");
    require(alpha1 >= 0.0 && alpha2 >= 0.0, "modulation depths must be nonnegative");
  }

 private:
  double default_trap() const {
    return omega_m / std::sqrt(2.0 + 0.5 * (alpha1 * alpha1 + alpha2 * alpha2));
  }
};

inline const ModeLayout& dual_layout() {
  static const ModeLayout L{{"X1", "Y1", "X2", "Y2", "x", "p"}, 4, 3, 5};
  return L;
}

inline LinearModel dual_tweezer_model(const DualTweezerParams& p, const BathSpec& bath) {
  p.validate();
  bath.validate();
  const double k1 = p.kappa1, k2 = p.kappa2, y = p.gamma;
  const double am = 0.25 * (p.alpha1 - 2.0) * p.g1, ap = 0.25 * (p.alpha1 + 2.0) * p.g1;
  const double r = 0.5 * p.alpha2 * p.g2;
  const double sq = -4.0 * (p.alpha_tilde1() + p.alpha_tilde2());
  Mat A(6, 6);
  A << -k1 / 2, 0, 0, 0, 0, am,
       0, -k1 / 2, 0, 0, ap, 0,
       0, 0, -k2 / 2, 0, 0, 0,
       0, 0, 0, -k2 / 2, r, 0,
       0, am, 0, 0, -y / 2, 0,
       ap, 0, r, 0, sq, -y / 2;
  Vec h(6);
  h << std::sqrt(k1), std::sqrt(k1), std::sqrt(k2), std::sqrt(k2), std::sqrt(y), std::sqrt(y);
  Mat Vin = Mat::Identity(6, 6) * (bath.n_c + 0.5);
  Vin.block<2, 2>(4, 4) = mechanical_block(bath);
  LinearModel m{A, h, Vin, dual_layout(), 1.0, {}};
  check_stable(m.A, "dual tweezer");
  if (bath.eta != 1.0) m = apply_detection_loss(std::move(m), bath.eta);
  return m;
}

struct CompoundVariances {
  double gamma_m;
  double barVx;
  double barVp;
  double barVxp;
};

inline CompoundVariances compound_signal_variances(const DualTweezerParams& p, const BathSpec& bath) {
  const double gm = p.gamma_m();
  if (!(gm > 0.0)) throw Error(ErrorKind::NegativeLinewidth, "gamma_m = " + std::to_string(gm));
  const double r = p.gamma / gm, q = p.g1 * p.g1 / (8.0 * gm * p.kappa1);
  return {gm, r * bath.Vx() + q * std::pow(2.0 - p.alpha1, 2), r * bath.Vp() + q * std::pow(2.0 + p.alpha1, 2),
          r * bath.Vxp()};
}

// covariance of (X2_in, Y2_in, xbar_in, pbar_in) at frequency omega
inline Mat compound_input_covariance(const DualTweezerParams& p, const BathSpec& bath, double omega) {
  const double gm = p.gamma_m();
  if (!(gm > 0.0)) throw Error(ErrorKind::NegativeLinewidth, "gamma_m = " + std::to_string(gm));
  const double chi1 = 1.0 / (p.kappa1 * p.kappa1 + 4.0 * omega * omega);  // |chi_1|^2
  const double opt = p.g1 * p.g1 * chi1 * p.kappa1 * (bath.n_c + 0.5);
  Mat V = Mat::Zero(4, 4);
  V(0, 0) = V(1, 1) = bath.n_c + 0.5;
  V(2, 2) = (opt * std::pow(2.0 - p.alpha1, 2) + 4.0 * p.gamma * bath.Vx()) / (4.0 * gm);
  V(3, 3) = (opt * std::pow(2.0 + p.alpha1, 2) + 4.0 * p.gamma * bath.Vp()) / (4.0 * gm);
  V(2, 3) = V(3, 2) = p.gamma * bath.Vxp() / gm;
  return V;
}

inline CMat reduced_scattering(const DualTweezerParams& p, double omega) {
  const double gm = p.gamma_m();
  if (!(gm > 0.0)) throw Error(ErrorKind::NegativeLinewidth, "gamma_m = " + std::to_string(gm));
  const cplx i(0.0, 1.0);
  const double k2 = p.kappa2;
  const cplx Km = (k2 + 2.0 * i * omega) / (k2 - 2.0 * i * omega);
  const cplx Gm = (gm + 2.0 * i * omega) / (gm - 2.0 * i * omega);
  const cplx chi2 = 1.0 / (k2 - 2.0 * i * omega);
  const cplx chim = 1.0 / (gm - 2.0 * i * omega);
  const cplx sm = 2.0 * p.g2 * p.alpha2 * chi2 * chim * std::sqrt(gm * k2);
  const cplx Om = -16.0 * (p.alpha_tilde1() + p.alpha_tilde2()) * gm * chim * chim;
  CMat S(4, 4);
  S << Km, 0.0, 0.0, 0.0,
       0.0, Km, sm, 0.0,
       0.0, 0.0, Gm, 0.0,
       sm, 0.0, Om, Gm;
  return S;
}

inline MeasurementFigures reduced_metrics(const DualTweezerParams& p, const BathSpec& bath, double omega) {
  const ScatteringMatrix S{reduced_scattering(p, omega), omega};
  const Mat Vin = compound_input_covariance(p, bath, omega);
  const ModeLayout L = ModeLayout::optomech();
  return figures_from(S, Vin, L, conditional_variance_factored({S.S}, Vin, L.signal, {L.meter}));
}

inline double dual_D(double C1, double alpha1) { return 1.0 + C1 * (4.0 - alpha1 * alpha1); }

inline MeasurementFigures dual_tweezer_metrics(double C1, double C2, double alpha1, double alpha2, double Vxs) {
  require(C1 >= 0.0 && C2 >= 0.0, "cooperativities must be nonnegative");
  require(Vxs > 0.0, "signal variance must be positive");
  const double D = dual_D(C1, alpha1);
  const double k = 32.0 * alpha2 * alpha2 * C2;
  const double den = D / Vxs + k;
  return make_figures(D / den, 1.0, k / den, Vxs);
}

inline double dual_tweezer_threshold(double C1, double alpha1, double alpha2, double Vx) {
  const double a1 = alpha1 * alpha1;
  const double D = dual_D(C1, alpha1);
  return D * (2.0 * Vx - C1 * a1 * (3.0 - a1) - 1.0) /
         (16.0 * alpha2 * alpha2 * (2.0 * Vx + C1 * std::pow(2.0 - a1, 2)));
}

// signal variance for which the threshold formula is the exact V_c = 1/2 crossing
inline double threshold_signal_variance(double C1, double alpha1, double Vx) {
  return (Vx + 0.5 * C1 * std::pow(2.0 - alpha1 * alpha1, 2)) / dual_D(C1, alpha1);
}

inline double dual_tweezer_threshold_exact(double C1, double alpha1, double alpha2, double Vxs) {
  return dual_D(C1, alpha1) * (2.0 * Vxs - 1.0) / (32.0 * alpha2 * alpha2 * Vxs);
}

}  // namespace tv
