#pragma once

#include <cmath>
#include <optional>

#include "tv/core.hpp"
#include "tv/metrics.hpp"

namespace tv {

// exactly one of g or C; converted with C = 4 g^2 / (kappa gamma)
class Coupling {
 public:
  static Coupling from_g(double g) { return Coupling(g, false); }
  static Coupling from_C(double C) {
    require(C >= 0.0, "cooperativity must be nonnegative");
    return Coupling(C, true);
  }

  double g(double kappa, double gamma) const { return is_C_ ? std::sqrt(value_ * kappa * gamma / 4.0) : value_; }
  double C(double kappa, double gamma) const { return is_C_ ? value_ : 4.0 * value_ * value_ / (kappa * gamma); }
  bool given_as_C() const { return is_C_; }

 private:
  Coupling(double v, bool c) : value_(v), is_C_(c) {}
  double value_;
  bool is_C_;
};

struct DisplacementParams {
  double kappa = 10.0;
  double gamma = 0.01;
  double omega_m = 1.0;
  Coupling coupling = Coupling::from_C(0.0);
};

struct ImperfectQndParams {
  double kappa = 10.0;
  double gamma = 0.01;
  Coupling coupling = Coupling::from_C(0.0);
  double delta_c = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double xi = 0.0;

  double delta_m() const { return mu + nu; }
  double zeta() const { return mu - nu; }
  // free oscillation delta_m and squeezing zeta stored as (mu, nu)
  void set_oscillation_squeezing(double dm, double z) {
    mu = 0.5 * (dm + z);
    nu = 0.5 * (dm - z);
  }
  bool compensated() const { return nu == 0.0; }
};

struct CqncParams {
  double kappa = 10.0;
  double gamma = 0.01;
  double omega_m = 1.0;
  Coupling coupling = Coupling::from_C(0.0);
  std::optional<double> n_aux;
};

inline LinearModel finish_model(Mat A, Vec h, Mat Vin, ModeLayout layout, const BathSpec& bath, const char* who) {
  LinearModel m{std::move(A), std::move(h), std::move(Vin), std::move(layout), 1.0, {}};
  check_stable(m.A, who);
  if (bath.eta != 1.0) m = apply_detection_loss(std::move(m), bath.eta);
  return m;
}

inline LinearModel displacement_model(const DisplacementParams& p, const BathSpec& bath) {
  require_rates(p.kappa, p.gamma);
  require(p.omega_m >= 0.0, "omega_m must be nonnegative");
  const double k = p.kappa, y = p.gamma, g = p.coupling.g(k, y);
  Mat A(4, 4);
  A << -k / 2, 0, 0, 0,
       0, -k / 2, -2 * g, 0,
       0, 0, -y / 2, p.omega_m,
       -2 * g, 0, -p.omega_m, -y / 2;
  Vec h(4);
  h << std::sqrt(k), std::sqrt(k), std::sqrt(y), std::sqrt(y);
  const auto L = ModeLayout::optomech();
  return finish_model(A, h, input_covariance(bath, L), L, bath, "displacement");
}

inline LinearModel ideal_qnd_model(double kappa, double gamma, Coupling c, const BathSpec& bath) {
  return displacement_model({kappa, gamma, 0.0, c}, bath);
}

inline LinearModel imperfect_qnd_model(const ImperfectQndParams& p, const BathSpec& bath) {
  require_rates(p.kappa, p.gamma);
  const double k = p.kappa, y = p.gamma, g = p.coupling.g(k, y);
  Mat A(4, 4);
  A << -k / 2, p.delta_c, 0, 0,
       -p.delta_c, -k / 2, -2 * g, 0,
       0, 0, p.xi - y / 2, 2 * p.nu,
       -2 * g, 0, -2 * p.mu, -p.xi - y / 2;
  Vec h(4);
  h << std::sqrt(k), std::sqrt(k), std::sqrt(y), std::sqrt(y);
  const auto L = ModeLayout::optomech();
  return finish_model(A, h, input_covariance(bath, L), L, bath, "imperfect QND");
}

inline constexpr int kCqncAncilla = 4;

inline LinearModel cqnc_model(const CqncParams& p, const BathSpec& bath) {
  require_rates(p.kappa, p.gamma);
  require(p.omega_m > 0.0, "omega_m must be positive");
  const double k = p.kappa, y = p.gamma, w = p.omega_m, g = p.coupling.g(k, y);
  Mat A(6, 6);
  A << -k / 2, 0, 0, 0, 0, 0,
       0, -k / 2, -2 * g, 0, -2 * g, 0,
       0, 0, -y / 2, w, 0, 0,
       -2 * g, 0, -w, -y / 2, 0, 0,
       0, 0, 0, 0, -y / 2, -w,
       -2 * g, 0, 0, 0, w, -y / 2;
  Vec h(6);
  h << std::sqrt(k), std::sqrt(k), std::sqrt(y), std::sqrt(y), std::sqrt(y), std::sqrt(y);
  ModeLayout L{{"X", "Y", "x", "p", "Xc", "Yc"}, 2, 1, 3};
  Mat Vin = Mat::Zero(6, 6);
  Vin.topLeftCorner(4, 4) = input_covariance(bath, ModeLayout::optomech());
  const double n_aux = p.n_aux.value_or(bath.n_m);
  require(n_aux >= 0.0, "ancilla occupation must be nonnegative");
  Vin(4, 4) = Vin(5, 5) = n_aux + 0.5;
  return finish_model(A, h, Vin, L, bath, "CQNC");
}

// closed-form displacement scattering matrix, used as an independent oracle
inline CMat displacement_scattering_closed(double kappa, double gamma, double omega_m, double C, double omega) {
  const cplx i(0.0, 1.0);
  const double k = kappa, y = gamma, w = omega_m;
  const cplx K = (k + 2.0 * i * omega) / (k - 2.0 * i * omega);
  const cplx chi_a = 1.0 / (k - 2.0 * i * omega);
  const cplx chi_b = 1.0 / ((y - 2.0 * i * omega) * (y - 2.0 * i * omega) + 4.0 * w * w);
  const cplx mu_b = (y - 2.0 * i * omega) * chi_b;
  const cplx Gam = (y * y + 4.0 * omega * omega - 4.0 * w * w) * chi_b;
  const cplx Om = 4.0 * y * w * chi_b;
  const double sC = std::sqrt(C);
  const double s = 4.0 * sC * k * y, t_m = 16.0 * C * k * k * y * w, u_m = 8.0 * sC * k * y * w;
  CMat S(4, 4);
  S << K, 0.0, 0.0, 0.0,
       t_m * chi_a * chi_a * chi_b, K, -s * chi_a * mu_b, -u_m * chi_a * chi_b,
       -u_m * chi_a * chi_b, 0.0, Gam, Om,
       -s * chi_a * mu_b, 0.0, -Om, Gam;
  return S;
}

inline double c_sql(double kappa, double gamma, double omega_m, double omega) {
  require_rates(kappa, gamma);
  require(omega_m > 0.0, "omega_m must be positive");
  const cplx z = 4.0 * omega_m * omega_m + std::pow(cplx(-gamma, 2.0 * omega), 2);
  return (kappa * kappa + 4.0 * omega * omega) / (16.0 * kappa * kappa * gamma * omega_m) * std::abs(z);
}

inline double c_sql_approx(double kappa, double omega_m) { return 0.25 + omega_m * omega_m / (kappa * kappa); }

inline MeasurementFigures make_figures(double Vc, double Ts, double Tm, double Vx, double omega = 0.0) {
  MeasurementFigures f;
  f.omega = omega;
  f.Vc = Vc;
  f.Ts = Ts;
  f.Tm = Tm;
  auto neq = [Vx](double T) {
    return T > 0.0 ? Vx * (1.0 - T) / T : std::numeric_limits<double>::infinity();
  };
  f.ns_eq = neq(Ts);
  f.nm_eq = neq(Tm);
  f.regime = classify_regime(Vc, Ts, Tm);
  return f;
}

inline MeasurementFigures ideal_qnd_metrics(double C, double Vx, double eta = 1.0, double n_c = 0.0) {
  require(C >= 0.0 && Vx > 0.0 && eta >= 0.0 && eta <= 1.0 && n_c >= 0.0, "invalid ideal QND arguments");
  const double k = 16.0 * C * eta / (n_c + 0.5);
  const double Vc = 1.0 / (1.0 / Vx + k);
  return make_figures(Vc, 1.0, k * Vc, Vx);
}

inline double qnd_cooperativity_threshold(double Vx) {
  require(Vx > 0.0, "V_x must be positive");
  return std::max(0.0, (2.0 * Vx - 1.0) / (32.0 * Vx));
}

inline double detuned_effective_cooperativity(double C, double kappa, double delta_c) {
  const double d = kappa * kappa + 4.0 * delta_c * delta_c;
  return C * std::pow(kappa, 4) / (d * d);
}

inline MeasurementFigures nu_model_closed_metrics(double C, double nu, double gamma, const BathSpec& bath) {
  const double Vx = bath.Vx(), Vp = bath.Vp(), Vxp = bath.Vxp(), y = gamma;
  const double den = 512.0 * C * nu * nu * (2.0 * C + Vp) + y * y * (1.0 + 32.0 * C * Vx) + 256.0 * C * y * nu * Vxp;
  const double num = y * y * Vx + 16.0 * y * nu * Vxp +
                     64.0 * nu * nu * ((2.0 * C + Vp) * (1.0 + 8.0 * C * Vx) - 8.0 * C * Vxp * Vxp);
  const double Ts = Vx * y * y / (Vx * y * y + 16.0 * nu * (4.0 * nu * (2.0 * C + Vp) + y * Vxp));
  const double Tm = 32.0 * C * y * y * Vx / den;
  return make_figures(num / den, Ts, Tm, Vx);
}

inline MeasurementFigures xi_model_closed_metrics(double C, double xi, double gamma, double Vx) {
  require(std::abs(xi) < gamma / 2.0, "|xi| must stay below gamma/2");
  const double a = gamma + 2.0 * xi, b = gamma - 2.0 * xi;
  const double Vxi = Vx * a * a / (b * b);
  const double k = 32.0 * C * gamma * gamma / (a * a);
  const double Vc = 1.0 / (1.0 / Vxi + k);
  return make_figures(Vc, 1.0, k * Vc, Vx);
}

}  // namespace tv
