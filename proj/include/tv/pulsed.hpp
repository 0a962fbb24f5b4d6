#pragma once

#include <cmath>

#include "tv/core.hpp"
#include "tv/metrics.hpp"
#include "tv/ordered_integral.hpp"

namespace tv {

enum class PulseShape { Exponential, Constant };

struct PulsedParams {
  double kappa = 1.0;
  double gamma = 1e-9;
  double omega_m = 1.0;
  double g = 0.6;
  double alpha = 0.6;
  double V0 = 0.5;
  BathSpec bath;
  PulseShape shape = PulseShape::Exponential;

  double nu_x2() const { return alpha * alpha * omega_m / (8.0 * (2.0 + alpha * alpha)); }
  double rho() const { return gamma / 2.0; }
  double lambda() const { return kappa / 2.0; }
  double c() const { return alpha * g / 2.0; }

  void validate() const {
    require_rates(kappa, gamma);
    require(V0 > 0.0, "V0 must be positive");
    require(alpha >= 0.0, "alpha must be nonnegative");
    bath.validate();
  }
};

inline Mat pulsed_drift(const PulsedParams& p) {
  Mat A = Mat::Zero(4, 4);
  A(0, 0) = A(1, 1) = -p.lambda();
  A(2, 2) = A(3, 3) = -p.rho();
  A(1, 2) = A(3, 0) = p.c();
  A(3, 2) = p.nu_x2();
  return A;
}

// E(t) = int_0^t exp(-lambda (t - v) - rho v) dv without cancellation
inline double response_kernel(const PulsedParams& p, double t) {
  const double d = p.lambda() - p.rho();
  if (std::abs(p.kappa - p.gamma) < 1e-12 * p.kappa) return t * std::exp(-p.lambda() * t);
  return -std::exp(-p.rho() * t) * std::expm1(-d * t) / d;
}

inline Mat propagator(const PulsedParams& p, double t) {
  require(t >= 0.0, "time must be nonnegative");
  Mat M = Mat::Zero(4, 4);
  M(0, 0) = M(1, 1) = std::exp(-p.lambda() * t);
  M(2, 2) = M(3, 3) = std::exp(-p.rho() * t);
  M(1, 2) = M(3, 0) = p.c() * response_kernel(p, t);
  M(3, 2) = p.nu_x2() * t * std::exp(-p.rho() * t);
  return M;
}

namespace detail {

// adds E(t - from) as an inner variable
inline void add_kernel(oi::OrderedIntegral& I, const PulsedParams& p, int t, int from) {
  const int w = I.add_var();
  I.less(w, t);
  if (from != oi::kStart) I.less(from, w);
  I.decay(from, w, p.rho());
  I.decay(w, t, p.lambda());
}

// adds the unnormalized filter at time t; the caller scales by filter_norm
inline void add_filter(oi::OrderedIntegral& I, const PulsedParams& p, int t) {
  if (p.shape == PulseShape::Exponential) add_kernel(I, p, t, oi::kStart);
}

inline double kernel_square_integral(const PulsedParams& p, double tau) {
  oi::OrderedIntegral I;
  const int t = I.add_var();
  add_kernel(I, p, t, oi::kStart);
  add_kernel(I, p, t, oi::kStart);
  return oi::evaluate(I, tau);
}

}  // namespace detail

inline double measurement_gain(const PulsedParams& p, double tau) {
  if (tau == 0.0) return 1.0;
  return 1.0 + p.kappa * p.c() * p.c() * detail::kernel_square_integral(p, tau);
}

struct PulsedState {
  Mat M;
  double gain = 1.0;
  double signal_gain = 0.0;  // a, with a^2 = gain - 1 for the exponential filter
  double V33 = 0.0;
  double V32 = 0.0;
  double V22 = 0.0;
  double bracket = 0.0;  // vacuum invariant, vanishes identically
  double filter_norm = 0.0;
};

inline PulsedState pulsed_covariances(const PulsedParams& p, double tau) {
  p.validate();
  require(tau > 0.0, "pulse duration must be positive");
  const double rho = p.rho(), lam = p.lambda(), c = p.c(), k = p.kappa;
  const double Vx = p.bath.Vx(), vac = p.bath.n_c + 0.5;
  const double IE2 = detail::kernel_square_integral(p, tau);

  PulsedState st;
  st.M = propagator(p, tau);
  st.gain = 1.0 + k * c * c * IE2;
  // filter f = norm * (E(t) or 1), unit L2 norm
  st.filter_norm = p.shape == PulseShape::Exponential ? 1.0 / std::sqrt(IE2) : 1.0 / std::sqrt(tau);
  const double fn = st.filter_norm;

  {
    oi::OrderedIntegral I;
    const int t = I.add_var();
    detail::add_filter(I, p, t);
    detail::add_kernel(I, p, t, oi::kStart);
    I.coefficient = std::sqrt(k) * c * fn;
    st.signal_gain = oi::evaluate(I, tau);
  }
  const double a = st.signal_gain;

  double J = 0.0;
  {
    oi::OrderedIntegral I;
    const int s = I.add_var(), t = I.add_var();
    I.less(s, t);
    I.decay(s, oi::kEnd, rho);
    detail::add_kernel(I, p, t, s);
    detail::add_filter(I, p, t);
    I.coefficient = c * fn;
    J = oi::evaluate(I, tau);
  }

  double K2 = 0.0;
  {
    oi::OrderedIntegral I;
    const int s = I.add_var(), t1 = I.add_var(), t2 = I.add_var();
    I.less(s, t1);
    I.less(s, t2);
    detail::add_kernel(I, p, t1, s);
    detail::add_kernel(I, p, t2, s);
    detail::add_filter(I, p, t1);
    detail::add_filter(I, p, t2);
    I.coefficient = c * c * fn * fn;
    K2 = oi::evaluate(I, tau);
  }

  {
    oi::OrderedIntegral P, Q, R;
    const int t = P.add_var();
    P.decay(oi::kStart, t, lam);
    detail::add_filter(P, p, t);
    P.coefficient = fn;
    const int s = Q.add_var(), u = Q.add_var();
    Q.less(s, u);
    Q.decay(s, u, lam);
    detail::add_filter(Q, p, s);
    detail::add_filter(Q, p, u);
    Q.coefficient = fn * fn;
    const int r = R.add_var(), r1 = R.add_var(), r2 = R.add_var();
    R.less(r, r1);
    R.less(r, r2);
    R.decay(r, r1, lam);
    R.decay(r, r2, lam);
    detail::add_filter(R, p, r1);
    detail::add_filter(R, p, r2);
    R.coefficient = fn * fn;
    const double Pv = oi::evaluate(P, tau), Qv = oi::evaluate(Q, tau), Rv = oi::evaluate(R, tau);
    st.bracket = vac * (k * Pv * Pv - 2.0 * k * Qv + k * k * Rv);
  }

  st.V33 = std::exp(-p.gamma * tau) * p.V0 - std::expm1(-p.gamma * tau) * Vx;
  st.V32 = std::exp(-rho * tau) * a * p.V0 + p.gamma * std::sqrt(k) * Vx * J;
  st.V22 = vac + a * a * p.V0 + k * p.gamma * Vx * K2;
  return st;
}

inline MeasurementFigures pulsed_metrics(const PulsedParams& p, double tau) {
  const PulsedState st = pulsed_covariances(p, tau);
  MeasurementFigures f;
  f.omega = 0.0;
  f.Vc = conditional_variance((Mat(2, 2) << st.V33, st.V32, st.V32, st.V22).finished(), 0, 1);
  const double sig_s = std::exp(-p.gamma * tau) * p.V0;
  const double sig_m = st.signal_gain * st.signal_gain * p.V0;
  f.Ts = sig_s / st.V33;
  f.Tm = sig_m / st.V22;
  // noise referred back to the prepared variance
  f.ns_eq = sig_s > 0.0 ? p.V0 * (st.V33 - sig_s) / sig_s : std::numeric_limits<double>::infinity();
  f.nm_eq = sig_m > 0.0 ? p.V0 * (st.V22 - sig_m) / sig_m : std::numeric_limits<double>::infinity();
  f.regime = classify_regime(f.Vc, f.Ts, f.Tm);
  return f;
}

struct PreparationParams {
  double kappa = 1.0;
  double gamma = 1e-9;
  double omega_m = 1.0;
  double g = 0.6;
  double alpha = 0.2;
};

struct PreparedState {
  double V0 = 0.0;
  Mat V;
  double residual = 0.0;
};

inline Mat preparation_drift(const PreparationParams& p) {
  const double k = p.kappa, y = p.gamma, a = p.alpha, g = p.g;
  const double sq = 2.0 * a * p.omega_m / (2.0 + a * a);
  Mat A(4, 4);
  A << -k / 2, 0, 0, (a - 2) * g / 4,
       0, -k / 2, (a + 2) * g / 4, 0,
       0, (a - 2) * g / 4, -y / 2, 0,
       (a + 2) * g / 4, 0, -sq, -y / 2;
  return A;
}

inline PreparedState prepare_state_lyapunov(const PreparationParams& p, const BathSpec& bath) {
  require_rates(p.kappa, p.gamma);
  const Mat A = preparation_drift(p);
  check_stable(A, "preparation");
  Vec h(4);
  h << std::sqrt(p.kappa), std::sqrt(p.kappa), std::sqrt(p.gamma), std::sqrt(p.gamma);
  const Mat Vin = input_covariance(bath, ModeLayout::optomech());
  const Mat D = h.asDiagonal() * Vin * h.asDiagonal();
  PreparedState st;
  st.V = lyapunov_steady_state(A, D);
  st.V0 = st.V(2, 2);
  st.residual = lyapunov_residual(A, st.V, D);
  if (!(st.residual <= 1e-10 * std::max(D.cwiseAbs().maxCoeff(), 1e-300)))
    throw Error(ErrorKind::UnstableModel, "Lyapunov residual " + std::to_string(st.residual));
  return st;
}

}  // namespace tv
