#pragma once

#include <array>
#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "tv/tv.hpp"

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

struct PulsedCov {
  double V33, V32, V22;
};

// time-domain covariance of (Y, x, Z) with Z the filtered meter output
inline PulsedCov pulsed_ode(const tv::PulsedParams& p, double tau) {
  const double k = p.kappa, c = p.c(), vac = p.bath.n_c + 0.5, Vx = p.bath.Vx();
  std::function<double(double)> raw;
  if (p.shape == tv::PulseShape::Exponential) {
    raw = [&](double t) { return tv::response_kernel(p, t); };
  } else {
    raw = [](double) { return 1.0; };
  }
  const double norm = 1.0 / std::sqrt(integrate([&](double t) { return raw(t) * raw(t); }, 0.0, tau));
  using State = std::array<double, 9>;
  auto rhs = [&](const State& y, State& dy, double t) {
    const double f = norm * raw(t);
    const double A[3][3] = {{-k / 2, c, 0}, {0, -p.rho(), 0}, {f * std::sqrt(k), 0, 0}};
    const double B[3][2] = {{std::sqrt(k), 0}, {0, std::sqrt(p.gamma)}, {-f, 0}};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = B[i][0] * B[j][0] * vac + B[i][1] * B[j][1] * Vx;
        for (int m = 0; m < 3; ++m) s += A[i][m] * y[3 * m + j] + y[3 * i + m] * A[j][m];
        dy[3 * i + j] = s;
      }
  };
  State y{vac, 0, 0, 0, p.V0, 0, 0, 0, 0};
  namespace ode = boost::numeric::odeint;
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-11), rhs, y, 0.0, tau,
                          1e-3 * tau);
  return {y[4], y[5], y[8]};
}

}  // namespace oracle
