#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tv/errors.hpp"
#include "tv/metrics.hpp"

namespace tv {

enum class GridKind { Log, Linear };

struct SweepSpec {
  std::string param;
  GridKind kind = GridKind::Log;
  double lo = 1e-3;
  double hi = 1e3;
  int count = 200;
  double rel_tol = 1e-6;

  void validate() const {
    require(std::isfinite(lo) && std::isfinite(hi), "sweep endpoints must be finite");
    require(count >= 2, "sweep needs at least two points");
    require(hi > lo, "sweep upper bound must exceed the lower bound");
    if (kind == GridKind::Log) require(lo > 0.0, "log sweep needs positive endpoints");
    require(rel_tol > 0.0, "tolerance must be positive");
  }

  double to_u(double x) const { return kind == GridKind::Log ? std::log(x) : x; }
  double from_u(double u) const { return kind == GridKind::Log ? std::exp(u) : u; }

  std::vector<double> points() const {
    validate();
    std::vector<double> x(count);
    const double a = to_u(lo), b = to_u(hi);
    for (int i = 0; i < count; ++i) x[i] = i == count - 1 ? hi : i == 0 ? lo : from_u(a + (b - a) * i / (count - 1));
    return x;
  }
};

struct MinimizeResult {
  double x = 0.0;
  double value = 0.0;
  bool at_boundary = false;
  std::vector<double> branches;  // other grid minima within 1% of the best value
};

// failures at a grid point count as +inf so a bounded search always returns
template <class F>
double safe_eval(F& f, double x) {
  try {
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

template <class F>
MinimizeResult minimize_scalar(F f, const SweepSpec& spec) {
  const std::vector<double> x = spec.points();
  const int n = static_cast<int>(x.size());
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = safe_eval(f, x[i]);
  int b = 0;
  for (int i = 1; i < n; ++i)
    if (v[i] < v[b]) b = i;
  if (!std::isfinite(v[b])) throw Error(ErrorKind::InvalidArgument, "objective undefined on the whole grid");

  MinimizeResult r;
  r.x = x[b];
  r.value = v[b];
  r.at_boundary = b == 0 || b == n - 1;
  for (int i = 0; i < n; ++i) {
    if (i == b) continue;
    const bool local = (i == 0 || v[i] <= v[i - 1]) && (i == n - 1 || v[i] <= v[i + 1]);
    if (local && std::abs(v[i] - v[b]) <= 0.01 * std::abs(v[b])) r.branches.push_back(x[i]);
  }

  // golden section on the bracketing cells, in grid coordinates
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = spec.to_u(x[std::max(b - 1, 0)]), c = spec.to_u(x[std::min(b + 1, n - 1)]);
  double u1 = c - phi * (c - a), u2 = a + phi * (c - a);
  double f1 = safe_eval(f, spec.from_u(u1)), f2 = safe_eval(f, spec.from_u(u2));
  auto width_ok = [&] {
    const double xa = spec.from_u(a), xc = spec.from_u(c);
    return std::abs(xc - xa) <= spec.rel_tol * std::max(std::abs(xa), std::abs(xc)) || std::abs(c - a) < 1e-300;
  };
  for (int it = 0; it < 400 && !width_ok(); ++it) {
    if (f1 <= f2) {
      c = u2;
      u2 = u1;
      f2 = f1;
      u1 = c - phi * (c - a);
      f1 = safe_eval(f, spec.from_u(u1));
    } else {
      a = u1;
      u1 = u2;
      f1 = f2;
      u2 = a + phi * (c - a);
      f2 = safe_eval(f, spec.from_u(u2));
    }
  }
  const double ub = f1 <= f2 ? u1 : u2, fb = std::min(f1, f2);
  if (fb < r.value) {
    r.x = spec.from_u(ub);
    r.value = fb;
  }
  return r;
}

struct Optimum {
  double arg = 0.0;
  MeasurementFigures figures;
  bool at_boundary = false;
  std::vector<double> branches;
};

// eval maps the scanned parameter to figures; V_c is minimized
template <class Eval>
Optimum minimize_vc(Eval eval, const SweepSpec& spec) {
  auto obj = [&](double x) { return eval(x).Vc; };
  const MinimizeResult m = minimize_scalar(obj, spec);
  return {m.x, eval(m.x), m.at_boundary, m.branches};
}

template <class Eval>
Optimum minimize_vc_over_frequency(Eval eval_at_omega, double omega_lo, double omega_hi, int points = 200,
                                   GridKind kind = GridKind::Log) {
  require(omega_lo >= 0.0, "frequency bounds must be nonnegative");
  return minimize_vc(eval_at_omega, SweepSpec{"omega", kind, omega_lo, omega_hi, points, 1e-6});
}

template <class Eval>
Optimum generalized_sql(Eval eval_at_C, double c_lo, double c_hi, int points = 200) {
  return minimize_vc(eval_at_C, SweepSpec{"C", GridKind::Log, c_lo, c_hi, points, 1e-6});
}

// bisection on a continuous curve; the endpoints must straddle the level
template <class F>
double find_threshold(F curve, double level, double lo, double hi, double rel_tol = 1e-6,
                      GridKind kind = GridKind::Linear) {
  require(hi > lo, "threshold bounds must be increasing");
  if (kind == GridKind::Log) require(lo > 0.0, "log bisection needs positive bounds");
  auto to_u = [&](double x) { return kind == GridKind::Log ? std::log(x) : x; };
  auto from_u = [&](double u) { return kind == GridKind::Log ? std::exp(u) : u; };
  double a = to_u(lo), b = to_u(hi);
  double fa = curve(lo) - level, fb = curve(hi) - level;
  if (fa == 0.0) return lo;
  if (fb == 0.0) return hi;
  if ((fa > 0.0) == (fb > 0.0))
    throw Error(ErrorKind::NoBracket, "curve does not cross " + std::to_string(level) + " on [" + std::to_string(lo) +
                                          ", " + std::to_string(hi) + "]");
  for (int it = 0; it < 300; ++it) {
    const double m = 0.5 * (a + b);
    const double xm = from_u(m);
    const double fm = curve(xm) - level;
    if (fm == 0.0) return xm;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
    const double xa = from_u(a), xb = from_u(b);
    if (std::abs(xb - xa) <= 0.5 * rel_tol * std::max(std::abs(xa), std::abs(xb))) break;
  }
  return from_u(0.5 * (a + b));
}

}  // namespace tv
