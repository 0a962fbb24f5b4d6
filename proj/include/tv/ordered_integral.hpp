#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "tv/core.hpp"

// Integrals over 0 < s_1 ... s_n < tau of products of exp(-rate * (later - earlier)),
// where the variables obey a partial order. Each linear extension of the order is a
// simplex integral of a piecewise-constant decay, equal to a corner entry of
// expm(tau * B) with B = diag(-r) plus a unit superdiagonal.
namespace tv::oi {

inline constexpr int kStart = -1;
inline constexpr int kEnd = -2;

struct Factor {
  int from;
  int to;
  double rate;
};

struct OrderedIntegral {
  int vars = 0;
  std::vector<std::pair<int, int>> before;
  std::vector<Factor> factors;
  double coefficient = 1.0;

  int add_var() { return vars++; }
  void less(int a, int b) { before.emplace_back(a, b); }
  void decay(int from, int to, double rate) {
    if (rate != 0.0) factors.push_back({from, to, rate});
  }
};

inline double simplex(const std::vector<double>& rates, double tau) {
  const int n = static_cast<int>(rates.size());
  if (n == 1) return std::exp(-rates[0] * tau);
  Mat B = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    B(i, i) = -rates[i] * tau;
    if (i + 1 < n) B(i, i + 1) = tau;
  }
  const Mat E = B.exp();
  return E(0, n - 1);
}

// rate vectors of all linear extensions with their multiplicities
inline std::map<std::vector<double>, int> segments(const OrderedIntegral& I) {
  const int n = I.vars;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> pos(n);
  auto where = [&](int v) { return v == kStart ? 0 : v == kEnd ? n + 1 : pos[v]; };
  std::map<std::vector<double>, int> out;
  do {
    for (int k = 0; k < n; ++k) pos[perm[k]] = k + 1;
    bool ok = true;
    for (const auto& [a, b] : I.before)
      if (where(a) >= where(b)) {
        ok = false;
        break;
      }
    if (!ok) continue;
    std::vector<double> r(n + 1, 0.0);
    for (const auto& f : I.factors) {
      const int a = where(f.from), b = where(f.to);
      require(a < b, "decay factor runs against the variable order");
      for (int k = a; k < b; ++k) r[k] += f.rate;
    }
    ++out[r];
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

inline double evaluate(const OrderedIntegral& I, double tau) {
  require(tau >= 0.0, "integration horizon must be nonnegative");
  if (I.coefficient == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& [r, mult] : segments(I)) sum += mult * simplex(r, tau);
  return I.coefficient * sum;
}

}  // namespace tv::oi
