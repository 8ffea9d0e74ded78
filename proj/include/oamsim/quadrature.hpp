#pragma once

// Numerical quadrature used by the oracle paths and the radial integrals.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>

#include "oamsim/common.hpp"

namespace oamsim::quad {

inline constexpr unsigned panel_order = 16;

/// Integral of f over [0, 2pi) with n_points Gauss-Legendre nodes spread over
/// equal panels; panels are additionally cut at every breakpoint so that
/// piecewise-smooth integrands converge at the smooth rate.
template <class F>
cplx circle_integral(F &&f, std::vector<double> breakpoints, std::size_t n_points = 4096) {
  using rule = boost::math::quadrature::gauss<double, panel_order>;
  const std::size_t panels = std::max<std::size_t>(1, n_points / panel_order);
  for (std::size_t k = 0; k <= panels; ++k)
    breakpoints.push_back(two_pi * static_cast<double>(k) / static_cast<double>(panels));
  for (auto &b : breakpoints)
    b = std::clamp(b, 0.0, two_pi);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                    breakpoints.end());

  const auto &x = rule::abscissa();
  const auto &w = rule::weights();
  cplx sum{0.0, 0.0};
  for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    const double a = breakpoints[p], b = breakpoints[p + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    cplx panel{0.0, 0.0};
    // boost stores the non-negative half of a symmetric rule
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        panel += w[i] * cplx(f(mid));
      } else {
        panel += w[i] * (cplx(f(mid + half * x[i])) + cplx(f(mid - half * x[i])));
      }
    }
    sum += panel * half;
  }
  return sum;
}

/// Gauss rule for the weight x^a exp(-x) on [0, inf). Nodes come from the
/// Jacobi matrix; weights are evaluated in log form so that the far nodes keep
/// full relative accuracy instead of drowning in eigenvector round-off.
struct GaussLaguerre {
  double a = 0.0;
  std::vector<double> nodes;
  std::vector<double> log_weights;

  double weight(std::size_t i) const { return std::exp(log_weights[i]); }
};

namespace detail {

/// log|L_n^a(x)| and its sign by the three-term recurrence with rescaling.
inline std::pair<double, int> log_laguerre(unsigned n, double a, double x) {
  double prev = 1.0, cur = 1.0 + a - x, log_scale = 0.0;
  if (n == 0)
    return {0.0, 1};
  for (unsigned k = 1; k < n; ++k) {
    double next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    double m = std::abs(cur);
    if (m > 1e150) {
      prev /= m;
      cur /= m;
      log_scale += std::log(m);
    }
  }
  return {log_scale + std::log(std::abs(cur)), cur < 0.0 ? -1 : 1};
}

/// L_n^a(x) / L_n^a'(x), from L_n and L_{n-1} carried with a common scale.
inline double laguerre_newton_step(unsigned n, double a, double x) {
  double prev = 1.0, cur = 1.0 + a - x;
  for (unsigned k = 1; k < n; ++k) {
    double next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
    double m = std::abs(cur);
    if (m > 1e150) {
      prev /= m;
      cur /= m;
    }
  }
  // x L_n' = n L_n - (n + a) L_{n-1}
  return x * cur / (n * cur - (n + a) * prev);
}

} // namespace detail

inline GaussLaguerre gauss_laguerre(unsigned order, double a = 0.0) {
  if (order == 0)
    throw ConfigurationError("Gauss-Laguerre order must be positive");
  Eigen::VectorXd diag(order), sub(order > 1 ? order - 1 : 1);
  for (unsigned k = 0; k < order; ++k)
    diag[k] = 2.0 * k + 1.0 + a;
  for (unsigned k = 1; k < order; ++k)
    sub[k - 1] = std::sqrt(k * (k + a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(order - 1), Eigen::EigenvaluesOnly);

  GaussLaguerre rule;
  rule.a = a;
  const double n = order;
  for (unsigned i = 0; i < order; ++i) {
    double x = solver.eigenvalues()[i];
    // eigenvalues carry an absolute error ~ eps * x_max; polish against L_n
    if (order > 1)
      for (int it = 0; it < 3; ++it)
        x -= detail::laguerre_newton_step(order, a, x);
    // w = Gamma(n+a+1) x / (n! (n+a)^2 L_{n-1}^a(x)^2)
    auto [log_l, sign] = detail::log_laguerre(order - 1, a, x);
    (void)sign;
    double lw = std::lgamma(n + a + 1.0) - std::lgamma(n + 1.0) + std::log(x) -
                2.0 * std::log(n + a) - 2.0 * log_l;
    rule.nodes.push_back(x);
    rule.log_weights.push_back(lw);
  }
  return rule;
}

} // namespace oamsim::quad
