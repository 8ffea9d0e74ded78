#pragma once

// Laguerre-Gaussian modes in the waist plane and the modal decomposition of a
// plate's output field.

#include <iomanip>
#include <limits>
#include <ostream>
#include <tuple>

#include <boost/math/special_functions/laguerre.hpp>

#include "oamsim/plates.hpp"
#include "oamsim/quadrature.hpp"

namespace oamsim {

struct LgMode {
  OamIndex l;
  int p = 0;
  double w0 = 1.0;

  LgMode(OamIndex l_, int p_, double w0_ = 1.0) : l(l_), p(p_), w0(w0_) {
    if (p < 0)
      throw ConfigurationError("LG radial index must be nonnegative");
    if (!(w0 > 0.0))
      throw ConfigurationError("LG waist must be positive");
  }

  static LgMode fundamental(double w0 = 1.0) { return {OamIndex{0}, 0, w0}; }
};

/// sqrt(2 p! / (pi (p+|l|)!)) / w0, the unit-power normalisation.
inline double lg_normalization(const LgMode &m) {
  const int al = std::abs(m.l.l);
  return std::sqrt(2.0 / pi * std::exp(std::lgamma(m.p + 1.0) - std::lgamma(m.p + al + 1.0))) / m.w0;
}

/// u_lp(r, theta) in the waist plane.
inline cplx lg_amplitude(const LgMode &m, double r, double theta) {
  if (r < 0.0)
    throw ConfigurationError("radius must be nonnegative");
  const unsigned al = static_cast<unsigned>(std::abs(m.l.l));
  const double s = r / m.w0;
  const double x = 2.0 * s * s;
  const double sign = (m.p % 2 == 0) ? 1.0 : -1.0;
  const double radial = lg_normalization(m) * sign * std::pow(std::sqrt(2.0) * s, static_cast<double>(al)) *
                        boost::math::laguerre(static_cast<unsigned>(m.p), al, x) * std::exp(-s * s);
  return radial * std::exp(I * (m.l.l * theta));
}

//------------------------------------------------------------------------------
// Radial overlaps

namespace detail {

/// Normalised Laguerre values sqrt(p!/(p+alpha)!) L_p^alpha(x) for p = 0..p_max,
/// returned as (log magnitude, sign) so far quadrature nodes do not overflow.
inline void log_normalized_laguerre(unsigned p_max, double alpha, double x, std::vector<double> &log_mag,
                                    std::vector<int> &sign) {
  log_mag.assign(p_max + 1, 0.0);
  sign.assign(p_max + 1, 1);
  double prev = 0.0, cur = 1.0, scale = 0.0;
  for (unsigned k = 0; k <= p_max; ++k) {
    if (k == 1) {
      prev = cur;
      cur = 1.0 + alpha - x;
    } else if (k > 1) {
      double next = ((2.0 * (k - 1) + 1.0 + alpha - x) * cur - ((k - 1) + alpha) * prev) / k;
      prev = cur;
      cur = next;
    }
    double m = std::abs(cur);
    if (m > 1e150) {
      prev /= m;
      cur /= m;
      scale += std::log(m);
      m = 1.0;
    }
    double norm = 0.5 * (std::lgamma(k + 1.0) - std::lgamma(k + alpha + 1.0));
    log_mag[k] = (m > 0.0 ? std::log(m) : -std::numeric_limits<double>::infinity()) + scale + norm;
    sign[k] = cur < 0.0 ? -1 : 1;
  }
}

} // namespace detail

/// <rho_{l p}|rho_{l_in p_in}> for p = 0..p_max in one pass. Quadrature with
/// weight x^((|l|+|l_in|)/2) exp(-x), x = 2 r^2 / w0^2, which leaves a
/// polynomial integrand.
inline std::vector<double> radial_overlaps(int l, unsigned p_max, const LgMode &input, unsigned order) {
  const double al = std::abs(l), ain = std::abs(input.l.l);
  const auto rule = quad::gauss_laguerre(order, 0.5 * (al + ain));
  std::vector<double> out(p_max + 1, 0.0);
  std::vector<double> lm, lm_in;
  std::vector<int> sg, sg_in;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i];
    detail::log_normalized_laguerre(p_max, al, x, lm, sg);
    detail::log_normalized_laguerre(static_cast<unsigned>(input.p), ain, x, lm_in, sg_in);
    const double base = rule.log_weights[i] + lm_in[input.p];
    for (unsigned p = 0; p <= p_max; ++p)
      out[p] += sg[p] * sg_in[input.p] * std::exp(base + lm[p]);
  }
  for (unsigned p = 0; p <= p_max; ++p)
    if ((p + input.p) % 2 == 1)
      out[p] = -out[p];
  return out;
}

/// <A|B> for two LG modes of the same waist.
inline cplx lg_overlap(const LgMode &a, const LgMode &b) {
  if (a.w0 != b.w0)
    throw ConfigurationError("LG overlaps between different waists are not supported");
  if (a.l.l != b.l.l)
    return {0.0, 0.0};
  unsigned order = static_cast<unsigned>(a.p + b.p) / 2 + 8;
  return radial_overlaps(a.l.l, static_cast<unsigned>(a.p), b, order)[a.p];
}

//------------------------------------------------------------------------------
// Decomposition

struct LgEntry {
  int l;
  int p;
  cplx coefficient;
  double power;
  double cumulative_power;
};

struct LgWindow {
  int l_min;
  int l_max;
  int p_max;
};

struct LgDecomposition {
  std::vector<LgEntry> entries; // greedy: descending power
  LgWindow window;
  double target_power;
  bool incomplete = false;   // target not reached inside the window
  double window_power = 0.0; // all modes in the window
  double angular_tail = 0.0; // power with l outside the window
  double residual = 0.0;     // 1 - cumulative - angular_tail
  unsigned quadrature_order = 0;

  std::size_t count() const { return entries.size(); }
  double cumulative() const { return entries.empty() ? 0.0 : entries.back().cumulative_power; }
};

/// Gauss-Laguerre order used for a window, 2 (p_max + |l|max) + 32.
inline unsigned default_radial_order(const LgWindow &w) {
  int lmax = std::max(std::abs(w.l_min), std::abs(w.l_max));
  return static_cast<unsigned>(2 * (w.p_max + lmax) + 32);
}

struct DecomposeOptions {
  double order_scale = 1.0; // multiplies the default quadrature order
  int max_expansions = 3;   // window doublings when the target is not reached
};

namespace detail {

inline LgDecomposition decompose_in_window(const ClosedFormState &angular, const LgMode &input, LgWindow w,
                                           double target, double order_scale) {
  LgDecomposition d;
  d.window = w;
  d.target_power = target;
  d.quadrature_order = static_cast<unsigned>(std::lround(default_radial_order(w) * order_scale));

  const std::size_t n_l = static_cast<std::size_t>(w.l_max - w.l_min + 1);
  std::vector<std::vector<LgEntry>> columns(n_l);
  std::vector<double> angular_power(n_l);
  parallel_for(n_l, [&](std::size_t k) {
    const int l = w.l_min + static_cast<int>(k);
    const cplx ang = inner_product(ClosedFormState::oam(OamIndex{l}), angular);
    angular_power[k] = std::norm(ang);
    if (angular_power[k] == 0.0)
      return;
    auto radial = radial_overlaps(l, static_cast<unsigned>(w.p_max), input, d.quadrature_order);
    for (int p = 0; p <= w.p_max; ++p) {
      cplx c = ang * radial[static_cast<std::size_t>(p)];
      columns[k].push_back({l, p, c, std::norm(c), 0.0});
    }
  });

  std::vector<LgEntry> all;
  double in_window_angular = 0.0;
  for (std::size_t k = 0; k < n_l; ++k) {
    in_window_angular += angular_power[k];
    for (auto &e : columns[k]) {
      d.window_power += e.power;
      all.push_back(e);
    }
  }
  std::sort(all.begin(), all.end(), [](const LgEntry &a, const LgEntry &b) {
    if (a.power != b.power)
      return a.power > b.power;
    return std::tie(a.l, a.p) < std::tie(b.l, b.p);
  });
  double cum = 0.0;
  for (auto &e : all) {
    cum += e.power;
    e.cumulative_power = cum;
    d.entries.push_back(e);
    if (cum >= target)
      break;
  }
  d.incomplete = cum < target;
  d.angular_tail = std::max(0.0, 1.0 - in_window_angular);
  d.residual = 1.0 - cum - d.angular_tail;
  return d;
}

} // namespace detail

/// Greedy LG decomposition of plate * input: modes sorted by power and taken
/// until `target_power` is reached. If the window runs out first, it is
/// doubled up to `max_expansions` times; the result stays flagged incomplete
/// when even that does not suffice.
inline LgDecomposition decompose_plate_output(const PhasePlate &plate, const LgMode &input, LgWindow window,
                                              double target_power, const DecomposeOptions &opt = {}) {
  if (window.l_min > window.l_max || window.p_max < 0)
    throw ConfigurationError("empty LG window");
  const ClosedFormState angular = plate_state(plate, input.l);
  LgDecomposition d = detail::decompose_in_window(angular, input, window, target_power, opt.order_scale);
  for (int k = 0; k < opt.max_expansions && d.incomplete; ++k) {
    int half = (window.l_max - window.l_min + 1);
    window = {window.l_min - half / 2 - 1, window.l_max + half / 2 + 1, 2 * window.p_max + 1};
    d = detail::decompose_in_window(angular, input, window, target_power, opt.order_scale);
  }
  return d;
}

/// l window |l - ell| <= half_width around a spiral's step.
inline LgWindow window_around(double ell, int half_width, int p_max) {
  return {static_cast<int>(std::ceil(ell - half_width)), static_cast<int>(std::floor(ell + half_width)), p_max};
}

inline void write_csv(std::ostream &os, const LgDecomposition &d) {
  os << "l,p,re,im,power,cumulative_power\n" << std::setprecision(12);
  for (const auto &e : d.entries)
    os << e.l << ',' << e.p << ',' << e.coefficient.real() << ',' << e.coefficient.imag() << ',' << e.power
       << ',' << e.cumulative_power << '\n';
}

/// Power left after subtracting the selected modes from the plate output,
/// integrated over the waist plane (Gauss-Legendre in r up to r_max w0 and in
/// theta between the plate's edges).
inline double reconstruction_residual_power(const PhasePlate &plate, const LgMode &input,
                                            const LgDecomposition &d, double r_max = 7.0,
                                            std::size_t r_panels = 28, std::size_t theta_points = 512) {
  using rule = boost::math::quadrature::gauss<double, 16>;
  std::vector<double> r_nodes, r_weights;
  const double R = r_max * input.w0;
  for (std::size_t k = 0; k < r_panels; ++k) {
    double a = R * k / r_panels, b = R * (k + 1) / r_panels, h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule::abscissa().size(); ++i) {
      double x = rule::abscissa()[i], w = rule::weights()[i];
      r_nodes.push_back(m + h * x);
      r_weights.push_back(w * h);
      if (x != 0.0) {
        r_nodes.push_back(m - h * x);
        r_weights.push_back(w * h);
      }
    }
  }
  std::vector<double> total(r_nodes.size(), 0.0);
  parallel_for(r_nodes.size(), [&](std::size_t i) {
    const double r = r_nodes[i];
    auto integrand = [&](double t) {
      cplx f = lg_amplitude(input, r, t) * transmission(plate, t);
      for (const auto &e : d.entries)
        f -= e.coefficient * lg_amplitude(LgMode{OamIndex{e.l}, e.p, input.w0}, r, t);
      return cplx(std::norm(f), 0.0);
    };
    total[i] = quad::circle_integral(integrand, plate_breakpoints(plate), theta_points).real() * r * r_weights[i];
  });
  double sum = 0.0;
  for (double t : total)
    sum += t;
  return sum;
}

} // namespace oamsim
