#pragma once

// Angular factor of the transverse field: states on the unit circle, the
// integer OAM basis, and exact/grid inner products between them.

#include <algorithm>
#include <bit>
#include <cassert>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/trigamma.hpp>

#include "oamsim/common.hpp"

namespace oamsim {

/// Integer OAM eigenvalue l (units of hbar).
struct OamIndex {
  int l = 0;
  constexpr OamIndex() = default;
  constexpr explicit OamIndex(int value) : l(value) {}
  friend constexpr auto operator<=>(OamIndex, OamIndex) = default;
};

/// Uniform sampling of [0, 2pi), theta_k = 2 pi k / n.
class AngularGrid {
public:
  static constexpr std::size_t default_points = 4096;

  explicit AngularGrid(std::size_t n_points = default_points) : n_(n_points) {
    if (n_ < 16 || !std::has_single_bit(n_))
      throw ConfigurationError("angular grid needs a power of two >= 16 points, got " +
                               std::to_string(n_));
  }

  std::size_t size() const { return n_; }
  double step() const { return two_pi / static_cast<double>(n_); }
  double theta(std::size_t k) const { return two_pi * static_cast<double>(k) / static_cast<double>(n_); }

  friend bool operator==(const AngularGrid &, const AngularGrid &) = default;

private:
  std::size_t n_;
};

/// Constant complex factor on [begin, next.begin).
struct PhaseSegment {
  double begin;
  cplx factor;
};

/// psi(theta) = factor(theta) exp(i nu theta) / sqrt(2 pi) on [0, 2pi), with a
/// piecewise-constant factor. The segment list is the jump list: a jump sits
/// at every segment start after the first.
class ClosedFormState {
public:
  ClosedFormState(double twist, std::vector<PhaseSegment> segments)
      : twist_(twist), segments_(std::move(segments)) {
    normalize_segments();
  }

  /// |l>: exp(i l theta)/sqrt(2pi).
  static ClosedFormState oam(OamIndex l) {
    return ClosedFormState(static_cast<double>(l.l), {{0.0, cplx{1.0, 0.0}}});
  }

  double twist() const { return twist_; }
  const std::vector<PhaseSegment> &segments() const { return segments_; }

  /// (angle, phase ratio) at each discontinuity of the factor.
  std::vector<std::pair<double, cplx>> jumps() const {
    std::vector<std::pair<double, cplx>> out;
    for (std::size_t k = 1; k < segments_.size(); ++k)
      out.emplace_back(segments_[k].begin, segments_[k].factor / segments_[k - 1].factor);
    return out;
  }

  cplx factor_at(double theta) const {
    double t = wrap_angle(theta);
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const PhaseSegment &s) { return v < s.begin; });
    return std::prev(it)->factor;
  }

  cplx operator()(double theta) const {
    double t = wrap_angle(theta);
    return factor_at(t) * std::exp(I * (twist_ * t)) / std::sqrt(two_pi);
  }

  /// Multiplies every segment by a constant (a global phase when |c| = 1).
  ClosedFormState scaled(cplx c) const {
    auto seg = segments_;
    for (auto &s : seg)
      s.factor *= c;
    return ClosedFormState(twist_, std::move(seg));
  }

private:
  void normalize_segments() {
    if (segments_.empty())
      throw ConfigurationError("closed-form state needs at least one segment");
    for (auto &s : segments_)
      s.begin = wrap_angle(s.begin);
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const PhaseSegment &a, const PhaseSegment &b) { return a.begin < b.begin; });
    if (segments_.front().begin != 0.0) {
      // the last segment wraps through 2pi back to 0
      segments_.insert(segments_.begin(), {0.0, segments_.back().factor});
    }
    // drop zero-length segments (later entry wins) and merge equal neighbours
    std::vector<PhaseSegment> out;
    for (const auto &s : segments_) {
      if (!out.empty() && out.back().begin == s.begin)
        out.back() = s;
      else if (!out.empty() && out.back().factor == s.factor)
        continue;
      else
        out.push_back(s);
    }
    segments_ = std::move(out);
  }

  double twist_;
  std::vector<PhaseSegment> segments_;
};

/// Samples of psi(theta_k) on a uniform grid.
struct SampledState {
  AngularGrid grid;
  std::vector<cplx> values;
};

using AngularWavefunction = std::variant<ClosedFormState, SampledState>;

/// |a^(l)_lambda(alpha)>: the integer state l passed through a plate with
/// fractional step lambda whose edge sits at alpha.
struct NonIntegerOamState {
  OamIndex l;
  double lambda;
  double alpha;

  NonIntegerOamState(OamIndex l_, double lambda_, double alpha_)
      : l(l_), lambda(lambda_), alpha(wrap_angle(alpha_)) {
    if (!(lambda >= 0.0 && lambda < 1.0))
      throw ConfigurationError("fractional OAM part must lie in [0, 1)");
  }
};

/// Piecewise constants of an edge at alpha for step index ell: the branch
/// [0, alpha) carries exp(i (2pi - alpha) ell), [alpha, 2pi) carries exp(-i alpha ell).
inline std::vector<PhaseSegment> spiral_edge_segments(double ell, double alpha) {
  alpha = wrap_angle(alpha);
  if (alpha == 0.0)
    return {{0.0, cplx{1.0, 0.0}}};
  return {{0.0, std::exp(I * ((two_pi - alpha) * ell))}, {alpha, std::exp(-I * (alpha * ell))}};
}

inline ClosedFormState to_closed_form(const NonIntegerOamState &s) {
  return ClosedFormState(s.l.l + s.lambda, spiral_edge_segments(s.lambda, s.alpha));
}

//------------------------------------------------------------------------------
// Inner products

namespace detail {

/// Integral of exp(i k t) over [t0, t1].
inline cplx exp_integral(double k, double t0, double t1) {
  if (std::abs(k) * (t1 - t0) < 1e-7) {
    // series keeps the small-k limit accurate
    double len = t1 - t0;
    cplx mid = std::exp(I * (k * 0.5 * (t0 + t1)));
    return mid * len * (1.0 - k * k * len * len / 24.0);
  }
  return (std::exp(I * (k * t1)) - std::exp(I * (k * t0))) / (I * k);
}

inline std::vector<double> merged_breakpoints(const ClosedFormState &a, const ClosedFormState &b) {
  std::vector<double> pts;
  for (const auto &s : a.segments())
    pts.push_back(s.begin);
  for (const auto &s : b.segments())
    pts.push_back(s.begin);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  pts.push_back(two_pi);
  return pts;
}

} // namespace detail

/// <a|b>, integrated exactly segment by segment.
inline cplx inner_product(const ClosedFormState &a, const ClosedFormState &b) {
  const double k = b.twist() - a.twist();
  auto pts = detail::merged_breakpoints(a, b);
  cplx sum{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double t0 = pts[i], t1 = pts[i + 1];
    sum += std::conj(a.factor_at(t0)) * b.factor_at(t0) * detail::exp_integral(k, t0, t1);
  }
  return sum / two_pi;
}

/// <a|b> by the rectangle rule on the shared grid.
inline cplx inner_product(const SampledState &a, const SampledState &b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size())
    throw ConfigurationError("inner product of states sampled on different grids");
  cplx sum{0.0, 0.0};
  for (std::size_t k = 0; k < a.values.size(); ++k)
    sum += std::conj(a.values[k]) * b.values[k];
  return sum * a.grid.step();
}

inline SampledState to_sampled(const ClosedFormState &s, const AngularGrid &grid) {
  SampledState out{grid, std::vector<cplx>(grid.size())};
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.values[k] = s(grid.theta(k));
  return out;
}

/// Mixed pairs are compared on the sampled member's grid.
inline cplx inner_product(const AngularWavefunction &a, const AngularWavefunction &b) {
  return std::visit(
      [](const auto &x, const auto &y) -> cplx {
        using X = std::decay_t<decltype(x)>;
        using Y = std::decay_t<decltype(y)>;
        if constexpr (std::is_same_v<X, Y>)
          return inner_product(x, y);
        else if constexpr (std::is_same_v<X, ClosedFormState>)
          return inner_product(to_sampled(x, y.grid), y);
        else
          return inner_product(x, to_sampled(y, x.grid));
      },
      a, b);
}

inline double norm(const AngularWavefunction &s) { return std::sqrt(std::abs(inner_product(s, s))); }

//------------------------------------------------------------------------------
// Rotation

/// psi(theta - alpha): the state carried rigidly around by alpha.
inline ClosedFormState rotate(const ClosedFormState &s, double alpha) {
  alpha = wrap_angle(alpha);
  if (alpha == 0.0)
    return s;
  const double nu = s.twist();
  const cplx after = std::exp(-I * (nu * alpha));           // theta >= alpha
  const cplx before = std::exp(I * (nu * (two_pi - alpha))); // theta < alpha
  std::vector<double> pts{0.0, alpha};
  for (const auto &seg : s.segments())
    pts.push_back(wrap_angle(seg.begin + alpha));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  // look each piece up at its midpoint so that rounding in wrap(begin + alpha)
  // cannot pick the neighbouring segment
  std::vector<PhaseSegment> seg;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double t = pts[k], next = k + 1 < pts.size() ? pts[k + 1] : two_pi;
    const double mid = 0.5 * (t + next);
    seg.push_back({t, s.factor_at(wrap_angle(mid - alpha)) * (mid >= alpha ? after : before)});
  }
  return ClosedFormState(nu, std::move(seg));
}

/// Cyclic shift; alpha must be a whole number of grid steps.
inline SampledState rotate(const SampledState &s, double alpha) {
  double steps = wrap_angle(alpha) / s.grid.step();
  auto shift = static_cast<std::size_t>(std::llround(steps));
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw ConfigurationError("sampled rotation must be a multiple of the grid step");
  const std::size_t n = s.values.size();
  SampledState out{s.grid, std::vector<cplx>(n)};
  for (std::size_t k = 0; k < n; ++k)
    out.values[(k + shift) % n] = s.values[k];
  return out;
}

//------------------------------------------------------------------------------
// OAM spectrum

struct OamAmplitude {
  int l;
  cplx amplitude;
};

inline std::vector<OamAmplitude> oam_spectrum(const AngularWavefunction &state, OamIndex l_min,
                                              OamIndex l_max) {
  if (l_max < l_min)
    throw ConfigurationError("oam_spectrum needs l_min <= l_max");
  std::vector<OamAmplitude> out;
  out.reserve(static_cast<std::size_t>(l_max.l - l_min.l + 1));
  for (int l = l_min.l; l <= l_max.l; ++l)
    out.push_back({l, inner_product(AngularWavefunction{ClosedFormState::oam(OamIndex{l})}, state)});
  return out;
}

inline double spectrum_power(const std::vector<OamAmplitude> &spectrum) {
  double p = 0.0;
  for (const auto &a : spectrum)
    p += std::norm(a.amplitude);
  return p;
}

/// Power of exp(i nu theta)/sqrt(2pi) (one edge, any orientation) outside
/// [l_min, l_max]: sin^2(pi nu)/pi^2 * sum 1/(l - nu)^2 over excluded l.
inline double oam_tail_power(double nu, int l_min, int l_max) {
  double frac = nu - std::floor(nu);
  if (frac == 0.0) {
    auto l = static_cast<int>(nu);
    return (l >= l_min && l <= l_max) ? 0.0 : 1.0;
  }
  double s = std::sin(pi * frac);
  double upper = boost::math::trigamma(static_cast<double>(l_max) + 1.0 - nu);
  double lower = boost::math::trigamma(nu - static_cast<double>(l_min) + 1.0);
  return s * s / (pi * pi) * (upper + lower);
}

} // namespace oamsim
