#pragma once

// CHSH bookkeeping on top of a relative-angle coincidence fringe, an exact
// rational path for the parabolic fringes, and a multi-start search over
// binary sector masks.

#include <array>
#include <limits>
#include <optional>
#include <random>

#include <boost/rational.hpp>

#include "oamsim/twophoton.hpp"

namespace oamsim {

/// Coincidence probability as a function of the relative analyser angle
/// (idler minus signal), normalised so that |C| = 1.
struct Fringe {
  std::string id;
  std::function<double(double)> probability;

  double operator()(double delta) const { return probability(wrap_angle(delta)); }
};

inline Fringe spiral_fringe(double lambda = 0.5) {
  return {"spiral lambda=" + std::to_string(lambda),
          [lambda](double d) { return spiral_overlap_probability(lambda, d); }};
}

inline Fringe step_fringe(double phi) {
  return {"step phi=" + std::to_string(phi), [phi](double d) { return step_overlap_probability(phi, d); }};
}

inline Fringe binary_fringe(const BinarySectorPlate &mask) {
  return {"binary " + describe(mask), [mask](double d) { return std::norm(binary_mask_overlap(mask, d)); }};
}

/// Polarisation-style cos^2 law, the textbook two-qubit reference.
inline Fringe cos2_fringe() {
  return {"cos2", [](double d) {
            double c = std::cos(d);
            return c * c;
          }};
}

inline Fringe constant_fringe(double value) {
  return {"constant", [value](double) { return value; }};
}

/// Fringe of the coincidence experiment built from the given plate family.
inline Fringe plate_fringe(const PhasePlate &plate) {
  return std::visit(
      [](const auto &p) -> Fringe {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SpiralPlate>)
          return spiral_fringe(decompose(p).lambda);
        else if constexpr (std::is_same_v<P, StepPlate>)
          return step_fringe(p.phi);
        else
          return binary_fringe(p);
      },
      plate);
}

/// Periodic linear interpolation of a sampled fringe on a uniform [0, 2pi) grid.
inline Fringe sampled_fringe(const CoincidenceFringe &f) {
  std::vector<double> values;
  for (const auto &s : f.samples)
    values.push_back(s.probability);
  if (values.size() < 2)
    throw ConfigurationError("sampled fringe needs at least two samples");
  return {"sampled", [values](double d) {
            const double n = static_cast<double>(values.size());
            double pos = wrap_angle(d) / two_pi * n;
            auto k = static_cast<std::size_t>(std::floor(pos)) % values.size();
            double frac = pos - std::floor(pos);
            return (1.0 - frac) * values[k] + frac * values[(k + 1) % values.size()];
          }};
}

//------------------------------------------------------------------------------
// Settings and results

struct BellSettings {
  double alpha1, alpha1p, alpha2, alpha2p;
  double perp_offset;

  BellSettings(double a1, double a1p, double a2, double a2p, double perp)
      : alpha1(wrap_angle(a1)), alpha1p(wrap_angle(a1p)), alpha2(wrap_angle(a2)),
        alpha2p(wrap_angle(a2p)), perp_offset(perp) {
    if (!(perp > 0.0))
      throw ConfigurationError("perpendicular offset must be positive");
  }

  /// (-pi/4, pi/4, -pi/2, 0) with x_perp = x + pi, for 2pi-periodic fringes.
  static BellSettings spiral() { return {-pi / 4, pi / 4, -pi / 2, 0.0, pi}; }
  /// (-pi/8, pi/8, -pi/4, 0) with x_perp = x + pi/2, for pi-periodic fringes.
  static BellSettings polarization() { return {-pi / 8, pi / 8, -pi / 4, 0.0, pi / 2}; }

  BellSettings shifted(double offset) const {
    return {alpha1 + offset, alpha1p + offset, alpha2 + offset, alpha2p + offset, perp_offset};
  }
};

/// True when the fringe repeats after pi (checked on off-grid samples).
inline bool has_half_period(const Fringe &f) {
  for (int k = 0; k < 64; ++k) {
    double d = two_pi * (k + 0.37) / 64.0;
    if (std::abs(f(d + pi) - f(d)) > 1e-12)
      return false;
  }
  return true;
}

/// x_perp has to land on the zero of the aligned fringe, half a period away.
inline BellSettings default_settings(const Fringe &f) {
  return has_half_period(f) ? BellSettings::polarization() : BellSettings::spiral();
}

inline double coincidence_probability(const Fringe &f, double x, double y) { return f(y - x); }

/// The four probabilities behind one correlation, ordered
/// P(x,y), P(x+,y+), P(x,y+), P(x+,y).
inline std::array<double, 4> correlation_terms(const Fringe &f, double x, double y, double perp) {
  const double xp = x + perp, yp = y + perp;
  return {coincidence_probability(f, x, y), coincidence_probability(f, xp, yp),
          coincidence_probability(f, x, yp), coincidence_probability(f, xp, y)};
}

inline double e_from_terms(const std::array<double, 4> &p) {
  const double den = p[0] + p[1] + p[2] + p[3];
  if (!(den > 0.0))
    throw DegenerateFringe("all four coincidence probabilities vanish");
  return (p[0] + p[1] - p[2] - p[3]) / den;
}

inline double e_correlation(const Fringe &f, double x, double y, double perp_offset) {
  return e_from_terms(correlation_terms(f, x, y, perp_offset));
}

struct BellResult {
  double S;
  std::array<double, 4> E;  // a1a2, a1pa2, a1a2p, a1pa2p
  std::array<double, 16> P; // four correlation_terms blocks in E order
  BellSettings settings;
  std::string fringe_id;
};

namespace detail {
inline std::array<std::pair<double, double>, 4> setting_pairs(const BellSettings &s) {
  return {{{s.alpha1, s.alpha2}, {s.alpha1p, s.alpha2}, {s.alpha1, s.alpha2p}, {s.alpha1p, s.alpha2p}}};
}
} // namespace detail

/// S = E(a1,a2) - E(a1',a2) + E(a1,a2') + E(a1',a2').
inline BellResult chsh_s(const Fringe &f, const BellSettings &settings) {
  BellResult r{0.0, {}, {}, settings, f.id};
  auto pairs = detail::setting_pairs(settings);
  for (std::size_t k = 0; k < 4; ++k) {
    auto terms = correlation_terms(f, pairs[k].first, pairs[k].second, settings.perp_offset);
    std::copy(terms.begin(), terms.end(), r.P.begin() + 4 * k);
    r.E[k] = e_from_terms(terms);
  }
  r.S = r.E[0] - r.E[1] + r.E[2] + r.E[3];
  return r;
}

inline nlohmann::json to_json(const BellSettings &s) {
  return {{"alpha1", s.alpha1}, {"alpha1p", s.alpha1p}, {"alpha2", s.alpha2},
          {"alpha2p", s.alpha2p}, {"perp_offset", s.perp_offset}};
}

inline nlohmann::json to_json(const BellResult &r) {
  return {{"S", r.S},
          {"E", {{"a1a2", r.E[0]}, {"a1pa2", r.E[1]}, {"a1a2p", r.E[2]}, {"a1pa2p", r.E[3]}}},
          {"P", r.P},
          {"settings", to_json(r.settings)},
          {"fringe", r.fringe_id}};
}

//------------------------------------------------------------------------------
// S = 4 certificate

/// S reaches 4 iff the three '+' correlations have vanishing cross terms and
/// the '-' correlation has vanishing direct terms, each with a nonvanishing
/// partner.
struct S4Certificate {
  bool holds = true;
  double max_zero = 0.0;      // largest probability that must vanish
  double min_partner = 1e300; // smallest partner sum that must not
};

inline S4Certificate certify_s4(const Fringe &f, const BellSettings &settings, double tol = 1e-8) {
  S4Certificate c;
  auto pairs = detail::setting_pairs(settings);
  for (std::size_t k = 0; k < 4; ++k) {
    auto p = correlation_terms(f, pairs[k].first, pairs[k].second, settings.perp_offset);
    bool minus = (k == 1);
    double z0 = minus ? p[0] : p[2], z1 = minus ? p[1] : p[3];
    double partner = minus ? p[2] + p[3] : p[0] + p[1];
    c.max_zero = std::max({c.max_zero, z0, z1});
    c.min_partner = std::min(c.min_partner, partner);
  }
  c.holds = c.max_zero <= tol && c.min_partner > tol;
  return c;
}

//------------------------------------------------------------------------------
// Exact rational path

namespace exact {

using Rational = boost::rational<long long>;

/// Parabolic fringes whose values are rational at rational multiples of pi.
enum class Parabola {
  spiral_half, // (1 - d/pi)^2 on [0, 2pi)
  step_pi,     // (1 - 2|d|/pi)^2, |d| taken in [-pi, pi)
  step_half_pi // (1 - |d|/pi)^2
};

/// Angles in units of pi.
struct Settings {
  Rational alpha1, alpha1p, alpha2, alpha2p, perp;

  static Settings spiral() { return {{-1, 4}, {1, 4}, {-1, 2}, {0}, {1}}; }
  static Settings polarization() { return {{-1, 8}, {1, 8}, {-1, 4}, {0}, {1, 2}}; }
};

/// Wraps t (units of pi) into [0, 2).
inline Rational wrap(Rational t) {
  const long long period = 2 * t.denominator();
  long long q = t.numerator() / period;
  if (t.numerator() % period < 0)
    --q;
  return t - Rational{2 * q};
}

inline Rational abs(Rational r) { return r < Rational{0} ? -r : r; }

inline Rational fringe(Parabola kind, Rational delta) {
  Rational t = wrap(delta);
  Rational one{1};
  Rational u = t >= one ? t - Rational{2} : t; // [-1, 1)
  switch (kind) {
  case Parabola::spiral_half: {
    Rational v = one - t;
    return v * v;
  }
  case Parabola::step_pi: {
    Rational v = one - Rational{2} * abs(u);
    return v * v;
  }
  case Parabola::step_half_pi: {
    Rational v = one - abs(u);
    return v * v;
  }
  }
  return {};
}

struct Result {
  Rational S;
  std::array<Rational, 4> E;
  std::array<Rational, 16> P;
};

inline Result chsh(Parabola kind, const Settings &s) {
  Result r;
  const std::array<std::pair<Rational, Rational>, 4> pairs{
      {{s.alpha1, s.alpha2}, {s.alpha1p, s.alpha2}, {s.alpha1, s.alpha2p}, {s.alpha1p, s.alpha2p}}};
  for (std::size_t k = 0; k < 4; ++k) {
    auto [x, y] = pairs[k];
    Rational xp = x + s.perp, yp = y + s.perp;
    std::array<Rational, 4> p{fringe(kind, y - x), fringe(kind, yp - xp), fringe(kind, yp - x),
                              fringe(kind, y - xp)};
    for (std::size_t i = 0; i < 4; ++i)
      r.P[4 * k + i] = p[i];
    Rational den = p[0] + p[1] + p[2] + p[3];
    if (den == Rational{0})
      throw DegenerateFringe("all four coincidence probabilities vanish");
    r.E[k] = (p[0] + p[1] - p[2] - p[3]) / den;
  }
  r.S = r.E[0] - r.E[1] + r.E[2] + r.E[3];
  return r;
}

} // namespace exact

//------------------------------------------------------------------------------
// Mask search

struct SearchTracePoint {
  std::size_t iteration;
  double S;
};

struct MaskSearchResult {
  BinarySectorPlate best;
  double best_S;
  std::vector<SearchTracePoint> trace;
  BellSettings settings;
  bool degenerate = false; // best mask produced a constant or vanishing fringe
  std::size_t evaluations = 0;
};

struct SearchOptions {
  std::size_t starts = 64;
  std::uint64_t seed = 0;
  double min_gap = 1e-9;
  double initial_step = 0.25;
  double final_step = 1e-13;
};

namespace detail {

inline std::vector<Sector> sectors_from_boundaries(const std::vector<double> &b) {
  std::vector<Sector> out;
  for (std::size_t k = 0; k + 1 < b.size(); k += 2)
    out.push_back({b[k], b[k + 1]});
  return out;
}

inline double mask_score(const std::vector<double> &boundaries, double phi, const BellSettings &settings) {
  BinarySectorPlate mask{phi, sectors_from_boundaries(boundaries), 0.0};
  try {
    return chsh_s(binary_fringe(mask), settings).S;
  } catch (const DegenerateFringe &) {
    return -std::numeric_limits<double>::infinity();
  }
}

inline bool boundaries_valid(const std::vector<double> &b, double min_gap) {
  if (b.front() < 0.0 || b.back() >= two_pi)
    return false;
  for (std::size_t k = 0; k + 1 < b.size(); ++k)
    if (b[k + 1] - b[k] < min_gap)
      return false;
  // the union must not close up into the full circle
  return b.back() - b.front() < two_pi - min_gap;
}

struct RestartOutcome {
  std::vector<double> boundaries;
  double S = -std::numeric_limits<double>::infinity();
  std::vector<SearchTracePoint> trace; // local evaluation index
  std::size_t evaluations = 0;
};

/// Pattern search: one coordinate at a time, step halved after a sweep
/// without improvement.
inline RestartOutcome coordinate_descent(std::vector<double> b, double phi, const BellSettings &settings,
                                         std::size_t budget, const SearchOptions &opt) {
  RestartOutcome out;
  if (budget == 0)
    return out;
  out.boundaries = b;
  out.S = mask_score(b, phi, settings);
  out.evaluations = 1;
  out.trace.push_back({0, out.S});
  double h = opt.initial_step;
  while (out.evaluations < budget && h >= opt.final_step) {
    bool improved = false;
    for (std::size_t i = 0; i < b.size() && out.evaluations < budget; ++i) {
      for (double dir : {+1.0, -1.0}) {
        if (out.evaluations >= budget)
          break;
        auto trial = out.boundaries;
        trial[i] += dir * h;
        if (!boundaries_valid(trial, opt.min_gap))
          continue;
        double s = mask_score(trial, phi, settings);
        ++out.evaluations;
        if (s > out.S) {
          out.S = s;
          out.boundaries = std::move(trial);
          out.trace.push_back({out.evaluations - 1, s});
          improved = true;
          break;
        }
      }
    }
    if (!improved)
      h *= 0.5;
  }
  return out;
}

inline std::vector<double> random_boundaries(std::size_t count, std::mt19937_64 &rng, double min_gap) {
  std::uniform_real_distribution<double> uni(0.0, two_pi);
  std::vector<double> b(count);
  do {
    for (auto &x : b)
      x = uni(rng);
    std::sort(b.begin(), b.end());
  } while (!boundaries_valid(b, min_gap));
  return b;
}

inline std::vector<double> boundaries_of(const BinarySectorPlate &mask) {
  std::vector<double> b;
  for (const auto &s : mask.sectors) {
    b.push_back(s.begin);
    b.push_back(s.end);
  }
  return b;
}

} // namespace detail

/// Maximises S over binary masks with `sector_count` sectors and phase phi.
/// Restarts are independent and seeded from (seed, restart index); the budget
/// counts S evaluations and is split evenly across restarts. An initial mask,
/// when given, seeds restart 0; with budget 0 it is only evaluated.
inline MaskSearchResult search_max_s(std::size_t sector_count, double phi, const BellSettings &settings,
                                     std::size_t budget, const SearchOptions &opt = {},
                                     const std::optional<BinarySectorPlate> &init = std::nullopt) {
  if (sector_count < 1 && !init)
    throw ConfigurationError("search needs at least one sector");
  const std::size_t n_boundaries = init ? 2 * init->sectors.size() : 2 * sector_count;
  const double mask_phi = init ? init->phi : phi;

  if (budget == 0) {
    if (!init)
      throw ConfigurationError("a zero budget needs an initial mask to evaluate");
    MaskSearchResult r{*init, 0.0, {}, settings, false, 1};
    try {
      r.best_S = chsh_s(binary_fringe(*init), settings).S;
    } catch (const DegenerateFringe &) {
      r.best_S = 0.0;
      r.degenerate = true;
    }
    if (std::abs(std::cos(init->phi) - 1.0) < 1e-15) {
      r.best_S = 0.0;
      r.degenerate = true;
    }
    r.trace.push_back({0, r.best_S});
    return r;
  }

  const std::size_t starts = std::max<std::size_t>(1, std::min(opt.starts, budget));
  const std::size_t per_start = budget / starts;
  std::vector<detail::RestartOutcome> outcomes(starts);
  parallel_for(starts, [&](std::size_t k) {
    std::vector<double> b0;
    if (k == 0 && init) {
      b0 = detail::boundaries_of(*init);
    } else {
      std::mt19937_64 rng(opt.seed * 0x9E3779B97F4A7C15ULL + k);
      b0 = detail::random_boundaries(n_boundaries, rng, opt.min_gap);
    }
    std::size_t local_budget = per_start + (k < budget % starts ? 1 : 0);
    outcomes[k] = detail::coordinate_descent(std::move(b0), mask_phi, settings, local_budget, opt);
  });

  MaskSearchResult r{BinarySectorPlate{}, -std::numeric_limits<double>::infinity(), {}, settings, false, 0};
  std::string best_desc;
  std::size_t offset = 0;
  for (const auto &o : outcomes) {
    for (const auto &t : o.trace)
      if (r.trace.empty() || t.S > r.trace.back().S)
        r.trace.push_back({offset + t.iteration, t.S});
    offset += o.evaluations;
    r.evaluations += o.evaluations;
    if (o.boundaries.empty())
      continue;
    BinarySectorPlate mask{mask_phi, detail::sectors_from_boundaries(o.boundaries), 0.0};
    std::string desc = describe(mask);
    if (o.S > r.best_S || (o.S == r.best_S && desc < best_desc)) {
      r.best_S = o.S;
      r.best = std::move(mask);
      best_desc = std::move(desc);
    }
  }
  if (!std::isfinite(r.best_S)) {
    r.best_S = 0.0;
    r.degenerate = true;
  } else {
    r.degenerate = std::abs(std::cos(mask_phi) - 1.0) < 1e-15; // constant fringe
    if (r.degenerate)
      r.best_S = 0.0;
  }
  return r;
}

inline nlohmann::json to_json(const MaskSearchResult &r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto &t : r.trace)
    trace.push_back({t.iteration, t.S});
  return {{"best_mask", to_json(PhasePlate{r.best})},
          {"best_S", r.best_S},
          {"trace", trace},
          {"settings", to_json(r.settings)},
          {"degenerate", r.degenerate},
          {"evaluations", r.evaluations}};
}

} // namespace oamsim
