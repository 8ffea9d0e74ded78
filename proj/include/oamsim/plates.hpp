#pragma once

// Azimuthal phase plates as unitary operators on the angular state space.

#include <optional>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "oamsim/angular.hpp"

namespace oamsim {

/// Spiral ramp exp(i ell theta) with its radial edge at alpha.
struct SpiralPlate {
  double ell = 0.0;
  double alpha = 0.0;
};

/// Straight edge through the axis: phase phi on [alpha, alpha + pi).
struct StepPlate {
  double phi = 0.0;
  double alpha = 0.0;
};

/// Half-open angular interval [begin, end).
struct Sector {
  double begin;
  double end;
  double measure() const { return end - begin; }
};

/// Phase phi on a union of sectors, the whole pattern rotated by alpha.
struct BinarySectorPlate {
  double phi = 0.0;
  std::vector<Sector> sectors;
  double alpha = 0.0;
};

using PhasePlate = std::variant<SpiralPlate, StepPlate, BinarySectorPlate>;

/// ell = j + lambda with lambda in [0, 1).
struct PlateDecomposition {
  SpiralPlate plate;
  int j;
  double lambda;
};

inline PlateDecomposition decompose(const SpiralPlate &p) {
  double j = std::floor(p.ell);
  double lambda = p.ell - j;
  if (lambda >= 1.0) { // ell just below an integer
    j += 1.0;
    lambda = 0.0;
  }
  return {p, static_cast<int>(j), lambda};
}

inline double sector_measure(const std::vector<Sector> &sectors) {
  double m = 0.0;
  for (const auto &s : sectors)
    m += s.measure();
  return m;
}

/// Throws ConfigurationError unless the sectors are nonempty, sorted, disjoint
/// subsets of [0, 2pi) with total measure strictly inside (0, 2pi).
inline void validate_sectors(const std::vector<Sector> &sectors) {
  if (sectors.empty())
    throw ConfigurationError("binary plate needs at least one sector");
  double last_end = 0.0;
  for (std::size_t k = 0; k < sectors.size(); ++k) {
    const auto &s = sectors[k];
    if (!(s.begin >= 0.0 && s.end <= two_pi && s.begin < s.end))
      throw ConfigurationError("sector " + std::to_string(k) + " is empty or outside [0, 2pi)");
    if (k > 0 && s.begin < last_end)
      throw ConfigurationError("sectors must be sorted and disjoint");
    last_end = s.end;
  }
  double m = sector_measure(sectors);
  if (!(m > 0.0 && m < two_pi))
    throw ConfigurationError("sector union must cover a measure inside (0, 2pi)");
}

inline BinarySectorPlate make_binary_plate(double phi, std::vector<Sector> sectors, double alpha = 0.0) {
  validate_sectors(sectors);
  return {phi, std::move(sectors), wrap_angle(alpha)};
}

inline double orientation(const PhasePlate &p) {
  return std::visit([](const auto &x) { return x.alpha; }, p);
}

inline PhasePlate with_orientation(PhasePlate p, double alpha) {
  std::visit([alpha](auto &x) { x.alpha = wrap_angle(alpha); }, p);
  return p;
}

/// Pointwise transmission t(theta), written directly from the plate
/// definitions.
inline cplx transmission(const PhasePlate &plate, double theta) {
  const double t = wrap_angle(theta);
  return std::visit(
      [t](const auto &p) -> cplx {
        using P = std::decay_t<decltype(p)>;
        const double alpha = wrap_angle(p.alpha);
        if constexpr (std::is_same_v<P, SpiralPlate>) {
          double branch = t < alpha ? (two_pi - alpha) * p.ell : -alpha * p.ell;
          return std::exp(I * (p.ell * t + branch));
        } else if constexpr (std::is_same_v<P, StepPlate>) {
          return wrap_angle(t - alpha) < pi ? std::exp(I * p.phi) : cplx{1.0, 0.0};
        } else {
          const double local = wrap_angle(t - alpha);
          for (const auto &s : p.sectors)
            if (local >= s.begin && local < s.end)
              return std::exp(I * p.phi);
          return cplx{1.0, 0.0};
        }
      },
      plate);
}

/// Angles where the transmission jumps.
inline std::vector<double> plate_breakpoints(const PhasePlate &plate) {
  return std::visit(
      [](const auto &p) -> std::vector<double> {
        using P = std::decay_t<decltype(p)>;
        const double alpha = wrap_angle(p.alpha);
        if constexpr (std::is_same_v<P, SpiralPlate>) {
          return {alpha};
        } else if constexpr (std::is_same_v<P, StepPlate>) {
          return {alpha, wrap_angle(alpha + pi)};
        } else {
          std::vector<double> out;
          for (const auto &s : p.sectors) {
            out.push_back(wrap_angle(s.begin + alpha));
            out.push_back(wrap_angle(s.end + alpha));
          }
          return out;
        }
      },
      plate);
}

namespace detail {

/// Ramp exponent carried by the plate (nonzero for spirals only).
inline double plate_twist(const PhasePlate &plate) {
  if (const auto *s = std::get_if<SpiralPlate>(&plate))
    return s->ell;
  return 0.0;
}

/// Piecewise-constant part of the transmission.
inline std::vector<PhaseSegment> plate_segments(const PhasePlate &plate) {
  return std::visit(
      [](const auto &p) -> std::vector<PhaseSegment> {
        using P = std::decay_t<decltype(p)>;
        const double alpha = wrap_angle(p.alpha);
        const cplx on{1.0, 0.0};
        if constexpr (std::is_same_v<P, SpiralPlate>) {
          return spiral_edge_segments(p.ell, alpha);
        } else if constexpr (std::is_same_v<P, StepPlate>) {
          const cplx e = std::exp(I * p.phi);
          double other = wrap_angle(alpha + pi);
          // [alpha, alpha + pi) wraps through zero when alpha >= pi
          if (alpha < pi)
            return {{0.0, on}, {alpha, e}, {other, on}};
          return {{0.0, e}, {other, on}, {alpha, e}};
        } else {
          const cplx e = std::exp(I * p.phi);
          std::vector<double> pts{0.0};
          for (const auto &s : p.sectors) {
            pts.push_back(wrap_angle(s.begin + alpha));
            pts.push_back(wrap_angle(s.end + alpha));
          }
          std::sort(pts.begin(), pts.end());
          pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
          // membership is decided at segment midpoints, away from rounding
          // at the rotated boundaries
          std::vector<PhaseSegment> out;
          for (std::size_t k = 0; k < pts.size(); ++k) {
            double next = k + 1 < pts.size() ? pts[k + 1] : two_pi;
            double local = wrap_angle(0.5 * (pts[k] + next) - alpha);
            bool inside = false;
            for (const auto &sec : p.sectors)
              inside = inside || (local >= sec.begin && local < sec.end);
            out.push_back({pts[k], inside ? e : on});
          }
          return out;
        }
      },
      plate);
}

inline ClosedFormState multiply(const ClosedFormState &s, double twist,
                                const std::vector<PhaseSegment> &factor) {
  ClosedFormState f(0.0, factor);
  std::vector<double> pts;
  for (const auto &seg : s.segments())
    pts.push_back(seg.begin);
  for (const auto &seg : f.segments())
    pts.push_back(seg.begin);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<PhaseSegment> out;
  out.reserve(pts.size());
  for (double t : pts)
    out.push_back({t, s.factor_at(t) * f.factor_at(t)});
  return ClosedFormState(s.twist() + twist, std::move(out));
}

} // namespace detail

//------------------------------------------------------------------------------
// Operator action

inline ClosedFormState apply(const PhasePlate &plate, const ClosedFormState &s) {
  return detail::multiply(s, detail::plate_twist(plate), detail::plate_segments(plate));
}

inline SampledState apply(const PhasePlate &plate, const SampledState &s) {
  SampledState out = s;
  for (std::size_t k = 0; k < out.values.size(); ++k)
    out.values[k] *= transmission(plate, s.grid.theta(k));
  return out;
}

inline AngularWavefunction apply(const PhasePlate &plate, const AngularWavefunction &s) {
  return std::visit([&](const auto &x) -> AngularWavefunction { return oamsim::apply(plate, x); }, s);
}

/// Same geometry with the phase profile negated; undoes apply exactly.
inline PhasePlate adjoint(const PhasePlate &plate) {
  return std::visit(
      [](auto p) -> PhasePlate {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SpiralPlate>)
          p.ell = -p.ell;
        else
          p.phi = -p.phi;
        return p;
      },
      plate);
}

/// Basis state produced by the plate acting on |l>.
inline ClosedFormState plate_state(const PhasePlate &plate, OamIndex l) {
  return oamsim::apply(plate, ClosedFormState::oam(l));
}

//------------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const PhasePlate &plate) {
  return std::visit(
      [](const auto &p) -> nlohmann::json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SpiralPlate>) {
          return {{"type", "spiral"}, {"ell", p.ell}, {"alpha", p.alpha}};
        } else if constexpr (std::is_same_v<P, StepPlate>) {
          return {{"type", "step"}, {"phi", p.phi}, {"alpha", p.alpha}};
        } else {
          nlohmann::json sectors = nlohmann::json::array();
          for (const auto &s : p.sectors)
            sectors.push_back({s.begin, s.end});
          return {{"type", "binary"}, {"phi", p.phi}, {"alpha", p.alpha}, {"sectors", sectors}};
        }
      },
      plate);
}

inline PhasePlate plate_from_json(const nlohmann::json &j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    const double alpha = wrap_angle(j.value("alpha", 0.0));
    if (type == "spiral")
      return SpiralPlate{j.at("ell").get<double>(), alpha};
    if (type == "step")
      return StepPlate{j.at("phi").get<double>(), alpha};
    if (type == "binary") {
      std::vector<Sector> sectors;
      for (const auto &s : j.at("sectors")) {
        if (!s.is_array() || s.size() != 2)
          throw ConfigurationError("each sector must be a [begin, end] pair");
        sectors.push_back({s[0].get<double>(), s[1].get<double>()});
      }
      return make_binary_plate(j.at("phi").get<double>(), std::move(sectors), alpha);
    }
    throw ConfigurationError("unknown plate type '" + type + "'");
  } catch (const nlohmann::json::exception &e) {
    throw ConfigurationError(std::string("malformed plate description: ") + e.what());
  }
}

inline PhasePlate plate_from_json_text(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigurationError(std::string("plate description is not JSON: ") + e.what());
  }
  return plate_from_json(j);
}

inline std::string describe(const PhasePlate &plate) { return to_json(plate).dump(); }

} // namespace oamsim
