#pragma once

// Closed-form rotation overlaps: a plate state against the same state with the
// plate turned by alpha.

#include <iomanip>
#include <ostream>

#include "oamsim/oracle_quadrature.hpp"
#include "oamsim/plates.hpp"

namespace oamsim {

/// <a^(l+j)_lambda(0) | a^(l+j)_lambda(alpha)>, the rotated state being the
/// alpha = 0 field carried rigidly around the axis.
inline cplx spiral_overlap_amplitude(OamIndex l, int j, double lambda, double alpha) {
  alpha = wrap_angle(alpha);
  cplx bracket = (two_pi - alpha) + alpha * std::exp(I * (two_pi * lambda));
  return bracket / two_pi * std::exp(-I * ((l.l + j + lambda) * alpha));
}

/// (1 - alpha/pi)^2 sin^2(lambda pi) + cos^2(lambda pi); alpha in [0, 2pi).
inline double spiral_overlap_probability(double lambda, double alpha) {
  alpha = wrap_angle(alpha);
  const double s = std::sin(lambda * pi), c = std::cos(lambda * pi);
  const double u = 1.0 - alpha / pi;
  return u * u * s * s + c * c;
}

/// Real overlap of a straight-edge state with its copy turned by alpha. The
/// amplitude is even in alpha; alpha is taken modulo 2pi into [-pi, pi).
inline double step_overlap_amplitude(double phi, double alpha) {
  const double a = std::abs(wrap_angle_pm(alpha));
  return 1.0 + (a / pi) * (std::cos(phi) - 1.0);
}

inline double step_overlap_probability(double phi, double alpha) {
  double amp = step_overlap_amplitude(phi, alpha);
  return amp * amp;
}

//------------------------------------------------------------------------------
// Binary sector masks

namespace detail {

/// Sectors of the mask on [0, 2pi) after rotating the pattern by shift, with
/// wrapped pieces split in two.
inline std::vector<Sector> unrolled(const std::vector<Sector> &sectors, double shift) {
  std::vector<Sector> out;
  for (const auto &s : sectors) {
    double b = wrap_angle(s.begin + shift);
    double e = b + s.measure();
    if (e <= two_pi) {
      out.push_back({b, e});
    } else {
      out.push_back({b, two_pi});
      out.push_back({0.0, e - two_pi});
    }
  }
  return out;
}

} // namespace detail

/// measure(M \ (M + alpha)) for the sector union M.
inline double mask_shift_measure(const std::vector<Sector> &sectors, double alpha) {
  auto a = detail::unrolled(sectors, 0.0);
  auto b = detail::unrolled(sectors, alpha);
  double common = 0.0;
  for (const auto &x : a)
    for (const auto &y : b)
      common += std::max(0.0, std::min(x.end, y.end) - std::max(x.begin, y.begin));
  return std::max(0.0, sector_measure(sectors) - common);
}

/// <mask(0)|mask(alpha)> = 1 - (m/pi)(1 - cos phi), m = measure(M \ (M + alpha)).
/// Rotation preserves the measure of M, so both mismatched pieces have size m
/// and the amplitude is real.
inline cplx binary_mask_overlap(const BinarySectorPlate &mask, double alpha) {
  const double m = mask_shift_measure(mask.sectors, alpha);
  cplx e = std::exp(I * mask.phi);
  return ((two_pi - 2.0 * m) + m * e + m * std::conj(e)) / two_pi;
}

//------------------------------------------------------------------------------
// Overlap curves

enum class PlateFamily { spiral, step, binary };

inline const char *family_name(PlateFamily f) {
  switch (f) {
  case PlateFamily::spiral:
    return "spiral";
  case PlateFamily::step:
    return "step";
  case PlateFamily::binary:
    return "binary";
  }
  return "?";
}

inline PlateFamily family_of(const PhasePlate &p) {
  if (std::holds_alternative<SpiralPlate>(p))
    return PlateFamily::spiral;
  if (std::holds_alternative<StepPlate>(p))
    return PlateFamily::step;
  return PlateFamily::binary;
}

struct CurveSample {
  double alpha;
  double probability;
};

struct OverlapCurve {
  PlateFamily family;
  double parameter; // lambda for spirals, phi otherwise
  std::vector<CurveSample> samples;
  std::string closed_form_id; // "spiral-parabola" or "edge-parabola"
};

/// Closed-form rotation overlap probability of the plate's own states.
inline double rotation_overlap_probability(const PhasePlate &plate, double alpha) {
  return std::visit(
      [alpha](const auto &p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SpiralPlate>)
          return spiral_overlap_probability(decompose(p).lambda, alpha);
        else if constexpr (std::is_same_v<P, StepPlate>)
          return step_overlap_probability(p.phi, alpha);
        else
          return std::norm(binary_mask_overlap(p, alpha));
      },
      plate);
}

/// Same quantity from quadrature of the plate states.
inline double rotation_overlap_probability_oracle(const PhasePlate &plate, double alpha,
                                                  std::size_t n_points = oracle::default_points) {
  PhasePlate base = with_orientation(plate, 0.0);
  PhasePlate turned = with_orientation(plate, alpha);
  return std::norm(oracle::plate_overlap(base, OamIndex{0}, turned, OamIndex{0}, n_points));
}

/// Thrown by sample_curve in verification mode.
class OracleMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Uniform samples alpha_k = 2 pi k / n over [0, 2pi). With verify set, every
/// sample is recomputed by quadrature and must agree within tolerance.
inline OverlapCurve sample_curve(const PhasePlate &plate, std::size_t n_samples, bool verify = false,
                                 double tolerance = 1e-8) {
  if (n_samples < 2)
    throw ConfigurationError("an overlap curve needs at least two samples");
  OverlapCurve curve;
  curve.family = family_of(plate);
  curve.parameter = std::visit(
      [](const auto &p) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, SpiralPlate>)
          return decompose(p).lambda;
        else
          return p.phi;
      },
      plate);
  curve.closed_form_id = curve.family == PlateFamily::spiral ? "spiral-parabola" : "edge-parabola";
  curve.samples.resize(n_samples);
  std::vector<double> mismatch(n_samples, 0.0);
  parallel_for(n_samples, [&](std::size_t k) {
    double alpha = two_pi * static_cast<double>(k) / static_cast<double>(n_samples);
    double p = rotation_overlap_probability(plate, alpha);
    curve.samples[k] = {alpha, p};
    if (verify)
      mismatch[k] = std::abs(p - rotation_overlap_probability_oracle(plate, alpha));
  });
  for (std::size_t k = 0; k < n_samples; ++k)
    if (mismatch[k] > tolerance)
      throw OracleMismatch("overlap sample at alpha=" + std::to_string(curve.samples[k].alpha) +
                           " differs from quadrature by " + std::to_string(mismatch[k]));
  return curve;
}

inline void write_csv(std::ostream &os, const OverlapCurve &curve) {
  os << "alpha_rad,probability\n" << std::setprecision(12);
  for (const auto &s : curve.samples)
    os << s.alpha << ',' << s.probability << '\n';
}

} // namespace oamsim
