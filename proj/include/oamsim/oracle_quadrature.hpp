#pragma once

// First-principles overlaps: transmissions are evaluated pointwise and
// integrated numerically, without touching the closed-form segment algebra.

#include "oamsim/plates.hpp"
#include "oamsim/quadrature.hpp"

namespace oamsim::oracle {

inline constexpr std::size_t default_points = 4096;

/// <P_a l_a | P_b l_b> by panel quadrature.
inline cplx plate_overlap(const PhasePlate &a, OamIndex la, const PhasePlate &b, OamIndex lb,
                          std::size_t n_points = default_points) {
  auto bp = plate_breakpoints(a);
  auto bb = plate_breakpoints(b);
  bp.insert(bp.end(), bb.begin(), bb.end());
  auto integrand = [&](double t) {
    cplx psi_a = transmission(a, t) * std::exp(I * (la.l * t));
    cplx psi_b = transmission(b, t) * std::exp(I * (lb.l * t));
    return std::conj(psi_a) * psi_b;
  };
  return quad::circle_integral(integrand, bp, n_points) / two_pi;
}

/// <P l | R(alpha) P l>, R rotating the whole field: psi(theta) -> psi(theta - alpha).
inline cplx rotated_overlap(const PhasePlate &plate_at_zero, OamIndex l, double alpha,
                            std::size_t n_points = default_points) {
  alpha = wrap_angle(alpha);
  auto psi = [&](double t) { return transmission(plate_at_zero, t) * std::exp(I * (l.l * t)); };
  auto rotated = [&](double t) { return psi(wrap_angle(t - alpha)); };
  auto bp = plate_breakpoints(plate_at_zero);
  std::vector<double> cuts{alpha};
  for (double b : bp)
    cuts.push_back(wrap_angle(b + alpha));
  cuts.insert(cuts.end(), bp.begin(), bp.end());
  auto integrand = [&](double t) { return std::conj(psi(t)) * rotated(t); };
  return quad::circle_integral(integrand, cuts, n_points) / two_pi;
}

/// Coincidence amplitude from the angular pump correlation directly:
/// (1/2pi) \int exp(i q theta) t_s(theta) conj(t_i(theta) exp(i q theta)) d theta,
/// i.e. the double projection of the two-photon state without any collapse step.
inline cplx two_photon_amplitude(const PhasePlate &signal, const PhasePlate &idler, int q,
                                 std::size_t n_points = default_points) {
  auto bp = plate_breakpoints(signal);
  auto bi = plate_breakpoints(idler);
  bp.insert(bp.end(), bi.begin(), bi.end());
  auto integrand = [&](double t) {
    cplx pump = std::exp(I * (q * t));
    cplx signal_proj = transmission(signal, t);                           // conj of S^dag|0>
    cplx idler_proj = std::conj(transmission(idler, t) * std::exp(I * (q * t))); // conj of S|q>
    return pump * signal_proj * idler_proj;
  };
  return quad::circle_integral(integrand, bp, n_points) / two_pi;
}

} // namespace oamsim::oracle
