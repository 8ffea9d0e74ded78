#pragma once

// Closed form against brute-force quadrature, one report per quantity.

#include "oamsim/bell.hpp"

namespace oamsim {

struct OracleReport {
  std::string quantity;
  double closed_form = 0.0;
  double oracle = 0.0;
  double difference = 0.0;
  std::size_t grid = 0;
  double tolerance = 0.0;
  bool pass = false;
};

inline OracleReport make_report(std::string quantity, double closed, double oracle_value, std::size_t grid,
                                double tol) {
  if (!(tol > 0.0))
    throw ConfigurationError("oracle tolerance must be positive");
  double diff = std::abs(closed - oracle_value);
  return {std::move(quantity), closed, oracle_value, diff, grid, tol, diff <= tol};
}

inline nlohmann::json to_json(const OracleReport &r) {
  return {{"quantity", r.quantity}, {"closed_form", r.closed_form}, {"oracle", r.oracle},
          {"difference", r.difference}, {"grid", r.grid}, {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

/// One JSON object per line.
inline void write_json_lines(std::ostream &os, const std::vector<OracleReport> &reports) {
  for (const auto &r : reports)
    os << to_json(r).dump() << '\n';
}

inline OracleReport verify_overlap(const PhasePlate &plate, double alpha, double tol = 1e-8,
                                   std::size_t grid = oracle::default_points) {
  double closed = rotation_overlap_probability(plate, alpha);
  double brute = rotation_overlap_probability_oracle(plate, alpha, grid);
  return make_report("overlap " + describe(plate) + " alpha=" + std::to_string(alpha), closed, brute, grid, tol);
}

/// Coincidence fringe assembled from the two-photon integral alone, signal at
/// 0 and idler at delta, pump OAM 0.
inline Fringe quadrature_fringe(const PhasePlate &plate, std::size_t grid = oracle::default_points) {
  PhasePlate base = with_orientation(plate, 0.0);
  return {"quadrature " + describe(base), [base, grid](double d) {
            return std::norm(oracle::two_photon_amplitude(base, with_orientation(base, d), 0, grid));
          }};
}

inline OracleReport verify_bell(const PhasePlate &plate, const BellSettings &settings, double tol = 1e-8,
                                std::size_t grid = oracle::default_points) {
  double closed = chsh_s(plate_fringe(plate), settings).S;
  double brute = chsh_s(quadrature_fringe(plate, grid), settings).S;
  return make_report("S " + describe(plate), closed, brute, grid, tol);
}

/// S = 4 certificate recomputed on the quadrature fringe. closed_form holds the
/// largest probability that has to vanish, oracle the smallest that must not.
inline OracleReport verify_s4_certificate(const BinarySectorPlate &mask, const BellSettings &settings,
                                          double tol = 1e-8, std::size_t grid = oracle::default_points) {
  auto c = certify_s4(quadrature_fringe(mask, grid), settings, tol);
  OracleReport r{"S4 certificate " + describe(mask), c.max_zero, c.min_partner, c.max_zero, grid, tol, c.holds};
  return r;
}

/// The fixed sweep run by `verify`.
inline std::vector<OracleReport> standard_sweep(std::size_t grid = oracle::default_points) {
  std::vector<std::pair<PhasePlate, double>> overlaps;
  for (double ell : {0.0, 0.25, 0.3, 0.5, 1.5, 2.7})
    for (double a : {0.5, 1.0, pi, 4.0})
      overlaps.push_back({SpiralPlate{ell, 0.0}, a});
  for (double phi : {0.0, pi / 2, 2 * pi / 3, pi})
    for (double a : {-2.0, 0.7, pi / 2, 3.0})
      overlaps.push_back({StepPlate{phi, 0.0}, a});
  overlaps.push_back({make_binary_plate(pi, {{0.0, pi / 2}}), 0.9});
  overlaps.push_back({make_binary_plate(pi / 3, {{0.2, 1.0}, {2.0, 4.5}}), 1.7});

  std::vector<OracleReport> out(overlaps.size() + 4);
  parallel_for(overlaps.size(), [&](std::size_t k) {
    out[k] = verify_overlap(overlaps[k].first, overlaps[k].second, 1e-8, grid);
  });
  std::size_t k = overlaps.size();
  out[k++] = verify_bell(SpiralPlate{0.5, 0.0}, BellSettings::spiral(), 1e-8, grid);
  out[k++] = verify_bell(StepPlate{pi / 2, 0.0}, BellSettings::spiral(), 1e-8, grid);
  out[k++] = verify_bell(StepPlate{pi, 0.0}, BellSettings::polarization(), 1e-8, grid);
  out[k++] = verify_s4_certificate(make_binary_plate(pi, {{0.0, pi / 2}}), BellSettings::spiral(), 1e-8, grid);
  return out;
}

} // namespace oamsim
