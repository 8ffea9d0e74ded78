#pragma once

// Thin-crystal SPDC pair in the half-integer OAM basis, the collapse caused by
// a signal-arm detection, and the resulting coincidence fringe.

#include "oamsim/overlap.hpp"

namespace oamsim {

/// Pump in a pure OAM mode q. The radial ket and fibre projections only ever
/// enter through the constant C, which is normalised to 1 by default.
struct TwoPhotonState {
  int pump_oam = 0;
  double basis_lambda = 0.5;
  cplx radial_constant{1.0, 0.0};
};

enum class Arm { signal, idler };

/// The plate in front of a single-mode fibre. For the idler arm the analyser
/// projects onto plate|q>, for the signal arm onto plate^dagger|0>.
struct AnalyzerSetting {
  PhasePlate plate;
  Arm arm = Arm::signal;
};

/// Idler basis index paired with signal index n: q - n - 1.
constexpr int schmidt_pairing(int q, int n) { return q - n - 1; }

namespace detail {

inline void require_supported(const PhasePlate &plate) {
  if (const auto *s = std::get_if<SpiralPlate>(&plate)) {
    double lambda = decompose(*s).lambda;
    if (std::abs(lambda - 0.5) > 1e-12)
      throw UnsupportedAnalyzer("spiral analysers must have a half-integer step, got ell=" +
                                std::to_string(s->ell));
  }
}

} // namespace detail

/// Idler state after the signal detector clicks: plate_s|q>, which for a
/// spiral j + 1/2 at alpha_s is |a^(q+j)_{1/2}(alpha_s)> up to C.
inline ClosedFormState collapse_idler(const TwoPhotonState &state, const PhasePlate &signal_plate) {
  detail::require_supported(signal_plate);
  return plate_state(signal_plate, OamIndex{state.pump_oam}).scaled(state.radial_constant);
}

inline ClosedFormState collapse_idler(const TwoPhotonState &state, const AnalyzerSetting &signal) {
  return collapse_idler(state, signal.plate);
}

/// Projection state of the idler analyser: plate_i|q>.
inline ClosedFormState idler_projection(const TwoPhotonState &state, const AnalyzerSetting &idler) {
  detail::require_supported(idler.plate);
  return plate_state(idler.plate, OamIndex{state.pump_oam});
}

/// B = <idler projection | collapsed idler>.
inline cplx coincidence_amplitude(const TwoPhotonState &state, const AnalyzerSetting &signal,
                                  const AnalyzerSetting &idler) {
  if (family_of(signal.plate) != family_of(idler.plate))
    throw UnsupportedAnalyzer("signal and idler analysers must use the same plate family");
  return inner_product(idler_projection(state, idler), collapse_idler(state, signal));
}

/// Double projection <s|<i| sum_n |a^n>|a^(q-n-1)> with the Schmidt sum cut at
/// |n| <= n_max, together with a Cauchy-Schwarz bound on the dropped terms.
struct SchmidtSumResult {
  cplx amplitude;
  double truncation_bound;
};

inline SchmidtSumResult schmidt_sum_amplitude(const TwoPhotonState &state, const PhasePlate &signal_plate,
                                              const PhasePlate &idler_plate, int n_max = 512) {
  const int q = state.pump_oam;
  const double lambda = state.basis_lambda;
  const ClosedFormState s = plate_state(adjoint(signal_plate), OamIndex{0});
  const ClosedFormState i = plate_state(idler_plate, OamIndex{q});
  auto basis = [lambda](int n) { return to_closed_form(NonIntegerOamState(OamIndex{n}, lambda, 0.0)); };

  cplx sum{0.0, 0.0};
  double kept_s = 0.0, kept_i = 0.0;
  for (int n = -n_max; n <= n_max; ++n) {
    cplx cs = inner_product(s, basis(n));
    cplx ci = inner_product(i, basis(schmidt_pairing(q, n)));
    sum += cs * ci;
    kept_s += std::norm(cs);
    kept_i += std::norm(ci);
  }
  double bound = std::sqrt(std::max(0.0, 1.0 - kept_s)) * std::sqrt(std::max(0.0, 1.0 - kept_i));
  return {sum * state.radial_constant, bound};
}

//------------------------------------------------------------------------------
// Fringes

struct FringeSample {
  double delta;
  double probability;
};

struct CoincidenceFringe {
  std::vector<FringeSample> samples;
  std::string normalization = "C=1";
};

/// |B|^2 with the signal analyser at `offset` and the idler at offset + delta.
inline double coincidence_probability_at(const TwoPhotonState &state, const PhasePlate &plate,
                                         double offset, double delta) {
  AnalyzerSetting s{with_orientation(plate, offset), Arm::signal};
  AnalyzerSetting i{with_orientation(plate, offset + delta), Arm::idler};
  return std::norm(coincidence_amplitude(state, s, i));
}

inline CoincidenceFringe coincidence_fringe(const TwoPhotonState &state, const PhasePlate &plate,
                                            std::size_t n_samples, double offset = 0.0) {
  if (n_samples < 2)
    throw ConfigurationError("a coincidence fringe needs at least two samples");
  detail::require_supported(plate);
  CoincidenceFringe f;
  f.samples.resize(n_samples);
  parallel_for(n_samples, [&](std::size_t k) {
    double delta = two_pi * static_cast<double>(k) / static_cast<double>(n_samples);
    f.samples[k] = {delta, coincidence_probability_at(state, plate, offset, delta)};
  });
  return f;
}

inline void write_csv(std::ostream &os, const CoincidenceFringe &fringe) {
  os << "delta_rad,coincidence_probability\n" << std::setprecision(12);
  for (const auto &s : fringe.samples)
    os << s.delta << ',' << s.probability << '\n';
}

} // namespace oamsim
