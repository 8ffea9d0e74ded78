#pragma once

// Fraunhofer far field of an LG beam behind a plate: sample the waist field on
// a Cartesian grid and take its 2D DFT.

#include <bit>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>

#include <fftw3.h>

#include "oamsim/lg.hpp"

namespace oamsim {

struct FarFieldImage {
  std::size_t n = 0;
  double extent = 0.0;            // side of the waist-plane window, in units of w0
  std::vector<double> intensity;  // row-major, zero frequency at (n/2, n/2), unit sum
  std::vector<cplx> waist_field;  // cell-centred samples, row-major
  double waist_power = 0.0;       // sum |u|^2 dx^2 before normalisation
  double parseval_error = 0.0;    // |sum|F|^2 / (n^2 sum|u|^2) - 1|
  std::string plate;

  double at(std::size_t row, std::size_t col) const { return intensity[row * n + col]; }
};

namespace detail {

// FFTW's planner is not re-entrant.
inline std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s *p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

} // namespace detail

inline FarFieldImage far_field(const PhasePlate &plate, const LgMode &input, std::size_t n = 1024,
                               double extent = 16.0) {
  if (n < 128 || !std::has_single_bit(n))
    throw ConfigurationError("far-field grid must be a power of two >= 128");
  if (!(extent >= 8.0 * input.w0))
    throw ConfigurationError("far-field window must span at least 8 waists");

  FarFieldImage img;
  img.n = n;
  img.extent = extent;
  img.plate = describe(plate);
  const double dx = extent / static_cast<double>(n);
  img.waist_field.resize(n * n);
  std::vector<double> row_power(n, 0.0);
  parallel_for(n, [&](std::size_t row) {
    // cell-centred grid: symmetric under quarter turns, never samples r = 0
    const double y = (static_cast<double>(row) - n / 2.0 + 0.5) * dx;
    for (std::size_t col = 0; col < n; ++col) {
      const double x = (static_cast<double>(col) - n / 2.0 + 0.5) * dx;
      const double r = std::hypot(x, y), t = std::atan2(y, x);
      cplx u = lg_amplitude(input, r, t) * transmission(plate, t);
      img.waist_field[row * n + col] = u;
      row_power[row] += std::norm(u);
    }
  });
  double field_sum = 0.0;
  for (double p : row_power)
    field_sum += p;
  img.waist_power = field_sum * dx * dx;

  std::vector<cplx> spectrum(n * n);
  {
    auto *in = reinterpret_cast<fftw_complex *>(img.waist_field.data());
    auto *out = reinterpret_cast<fftw_complex *>(spectrum.data());
    std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> plan;
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      // FFTW_ESTIMATE leaves the input untouched and is deterministic
      plan.reset(fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), in, out, FFTW_FORWARD,
                                  FFTW_ESTIMATE));
    }
    fftw_execute(plan.get());
  }

  img.intensity.assign(n * n, 0.0);
  double spec_sum = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      double v = std::norm(spectrum[r * n + c]);
      spec_sum += v;
      img.intensity[((r + n / 2) % n) * n + (c + n / 2) % n] = v;
    }
  img.parseval_error = std::abs(spec_sum / (static_cast<double>(n) * n * field_sum) - 1.0);
  for (auto &v : img.intensity)
    v /= spec_sum;
  return img;
}

//------------------------------------------------------------------------------
// Diagnostics

/// Intensity at an arbitrary far-field point (frequency in grid units, origin
/// at zero frequency) by direct evaluation of the DFT sum; the FFT grid values
/// are the special case of integer coordinates. Normalised like `intensity`.
inline double far_field_intensity_at(const FarFieldImage &img, double u, double v) {
  const std::size_t n = img.n;
  std::vector<cplx> ex(n), ey(n);
  for (std::size_t k = 0; k < n; ++k) {
    ex[k] = std::exp(-I * (two_pi * u * static_cast<double>(k) / n));
    ey[k] = std::exp(-I * (two_pi * v * static_cast<double>(k) / n));
  }
  cplx sum{0.0, 0.0};
  double field_sum = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    cplx row{0.0, 0.0};
    const cplx *f = &img.waist_field[r * n];
    for (std::size_t c = 0; c < n; ++c) {
      row += f[c] * ex[c];
      field_sum += std::norm(f[c]);
    }
    sum += row * ey[r];
  }
  return std::norm(sum) / (static_cast<double>(n) * n * field_sum);
}

struct AzimuthalProfile {
  double radius = 0.0; // grid units
  std::vector<double> values;
  double max = 0.0, min = 0.0, mean = 0.0;
  double asymmetry = 0.0;         // max / min
  double relative_variance = 0.0; // var / mean^2
};

/// Radius (grid units) where the azimuthally averaged intensity peaks. Spots
/// without a central null fall back to the intensity-weighted mean radius so
/// that the ring still passes through the bright region.
inline double ring_radius(const FarFieldImage &img) {
  const std::size_t n = img.n;
  std::vector<double> sum(n, 0.0), count(n, 0.0);
  double weighted = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      double dy = static_cast<double>(r) - n / 2.0, dx = static_cast<double>(c) - n / 2.0;
      double rho = std::hypot(dx, dy);
      auto bin = static_cast<std::size_t>(std::lround(rho));
      if (bin < n) {
        sum[bin] += img.at(r, c);
        count[bin] += 1.0;
      }
      weighted += rho * img.at(r, c);
    }
  std::size_t best = 0;
  for (std::size_t b = 1; b < n; ++b)
    if (count[b] > 0 && sum[b] / count[b] > sum[best] / count[best])
      best = b;
  return best >= 1 ? static_cast<double>(best) : weighted;
}

inline AzimuthalProfile azimuthal_profile(const FarFieldImage &img, std::size_t n_angles = 180,
                                          double radius = -1.0) {
  AzimuthalProfile prof;
  prof.radius = radius > 0.0 ? radius : ring_radius(img);
  prof.values.resize(n_angles);
  parallel_for(n_angles, [&](std::size_t k) {
    double t = two_pi * static_cast<double>(k) / static_cast<double>(n_angles);
    prof.values[k] = far_field_intensity_at(img, prof.radius * std::cos(t), prof.radius * std::sin(t));
  });
  prof.max = *std::max_element(prof.values.begin(), prof.values.end());
  prof.min = *std::min_element(prof.values.begin(), prof.values.end());
  double s = 0.0, s2 = 0.0;
  for (double v : prof.values) {
    s += v;
    s2 += v * v;
  }
  prof.mean = s / n_angles;
  prof.relative_variance = std::max(0.0, s2 / n_angles - prof.mean * prof.mean) / (prof.mean * prof.mean);
  prof.asymmetry = prof.min > 0.0 ? prof.max / prof.min : std::numeric_limits<double>::infinity();
  return prof;
}

/// Zero-frequency intensity over the brightest pixel.
inline double on_axis_ratio(const FarFieldImage &img) {
  double peak = *std::max_element(img.intensity.begin(), img.intensity.end());
  return img.at(img.n / 2, img.n / 2) / peak;
}

/// Binary 16-bit PGM (P5, big-endian), linear scale with the peak at 65535.
inline void write_pgm(std::ostream &os, const FarFieldImage &img) {
  double peak = *std::max_element(img.intensity.begin(), img.intensity.end());
  os << "P5\n" << img.n << ' ' << img.n << "\n65535\n";
  for (double v : img.intensity) {
    auto q = static_cast<std::uint16_t>(std::lround(peak > 0.0 ? 65535.0 * v / peak : 0.0));
    char bytes[2] = {static_cast<char>(q >> 8), static_cast<char>(q & 0xff)};
    os.write(bytes, 2);
  }
}

inline nlohmann::json sidecar_json(const FarFieldImage &img) {
  return {{"grid", img.n},
          {"extent", img.extent},
          {"plate", nlohmann::json::parse(img.plate)},
          {"waist_power", img.waist_power},
          {"parseval_error", img.parseval_error}};
}

} // namespace oamsim
