#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace oamsim {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

//------------------------------------------------------------------------------
// Errors

/// Inputs that cannot be combined (grid mismatch, malformed plate, ...).
class ConfigurationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Analyzer combinations the collapse derivation does not cover.
class UnsupportedAnalyzer : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when all four probabilities entering a correlation vanish.
class DegenerateFringe : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

//------------------------------------------------------------------------------
// Angles

/// Wraps into [0, 2pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, two_pi);
  if (w < 0.0)
    w += two_pi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi
  if (w >= two_pi)
    w = 0.0;
  return w;
}

/// Wraps into [-pi, pi).
inline double wrap_angle_pm(double a) {
  double w = wrap_angle(a + pi) - pi;
  return w;
}

//------------------------------------------------------------------------------
// Threads

/// Worker count from OAM_SIM_THREADS, falling back to hardware concurrency.
inline unsigned thread_count() {
  if (const char *env = std::getenv("OAM_SIM_THREADS")) {
    char *end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n > 0)
      return static_cast<unsigned>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls fn(i) for i in [0, n) over a static block partition. fn must only
/// write to slot i of whatever it fills, so results do not depend on the
/// number of workers.
template <class Fn> void parallel_for(std::size_t n, Fn &&fn) {
  unsigned workers = std::min<std::size_t>(thread_count(), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t block = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t lo = w * block, hi = std::min(n, lo + block);
    if (lo >= hi)
      break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i)
        fn(i);
    });
  }
  for (auto &t : pool)
    t.join();
}

} // namespace oamsim
