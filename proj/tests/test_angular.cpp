#include <gtest/gtest.h>

#include <random>

#include "oamsim.hpp"

using namespace oamsim;

namespace {

ClosedFormState half(int l, double alpha) { return to_closed_form(NonIntegerOamState(OamIndex{l}, 0.5, alpha)); }

// independent check: rectangle-free panel quadrature of conj(a) b
cplx brute_overlap(const ClosedFormState &a, const ClosedFormState &b) {
  std::vector<double> cuts;
  for (const auto &s : a.segments())
    cuts.push_back(s.begin);
  for (const auto &s : b.segments())
    cuts.push_back(s.begin);
  return quad::circle_integral([&](double t) { return std::conj(a(t)) * b(t); }, cuts, 4096);
}

} // namespace

TEST(InnerProduct, HalfIntegerStateIsNormalised) {
  auto s = half(0, 0.0);
  EXPECT_NEAR(std::abs(inner_product(s, s) - 1.0), 0.0, 1e-14);
}

TEST(InnerProduct, IntegerBasisOrthogonal) {
  auto a = ClosedFormState::oam(OamIndex{0});
  auto b = ClosedFormState::oam(OamIndex{1});
  EXPECT_NEAR(std::abs(inner_product(a, b)), 0.0, 1e-15);
}

TEST(InnerProduct, QuarterTurnOfHalfState) {
  auto a = half(0, 0.0), b = half(0, pi / 2);
  cplx exact = inner_product(a, b);
  EXPECT_NEAR(std::norm(exact), 0.25, 1e-14);
  EXPECT_NEAR(std::abs(exact - brute_overlap(a, b)), 0.0, 1e-12);
  EXPECT_NEAR(std::norm(exact), spiral_overlap_probability(0.5, pi / 2), 1e-14);
}

TEST(InnerProduct, GridMismatchIsConfigurationError) {
  auto s = ClosedFormState::oam(OamIndex{0});
  auto a = to_sampled(s, AngularGrid(64));
  auto b = to_sampled(s, AngularGrid(128));
  EXPECT_THROW(inner_product(a, b), ConfigurationError);
}

TEST(InnerProduct, MixedRepresentationsUseTheSampledGrid) {
  auto s = half(2, 1.0);
  AngularWavefunction a = s, b = to_sampled(s, AngularGrid(4096));
  EXPECT_NEAR(std::abs(inner_product(a, b) - 1.0), 0.0, 2e-3);
}

TEST(AngularGridTest, Validation) {
  EXPECT_THROW(AngularGrid(8), ConfigurationError);
  EXPECT_THROW(AngularGrid(100), ConfigurationError);
  EXPECT_NO_THROW(AngularGrid(16));
  EXPECT_EQ(AngularGrid().size(), 4096u);
}

TEST(ToSampled, ZeroModeIsConstant) {
  auto s = to_sampled(ClosedFormState::oam(OamIndex{0}), AngularGrid(16));
  ASSERT_EQ(s.values.size(), 16u);
  for (auto v : s.values)
    EXPECT_NEAR(std::abs(v - 1.0 / std::sqrt(two_pi)), 0.0, 1e-15);
}

TEST(ToSampled, HalfStateNormOnDefaultGrid) {
  auto s = to_sampled(half(0, 0.0), AngularGrid(4096));
  EXPECT_NEAR(norm(AngularWavefunction{s}), 1.0, 1e-10);
}

TEST(ToSampled, JumpSitsAtHalfGrid) {
  const std::size_t n = 1024;
  auto s = to_sampled(half(1, pi), AngularGrid(n));
  std::size_t worst = 0;
  double worst_step = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    double step = std::abs(std::arg(s.values[k] / s.values[k - 1]));
    if (step > worst_step) {
      worst_step = step;
      worst = k;
    }
  }
  EXPECT_EQ(worst, n / 2);
  // half-integer edge flips the sign on top of the regular ramp step
  EXPECT_NEAR(worst_step, pi - 1.5 * two_pi / n, 1e-9);
}

TEST(OamSpectrum, IntegerStateIsSingleLine) {
  auto spec = oam_spectrum(ClosedFormState::oam(OamIndex{3}), OamIndex{-5}, OamIndex{8});
  for (const auto &a : spec)
    EXPECT_NEAR(std::abs(a.amplitude), a.l == 3 ? 1.0 : 0.0, 1e-14) << a.l;
}

TEST(OamSpectrum, HalfStateZeroLine) {
  auto spec = oam_spectrum(half(0, 0.0), OamIndex{0}, OamIndex{0});
  EXPECT_NEAR(std::norm(spec[0].amplitude), 4.0 / (pi * pi), 1e-14);
  // quadrature oracle of the same integral
  cplx brute = brute_overlap(ClosedFormState::oam(OamIndex{0}), half(0, 0.0));
  EXPECT_NEAR(std::norm(brute), 4.0 / (pi * pi), 1e-12);
}

TEST(OamSpectrum, WideWindowPower) {
  auto spec = oam_spectrum(half(0, 0.0), OamIndex{-200}, OamIndex{201});
  double p = spectrum_power(spec);
  EXPECT_GE(p, 0.995);
  EXPECT_NEAR(p + oam_tail_power(0.5, -200, 201), 1.0, 1e-12);
}

TEST(OamSpectrum, EmptyWindowRejected) {
  EXPECT_THROW(oam_spectrum(half(0, 0.0), OamIndex{2}, OamIndex{1}), ConfigurationError);
}

TEST(Properties, ParsevalResidualWithinAnalyticTail) {
  for (double lambda : {0.1, 0.5, 0.77}) {
    auto s = to_closed_form(NonIntegerOamState(OamIndex{1}, lambda, 2.0));
    for (int L : {5, 20, 80}) {
      double p = spectrum_power(oam_spectrum(s, OamIndex{-L}, OamIndex{L + 1}));
      double tail = oam_tail_power(1.0 + lambda, -L, L + 1);
      EXPECT_LE(p, 1.0 + 1e-12);
      EXPECT_NEAR(1.0 - p, tail, 1e-12) << lambda << ' ' << L;
    }
  }
}

TEST(Properties, RectangleRuleIsFirstOrderAtJumps) {
  // <0|a^(0)_{1/2}>: the integrand jumps at theta = 0, a grid node for every
  // n, so the rectangle rule error is a clean C/n
  auto a = ClosedFormState::oam(OamIndex{0}), b = half(0, 0.0);
  cplx exact = inner_product(a, b);
  double prev = 0.0;
  for (std::size_t n = 64; n <= 8192; n *= 2) {
    AngularGrid g(n);
    double err = std::abs(inner_product(to_sampled(a, g), to_sampled(b, g)) - exact);
    EXPECT_LE(err, two_pi / n);
    if (prev > 0.0) {
      EXPECT_LE(err, 0.5 * prev * (1.0 + 1e-6));
    }
    prev = err;
  }
}

TEST(Properties, RectangleRuleBoundForOffGridJumps) {
  auto a = half(0, 0.0), b = half(0, 1.0);
  cplx exact = inner_product(a, b);
  for (std::size_t n = 64; n <= 8192; n *= 2) {
    AngularGrid g(n);
    double err = std::abs(inner_product(to_sampled(a, g), to_sampled(b, g)) - exact);
    EXPECT_LE(err, 2.0 * two_pi / n) << n;
  }
}

TEST(Properties, BasisOrthonormality) {
  for (double lambda : {0.0, 0.25, 0.5, 0.9})
    for (double alpha : {0.0, 1.3, pi})
      for (int l = -4; l <= 4; ++l)
        for (int m = -4; m <= 4; ++m) {
          auto a = to_closed_form(NonIntegerOamState(OamIndex{l}, lambda, alpha));
          auto b = to_closed_form(NonIntegerOamState(OamIndex{m}, lambda, alpha));
          EXPECT_NEAR(std::abs(inner_product(a, b) - (l == m ? 1.0 : 0.0)), 0.0, 1e-10);
        }
}

TEST(NonIntegerState, Validation) {
  EXPECT_THROW(NonIntegerOamState(OamIndex{0}, 1.0, 0.0), ConfigurationError);
  EXPECT_THROW(NonIntegerOamState(OamIndex{0}, -0.1, 0.0), ConfigurationError);
  EXPECT_NEAR(NonIntegerOamState(OamIndex{0}, 0.5, -pi / 2).alpha, 1.5 * pi, 1e-15);
}

TEST(Rotate, ClosedFormMatchesShiftedArgument) {
  auto s = half(2, 0.7);
  auto r = rotate(s, 1.1);
  for (double t : {0.1, 1.0, 2.5, 4.0, 6.0})
    EXPECT_NEAR(std::abs(r(t) - s(t - 1.1)), 0.0, 1e-12);
}

TEST(Rotate, SampledNeedsWholeSteps) {
  auto s = to_sampled(half(0, 0.0), AngularGrid(64));
  EXPECT_THROW(rotate(s, 0.1), ConfigurationError);
  auto r = rotate(s, two_pi / 64 * 3);
  EXPECT_NEAR(std::abs(r.values[3] - s.values[0]), 0.0, 1e-15);
}
