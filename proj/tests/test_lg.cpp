#include <gtest/gtest.h>

#include <sstream>

#include "oamsim.hpp"

using namespace oamsim;

namespace {

// <rho_lp | rho_00> in closed form: (-1)^p sqrt(p!/(p+|l|)!) G(a+1) G(a+p) / (p! G(a)), a = |l|/2
double radial_closed_form(int l, int p) {
  if (l == 0)
    return p == 0 ? 1.0 : 0.0;
  const double a = 0.5 * std::abs(l);
  double lg = 0.5 * (std::lgamma(p + 1.0) - std::lgamma(p + std::abs(l) + 1.0)) + std::lgamma(a + 1.0) +
              std::lgamma(a + p) - std::lgamma(p + 1.0) - std::lgamma(a);
  return (p % 2 ? -1.0 : 1.0) * std::exp(lg);
}

} // namespace

TEST(LgAmplitude, AxisValues) {
  cplx u = lg_amplitude(LgMode::fundamental(), 0.0, 1.0);
  EXPECT_NEAR(u.real(), std::sqrt(2.0 / pi), 1e-15);
  EXPECT_EQ(u.imag(), 0.0);
  EXPECT_EQ(std::abs(lg_amplitude(LgMode{OamIndex{1}, 0}, 0.0, 0.3)), 0.0);
  EXPECT_THROW(lg_amplitude(LgMode::fundamental(), -1.0, 0.0), ConfigurationError);
}

TEST(LgAmplitude, UnitPower) {
  // 2pi \int |R|^2 r dr with x = 2 r^2: r dr = dx / 4
  auto rule = quad::gauss_laguerre(80, 0.0);
  for (int l = 0; l <= 3; ++l)
    for (int p = 0; p <= 3; ++p) {
      LgMode m{OamIndex{l}, p};
      double sum = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double x = rule.nodes[i], r = std::sqrt(x / 2.0);
        sum += rule.weight(i) * std::norm(lg_amplitude(m, r, 0.0)) * std::exp(x) / 4.0;
      }
      EXPECT_NEAR(two_pi * sum, 1.0, 1e-10) << l << ' ' << p;
    }
}

TEST(LgMode, Validation) {
  EXPECT_THROW(LgMode(OamIndex{0}, -1), ConfigurationError);
  EXPECT_THROW(LgMode(OamIndex{0}, 0, 0.0), ConfigurationError);
}

TEST(LgOverlap, Examples) {
  LgMode a{OamIndex{1}, 2}, b{OamIndex{1}, 3}, c{OamIndex{2}, 2};
  EXPECT_NEAR(std::abs(lg_overlap(a, a) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(lg_overlap(a, b)), 0.0, 1e-10);
  EXPECT_EQ(lg_overlap(a, c), cplx(0.0, 0.0));
  EXPECT_THROW(lg_overlap(a, LgMode(OamIndex{1}, 2, 2.0)), ConfigurationError);
}

TEST(LgOverlap, Orthonormality) {
  for (int l : {-2, 0, 3})
    for (int p = 0; p <= 6; ++p)
      for (int q = 0; q <= 6; ++q)
        EXPECT_NEAR(std::abs(lg_overlap(LgMode{OamIndex{l}, p}, LgMode{OamIndex{l}, q})), p == q ? 1.0 : 0.0,
                    1e-12);
}

TEST(RadialOverlaps, MatchGammaClosedForm) {
  for (int l : {-7, -1, 0, 1, 2, 5, 40})
    for (unsigned order : {60u, 400u}) {
      auto r = radial_overlaps(l, 120, LgMode::fundamental(), order);
      for (int p = 0; p <= 120; ++p)
        ASSERT_NEAR(r[p], radial_closed_form(l, p), 1e-10) << l << ' ' << p << ' ' << order;
    }
}

TEST(Decompose, IntegerPlateStaysInOneColumn) {
  LgWindow w{-3, 5, 400};
  DecomposeOptions opt;
  opt.max_expansions = 0;
  auto d = decompose_plate_output(SpiralPlate{1.0, 0.0}, LgMode::fundamental(), w, 1.0, opt);
  double column = 0.0;
  for (const auto &e : d.entries) {
    if (e.l == 1)
      column += e.power;
    else
      EXPECT_LT(e.power, 1e-28) << e.l; // round-off of an exactly vanishing angular integral
  }
  // the radial series of the l=1 column converges like 1/p; add its closed-form tail
  double tail = 0.0;
  for (int p = 401; p < 4000000; ++p)
    tail += std::pow(radial_closed_form(1, p), 2);
  tail += 1.0 / (4.0 * 4000000.0); // remainder of the 1/(4 p^2) asymptote
  EXPECT_NEAR(column + tail, 1.0, 1e-8);
  EXPECT_NEAR(d.angular_tail, 0.0, 1e-15);
}

TEST(Decompose, HalfPlateCountAt87Percent) {
  auto d = decompose_plate_output(SpiralPlate{0.5, 0.0}, LgMode::fundamental(), window_around(0.5, 60, 120), 0.87);
  EXPECT_FALSE(d.incomplete);
  EXPECT_GE(d.count(), 9u);
  EXPECT_LE(d.count(), 13u);
  EXPECT_GE(d.cumulative(), 0.87);
  EXPECT_LT(d.entries[d.count() - 2].cumulative_power, 0.87);
}

TEST(Decompose, SortedAndBounded) {
  auto d = decompose_plate_output(SpiralPlate{2.5, 0.7}, LgMode::fundamental(), window_around(2.5, 20, 40), 0.95);
  for (std::size_t k = 1; k < d.entries.size(); ++k)
    EXPECT_GE(d.entries[k - 1].power, d.entries[k].power);
  EXPECT_LE(d.cumulative(), 1.0 + 1e-9);
  EXPECT_LE(d.window_power, 1.0 + 1e-9);
  EXPECT_NEAR(d.residual, 1.0 - d.cumulative() - d.angular_tail, 1e-15);
}

TEST(Decompose, ColumnPowerMatchesAngularAmplitude) {
  auto plate = SpiralPlate{1.5, 0.0};
  LgWindow w{-4, 6, 300};
  DecomposeOptions opt;
  opt.max_expansions = 0;
  auto d = decompose_plate_output(plate, LgMode::fundamental(), w, 2.0, opt); // take every mode
  auto spec = oam_spectrum(plate_state(plate, OamIndex{0}), OamIndex{-4}, OamIndex{6});
  double angular_sum = 0.0;
  for (const auto &a : spec) {
    double column = 0.0, tail = 0.0;
    for (const auto &e : d.entries)
      if (e.l == a.l)
        column += e.power;
    for (int p = 301; p < 200000; ++p)
      tail += std::pow(radial_closed_form(a.l, p), 2);
    EXPECT_NEAR(column + tail * std::norm(a.amplitude), std::norm(a.amplitude), 2e-5) << a.l;
    angular_sum += std::norm(a.amplitude);
  }
  EXPECT_NEAR(angular_sum + d.angular_tail, 1.0, 1e-12);
  EXPECT_NEAR(d.angular_tail, oam_tail_power(1.5, -4, 6), 1e-12);
  EXPECT_TRUE(d.incomplete);
}

TEST(Decompose, OrderDoublingConvergence) {
  for (double ell : {0.5, 2.5}) {
    auto w = window_around(ell, 60, 120);
    auto a = decompose_plate_output(SpiralPlate{ell, 0.0}, LgMode::fundamental(), w, 0.87);
    DecomposeOptions twice;
    twice.order_scale = 2.0;
    auto b = decompose_plate_output(SpiralPlate{ell, 0.0}, LgMode::fundamental(), w, 0.87, twice);
    ASSERT_EQ(a.count(), b.count());
    for (std::size_t k = 0; k < a.count(); ++k) {
      EXPECT_EQ(a.entries[k].l, b.entries[k].l);
      EXPECT_EQ(a.entries[k].p, b.entries[k].p);
      EXPECT_LE(std::abs(a.entries[k].coefficient - b.entries[k].coefficient), 1e-8);
    }
  }
}

TEST(Decompose, IncompleteWindowIsFlagged) {
  DecomposeOptions opt;
  opt.max_expansions = 0;
  auto d = decompose_plate_output(SpiralPlate{0.5, 0.0}, LgMode::fundamental(), {0, 1, 2}, 0.99, opt);
  EXPECT_TRUE(d.incomplete);
  EXPECT_EQ(d.count(), 6u);
  opt.max_expansions = 3;
  auto e = decompose_plate_output(SpiralPlate{0.5, 0.0}, LgMode::fundamental(), {0, 1, 2}, 0.8, opt);
  EXPECT_FALSE(e.incomplete);
  EXPECT_GT(e.window.p_max, 2);
  EXPECT_THROW(decompose_plate_output(SpiralPlate{0.5, 0.0}, LgMode::fundamental(), {2, 1, 2}, 0.8),
               ConfigurationError);
}

TEST(Decompose, ReconstructionResidual) {
  auto plate = SpiralPlate{0.5, 0.0};
  auto d = decompose_plate_output(plate, LgMode::fundamental(), window_around(0.5, 60, 120), 0.87);
  double residual = reconstruction_residual_power(plate, LgMode::fundamental(), d);
  EXPECT_NEAR(residual, 1.0 - d.cumulative(), 1e-3);
}

TEST(Decompose, CsvHeader) {
  auto d = decompose_plate_output(SpiralPlate{1.0, 0.0}, LgMode::fundamental(), {0, 2, 5}, 0.9);
  std::ostringstream os;
  write_csv(os, d);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "l,p,re,im,power,cumulative_power");
}
