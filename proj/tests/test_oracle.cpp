#include <gtest/gtest.h>

#include <sstream>

#include "oamsim.hpp"

using namespace oamsim;

TEST(VerifyOverlap, Examples) {
  auto a = verify_overlap(SpiralPlate{0.5, 0.0}, pi, 1e-10);
  EXPECT_TRUE(a.pass);
  EXPECT_NEAR(a.closed_form, 0.0, 1e-10);
  EXPECT_NEAR(a.oracle, 0.0, 1e-10);
  auto b = verify_overlap(SpiralPlate{0.3, 0.0}, 1.0, 1e-8);
  EXPECT_TRUE(b.pass);
  EXPECT_EQ(b.grid, 4096u);
  auto c = verify_overlap(StepPlate{2 * pi / 3, 0.0}, -2.0, 1e-8);
  EXPECT_TRUE(c.pass) << c.difference;
  double printed = 1.0 + (-2.0 / pi) * (std::cos(2 * pi / 3) - 1.0); // the signed-alpha form
  EXPECT_GT(std::abs(printed * printed - c.oracle), 0.1);
}

TEST(VerifyOverlap, PassMeansWithinTolerance) {
  auto r = make_report("x", 1.0, 1.0 + 2e-9, 64, 1e-9);
  EXPECT_FALSE(r.pass);
  r = make_report("x", 1.0, 1.0 + 5e-10, 64, 1e-9);
  EXPECT_TRUE(r.pass);
  EXPECT_THROW(make_report("x", 0.0, 0.0, 64, 0.0), ConfigurationError);
}

TEST(VerifyBell, Examples) {
  auto a = verify_bell(SpiralPlate{0.5, 0.0}, BellSettings::spiral());
  EXPECT_TRUE(a.pass);
  EXPECT_NEAR(a.closed_form, 3.2, 1e-12);
  EXPECT_NEAR(a.oracle, 3.2, 1e-8);
  auto b = verify_bell(StepPlate{pi / 2, 0.0}, BellSettings::spiral());
  EXPECT_TRUE(b.pass);
  EXPECT_NEAR(b.oracle, 3.2, 1e-8);
}

TEST(VerifyBell, SearchedMaskCertificate) {
  auto r = search_max_s(6, pi, BellSettings::spiral(), 20000);
  auto rep = verify_s4_certificate(r.best, r.settings);
  EXPECT_TRUE(rep.pass) << rep.closed_form << ' ' << rep.oracle;
}

TEST(Oracle, ErrorShrinksWithGrid) {
  PhasePlate p = SpiralPlate{0.3, 0.0};
  const double exact = spiral_overlap_probability(0.3, 1.0);
  double prev = 1.0;
  for (std::size_t n : {16u, 32u, 64u, 128u, 256u}) {
    double err = std::abs(rotation_overlap_probability_oracle(p, 1.0, n) - exact);
    EXPECT_LE(err, std::max(0.5 * prev, 1e-14)) << n;
    prev = err;
  }
}

TEST(Oracle, JsonLines) {
  std::vector<OracleReport> reps{verify_overlap(SpiralPlate{0.5, 0.0}, 1.0), verify_overlap(StepPlate{pi, 0.0}, 2.0)};
  std::ostringstream os;
  write_json_lines(os, reps);
  std::istringstream is(os.str());
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    auto j = nlohmann::json::parse(line);
    for (auto key : {"quantity", "closed_form", "oracle", "difference", "grid", "pass"})
      EXPECT_TRUE(j.contains(key));
    ++n;
  }
  EXPECT_EQ(n, 2);
}

TEST(Oracle, StandardSweepPasses) {
  for (const auto &r : standard_sweep())
    EXPECT_TRUE(r.pass) << r.quantity << ' ' << r.difference;
}
