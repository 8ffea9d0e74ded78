#include <gtest/gtest.h>

#include <sstream>

#include "oamsim.hpp"

using namespace oamsim;

namespace {

const FarFieldImage &image(double ell) {
  static std::map<double, FarFieldImage> cache;
  auto it = cache.find(ell);
  if (it == cache.end())
    it = cache.emplace(ell, far_field(SpiralPlate{ell, 0.0}, LgMode::fundamental(), 256, 16.0)).first;
  return it->second;
}

} // namespace

TEST(FarField, Validation) {
  EXPECT_THROW(far_field(SpiralPlate{0.0, 0.0}, LgMode::fundamental(), 100), ConfigurationError);
  EXPECT_THROW(far_field(SpiralPlate{0.0, 0.0}, LgMode::fundamental(), 64), ConfigurationError);
  EXPECT_THROW(far_field(SpiralPlate{0.0, 0.0}, LgMode::fundamental(), 256, 6.0), ConfigurationError);
}

TEST(FarField, ParsevalAndUnitPower) {
  for (double ell : {0.0, 3.0, 3.5}) {
    const auto &img = image(ell);
    EXPECT_LT(img.parseval_error, 1e-6);
    double sum = 0.0;
    for (double v : img.intensity) {
      EXPECT_GE(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_NEAR(img.waist_power, 1.0, 1e-6);
  }
}

TEST(FarField, GaussianSpotIsRound) {
  const auto &img = image(0.0);
  EXPECT_NEAR(on_axis_ratio(img), 1.0, 1e-12);
  auto prof = azimuthal_profile(img, 90);
  EXPECT_LT(prof.relative_variance, 1e-6);
}

TEST(FarField, IntegerVortexIsADoughnut) {
  // the vortex imprinted on a Gaussian is singular at the axis; its aliasing
  // residue falls off as N^-6, so the symmetry check runs on the full grid
  auto img = far_field(SpiralPlate{3.0, 0.0}, LgMode::fundamental(), 1024, 16.0);
  EXPECT_LT(on_axis_ratio(img), 1e-6);
  auto prof = azimuthal_profile(img, 90);
  EXPECT_GE(prof.radius, 1.0);
  EXPECT_LT(prof.relative_variance, 1e-6);
}

TEST(FarField, HalfIntegerPlateBreaksSymmetry) {
  auto prof = azimuthal_profile(image(3.5), 90);
  EXPECT_GT(prof.asymmetry, 1.5);
}

TEST(FarField, FftAgreesWithDirectSum) {
  const auto &img = image(3.5);
  const auto n = static_cast<double>(img.n);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{128, 128}, {120, 131}, {140, 100}, {3, 250}}) {
    double direct = far_field_intensity_at(img, c - n / 2, r - n / 2);
    EXPECT_NEAR(direct, img.at(r, c), 1e-12 + 1e-9 * img.at(r, c));
  }
}

TEST(FarField, PgmLayout) {
  const auto &img = image(3.0);
  std::ostringstream os;
  write_pgm(os, img);
  std::string s = os.str();
  std::string header = "P5\n256 256\n65535\n";
  ASSERT_EQ(s.substr(0, header.size()), header);
  EXPECT_EQ(s.size(), header.size() + 2 * 256 * 256);
  auto side = sidecar_json(img);
  EXPECT_EQ(side["grid"], 256);
  EXPECT_EQ(side["plate"]["type"], "spiral");
}

TEST(FarField, Deterministic) {
  auto a = far_field(SpiralPlate{2.5, 1.0}, LgMode::fundamental(), 128, 16.0);
  auto b = far_field(SpiralPlate{2.5, 1.0}, LgMode::fundamental(), 128, 16.0);
  EXPECT_EQ(a.intensity, b.intensity);
}
