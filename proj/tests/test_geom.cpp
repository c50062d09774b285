#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pedhat/geom.hpp"
#include "pedhat/rng.hpp"

using namespace pedhat;
using namespace pedhat::geom;

namespace {

// Axis matrices written out by hand, independent of the library's builders.
RotationMatrix hand_rx(double deg) {
  const double c = std::cos(deg * M_PI / 180.0), s = std::sin(deg * M_PI / 180.0);
  return RotationMatrix({1, 0, 0, 0, c, -s, 0, s, c});
}
RotationMatrix hand_ry(double deg) {
  const double c = std::cos(deg * M_PI / 180.0), s = std::sin(deg * M_PI / 180.0);
  return RotationMatrix({c, 0, s, 0, 1, 0, -s, 0, c});
}
RotationMatrix hand_rz(double deg) {
  const double c = std::cos(deg * M_PI / 180.0), s = std::sin(deg * M_PI / 180.0);
  return RotationMatrix({c, -s, 0, s, c, 0, 0, 0, 1});
}

EulerAngles random_euler(Rng& rng) {
  EulerAngles e;
  e.roll = 180.0 - rng.uniform(0.0, 360.0);
  e.pitch = rng.uniform(-89.9, 89.9);
  e.yaw = 180.0 - rng.uniform(0.0, 360.0);
  return e;
}

}  // namespace

TEST(EulerToMatrix, ZeroIsIdentity) {
  EXPECT_LT(euler_to_matrix({0, 0, 0}).distance(RotationMatrix::identity()), 1e-15);
}

TEST(EulerToMatrix, RollNinetyMapsYToZ) {
  const Vec3 v = euler_to_matrix({90, 0, 0}) * Vec3{0, 1, 0};
  EXPECT_NEAR(v.x, 0.0, 1e-12);
  EXPECT_NEAR(v.y, 0.0, 1e-12);
  EXPECT_NEAR(v.z, 1.0, 1e-12);
}

TEST(EulerToMatrix, MatchesHandBuiltAxisProduct) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const EulerAngles e = random_euler(rng);
    const RotationMatrix want = hand_rz(e.yaw) * hand_ry(e.pitch) * hand_rx(e.roll);
    const RotationMatrix got = euler_to_matrix(e);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) ASSERT_NEAR(got(r, c), want(r, c), 1e-12);
  }
}

TEST(EulerToMatrix, OrthonormalWithUnitDeterminant) {
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    const RotationMatrix m = euler_to_matrix(random_euler(rng));
    ASSERT_LT(m.orthonormality_error(), 1e-9);
    ASSERT_NEAR(m.determinant(), 1.0, 1e-9);
  }
}

TEST(MatrixToEuler, IdentityIsZero) {
  const EulerAngles e = matrix_to_euler(RotationMatrix::identity());
  EXPECT_NEAR(e.roll, 0.0, 1e-12);
  EXPECT_NEAR(e.pitch, 0.0, 1e-12);
  EXPECT_NEAR(e.yaw, 0.0, 1e-12);
}

TEST(MatrixToEuler, RoundTripsTenTwentyThirty) {
  const EulerAngles e = matrix_to_euler(euler_to_matrix({10, 20, 30}));
  EXPECT_NEAR(e.roll, 10.0, 1e-9);
  EXPECT_NEAR(e.pitch, 20.0, 1e-9);
  EXPECT_NEAR(e.yaw, 30.0, 1e-9);
}

TEST(MatrixToEuler, PitchNinetyIsGimbalLock) {
  EXPECT_THROW((void)matrix_to_euler(euler_to_matrix({0, 90, 0})), GimbalLock);
  EXPECT_THROW((void)matrix_to_euler(euler_to_matrix({30, -90, 10})), GimbalLock);
  EXPECT_FALSE(try_matrix_to_euler(euler_to_matrix({0, 90, 0})).has_value());
}

TEST(MatrixToEuler, RandomRoundTripWithinDomain) {
  Rng rng(13);
  for (int i = 0; i < 100000; ++i) {
    const RotationMatrix m = euler_to_matrix(random_euler(rng));
    const EulerAngles e = matrix_to_euler(m);
    ASSERT_TRUE(e.in_domain());
    ASSERT_LT(euler_to_matrix(e).distance(m), 1e-9);
  }
}

TEST(AngleDiff, Examples) {
  EXPECT_DOUBLE_EQ(angle_diff(350, 10), 20.0);
  EXPECT_DOUBLE_EQ(angle_diff(10, 350), -20.0);
  EXPECT_DOUBLE_EQ(angle_diff(0, 180), 180.0);
  EXPECT_DOUBLE_EQ(angle_diff(180, 0), 180.0);
}

TEST(AngleDiff, AntisymmetricAwayFromTie) {
  Rng rng(14);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-720, 720), b = rng.uniform(-720, 720);
    const double d = angle_diff(a, b);
    ASSERT_GT(d, -180.0);
    ASSERT_LE(d, 180.0);
    if (std::abs(std::abs(d) - 180.0) > 1e-9) ASSERT_NEAR(d, -angle_diff(b, a), 1e-9);
  }
}

TEST(CircularBlend, Examples) {
  EXPECT_NEAR(circular_blend(350, 10, 0.5), 0.0, 1e-12);
  EXPECT_NEAR(circular_blend(123.4, 200, 0.0), 123.4, 1e-12);
  EXPECT_NEAR(circular_blend(123.4, -20, 1.0), 340.0, 1e-12);
}

TEST(CircularBlend, InvariantUnderFullTurns) {
  Rng rng(15);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(0, 360), b = rng.uniform(0, 360), w = rng.uniform();
    const int k = rng.uniform_int(-3, 3), m = rng.uniform_int(-3, 3);
    const double x = circular_blend(a, b, w), y = circular_blend(a + 360.0 * k, b + 360.0 * m, w);
    ASSERT_LT(std::abs(angle_diff(x, y)), 1e-9);
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 360.0);
  }
}

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize_rp(3.7, -12.2, 2), (BinKey{2, -14}));
  EXPECT_EQ(quantize_rp(0, 0, 2), (BinKey{0, 0}));
  EXPECT_EQ(bin_capacity(2), 16200);
}

TEST(Quantize, KeysStayInRangeAndOnGrid) {
  Rng rng(16);
  std::set<BinKey> seen;
  for (int i = 0; i < 200000; ++i) {
    const BinKey k = quantize_rp(180.0 - rng.uniform(0, 360), rng.uniform(-90, 90), 2);
    ASSERT_EQ(k.roll_bin % 2, 0);
    ASSERT_EQ(k.pitch_bin % 2, 0);
    ASSERT_GE(k.roll_bin, -180);
    ASSERT_LE(k.roll_bin, 178);
    ASSERT_GE(k.pitch_bin, -90);
    ASSERT_LE(k.pitch_bin, 88);
    seen.insert(k);
  }
  EXPECT_LE(static_cast<long>(seen.size()), bin_capacity(2));
  EXPECT_EQ(quantize_rp(180, 90, 2), (BinKey{-180, 88}));
}

TEST(Quantize, RejectsBadFactor) {
  EXPECT_THROW((void)quantize_rp(0, 0, 0), InvalidArgument);
  EXPECT_THROW((void)quantize_rp(0, 0, 7), InvalidArgument);
}
