#pragma once

// Rotation and circular-angle algebra.
//
// Frames: GCS is east/north/up (x, y, z). Attitudes use the roll-pitch-yaw
// convention R = Rz(yaw) * Ry(pitch) * Rx(roll); the resulting matrix maps
// phone-frame (LCS) vectors into GCS. Angles cross the public API in
// degrees. Headings are compass degrees, clockwise from north, in [0, 360).

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <numbers>
#include <optional>

#include "pedhat/errors.hpp"

namespace pedhat::geom {

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

[[nodiscard]] inline double deg2rad(double deg) { return deg * kDegToRad; }
[[nodiscard]] inline double rad2deg(double rad) { return rad * kRadToDeg; }

// Wraps into [0, 360).
[[nodiscard]] inline double wrap360(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;  // fmod(-tiny) + 360 can round up to 360
  return r;
}

// Wraps into (-180, 180].
[[nodiscard]] inline double wrap180(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  if (r > 180.0) r -= 360.0;
  return r;
}

// Signed shortest rotation from a to b, in (-180, 180]. The antipodal tie
// resolves to +180.
[[nodiscard]] inline double angle_diff(double a, double b) { return wrap180(b - a); }

// Moves a toward b along the shortest arc by fraction w; result in [0, 360).
[[nodiscard]] inline double circular_blend(double a, double b, double w) {
  return wrap360(a + w * angle_diff(a, b));
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;

  [[nodiscard]] constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  [[nodiscard]] constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  [[nodiscard]] double norm() const { return std::sqrt(dot(*this)); }
  [[nodiscard]] Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? *this / n : *this;
  }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct EulerAngles {
  double roll = 0.0;   // about X (east), (-180, 180]
  double pitch = 0.0;  // about Y (north), [-90, 90]
  double yaw = 0.0;    // about Z (up), (-180, 180]

  constexpr bool operator==(const EulerAngles&) const = default;

  [[nodiscard]] bool in_domain() const {
    return roll > -180.0 && roll <= 180.0 && pitch >= -90.0 && pitch <= 90.0 && yaw > -180.0 &&
           yaw <= 180.0;
  }
};

// 3x3 rotation matrix, row-major.
class RotationMatrix {
 public:
  constexpr RotationMatrix() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
  constexpr explicit RotationMatrix(const std::array<double, 9>& entries) : m_(entries) {}

  [[nodiscard]] static constexpr RotationMatrix identity() { return {}; }

  [[nodiscard]] static RotationMatrix rot_x(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    return RotationMatrix({1, 0, 0, 0, c, -s, 0, s, c});
  }
  [[nodiscard]] static RotationMatrix rot_y(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    return RotationMatrix({c, 0, s, 0, 1, 0, -s, 0, c});
  }
  [[nodiscard]] static RotationMatrix rot_z(double deg) {
    const double c = std::cos(deg2rad(deg));
    const double s = std::sin(deg2rad(deg));
    return RotationMatrix({c, -s, 0, s, c, 0, 0, 0, 1});
  }

  [[nodiscard]] constexpr double operator()(int r, int c) const { return m_[r * 3 + c]; }
  [[nodiscard]] constexpr double& operator()(int r, int c) { return m_[r * 3 + c]; }
  [[nodiscard]] constexpr const std::array<double, 9>& entries() const { return m_; }

  [[nodiscard]] constexpr RotationMatrix operator*(const RotationMatrix& o) const {
    RotationMatrix r;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    }
    return r;
  }

  [[nodiscard]] constexpr Vec3 operator*(const Vec3& v) const {
    return {m_[0] * v.x + m_[1] * v.y + m_[2] * v.z, m_[3] * v.x + m_[4] * v.y + m_[5] * v.z,
            m_[6] * v.x + m_[7] * v.y + m_[8] * v.z};
  }

  [[nodiscard]] constexpr RotationMatrix transpose() const {
    return RotationMatrix({m_[0], m_[3], m_[6], m_[1], m_[4], m_[7], m_[2], m_[5], m_[8]});
  }

  [[nodiscard]] constexpr double determinant() const {
    return m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) - m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
           m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
  }

  // Frobenius norm of the entrywise difference.
  [[nodiscard]] double distance(const RotationMatrix& o) const {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) s += (m_[i] - o.m_[i]) * (m_[i] - o.m_[i]);
    return std::sqrt(s);
  }

  // Frobenius norm of (M^T M - I).
  [[nodiscard]] double orthonormality_error() const {
    return (transpose() * *this).distance(identity());
  }

  // One Newton step of the polar decomposition: M <- 1.5 M - 0.5 M M^T M.
  [[nodiscard]] RotationMatrix renormalized() const {
    const RotationMatrix mmt = *this * transpose() * *this;
    RotationMatrix r;
    for (int i = 0; i < 9; ++i) r.m_[i] = 1.5 * m_[i] - 0.5 * mmt.m_[i];
    return r;
  }

 private:
  std::array<double, 9> m_;
};

// R = Rz(yaw) * Ry(pitch) * Rx(roll).
[[nodiscard]] inline RotationMatrix euler_to_matrix(const EulerAngles& e) {
  const double cr = std::cos(deg2rad(e.roll)), sr = std::sin(deg2rad(e.roll));
  const double cp = std::cos(deg2rad(e.pitch)), sp = std::sin(deg2rad(e.pitch));
  const double cy = std::cos(deg2rad(e.yaw)), sy = std::sin(deg2rad(e.yaw));
  return RotationMatrix({cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,  //
                         sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,  //
                         -sp, cp * sr, cp * cr});
}

// |m[2][0]| above this is treated as pitch = +/-90 (about 0.0026 deg away).
inline constexpr double kGimbalGuard = 1.0 - 1e-9;

// Inverse of euler_to_matrix on the restricted domains. Returns nothing at
// the pitch singularity.
[[nodiscard]] inline std::optional<EulerAngles> try_matrix_to_euler(const RotationMatrix& m) {
  if (std::abs(m(2, 0)) > kGimbalGuard) return std::nullopt;
  EulerAngles e;
  // atan2 form keeps pitch well conditioned near +/-90, unlike asin.
  e.pitch = rad2deg(std::atan2(-m(2, 0), std::hypot(m(2, 1), m(2, 2))));
  e.roll = wrap180(rad2deg(std::atan2(m(2, 1), m(2, 2))));
  e.yaw = wrap180(rad2deg(std::atan2(m(1, 0), m(0, 0))));
  return e;
}

[[nodiscard]] inline EulerAngles matrix_to_euler(const RotationMatrix& m) {
  if (auto e = try_matrix_to_euler(m)) return *e;
  throw GimbalLock("matrix_to_euler: pitch at +/-90 deg, roll/yaw split undefined");
}

// Rotation by `angle_rad` about the unit axis `axis` (Rodrigues).
[[nodiscard]] inline RotationMatrix axis_angle(const Vec3& axis, double angle_rad) {
  const double c = std::cos(angle_rad), s = std::sin(angle_rad), t = 1.0 - c;
  const double x = axis.x, y = axis.y, z = axis.z;
  return RotationMatrix({t * x * x + c, t * x * y - s * z, t * x * z + s * y,  //
                         t * x * y + s * z, t * y * y + c, t * y * z - s * x,  //
                         t * x * z - s * y, t * y * z + s * x, t * z * z + c});
}

// exp([v]x) for a rotation vector v in radians.
[[nodiscard]] inline RotationMatrix exp_map(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-15) return RotationMatrix::identity();
  return axis_angle(v / angle, angle);
}

// Rotation vector (radians) of R; inverse of exp_map for angles below pi.
[[nodiscard]] inline Vec3 log_map(const RotationMatrix& r) {
  const double tr = r(0, 0) + r(1, 1) + r(2, 2);
  const double cos_a = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
  const Vec3 skew{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
  const double sin_a = 0.5 * skew.norm();
  const double angle = std::atan2(sin_a, cos_a);
  if (angle < 1e-12) return skew * 0.5;
  return skew * (angle / (2.0 * sin_a));
}

// Quantized (roll, pitch) cell. Both components are multiples of q.
struct BinKey {
  int roll_bin = 0;
  int pitch_bin = 0;

  constexpr auto operator<=>(const BinKey&) const = default;
};

// Number of (roll, pitch) cells at quantization q.
[[nodiscard]] constexpr long bin_capacity(int q) { return (360L / q) * (180L / q); }

// Floor-to-multiple-of-q per component. roll = 180 folds onto -180 (same
// angle) and pitch = 90 folds into the top cell so every key stays inside
// roll in [-180, 180 - q], pitch in [-90, 90 - q]. q must divide 180.
[[nodiscard]] inline BinKey quantize_rp(double roll, double pitch, int q) {
  if (q < 1 || 180 % q != 0) throw InvalidArgument("quantize_rp: q must be a positive divisor of 180");
  int r = static_cast<int>(std::floor(roll / q)) * q;
  int p = static_cast<int>(std::floor(pitch / q)) * q;
  if (r >= 180) r -= 360;
  if (r < -180) r += 360;
  p = std::clamp(p, -90, 90 - q);
  return {r, p};
}

}  // namespace pedhat::geom
