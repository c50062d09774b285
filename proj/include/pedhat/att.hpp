#pragma once

// Phone attitude estimation from IMU samples, plus the two heading
// baselines: integrated gyroscope (IG) and GPS bearing.
//
// The estimator is a two-gain complementary filter: gyro propagation with an
// exact exponential step, tilt pulled toward measured gravity, yaw pulled
// toward magnetic north when the field magnitude looks trustworthy.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedhat/errors.hpp"
#include "pedhat/geom.hpp"
#include "pedhat/oha.hpp"

namespace pedhat::att {

using geom::EulerAngles;
using geom::RotationMatrix;
using geom::Vec3;

inline constexpr double kGravity = 9.81;

struct ImuSample {
  double t = 0.0;
  Vec3 gyro;                // deg/s, phone frame
  Vec3 accel;               // m/s^2 specific force, phone frame
  std::optional<Vec3> mag;  // microtesla, phone frame
};

struct GpsFix {
  double t = 0.0;
  double x = 0.0;  // east, m
  double y = 0.0;  // north, m
  double accuracy = 1.0;
};

// Euler view of a rotation that never throws: at the pitch singularity roll
// is pinned to zero and the remaining rotation is assigned to yaw.
[[nodiscard]] inline EulerAngles euler_or_fallback(const RotationMatrix& r) {
  if (auto e = geom::try_matrix_to_euler(r)) return *e;
  EulerAngles e;
  e.pitch = r(2, 0) < 0.0 ? 90.0 : -90.0;
  e.roll = 0.0;
  e.yaw = geom::wrap180(geom::rad2deg(std::atan2(-r(0, 1), r(1, 1))));
  return e;
}

struct AttitudeEstimate {
  double t = 0.0;
  RotationMatrix rotation;  // phone frame -> GCS
  bool drift_flag = false;  // no correction applied within the drift window
  double last_correction_t = 0.0;

  [[nodiscard]] EulerAngles attitude() const { return euler_or_fallback(rotation); }

  [[nodiscard]] static AttitudeEstimate from_euler(double t, const EulerAngles& e) {
    return {t, geom::euler_to_matrix(e), false, t};
  }
};

inline constexpr double kMaxGyroStep = 0.1;  // s

// Propagates the attitude by the body rate held over (prev.t, s.t].
[[nodiscard]] inline AttitudeEstimate integrate_gyro(const AttitudeEstimate& prev, const ImuSample& s) {
  const double dt = s.t - prev.t;
  if (dt <= 0.0) {
    throw NonMonotonicTime("integrate_gyro: sample time " + std::to_string(s.t) + " not after " +
                           std::to_string(prev.t));
  }
  if (dt > kMaxGyroStep) throw StepTooLarge("integrate_gyro: step of " + std::to_string(dt) + " s exceeds 0.1 s");
  const Vec3 rot = s.gyro * (geom::kDegToRad * dt);
  AttitudeEstimate next = prev;
  next.t = s.t;
  next.rotation = (prev.rotation * geom::exp_map(rot)).renormalized();
  return next;
}

struct MagGate {
  double lo = 25.0;  // microtesla
  double hi = 65.0;

  [[nodiscard]] bool operator()(const Vec3& mag) const {
    const double m = mag.norm();
    return m >= lo && m <= hi;
  }
};

[[nodiscard]] inline bool mag_gate(const Vec3& mag, const MagGate& gate = {}) { return gate(mag); }

struct CorrectionGains {
  double tilt = 0.02;  // fraction of the tilt error removed per accel sample
  double yaw = 0.05;   // fraction of the heading error removed per accepted mag sample
};

struct CorrectionConfig {
  // Accel is used for tilt only when | |a| - g | stays under this.
  double accel_gate = 1.0;
  MagGate mag_gate;
  double drift_window = 1.0;  // s
};

// One complementary correction step. Unusable inputs leave the estimate as is.
[[nodiscard]] inline AttitudeEstimate correct_attitude(const AttitudeEstimate& prev, const ImuSample& s,
                                                       const CorrectionGains& gains,
                                                       const CorrectionConfig& cfg = {}) {
  AttitudeEstimate next = prev;
  bool corrected = false;

  const double a_norm = s.accel.norm();
  if (gains.tilt > 0.0 && a_norm > 0.0 && std::abs(a_norm - kGravity) < cfg.accel_gate) {
    // Predicted and measured "up" in the phone frame.
    const Vec3 up_pred = next.rotation.transpose() * Vec3{0, 0, 1};
    const Vec3 up_meas = s.accel / a_norm;
    const Vec3 axis = up_pred.cross(up_meas);
    const double s_ang = axis.norm();
    const double angle = std::atan2(s_ang, up_pred.dot(up_meas));
    if (s_ang > 1e-15) {
      // Rotating the estimate by -gain*angle about the phone-frame axis moves
      // the predicted up vector that far toward the measurement.
      next.rotation = (next.rotation * geom::axis_angle(axis / s_ang, -gains.tilt * angle)).renormalized();
    }
    corrected = true;
  }

  if (gains.yaw > 0.0 && s.mag && cfg.mag_gate(*s.mag)) {
    const Vec3 m_world = next.rotation * *s.mag;
    if (std::hypot(m_world.x, m_world.y) > 1e-9) {
      // Clockwise azimuth of the measured field; zero when the estimate is right.
      const double az = std::atan2(m_world.x, m_world.y);
      next.rotation = (geom::RotationMatrix::rot_z(geom::rad2deg(gains.yaw * az)) * next.rotation).renormalized();
      corrected = true;
    }
  }

  next.t = s.t;
  if (corrected) next.last_correction_t = s.t;
  next.drift_flag = (s.t - next.last_correction_t) > cfg.drift_window;
  return next;
}

[[nodiscard]] inline AttitudeEstimate correct_attitude(const AttitudeEstimate& prev, const ImuSample& s, double gain,
                                                       const CorrectionConfig& cfg = {}) {
  return correct_attitude(prev, s, CorrectionGains{gain, gain}, cfg);
}

// Static alignment: tilt from gravity, yaw from the horizontal field.
[[nodiscard]] inline std::optional<AttitudeEstimate> align(const ImuSample& s) {
  if (!s.mag || s.accel.norm() <= 0.0) return std::nullopt;
  const Vec3 up = s.accel.normalized();
  const Vec3 east = s.mag->cross(up);
  if (east.norm() < 1e-9) return std::nullopt;
  const Vec3 e = east.normalized();
  const Vec3 n = up.cross(e);
  // Rows of the GCS <- phone rotation are the GCS axes expressed in the phone frame.
  const RotationMatrix r({e.x, e.y, e.z, n.x, n.y, n.z, up.x, up.y, up.z});
  return AttitudeEstimate{s.t, r, false, s.t};
}

struct AttitudeFilterConfig {
  CorrectionGains gains;
  CorrectionConfig correction;
  // Accel samples whose gravity direction disagrees with the estimate by more
  // than this many degrees are skipped for tilt, as sustained turning or
  // braking would otherwise pull the horizon. After tilt_gate_timeout seconds
  // without a tilt update the gate opens again. Zero disables the gate.
  double tilt_gate = 2.0;
  double tilt_gate_timeout = 2.0;
};

// Stream wrapper: integrates every sample and applies the corrections.
class AttitudeFilter {
 public:
  explicit AttitudeFilter(AttitudeFilterConfig cfg = {}) : cfg_(cfg) {}

  // Starts from a known attitude instead of static alignment.
  void initialize(const AttitudeEstimate& est) {
    est_ = est;
    last_tilt_t_ = est.t;
  }

  [[nodiscard]] bool initialized() const { return est_.has_value(); }

  // Returns the updated estimate, or nothing while waiting for an alignment
  // sample (accel + mag).
  std::optional<AttitudeEstimate> step(const ImuSample& s) {
    if (!est_) {
      est_ = align(s);
      if (est_) last_tilt_t_ = s.t;
      return est_;
    }
    AttitudeEstimate next = integrate_gyro(*est_, s);
    CorrectionGains gains = cfg_.gains;
    if (cfg_.tilt_gate > 0.0 && s.t - last_tilt_t_ <= cfg_.tilt_gate_timeout &&
        tilt_innovation(next, s) > cfg_.tilt_gate) {
      gains.tilt = 0.0;
    }
    const double a_norm = s.accel.norm();
    if (gains.tilt > 0.0 && std::abs(a_norm - kGravity) < cfg_.correction.accel_gate) last_tilt_t_ = s.t;
    next = correct_attitude(next, s, gains, cfg_.correction);
    est_ = next;
    return est_;
  }

  // Angle (deg) between the estimated and the measured up direction.
  [[nodiscard]] static double tilt_innovation(const AttitudeEstimate& est, const ImuSample& s) {
    const double a_norm = s.accel.norm();
    if (a_norm <= 0.0) return 0.0;
    const Vec3 up_pred = est.rotation.transpose() * Vec3{0, 0, 1};
    const Vec3 up_meas = s.accel / a_norm;
    return geom::rad2deg(std::atan2(up_pred.cross(up_meas).norm(), up_pred.dot(up_meas)));
  }

  [[nodiscard]] const std::optional<AttitudeEstimate>& estimate() const { return est_; }

 private:
  AttitudeFilterConfig cfg_;
  std::optional<AttitudeEstimate> est_;
  double last_tilt_t_ = 0.0;
};

// Integrated-gyroscope heading: the gyro rate projected on the GCS vertical
// through the current attitude, accumulated from a known initial heading.
class IgTracker {
 public:
  explicit IgTracker(double initial_heading) : heading_(geom::wrap360(initial_heading)) {}

  // `attitude` is the estimate at the start of the interval ending at s.t.
  oha::HeadingSample step(const RotationMatrix& attitude, const ImuSample& s) {
    if (last_t_) {
      const double dt = s.t - *last_t_;
      if (dt <= 0.0) throw NonMonotonicTime("ig: sample time not increasing");
      const double vertical_rate = (attitude * s.gyro).z;  // deg/s, counter-clockwise
      heading_ = geom::wrap360(heading_ - vertical_rate * dt);
    }
    last_t_ = s.t;
    return {s.t, heading_, oha::HeadingKind::precise};
  }

  [[nodiscard]] double heading() const { return heading_; }

 private:
  double heading_;
  std::optional<double> last_t_;
};

// Batch form of IgTracker over aligned attitude/IMU streams.
[[nodiscard]] inline std::vector<oha::HeadingSample> ig_heading(std::span<const AttitudeEstimate> attitudes,
                                                                std::span<const ImuSample> imu,
                                                                double initial_heading) {
  if (attitudes.size() != imu.size()) throw InvalidArgument("ig_heading: stream lengths differ");
  std::vector<oha::HeadingSample> out;
  out.reserve(imu.size());
  IgTracker ig(initial_heading);
  for (std::size_t i = 0; i < imu.size(); ++i) {
    const RotationMatrix& r = i == 0 ? attitudes[0].rotation : attitudes[i - 1].rotation;
    out.push_back(ig.step(r, imu[i]));
  }
  return out;
}

struct GpsBearingConfig {
  double min_move = 0.5;  // m
};

// Bearing of the chord between two fixes, stamped at the chord midpoint.
// Nothing when the displacement is under min_move.
[[nodiscard]] inline std::optional<oha::HeadingSample> gps_bearing(const GpsFix& prev, const GpsFix& cur,
                                                                   const GpsBearingConfig& cfg = {}) {
  const double dx = cur.x - prev.x;
  const double dy = cur.y - prev.y;
  if (std::hypot(dx, dy) < cfg.min_move) return std::nullopt;
  return oha::HeadingSample{0.5 * (prev.t + cur.t), geom::wrap360(geom::rad2deg(std::atan2(dx, dy))),
                            oha::HeadingKind::coarse};
}

[[nodiscard]] inline std::vector<oha::HeadingSample> gps_bearings(std::span<const GpsFix> fixes,
                                                                  const GpsBearingConfig& cfg = {}) {
  std::vector<oha::HeadingSample> out;
  for (std::size_t i = 1; i < fixes.size(); ++i) {
    if (auto h = gps_bearing(fixes[i - 1], fixes[i], cfg)) out.push_back(*h);
  }
  return out;
}

}  // namespace pedhat::att
