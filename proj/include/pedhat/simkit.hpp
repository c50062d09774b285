#pragma once

// Seeded pedestrian and sensor simulator: walking paths, phone carrying
// attitudes, 50 Hz IMU / 10 Hz magnetometer / 1 Hz GPS synthesis, a road
// crossing course, and ground-truth crossing labels.
//
// Every generator is a pure function of its parameters and seed.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pedhat/att.hpp"
#include "pedhat/errors.hpp"
#include "pedhat/geom.hpp"
#include "pedhat/rng.hpp"
#include "pedhat/roads.hpp"

namespace pedhat::sim {

using geom::EulerAngles;
using geom::Vec3;

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // compass degrees, [0, 360)
  double speed = 0.0;    // m/s
};

// A named stretch of a trajectory, e.g. one pattern of a concatenated session.
struct Segment {
  std::string name;
  double t0 = 0.0;
  double t1 = 0.0;
};

struct Trajectory {
  double dt = 0.02;
  std::vector<TrajectorySample> samples;
  std::vector<Segment> segments;

  [[nodiscard]] double duration() const { return samples.empty() ? 0.0 : samples.back().t - samples.front().t; }
};

// Incremental path construction at a fixed step. Speed follows commanded
// targets with a bounded ramp; position integrates speed along the heading.
class PathBuilder {
 public:
  PathBuilder(double dt, double x, double y, double heading, double speed, double max_accel = 2.0)
      : dt_(dt), max_accel_(max_accel) {
    if (dt <= 0.0) throw InvalidArgument("path step must be positive");
    traj_.dt = dt;
    traj_.samples.push_back({0.0, x, y, geom::wrap360(heading), speed});
  }

  [[nodiscard]] const TrajectorySample& last() const { return traj_.samples.back(); }
  [[nodiscard]] double t() const { return last().t; }
  [[nodiscard]] double dt() const { return dt_; }

  // Straight line at the current heading.
  PathBuilder& walk(double duration, double speed) {
    const double h = last().heading;
    return run(duration, speed, [h](double) { return h; });
  }

  // Heading change of `delta` degrees with a raised-cosine profile.
  PathBuilder& turn(double delta, double duration, double speed) {
    const double h0 = last().heading;
    return run(duration, speed, [=](double tau) {
      return h0 + delta * 0.5 * (1.0 - std::cos(std::numbers::pi * std::clamp(tau / duration, 0.0, 1.0)));
    });
  }

  PathBuilder& pause(double duration) { return walk(duration, 0.0); }

  // Heading given as a function of time since the command started.
  PathBuilder& sweep(double duration, double speed, const std::function<double(double)>& heading_at) {
    return run(duration, speed, heading_at);
  }

  // Walks straight until `done(sample)` holds or `limit` seconds pass.
  PathBuilder& walk_until(double speed, double limit, const std::function<bool(const TrajectorySample&)>& done) {
    const double h = last().heading;
    const long steps = std::lround(limit / dt_);
    for (long i = 0; i < steps && !done(last()); ++i) step(speed, h);
    return *this;
  }

  void mark(const std::string& name, double t0) { traj_.segments.push_back({name, t0, t()}); }

  [[nodiscard]] Trajectory take() && { return std::move(traj_); }
  [[nodiscard]] const Trajectory& trajectory() const { return traj_; }

 private:
  PathBuilder& run(double duration, double speed, const std::function<double(double)>& heading_at) {
    const long steps = std::lround(duration / dt_);
    for (long i = 1; i <= steps; ++i) step(speed, heading_at(static_cast<double>(i) * dt_));
    return *this;
  }

  void step(double target_speed, double heading) {
    const TrajectorySample& p = last();
    const double dv = std::clamp(target_speed - p.speed, -max_accel_ * dt_, max_accel_ * dt_);
    const double v = p.speed + dv;
    const double h = geom::wrap360(heading);
    const double hr = geom::deg2rad(h);
    // Integer step count keeps timestamps free of accumulated rounding.
    const double t = static_cast<double>(traj_.samples.size()) * dt_;
    traj_.samples.push_back({t, p.x + v * std::sin(hr) * dt_, p.y + v * std::cos(hr) * dt_, h, v});
  }

  double dt_;
  double max_accel_;
  Trajectory traj_;
};

enum class Pattern { SOT, SWR, MSP, crossing_course };

[[nodiscard]] inline Pattern pattern_from_string(const std::string& s) {
  if (s == "SOT" || s == "sot") return Pattern::SOT;
  if (s == "SWR" || s == "swr") return Pattern::SWR;
  if (s == "MSP" || s == "msp") return Pattern::MSP;
  if (s == "crossing_course") return Pattern::crossing_course;
  throw UnknownPattern("unknown path pattern '" + s + "'");
}

[[nodiscard]] inline std::string to_string(Pattern p) {
  switch (p) {
    case Pattern::SOT: return "SOT";
    case Pattern::SWR: return "SWR";
    case Pattern::MSP: return "MSP";
    case Pattern::crossing_course: return "crossing_course";
  }
  return "SOT";
}

struct CourseParams {
  double road_half_width = 3.5;  // ground truth only
  double sidewalk_min = 1.5;     // offset beyond the road edge, m
  double sidewalk_max = 4.0;
  double warmup_min = 15.0;  // initial sidewalk walk, s
  double warmup_max = 25.0;
  double gap_min = 10.0;  // sidewalk walk between actions, s
  double gap_max = 20.0;
  // Relative weights of the scripted actions.
  double w_turn_cross = 0.45;
  double w_straight_cross = 0.25;
  double w_fake = 0.1;
  double w_depart = 0.2;
  double w_out_and_back = 0.0;  // cross and immediately return
  double curb_pause_prob = 0.5;
  double road_length = 4000.0;
  double vertex_spacing = 500.0;
};

struct PathParams {
  double duration = 180.0;
  double dt = 0.02;
  double speed = 1.4;
  std::optional<double> start_heading;  // drawn from the seed when unset
  // SOT
  double leg_min = 12.0;
  double leg_max = 28.0;
  double turn_duration = 1.5;
  // SWR
  double hold_min = 3.0;
  double hold_max = 8.0;
  double rotate_duration = 2.0;
  double rotate_min = 45.0;
  double rotate_max = 180.0;
  // MSP
  double msp_amplitude = 60.0;
  double msp_period = 20.0;
  CourseParams course;
};

namespace detail {

inline void append_sot(PathBuilder& b, const PathParams& p, double until, Rng& rng) {
  while (b.t() < until - 1e-9) {
    const double leg = std::min(rng.uniform(p.leg_min, p.leg_max), until - b.t());
    b.walk(leg, p.speed);
    if (b.t() >= until - 1e-9) break;
    const double turn = std::min(p.turn_duration, until - b.t());
    b.turn(rng.bernoulli(0.5) ? 90.0 : -90.0, turn, p.speed);
  }
}

inline void append_swr(PathBuilder& b, const PathParams& p, double until, Rng& rng) {
  while (b.t() < until - 1e-9) {
    b.pause(std::min(rng.uniform(p.hold_min, p.hold_max), until - b.t()));
    if (b.t() >= until - 1e-9) break;
    const double mag = rng.uniform(p.rotate_min, p.rotate_max);
    b.turn(rng.bernoulli(0.5) ? mag : -mag, std::min(p.rotate_duration, until - b.t()), 0.0);
  }
}

inline void append_msp(PathBuilder& b, const PathParams& p, double until) {
  const double h0 = b.last().heading;
  const double amp = p.msp_amplitude, period = p.msp_period;
  b.sweep(until - b.t(), p.speed,
          [=](double tau) { return h0 + amp * std::sin(2.0 * std::numbers::pi * tau / period); });
}

}  // namespace detail

struct Course {
  Trajectory trajectory;
  roads::RoadNetwork roads;
  std::vector<std::string> actions;
};

[[nodiscard]] Course crossing_course(const PathParams& params, std::uint64_t seed);

// One pattern from the start of a fresh path.
[[nodiscard]] inline Trajectory gen_path(Pattern pattern, const PathParams& params, std::uint64_t seed) {
  if (params.duration <= 0.0) throw InvalidArgument("gen_path: duration must be positive");
  if (pattern == Pattern::crossing_course) return crossing_course(params, seed).trajectory;
  Rng rng = Rng::derive(seed, 1);
  const double h0 = params.start_heading ? *params.start_heading : rng.uniform(0.0, 360.0);
  const double v0 = pattern == Pattern::SWR ? 0.0 : params.speed;
  PathBuilder b(params.dt, 0.0, 0.0, h0, v0);
  switch (pattern) {
    case Pattern::SOT: detail::append_sot(b, params, params.duration, rng); break;
    case Pattern::SWR: detail::append_swr(b, params, params.duration, rng); break;
    case Pattern::MSP: detail::append_msp(b, params, params.duration); break;
    case Pattern::crossing_course: break;
  }
  b.mark(to_string(pattern), 0.0);
  return std::move(b).take();
}

struct SessionPart {
  Pattern pattern = Pattern::SOT;
  double duration = 60.0;
};

// Patterns walked back to back in one continuous session, each continuing
// from where the previous one ended. Entering SWR brings the walker to a stop.
[[nodiscard]] inline Trajectory gen_session(const std::vector<SessionPart>& parts, const PathParams& params,
                                            std::uint64_t seed) {
  if (parts.empty()) throw InvalidArgument("gen_session: no parts");
  Rng rng = Rng::derive(seed, 1);
  const double h0 = params.start_heading ? *params.start_heading : rng.uniform(0.0, 360.0);
  const double v0 = parts.front().pattern == Pattern::SWR ? 0.0 : params.speed;
  PathBuilder b(params.dt, 0.0, 0.0, h0, v0);
  double end = 0.0;
  for (const auto& part : parts) {
    if (part.duration <= 0.0) throw InvalidArgument("gen_session: part duration must be positive");
    const double t0 = b.t();
    end += part.duration;
    switch (part.pattern) {
      case Pattern::SOT: detail::append_sot(b, params, end, rng); break;
      case Pattern::SWR: detail::append_swr(b, params, end, rng); break;
      case Pattern::MSP: detail::append_msp(b, params, end); break;
      case Pattern::crossing_course: throw UnknownPattern("crossing_course cannot be part of a session");
    }
    b.mark(to_string(part.pattern), t0);
  }
  return std::move(b).take();
}

// ---------------------------------------------------------------------------
// Carrying attitude

enum class Placement { hand, pocket, swing };

[[nodiscard]] inline Placement placement_from_string(const std::string& s) {
  if (s == "hand") return Placement::hand;
  if (s == "pocket") return Placement::pocket;
  if (s == "swing") return Placement::swing;
  throw InvalidArgument("unknown placement '" + s + "'");
}

[[nodiscard]] inline std::string to_string(Placement p) {
  switch (p) {
    case Placement::hand: return "hand";
    case Placement::pocket: return "pocket";
    case Placement::swing: return "swing";
  }
  return "hand";
}

// Phone attitude relative to the walker: base offset plus a gait-locked
// oscillation. Roll carries the limb swing at half the step cadence and
// pitch a smaller component at the step cadence (a figure-8 trace). The
// relative yaw stays at base_offset.yaw.
struct AttitudeProfile {
  Placement placement = Placement::hand;
  double swing_amplitude = 0.0;  // roll amplitude, degrees
  double pitch_ratio = 0.0;      // pitch amplitude as a fraction of the roll amplitude
  double cadence = 1.8;          // steps per second
  EulerAngles base_offset{40.0, 0.0, 0.0};
  double jitter = 1.0;       // smooth hand tremor amplitude, degrees
  double speed_ref = 1.4;    // speed at which the swing reaches full amplitude
  double speed_tau = 0.5;    // s, lag of the swing amplitude behind speed changes

  [[nodiscard]] static AttitudeProfile preset(Placement p) {
    AttitudeProfile a;
    a.placement = p;
    switch (p) {
      case Placement::hand: break;
      case Placement::pocket:
        a.swing_amplitude = 25.0;
        a.pitch_ratio = 8.0 / 25.0;
        a.base_offset = {80.0, 10.0, 90.0};
        break;
      case Placement::swing:
        a.swing_amplitude = 60.0;
        a.pitch_ratio = 1.0 / 6.0;
        a.base_offset = {-60.0, 15.0, 0.0};
        break;
    }
    return a;
  }
};

// True phone attitude in GCS per trajectory sample.
[[nodiscard]] inline std::vector<EulerAngles> synth_attitude(const Trajectory& traj, const AttitudeProfile& prof,
                                                             std::uint64_t seed) {
  if (prof.swing_amplitude < 0.0 || prof.swing_amplitude > 90.0) {
    throw InvalidArgument("swing_amplitude must lie in [0, 90]");
  }
  Rng rng = Rng::derive(seed, 2);
  struct Tone {
    double w, f, ph;
  };
  // Three slow tones per axis; weights sum to one so |jitter| <= amplitude.
  auto tones = [&rng] {
    std::array<Tone, 3> ts{};
    double sum = 0.0;
    for (auto& t : ts) {
      t = {rng.uniform(0.2, 1.0), rng.uniform(0.05, 0.6), rng.uniform(0.0, 2.0 * std::numbers::pi)};
      sum += t.w;
    }
    for (auto& t : ts) t.w /= sum;
    return ts;
  };
  const auto roll_tones = tones();
  const auto pitch_tones = tones();
  auto jitter = [&](const std::array<Tone, 3>& ts, double t) {
    double s = 0.0;
    for (const auto& tn : ts) s += tn.w * std::sin(2.0 * std::numbers::pi * tn.f * t + tn.ph);
    return prof.jitter * s;
  };

  std::vector<EulerAngles> out;
  out.reserve(traj.samples.size());
  const double limb_rate = 2.0 * std::numbers::pi * prof.cadence / 2.0;
  const double blend = prof.speed_tau > 0.0 ? 1.0 - std::exp(-traj.dt / prof.speed_tau) : 1.0;
  double level = traj.samples.empty() ? 0.0 : std::min(traj.samples.front().speed / prof.speed_ref, 1.0);
  for (const auto& s : traj.samples) {
    level += blend * (std::min(s.speed / prof.speed_ref, 1.0) - level);
    const double phase = limb_rate * s.t;
    const double amp = prof.swing_amplitude * level;
    EulerAngles e;
    e.roll = geom::wrap180(prof.base_offset.roll + amp * std::sin(phase) + jitter(roll_tones, s.t));
    e.pitch = std::clamp(prof.base_offset.pitch + prof.pitch_ratio * amp * std::sin(2.0 * phase) +
                             jitter(pitch_tones, s.t),
                         -89.0, 89.0);
    // Walker frame is GCS rotated by -heading, so the phone yaw is the
    // relative yaw minus the heading.
    e.yaw = geom::wrap180(prof.base_offset.yaw - s.heading);
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sensors

struct NoiseModel {
  Vec3 gyro_bias;                  // deg/s, fixed phone-frame bias
  double gyro_bias_random = 0.0;   // deg/s, extra bias of this magnitude along a seeded random axis
  double gyro_bias_walk = 0.0;     // deg/s per sqrt(s), random-walk bias growth
  double gyro_noise = 0.0;         // deg/s per sample
  double accel_noise = 0.0;        // m/s^2
  double mag_noise = 0.0;          // microtesla
  double gps_sigma = 0.0;          // m, white per-fix noise
  double gps_drift_sigma = 0.0;    // m, Gauss-Markov drift stationary sigma
  double gps_drift_tau = 600.0;    // s
  double gps_delay = 2.0;          // s
  std::uint64_t seed = 0;

  [[nodiscard]] static NoiseModel none() {
    NoiseModel n;
    n.gps_delay = 0.0;
    return n;
  }

  // Consumer-phone-like defaults.
  [[nodiscard]] static NoiseModel typical() {
    NoiseModel n;
    n.gyro_bias_random = 0.05;
    n.gyro_bias_walk = 0.002;
    n.gyro_noise = 0.3;
    n.accel_noise = 0.05;
    n.mag_noise = 0.5;
    n.gps_sigma = 0.05;
    n.gps_drift_sigma = 1.5;
    n.gps_drift_tau = 900.0;
    n.gps_delay = 2.0;
    return n;
  }
};

struct SensorConfig {
  double mag_field = 50.0;         // microtesla
  double mag_inclination = 30.0;   // degrees below horizontal; declination is zero
  int mag_every = 5;               // magnetometer every k-th IMU sample (10 Hz at 50 Hz)
  double gps_rate = 1.0;           // Hz
  double gps_accuracy_floor = 1.0; // m
};

[[nodiscard]] inline Vec3 earth_field(const SensorConfig& cfg) {
  const double inc = geom::deg2rad(cfg.mag_inclination);
  return {0.0, cfg.mag_field * std::cos(inc), -cfg.mag_field * std::sin(inc)};
}

// IMU stream for a trajectory and the matching true attitude sequence. The
// gyro reports the exact mean body rate over each sample interval, so a
// noiseless stream re-integrates to the true attitude.
[[nodiscard]] inline std::vector<att::ImuSample> synth_imu(const Trajectory& traj,
                                                           const std::vector<EulerAngles>& attitude,
                                                           const NoiseModel& noise, const SensorConfig& cfg = {}) {
  if (attitude.size() != traj.samples.size()) throw InvalidArgument("synth_imu: attitude length mismatch");
  Rng rng = Rng::derive(noise.seed, 3);
  const std::size_t n = traj.samples.size();
  const double dt = traj.dt;

  Vec3 bias = noise.gyro_bias;
  if (noise.gyro_bias_random > 0.0) {
    Vec3 axis;
    do {
      axis = {rng.normal(), rng.normal(), rng.normal()};
    } while (axis.norm() < 1e-6);
    bias += axis.normalized() * noise.gyro_bias_random;
  }

  // Walker acceleration in GCS from the velocity history.
  std::vector<Vec3> vel(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = traj.samples[k];
    const double h = geom::deg2rad(s.heading);
    vel[k] = {s.speed * std::sin(h), s.speed * std::cos(h), 0.0};
  }
  const Vec3 field = earth_field(cfg);

  std::vector<att::ImuSample> out;
  out.reserve(n);
  geom::RotationMatrix prev;
  for (std::size_t k = 0; k < n; ++k) {
    const geom::RotationMatrix r = geom::euler_to_matrix(attitude[k]);
    att::ImuSample s;
    s.t = traj.samples[k].t;

    Vec3 rate;
    if (k > 0) rate = geom::log_map(prev.transpose() * r) * (geom::kRadToDeg / dt);
    if (k > 0 && noise.gyro_bias_walk > 0.0) {
      const double w = noise.gyro_bias_walk * std::sqrt(dt);
      bias += Vec3{rng.normal(0.0, w), rng.normal(0.0, w), rng.normal(0.0, w)};
    }
    s.gyro = rate + bias;
    if (noise.gyro_noise > 0.0) {
      s.gyro += Vec3{rng.normal(0.0, noise.gyro_noise), rng.normal(0.0, noise.gyro_noise),
                     rng.normal(0.0, noise.gyro_noise)};
    }

    Vec3 a_world;
    if (n > 1) {
      const std::size_t lo = k == 0 ? 0 : k - 1;
      const std::size_t hi = k + 1 < n ? k + 1 : k;
      a_world = (vel[hi] - vel[lo]) / (static_cast<double>(hi - lo) * dt);
    }
    s.accel = r.transpose() * (a_world + Vec3{0.0, 0.0, att::kGravity});
    if (noise.accel_noise > 0.0) {
      s.accel += Vec3{rng.normal(0.0, noise.accel_noise), rng.normal(0.0, noise.accel_noise),
                      rng.normal(0.0, noise.accel_noise)};
    }

    if (cfg.mag_every > 0 && k % static_cast<std::size_t>(cfg.mag_every) == 0) {
      Vec3 m = r.transpose() * field;
      if (noise.mag_noise > 0.0) {
        m += Vec3{rng.normal(0.0, noise.mag_noise), rng.normal(0.0, noise.mag_noise),
                  rng.normal(0.0, noise.mag_noise)};
      }
      s.mag = m;
    }
    out.push_back(s);
    prev = r;
  }
  return out;
}

// Position at time t by linear interpolation, clamped to the trajectory span.
[[nodiscard]] inline roads::Point position_at(const Trajectory& traj, double t) {
  const auto& ss = traj.samples;
  if (ss.empty()) return {};
  if (t <= ss.front().t) return {ss.front().x, ss.front().y};
  if (t >= ss.back().t) return {ss.back().x, ss.back().y};
  const double f = (t - ss.front().t) / traj.dt;
  auto i = static_cast<std::size_t>(std::floor(f));
  if (i + 1 >= ss.size()) i = ss.size() - 2;
  const double u = std::clamp(f - static_cast<double>(i), 0.0, 1.0);
  return {ss[i].x + u * (ss[i + 1].x - ss[i].x), ss[i].y + u * (ss[i + 1].y - ss[i].y)};
}

[[nodiscard]] inline std::vector<att::GpsFix> synth_gps(const Trajectory& traj, const NoiseModel& noise,
                                                        const SensorConfig& cfg = {}) {
  std::vector<att::GpsFix> out;
  if (traj.samples.empty()) return out;
  Rng rng = Rng::derive(noise.seed, 4);
  const double t0 = traj.samples.front().t, t1 = traj.samples.back().t;
  const double period = 1.0 / cfg.gps_rate;
  const double sd = noise.gps_drift_sigma;
  double dx = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
  double dy = sd > 0.0 ? rng.normal(0.0, sd) : 0.0;
  const double phi = std::exp(-period / noise.gps_drift_tau);
  const double innov = sd * std::sqrt(1.0 - phi * phi);
  const double accuracy =
      std::max(std::sqrt(noise.gps_sigma * noise.gps_sigma + sd * sd), cfg.gps_accuracy_floor);
  for (long k = 0;; ++k) {
    const double t = t0 + static_cast<double>(k) * period;
    if (t > t1 + 1e-9) break;
    if (k > 0 && sd > 0.0) {
      dx = phi * dx + rng.normal(0.0, innov);
      dy = phi * dy + rng.normal(0.0, innov);
    }
    const roads::Point p = position_at(traj, std::max(t - noise.gps_delay, t0));
    double wx = 0.0, wy = 0.0;
    if (noise.gps_sigma > 0.0) {
      wx = rng.normal(0.0, noise.gps_sigma);
      wy = rng.normal(0.0, noise.gps_sigma);
    }
    out.push_back({t, p.x + dx + wx, p.y + dy + wy, accuracy});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Crossing course and labels

namespace detail {

// Walker state relative to a straight road through the origin.
struct RoadFrame {
  double beta = 0.0;  // road bearing
  [[nodiscard]] double along(double x, double y) const {
    const double b = geom::deg2rad(beta);
    return x * std::sin(b) + y * std::cos(b);
  }
  // Positive right of the road direction.
  [[nodiscard]] double across(double x, double y) const {
    const double b = geom::deg2rad(beta + 90.0);
    return x * std::sin(b) + y * std::cos(b);
  }
  // Bearing that faces the centerline from side `side` (+1 right, -1 left).
  [[nodiscard]] double toward(int side) const { return geom::wrap360(beta + (side > 0 ? 270.0 : 90.0)); }
  [[nodiscard]] double away(int side) const { return geom::wrap360(toward(side) + 180.0); }
};

}  // namespace detail

inline Course crossing_course(const PathParams& params, std::uint64_t seed) {
  const CourseParams& cp = params.course;
  Rng rng = Rng::derive(seed, 1);
  detail::RoadFrame road{rng.uniform(0.0, 180.0)};

  std::vector<roads::Point> line;
  const double half = cp.road_length / 2.0;
  const double br = geom::deg2rad(road.beta);
  const long pieces = std::max(1L, std::lround(cp.road_length / cp.vertex_spacing));
  for (long i = 0; i <= pieces; ++i) {
    const double u = -half + cp.road_length * static_cast<double>(i) / static_cast<double>(pieces);
    line.push_back({u * std::sin(br), u * std::cos(br)});
  }
  roads::RoadNetwork net({roads::RoadSegment{"road-0", line, std::string("main street")}});

  const double hw = cp.road_half_width;
  int side = rng.bernoulli(0.5) ? 1 : -1;
  const double offset0 = hw + rng.uniform(cp.sidewalk_min, cp.sidewalk_max);
  const double u0 = rng.uniform(-200.0, 200.0);
  const double sx = geom::deg2rad(road.beta + 90.0);
  const double x0 = u0 * std::sin(br) + side * offset0 * std::sin(sx);
  const double y0 = u0 * std::cos(br) + side * offset0 * std::cos(sx);
  const double along0 = rng.bernoulli(0.5) ? road.beta : geom::wrap360(road.beta + 180.0);

  const double v = params.speed;
  PathBuilder b(params.dt, x0, y0, along0, v);
  Course course;
  course.roads = net;

  auto turn_to = [&](double target, double duration, double speed) {
    b.turn(geom::angle_diff(b.last().heading, target), duration, speed);
  };
  auto new_along = [&] { return rng.bernoulli(0.5) ? road.beta : geom::wrap360(road.beta + 180.0); };

  // Crosses from the current side to a sidewalk on the other side, then
  // resumes walking along the road.
  auto cross_over = [&] {
    const int from = side;
    const double target = hw + rng.uniform(cp.sidewalk_min, cp.sidewalk_max);
    b.walk_until(v, 60.0, [&](const TrajectorySample& s) { return -from * road.across(s.x, s.y) >= target; });
    side = -from;
    turn_to(new_along(), params.turn_duration, v);
  };

  b.walk(rng.uniform(cp.warmup_min, cp.warmup_max), v);
  const double total_w =
      cp.w_turn_cross + cp.w_straight_cross + cp.w_fake + cp.w_depart + cp.w_out_and_back;
  while (b.t() < params.duration - 35.0) {
    double pick = rng.uniform(0.0, total_w);
    if ((pick -= cp.w_turn_cross) < 0.0) {
      course.actions.push_back("turn_cross");
      if (rng.bernoulli(cp.curb_pause_prob)) {
        // Stop, face the road, wait at the curb, then go.
        b.pause(1.0);
        turn_to(road.toward(side), params.turn_duration, 0.0);
        b.walk_until(v, 10.0, [&](const TrajectorySample& s) { return side * road.across(s.x, s.y) <= hw + 0.4; });
        b.pause(rng.uniform(1.0, 3.0));
      } else {
        turn_to(road.toward(side), params.turn_duration, v);
      }
      cross_over();
    } else if ((pick -= cp.w_straight_cross) < 0.0) {
      // Leave the road, turn around far from it, and walk straight across.
      course.actions.push_back("straight_cross");
      turn_to(road.away(side), params.turn_duration, v);
      const double out = rng.uniform(14.0, 22.0);
      b.walk_until(v, 60.0, [&](const TrajectorySample& s) { return side * road.across(s.x, s.y) >= hw + out; });
      turn_to(road.toward(side), 2.5, 0.8);
      cross_over();
    } else if ((pick -= cp.w_fake) < 0.0) {
      // Face the road for a moment without crossing.
      course.actions.push_back("fake");
      b.pause(1.0);
      const double back = b.last().heading;
      turn_to(road.toward(side), params.turn_duration, 0.0);
      b.pause(rng.uniform(1.0, 3.0));
      turn_to(rng.bernoulli(0.5) ? back : geom::wrap360(back + 180.0), params.turn_duration, 0.0);
    } else if ((pick -= cp.w_depart) < 0.0) {
      // Walk away from the road and come back to the same sidewalk.
      course.actions.push_back("depart_return");
      turn_to(road.away(side), params.turn_duration, v);
      const double out = rng.uniform(10.0, 25.0);
      b.walk_until(v, 60.0, [&](const TrajectorySample& s) { return side * road.across(s.x, s.y) >= hw + out; });
      b.pause(rng.uniform(0.0, 3.0));
      turn_to(road.toward(side), 2.5, 0.0);
      const double back = hw + rng.uniform(cp.sidewalk_min, cp.sidewalk_max);
      b.walk_until(v, 60.0, [&](const TrajectorySample& s) { return side * road.across(s.x, s.y) <= back; });
      turn_to(new_along(), params.turn_duration, v);
    } else {
      // Step off the far edge and turn straight back.
      course.actions.push_back("out_and_back");
      const int from = side;
      turn_to(road.toward(side), params.turn_duration, v);
      b.walk_until(v, 60.0, [&](const TrajectorySample& s) { return -from * road.across(s.x, s.y) >= hw; });
      turn_to(road.away(side), params.turn_duration, 0.8);
      const double back = hw + rng.uniform(cp.sidewalk_min, cp.sidewalk_max);
      b.walk_until(v, 60.0, [&](const TrajectorySample& s) { return from * road.across(s.x, s.y) >= back; });
      turn_to(new_along(), params.turn_duration, v);
    }
    b.walk(rng.uniform(cp.gap_min, cp.gap_max), v);
  }
  if (b.t() < params.duration) b.walk(params.duration - b.t(), v);
  b.mark("crossing_course", 0.0);
  course.trajectory = std::move(b).take();
  return course;
}

struct CrossingEvent {
  double start_t = 0.0;
  double edge_t = 0.0;
  double center_t = 0.0;
  std::string road_id;
};

struct LabelConfig {
  double road_half_width = 3.5;
  double near_road = 30.0;         // NoRoadNearby beyond this everywhere
  double turn_angle = 45.0;        // heading change that counts as a turn
  double turn_window = 2.0;        // s
  double turn_radius = 15.0;       // turn must start this close to the road
  double turn_lookback = 15.0;     // s before the edge
  double turn_onset = 2.0;         // degrees of deviation marking the turn start
  double fallback_lead = 5.0;      // s before center when no turn is found
  double return_window = 10.0;     // re-crossing this soon drops the session
};

struct LabelResult {
  std::vector<CrossingEvent> events;
  std::vector<bool> labels;  // per trajectory sample
  bool excluded = false;
  std::string reason;
};

[[nodiscard]] inline LabelResult label_crossings(const Trajectory& traj, const roads::RoadNetwork& net,
                                                 const LabelConfig& cfg = {}) {
  LabelResult out;
  const auto& ss = traj.samples;
  out.labels.assign(ss.size(), false);
  if (ss.empty()) return out;

  std::vector<roads::RoadQueryResult> q;
  q.reserve(ss.size());
  bool near = false;
  for (const auto& s : ss) {
    q.push_back(net.nearest({s.x, s.y}));
    near = near || q.back().d <= cfg.near_road;
  }
  if (!near) throw NoRoadNearby("trajectory never comes within " + std::to_string(cfg.near_road) + " m of a road");

  // Centerline crossings: sign changes of the signed distance to one road.
  struct Cross {
    std::size_t i;  // first sample on the new side
    double t;
  };
  std::vector<Cross> crossings;
  for (std::size_t i = 1; i < ss.size(); ++i) {
    const auto& a = q[i - 1];
    const auto& c = q[i];
    if (a.road_id != c.road_id) continue;
    const bool flip = (a.signed_d > 0.0 && c.signed_d <= 0.0) || (a.signed_d < 0.0 && c.signed_d >= 0.0);
    if (!flip || a.d > cfg.road_half_width || c.d > cfg.road_half_width) continue;
    const double u = a.signed_d / (a.signed_d - c.signed_d);
    crossings.push_back({i, ss[i - 1].t + u * (ss[i].t - ss[i - 1].t)});
  }

  for (std::size_t k = 1; k < crossings.size(); ++k) {
    if (crossings[k].t - crossings[k - 1].t <= cfg.return_window) {
      out.excluded = true;
      out.reason = "re-crossed within " + std::to_string(cfg.return_window) + " s at t=" +
                   std::to_string(crossings[k].t);
      return out;
    }
  }

  const std::size_t win = static_cast<std::size_t>(std::lround(cfg.turn_window / traj.dt));
  double prev_center = -std::numeric_limits<double>::infinity();
  for (const auto& cr : crossings) {
    CrossingEvent ev;
    ev.road_id = q[cr.i].road_id;
    ev.center_t = cr.t;

    // Edge: last entry into the road band before the center.
    std::size_t e = cr.i - 1;
    while (e > 0 && q[e - 1].d <= cfg.road_half_width) --e;
    if (e == 0 && q[0].d <= cfg.road_half_width) {
      ev.edge_t = ss[0].t;
    } else {
      const double da = q[e - 1].d, db = q[e].d;
      const double u = da == db ? 1.0 : (da - cfg.road_half_width) / (da - db);
      ev.edge_t = ss[e - 1].t + std::clamp(u, 0.0, 1.0) * (ss[e].t - ss[e - 1].t);
    }

    // Start: onset of the last qualifying turn near the road.
    auto qualifies = [&](std::size_t i) {
      if (q[i].d > cfg.turn_radius) return false;
      for (std::size_t j = i + 1; j <= i + win && j < ss.size(); ++j) {
        if (std::abs(geom::angle_diff(ss[i].heading, ss[j].heading)) >= cfg.turn_angle) return true;
      }
      return false;
    };
    const double lo_t = std::max(ev.edge_t - cfg.turn_lookback, prev_center);
    std::optional<std::size_t> last_q;
    for (std::size_t i = e; i-- > 0;) {
      if (ss[i].t < lo_t) break;
      if (qualifies(i)) {
        last_q = i;
        break;
      }
    }
    std::optional<double> start;
    if (last_q) {
      std::size_t i0 = *last_q;
      while (i0 > 0 && ss[i0 - 1].t >= lo_t && qualifies(i0 - 1)) --i0;
      for (std::size_t k = i0; k < ss.size(); ++k) {
        if (std::abs(geom::angle_diff(ss[i0].heading, ss[k].heading)) > cfg.turn_onset) {
          start = ss[k - (k > i0 ? 1 : 0)].t;
          break;
        }
      }
    }
    ev.start_t = start ? *start : ev.center_t - cfg.fallback_lead;
    ev.start_t = std::max(ev.start_t, ss.front().t);
    ev.start_t = std::min(ev.start_t, ev.edge_t);
    out.events.push_back(ev);
    prev_center = ev.center_t;
  }

  for (std::size_t i = 0; i < ss.size(); ++i) {
    for (const auto& ev : out.events) {
      if (ss[i].t >= ev.start_t && ss[i].t <= ev.center_t) {
        out.labels[i] = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace pedhat::sim
