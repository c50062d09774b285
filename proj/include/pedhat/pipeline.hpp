#pragma once

// End-to-end session processing shared by the CLI and the acceptance suite:
// simulate a session, track headings (OHA / IG / GPS bearing), build feature
// windows with labels, and run the predictor with alert gating.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pedhat/att.hpp"
#include "pedhat/crossnet.hpp"
#include "pedhat/evalkit.hpp"
#include "pedhat/geom.hpp"
#include "pedhat/oha.hpp"
#include "pedhat/roads.hpp"
#include "pedhat/simkit.hpp"

namespace pedhat::pipeline {

struct ScenarioSpec {
  std::string name = "session";
  bool crossing = false;
  std::vector<sim::SessionPart> parts{{sim::Pattern::SOT, 180.0}};
  sim::AttitudeProfile profile = sim::AttitudeProfile::preset(sim::Placement::hand);
  sim::PathParams path;
  sim::NoiseModel noise = sim::NoiseModel::typical();
  sim::SensorConfig sensors;
  sim::LabelConfig labels;
  std::uint64_t seed = 1;
  double score_from = 0.0;  // heading errors count from here on (after any warm-up walk)
};

struct Session {
  std::string name;
  double score_from = 0.0;
  sim::Trajectory traj;
  std::vector<geom::EulerAngles> attitude;  // true phone attitude per sample
  std::vector<att::ImuSample> imu;
  std::vector<att::GpsFix> gps;
  std::optional<roads::RoadNetwork> roads;
  std::optional<sim::LabelResult> labels;
};

[[nodiscard]] inline Session simulate(const ScenarioSpec& spec) {
  Session s;
  s.name = spec.name;
  s.score_from = spec.score_from;
  if (spec.crossing) {
    sim::PathParams p = spec.path;
    p.course.road_half_width = spec.labels.road_half_width;
    auto course = sim::crossing_course(p, spec.seed);
    s.traj = std::move(course.trajectory);
    s.roads = std::move(course.roads);
  } else {
    s.traj = sim::gen_session(spec.parts, spec.path, spec.seed);
  }
  s.attitude = sim::synth_attitude(s.traj, spec.profile, spec.seed);
  sim::NoiseModel noise = spec.noise;
  noise.seed = spec.seed;
  s.imu = sim::synth_imu(s.traj, s.attitude, noise, spec.sensors);
  s.gps = sim::synth_gps(s.traj, noise, spec.sensors);
  if (s.roads) s.labels = sim::label_crossings(s.traj, *s.roads, spec.labels);
  return s;
}

// ---------------------------------------------------------------------------
// Heading tracking

enum class AttitudeSource { estimated, truth };

[[nodiscard]] inline AttitudeSource attitude_source_from_string(const std::string& s) {
  if (s == "estimated") return AttitudeSource::estimated;
  if (s == "truth") return AttitudeSource::truth;
  throw InvalidArgument("unknown attitude source '" + s + "'");
}

// Filter output per IMU sample; empty until the filter has aligned.
[[nodiscard]] inline std::vector<std::optional<att::AttitudeEstimate>> estimate_attitude(
    std::span<const att::ImuSample> imu, const att::AttitudeFilterConfig& cfg = {}) {
  att::AttitudeFilter filter(cfg);
  std::vector<std::optional<att::AttitudeEstimate>> out;
  out.reserve(imu.size());
  for (const auto& s : imu) out.push_back(filter.step(s));
  return out;
}

[[nodiscard]] inline std::vector<oha::OrientationSample> orientations(
    std::span<const std::optional<att::AttitudeEstimate>> est) {
  std::vector<oha::OrientationSample> out;
  out.reserve(est.size());
  for (const auto& e : est) {
    if (e) out.push_back({e->t, e->attitude()});
  }
  return out;
}

[[nodiscard]] inline std::vector<oha::OrientationSample> orientations(std::span<const att::ImuSample> imu,
                                                                      std::span<const geom::EulerAngles> truth) {
  if (imu.size() != truth.size()) throw ShapeMismatch("truth attitude and IMU streams differ in length");
  std::vector<oha::OrientationSample> out;
  out.reserve(imu.size());
  for (std::size_t i = 0; i < imu.size(); ++i) out.push_back({imu[i].t, truth[i]});
  return out;
}

struct TrackConfig {
  oha::OhaConfig oha;
  att::AttitudeFilterConfig filter;
  att::GpsBearingConfig bearing;
  AttitudeSource source = AttitudeSource::estimated;
  bool emit_merged = false;
};

// OHA over an orientation stream, fed with GPS bearings as they arrive. A
// bearing becomes available at the time of its second fix.
[[nodiscard]] inline std::vector<oha::HeadingSample> track_oha(std::span<const oha::OrientationSample> orient,
                                                               std::span<const att::GpsFix> gps,
                                                               const TrackConfig& cfg,
                                                               oha::OhaTracker* tracker_out = nullptr) {
  oha::OhaTracker tracker(cfg.oha);
  std::vector<oha::HeadingSample> out;
  out.reserve(orient.size());
  std::size_t j = 0;
  for (const auto& o : orient) {
    if (auto h = tracker.on_orientation(o)) out.push_back(*h);
    for (; j < gps.size() && gps[j].t <= o.t; ++j) {
      if (j == 0) continue;
      if (auto c = att::gps_bearing(gps[j - 1], gps[j], cfg.bearing)) {
        auto m = tracker.on_coarse_heading(*c, o);
        if (m && cfg.emit_merged) out.push_back(*m);
      }
    }
  }
  if (tracker_out) *tracker_out = std::move(tracker);
  return out;
}

// IG from the filter attitudes, starting at a known heading.
[[nodiscard]] inline std::vector<oha::HeadingSample> track_ig(
    std::span<const att::ImuSample> imu, std::span<const std::optional<att::AttitudeEstimate>> est,
    double initial_heading, std::optional<double> start_t = std::nullopt) {
  std::vector<oha::HeadingSample> out;
  std::optional<att::IgTracker> ig;
  const att::AttitudeEstimate* prev = nullptr;
  for (std::size_t i = 0; i < imu.size(); ++i) {
    if (!est[i]) continue;
    if (start_t && imu[i].t < *start_t - 1e-9) {
      prev = &*est[i];
      continue;
    }
    if (!ig) ig.emplace(initial_heading);
    out.push_back(ig->step(prev ? prev->rotation : est[i]->rotation, imu[i]));
    prev = &*est[i];
  }
  return out;
}

[[nodiscard]] inline std::vector<oha::HeadingSample> track_gps(std::span<const att::GpsFix> gps,
                                                               const att::GpsBearingConfig& cfg = {}) {
  return att::gps_bearings(gps, cfg);
}

// ---------------------------------------------------------------------------
// Crossing features

enum class HeadingSource { oha, gps, none };

[[nodiscard]] inline HeadingSource heading_source_from_string(const std::string& s) {
  if (s == "oha") return HeadingSource::oha;
  if (s == "gps") return HeadingSource::gps;
  if (s == "none") return HeadingSource::none;
  throw InvalidArgument("unknown heading source '" + s + "'");
}

[[nodiscard]] inline std::string to_string(HeadingSource h) {
  switch (h) {
    case HeadingSource::oha: return "oha";
    case HeadingSource::gps: return "gps";
    case HeadingSource::none: return "none";
  }
  return "oha";
}

struct SessionWindows {
  std::vector<net::FeatureWindow> windows;
  std::vector<bool> labels;
  std::vector<net::Mode> modes;  // running mode at each window end
  std::vector<sim::CrossingEvent> events;
  bool excluded = false;
};

// Road queries at every GPS fix (the active-mode cadence).
[[nodiscard]] inline std::vector<roads::RoadSample> road_samples(const roads::RoadNetwork& net,
                                                                 std::span<const att::GpsFix> gps) {
  std::vector<roads::TimedPoint> pts;
  pts.reserve(gps.size());
  for (const auto& f : gps) pts.push_back({f.t, {f.x, f.y}});
  return roads::sample_along(net, pts, 1.0);
}

// Mode after each road sample, with speed from consecutive fixes.
[[nodiscard]] inline std::vector<net::Mode> mode_track(std::span<const roads::RoadSample> rs,
                                                       std::span<const att::GpsFix> gps,
                                                       const net::ModeConfig& cfg = {}) {
  std::vector<net::Mode> out;
  out.reserve(rs.size());
  net::ModeState st;
  st.last_move_t = gps.empty() ? 0.0 : gps.front().t;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    double speed = 0.0;
    if (i > 0 && i < gps.size()) {
      const double dt = gps[i].t - gps[i - 1].t;
      if (dt > 0.0) speed = std::hypot(gps[i].x - gps[i - 1].x, gps[i].y - gps[i - 1].y) / dt;
    }
    st = net::mode_controller(st, rs[i].result.d, speed, rs[i].t, cfg);
    out.push_back(st.mode);
  }
  return out;
}

[[nodiscard]] inline bool label_at(std::span<const sim::CrossingEvent> events, double t) {
  for (const auto& e : events) {
    if (t >= e.start_t && t <= e.center_t) return true;
  }
  return false;
}

[[nodiscard]] inline SessionWindows session_windows(const Session& s, std::span<const oha::HeadingSample> headings,
                                                    const net::ModelConfig& cfg, HeadingSource source) {
  if (!s.roads) throw InvalidArgument("session '" + s.name + "' has no road network");
  SessionWindows out;
  const auto rs = road_samples(*s.roads, s.gps);
  const auto obs = net::road_observations(rs);
  const auto modes = mode_track(rs, s.gps);
  const double t0 = s.imu.empty() ? 0.0 : s.imu.front().t;
  const double t1 = s.imu.empty() ? 0.0 : s.imu.back().t;
  out.windows = net::extract_features(headings, obs, cfg, t0, t1, source != HeadingSource::none);
  if (s.labels) {
    out.events = s.labels->events;
    out.excluded = s.labels->excluded;
  }
  std::size_t r = 0;
  for (const auto& w : out.windows) {
    out.labels.push_back(label_at(out.events, w.t_end));
    while (r < rs.size() && rs[r].t <= w.t_end + 1e-9) ++r;
    out.modes.push_back(r == 0 ? net::Mode::idle : modes[r - 1]);
  }
  return out;
}

// Heading stream feeding the heading feature for a given source.
[[nodiscard]] inline std::vector<oha::HeadingSample> feature_headings(const Session& s, HeadingSource source,
                                                                      const TrackConfig& cfg) {
  switch (source) {
    case HeadingSource::oha: {
      const auto orient = cfg.source == AttitudeSource::truth
                              ? orientations(s.imu, s.attitude)
                              : orientations(estimate_attitude(s.imu, cfg.filter));
      return track_oha(orient, s.gps, cfg);
    }
    case HeadingSource::gps: {
      // Bearings enter the stream when their second fix arrives.
      std::vector<oha::HeadingSample> out;
      for (std::size_t j = 1; j < s.gps.size(); ++j) {
        if (auto h = att::gps_bearing(s.gps[j - 1], s.gps[j], cfg.bearing)) {
          h->t = s.gps[j].t;
          out.push_back(*h);
        }
      }
      return out;
    }
    case HeadingSource::none: return {};
  }
  return {};
}

struct Prediction {
  std::vector<double> t;
  std::vector<double> prob;
  std::vector<bool> pred;
};

// Runs the model on every window; idle-mode windows are not evaluated and
// count as negative predictions when gating is on.
[[nodiscard]] inline Prediction predict(const net::ModelWeights& w, const SessionWindows& sw, bool gate_idle = true,
                                        double prob_threshold = 0.5) {
  Prediction p;
  for (std::size_t i = 0; i < sw.windows.size(); ++i) {
    p.t.push_back(sw.windows[i].t_end);
    const bool idle = gate_idle && sw.modes[i] == net::Mode::idle;
    const double pr = idle ? 0.0 : net::forward(w, sw.windows[i]);
    p.prob.push_back(pr);
    p.pred.push_back(pr > prob_threshold);
  }
  return p;
}

// Training examples from session windows, every `stride`-th window.
inline void append_examples(const SessionWindows& sw, std::size_t stride, std::vector<net::Example>& out) {
  if (stride == 0) stride = 1;
  for (std::size_t i = 0; i < sw.windows.size(); i += stride) out.push_back({sw.windows[i], sw.labels[i]});
}

}  // namespace pedhat::pipeline
