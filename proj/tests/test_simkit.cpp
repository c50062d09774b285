#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pedhat/att.hpp"
#include "pedhat/oha.hpp"
#include "pedhat/simkit.hpp"

using namespace pedhat;
using namespace pedhat::sim;

namespace {

AttitudeProfile still_hand() {
  AttitudeProfile p = AttitudeProfile::preset(Placement::hand);
  p.jitter = 0.0;
  return p;
}

roads::RoadNetwork north_south_road() {
  return roads::RoadNetwork({roads::RoadSegment{"ns", {{0, -500}, {0, 500}}, std::nullopt}});
}

double rotation_angle_deg(const geom::RotationMatrix& a, const geom::RotationMatrix& b) {
  return geom::rad2deg(geom::log_map(a.transpose() * b).norm());
}

}  // namespace

TEST(GenPath, SwrStaysPut) {
  PathParams p;
  p.duration = 120.0;
  const auto traj = gen_path(Pattern::SWR, p, 3);
  for (const auto& s : traj.samples) {
    ASSERT_EQ(s.x, 0.0);
    ASSERT_EQ(s.y, 0.0);
  }
  std::set<long> headings;
  for (const auto& s : traj.samples) headings.insert(std::lround(s.heading));
  EXPECT_GT(headings.size(), 10u);
}

TEST(GenPath, SotHeadingsConcentrateOnFourDirections) {
  PathParams p;
  p.duration = 600.0;
  const auto traj = gen_path(Pattern::SOT, p, 4);
  const double h0 = traj.samples.front().heading;
  std::size_t on_axis = 0;
  std::set<int> used;
  for (const auto& s : traj.samples) {
    const double d = geom::wrap360(s.heading - h0);
    const int k = static_cast<int>(std::lround(d / 90.0)) % 4;
    if (std::abs(geom::angle_diff(90.0 * k, d)) < 0.5) {
      ++on_axis;
      used.insert(k);
    }
  }
  EXPECT_GT(static_cast<double>(on_axis) / static_cast<double>(traj.samples.size()), 0.85);
  EXPECT_GE(used.size(), 3u);
}

TEST(GenPath, MspFollowsSinusoid) {
  PathParams p;
  p.duration = 60.0;
  p.msp_amplitude = 60.0;
  p.msp_period = 10.0;
  p.start_heading = 30.0;
  const auto traj = gen_path(Pattern::MSP, p, 5);
  for (const auto& s : traj.samples) {
    const double want = 30.0 + 60.0 * std::sin(2.0 * std::numbers::pi * s.t / 10.0);
    ASSERT_LT(std::abs(geom::angle_diff(want, s.heading)), 1e-9);
  }
}

TEST(GenPath, FixedStepAndSmoothHeading) {
  PathParams p;
  p.duration = 180.0;
  for (auto pat : {Pattern::SOT, Pattern::SWR, Pattern::MSP, Pattern::crossing_course}) {
    const auto traj = gen_path(pat, p, 6);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
      ASSERT_NEAR(traj.samples[i].t - traj.samples[i - 1].t, 0.02, 1e-12);
      ASSERT_LT(std::abs(geom::angle_diff(traj.samples[i - 1].heading, traj.samples[i].heading)), 45.0);
    }
  }
}

TEST(GenPath, UnknownPatternNameThrows) {
  EXPECT_THROW((void)pattern_from_string("zigzag"), UnknownPattern);
  EXPECT_THROW((void)gen_path(Pattern::SOT, PathParams{.duration = 0.0}, 1), InvalidArgument);
}

TEST(SynthAttitude, ZeroSwingMatchesHand) {
  PathParams p;
  p.duration = 30.0;
  const auto traj = gen_path(Pattern::SOT, p, 7);
  AttitudeProfile swing = AttitudeProfile::preset(Placement::swing);
  const AttitudeProfile hand = AttitudeProfile::preset(Placement::hand);
  swing.swing_amplitude = 0.0;
  swing.base_offset = hand.base_offset;
  EXPECT_EQ(synth_attitude(traj, swing, 7), synth_attitude(traj, hand, 7));
}

TEST(SynthAttitude, SwingVisitsManyBinsPerStride) {
  PathParams p;
  p.duration = 20.0;
  const auto traj = gen_path(Pattern::SOT, p, 8);
  const AttitudeProfile prof = AttitudeProfile::preset(Placement::swing);
  const auto att = synth_attitude(traj, prof, 8);
  // One stride is two steps; take one from the middle of the walk.
  const double stride = 2.0 / prof.cadence;
  std::set<geom::BinKey> bins;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double t = traj.samples[i].t;
    if (t >= 5.0 && t < 5.0 + stride) bins.insert(geom::quantize_rp(att[i].roll, att[i].pitch, 2));
  }
  EXPECT_GE(bins.size(), 20u);
}

TEST(SynthAttitude, DeterministicPerSeed) {
  PathParams p;
  p.duration = 30.0;
  const auto traj = gen_path(Pattern::MSP, p, 9);
  const auto prof = AttitudeProfile::preset(Placement::pocket);
  EXPECT_EQ(synth_attitude(traj, prof, 9), synth_attitude(traj, prof, 9));
  EXPECT_NE(synth_attitude(traj, prof, 9), synth_attitude(traj, prof, 10));
}

TEST(SynthImu, StaticNoiselessPhone) {
  PathBuilder b(0.02, 0, 0, 45.0, 0.0);
  b.pause(10.0);
  const auto traj = std::move(b).take();
  const auto att = synth_attitude(traj, still_hand(), 1);
  const auto imu = synth_imu(traj, att, NoiseModel::none());
  for (const auto& s : imu) {
    ASSERT_EQ(s.gyro.norm(), 0.0);
    ASSERT_NEAR(s.accel.norm(), att::kGravity, 1e-12);
  }
}

TEST(SynthImu, MagnetometerAtTenHz) {
  PathParams p;
  p.duration = 10.0;
  const auto traj = gen_path(Pattern::SOT, p, 2);
  const auto imu = synth_imu(traj, synth_attitude(traj, still_hand(), 2), NoiseModel::none());
  std::size_t mags = 0;
  for (const auto& s : imu) mags += s.mag.has_value();
  EXPECT_EQ(mags, (imu.size() + 4) / 5);
}

TEST(SynthImu, GyroReintegrationReproducesAttitude) {
  PathParams p;
  p.duration = 180.0;
  const auto traj = gen_path(Pattern::MSP, p, 11);
  const auto att = synth_attitude(traj, AttitudeProfile::preset(Placement::swing), 11);
  const auto imu = synth_imu(traj, att, NoiseModel::none());
  auto est = att::AttitudeEstimate::from_euler(imu.front().t, att.front());
  double worst = 0.0;
  for (std::size_t i = 1; i < imu.size(); ++i) {
    est = att::integrate_gyro(est, imu[i]);
    worst = std::max(worst, rotation_angle_deg(est.rotation, geom::euler_to_matrix(att[i])));
  }
  EXPECT_LT(worst, 0.1);
}

TEST(SynthImu, VerticalBiasGivesMatchingIgSlope) {
  PathParams p;
  p.duration = 120.0;
  const auto traj = gen_path(Pattern::SOT, p, 12);
  AttitudeProfile flat = still_hand();
  flat.base_offset = {0, 0, 0};
  const auto att = synth_attitude(traj, flat, 12);
  NoiseModel n = NoiseModel::none();
  n.gyro_bias = {0, 0, 0.4};
  const auto imu = synth_imu(traj, att, n);
  std::vector<att::AttitudeEstimate> truth;
  for (std::size_t i = 0; i < imu.size(); ++i) truth.push_back(att::AttitudeEstimate::from_euler(imu[i].t, att[i]));
  const auto ig = att::ig_heading(truth, imu, traj.samples.front().heading);
  double st = 0, se = 0, stt = 0, ste = 0;
  for (std::size_t i = 0; i < ig.size(); ++i) {
    const double e = geom::angle_diff(traj.samples[i].heading, ig[i].heading);
    const double t = ig[i].t;
    st += t, se += e, stt += t * t, ste += t * e;
  }
  const double nn = static_cast<double>(ig.size());
  const double slope = (nn * ste - st * se) / (nn * stt - st * st);
  EXPECT_NEAR(std::abs(slope), 0.4, 0.05 * 0.4);
}

TEST(SynthGps, NoiselessUndelayedFixesOnPath) {
  PathParams p;
  p.duration = 60.0;
  const auto traj = gen_path(Pattern::SOT, p, 13);
  const auto gps = synth_gps(traj, NoiseModel::none());
  EXPECT_EQ(gps.size(), 61u);
  for (const auto& f : gps) {
    const auto& s = traj.samples[static_cast<std::size_t>(std::lround(f.t / 0.02))];
    ASSERT_NEAR(f.x, s.x, 1e-9);
    ASSERT_NEAR(f.y, s.y, 1e-9);
    ASSERT_GT(f.accuracy, 0.0);
  }
}

TEST(SynthGps, BearingLagsTruthByDelay) {
  PathParams p;
  p.duration = 600.0;
  p.leg_min = 6.0;
  p.leg_max = 12.0;
  const auto traj = gen_path(Pattern::SOT, p, 14);
  NoiseModel n = NoiseModel::none();
  n.gps_delay = 2.0;
  const auto bearings = att::gps_bearings(synth_gps(traj, n));
  // Heading agreement as a function of the assumed lag, with linear
  // interpolation of the truth between samples.
  auto heading_at = [&](double t) {
    const double f = t / traj.dt;
    const auto i = static_cast<std::size_t>(std::floor(f));
    const double u = f - static_cast<double>(i);
    const double a = traj.samples[i].heading, b = traj.samples[i + 1].heading;
    return geom::wrap360(a + u * geom::angle_diff(a, b));
  };
  double best_lag = 0.0, best = -2.0;
  for (int k = 0; k <= 50; ++k) {
    const double lag = 0.1 * k;
    double sum = 0.0;
    int cnt = 0;
    for (const auto& b : bearings) {
      if (b.t - lag < 0.0) continue;
      sum += std::cos(geom::deg2rad(geom::angle_diff(heading_at(b.t - lag), b.heading)));
      ++cnt;
    }
    if (sum / cnt > best) best = sum / cnt, best_lag = lag;
  }
  EXPECT_NEAR(best_lag, 2.0, 0.5);
}

TEST(SynthGps, DriftSigmaSetsAccuracyRegime) {
  // Long-run spread of the Gauss-Markov drift matches the configured 7.3 m.
  PathBuilder b(0.02, 0, 0, 0.0, 0.0);
  b.pause(600.0);
  const auto traj = std::move(b).take();
  double sx = 0.0;
  std::size_t cnt = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    NoiseModel n = NoiseModel::none();
    n.gps_drift_sigma = 7.3;
    n.gps_drift_tau = 60.0;
    n.seed = seed;
    for (const auto& f : synth_gps(traj, n)) {
      sx += f.x * f.x + f.y * f.y;
      cnt += 2;
      ASSERT_NEAR(f.accuracy, 7.3, 1e-12);
    }
  }
  EXPECT_NEAR(std::sqrt(sx / static_cast<double>(cnt)), 7.3, 0.5);
}

TEST(LabelCrossings, TurnBeforeEdgeStartsEvent) {
  // Walk north 8 m east of the road, turn to face it, cross.
  PathBuilder b(0.02, 8.0, -20.0, 0.0, 1.4);
  b.walk(10.0, 1.4);
  const double turn_t = b.t();
  b.turn(-90.0, 1.5, 1.4);
  b.walk(12.0, 1.4);
  const auto traj = std::move(b).take();
  const auto res = label_crossings(traj, north_south_road());
  ASSERT_FALSE(res.excluded);
  ASSERT_EQ(res.events.size(), 1u);
  const auto& ev = res.events[0];
  EXPECT_NEAR(ev.start_t, turn_t, 0.3);
  double center = 0.0, edge = 0.0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    if (traj.samples[i - 1].x > 3.5 && traj.samples[i].x <= 3.5) edge = traj.samples[i].t;
    if (traj.samples[i - 1].x > 0.0 && traj.samples[i].x <= 0.0) center = traj.samples[i].t;
  }
  EXPECT_NEAR(ev.edge_t, edge, 0.02);
  EXPECT_NEAR(ev.center_t, center, 0.02);
  EXPECT_LE(ev.start_t, ev.edge_t);
  EXPECT_LE(ev.edge_t, ev.center_t);
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const double t = traj.samples[i].t;
    ASSERT_EQ(res.labels[i], t >= ev.start_t && t <= ev.center_t);
  }
}

TEST(LabelCrossings, StraightCrossingUsesFiveSecondLead) {
  PathBuilder b(0.02, 40.0, 0.0, 270.0, 1.4);
  b.walk(50.0, 1.4);
  const auto res = label_crossings(std::move(b).take(), north_south_road());
  ASSERT_EQ(res.events.size(), 1u);
  EXPECT_NEAR(res.events[0].start_t, res.events[0].center_t - 5.0, 1e-9);
  EXPECT_NEAR(res.events[0].center_t, 40.0 / 1.4, 0.02);
}

TEST(LabelCrossings, QuickReturnExcludesSession) {
  PathBuilder b(0.02, 20.0, 0.0, 270.0, 1.4);
  b.walk(16.0, 1.4);  // just across
  b.turn(180.0, 1.5, 1.4);
  b.walk(20.0, 1.4);  // straight back
  const auto res = label_crossings(std::move(b).take(), north_south_road());
  EXPECT_TRUE(res.excluded);
  EXPECT_FALSE(res.reason.empty());
}

TEST(LabelCrossings, FarFromRoadsThrows) {
  PathBuilder b(0.02, 100.0, 0.0, 0.0, 1.4);
  b.walk(20.0, 1.4);
  EXPECT_THROW((void)label_crossings(std::move(b).take(), north_south_road()), NoRoadNearby);
}

TEST(CrossingCourse, EventsAreOrderedAndDeterministic) {
  PathParams p;
  p.duration = 180.0;
  std::size_t events = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = crossing_course(p, seed);
    const auto res = label_crossings(c.trajectory, c.roads);
    for (const auto& ev : res.events) {
      ASSERT_LE(ev.start_t, ev.edge_t);
      ASSERT_LE(ev.edge_t, ev.center_t);
    }
    events += res.events.size();
    const auto again = crossing_course(p, seed);
    ASSERT_EQ(again.actions, c.actions);
    ASSERT_EQ(again.trajectory.samples.size(), c.trajectory.samples.size());
    for (std::size_t i = 0; i < c.trajectory.samples.size(); ++i) {
      ASSERT_EQ(again.trajectory.samples[i].x, c.trajectory.samples[i].x);
      ASSERT_EQ(again.trajectory.samples[i].heading, c.trajectory.samples[i].heading);
    }
  }
  EXPECT_GT(events, 20u);
}

TEST(EndToEnd, NoiselessChainIsExact) {
  PathParams p;
  p.duration = 180.0;
  const auto traj = gen_path(Pattern::MSP, p, 15);
  // Fixed tilt: every orientation falls in one cell, so quantization adds
  // nothing and the only error source is the chain itself.
  auto prof = AttitudeProfile::preset(Placement::hand);
  prof.jitter = 0.0;
  const auto att = synth_attitude(traj, prof, 15);
  const auto imu = synth_imu(traj, att, NoiseModel::none());
  auto est = att::AttitudeEstimate::from_euler(imu.front().t, att.front());
  // Stale coarse headings would seed new cells one sample late.
  oha::OhaTracker tracker({.init_hold = 0.0});
  std::size_t emitted = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < imu.size(); ++i) {
    if (i > 0) est = att::integrate_gyro(est, imu[i]);
    const oha::OrientationSample o{imu[i].t, est.attitude()};
    if (auto h = tracker.on_orientation(o)) {
      worst = std::max(worst, std::abs(geom::angle_diff(traj.samples[i].heading, h->heading)));
      ++emitted;
    } else {
      // One error-free coarse heading initializes each newly visited cell.
      tracker.on_coarse_heading({imu[i].t, traj.samples[i].heading, oha::HeadingKind::coarse}, o);
    }
  }
  EXPECT_GT(emitted, imu.size() / 2);
  EXPECT_LT(worst, 1e-3);
}
