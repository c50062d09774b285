#include <gtest/gtest.h>

#include <cmath>

#include "pedhat/oha.hpp"
#include "pedhat/rng.hpp"
#include "pedhat/simkit.hpp"

using namespace pedhat;
using namespace pedhat::oha;
using geom::EulerAngles;
using geom::RotationMatrix;

namespace {

OrientationSample orient(double t, double roll, double pitch, double yaw) { return {t, {roll, pitch, yaw}}; }
HeadingSample coarse(double t, double h) { return {t, h, HeadingKind::coarse}; }

// Heading implied by a fixed phone-to-body rotation when the phone attitude
// is e. The body frame's rotation to GCS is Rz(-heading), so the relative
// rotation is Rz(heading) * R(e) and Rz(heading) = relative * R(e)^T.
double heading_from_relative(const RotationMatrix& relative, const EulerAngles& e) {
  const RotationMatrix rz = relative * geom::euler_to_matrix(e).transpose();
  return geom::wrap360(geom::rad2deg(std::atan2(rz(1, 0), rz(0, 0))));
}

}  // namespace

TEST(OnOrientation, AbsentBinEmitsNothing) {
  OhaTracker t;
  EXPECT_FALSE(t.on_orientation(orient(0.0, 10, 5, 30)).has_value());
  EXPECT_EQ(t.size(), 0u);
}

TEST(OnOrientation, HeadingIsCellMinusYaw) {
  OhaTracker t;
  t.on_orientation(orient(0.0, 10.5, 4.5, 30));
  t.on_coarse_heading(coarse(0.5, 90.0));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_NEAR(t.bins().begin()->second.c, 120.0, 1e-12);
  const auto h = t.on_orientation(orient(1.0, 11.0, 5.0, 40));
  ASSERT_TRUE(h);
  EXPECT_EQ(h->kind, HeadingKind::precise);
  EXPECT_NEAR(h->heading, 80.0, 1e-12);

  // Same answer from the full rotation algebra.
  const EulerAngles e0{10.5, 4.5, 30}, e1{10.5, 4.5, 40};
  const RotationMatrix relative = RotationMatrix::rot_z(90.0) * geom::euler_to_matrix(e0);
  EXPECT_NEAR(heading_from_relative(relative, e1), 80.0, 1e-9);
}

TEST(OnOrientation, CellMinusYawMatchesMatrixAlgebra) {
  Rng rng(31);
  for (int i = 0; i < 2000; ++i) {
    OhaTracker t;
    const double roll = rng.uniform(-179, 179), pitch = rng.uniform(-80, 80);
    const double y0 = rng.uniform(-179, 179), y1 = rng.uniform(-179, 179), h0 = rng.uniform(0, 360);
    t.on_orientation(orient(0.0, roll, pitch, y0));
    t.on_coarse_heading(coarse(0.1, h0));
    const auto h = t.on_orientation(orient(0.2, roll, pitch, y1));
    ASSERT_TRUE(h);
    const RotationMatrix relative = RotationMatrix::rot_z(h0) * geom::euler_to_matrix({roll, pitch, y0});
    ASSERT_LT(std::abs(geom::angle_diff(heading_from_relative(relative, {roll, pitch, y1}), h->heading)), 1e-9);
  }
}

TEST(OnOrientation, RejectsNonMonotonicTime) {
  OhaTracker t;
  t.on_orientation(orient(1.0, 0, 0, 0));
  EXPECT_THROW(t.on_orientation(orient(1.0, 0, 0, 0)), NonMonotonicTime);
  EXPECT_THROW(t.on_orientation(orient(0.5, 0, 0, 0)), NonMonotonicTime);
}

TEST(OnCoarseHeading, InitializesEmptyCell) {
  OhaTracker t;
  const auto m = t.on_coarse_heading(coarse(1.0, 90.0), orient(1.0, 0, 0, 30));
  ASSERT_TRUE(m);
  EXPECT_EQ(m->kind, HeadingKind::merged);
  EXPECT_NEAR(m->heading, 90.0, 1e-12);
  EXPECT_NEAR(t.bins().at({0, 0}).c, 120.0, 1e-12);
}

TEST(OnCoarseHeading, BlendsTowardCoarse) {
  OhaTracker t;
  t.on_coarse_heading(coarse(1.0, 90.0), orient(1.0, 0, 0, 30));
  const auto m = t.on_coarse_heading(coarse(2.0, 100.0), orient(2.0, 0, 0, 30));
  ASSERT_TRUE(m);
  // predicted 90, merged = 90 + 0.02 * 10
  EXPECT_NEAR(m->heading, 90.0 + 0.02 * (100.0 - 90.0), 1e-12);
  EXPECT_NEAR(t.bins().at({0, 0}).c, 120.2, 1e-12);
  EXPECT_EQ(t.bins().at({0, 0}).updates, 2u);
}

TEST(OnCoarseHeading, AgreeingCoarseIsFixedPoint) {
  OhaTracker t;
  t.on_coarse_heading(coarse(1.0, 90.0), orient(1.0, 0, 0, 30));
  const auto m = t.on_coarse_heading(coarse(2.0, 80.0), orient(2.0, 0, 0, 40));
  ASSERT_TRUE(m);
  EXPECT_NEAR(m->heading, 80.0, 1e-12);
  EXPECT_NEAR(t.bins().at({0, 0}).c, 120.0, 1e-12);
}

TEST(OnCoarseHeading, MergedLiesOnShortArc) {
  Rng rng(32);
  for (int i = 0; i < 5000; ++i) {
    OhaConfig cfg;
    cfg.alpha = rng.uniform();
    OhaTracker t(cfg);
    const double yaw = rng.uniform(-179, 179);
    t.on_coarse_heading(coarse(1.0, rng.uniform(0, 360)), orient(1.0, 0, 0, yaw));
    const double predicted = geom::wrap360(t.bins().at({0, 0}).c - yaw);
    const double c = rng.uniform(0, 360);
    const auto m = t.on_coarse_heading(coarse(2.0, c), orient(2.0, 0, 0, yaw));
    const double full = geom::angle_diff(predicted, c);
    const double part = geom::angle_diff(predicted, m->heading);
    ASSERT_LE(std::abs(part), std::abs(full) + 1e-9);
    if (std::abs(part) > 1e-9) ASSERT_GT(part * full, 0.0);
  }
}

TEST(OnCoarseHeading, UsesLatestOrientation) {
  OhaTracker t;
  EXPECT_FALSE(t.on_coarse_heading(coarse(0.5, 10.0)).has_value());
  t.on_orientation(orient(1.0, 20, 20, 5));
  t.on_coarse_heading(coarse(1.5, 10.0));
  EXPECT_NEAR(t.bins().at({20, 20}).c, 15.0, 1e-12);
}

TEST(OnCoarseHeading, TrustGateDropsJumps) {
  OhaConfig cfg;
  cfg.coarse_trust_gate = 30.0;
  OhaTracker t(cfg);
  t.on_coarse_heading(coarse(1.0, 90.0), orient(1.0, 0, 0, 0));
  EXPECT_FALSE(t.on_coarse_heading(coarse(2.0, 180.0), orient(2.0, 0, 0, 0)).has_value());
  EXPECT_NEAR(t.bins().at({0, 0}).c, 90.0, 1e-12);
  EXPECT_TRUE(t.on_coarse_heading(coarse(3.0, 190.0), orient(3.0, 0, 0, 0)).has_value());
}

TEST(Initialization, RecentCoarseSeedsNewCell) {
  OhaTracker t;
  t.on_orientation(orient(0.0, 0, 0, 10));
  t.on_coarse_heading(coarse(0.1, 50.0));
  // New cell 0.8 s later: within init_hold, so it is initialized but silent.
  EXPECT_FALSE(t.on_orientation(orient(0.9, 30, 0, 20)).has_value());
  ASSERT_EQ(t.size(), 2u);
  EXPECT_NEAR(t.bins().at({30, 0}).c, 70.0, 1e-12);
  // Another new cell after the hold expired stays absent.
  t.on_orientation(orient(1.5, 60, 0, 20));
  EXPECT_EQ(t.size(), 2u);
}

TEST(Initialization, FromPreciseWhenEnabled) {
  OhaConfig cfg;
  cfg.init_from_precise = true;
  OhaTracker t(cfg);
  t.on_orientation(orient(0.0, 0, 0, 10));
  t.on_coarse_heading(coarse(0.1, 50.0));
  t.on_coarse_heading(coarse(0.2, 70.0));  // pulls the cell slightly
  const auto p = t.on_orientation(orient(0.3, 0, 0, 10));
  ASSERT_TRUE(p);
  // The new cell takes the precise heading, not the latest coarse one.
  t.on_orientation(orient(0.4, 30, 0, 20));
  EXPECT_NEAR(t.bins().at({30, 0}).c, geom::wrap360(p->heading + 20.0), 1e-12);
  EXPECT_GT(std::abs(t.bins().at({30, 0}).c - 90.0), 1e-3);
}

TEST(Reset, ClearsTableKeepsConfig) {
  OhaConfig cfg;
  cfg.alpha = 0.1;
  OhaTracker t(cfg);
  for (int k = 0; k < 10; ++k) t.on_coarse_heading(coarse(k, 10.0 * k), orient(k, 4.0 * k, 0, 0));
  EXPECT_EQ(t.size(), 10u);
  t.reset();
  EXPECT_EQ(t.size(), 0u);
  EXPECT_DOUBLE_EQ(t.config().alpha, 0.1);
  EXPECT_FALSE(t.on_orientation(orient(0.0, 0, 0, 0)).has_value());
  t.on_coarse_heading(coarse(0.5, 45.0));
  EXPECT_EQ(t.size(), 1u);
}

TEST(Table, JsonRoundTrip) {
  OhaTracker t;
  Rng rng(33);
  for (int k = 0; k < 50; ++k)
    t.on_coarse_heading(coarse(k, rng.uniform(0, 360)), orient(k, rng.uniform(-90, 90), rng.uniform(-45, 45), 0));
  const auto back = OhaTracker::from_json(t.to_json());
  EXPECT_EQ(back.to_json(), t.to_json());
}

TEST(Table, SizeNeverExceedsCapacity) {
  OhaTracker t;
  Rng rng(34);
  for (int k = 0; k < 200000; ++k) {
    t.on_coarse_heading(coarse(k, 0.0),
                        orient(k, 180.0 - rng.uniform(0, 360), rng.uniform(-90, 90), 0.0));
  }
  EXPECT_LE(static_cast<long>(t.size()), geom::bin_capacity(2));
}

TEST(Exactness, NoiselessSwingHeadingsMatchTruth) {
  sim::PathParams p;
  p.duration = 60.0;
  const auto traj = sim::gen_path(sim::Pattern::MSP, p, 5);
  const auto att = sim::synth_attitude(traj, sim::AttitudeProfile::preset(sim::Placement::swing), 5);
  // Learn every visited cell from the true heading, then replay.
  OhaTracker learn;
  for (std::size_t i = 0; i < traj.samples.size(); ++i)
    learn.on_coarse_heading(coarse(traj.samples[i].t, traj.samples[i].heading), {traj.samples[i].t, att[i]});
  auto replay = OhaTracker::from_json(learn.to_json());
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < traj.samples.size(); ++i) {
    const auto h = replay.on_orientation({traj.samples[i].t, att[i]});
    ASSERT_TRUE(h);
    ASSERT_LT(std::abs(geom::angle_diff(traj.samples[i].heading, h->heading)), 1e-6);
    ++emitted;
  }
  EXPECT_EQ(emitted, traj.samples.size());
}

TEST(DriftResistance, BiasedCoarseGivesBoundedError) {
  // Unbiased orientation, coarse headings off by a constant 5 degrees.
  OhaTracker t;
  const double beta = 5.0;
  double late_err = 0.0, mid_err = 0.0;
  int late_n = 0, mid_n = 0;
  for (int k = 0; k < 50 * 600; ++k) {
    const double time = k * 0.02;
    const double heading = geom::wrap360(30.0 * std::sin(time / 10.0));
    const double yaw = geom::wrap180(-heading + 15.0);
    const auto h = t.on_orientation(orient(time, 20, 10, yaw));
    if (k % 50 == 0) t.on_coarse_heading(coarse(time + 0.001, heading + beta));
    if (!h) continue;
    const double e = std::abs(geom::angle_diff(heading, h->heading));
    if (time > 300 && time <= 360) mid_err += e, ++mid_n;
    if (time > 540) late_err += e, ++late_n;
  }
  ASSERT_GT(mid_n, 0);
  ASSERT_GT(late_n, 0);
  EXPECT_NEAR(late_err / late_n, beta, 1e-3);
  EXPECT_LE(late_err / late_n, mid_err / mid_n + 1e-6);
}
