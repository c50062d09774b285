#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>

#include "pedhat/rng.hpp"
#include "pedhat/roads.hpp"

using namespace pedhat;
using namespace pedhat::roads;

namespace {

RoadNetwork ns_road() { return RoadNetwork({RoadSegment{"ns", {{0, -100}, {0, 100}}, std::nullopt}}); }

// Planar point-to-segment distance, written independently of the library.
double seg_dist(Point a, Point b, Point p, Point& closest) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  double u = ((p.x - a.x) * vx + (p.y - a.y) * vy) / (vx * vx + vy * vy);
  u = std::max(0.0, std::min(1.0, u));
  closest = {a.x + u * vx, a.y + u * vy};
  return std::hypot(p.x - closest.x, p.y - closest.y);
}

RoadNetwork random_network(Rng& rng, int roads) {
  std::vector<RoadSegment> segs;
  for (int r = 0; r < roads; ++r) {
    RoadSegment s{"r" + std::to_string(r), {}, std::nullopt};
    Point p{rng.uniform(-400, 400), rng.uniform(-400, 400)};
    s.polyline.push_back(p);
    const int n = rng.uniform_int(1, 6);
    for (int k = 0; k < n; ++k) {
      p = {p.x + rng.uniform(-120, 120), p.y + rng.uniform(-120, 120)};
      s.polyline.push_back(p);
    }
    segs.push_back(std::move(s));
  }
  return RoadNetwork(std::move(segs));
}

const char* kTwoRoads = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature", "id": "a", "properties": {"name": "First"},
     "geometry": {"type": "LineString", "coordinates": [[0, 0], [10, 0]]}},
    {"type": "Feature", "properties": {"id": "b"},
     "geometry": {"type": "LineString", "coordinates": [[0, 5], [0, 50], [20, 60]]}}
  ]
})";

}  // namespace

TEST(Geojson, SingleLineStringGivesOneSegment) {
  const auto r = parse_geojson(R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[3,4]]}}]})");
  ASSERT_EQ(r.network.segments().size(), 1u);
  EXPECT_EQ(r.network.segments()[0].polyline.size(), 2u);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(Geojson, ReadsIdsAndNames) {
  const auto r = parse_geojson(kTwoRoads);
  ASSERT_EQ(r.network.segments().size(), 2u);
  EXPECT_EQ(r.network.segments()[0].id, "a");
  EXPECT_EQ(r.network.segments()[0].name, std::optional<std::string>("First"));
  EXPECT_EQ(r.network.segments()[1].id, "b");
}

TEST(Geojson, SinglePointFeatureNamesFeature) {
  const std::string text = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,0]]}},
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[5,5]]}}]})";
  try {
    (void)parse_geojson(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("feature 1"), std::string::npos) << e.what();
  }
}

TEST(Geojson, LenientModeSkipsBadFeatures) {
  const std::string text = R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,0],[1,0]]}},
    {"type":"Feature","geometry":{"type":"Point","coordinates":[1,1]}},
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,1],[1,1]]}},
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[0,2],[1,2],[2,3]]}}]})";
  const auto r = parse_geojson(text, ParseMode::lenient);
  EXPECT_EQ(r.network.segments().size(), 3u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("feature 1"), std::string::npos);
  EXPECT_THROW((void)parse_geojson(text, ParseMode::strict), ParseError);
}

TEST(Geojson, SyntaxErrorReportsLine) {
  try {
    (void)parse_geojson("{\n\"type\": \"FeatureCollection\",\n\"features\": [,]\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Geojson, EmptyCollectionIsEmptyNetwork) {
  EXPECT_THROW((void)parse_geojson(R"({"type":"FeatureCollection","features":[]})"), EmptyNetwork);
  EXPECT_THROW((void)parse_geojson(R"({"type":"FeatureCollection","features":[
    {"type":"Feature","geometry":{"type":"Point","coordinates":[1,1]}}]})",
                                   ParseMode::lenient),
               EmptyNetwork);
}

TEST(Geojson, LonLatWithLocalOrigin) {
  const auto r = parse_geojson(R"({"type":"FeatureCollection","local_origin":[10.0,50.0],"features":[
    {"type":"Feature","geometry":{"type":"LineString","coordinates":[[10.0,50.0],[10.0,50.001]]}}]})");
  const auto& pl = r.network.segments()[0].polyline;
  EXPECT_NEAR(pl[0].x, 0.0, 1e-9);
  EXPECT_NEAR(pl[0].y, 0.0, 1e-9);
  EXPECT_NEAR(pl[1].x, 0.0, 1e-9);
  EXPECT_NEAR(pl[1].y, 111.2, 0.1);  // 0.001 degree of latitude
}

TEST(Geojson, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "pedhat_roads_test.geojson";
  const auto net = parse_geojson(kTwoRoads).network;
  std::ofstream(path) << to_geojson(net).dump(2);
  const auto back = load_geojson(path.string()).network;
  ASSERT_EQ(back.segments().size(), net.segments().size());
  for (std::size_t i = 0; i < net.segments().size(); ++i) {
    EXPECT_EQ(back.segments()[i].id, net.segments()[i].id);
    EXPECT_EQ(back.segments()[i].polyline, net.segments()[i].polyline);
  }
  std::filesystem::remove(path);
  EXPECT_THROW((void)load_geojson("/nonexistent/roads.geojson"), ParseError);
}

TEST(NearestRoad, EastOfNorthSouthRoad) {
  const auto r = nearest_road(ns_road(), {5, 0});
  EXPECT_EQ(r.road_id, "ns");
  EXPECT_NEAR(r.d, 5.0, 1e-12);
  EXPECT_NEAR(r.theta_ref, 270.0, 1e-9);
  EXPECT_NEAR(r.closest.x, 0.0, 1e-12);
  EXPECT_NEAR(r.closest.y, 0.0, 1e-12);
}

TEST(NearestRoad, OnCenterlineUsesPlusNinety) {
  const auto r = nearest_road(ns_road(), {0, 30});
  EXPECT_NEAR(r.d, 0.0, 1e-12);
  EXPECT_NEAR(r.theta_ref, 90.0, 1e-9);
  // Diagonal road heading north-east.
  const RoadNetwork diag({RoadSegment{"d", {{0, 0}, {100, 100}}, std::nullopt}});
  EXPECT_NEAR(nearest_road(diag, {50, 50}).theta_ref, 135.0, 1e-9);
}

TEST(NearestRoad, BeyondEndpointClampsToEndpoint) {
  const auto r = nearest_road(ns_road(), {3, 104});
  EXPECT_NEAR(r.closest.x, 0.0, 1e-12);
  EXPECT_NEAR(r.closest.y, 100.0, 1e-12);
  EXPECT_NEAR(r.d, 5.0, 1e-12);
}

TEST(NearestRoad, ReferenceAnglePerpendicularToRoad) {
  Rng rng(41);
  const auto net = random_network(rng, 8);
  for (int i = 0; i < 1000; ++i) {
    const Point p{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const auto r = net.nearest(p);
    const auto& pl = net.segments()[r.segment].polyline;
    const Point a = pl[r.piece], b = pl[r.piece + 1];
    // Skip queries whose closest point is a vertex, where no single direction applies.
    if (std::hypot(r.closest.x - a.x, r.closest.y - a.y) < 1e-6 || std::hypot(r.closest.x - b.x, r.closest.y - b.y) < 1e-6)
      continue;
    const double dir = bearing(b.x - a.x, b.y - a.y);
    const double off = std::abs(geom::angle_diff(dir, r.theta_ref));
    ASSERT_NEAR(off, 90.0, 1e-6);
    // It faces the road.
    const double toward = bearing(r.closest.x - p.x, r.closest.y - p.y);
    if (r.d > 1e-9) ASSERT_LT(std::abs(geom::angle_diff(toward, r.theta_ref)), 1e-6);
  }
}

TEST(NearestRoad, IndexMatchesBruteForce) {
  Rng rng(42);
  for (int trial = 0; trial < 5; ++trial) {
    const auto net = random_network(rng, 20);
    for (int i = 0; i < 1000; ++i) {
      const Point p{rng.uniform(-700, 700), rng.uniform(-700, 700)};
      const auto fast = net.nearest(p);
      const auto slow = net.nearest_brute_force(p);
      // Independent scan of every polyline edge.
      double best = 1e300;
      for (const auto& s : net.segments())
        for (std::size_t k = 0; k + 1 < s.polyline.size(); ++k) {
          Point c;
          best = std::min(best, seg_dist(s.polyline[k], s.polyline[k + 1], p, c));
        }
      ASSERT_NEAR(fast.d, best, 1e-9);
      ASSERT_NEAR(slow.d, best, 1e-9);
      ASSERT_EQ(fast.road_id, slow.road_id);
    }
  }
}

TEST(NearestRoad, DistanceContinuousAlongPath) {
  Rng rng(43);
  const auto net = random_network(rng, 6);
  Point p{-300, -300};
  double prev = net.nearest(p).d;
  for (int k = 0; k < 20000; ++k) {
    p = {p.x + 0.03, p.y + 0.03};
    const double d = net.nearest(p).d;
    // Distance is 1-Lipschitz in the query point.
    ASSERT_LE(std::abs(d - prev), std::hypot(0.03, 0.03) + 1e-9);
    prev = d;
  }
}

TEST(NearestRoad, CandidatesAreSuperset) {
  Rng rng(44);
  const auto net = random_network(rng, 15);
  for (int i = 0; i < 500; ++i) {
    const Point p{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const double radius = rng.uniform(1, 200);
    const auto cand = net.candidates(p, radius);
    for (std::size_t s = 0; s < net.segments().size(); ++s) {
      const auto& pl = net.segments()[s].polyline;
      for (std::size_t k = 0; k + 1 < pl.size(); ++k) {
        Point c;
        if (seg_dist(pl[k], pl[k + 1], p, c) > radius) continue;
        ASSERT_NE(std::find(cand.begin(), cand.end(), std::pair{s, k}), cand.end());
      }
    }
  }
}

TEST(SampleAlong, CadenceCounts) {
  const auto net = ns_road();
  std::vector<TimedPoint> pts;
  for (int k = 0; k < 500; ++k) pts.push_back({k * 0.02, {5.0, k * 0.028}});
  EXPECT_EQ(sample_along(net, pts, 1.0).size(), 10u);
  const auto idle = sample_along(net, pts, 0.5);
  ASSERT_EQ(idle.size(), 5u);
  for (std::size_t i = 0; i < idle.size(); ++i) EXPECT_NEAR(idle[i].t, 2.0 * static_cast<double>(i), 1e-9);
  EXPECT_THROW((void)sample_along(net, pts, 0.0), InvalidArgument);
}

TEST(SampleAlong, FarPositionsAreIdleEligible) {
  const auto net = ns_road();
  std::vector<TimedPoint> pts;
  for (int k = 0; k < 20; ++k) pts.push_back({static_cast<double>(k), {k < 10 ? 5.0 : 15.0, 0.0}});
  const auto rs = sample_along(net, pts, 1.0);
  ASSERT_EQ(rs.size(), 20u);
  for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_EQ(rs[i].idle_eligible, i >= 10);
}

TEST(RoadNetwork, RejectsDegeneratePolylines) {
  EXPECT_THROW(RoadNetwork({RoadSegment{"x", {{0, 0}}, std::nullopt}}), ParseError);
  EXPECT_THROW(RoadNetwork({RoadSegment{"x", {{0, 0}, {0, 0}}, std::nullopt}}), ParseError);
}
