#pragma once

// Road centerline geometry: polyline roads in a local east/north frame,
// nearest-road queries through a flat grid index, and a GeoJSON subset loader.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pedhat/errors.hpp"
#include "pedhat/geom.hpp"

namespace pedhat::roads {

struct Point {
  double x = 0.0;  // east, m
  double y = 0.0;  // north, m

  constexpr bool operator==(const Point&) const = default;
};

struct RoadSegment {
  std::string id;
  std::vector<Point> polyline;
  std::optional<std::string> name;
};

struct RoadQueryResult {
  std::string road_id;
  double d = 0.0;          // distance to the centerline, m
  double theta_ref = 0.0;  // bearing that faces the road, [0, 360)
  Point closest;
  // Positive when the query lies right of the polyline direction.
  double signed_d = 0.0;
  std::size_t segment = 0;  // index into RoadNetwork::segments()
  std::size_t piece = 0;    // index of the polyline edge
};

// Compass bearing of the vector (dx, dy).
[[nodiscard]] inline double bearing(double dx, double dy) {
  return geom::wrap360(geom::rad2deg(std::atan2(dx, dy)));
}

namespace detail {

struct PieceHit {
  double d2 = std::numeric_limits<double>::infinity();
  Point closest;
  double cross = 0.0;
};

[[nodiscard]] inline PieceHit project(const Point& a, const Point& b, const Point& p) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double u = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  u = std::clamp(u, 0.0, 1.0);
  PieceHit h;
  h.closest = {a.x + u * dx, a.y + u * dy};
  const double ex = p.x - h.closest.x, ey = p.y - h.closest.y;
  h.d2 = ex * ex + ey * ey;
  // Compass frame: a positive z cross product means p lies to the left.
  h.cross = dx * (p.y - a.y) - dy * (p.x - a.x);
  return h;
}

}  // namespace detail

class RoadNetwork {
 public:
  static constexpr double kDefaultCell = 50.0;
  static constexpr double kOnLineEps = 1e-9;

  RoadNetwork() = default;

  explicit RoadNetwork(std::vector<RoadSegment> segments, double cell = kDefaultCell)
      : segments_(std::move(segments)), cell_(cell) {
    if (cell_ <= 0.0) throw InvalidArgument("road index cell size must be positive");
    for (std::size_t s = 0; s < segments_.size(); ++s) validate(segments_[s], s);
    build_index();
  }

  [[nodiscard]] const std::vector<RoadSegment>& segments() const { return segments_; }
  [[nodiscard]] bool empty() const { return segments_.empty(); }
  [[nodiscard]] double cell_size() const { return cell_; }

  // Polyline edges whose bounding box touches the disc (superset of the true
  // candidates).
  [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> candidates(const Point& p, double radius) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (segments_.empty()) return out;
    const long cx0 = cell_of(p.x - radius), cx1 = cell_of(p.x + radius);
    const long cy0 = cell_of(p.y - radius), cy1 = cell_of(p.y + radius);
    for (long cx = std::max(cx0, min_cx_); cx <= std::min(cx1, max_cx_); ++cx) {
      for (long cy = std::max(cy0, min_cy_); cy <= std::min(cy1, max_cy_); ++cy) {
        auto it = grid_.find({cx, cy});
        if (it == grid_.end()) continue;
        out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  [[nodiscard]] RoadQueryResult nearest(const Point& p) const {
    require_nonempty();
    // Expand square rings of cells until nothing unvisited can beat the best.
    const long qx = cell_of(p.x), qy = cell_of(p.y);
    const long reach = std::max({std::abs(qx - min_cx_), std::abs(qx - max_cx_), std::abs(qy - min_cy_),
                                 std::abs(qy - max_cy_)});
    // Rings closer than the index bounding box hold no cells.
    const long gap = std::max({0L, min_cx_ - qx, qx - max_cx_, min_cy_ - qy, qy - max_cy_});
    Best best;
    auto visit = [&](long cx, long cy) {
      auto it = grid_.find({cx, cy});
      if (it == grid_.end()) return;
      for (const auto& [s, k] : it->second) consider(best, p, s, k);
    };
    for (long ring = gap; ring <= reach; ++ring) {
      if (ring == 0) {
        visit(qx, qy);
      } else {
        for (long cx = qx - ring; cx <= qx + ring; ++cx) {
          visit(cx, qy - ring);
          visit(cx, qy + ring);
        }
        for (long cy = qy - ring + 1; cy <= qy + ring - 1; ++cy) {
          visit(qx - ring, cy);
          visit(qx + ring, cy);
        }
      }
      // Cells beyond this ring are at least ring * cell away from p.
      if (best.found && std::sqrt(best.hit.d2) <= static_cast<double>(ring) * cell_) break;
    }
    return finish(best, p);
  }

  // Reference answer by scanning every polyline edge.
  [[nodiscard]] RoadQueryResult nearest_brute_force(const Point& p) const {
    require_nonempty();
    Best best;
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      for (std::size_t k = 0; k + 1 < segments_[s].polyline.size(); ++k) consider(best, p, s, k);
    }
    return finish(best, p);
  }

 private:
  struct Best {
    bool found = false;
    std::size_t s = 0, k = 0;
    detail::PieceHit hit;
  };

  static void validate(const RoadSegment& seg, std::size_t index) {
    const std::string where = "road " + std::to_string(index) + " ('" + seg.id + "')";
    if (seg.polyline.size() < 2) throw ParseError(where + ": polyline needs at least 2 points");
    for (std::size_t i = 0; i < seg.polyline.size(); ++i) {
      const Point& q = seg.polyline[i];
      if (!std::isfinite(q.x) || !std::isfinite(q.y)) throw ParseError(where + ": non-finite coordinate");
      if (i > 0 && q == seg.polyline[i - 1]) {
        throw ParseError(where + ": repeated consecutive point at index " + std::to_string(i));
      }
    }
  }

  void require_nonempty() const {
    if (segments_.empty()) throw EmptyNetwork("road network has no segments");
  }

  [[nodiscard]] long cell_of(double v) const { return static_cast<long>(std::floor(v / cell_)); }

  void build_index() {
    bool first = true;
    for (std::size_t s = 0; s < segments_.size(); ++s) {
      const auto& pl = segments_[s].polyline;
      for (std::size_t k = 0; k + 1 < pl.size(); ++k) {
        const long x0 = cell_of(std::min(pl[k].x, pl[k + 1].x)), x1 = cell_of(std::max(pl[k].x, pl[k + 1].x));
        const long y0 = cell_of(std::min(pl[k].y, pl[k + 1].y)), y1 = cell_of(std::max(pl[k].y, pl[k + 1].y));
        for (long cx = x0; cx <= x1; ++cx) {
          for (long cy = y0; cy <= y1; ++cy) grid_[{cx, cy}].emplace_back(s, k);
        }
        if (first) {
          min_cx_ = x0, max_cx_ = x1, min_cy_ = y0, max_cy_ = y1;
          first = false;
        } else {
          min_cx_ = std::min(min_cx_, x0), max_cx_ = std::max(max_cx_, x1);
          min_cy_ = std::min(min_cy_, y0), max_cy_ = std::max(max_cy_, y1);
        }
      }
    }
  }

  void consider(Best& best, const Point& p, std::size_t s, std::size_t k) const {
    const auto& pl = segments_[s].polyline;
    const detail::PieceHit h = detail::project(pl[k], pl[k + 1], p);
    // Ties go to the lowest (segment, edge) so the grid and brute-force
    // answers agree exactly.
    if (!best.found || h.d2 < best.hit.d2 || (h.d2 == best.hit.d2 && std::pair(s, k) < std::pair(best.s, best.k))) {
      best = {true, s, k, h};
    }
  }

  [[nodiscard]] RoadQueryResult finish(const Best& best, const Point& p) const {
    const auto& seg = segments_[best.s];
    const Point a = seg.polyline[best.k], b = seg.polyline[best.k + 1];
    RoadQueryResult r;
    r.road_id = seg.id;
    r.segment = best.s;
    r.piece = best.k;
    r.closest = best.hit.closest;
    r.d = std::sqrt(best.hit.d2);
    if (r.d <= kOnLineEps) {
      r.theta_ref = geom::wrap360(bearing(b.x - a.x, b.y - a.y) + 90.0);
    } else {
      r.theta_ref = bearing(r.closest.x - p.x, r.closest.y - p.y);
    }
    r.signed_d = best.hit.cross > 0.0 ? -r.d : r.d;
    return r;
  }

  std::vector<RoadSegment> segments_;
  double cell_ = kDefaultCell;
  std::map<std::pair<long, long>, std::vector<std::pair<std::size_t, std::size_t>>> grid_;
  long min_cx_ = 0, max_cx_ = 0, min_cy_ = 0, max_cy_ = 0;
};

[[nodiscard]] inline RoadQueryResult nearest_road(const RoadNetwork& net, const Point& p) { return net.nearest(p); }

enum class ParseMode { strict, lenient };

struct LoadResult {
  RoadNetwork network;
  std::vector<std::string> warnings;
};

inline constexpr double kEarthRadius = 6371008.8;  // m

// Local tangent-plane (equirectangular) projection around an origin.
[[nodiscard]] inline Point lonlat_to_local(double lon, double lat, double lon0, double lat0) {
  return {kEarthRadius * geom::deg2rad(lon - lon0) * std::cos(geom::deg2rad(lat0)),
          kEarthRadius * geom::deg2rad(lat - lat0)};
}

namespace detail {

[[nodiscard]] inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[nodiscard]] inline RoadSegment parse_feature(const nlohmann::json& f, std::size_t index,
                                               const std::optional<std::pair<double, double>>& origin) {
  const std::string where = "feature " + std::to_string(index);
  if (!f.is_object()) throw ParseError(where + ": not an object");
  if (!f.contains("geometry") || !f["geometry"].is_object()) throw ParseError(where + ": missing geometry");
  const auto& g = f["geometry"];
  if (g.value("type", "") != "LineString") {
    throw ParseError(where + ": geometry type '" + g.value("type", "") + "' is not LineString");
  }
  if (!g.contains("coordinates") || !g["coordinates"].is_array()) {
    throw ParseError(where + ": missing coordinates");
  }
  RoadSegment seg;
  if (f.contains("id") && (f["id"].is_string() || f["id"].is_number())) {
    seg.id = f["id"].is_string() ? f["id"].get<std::string>() : f["id"].dump();
  }
  const nlohmann::json props = f.contains("properties") && f["properties"].is_object() ? f["properties"]
                                                                                       : nlohmann::json::object();
  if (seg.id.empty() && props.contains("id")) {
    seg.id = props["id"].is_string() ? props["id"].get<std::string>() : props["id"].dump();
  }
  if (seg.id.empty()) seg.id = "road-" + std::to_string(index);
  if (props.contains("name") && props["name"].is_string()) seg.name = props["name"].get<std::string>();

  for (const auto& c : g["coordinates"]) {
    if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
      throw ParseError(where + ": malformed coordinate " + c.dump());
    }
    const double a = c[0].get<double>(), b = c[1].get<double>();
    seg.polyline.push_back(origin ? lonlat_to_local(a, b, origin->first, origin->second) : Point{a, b});
  }
  if (seg.polyline.size() < 2) throw ParseError(where + ": LineString needs at least 2 points");
  for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
    if (seg.polyline[i] == seg.polyline[i - 1]) {
      throw ParseError(where + ": repeated consecutive point at index " + std::to_string(i));
    }
  }
  return seg;
}

}  // namespace detail

// Parses a FeatureCollection of LineStrings. Coordinates are planar metres,
// or lon/lat when the collection carries "local_origin": [lon, lat]. Lenient
// mode skips bad features with a warning; strict mode throws on the first.
[[nodiscard]] inline LoadResult parse_geojson(const std::string& text, ParseMode mode = ParseMode::strict) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("geojson: syntax error at " + detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    throw ParseError("geojson: top level must be a FeatureCollection");
  }
  if (!doc.contains("features") || !doc["features"].is_array()) throw ParseError("geojson: missing features array");

  std::optional<std::pair<double, double>> origin;
  if (doc.contains("local_origin")) {
    const auto& o = doc["local_origin"];
    if (!o.is_array() || o.size() != 2 || !o[0].is_number() || !o[1].is_number()) {
      throw ParseError("geojson: local_origin must be [lon, lat]");
    }
    origin = std::pair{o[0].get<double>(), o[1].get<double>()};
  }

  LoadResult out;
  std::vector<RoadSegment> segs;
  const auto& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    try {
      segs.push_back(detail::parse_feature(features[i], i, origin));
    } catch (const ParseError& e) {
      if (mode == ParseMode::strict) throw;
      out.warnings.emplace_back(e.what());
    }
  }
  if (segs.empty()) throw EmptyNetwork("geojson: no usable LineString features");
  out.network = RoadNetwork(std::move(segs));
  return out;
}

[[nodiscard]] inline LoadResult load_geojson(const std::string& path, ParseMode mode = ParseMode::strict) {
  std::ifstream in(path);
  if (!in) throw ParseError("geojson: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_geojson(ss.str(), mode);
}

[[nodiscard]] inline nlohmann::json to_geojson(const RoadNetwork& net) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& seg : net.segments()) {
    nlohmann::json coords = nlohmann::json::array();
    for (const auto& p : seg.polyline) coords.push_back({p.x, p.y});
    nlohmann::json props = nlohmann::json::object();
    if (seg.name) props["name"] = *seg.name;
    features.push_back({{"type", "Feature"},
                        {"id", seg.id},
                        {"properties", props},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

struct TimedPoint {
  double t = 0.0;
  Point p;
};

struct RoadSample {
  double t = 0.0;
  RoadQueryResult result;
  bool idle_eligible = false;  // farther than the idle distance from every road
};

inline constexpr double kIdleDistance = 10.0;  // m

// Queries the network at `cadence_hz` along a position stream. A query fires
// on the first position at or after each due time; consumers hold the last
// result in between.
[[nodiscard]] inline std::vector<RoadSample> sample_along(const RoadNetwork& net, std::span<const TimedPoint> positions,
                                                          double cadence_hz, double idle_distance = kIdleDistance) {
  if (cadence_hz <= 0.0) throw InvalidArgument("sample_along: cadence must be positive");
  std::vector<RoadSample> out;
  if (positions.empty()) return out;
  const double period = 1.0 / cadence_hz;
  const double t0 = positions.front().t;
  long next = 0;
  for (const auto& tp : positions) {
    // Compare in tick units to avoid drift from repeated addition.
    if (tp.t + 1e-9 < t0 + static_cast<double>(next) * period) continue;
    RoadQueryResult r = net.nearest(tp.p);
    const bool idle = r.d > idle_distance;
    out.push_back({tp.t, std::move(r), idle});
    next = static_cast<long>(std::floor((tp.t - t0) / period + 1e-9)) + 1;
  }
  return out;
}

}  // namespace pedhat::roads
