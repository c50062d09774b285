#pragma once

// JSON-lines stream files and the per-session file layout.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedhat/att.hpp"
#include "pedhat/errors.hpp"
#include "pedhat/oha.hpp"
#include "pedhat/pipeline.hpp"
#include "pedhat/roads.hpp"
#include "pedhat/simkit.hpp"

namespace pedhat::io {

using nlohmann::json;

[[nodiscard]] inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + p.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

[[nodiscard]] inline json read_json(const std::filesystem::path& p) {
  const std::string text = read_text(p);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

[[nodiscard]] inline std::vector<json> read_jsonl(const std::filesystem::path& p) {
  std::istringstream in(read_text(p));
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(p.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

inline void write_jsonl(const std::filesystem::path& p, const std::vector<json>& records) {
  std::string text;
  for (const auto& r : records) {
    text += r.dump();
    text += '\n';
  }
  write_text(p, text);
}

[[nodiscard]] inline json vec(const geom::Vec3& v) { return json::array({v.x, v.y, v.z}); }

[[nodiscard]] inline geom::Vec3 vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-vector, found " + j.dump());
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <class F>
auto with_context(const std::string& what, std::size_t index, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(what + " record " + std::to_string(index + 1) + ": " + e.what());
  }
}

[[nodiscard]] inline json to_json(const att::ImuSample& s) {
  json j = {{"t", s.t}, {"gyro", vec(s.gyro)}, {"accel", vec(s.accel)}};
  if (s.mag) j["mag"] = vec(*s.mag);
  return j;
}

[[nodiscard]] inline att::ImuSample imu_from_json(const json& j) {
  att::ImuSample s;
  s.t = j.at("t").get<double>();
  s.gyro = vec(j.at("gyro"));
  s.accel = vec(j.at("accel"));
  if (j.contains("mag") && !j["mag"].is_null()) s.mag = vec(j["mag"]);
  return s;
}

[[nodiscard]] inline json to_json(const att::GpsFix& f) {
  return {{"t", f.t}, {"x", f.x}, {"y", f.y}, {"accuracy", f.accuracy}};
}

[[nodiscard]] inline att::GpsFix gps_from_json(const json& j) {
  att::GpsFix f{j.at("t").get<double>(), j.at("x").get<double>(), j.at("y").get<double>(),
                j.at("accuracy").get<double>()};
  if (!(f.accuracy > 0.0)) throw ParseError("gps accuracy must be positive");
  return f;
}

[[nodiscard]] inline json to_json(const oha::HeadingSample& h) {
  return {{"t", h.t}, {"heading", h.heading}, {"kind", oha::to_string(h.kind)}};
}

[[nodiscard]] inline oha::HeadingSample heading_from_json(const json& j) {
  return {j.at("t").get<double>(), j.at("heading").get<double>(),
          oha::heading_kind_from_string(j.at("kind").get<std::string>())};
}

[[nodiscard]] inline json to_json(const sim::TrajectorySample& s) {
  return {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"heading", s.heading}, {"speed", s.speed}};
}

[[nodiscard]] inline sim::TrajectorySample truth_from_json(const json& j) {
  return {j.at("t").get<double>(), j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>(),
          j.at("speed").get<double>()};
}

[[nodiscard]] inline json to_json(double t, const geom::EulerAngles& e) {
  return {{"t", t}, {"roll", e.roll}, {"pitch", e.pitch}, {"yaw", e.yaw}};
}

[[nodiscard]] inline oha::OrientationSample orientation_from_json(const json& j) {
  return {j.at("t").get<double>(),
          {j.at("roll").get<double>(), j.at("pitch").get<double>(), j.at("yaw").get<double>()}};
}

template <class T, class Conv>
[[nodiscard]] std::vector<T> read_stream(const std::filesystem::path& p, Conv&& conv) {
  const auto rows = read_jsonl(p);
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(with_context(p.string(), i, [&] { return conv(rows[i]); }));
  }
  return out;
}

template <class Seq>
void write_stream(const std::filesystem::path& p, const Seq& items) {
  std::vector<json> rows;
  rows.reserve(items.size());
  for (const auto& it : items) rows.push_back(to_json(it));
  write_jsonl(p, rows);
}

[[nodiscard]] inline json to_json(const sim::CrossingEvent& e) {
  return {{"start_t", e.start_t}, {"edge_t", e.edge_t}, {"center_t", e.center_t}, {"road_id", e.road_id}};
}

[[nodiscard]] inline sim::CrossingEvent event_from_json(const json& j) {
  return {j.at("start_t").get<double>(), j.at("edge_t").get<double>(), j.at("center_t").get<double>(),
          j.at("road_id").get<std::string>()};
}

// Names of the files inside one session directory.
struct SessionFiles {
  static constexpr const char* imu = "imu.jsonl";
  static constexpr const char* gps = "gps.jsonl";
  static constexpr const char* truth = "truth.jsonl";
  static constexpr const char* attitude = "attitude.jsonl";
  static constexpr const char* labels = "labels.json";
  static constexpr const char* roads = "roads.geojson";
  static constexpr const char* meta = "session.json";
};

[[nodiscard]] inline json to_json(const sim::LabelResult& l) {
  json ev = json::array();
  for (const auto& e : l.events) ev.push_back(to_json(e));
  return {{"events", ev}, {"excluded", l.excluded}, {"reason", l.reason}};
}

[[nodiscard]] inline sim::LabelResult labels_from_json(const json& j) {
  sim::LabelResult l;
  try {
    for (const auto& e : j.at("events")) l.events.push_back(event_from_json(e));
    l.excluded = j.value("excluded", false);
    l.reason = j.value("reason", std::string{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("labels: ") + e.what());
  }
  return l;
}

[[nodiscard]] inline json describe(const pipeline::ScenarioSpec& spec) {
  json parts = json::array();
  for (const auto& p : spec.parts) parts.push_back({{"pattern", sim::to_string(p.pattern)}, {"duration", p.duration}});
  const auto& n = spec.noise;
  return {{"name", spec.name},
          {"seed", spec.seed},
          {"crossing", spec.crossing},
          {"score_from", spec.score_from},
          {"parts", parts},
          {"duration", spec.path.duration},
          {"placement", sim::to_string(spec.profile.placement)},
          {"noise",
           {{"gyro_bias", vec(n.gyro_bias)},
            {"gyro_bias_random", n.gyro_bias_random},
            {"gyro_bias_walk", n.gyro_bias_walk},
            {"gyro_noise", n.gyro_noise},
            {"accel_noise", n.accel_noise},
            {"mag_noise", n.mag_noise},
            {"gps_sigma", n.gps_sigma},
            {"gps_drift_sigma", n.gps_drift_sigma},
            {"gps_drift_tau", n.gps_drift_tau},
            {"gps_delay", n.gps_delay}}}};
}

// Writes every stream of a simulated session into `dir`.
inline void save_session(const std::filesystem::path& dir, const pipeline::Session& s, const json& meta) {
  std::filesystem::create_directories(dir);
  json m = meta;
  json segs = json::array();
  for (const auto& g : s.traj.segments) segs.push_back({{"name", g.name}, {"t0", g.t0}, {"t1", g.t1}});
  m["segments"] = segs;
  m["dt"] = s.traj.dt;
  write_json(dir / SessionFiles::meta, m);
  write_stream(dir / SessionFiles::imu, s.imu);
  write_stream(dir / SessionFiles::gps, s.gps);
  write_stream(dir / SessionFiles::truth, s.traj.samples);
  std::vector<json> att;
  att.reserve(s.attitude.size());
  for (std::size_t i = 0; i < s.attitude.size(); ++i) att.push_back(to_json(s.traj.samples[i].t, s.attitude[i]));
  write_jsonl(dir / SessionFiles::attitude, att);
  if (s.roads) write_json(dir / SessionFiles::roads, roads::to_geojson(*s.roads));
  if (s.labels) write_json(dir / SessionFiles::labels, to_json(*s.labels));
}

[[nodiscard]] inline bool is_session_dir(const std::filesystem::path& dir) {
  return std::filesystem::is_regular_file(dir / SessionFiles::meta);
}

// Loads a session directory. Truth, attitude, roads and labels are optional.
[[nodiscard]] inline pipeline::Session load_session(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("'" + dir.string() + "' is not a session directory");
  pipeline::Session s;
  s.name = dir.filename().string();
  if (is_session_dir(dir)) {
    const json m = read_json(dir / SessionFiles::meta);
    s.name = m.value("name", s.name);
    s.traj.dt = m.value("dt", s.traj.dt);
    s.score_from = m.value("score_from", 0.0);
    if (m.contains("segments")) {
      for (const auto& g : m["segments"]) {
        s.traj.segments.push_back({g.at("name").get<std::string>(), g.at("t0").get<double>(), g.at("t1").get<double>()});
      }
    }
  }
  s.imu = read_stream<att::ImuSample>(dir / SessionFiles::imu, imu_from_json);
  s.gps = read_stream<att::GpsFix>(dir / SessionFiles::gps, gps_from_json);
  if (std::filesystem::exists(dir / SessionFiles::truth)) {
    s.traj.samples = read_stream<sim::TrajectorySample>(dir / SessionFiles::truth, truth_from_json);
  }
  if (std::filesystem::exists(dir / SessionFiles::attitude)) {
    for (const auto& o : read_stream<oha::OrientationSample>(dir / SessionFiles::attitude, orientation_from_json)) {
      s.attitude.push_back(o.attitude);
    }
  }
  if (std::filesystem::exists(dir / SessionFiles::roads)) {
    s.roads = roads::load_geojson((dir / SessionFiles::roads).string()).network;
  }
  if (std::filesystem::exists(dir / SessionFiles::labels)) {
    s.labels = labels_from_json(read_json(dir / SessionFiles::labels));
  }
  return s;
}

// A session directory itself, or the sorted session directories inside it.
[[nodiscard]] inline std::vector<std::filesystem::path> session_dirs(const std::filesystem::path& root) {
  if (is_session_dir(root)) return {root};
  if (!std::filesystem::is_directory(root)) throw ParseError("'" + root.string() + "' is not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory() && is_session_dir(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ParseError("no session directories under '" + root.string() + "'");
  return out;
}

}  // namespace pedhat::io
