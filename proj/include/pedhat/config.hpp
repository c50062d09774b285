#pragma once

// Run configuration from JSON. Every lookup is strict: a missing required key,
// a value of the wrong type, or an unknown key raises ConfigError naming the
// full key path (for example `scenarios[2].noise.gps_sigma`).

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pedhat/crossnet.hpp"
#include "pedhat/errors.hpp"
#include "pedhat/pipeline.hpp"
#include "pedhat/rng.hpp"
#include "pedhat/simkit.hpp"

namespace pedhat::config {

using nlohmann::json;

// View of one JSON object that remembers which keys were read.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + where() + "' must be an object");
  }

  [[nodiscard]] std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }

  [[nodiscard]] const json& req(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing required key '" + key_path(key) + "'");
    return j_.at(key);
  }

  [[nodiscard]] const json* opt(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return nullptr;
    return &j_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (const json* v = opt(key)) out = as<T>(*v, key_path(key));
  }

  template <class T>
  [[nodiscard]] T get(const std::string& key) {
    return as<T>(req(key), key_path(key));
  }

  [[nodiscard]] Obj sub(const std::string& key) { return Obj(req(key), key_path(key)); }

  // Rejects keys that were never looked up.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError("unknown key '" + key_path(it.key()) + "'");
    }
  }

  template <class T>
  [[nodiscard]] static T as(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("'" + path + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("'" + path + "' must be an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
          throw ConfigError("'" + path + "' must be non-negative");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("'" + path + "' must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError("'" + path + "' must be a string");
    }
    return v.get<T>();
  }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Wraps library validation errors with the key path they came from.
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

inline void read_profile(Obj o, sim::AttitudeProfile& p) {
  o.read("swing_amplitude", p.swing_amplitude);
  o.read("pitch_ratio", p.pitch_ratio);
  o.read("cadence", p.cadence);
  o.read("jitter", p.jitter);
  o.read("speed_ref", p.speed_ref);
  o.read("speed_tau", p.speed_tau);
  if (o.has("base_offset")) {
    Obj b = o.sub("base_offset");
    b.read("roll", p.base_offset.roll);
    b.read("pitch", p.base_offset.pitch);
    b.read("yaw", p.base_offset.yaw);
    b.finish();
  }
  o.finish();
}

inline void read_course(Obj o, sim::CourseParams& c) {
  o.read("sidewalk_min", c.sidewalk_min);
  o.read("sidewalk_max", c.sidewalk_max);
  o.read("warmup_min", c.warmup_min);
  o.read("warmup_max", c.warmup_max);
  o.read("gap_min", c.gap_min);
  o.read("gap_max", c.gap_max);
  o.read("w_turn_cross", c.w_turn_cross);
  o.read("w_straight_cross", c.w_straight_cross);
  o.read("w_fake", c.w_fake);
  o.read("w_depart", c.w_depart);
  o.read("w_out_and_back", c.w_out_and_back);
  o.read("curb_pause_prob", c.curb_pause_prob);
  o.read("road_length", c.road_length);
  o.read("vertex_spacing", c.vertex_spacing);
  o.finish();
}

inline void read_path(Obj o, sim::PathParams& p) {
  o.read("dt", p.dt);
  o.read("speed", p.speed);
  if (const json* h = o.opt("start_heading")) p.start_heading = Obj::as<double>(*h, o.key_path("start_heading"));
  o.read("leg_min", p.leg_min);
  o.read("leg_max", p.leg_max);
  o.read("turn_duration", p.turn_duration);
  o.read("hold_min", p.hold_min);
  o.read("hold_max", p.hold_max);
  o.read("rotate_duration", p.rotate_duration);
  o.read("rotate_min", p.rotate_min);
  o.read("rotate_max", p.rotate_max);
  o.read("msp_amplitude", p.msp_amplitude);
  o.read("msp_period", p.msp_period);
  if (o.has("course")) read_course(o.sub("course"), p.course);
  o.finish();
}

inline sim::NoiseModel noise_preset(const std::string& name, const std::string& path) {
  if (name == "none") return sim::NoiseModel::none();
  if (name == "typical") return sim::NoiseModel::typical();
  throw ConfigError("'" + path + "': unknown noise preset '" + name + "'");
}

// Either a preset name or an object with an optional "preset" plus overrides.
inline sim::NoiseModel read_noise(const json& j, const std::string& path) {
  if (j.is_string()) return noise_preset(j.get<std::string>(), path);
  Obj o(j, path);
  sim::NoiseModel n = sim::NoiseModel::none();
  if (const json* p = o.opt("preset")) n = noise_preset(Obj::as<std::string>(*p, o.key_path("preset")), path);
  if (const json* b = o.opt("gyro_bias")) {
    if (!b->is_array() || b->size() != 3) throw ConfigError("'" + o.key_path("gyro_bias") + "' must be a 3-vector");
    n.gyro_bias = {Obj::as<double>((*b)[0], o.key_path("gyro_bias")), Obj::as<double>((*b)[1], o.key_path("gyro_bias")),
                   Obj::as<double>((*b)[2], o.key_path("gyro_bias"))};
  }
  o.read("gyro_bias_random", n.gyro_bias_random);
  o.read("gyro_bias_walk", n.gyro_bias_walk);
  o.read("gyro_noise", n.gyro_noise);
  o.read("accel_noise", n.accel_noise);
  o.read("mag_noise", n.mag_noise);
  o.read("gps_sigma", n.gps_sigma);
  o.read("gps_drift_sigma", n.gps_drift_sigma);
  o.read("gps_drift_tau", n.gps_drift_tau);
  o.read("gps_delay", n.gps_delay);
  o.finish();
  for (double v : {n.gyro_bias_random, n.gyro_bias_walk, n.gyro_noise, n.accel_noise, n.mag_noise, n.gps_sigma,
                   n.gps_drift_sigma, n.gps_delay}) {
    if (v < 0.0) throw ConfigError("'" + path + "': noise sigmas and delay must be non-negative");
  }
  return n;
}

inline void read_sensors(Obj o, sim::SensorConfig& s) {
  o.read("mag_field", s.mag_field);
  o.read("mag_inclination", s.mag_inclination);
  o.read("mag_every", s.mag_every);
  o.read("gps_rate", s.gps_rate);
  o.read("gps_accuracy_floor", s.gps_accuracy_floor);
  o.finish();
  if (s.mag_every < 1) throw ConfigError("'" + o.key_path("mag_every") + "' must be positive");
  if (s.gps_rate <= 0.0) throw ConfigError("'" + o.key_path("gps_rate") + "' must be positive");
}

inline void read_labels(Obj o, sim::LabelConfig& l) {
  o.read("road_half_width", l.road_half_width);
  o.read("near_road", l.near_road);
  o.read("turn_angle", l.turn_angle);
  o.read("turn_window", l.turn_window);
  o.read("turn_radius", l.turn_radius);
  o.read("turn_lookback", l.turn_lookback);
  o.read("turn_onset", l.turn_onset);
  o.read("fallback_lead", l.fallback_lead);
  o.read("return_window", l.return_window);
  o.finish();
}

inline std::vector<sim::SessionPart> read_parts(const json& parts, const std::string& path) {
  if (!parts.is_array() || parts.empty()) throw ConfigError("'" + path + "' must be a non-empty array");
  std::vector<sim::SessionPart> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string pp = path + "[" + std::to_string(i) + "]";
    Obj po(parts[i], pp);
    const auto pat = at_path(pp + ".pattern", [&] { return sim::pattern_from_string(po.get<std::string>("pattern")); });
    if (pat == sim::Pattern::crossing_course) {
      throw ConfigError("'" + pp + ".pattern': crossing_course cannot be part of a composite session");
    }
    const double d = po.get<double>("duration");
    if (d <= 0.0) throw ConfigError("'" + pp + ".duration' must be positive");
    po.finish();
    out.push_back({pat, d});
  }
  return out;
}

// Scenario entry after defaults are merged in. `count` > 1 expands into
// numbered sessions; `placements` then cycles across them.
inline std::vector<pipeline::ScenarioSpec> read_scenario(const json& j, const std::string& path, std::uint64_t base_seed,
                                                         std::size_t& index) {
  Obj o(j, path);
  pipeline::ScenarioSpec proto;
  proto.name = o.get<std::string>("name");
  if (proto.name.empty() || proto.name.find_first_of("/\\") != std::string::npos || proto.name == "." ||
      proto.name == "..") {
    throw ConfigError("'" + o.key_path("name") + "' must be a plain directory name");
  }

  const json* parts = o.opt("parts");
  const json* pattern = o.opt("pattern");
  if ((parts != nullptr) == (pattern != nullptr)) {
    throw ConfigError("'" + path + "' needs exactly one of 'parts' or 'pattern'");
  }
  double duration = 180.0;
  o.read("duration", duration);
  if (duration <= 0.0) throw ConfigError("'" + o.key_path("duration") + "' must be positive");
  if (pattern) {
    const std::string kp = o.key_path("pattern");
    const auto pat = at_path(kp, [&] { return sim::pattern_from_string(Obj::as<std::string>(*pattern, kp)); });
    if (pat == sim::Pattern::crossing_course) {
      proto.crossing = true;
      proto.parts.clear();
    } else {
      proto.parts = {{pat, duration}};
    }
  } else {
    proto.parts = read_parts(*parts, o.key_path("parts"));
  }
  proto.path.duration = duration;
  if (const json* w = o.opt("warmup")) {
    const std::string kp = o.key_path("warmup");
    if (proto.crossing) throw ConfigError("'" + kp + "': crossing_course sessions take no warm-up");
    auto warm = read_parts(*w, kp);
    for (const auto& part : warm) proto.score_from += part.duration;
    warm.insert(warm.end(), proto.parts.begin(), proto.parts.end());
    proto.parts = std::move(warm);
  }

  std::vector<sim::Placement> placements{sim::Placement::hand};
  if (const json* p = o.opt("placement")) {
    const std::string kp = o.key_path("placement");
    placements = {at_path(kp, [&] { return sim::placement_from_string(Obj::as<std::string>(*p, kp)); })};
  }
  if (const json* ps = o.opt("placements")) {
    const std::string kp = o.key_path("placements");
    if (!ps->is_array() || ps->empty()) throw ConfigError("'" + kp + "' must be a non-empty array");
    placements.clear();
    for (std::size_t i = 0; i < ps->size(); ++i) {
      const std::string ip = kp + "[" + std::to_string(i) + "]";
      placements.push_back(at_path(ip, [&] { return sim::placement_from_string(Obj::as<std::string>((*ps)[i], ip)); }));
    }
  }
  const json* profile = o.opt("profile");
  if (const json* p = o.opt("path")) read_path(Obj(*p, o.key_path("path")), proto.path);
  if (const json* n = o.opt("noise")) proto.noise = read_noise(*n, o.key_path("noise"));
  if (const json* s = o.opt("sensors")) read_sensors(Obj(*s, o.key_path("sensors")), proto.sensors);
  if (const json* l = o.opt("labels")) read_labels(Obj(*l, o.key_path("labels")), proto.labels);
  std::optional<std::uint64_t> seed;
  if (const json* s = o.opt("seed")) seed = Obj::as<std::uint64_t>(*s, o.key_path("seed"));
  int count = 1;
  o.read("count", count);
  if (count < 1) throw ConfigError("'" + o.key_path("count") + "' must be positive");
  o.finish();

  std::vector<pipeline::ScenarioSpec> out;
  for (int k = 0; k < count; ++k) {
    pipeline::ScenarioSpec s = proto;
    if (count > 1) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "_%03d", k);
      s.name += buf;
    }
    s.profile = sim::AttitudeProfile::preset(placements[static_cast<std::size_t>(k) % placements.size()]);
    if (profile) read_profile(Obj(*profile, o.key_path("profile")), s.profile);
    s.seed = seed ? *seed + static_cast<std::uint64_t>(k) : Rng::derive(base_seed, index).next();
    ++index;
    out.push_back(std::move(s));
  }
  return out;
}

struct AlertConfig {
  int n = 20;
  double threshold = 0.5;
};

struct Config {
  std::uint64_t seed = 1;
  std::vector<pipeline::ScenarioSpec> scenarios;
  pipeline::TrackConfig track;
  std::string method = "oha";
  net::ModelConfig model;
  net::TrainConfig train;
  std::size_t stride = 1;  // every stride-th window becomes a training example
  pipeline::HeadingSource heading_source = pipeline::HeadingSource::oha;
  AlertConfig alert;
};

inline void read_track(Obj o, Config& c) {
  if (const json* m = o.opt("method")) {
    c.method = Obj::as<std::string>(*m, o.key_path("method"));
    if (c.method != "oha" && c.method != "ig" && c.method != "gps") {
      throw ConfigError("'" + o.key_path("method") + "': unknown method '" + c.method + "'");
    }
  }
  if (const json* a = o.opt("attitude")) {
    const std::string kp = o.key_path("attitude");
    c.track.source = at_path(kp, [&] { return pipeline::attitude_source_from_string(Obj::as<std::string>(*a, kp)); });
  }
  o.read("emit_merged", c.track.emit_merged);
  if (o.has("oha")) {
    Obj h = o.sub("oha");
    auto& cfg = c.track.oha;
    h.read("q", cfg.q);
    h.read("alpha", cfg.alpha);
    h.read("init_hold", cfg.init_hold);
    h.read("init_from_precise", cfg.init_from_precise);
    h.read("precise_hold", cfg.precise_hold);
    if (const json* g = h.opt("coarse_trust_gate")) cfg.coarse_trust_gate = Obj::as<double>(*g, h.key_path("coarse_trust_gate"));
    h.finish();
    if (cfg.q < 1) throw ConfigError("'" + h.key_path("q") + "' must be positive");
    if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("'" + h.key_path("alpha") + "' must lie in [0, 1]");
  }
  if (o.has("filter")) {
    Obj f = o.sub("filter");
    auto& cfg = c.track.filter;
    f.read("tilt_gain", cfg.gains.tilt);
    f.read("yaw_gain", cfg.gains.yaw);
    f.read("accel_gate", cfg.correction.accel_gate);
    f.read("mag_min", cfg.correction.mag_gate.lo);
    f.read("mag_max", cfg.correction.mag_gate.hi);
    f.read("drift_window", cfg.correction.drift_window);
    f.read("tilt_gate", cfg.tilt_gate);
    f.read("tilt_gate_timeout", cfg.tilt_gate_timeout);
    f.finish();
  }
  if (o.has("bearing")) {
    Obj b = o.sub("bearing");
    b.read("min_move", c.track.bearing.min_move);
    b.finish();
  }
  o.finish();
}

inline void read_model(Obj o, Config& c) {
  double lookback = c.model.lookback, step = c.model.step;
  int hidden = c.model.hidden;
  o.read("lookback", lookback);
  o.read("step", step);
  o.read("hidden", hidden);
  o.finish();
  c.model = net::ModelConfig::with_lookback(lookback, step, hidden);
  at_path(o.key_path("lookback"), [&] { c.model.validate(); return 0; });
}

inline void read_train(Obj o, Config& c) {
  auto& t = c.train;
  o.read("max_epochs", t.max_epochs);
  o.read("patience", t.patience);
  o.read("batch", t.batch);
  o.read("lr", t.lr);
  o.read("beta1", t.beta1);
  o.read("beta2", t.beta2);
  o.read("eps", t.eps);
  o.read("val_fraction", t.val_fraction);
  o.read("pos_weight", t.pos_weight);
  o.read("stride", c.stride);
  if (const json* h = o.opt("heading_source")) {
    const std::string kp = o.key_path("heading_source");
    c.heading_source = at_path(kp, [&] { return pipeline::heading_source_from_string(Obj::as<std::string>(*h, kp)); });
  }
  o.finish();
  if (t.max_epochs < 1) throw ConfigError("'" + o.key_path("max_epochs") + "' must be positive");
  if (t.batch < 1) throw ConfigError("'" + o.key_path("batch") + "' must be positive");
  if (t.lr <= 0.0) throw ConfigError("'" + o.key_path("lr") + "' must be positive");
  if (t.val_fraction < 0.0 || t.val_fraction >= 1.0) {
    throw ConfigError("'" + o.key_path("val_fraction") + "' must lie in [0, 1)");
  }
  if (c.stride < 1) throw ConfigError("'" + o.key_path("stride") + "' must be positive");
}

inline void read_alert(Obj o, Config& c) {
  o.read("n", c.alert.n);
  o.read("threshold", c.alert.threshold);
  o.finish();
  if (c.alert.n < 1) throw ConfigError("'" + o.key_path("n") + "' must be positive");
  if (c.alert.threshold < 0.0 || c.alert.threshold > 1.0) {
    throw ConfigError("'" + o.key_path("threshold") + "' must lie in [0, 1]");
  }
}

// Parses a whole config. `seed_override` replaces the file's base seed.
// Scenarios are optional here; commands that simulate require them.
[[nodiscard]] inline Config parse(const json& j, std::optional<std::uint64_t> seed_override = std::nullopt) {
  Config c;
  Obj root(j, "");
  root.read("seed", c.seed);
  if (seed_override) c.seed = *seed_override;
  json defaults = json::object();
  if (const json* d = root.opt("defaults")) {
    if (!d->is_object()) throw ConfigError("'defaults' must be an object");
    defaults = *d;
  }
  if (const json* sc = root.opt("scenarios")) {
    if (!sc->is_array()) throw ConfigError("'scenarios' must be an array");
    std::size_t index = 0;
    std::set<std::string> names;
    for (std::size_t i = 0; i < sc->size(); ++i) {
      json merged = defaults;
      merged.merge_patch((*sc)[i]);
      const std::string path = "scenarios[" + std::to_string(i) + "]";
      if (!(*sc)[i].is_object()) throw ConfigError("'" + path + "' must be an object");
      for (auto& s : read_scenario(merged, path, c.seed, index)) {
        if (!names.insert(s.name).second) throw ConfigError("'" + path + ".name': duplicate session '" + s.name + "'");
        c.scenarios.push_back(std::move(s));
      }
    }
  }
  if (root.has("track")) read_track(root.sub("track"), c);
  if (root.has("model")) read_model(root.sub("model"), c);
  if (root.has("train")) read_train(root.sub("train"), c);
  if (root.has("alert")) read_alert(root.sub("alert"), c);
  root.finish();
  return c;
}

}  // namespace pedhat::config
