#pragma once

// Orientation-Heading Alignment: a streaming heading estimator that learns,
// per quantized phone attitude, how the phone's yaw relates to the walker's
// heading, then converts every orientation update into a heading.
//
// With O = Rz(yaw) Ry(pitch) Rx(roll) and the walker frame rotated from GCS by
// Rz(-heading), the phone-to-walker rotation satisfies
//
//   R_LP^-1 = Rz(heading + yaw) Ry(pitch) Rx(roll)
//
// so for a fixed carrying attitude the sum c = heading + yaw is constant.
// The table stores that scalar per (roll, pitch) cell; heading = c - yaw.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "pedhat/errors.hpp"
#include "pedhat/geom.hpp"

namespace pedhat::oha {

enum class HeadingKind { coarse, precise, merged };

[[nodiscard]] inline std::string to_string(HeadingKind k) {
  switch (k) {
    case HeadingKind::coarse: return "coarse";
    case HeadingKind::precise: return "precise";
    case HeadingKind::merged: return "merged";
  }
  return "coarse";
}

[[nodiscard]] inline HeadingKind heading_kind_from_string(const std::string& s) {
  if (s == "coarse") return HeadingKind::coarse;
  if (s == "precise") return HeadingKind::precise;
  if (s == "merged") return HeadingKind::merged;
  throw ParseError("unknown heading kind '" + s + "'");
}

struct HeadingSample {
  double t = 0.0;
  double heading = 0.0;  // compass degrees, [0, 360)
  HeadingKind kind = HeadingKind::coarse;
};

struct OrientationSample {
  double t = 0.0;
  geom::EulerAngles attitude;
};

struct OhaConfig {
  int q = 2;
  double alpha = 0.02;
  // Coarse headings that jump more than this from the previous accepted one
  // are dropped. Disabled when unset.
  std::optional<double> coarse_trust_gate;
  // A coarse heading no older than this may initialize a newly visited cell
  // on an orientation update (the initialization step of the streaming
  // loop). Zero restricts initialization to coarse-update instants.
  double init_hold = 1.0;
  // Initialize a new cell from the latest precise heading instead, when one
  // was emitted within precise_hold seconds. Off by default.
  bool init_from_precise = false;
  double precise_hold = 0.5;
};

struct BinState {
  double c = 0.0;  // heading + yaw, [0, 360)
  std::uint64_t updates = 0;
  double last_t = 0.0;
};

// The learned alignment cells plus the stream bookkeeping of one tracker.
class OhaTracker {
 public:
  using Table = std::map<geom::BinKey, BinState>;

  explicit OhaTracker(OhaConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.alpha < 0.0 || cfg_.alpha > 1.0) throw InvalidArgument("oha: alpha must lie in [0, 1]");
    (void)geom::quantize_rp(0.0, 0.0, cfg_.q);  // validates q
  }

  [[nodiscard]] const OhaConfig& config() const { return cfg_; }
  [[nodiscard]] const Table& bins() const { return bins_; }
  [[nodiscard]] std::size_t size() const { return bins_.size(); }

  // Prediction phase. Emits heading = c - yaw for a learned cell; otherwise
  // nothing, initializing the cell from a recent coarse heading when allowed.
  std::optional<HeadingSample> on_orientation(const OrientationSample& o) {
    if (last_orientation_t_ && o.t <= *last_orientation_t_) {
      throw NonMonotonicTime("oha: orientation time " + std::to_string(o.t) +
                             " not after " + std::to_string(*last_orientation_t_));
    }
    last_orientation_t_ = o.t;
    latest_orientation_ = o;

    const geom::BinKey key = key_of(o.attitude);
    auto it = bins_.find(key);
    if (it == bins_.end()) {
      if (cfg_.init_from_precise && last_precise_ && o.t - last_precise_->t <= cfg_.precise_hold) {
        bins_.emplace(key, BinState{geom::wrap360(last_precise_->heading + o.attitude.yaw), 1, o.t});
      } else if (last_coarse_ && o.t - last_coarse_->t <= cfg_.init_hold) {
        bins_.emplace(key, BinState{geom::wrap360(last_coarse_->heading + o.attitude.yaw), 1, o.t});
      }
      return std::nullopt;
    }
    last_precise_ = HeadingSample{o.t, geom::wrap360(it->second.c - o.attitude.yaw), HeadingKind::precise};
    return last_precise_;
  }

  // Learning phase. Initializes the cell on first sight; otherwise blends the
  // cell's prediction toward the coarse heading and recalibrates c.
  std::optional<HeadingSample> on_coarse_heading(const HeadingSample& h, const OrientationSample& o_latest) {
    if (last_coarse_t_ && h.t <= *last_coarse_t_) {
      throw NonMonotonicTime("oha: coarse heading time " + std::to_string(h.t) + " not after " +
                             std::to_string(*last_coarse_t_));
    }
    last_coarse_t_ = h.t;
    const double coarse = geom::wrap360(h.heading);
    if (cfg_.coarse_trust_gate && last_coarse_ &&
        std::abs(geom::angle_diff(last_coarse_->heading, coarse)) > *cfg_.coarse_trust_gate) {
      last_coarse_ = HeadingSample{h.t, coarse, HeadingKind::coarse};
      return std::nullopt;
    }
    last_coarse_ = HeadingSample{h.t, coarse, HeadingKind::coarse};

    const double yaw = o_latest.attitude.yaw;
    const geom::BinKey key = key_of(o_latest.attitude);
    auto it = bins_.find(key);
    if (it == bins_.end()) {
      bins_.emplace(key, BinState{geom::wrap360(coarse + yaw), 1, o_latest.t});
      return HeadingSample{h.t, coarse, HeadingKind::merged};
    }
    BinState& bin = it->second;
    const double predicted = geom::wrap360(bin.c - yaw);
    const double merged = geom::circular_blend(predicted, coarse, cfg_.alpha);
    bin.c = geom::wrap360(merged + yaw);
    bin.updates += 1;
    bin.last_t = o_latest.t;
    return HeadingSample{h.t, merged, HeadingKind::merged};
  }

  // Uses the most recent orientation passed to on_orientation.
  std::optional<HeadingSample> on_coarse_heading(const HeadingSample& h) {
    if (!latest_orientation_) return std::nullopt;
    return on_coarse_heading(h, *latest_orientation_);
  }

  // Forgets every learned cell and the stream position; keeps the config.
  void reset() {
    bins_.clear();
    last_orientation_t_.reset();
    last_coarse_t_.reset();
    last_coarse_.reset();
    last_precise_.reset();
    latest_orientation_.reset();
  }

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& [k, b] : bins_) {
      bins.push_back({{"roll_bin", k.roll_bin},
                      {"pitch_bin", k.pitch_bin},
                      {"c", b.c},
                      {"updates", b.updates},
                      {"last_t", b.last_t}});
    }
    return {{"q", cfg_.q},
            {"alpha", cfg_.alpha},
            {"init_hold", cfg_.init_hold},
            {"init_from_precise", cfg_.init_from_precise},
            {"precise_hold", cfg_.precise_hold},
            {"bins", std::move(bins)}};
  }

  [[nodiscard]] static OhaTracker from_json(const nlohmann::json& j) {
    OhaConfig cfg;
    cfg.q = j.at("q").get<int>();
    cfg.alpha = j.at("alpha").get<double>();
    cfg.init_hold = j.value("init_hold", cfg.init_hold);
    cfg.init_from_precise = j.value("init_from_precise", cfg.init_from_precise);
    cfg.precise_hold = j.value("precise_hold", cfg.precise_hold);
    OhaTracker t(cfg);
    for (const auto& b : j.at("bins")) {
      geom::BinKey key{b.at("roll_bin").get<int>(), b.at("pitch_bin").get<int>()};
      t.bins_[key] = BinState{b.at("c").get<double>(), b.at("updates").get<std::uint64_t>(),
                              b.at("last_t").get<double>()};
    }
    return t;
  }

 private:
  [[nodiscard]] geom::BinKey key_of(const geom::EulerAngles& a) const {
    return geom::quantize_rp(a.roll, a.pitch, cfg_.q);
  }

  OhaConfig cfg_;
  Table bins_;
  std::optional<double> last_orientation_t_;
  std::optional<double> last_coarse_t_;
  std::optional<HeadingSample> last_coarse_;
  std::optional<HeadingSample> last_precise_;
  std::optional<OrientationSample> latest_orientation_;
};

}  // namespace pedhat::oha
