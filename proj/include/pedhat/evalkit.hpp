#pragma once

// Evaluation: circular heading errors, alert/event overlap matching,
// time-to-crossing, n-sweeps over stored predictions, and CSV output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "pedhat/crossnet.hpp"
#include "pedhat/errors.hpp"
#include "pedhat/geom.hpp"
#include "pedhat/oha.hpp"
#include "pedhat/simkit.hpp"

namespace pedhat::eval {

struct HeadingErrorReport {
  std::size_t count = 0;
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  std::vector<double> cdf;  // sorted absolute errors

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"count", count}, {"mean", mean}, {"iqr", {q25, q75}}};
  }
};

// Linear-interpolated quantile of sorted values.
[[nodiscard]] inline double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

[[nodiscard]] inline HeadingErrorReport summarize_errors(std::vector<double> errors) {
  HeadingErrorReport r;
  std::sort(errors.begin(), errors.end());
  r.count = errors.size();
  if (!errors.empty()) {
    double s = 0.0;
    for (double e : errors) s += e;
    r.mean = s / static_cast<double>(errors.size());
    r.q25 = quantile(errors, 0.25);
    r.q75 = quantile(errors, 0.75);
  }
  r.cdf = std::move(errors);
  return r;
}

// Absolute circular error of each estimate against the truth sample nearest
// in time (within tol). Estimates without a close truth sample are skipped.
[[nodiscard]] inline std::vector<double> matched_errors(std::span<const oha::HeadingSample> est,
                                                        std::span<const oha::HeadingSample> truth, double tol = 0.1) {
  std::vector<double> out;
  if (truth.empty()) return out;
  for (const auto& e : est) {
    auto it = std::lower_bound(truth.begin(), truth.end(), e.t,
                               [](const oha::HeadingSample& s, double t) { return s.t < t; });
    const oha::HeadingSample* best = nullptr;
    if (it != truth.end()) best = &*it;
    if (it != truth.begin()) {
      const auto* prev = &*(it - 1);
      if (!best || std::abs(prev->t - e.t) <= std::abs(best->t - e.t)) best = prev;
    }
    if (best && std::abs(best->t - e.t) <= tol) out.push_back(std::abs(geom::angle_diff(best->heading, e.heading)));
  }
  return out;
}

[[nodiscard]] inline HeadingErrorReport heading_errors(std::span<const oha::HeadingSample> est,
                                                       std::span<const oha::HeadingSample> truth, double tol = 0.1) {
  auto errs = matched_errors(est, truth, tol);
  if (errs.empty()) throw NoOverlap("heading_errors: estimate and truth share no time span");
  return summarize_errors(std::move(errs));
}

[[nodiscard]] inline std::vector<oha::HeadingSample> truth_headings(const sim::Trajectory& traj) {
  std::vector<oha::HeadingSample> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) out.push_back({s.t, s.heading, oha::HeadingKind::precise});
  return out;
}

// Samples with t in [t0, t1].
[[nodiscard]] inline std::vector<oha::HeadingSample> slice(std::span<const oha::HeadingSample> s, double t0,
                                                           double t1) {
  std::vector<oha::HeadingSample> out;
  for (const auto& h : s) {
    if (h.t >= t0 && h.t <= t1) out.push_back(h);
  }
  return out;
}

// Lag (s) at which `lagged` best matches `reference` shifted later in time,
// scored by the mean cosine of the heading difference. Both series are
// interpolated along the shorter arc and compared on a grid of `resolution`
// seconds inside their spans.
[[nodiscard]] inline double xcorr_lag(std::span<const oha::HeadingSample> reference,
                                      std::span<const oha::HeadingSample> lagged, double max_lag,
                                      double resolution = 0.1) {
  if (reference.empty() || lagged.empty()) throw NoOverlap("xcorr_lag: empty series");
  auto interp = [](std::span<const oha::HeadingSample> s, double t) -> std::optional<double> {
    if (t < s.front().t || t > s.back().t) return std::nullopt;
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double x, const oha::HeadingSample& h) { return x < h.t; });
    if (it == s.end()) return s.back().heading;
    const auto& a = *(it - 1);
    const auto& b = *it;
    const double f = (t - a.t) / (b.t - a.t);
    return a.heading + f * geom::angle_diff(a.heading, b.heading);
  };
  const double t0 = lagged.front().t, t1 = lagged.back().t;
  double best_lag = 0.0, best_score = -std::numeric_limits<double>::infinity();
  const long steps = std::lround(max_lag / resolution);
  for (long k = 0; k <= steps; ++k) {
    const double lag = static_cast<double>(k) * resolution;
    double sum = 0.0;
    long n = 0;
    for (double t = t0; t <= t1 + 1e-9; t += resolution) {
      const auto a = interp(lagged, t);
      const auto b = interp(reference, t - lag);
      if (!a || !b) continue;
      sum += std::cos(geom::deg2rad(*a - *b));
      ++n;
    }
    if (n == 0) continue;
    const double score = sum / static_cast<double>(n);
    if (score > best_score + 1e-12) {
      best_score = score;
      best_lag = lag;
    }
  }
  return best_lag;
}

// ---------------------------------------------------------------------------
// Events

struct MatchedPair {
  net::AlertPeriod alert;
  sim::CrossingEvent event;
};

struct EventMatchReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  std::vector<MatchedPair> pairs;

  [[nodiscard]] std::optional<double> precision() const {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  [[nodiscard]] std::optional<double> recall() const {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
};

// Greedy one-to-one matching: alerts in start order each claim the
// earliest-starting unclaimed event whose [start_t, center_t] window they
// overlap.
[[nodiscard]] inline EventMatchReport match_events(std::vector<net::AlertPeriod> alerts,
                                                   std::vector<sim::CrossingEvent> events) {
  auto by_alert = [](const net::AlertPeriod& a, const net::AlertPeriod& b) {
    return std::pair(a.start, a.end) < std::pair(b.start, b.end);
  };
  auto by_event = [](const sim::CrossingEvent& a, const sim::CrossingEvent& b) {
    return std::tuple(a.start_t, a.center_t, a.edge_t, a.road_id) <
           std::tuple(b.start_t, b.center_t, b.edge_t, b.road_id);
  };
  std::sort(alerts.begin(), alerts.end(), by_alert);
  std::sort(events.begin(), events.end(), by_event);
  EventMatchReport r;
  std::vector<bool> taken(events.size(), false);
  for (const auto& a : alerts) {
    bool matched = false;
    for (std::size_t k = 0; k < events.size(); ++k) {
      if (taken[k]) continue;
      const auto& e = events[k];
      if (a.start <= e.center_t && e.start_t <= a.end) {
        taken[k] = true;
        r.pairs.push_back({a, e});
        ++r.tp;
        matched = true;
        break;
      }
    }
    if (!matched) ++r.fp;
  }
  for (bool t : taken) r.fn += t ? 0 : 1;
  return r;
}

struct TtcReport {
  std::vector<double> ttc;
  std::optional<double> mean;
};

[[nodiscard]] inline TtcReport ttc(std::span<const MatchedPair> pairs) {
  TtcReport r;
  double s = 0.0;
  for (const auto& p : pairs) {
    r.ttc.push_back(p.event.edge_t - p.alert.start);
    s += r.ttc.back();
  }
  if (!r.ttc.empty()) r.mean = s / static_cast<double>(r.ttc.size());
  return r;
}

// Stored predictions of one session.
struct PredictionTrack {
  std::vector<double> t;
  std::vector<bool> pred;
  std::vector<sim::CrossingEvent> events;
};

struct Scores {
  std::size_t tp = 0, fp = 0, fn = 0;
  std::optional<double> macro_precision, macro_recall;
  std::optional<double> pooled_precision, pooled_recall;
  std::optional<double> mean_ttc;
  std::vector<double> ttcs;

  [[nodiscard]] nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"tp", tp},
            {"fp", fp},
            {"fn", fn},
            {"precision", opt(macro_precision)},
            {"recall", opt(macro_recall)},
            {"pooled_precision", opt(pooled_precision)},
            {"pooled_recall", opt(pooled_recall)},
            {"mean_ttc", opt(mean_ttc)}};
  }
};

// Macro averages skip sessions where the ratio is undefined.
[[nodiscard]] inline Scores score_sessions(std::span<const PredictionTrack> tracks, int n, double threshold) {
  Scores s;
  double psum = 0.0, rsum = 0.0, tsum = 0.0;
  std::size_t pn = 0, rn = 0;
  for (const auto& tr : tracks) {
    const auto alerts = net::alert_periods(tr.t, tr.pred, n, threshold);
    const auto m = match_events(alerts, tr.events);
    s.tp += m.tp;
    s.fp += m.fp;
    s.fn += m.fn;
    if (auto p = m.precision()) psum += *p, ++pn;
    if (auto r = m.recall()) rsum += *r, ++rn;
    for (double v : ttc(m.pairs).ttc) {
      s.ttcs.push_back(v);
      tsum += v;
    }
  }
  if (pn > 0) s.macro_precision = psum / static_cast<double>(pn);
  if (rn > 0) s.macro_recall = rsum / static_cast<double>(rn);
  if (s.tp + s.fp > 0) s.pooled_precision = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp);
  if (s.tp + s.fn > 0) s.pooled_recall = static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn);
  if (!s.ttcs.empty()) s.mean_ttc = tsum / static_cast<double>(s.ttcs.size());
  return s;
}

struct SweepRow {
  int n = 0;
  Scores scores;
};

[[nodiscard]] inline std::vector<SweepRow> sweep_n(std::span<const PredictionTrack> tracks,
                                                   std::span<const int> n_values, double threshold = 0.5) {
  std::vector<SweepRow> rows;
  for (int n : n_values) rows.push_back({n, score_sessions(tracks, n, threshold)});
  return rows;
}

[[nodiscard]] inline std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

[[nodiscard]] inline std::string sweep_csv(std::span<const SweepRow> rows) {
  std::string s = "n,precision,recall,pooled_precision,pooled_recall,mean_ttc,tp,fp,fn\n";
  for (const auto& r : rows) {
    const auto& c = r.scores;
    s += std::to_string(r.n) + "," + fmt_opt(c.macro_precision) + "," + fmt_opt(c.macro_recall) + "," +
         fmt_opt(c.pooled_precision) + "," + fmt_opt(c.pooled_recall) + "," + fmt_opt(c.mean_ttc) + "," +
         std::to_string(c.tp) + "," + std::to_string(c.fp) + "," + std::to_string(c.fn) + "\n";
  }
  return s;
}

// Two-column CDF: absolute error, cumulative fraction.
[[nodiscard]] inline std::string cdf_csv(std::span<const double> sorted) {
  std::string s = "error_deg,fraction\n";
  char buf[64];
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", sorted[i],
                  static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
    s += buf;
  }
  return s;
}

}  // namespace pedhat::eval
