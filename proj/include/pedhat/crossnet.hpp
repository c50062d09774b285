#pragma once

// Crossing prediction: feature windows, a dual-branch LSTM classifier with
// analytic backpropagation, Adam training, the alert decider, and the
// active/idle mode controller.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pedhat/errors.hpp"
#include "pedhat/geom.hpp"
#include "pedhat/oha.hpp"
#include "pedhat/rng.hpp"
#include "pedhat/roads.hpp"

namespace pedhat::net {

struct ModelConfig {
  int N = 80;              // window length in steps
  double lookback = 8.0;   // s
  int hidden = 16;         // units per branch
  double step = 0.1;       // s between predictions
  double d_scale = 1.0 / 30.0;

  void validate() const {
    if (N < 1) throw InvalidArgument("model: N must be positive");
    if (hidden < 1) throw InvalidArgument("model: hidden must be positive");
    if (step <= 0.0) throw InvalidArgument("model: step must be positive");
    if (std::abs(lookback / step - N) > 1e-6) throw InvalidArgument("model: N must equal lookback / step");
  }

  // Config with N derived from lookback and step.
  [[nodiscard]] static ModelConfig with_lookback(double lookback, double step = 0.1, int hidden = 16) {
    ModelConfig c;
    c.lookback = lookback;
    c.step = step;
    c.hidden = hidden;
    c.N = static_cast<int>(std::lround(lookback / step));
    return c;
  }
};

struct FeatureWindow {
  std::vector<double> d_seq;  // m
  std::vector<double> h_seq;  // cos(theta_ref - heading)
  double t_end = 0.0;
};

// Flat parameter vector. Per branch: Wx[4H], Wh[4H x H] row-major, b[4H];
// gate order i, f, g, o. Then the head: w[2H] over [h_dist; h_head], b.
class ModelWeights {
 public:
  static constexpr int kVersion = 1;

  ModelWeights() = default;
  explicit ModelWeights(const ModelConfig& cfg) : cfg_(cfg), p_(size_for(cfg.hidden), 0.0) {}

  [[nodiscard]] static std::size_t branch_size(int h) { return static_cast<std::size_t>(4 * h + 4 * h * h + 4 * h); }
  [[nodiscard]] static std::size_t size_for(int h) { return 2 * branch_size(h) + static_cast<std::size_t>(2 * h + 1); }

  [[nodiscard]] const ModelConfig& config() const { return cfg_; }
  [[nodiscard]] int hidden() const { return cfg_.hidden; }
  [[nodiscard]] std::vector<double>& params() { return p_; }
  [[nodiscard]] const std::vector<double>& params() const { return p_; }

  [[nodiscard]] std::size_t wx(int branch) const { return static_cast<std::size_t>(branch) * branch_size(hidden()); }
  [[nodiscard]] std::size_t wh(int branch) const { return wx(branch) + static_cast<std::size_t>(4 * hidden()); }
  [[nodiscard]] std::size_t bias(int branch) const {
    return wh(branch) + static_cast<std::size_t>(4 * hidden() * hidden());
  }
  [[nodiscard]] std::size_t head() const { return 2 * branch_size(hidden()); }
  [[nodiscard]] std::size_t head_bias() const { return head() + static_cast<std::size_t>(2 * hidden()); }

  // Uniform(+-1/sqrt(H)) weights, zero biases except the forget gate at 1.
  [[nodiscard]] static ModelWeights init(const ModelConfig& cfg, std::uint64_t seed) {
    ModelWeights w(cfg);
    Rng rng = Rng::derive(seed, 7);
    const double a = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
    const int h = cfg.hidden;
    for (int br = 0; br < 2; ++br) {
      for (std::size_t i = w.wx(br); i < w.bias(br); ++i) w.p_[i] = rng.uniform(-a, a);
      for (int j = 0; j < h; ++j) w.p_[w.bias(br) + static_cast<std::size_t>(h + j)] = 1.0;
    }
    for (std::size_t i = w.head(); i < w.head_bias(); ++i) w.p_[i] = rng.uniform(-a, a);
    return w;
  }

  [[nodiscard]] nlohmann::json to_json() const {
    return {{"format", "pedhat-crossnet"},
            {"version", kVersion},
            {"config",
             {{"N", cfg_.N}, {"lookback", cfg_.lookback}, {"hidden", cfg_.hidden}, {"step", cfg_.step}}},
            {"normalization", {{"d_scale", cfg_.d_scale}}},
            {"gate_order", "ifgo"},
            {"params", p_}};
  }

  [[nodiscard]] static ModelWeights from_json(const nlohmann::json& j) {
    try {
      if (j.at("version").get<int>() != kVersion) throw ParseError("weights: unsupported version");
      ModelConfig cfg;
      const auto& c = j.at("config");
      cfg.N = c.at("N").get<int>();
      cfg.lookback = c.at("lookback").get<double>();
      cfg.hidden = c.at("hidden").get<int>();
      cfg.step = c.at("step").get<double>();
      cfg.d_scale = j.at("normalization").at("d_scale").get<double>();
      cfg.validate();
      ModelWeights w(cfg);
      auto p = j.at("params").get<std::vector<double>>();
      if (p.size() != w.p_.size()) {
        throw ShapeMismatch("weights: expected " + std::to_string(w.p_.size()) + " params, found " +
                            std::to_string(p.size()));
      }
      w.p_ = std::move(p);
      return w;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("weights: ") + e.what());
    }
  }

 private:
  ModelConfig cfg_;
  std::vector<double> p_;
};

namespace detail {

[[nodiscard]] inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Logistic function in place. The values pass through a padded, aligned
// buffer so each one takes the same vectorized path wherever the caller's
// data sits in memory; otherwise results would vary with heap alignment.
inline void sigmoid_inplace(double* v, int n) {
  thread_local std::vector<double, Eigen::aligned_allocator<double>> buf;
  const int padded = (n + 7) / 8 * 8;
  buf.assign(static_cast<std::size_t>(padded), 0.0);
  std::copy(v, v + n, buf.begin());
  Eigen::Map<Eigen::ArrayXd, Eigen::AlignedMax> a(buf.data(), padded);
  a = 1.0 / (1.0 + (-a).exp());
  std::copy(buf.begin(), buf.begin() + n, v);
}

// Per-step activations of one branch, kept for backpropagation.
struct BranchTrace {
  int H = 0;
  std::vector<double> x;                    // T inputs
  std::vector<double> i, f, g, o, c, tc, h; // T x H each; no initial state
  std::vector<double> wht;                  // Wh transposed, H x 4H
  std::vector<double> z;
};

inline void run_branch(const ModelWeights& w, int br, std::span<const double> xs, double scale, BranchTrace& tr) {
  const int H = w.hidden();
  const int G = 4 * H;
  const auto T = xs.size();
  const auto& p = w.params();
  const double* wx = p.data() + w.wx(br);
  const double* wh = p.data() + w.wh(br);
  const double* b = p.data() + w.bias(br);
  tr.H = H;
  tr.x.resize(T);
  for (auto* v : {&tr.i, &tr.f, &tr.g, &tr.o, &tr.c, &tr.tc, &tr.h}) v->resize(T * static_cast<std::size_t>(H));
  tr.wht.resize(static_cast<std::size_t>(G * H));
  for (int r = 0; r < G; ++r) {
    for (int k = 0; k < H; ++k) tr.wht[static_cast<std::size_t>(k * G + r)] = wh[static_cast<std::size_t>(r * H + k)];
  }
  tr.z.resize(static_cast<std::size_t>(G));
  double* z = tr.z.data();
  for (std::size_t t = 0; t < T; ++t) {
    const double x = xs[t] * scale;
    tr.x[t] = x;
    for (int r = 0; r < G; ++r) z[r] = b[r] + wx[r] * x;
    if (t > 0) {
      const double* hp = tr.h.data() + (t - 1) * H;
      for (int k = 0; k < H; ++k) {
        const double hk = hp[k];
        const double* col = tr.wht.data() + static_cast<std::size_t>(k * G);
        for (int r = 0; r < G; ++r) z[r] += col[r] * hk;
      }
    }
    // Gates as one vector op; tanh(x) = 2 sigmoid(2x) - 1.
    for (int r = 2 * H; r < 3 * H; ++r) z[r] *= 2.0;
    sigmoid_inplace(z, G);
    for (int r = 2 * H; r < 3 * H; ++r) z[r] = 2.0 * z[r] - 1.0;
    const std::size_t off = t * H;
    for (int j = 0; j < H; ++j) {
      const double ig = z[j], fg = z[H + j], gg = z[2 * H + j], og = z[3 * H + j];
      const double cp = t > 0 ? tr.c[off - H + j] : 0.0;
      tr.i[off + j] = ig;
      tr.f[off + j] = fg;
      tr.g[off + j] = gg;
      tr.o[off + j] = og;
      tr.c[off + j] = fg * cp + ig * gg;
    }
    double* tc = tr.tc.data() + off;
    for (int j = 0; j < H; ++j) tc[j] = 2.0 * tr.c[off + j];
    sigmoid_inplace(tc, H);
    for (int j = 0; j < H; ++j) {
      tc[j] = 2.0 * tc[j] - 1.0;
      tr.h[off + j] = tr.o[off + j] * tc[j];
    }
  }
}

// Accumulates d(loss)/d(params) of one branch into grad, given d(loss)/d(h_T).
inline void backprop_branch(const ModelWeights& w, int br, const BranchTrace& tr, std::span<const double> dh_last,
                            std::vector<double>& grad) {
  const int H = tr.H;
  const int G = 4 * H;
  const auto T = tr.x.size();
  if (T == 0) return;
  const auto& p = w.params();
  const double* wh = p.data() + w.wh(br);
  double* gwx = grad.data() + w.wx(br);
  double* gwh = grad.data() + w.wh(br);
  double* gb = grad.data() + w.bias(br);

  thread_local std::vector<double> dh, dc, dz;
  dh.assign(dh_last.begin(), dh_last.end());
  dc.assign(static_cast<std::size_t>(H), 0.0);
  dz.resize(static_cast<std::size_t>(G));
  for (std::size_t t = T; t-- > 0;) {
    const std::size_t off = t * H;
    for (int j = 0; j < H; ++j) {
      const double tc = tr.tc[off + j];
      const double og = tr.o[off + j], ig = tr.i[off + j], fg = tr.f[off + j], gg = tr.g[off + j];
      const double cp = t > 0 ? tr.c[off - H + j] : 0.0;
      const double dcj = dc[j] + dh[j] * og * (1.0 - tc * tc);
      dz[j] = dcj * gg * ig * (1.0 - ig);
      dz[H + j] = dcj * cp * fg * (1.0 - fg);
      dz[2 * H + j] = dcj * ig * (1.0 - gg * gg);
      dz[3 * H + j] = dh[j] * tc * og * (1.0 - og);
      dc[j] = dcj * fg;
    }
    const double x = tr.x[t];
    for (int r = 0; r < G; ++r) {
      gwx[r] += dz[r] * x;
      gb[r] += dz[r];
    }
    if (t > 0) {
      const double* hp = tr.h.data() + off - H;
      for (int r = 0; r < G; ++r) {
        double* row = gwh + static_cast<std::size_t>(r) * H;
        const double d = dz[r];
        for (int k = 0; k < H; ++k) row[k] += d * hp[k];
      }
      std::fill(dh.begin(), dh.end(), 0.0);
      for (int r = 0; r < G; ++r) {
        const double* row = wh + static_cast<std::size_t>(r) * H;
        const double d = dz[r];
        for (int k = 0; k < H; ++k) dh[k] += row[k] * d;
      }
    }
  }
}

inline void check_shape(const ModelWeights& w, const FeatureWindow& f) {
  if (w.params().size() != ModelWeights::size_for(w.hidden())) throw ShapeMismatch("model: parameter count");
  if (f.d_seq.size() != f.h_seq.size()) throw ShapeMismatch("window: d_seq and h_seq lengths differ");
  if (f.d_seq.size() != static_cast<std::size_t>(w.config().N)) {
    throw ShapeMismatch("window: length " + std::to_string(f.d_seq.size()) + " but model expects N=" +
                        std::to_string(w.config().N));
  }
}

}  // namespace detail

// Pre-sigmoid output.
[[nodiscard]] inline double forward_logit(const ModelWeights& w, const FeatureWindow& f) {
  detail::check_shape(w, f);
  thread_local detail::BranchTrace td, th;
  detail::run_branch(w, 0, f.d_seq, w.config().d_scale, td);
  detail::run_branch(w, 1, f.h_seq, 1.0, th);
  const int H = w.hidden();
  const auto& p = w.params();
  double z = p[w.head_bias()];
  const std::size_t last = (f.d_seq.size() - 1) * H;
  for (int j = 0; j < H; ++j) {
    z += p[w.head() + j] * td.h[last + j];
    z += p[w.head() + H + j] * th.h[last + j];
  }
  return z;
}

[[nodiscard]] inline double forward(const ModelWeights& w, const FeatureWindow& f) {
  return detail::sigmoid(forward_logit(w, f));
}

// Binary cross-entropy computed from the logit.
[[nodiscard]] inline double bce_from_logit(double z, bool y) {
  return std::max(z, 0.0) - (y ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
}

// Loss of one example and its gradient, accumulated into grad (scaled by
// `weight`). Returns the unscaled loss.
inline double loss_and_grad(const ModelWeights& w, const FeatureWindow& f, bool y, std::vector<double>& grad,
                            double weight = 1.0) {
  detail::check_shape(w, f);
  thread_local detail::BranchTrace td, th;
  detail::run_branch(w, 0, f.d_seq, w.config().d_scale, td);
  detail::run_branch(w, 1, f.h_seq, 1.0, th);
  const int H = w.hidden();
  const auto& p = w.params();
  const std::size_t last = (f.d_seq.size() - 1) * H;
  double z = p[w.head_bias()];
  for (int j = 0; j < H; ++j) z += p[w.head() + j] * td.h[last + j] + p[w.head() + H + j] * th.h[last + j];
  const double loss = bce_from_logit(z, y);
  const double dz = weight * (detail::sigmoid(z) - (y ? 1.0 : 0.0));

  std::vector<double> dh_d(static_cast<std::size_t>(H)), dh_h(static_cast<std::size_t>(H));
  for (int j = 0; j < H; ++j) {
    grad[w.head() + j] += dz * td.h[last + j];
    grad[w.head() + H + j] += dz * th.h[last + j];
    dh_d[j] = dz * p[w.head() + j];
    dh_h[j] = dz * p[w.head() + H + j];
  }
  grad[w.head_bias()] += dz;
  detail::backprop_branch(w, 0, td, dh_d, grad);
  detail::backprop_branch(w, 1, th, dh_h, grad);
  return loss;
}

struct Example {
  FeatureWindow window;
  bool label = false;
};

struct TrainConfig {
  int max_epochs = 30;
  int patience = 3;
  int batch = 256;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double val_fraction = 0.1;
  double pos_weight = 1.0;  // loss weight of positive examples
};

struct EpochRow {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochRow&)>;

struct TrainReport {
  std::vector<EpochRow> epochs;
  int best_epoch = 0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  double positive_fraction = 0.0;
  bool single_class = false;
  std::vector<std::string> warnings;

  [[nodiscard]] std::string to_csv() const {
    std::string s = "epoch,train_loss,val_loss\n";
    char buf[96];
    for (const auto& r : epochs) {
      std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", r.epoch, r.train_loss, r.val_loss);
      s += buf;
    }
    return s;
  }
};

struct TrainResult {
  ModelWeights weights;
  TrainReport report;
};

[[nodiscard]] inline double mean_loss(const ModelWeights& w, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : data) s += bce_from_logit(forward_logit(w, e.window), e.label);
  return s / static_cast<double>(data.size());
}

// Adam on BCE over contiguous, unshuffled batches. The final val_fraction of
// the (temporally ordered) data is held out for early stopping; the weights
// of the best validation epoch are returned.
[[nodiscard]] inline TrainResult train(std::span<const Example> data, const ModelConfig& cfg,
                                       const TrainConfig& tc, std::uint64_t seed,
                                       const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (data.empty()) throw EmptyDataset("train: dataset is empty");
  TrainResult out{ModelWeights::init(cfg, seed), {}};
  TrainReport& rep = out.report;

  std::size_t pos = 0;
  for (const auto& e : data) pos += e.label ? 1 : 0;
  rep.positive_fraction = static_cast<double>(pos) / static_cast<double>(data.size());
  rep.single_class = pos == 0 || pos == data.size();
  if (rep.single_class) rep.warnings.emplace_back("SingleClassDataset: all labels are identical");

  std::size_t n_val = static_cast<std::size_t>(std::floor(tc.val_fraction * static_cast<double>(data.size())));
  if (data.size() > 1) n_val = std::max<std::size_t>(n_val, 1);
  if (n_val >= data.size()) n_val = 0;
  const std::size_t n_train = data.size() - n_val;
  rep.n_train = n_train;
  rep.n_val = n_val;
  const auto train_set = data.first(n_train);
  const auto val_set = data.subspan(n_train);

  ModelWeights& w = out.weights;
  std::vector<double>& p = w.params();
  std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0), g(p.size());
  long step = 0;
  ModelWeights best = w;
  double best_val = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const std::size_t batch = static_cast<std::size_t>(std::max(tc.batch, 1));

  for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t b0 = 0; b0 < n_train; b0 += batch) {
      const std::size_t b1 = std::min(n_train, b0 + batch);
      std::fill(g.begin(), g.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(b1 - b0);
      for (std::size_t i = b0; i < b1; ++i) {
        const auto& e = train_set[i];
        const double wgt = e.label ? tc.pos_weight : 1.0;
        loss_sum += loss_and_grad(w, e.window, e.label, g, scale * wgt);
      }
      ++step;
      const double c1 = 1.0 - std::pow(tc.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(tc.beta2, static_cast<double>(step));
      for (std::size_t k = 0; k < p.size(); ++k) {
        m[k] = tc.beta1 * m[k] + (1.0 - tc.beta1) * g[k];
        v[k] = tc.beta2 * v[k] + (1.0 - tc.beta2) * g[k] * g[k];
        p[k] -= tc.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + tc.eps);
      }
    }
    EpochRow row{epoch, loss_sum / static_cast<double>(n_train), 0.0};
    row.val_loss = n_val > 0 ? mean_loss(w, val_set) : row.train_loss;
    rep.epochs.push_back(row);
    if (on_epoch) on_epoch(row);
    if (row.val_loss < best_val) {
      best_val = row.val_loss;
      best = w;
      rep.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= tc.patience) {
      break;
    }
  }
  out.weights = std::move(best);
  return out;
}

// ---------------------------------------------------------------------------
// Alerts and running modes

struct AlertTransition {
  enum class Kind { start, end } kind = Kind::start;
  double t = 0.0;
};

// Fires while the true predictions among the last n strictly exceed
// threshold * n.
class AlertDecider {
 public:
  explicit AlertDecider(int n = 20, double threshold = 0.5) : n_(n), threshold_(threshold) {
    if (n < 1) throw InvalidArgument("alert: n must be positive");
    if (threshold < 0.0 || threshold > 1.0) throw InvalidArgument("alert: threshold must lie in [0, 1]");
  }

  std::optional<AlertTransition> step(bool prediction, double t) {
    history_.push_back(prediction);
    count_ += prediction ? 1 : 0;
    if (static_cast<int>(history_.size()) > n_) {
      count_ -= history_.front() ? 1 : 0;
      history_.pop_front();
    }
    const bool now = static_cast<double>(count_) > threshold_ * n_;
    if (now == active_) return std::nullopt;
    active_ = now;
    if (now) {
      alert_start_t_ = t;
      return AlertTransition{AlertTransition::Kind::start, t};
    }
    return AlertTransition{AlertTransition::Kind::end, t};
  }

  [[nodiscard]] bool active() const { return active_; }
  [[nodiscard]] std::optional<double> alert_start_t() const {
    return active_ ? alert_start_t_ : std::optional<double>{};
  }
  [[nodiscard]] int count() const { return count_; }
  [[nodiscard]] std::size_t history_size() const { return history_.size(); }
  [[nodiscard]] int n() const { return n_; }

 private:
  int n_;
  double threshold_;
  std::deque<bool> history_;
  int count_ = 0;
  bool active_ = false;
  std::optional<double> alert_start_t_;
};

struct AlertPeriod {
  double start = 0.0;
  double end = 0.0;
};

// Alert periods from a prediction sequence; an alert still active at the
// end closes at the last timestamp.
[[nodiscard]] inline std::vector<AlertPeriod> alert_periods(std::span<const double> times, const std::vector<bool>& preds,
                                                            int n, double threshold) {
  if (times.size() != preds.size()) throw ShapeMismatch("alert_periods: length mismatch");
  AlertDecider dec(n, threshold);
  std::vector<AlertPeriod> out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (auto tr = dec.step(preds[i], times[i])) {
      if (tr->kind == AlertTransition::Kind::start) {
        out.push_back({tr->t, tr->t});
      } else {
        out.back().end = tr->t;
      }
    }
  }
  if (dec.active()) out.back().end = times.back();
  return out;
}

enum class Mode { active, idle };

[[nodiscard]] inline std::string to_string(Mode m) { return m == Mode::active ? "active" : "idle"; }

struct ModeConfig {
  double idle_distance = 10.0;  // m
  double idle_after = 60.0;     // s without movement
  double move_speed = 0.2;      // m/s
};

struct ModeState {
  Mode mode = Mode::active;
  double last_move_t = 0.0;
  double dist_to_road = 0.0;
};

[[nodiscard]] inline ModeState mode_controller(const ModeState& s, double dist, double speed, double t,
                                               const ModeConfig& cfg = {}) {
  ModeState n = s;
  n.dist_to_road = dist;
  if (speed > cfg.move_speed) n.last_move_t = t;
  n.mode = (dist > cfg.idle_distance || t - n.last_move_t > cfg.idle_after) ? Mode::idle : Mode::active;
  return n;
}

// ---------------------------------------------------------------------------
// Features

struct RoadObservation {
  double t = 0.0;
  double d = 0.0;
  double theta_ref = 0.0;
};

[[nodiscard]] inline std::vector<RoadObservation> road_observations(std::span<const roads::RoadSample> samples) {
  std::vector<RoadObservation> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back({s.t, s.result.d, s.result.theta_ref});
  return out;
}

// One window per step once both streams have started and N ticks exist.
// Both inputs are held (zero-order) between updates. An empty heading stream
// yields all-zero heading features (distance-only baseline).
[[nodiscard]] inline std::vector<FeatureWindow> extract_features(std::span<const oha::HeadingSample> headings,
                                                                 std::span<const RoadObservation> road,
                                                                 const ModelConfig& cfg, double t_begin,
                                                                 double t_end, bool use_heading = true) {
  cfg.validate();
  std::vector<FeatureWindow> out;
  if (road.empty()) return out;
  const bool headless = !use_heading;
  if (!headless && headings.empty()) return out;
  std::deque<double> dq, hq;
  std::size_t ih = 0, ir = 0;
  for (long k = 0;; ++k) {
    const double t = t_begin + static_cast<double>(k) * cfg.step;
    if (t > t_end + 1e-9) break;
    while (ih < headings.size() && headings[ih].t <= t + 1e-9) ++ih;
    while (ir < road.size() && road[ir].t <= t + 1e-9) ++ir;
    if (ir == 0 || (!headless && ih == 0)) continue;
    const RoadObservation& r = road[ir - 1];
    const double h = headless ? 0.0 : std::cos(geom::deg2rad(r.theta_ref - headings[ih - 1].heading));
    dq.push_back(r.d);
    hq.push_back(std::clamp(h, -1.0, 1.0));
    if (static_cast<int>(dq.size()) > cfg.N) {
      dq.pop_front();
      hq.pop_front();
    }
    if (static_cast<int>(dq.size()) == cfg.N) {
      out.push_back({std::vector<double>(dq.begin(), dq.end()), std::vector<double>(hq.begin(), hq.end()), t});
    }
  }
  return out;
}

}  // namespace pedhat::net
