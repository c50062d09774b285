// pedhat: simulate sessions, track headings, train and run the crossing
// predictor, and score the results. Every command writes into --out and
// leaves a manifest.json there.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pedhat/config.hpp"
#include "pedhat/crossnet.hpp"
#include "pedhat/errors.hpp"
#include "pedhat/evalkit.hpp"
#include "pedhat/io.hpp"
#include "pedhat/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pedhat;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool json_errors = false;

  std::string session;  // track: session dir or root
  std::string data;     // train / predict / eval: session root
  std::string weights;
  std::string predictions;
  std::string headings;

  std::optional<std::string> method;
  std::optional<std::string> attitude;
  std::optional<std::string> heading_source;
  std::optional<double> lookback;
  std::optional<int> n;
  std::optional<double> threshold;
  std::optional<int> q;
  std::optional<double> alpha;
  std::string sweep_n;
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first failure by
// index is rethrown once all workers stop.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto k = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (k == 1 || n < 2) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(k, n); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Manifest {
 public:
  Manifest(std::string command, const Options& o, std::uint64_t seed) : started_(utc_now()) {
    j_["command"] = std::move(command);
    j_["seed"] = seed;
    j_["toolkit_version"] = kVersion;
    j_["config"] = o.config.empty() ? json(nullptr) : json(o.config);
    j_["config_digest"] = o.config.empty() ? json(nullptr) : json(fnv1a(io::read_text(o.config)));
    json inputs = json::array();
    for (const auto* p : {&o.session, &o.data, &o.weights, &o.predictions, &o.headings}) {
      if (!p->empty()) inputs.push_back(*p);
    }
    j_["inputs"] = inputs;
  }

  void set(const std::string& key, json v) { j_[key] = std::move(v); }

  // Lists every file under `out` (relative, sorted) and writes the manifest.
  void write(const fs::path& out) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), out).generic_string();
      if (rel != "manifest.json") files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    j_["outputs"] = files;
    j_["started_at"] = started_;
    j_["finished_at"] = utc_now();
    io::write_json(out / "manifest.json", j_);
  }

 private:
  std::string started_;
  json j_;
};

config::Config load_config(const Options& o, bool require_scenarios = false) {
  json j = json::object();
  if (!o.config.empty()) j = io::read_json(o.config);
  if (require_scenarios && (!j.is_object() || !j.contains("scenarios"))) {
    throw ConfigError("missing required key 'scenarios'");
  }
  config::Config c = config::parse(j, o.seed);
  if (o.q) {
    if (*o.q < 1) throw InvalidArgument("--q must be positive");
    c.track.oha.q = *o.q;
  }
  if (o.alpha) {
    if (*o.alpha < 0.0 || *o.alpha > 1.0) throw InvalidArgument("--alpha must lie in [0, 1]");
    c.track.oha.alpha = *o.alpha;
  }
  if (o.attitude) c.track.source = pipeline::attitude_source_from_string(*o.attitude);
  if (o.method) c.method = *o.method;
  if (o.heading_source) c.heading_source = pipeline::heading_source_from_string(*o.heading_source);
  if (o.lookback) {
    c.model = net::ModelConfig::with_lookback(*o.lookback, c.model.step, c.model.hidden);
    c.model.validate();
  }
  if (o.n) c.alert.n = *o.n;
  if (o.threshold) c.alert.threshold = *o.threshold;
  if (c.alert.n < 1) throw InvalidArgument("--n must be positive");
  if (c.alert.threshold < 0.0 || c.alert.threshold > 1.0) throw InvalidArgument("--threshold must lie in [0, 1]");
  return c;
}

fs::path prepare_out(const Options& o) {
  if (o.out.empty()) throw InvalidArgument("--out is required");
  const fs::path out(o.out);
  fs::create_directories(out);
  return out;
}

std::string csv_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// simulate

void cmd_simulate(const Options& o) {
  const auto cfg = load_config(o, true);
  if (cfg.scenarios.empty()) throw ConfigError("'scenarios' must not be empty");
  const fs::path out = prepare_out(o);
  parallel_for(cfg.scenarios.size(), o.jobs, [&](std::size_t i) {
    const auto& spec = cfg.scenarios[i];
    const auto s = pipeline::simulate(spec);
    io::save_session(out / spec.name, s, io::describe(spec));
  });
  Manifest m("simulate", o, cfg.seed);
  json names = json::array();
  for (const auto& s : cfg.scenarios) names.push_back(s.name);
  m.set("sessions", names);
  m.write(out);
}

// ---------------------------------------------------------------------------
// track

std::vector<oha::HeadingSample> track_session(const pipeline::Session& s, const config::Config& cfg,
                                              const std::string& method, oha::OhaTracker* table) {
  using pipeline::AttitudeSource;
  const bool truth_att = cfg.track.source == AttitudeSource::truth;
  if (truth_att && s.attitude.size() != s.imu.size()) {
    throw ParseError("session '" + s.name + "': --attitude truth needs attitude.jsonl matching imu.jsonl");
  }
  if (method == "gps") return pipeline::track_gps(s.gps, cfg.track.bearing);
  if (method == "oha") {
    const auto orient = truth_att ? pipeline::orientations(s.imu, s.attitude)
                                  : pipeline::orientations(pipeline::estimate_attitude(s.imu, cfg.track.filter));
    return pipeline::track_oha(orient, s.gps, cfg.track, table);
  }
  if (method == "ig") {
    std::vector<std::optional<att::AttitudeEstimate>> est;
    if (truth_att) {
      for (std::size_t i = 0; i < s.imu.size(); ++i) est.emplace_back(att::AttitudeEstimate::from_euler(s.imu[i].t, s.attitude[i]));
    } else {
      est = pipeline::estimate_attitude(s.imu, cfg.track.filter);
    }
    // Start from the true heading when known, else the first GPS bearing.
    double h0 = 0.0;
    if (!s.traj.samples.empty()) {
      h0 = s.traj.samples.front().heading;
    } else if (const auto b = att::gps_bearings(s.gps, cfg.track.bearing); !b.empty()) {
      h0 = b.front().heading;
    }
    return pipeline::track_ig(s.imu, est, h0);
  }
  throw InvalidArgument("unknown method '" + method + "' (expected oha, ig or gps)");
}

struct ErrorRow {
  std::string session;
  std::optional<eval::HeadingErrorReport> report;
};

// errors.csv, cdf.csv and the JSON summary over per-session heading errors.
json write_error_reports(const fs::path& out, const std::vector<ErrorRow>& rows, const std::string& method) {
  std::string csv = "session,method,count,mean,q25,q75\n";
  std::vector<double> pooled;
  json per = json::object();
  for (const auto& r : rows) {
    if (!r.report) {
      csv += r.session + "," + method + ",0,,,\n";
      per[r.session] = {{"count", 0}, {"mean", nullptr}, {"iqr", nullptr}};
      continue;
    }
    const auto& e = *r.report;
    csv += r.session + "," + method + "," + std::to_string(e.count) + "," + csv_num(e.mean) + "," + csv_num(e.q25) +
           "," + csv_num(e.q75) + "\n";
    per[r.session] = e.to_json();
    pooled.insert(pooled.end(), e.cdf.begin(), e.cdf.end());
  }
  io::write_text(out / "errors.csv", csv);
  json summary = {{"method", method}, {"sessions", per}};
  if (!pooled.empty()) {
    const auto all = eval::summarize_errors(pooled);
    io::write_text(out / "cdf.csv", eval::cdf_csv(all.cdf));
    summary["overall"] = all.to_json();
  } else {
    summary["overall"] = nullptr;
  }
  io::write_json(out / "summary.json", summary);
  return summary;
}

std::optional<eval::HeadingErrorReport> errors_vs_truth(const std::vector<oha::HeadingSample>& est,
                                                        const pipeline::Session& s) {
  if (s.traj.samples.empty() || est.empty()) return std::nullopt;
  const auto truth = eval::truth_headings(s.traj);
  std::vector<oha::HeadingSample> scored;
  for (const auto& h : est) {
    if (h.t >= s.score_from - 1e-9) scored.push_back(h);
  }
  auto errs = eval::matched_errors(scored, truth);
  if (errs.empty()) return std::nullopt;
  return eval::summarize_errors(std::move(errs));
}

void cmd_track(const Options& o) {
  const auto cfg = load_config(o);
  if (cfg.method != "oha" && cfg.method != "ig" && cfg.method != "gps") {
    throw InvalidArgument("unknown method '" + cfg.method + "' (expected oha, ig or gps)");
  }
  if (o.session.empty()) throw InvalidArgument("--session is required");
  const auto dirs = io::session_dirs(o.session);
  const fs::path out = prepare_out(o);
  std::vector<ErrorRow> rows(dirs.size());
  parallel_for(dirs.size(), o.jobs, [&](std::size_t i) {
    const auto s = io::load_session(dirs[i]);
    oha::OhaTracker table(cfg.track.oha);
    const auto est = track_session(s, cfg, cfg.method, &table);
    const fs::path dir = out / dirs[i].filename();
    io::write_stream(dir / "headings.jsonl", est);
    if (cfg.method == "oha") io::write_json(dir / "oha_table.json", table.to_json());
    rows[i] = {dirs[i].filename().string(), errors_vs_truth(est, s)};
  });
  write_error_reports(out, rows, cfg.method);
  Manifest m("track", o, cfg.seed);
  m.set("method", cfg.method);
  m.write(out);
}

// ---------------------------------------------------------------------------
// train / predict

struct Prepared {
  std::string name;
  pipeline::SessionWindows windows;
  bool usable = false;
};

Prepared prepare_session(const fs::path& dir, const config::Config& cfg, const net::ModelConfig& model,
                         pipeline::HeadingSource src) {
  Prepared p;
  p.name = dir.filename().string();
  const auto s = io::load_session(dir);
  if (!s.roads) return p;
  const auto headings = pipeline::feature_headings(s, src, cfg.track);
  p.windows = pipeline::session_windows(s, headings, model, src);
  p.usable = !p.windows.excluded;
  return p;
}

std::vector<fs::path> data_sessions(const std::string& root) {
  if (root.empty()) throw InvalidArgument("--data is required");
  if (fs::is_directory(root) && !io::is_session_dir(root)) {
    bool any = false;
    for (const auto& e : fs::directory_iterator(root)) any = any || (e.is_directory() && io::is_session_dir(e.path()));
    if (!any) throw EmptyDataset("no sessions under '" + root + "'");
  }
  return io::session_dirs(root);
}

void cmd_train(const Options& o) {
  const auto cfg = load_config(o);
  const auto dirs = data_sessions(o.data);
  std::vector<Prepared> prep(dirs.size());
  parallel_for(dirs.size(), o.jobs, [&](std::size_t i) { prep[i] = prepare_session(dirs[i], cfg, cfg.model, cfg.heading_source); });
  std::vector<net::Example> examples;
  json used = json::array(), skipped = json::array();
  for (const auto& p : prep) {
    if (!p.usable) {
      skipped.push_back(p.name);
      continue;
    }
    used.push_back(p.name);
    pipeline::append_examples(p.windows, cfg.stride, examples);
  }
  if (examples.empty()) throw EmptyDataset("train: no usable crossing windows in '" + o.data + "'");

  const fs::path out = prepare_out(o);
  auto res = net::train(examples, cfg.model, cfg.train, cfg.seed, [](const net::EpochRow& r) {
    std::fprintf(stderr, "epoch %d  train %.5f  val %.5f\n", r.epoch, r.train_loss, r.val_loss);
  });
  json w = res.weights.to_json();
  w["heading_source"] = pipeline::to_string(cfg.heading_source);
  io::write_json(out / "weights.json", w);
  io::write_text(out / "training_log.csv", res.report.to_csv());
  const auto& r = res.report;
  io::write_json(out / "report.json", {{"n_train", r.n_train},
                                       {"n_val", r.n_val},
                                       {"positive_fraction", r.positive_fraction},
                                       {"best_epoch", r.best_epoch},
                                       {"epochs_run", r.epochs.size()},
                                       {"single_class", r.single_class},
                                       {"warnings", r.warnings},
                                       {"sessions_used", used},
                                       {"sessions_skipped", skipped}});
  for (const auto& msg : r.warnings) std::fprintf(stderr, "warning: %s\n", msg.c_str());
  Manifest m("train", o, cfg.seed);
  m.write(out);
}

void cmd_predict(const Options& o) {
  auto cfg = load_config(o);
  if (o.weights.empty()) throw InvalidArgument("--weights is required");
  const json wj = io::read_json(o.weights);
  const auto weights = net::ModelWeights::from_json(wj);
  if (!o.heading_source && wj.contains("heading_source")) {
    cfg.heading_source = pipeline::heading_source_from_string(wj["heading_source"].get<std::string>());
  }
  const auto dirs = data_sessions(o.data);
  const fs::path out = prepare_out(o);
  parallel_for(dirs.size(), o.jobs, [&](std::size_t i) {
    const auto p = prepare_session(dirs[i], cfg, weights.config(), cfg.heading_source);
    const fs::path dir = out / p.name;
    fs::create_directories(dir);
    const auto pred = pipeline::predict(weights, p.windows);
    std::vector<json> rows, alerts;
    net::AlertDecider dec(cfg.alert.n, cfg.alert.threshold);
    for (std::size_t k = 0; k < pred.t.size(); ++k) {
      rows.push_back({{"t", pred.t[k]},
                      {"prob", pred.prob[k]},
                      {"pred", static_cast<bool>(pred.pred[k])},
                      {"mode", net::to_string(p.windows.modes[k])}});
      if (auto tr = dec.step(pred.pred[k], pred.t[k])) {
        alerts.push_back({{"t", tr->t}, {"kind", tr->kind == net::AlertTransition::Kind::start ? "start" : "end"}});
      }
    }
    io::write_jsonl(dir / "predictions.jsonl", rows);
    io::write_jsonl(dir / "alerts.jsonl", alerts);
    json ev = json::array();
    for (const auto& e : p.windows.events) ev.push_back(io::to_json(e));
    io::write_json(dir / "events.json", {{"events", ev}, {"excluded", p.windows.excluded}});
  });
  Manifest m("predict", o, cfg.seed);
  m.set("n", cfg.alert.n);
  m.set("threshold", cfg.alert.threshold);
  m.write(out);
}

// ---------------------------------------------------------------------------
// eval

std::vector<int> parse_n_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InvalidArgument("--sweep-n: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw InvalidArgument("--sweep-n is empty");
  return out;
}

void eval_predictions(const Options& o, const config::Config& cfg, const fs::path& out) {
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(o.predictions)) {
    if (e.is_directory() && fs::exists(e.path() / "predictions.jsonl")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw EmptyDataset("no prediction streams under '" + o.predictions + "'");

  std::vector<eval::PredictionTrack> tracks;
  std::vector<std::string> names;
  for (const auto& d : dirs) {
    sim::LabelResult labels;
    if (fs::exists(d / "events.json")) {
      labels = io::labels_from_json(io::read_json(d / "events.json"));
    } else if (!o.data.empty()) {
      labels = io::labels_from_json(io::read_json(fs::path(o.data) / d.filename() / io::SessionFiles::labels));
    } else {
      throw ParseError("'" + d.string() + "' has no events.json; pass --data");
    }
    if (labels.excluded) continue;
    eval::PredictionTrack tr;
    tr.events = labels.events;
    const auto rows = io::read_jsonl(d / "predictions.jsonl");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      io::with_context((d / "predictions.jsonl").string(), i, [&] {
        tr.t.push_back(rows[i].at("t").get<double>());
        tr.pred.push_back(rows[i].at("pred").get<bool>());
        return 0;
      });
    }
    tracks.push_back(std::move(tr));
    names.push_back(d.filename().string());
  }

  const std::vector<int> ns = o.sweep_n.empty() ? std::vector<int>{cfg.alert.n} : parse_n_list(o.sweep_n);
  const auto rows = eval::sweep_n(tracks, ns, cfg.alert.threshold);
  io::write_text(out / "sweep.csv", eval::sweep_csv(rows));

  std::string ev = "session,start_t,edge_t,center_t,matched,alert_start,ttc\n";
  for (std::size_t k = 0; k < tracks.size(); ++k) {
    const auto alerts = net::alert_periods(tracks[k].t, tracks[k].pred, cfg.alert.n, cfg.alert.threshold);
    const auto m = eval::match_events(alerts, tracks[k].events);
    auto events = tracks[k].events;
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.start_t < b.start_t; });
    for (const auto& e : events) {
      const eval::MatchedPair* hit = nullptr;
      for (const auto& p : m.pairs) {
        if (p.event.start_t == e.start_t && p.event.center_t == e.center_t) hit = &p;
      }
      ev += names[k] + "," + csv_num(e.start_t) + "," + csv_num(e.edge_t) + "," + csv_num(e.center_t) + "," +
            (hit ? "1" : "0") + "," + (hit ? csv_num(hit->alert.start) : "") + "," +
            (hit ? csv_num(e.edge_t - hit->alert.start) : "") + "\n";
    }
  }
  io::write_text(out / "events.csv", ev);
  const auto at_n = eval::score_sessions(tracks, cfg.alert.n, cfg.alert.threshold);
  json summary = at_n.to_json();
  summary["n"] = cfg.alert.n;
  summary["threshold"] = cfg.alert.threshold;
  summary["sessions"] = tracks.size();
  io::write_json(out / "summary.json", summary);
}

void eval_headings(const Options& o, const fs::path& out) {
  if (o.data.empty()) throw InvalidArgument("--data is required with --headings");
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(o.headings)) {
    if (e.is_directory() && fs::exists(e.path() / "headings.jsonl")) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw EmptyDataset("no heading streams under '" + o.headings + "'");
  std::vector<ErrorRow> rows;
  for (const auto& d : dirs) {
    const auto est = io::read_stream<oha::HeadingSample>(d / "headings.jsonl", io::heading_from_json);
    const fs::path sd = fs::path(o.data) / d.filename();
    sim::Trajectory traj;
    traj.samples = io::read_stream<sim::TrajectorySample>(sd / io::SessionFiles::truth, io::truth_from_json);
    pipeline::Session s;
    s.traj = std::move(traj);
    if (io::is_session_dir(sd)) s.score_from = io::read_json(sd / io::SessionFiles::meta).value("score_from", 0.0);
    rows.push_back({d.filename().string(), errors_vs_truth(est, s)});
  }
  write_error_reports(out, rows, "file");
}

void cmd_eval(const Options& o) {
  const auto cfg = load_config(o);
  if (o.predictions.empty() == o.headings.empty()) {
    throw InvalidArgument("eval needs exactly one of --predictions or --headings");
  }
  const fs::path out = prepare_out(o);
  if (!o.predictions.empty()) {
    eval_predictions(o, cfg, out);
  } else {
    eval_headings(o, out);
  }
  Manifest m("eval", o, cfg.seed);
  m.write(out);
}

void report_error(const Options& o, const std::string& kind, const std::string& msg, int code) {
  if (o.json_errors) {
    std::cerr << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << "\n";
  } else {
    std::cerr << "pedhat: " << kind << ": " << msg << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Pedestrian heading tracking and road-crossing prediction toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", o.json_errors, "Machine-readable errors on stderr");
  app.add_option("--jobs", o.jobs, "Sessions processed in parallel")->check(CLI::PositiveNumber);

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    c->add_option("--seed", o.seed, "Base seed (overrides the config)");
    c->add_option("--out", o.out, "Output directory")->required();
  };
  auto tracking = [&](CLI::App* c) {
    c->add_option("--q", o.q, "OHA quantization step, degrees");
    c->add_option("--alpha", o.alpha, "OHA merge weight per coarse update");
    c->add_option("--attitude", o.attitude, "Attitude input: estimated or truth")
        ->check(CLI::IsMember({"estimated", "truth"}));
  };
  auto features = [&](CLI::App* c) {
    c->add_option("--heading-source", o.heading_source, "Heading feature: oha, gps or none")
        ->check(CLI::IsMember({"oha", "gps", "none"}));
  };

  auto* sim = app.add_subcommand("simulate", "Simulate the sessions listed in a scenario config");
  common(sim);

  auto* track = app.add_subcommand("track", "Track headings of recorded sessions");
  common(track);
  tracking(track);
  track->add_option("--session", o.session, "Session directory, or a directory of sessions")->required();
  track->add_option("--method", o.method, "oha, ig or gps")->check(CLI::IsMember({"oha", "ig", "gps"}));

  auto* train = app.add_subcommand("train", "Train the crossing predictor");
  common(train);
  tracking(train);
  features(train);
  train->add_option("--data", o.data, "Directory of crossing sessions")->required();
  train->add_option("--lookback", o.lookback, "Feature window, seconds");

  auto* predict = app.add_subcommand("predict", "Run the crossing predictor and alert decider");
  common(predict);
  tracking(predict);
  features(predict);
  predict->add_option("--data", o.data, "Directory of crossing sessions")->required();
  predict->add_option("--weights", o.weights, "weights.json from train")->required()->check(CLI::ExistingFile);
  predict->add_option("--n", o.n, "Past predictions consulted per alert decision");
  predict->add_option("--threshold", o.threshold, "Fraction of positive predictions that raises an alert");

  auto* ev = app.add_subcommand("eval", "Score predictions against crossing events, or headings against truth");
  common(ev);
  ev->add_option("--predictions", o.predictions, "Output directory of predict")->check(CLI::ExistingDirectory);
  ev->add_option("--headings", o.headings, "Output directory of track")->check(CLI::ExistingDirectory);
  ev->add_option("--data", o.data, "Session directory root (truth and labels)");
  ev->add_option("--n", o.n, "Past predictions consulted per alert decision");
  ev->add_option("--threshold", o.threshold, "Fraction of positive predictions that raises an alert");
  ev->add_option("--sweep-n", o.sweep_n, "Comma-separated n values, e.g. 10,20,30,40,50");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    if (o.json_errors || std::find(argv, argv + argc, std::string("--json")) != argv + argc) {
      o.json_errors = true;
      report_error(o, "UsageError", e.what(), 2);
      return 2;
    }
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) cmd_simulate(o);
    if (*track) cmd_track(o);
    if (*train) cmd_train(o);
    if (*predict) cmd_predict(o);
    if (*ev) cmd_eval(o);
  } catch (const Error& e) {
    report_error(o, e.kind(), e.what(), 1);
    return 1;
  } catch (const std::exception& e) {
    report_error(o, "InternalError", e.what(), 1);
    return 1;
  }
  return 0;
}
