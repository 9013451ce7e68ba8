// pupilwatch command-line front end.
//
// Every run creates runs/<timestamp>_<command>/ holding a frozen copy of the
// effective configuration next to its outputs, so any result can be
// reproduced from the run directory alone.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pupilwatch/csv_io.hpp"
#include "pupilwatch/evaluation.hpp"
#include "pupilwatch/importance.hpp"
#include "pupilwatch/neural.hpp"
#include "pupilwatch/parallel.hpp"
#include "pupilwatch/pipeline.hpp"
#include "pupilwatch/preprocessing.hpp"
#include "pupilwatch/signal_model.hpp"
#include "pupilwatch/streaming.hpp"
#include "pupilwatch/synth.hpp"

namespace fs = std::filesystem;
using namespace pupilwatch;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path make_run_dir(const fs::path& root, const std::string& command) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::tm tm{};
#if defined(_WIN32)
  localtime_s(&tm, &tt);
#else
  localtime_r(&tt, &tm);
#endif
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", &tm);

  fs::path dir = root / (std::string(stamp) + "_" + command);
  for (int k = 1; fs::exists(dir); ++k)
    dir = root / (std::string(stamp) + "_" + command + "-" + std::to_string(k));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory " + dir.string());
  return dir;
}

void freeze_config(CLI::App& app, const fs::path& run_dir) {
  std::ofstream out(run_dir / "config.txt");
  if (!out) throw IoError("cannot write frozen config");
  out << app.config_to_str(true, false);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

fs::path resolve_manifest(const fs::path& data) {
  if (fs::is_directory(data)) {
    const auto m = data / "manifest.txt";
    if (!fs::exists(m)) throw IoError("no manifest.txt under " + data.string());
    return m;
  }
  if (!fs::exists(data)) throw IoError("dataset not found: " + data.string());
  return data;
}

Architecture arch_for(const std::string& channels) {
  Architecture arch;
  if (channels == "pd_only") arch.in_channels = 1;
  else if (channels != "all3")
    throw std::runtime_error("channels must be all3 or pd_only");
  return arch;
}

std::string weights_name(const std::string& variant, const std::string& channels) {
  return variant + "_" + channels + ".pwnn";
}

// ------------------------------------------------------------------- synth

struct SynthOpts {
  int participants = 57;
  int sessions = 1;
  std::uint64_t seed = 7;
  int trials = 0;  // 0 keeps the per-task defaults
  double gap_rate = 0.02;
  bool noise_gaze = false;
};

int cmd_synth(const SynthOpts& o, const fs::path& run_dir) {
  if (o.participants < 1 || o.sessions < 1)
    throw std::runtime_error("participants and sessions must be positive");

  CohortConfig cfg;
  cfg.n_participants = o.participants;
  cfg.sessions_per_participant = o.sessions;
  cfg.master_seed = o.seed;
  cfg.gap_rate = o.gap_rate;
  cfg.gaze_informative = !o.noise_gaze;

  auto templates = default_templates();
  if (o.trials > 0)
    for (auto& [k, t] : templates) t.trials_per_session = o.trials;

  const auto cohort = generate_cohort(cfg, templates);
  const auto dataset = run_dir / "dataset";
  write_cohort(cohort, cfg, dataset);

  std::map<TaskKind, std::size_t> events;
  for (const auto& r : cohort) events[r.task] += r.stimulus_times_s.size();
  std::printf("wrote %zu recordings (%d participants x %d sessions x 4 tasks) to %s\n",
              cohort.size(), o.participants, o.sessions, dataset.string().c_str());
  for (const auto& [task, n] : events)
    std::printf("  %s: %zu events\n", to_string(task).c_str(), n);
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string data;
  std::string variant = "ALL";
  std::string channels = "all3";
  std::uint64_t seed = 1;
  int epochs = 30;
  int batch = 64;
  double lr = 1e-3;
  int patience = 5;
  int val_participants = 5;
};

int cmd_train(const TrainOpts& o, const fs::path& run_dir) {
  const auto cohort = load_cohort(resolve_manifest(o.data));
  const auto windows = preprocess_cohort(cohort);
  const auto variant = variant_by_name(o.variant);

  std::set<std::string> everyone;
  for (const auto& p : participants_of(cohort)) everyone.insert(p);
  const auto train_set = filter_windows(windows, everyone, variant.task_filter);
  if (train_set.empty()) throw std::runtime_error("variant has zero windows");

  Hyperparams hp;
  hp.max_epochs = o.epochs;
  hp.batch_size = o.batch;
  hp.learning_rate = o.lr;
  hp.patience = o.patience;

  std::printf("training %s (%s) on %zu windows, %u worker threads\n",
              variant.name.c_str(), o.channels.c_str(), train_set.size(),
              worker_count());
  auto [model, report] = train_variant(train_set, arch_for(o.channels), hp,
                                       static_cast<std::size_t>(o.val_participants),
                                       o.seed);

  const auto wpath = run_dir / weights_name(variant.name, o.channels);
  save_weights(model, wpath);

  std::ostringstream csv;
  csv << "epoch,train_loss,val_mcc\n";
  for (std::size_t e = 0; e < report.epoch_train_loss.size(); ++e)
    csv << e << ',' << report.epoch_train_loss[e] << ','
        << (e < report.epoch_val_mcc.size() ? report.epoch_val_mcc[e] : 0.0) << '\n';
  write_text(run_dir / "train_report.csv", csv.str());

  std::printf("kept epoch %d; wall time %.1f s; weights -> %s\n", report.chosen_epoch,
              report.wall_time_s, wpath.string().c_str());
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalOpts {
  std::string data;
  std::string weights_dir;
  std::string channels = "all3";
  int test_participants = 0;  // 0 scores the whole dataset
  std::uint64_t split_seed = 42;
};

int cmd_eval(const EvalOpts& o, const fs::path& run_dir) {
  const auto cohort = load_cohort(resolve_manifest(o.data));
  auto windows = preprocess_cohort(cohort);

  if (o.test_participants > 0) {
    const auto split = split_by_participant(
        participants_of(cohort), static_cast<std::size_t>(o.test_participants),
        o.split_seed);
    windows = filter_windows(windows, split.test_participants);
  }
  if (windows.empty()) throw std::runtime_error("no windows to evaluate");

  std::vector<int> labels;
  std::vector<TaskKind> tasks;
  for (const auto& w : windows) {
    labels.push_back(w.label);
    tasks.push_back(w.task);
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> probs;
  for (const auto& v : all_variants()) {
    const auto wpath = fs::path(o.weights_dir) / weights_name(v.name, o.channels);
    if (!fs::exists(wpath)) throw IoError("missing weights: " + wpath.string());
    const auto model = load_weights(wpath);
    ensure_channel_mode(model, o.channels == "pd_only" ? 1 : kNumChannels);
    names.push_back(v.name);
    probs.push_back(predict_proba(model, windows));
  }

  const auto matrix = cross_task_eval(names, probs, labels, tasks);
  const auto table = format_cross_task_table(matrix);
  std::printf("%s", table.c_str());
  std::uint64_t pooled = 0, per_task = 0;
  for (std::size_t d = 0; d < matrix.dataset_names.size(); ++d) {
    const auto n = matrix.cells[0][d].n_windows;
    std::printf("  %s: %llu windows\n", matrix.dataset_names[d].c_str(),
                static_cast<unsigned long long>(n));
    (matrix.dataset_names[d] == "ALL" ? pooled : per_task) += n;
  }
  std::printf("  per-task sum %llu == pooled %llu\n",
              static_cast<unsigned long long>(per_task),
              static_cast<unsigned long long>(pooled));

  write_text(run_dir / "matrix.txt", table);
  write_text(run_dir / "matrix.csv", cross_task_csv(matrix));
  return 0;
}

// -------------------------------------------------------------- importance

struct ImportanceOpts {
  std::string data;
  std::string weights;
  int n = 100;
  std::uint64_t seed = 7;
  int test_participants = 0;
  std::uint64_t split_seed = 42;
};

int cmd_importance(const ImportanceOpts& o, const fs::path& run_dir) {
  const auto cohort = load_cohort(resolve_manifest(o.data));
  auto windows = preprocess_cohort(cohort);
  if (o.test_participants > 0) {
    const auto split = split_by_participant(
        participants_of(cohort), static_cast<std::size_t>(o.test_participants),
        o.split_seed);
    windows = filter_windows(windows, split.test_participants);
  }

  if (!fs::exists(o.weights)) throw IoError("missing weights: " + o.weights);
  const auto model = load_weights(o.weights);

  const auto report = importance_scores(model, windows, o.n, o.seed);
  const auto csv = importance_csv(report);
  std::printf("%s", csv.c_str());
  write_text(run_dir / "importance.csv", csv);
  return 0;
}

// ------------------------------------------------------------------ stream

struct StreamOpts {
  std::string data;
  std::string weights;
  std::string input;  // "live" reads t,pd,gx,gy lines from stdin
  bool freeze_baseline = false;
};

int stream_live(const ModelParameters& model) {
  StreamState state(model, StreamConfig{});
  std::vector<std::pair<double, double>> trace;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 't') continue;
    double t, pd, gx, gy;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &t, &pd, &gx, &gy) != 4)
      throw std::runtime_error("bad stream line: " + line);
    if (const auto p = state.push_sample(t, pd, gx, gy)) {
      std::printf("%.3f,%.6f\n", p->time_s, p->probability);
      std::fflush(stdout);
      trace.emplace_back(p->time_s, p->probability);
    }
  }
  for (const auto& e : extract_events(trace))
    std::fprintf(stderr, "event: onset %.2f s, crossing %.2f s, peak p %.3f\n",
                 e.onset_estimate_s, e.crossing_time_s, e.peak_probability);
  return 0;
}

int cmd_stream(const StreamOpts& o, const fs::path& run_dir) {
  if (!fs::exists(o.weights)) throw IoError("missing weights: " + o.weights);
  const auto model = load_weights(o.weights);
  if (o.input == "live") return stream_live(model);

  const auto cohort = load_cohort(resolve_manifest(o.data));
  if (cohort.empty()) throw std::runtime_error("empty dataset");

  const auto result = streaming_eval(model, cohort, o.freeze_baseline);
  std::printf("online MCC %.4f | offline MCC %.4f | delta %.4f | %llu windows\n",
              result.online_mcc, result.offline_mcc, result.delta,
              static_cast<unsigned long long>(result.scored_windows));

  // full trace + detected events for the first recording
  const auto trace = replay_trace(model, cohort.front(), o.freeze_baseline);
  std::ostringstream tcsv;
  tcsv << "t_s,probability\n";
  for (const auto& [t, p] : trace) tcsv << t << ',' << p << '\n';
  write_text(run_dir / "trace.csv", tcsv.str());

  std::ostringstream ecsv;
  ecsv << "onset_estimate_s,crossing_time_s,peak_probability\n";
  for (const auto& e : extract_events(trace))
    ecsv << e.onset_estimate_s << ',' << e.crossing_time_s << ',' << e.peak_probability
         << '\n';
  write_text(run_dir / "events.csv", ecsv.str());

  std::ostringstream scsv;
  scsv << "online_mcc,offline_mcc,delta,scored_windows\n"
       << result.online_mcc << ',' << result.offline_mcc << ',' << result.delta << ','
       << result.scored_windows << '\n';
  write_text(run_dir / "streaming_eval.csv", scsv.str());
  return 0;
}

// --------------------------------------------------------------------- eda

struct EdaOpts {
  std::string data;
  double t_lo = -0.5;
  double t_hi = 3.5;
};

int cmd_eda(const EdaOpts& o, const fs::path& run_dir) {
  const auto cohort = load_cohort(resolve_manifest(o.data));

  for (TaskKind task : kAllTasks) {
    std::vector<Recording> subset;
    for (const auto& r : cohort)
      if (r.task == task) subset.push_back(r);
    if (subset.empty()) continue;
    ChangeCurve curve;
    try {
      curve = pd_change_curve(subset, o.t_lo, o.t_hi);
    } catch (const std::exception& e) {
      std::printf("%s: %s\n", to_string(task).c_str(), e.what());
      continue;
    }
    std::ostringstream csv;
    csv << "t_s,mean_dpd_mm,std_dpd_mm\n";
    for (std::size_t i = 0; i < curve.mean.size(); ++i)
      csv << curve.time_at(i) << ',' << curve.mean[i] << ',' << curve.std_dev[i] << '\n';
    write_text(run_dir / ("curve_" + to_string(task) + ".csv"), csv.str());
    std::printf("%s: %zu events used, %zu skipped\n", to_string(task).c_str(),
                curve.events_used, curve.events_skipped);
  }

  const auto medians = median_pd(cohort);
  std::ostringstream csv;
  csv << "participant_id,median_pd_mm\n";
  for (const auto& [pid, m] : medians) csv << pid << ',' << m << '\n';
  write_text(run_dir / "median_pd.csv", csv.str());
  std::printf("median PD written for %zu participants\n", medians.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pupilwatch: synthetic pupillometry event-detection pipeline"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; flags override");

  std::string out_root = "runs";
  app.add_option("--out", out_root, "root directory for run outputs")
      ->capture_default_str();

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  synth->add_option("--participants", so.participants)->capture_default_str();
  synth->add_option("--sessions", so.sessions)->capture_default_str();
  synth->add_option("--seed", so.seed)->capture_default_str();
  synth->add_option("--trials", so.trials, "override trials per session (0 = task defaults)")
      ->capture_default_str();
  synth->add_option("--gap-rate", so.gap_rate)->capture_default_str();
  synth->add_flag("--noise-gaze", so.noise_gaze, "replace gaze channels with pure noise");

  TrainOpts to;
  auto* train_cmd = app.add_subcommand("train", "train one model variant");
  train_cmd->add_option("--data", to.data, "dataset directory or manifest")->required();
  train_cmd->add_option("--variant", to.variant, "ALL, DPT, MA, PVT, or VWM")
      ->capture_default_str();
  train_cmd->add_option("--channels", to.channels, "all3 or pd_only")->capture_default_str();
  train_cmd->add_option("--seed", to.seed)->capture_default_str();
  train_cmd->add_option("--epochs", to.epochs)->capture_default_str();
  train_cmd->add_option("--batch", to.batch)->capture_default_str();
  train_cmd->add_option("--lr", to.lr)->capture_default_str();
  train_cmd->add_option("--patience", to.patience)->capture_default_str();
  train_cmd->add_option("--val-participants", to.val_participants)->capture_default_str();

  EvalOpts eo;
  auto* eval_cmd = app.add_subcommand("eval", "cross-task evaluation matrix");
  eval_cmd->add_option("--data", eo.data)->required();
  eval_cmd->add_option("--weights-dir", eo.weights_dir, "directory with the five weight files")
      ->required();
  eval_cmd->add_option("--channels", eo.channels)->capture_default_str();
  eval_cmd->add_option("--test-participants", eo.test_participants,
                       "evaluate a held-out split of this size (0 = everything)")
      ->capture_default_str();
  eval_cmd->add_option("--split-seed", eo.split_seed)->capture_default_str();

  ImportanceOpts io;
  auto* imp_cmd = app.add_subcommand("importance", "channel importance report");
  imp_cmd->add_option("--data", io.data)->required();
  imp_cmd->add_option("--weights", io.weights)->required();
  imp_cmd->add_option("--n", io.n, "repetitions")->capture_default_str();
  imp_cmd->add_option("--seed", io.seed)->capture_default_str();
  imp_cmd->add_option("--test-participants", io.test_participants)->capture_default_str();
  imp_cmd->add_option("--split-seed", io.split_seed)->capture_default_str();

  StreamOpts sto;
  auto* stream_cmd = app.add_subcommand("stream", "streaming detector replay or live mode");
  stream_cmd->add_option("--weights", sto.weights)->required();
  stream_cmd->add_option("--data", sto.data, "dataset to replay (ignored with --input live)");
  stream_cmd->add_option("--input", sto.input, "'live' reads t,pd,gx,gy lines from stdin");
  stream_cmd->add_flag("--freeze-baseline", sto.freeze_baseline);

  EdaOpts edo;
  auto* eda_cmd = app.add_subcommand("eda", "event-locked curves and PD medians");
  eda_cmd->add_option("--data", edo.data)->required();
  eda_cmd->add_option("--t-lo", edo.t_lo)->capture_default_str();
  eda_cmd->add_option("--t-hi", edo.t_hi)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const auto* sub = app.get_subcommands().front();
  try {
    const auto run_dir = make_run_dir(out_root, sub->get_name());
    freeze_config(app, run_dir);
    int rc = 0;
    if (sub == synth) rc = cmd_synth(so, run_dir);
    else if (sub == train_cmd) rc = cmd_train(to, run_dir);
    else if (sub == eval_cmd) rc = cmd_eval(eo, run_dir);
    else if (sub == imp_cmd) rc = cmd_importance(io, run_dir);
    else if (sub == stream_cmd) rc = cmd_stream(sto, run_dir);
    else if (sub == eda_cmd) rc = cmd_eda(edo, run_dir);
    std::printf("run directory: %s\n", run_dir.string().c_str());
    return rc;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
