// Acceptance gate: ten end-to-end criteria run as one binary. Each prints a
// PASS/FAIL line with its runtime; the process exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pupilwatch/evaluation.hpp"
#include "pupilwatch/importance.hpp"
#include "pupilwatch/neural.hpp"
#include "pupilwatch/pipeline.hpp"
#include "pupilwatch/preprocessing.hpp"
#include "pupilwatch/rng.hpp"
#include "pupilwatch/streaming.hpp"
#include "pupilwatch/synth.hpp"

using namespace pupilwatch;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Criterion {
  int number;
  const char* title;
  double t_start;
  bool ok = true;

  Criterion(int n, const char* t) : number(n), title(t), t_start(now_s()) {
    std::printf("criterion %2d: %s ...\n", n, t);
    std::fflush(stdout);
  }
  void expect(bool cond, const std::string& detail) {
    if (!cond) {
      ok = false;
      std::printf("    violated: %s\n", detail.c_str());
    }
  }
  void note(const std::string& s) { std::printf("    %s\n", s.c_str()); }
  ~Criterion() {
    const double dt = now_s() - t_start;
    std::printf("[%s] criterion %2d: %s (%.1f s)\n", ok ? "PASS" : "FAIL", number,
                title, dt);
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

void criterion_gradients() {
  Criterion cr(1, "analytic gradients vs central finite differences");

  Architecture arch;
  arch.conv = {{8, 7, 0.0}, {8, 5, 0.0}};
  arch.hidden_units = 8;
  ModelParameters params = init_parameters(arch, 17);

  Rng rng(99);
  std::vector<Sample> batch;
  for (int i = 0; i < 3; ++i) {
    Sample s;
    s.input.resize(static_cast<std::size_t>(arch.in_channels) * kWindowSamples);
    for (double& v : s.input) v = rng.normal();
    s.label = i % 2;
    s.id = "fd" + std::to_string(i);
    batch.push_back(std::move(s));
  }

  const auto analytic = backward_gradients(params, batch);
  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_group;

  for (const auto& group : parameter_groups(arch)) {
    // probe up to 40 evenly spaced parameters per group; every group is hit
    const std::size_t step = std::max<std::size_t>(1, group.size / 40);
    for (std::size_t k = 0; k < group.size; k += step) {
      const std::size_t idx = group.offset + k;
      const double saved = params.theta[idx];
      params.theta[idx] = saved + h;
      const double lp = batch_loss(params, batch);
      params.theta[idx] = saved - h;
      const double lm = batch_loss(params, batch);
      params.theta[idx] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[idx];
      // guarded denominator keeps near-zero gradients from inflating the ratio
      const double rel = std::abs(a - numeric) / std::max(1e-3, std::abs(a) + std::abs(numeric));
      if (rel > worst) {
        worst = rel;
        worst_group = group.name;
      }
    }
  }
  cr.note(fmt("max relative error %.3g", worst) + " (" + worst_group + ")");
  cr.expect(worst < 1e-4, fmt("max relative error %.3g >= 1e-4", worst));
  cr.expect(now_s() - cr.t_start < 30.0, "runtime exceeded 30 s");
}

// ---------------------------------------------------------------- criterion 2

void criterion_metrics() {
  Criterion cr(2, "metric formulas vs independent oracles");

  Rng rng(4242);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t tp = rng.below(200), tn = rng.below(200);
    const std::uint64_t fp = rng.below(200), fn = rng.below(200);
    if (tp + tn + fp + fn == 0) continue;

    std::vector<int> labels;
    std::vector<double> probs;
    for (std::uint64_t i = 0; i < tp; ++i) { labels.push_back(1); probs.push_back(0.9); }
    for (std::uint64_t i = 0; i < fn; ++i) { labels.push_back(1); probs.push_back(0.1); }
    for (std::uint64_t i = 0; i < fp; ++i) { labels.push_back(0); probs.push_back(0.9); }
    for (std::uint64_t i = 0; i < tn; ++i) { labels.push_back(0); probs.push_back(0.1); }
    const auto r = metrics_suite(labels, probs);

    const double dtp = double(tp), dtn = double(tn), dfp = double(fp), dfn = double(fn);
    const double total = dtp + dtn + dfp + dfn;
    const double acc = (dtp + dtn) / total;
    const double f1d = 2.0 * dtp + dfp + dfn;
    const double f1 = f1d > 0 ? 2.0 * dtp / f1d : 0.0;
    const double tnr = (dtn + dfp) > 0 ? dtn / (dtn + dfp) : 0.0;
    const double tpr = (dtp + dfn) > 0 ? dtp / (dtp + dfn) : 0.0;
    const double md = (dtp + dfp) * (dtp + dfn) * (dtn + dfp) * (dtn + dfn);
    const double m = md > 0 ? (dtp * dtn - dfp * dfn) / std::sqrt(md) : 0.0;

    worst = std::max({worst, std::abs(r.accuracy - acc), std::abs(r.f1 - f1),
                      std::abs(r.tnr - tnr), std::abs(r.tpr - tpr), std::abs(r.mcc - m)});
    if (r.counts.tp != tp || r.counts.tn != tn || r.counts.fp != fp || r.counts.fn != fn) {
      cr.expect(false, "confusion counts disagree with the constructed table");
      break;
    }
  }
  cr.expect(worst < 1e-12, fmt("confusion metric deviation %.3g >= 1e-12", worst));

  // AUC against the O(n^2) pairwise oracle
  double auc_worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 20 + rng.below(60);
    std::vector<int> labels(n);
    std::vector<double> probs(n);
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = rng.below(2) ? 1 : 0;
      (labels[i] ? pos : neg) = true;
      // coarse grid forces plenty of ties
      probs[i] = static_cast<double>(rng.below(8)) / 8.0;
    }
    if (!pos || !neg) { --t; continue; }

    double wins = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (labels[i] == 1 && labels[j] == 0) {
          ++pairs;
          if (probs[i] > probs[j]) wins += 1.0;
          else if (probs[i] == probs[j]) wins += 0.5;
        }
    const double oracle = wins / static_cast<double>(pairs);
    const auto r = metrics_suite(labels, probs);
    auc_worst = std::max(auc_worst, std::abs(r.auc - oracle));
  }
  cr.expect(auc_worst < 1e-12, fmt("AUC deviation %.3g >= 1e-12", auc_worst));
  cr.expect(now_s() - cr.t_start < 10.0, "runtime exceeded 10 s");
}

// ---------------------------------------------------------------- criterion 3

void criterion_windows() {
  Criterion cr(3, "window offsets, labels, and the 2:1 ratio");

  Recording rec;
  rec.participant_id = "P1";
  rec.session_id = "S1";
  rec.task = TaskKind::DPT;
  const std::size_t n = 100 * 250;
  rec.pd_mm.resize(n);
  for (std::size_t i = 0; i < n; ++i) rec.pd_mm[i] = std::sin(0.013 * double(i));
  rec.gaze_x.assign(n, 0.1);
  rec.gaze_y.assign(n, -0.1);
  rec.stimulus_times_s = {10.0, 20.0, 30.0, 40.0, 50.0, 60.0};

  const auto windows = generate_labeled_samples(rec);
  cr.expect(windows.size() == 18, fmt("expected 18 windows, got %g", double(windows.size())));

  std::size_t ones = 0, zeros = 0;
  for (std::size_t e = 0; e < rec.stimulus_times_s.size(); ++e) {
    const long st = static_cast<long>(std::lround(rec.stimulus_times_s[e] * 250.0));
    const long starts[3] = {st - 125, st + 125, st + 375};
    const int labels[3] = {0, 1, 0};
    for (int k = 0; k < 3; ++k) {
      const auto& w = windows[e * 3 + static_cast<std::size_t>(k)];
      cr.expect(w.label == labels[k], "label pattern is not 0/1/0");
      (w.label ? ones : zeros)++;
      for (int i = 0; i < kWindowSamples; ++i) {
        const double want = rec.pd_mm[static_cast<std::size_t>(starts[k] + i)];
        if (w.values[0][static_cast<std::size_t>(i)] != want) {
          cr.expect(false, fmt("window start offset wrong at event %g slot %g",
                               double(e), double(k)));
          i = kWindowSamples;
        }
      }
    }
  }
  cr.expect(zeros == 2 * ones && ones == 6, "label ratio is not exactly 2:1");
}

// ---------------------------------------------------------------- criterion 4

void criterion_leakage() {
  Criterion cr(4, "z-score leakage freedom and group statistics");

  CohortConfig cfg;
  cfg.n_participants = 4;
  cfg.sessions_per_participant = 2;
  cfg.master_seed = 400;
  auto templates = default_templates();
  for (auto& [k, t] : templates) t.trials_per_session = 4;
  const auto cohort = generate_cohort(cfg, templates);

  for (const auto& rec : cohort) {
    // statistics fitted with the rest of the cohort deleted
    const std::vector<Recording> alone{rec};
    const auto params_full = fit_zscore(rec);
    const auto params_alone = fit_zscore(alone.front());
    for (std::size_t i = 0; i < params_full.size(); ++i) {
      cr.expect(params_full[i].mean == params_alone[i].mean &&
                    params_full[i].std_dev == params_alone[i].std_dev,
                "statistics changed after deleting the rest of the cohort");
    }

    const auto norm = apply_zscore(rec, params_full);
    for (int c = 0; c < kNumChannels; ++c) {
      const auto& series = norm.channel(static_cast<Channel>(c));
      double sum = 0.0;
      std::size_t cnt = 0;
      for (double v : series)
        if (!is_missing(v)) { sum += v; ++cnt; }
      const double mean = sum / static_cast<double>(cnt);
      double var = 0.0;
      for (double v : series)
        if (!is_missing(v)) var += (v - mean) * (v - mean);
      var /= static_cast<double>(cnt);
      cr.expect(std::abs(mean) < 1e-9, fmt("group mean %.3g exceeds 1e-9", mean));
      cr.expect(std::abs(std::sqrt(var) - 1.0) < 1e-9,
                fmt("group std deviates by %.3g", std::abs(std::sqrt(var) - 1.0)));
    }
  }
}

// ------------------------------------------------------------- criteria 5 + 6

struct TrainedModels {
  ModelParameters dpt, all, pvt;
  std::vector<LabeledWindow> test_windows;
  bool valid = false;
};

TrainedModels criterion_end_to_end() {
  Criterion cr(5, "end-to-end detection on the 57-participant cohort");
  TrainedModels out;

  CohortConfig cfg;  // 57 participants, one session each, seed 7
  std::vector<LabeledWindow> windows;
  std::vector<std::string> ids;
  {
    const auto cohort = generate_cohort(cfg, default_templates());
    cr.note(fmt("cohort: %g recordings", double(cohort.size())));
    windows = preprocess_cohort(cohort);
    ids = participants_of(cohort);
  }  // recordings freed here; only the windows stay resident
  cr.note(fmt("windows: %g", double(windows.size())));

  const auto split = split_by_participant(ids, 10, 42);
  cr.expect(split.train_participants.size() == 47 && split.test_participants.size() == 10,
            "split is not 47/10");

  Architecture arch;  // published default: 16/32/64/64, hidden 64
  Hyperparams hp;
  hp.max_epochs = 8;  // the synthetic signature converges well before 30

  const auto train_dpt = filter_windows(windows, split.train_participants, TaskKind::DPT);
  const auto test_dpt = filter_windows(windows, split.test_participants, TaskKind::DPT);
  auto [dpt_model, dpt_rep] = train_variant(train_dpt, arch, hp, 5, 1001);
  const auto dpt_metrics = metrics_suite(
      [&] { std::vector<int> l; for (const auto& w : test_dpt) l.push_back(w.label); return l; }(),
      predict_proba(dpt_model, test_dpt));
  cr.note(fmt("DPT variant: held-out MCC %.3f (epoch %.0f)", dpt_metrics.mcc,
              double(dpt_rep.chosen_epoch)));
  cr.expect(dpt_metrics.mcc >= 0.5, fmt("DPT held-out MCC %.3f < 0.5", dpt_metrics.mcc));

  const auto train_all = filter_windows(windows, split.train_participants);
  const auto test_all = filter_windows(windows, split.test_participants);
  Hyperparams hp_all = hp;
  hp_all.max_epochs = 6;
  auto [all_model, all_rep] = train_variant(train_all, arch, hp_all, 5, 1002);
  (void)all_rep;
  const auto all_metrics = metrics_suite(
      [&] { std::vector<int> l; for (const auto& w : test_all) l.push_back(w.label); return l; }(),
      predict_proba(all_model, test_all));
  cr.note(fmt("ALL variant: pooled test MCC %.3f", all_metrics.mcc));
  cr.expect(all_metrics.mcc >= 0.3, fmt("ALL pooled MCC %.3f < 0.3", all_metrics.mcc));

  // the PVT variant feeds criterion 6
  const auto train_pvt = filter_windows(windows, split.train_participants, TaskKind::PVT);
  auto [pvt_model, pvt_rep] = train_variant(train_pvt, arch, hp, 5, 1003);
  (void)pvt_rep;

  const double dt = now_s() - cr.t_start;
  cr.expect(dt < 900.0, fmt("runtime %.0f s exceeds the 15 min budget", dt));

  out.dpt = std::move(dpt_model);
  out.all = std::move(all_model);
  out.pvt = std::move(pvt_model);
  out.test_windows = std::move(test_all);
  out.valid = cr.ok;
  return out;
}

void criterion_cross_task(const TrainedModels& models) {
  Criterion cr(6, "cross-task rejection by the PVT variant");
  if (!models.valid) cr.note("inputs come from a failed criterion 5 run");

  const auto& test = models.test_windows;
  std::vector<int> labels;
  std::vector<TaskKind> tasks;
  for (const auto& w : test) {
    labels.push_back(w.label);
    tasks.push_back(w.task);
  }
  const auto probs = predict_proba(models.pvt, test);
  const auto matrix = cross_task_eval({"PVT"}, {probs}, labels, tasks);
  std::printf("%s", format_cross_task_table(matrix).c_str());

  double same_tpr = 0.0;
  for (std::size_t d = 0; d < matrix.dataset_names.size(); ++d)
    if (matrix.dataset_names[d] == "PVT") same_tpr = matrix.cells[0][d].tpr;

  for (std::size_t d = 0; d < matrix.dataset_names.size(); ++d) {
    const auto& cell = matrix.cells[0][d];
    const auto& name = matrix.dataset_names[d];
    if (name == "ALL") continue;
    cr.expect(cell.tnr >= 0.7, "TNR on " + name + fmt(" is %.3f < 0.7", cell.tnr));
    if (name != "PVT")
      cr.expect(same_tpr - cell.tpr >= 0.2,
                "TPR drop on " + name + fmt(" is %.3f < 0.2", same_tpr - cell.tpr));
  }
}

// ------------------------------------------------------------- criteria 7 + 8

struct NoiseGazeSetup {
  ModelParameters model;
  std::vector<LabeledWindow> eval_windows;
  std::vector<Recording> eval_recordings;
};

NoiseGazeSetup criterion_importance() {
  Criterion cr(7, "channel importance on a noise-gaze cohort");
  NoiseGazeSetup out;

  CohortConfig cfg;
  cfg.n_participants = 12;
  cfg.master_seed = 700;
  cfg.gaze_informative = false;  // gaze carries pure noise by construction
  auto templates = default_templates();
  for (auto& [k, t] : templates) t.trials_per_session = 12;
  const auto cohort = generate_cohort(cfg, templates);

  const auto windows = preprocess_cohort(cohort);
  const auto split = split_by_participant(participants_of(cohort), 3, 9);
  const auto train_w = filter_windows(windows, split.train_participants);
  const auto eval_w = filter_windows(windows, split.test_participants);

  Architecture arch;
  arch.conv = {{8, 7, 0.1}, {8, 5, 0.1}};
  arch.hidden_units = 16;
  Hyperparams hp;
  hp.max_epochs = 20;
  auto [model, rep] = train_variant(train_w, arch, hp, 2, 7001);
  (void)rep;

  const auto imp = importance_scores(model, eval_w, 100, 31337);
  cr.note(fmt("baseline MCC %.3f", imp.baseline_mcc));
  for (const auto& c : imp.channels)
    cr.note(std::string(to_string(c.channel)) +
            fmt(": importance %.4f +/- %.4f", c.mean_importance, c.std_importance));

  const double i_pd = imp.channels[0].mean_importance;
  const double i_gx = imp.channels[1].mean_importance;
  const double i_gy = imp.channels[2].mean_importance;
  cr.expect(i_pd > i_gx + i_gy, "PD importance does not dominate the gaze channels");
  cr.expect(std::abs(i_gx) <= 0.05, fmt("GazeX importance %.3f outside +/-0.05", i_gx));
  cr.expect(std::abs(i_gy) <= 0.05, fmt("GazeY importance %.3f outside +/-0.05", i_gy));

  out.model = std::move(model);
  out.eval_windows = eval_w;
  for (const auto& rec : cohort)
    if (split.test_participants.count(rec.participant_id))
      out.eval_recordings.push_back(rec);
  return out;
}

void criterion_streaming(const NoiseGazeSetup& setup) {
  Criterion cr(8, "streaming equivalence, cadence, and the online delta");

  // gap-free single recording for the equivalence and cadence checks
  CohortConfig cfg;
  cfg.n_participants = 1;
  cfg.master_seed = 800;
  cfg.gap_rate = 0.0;
  auto templates = default_templates();
  for (auto& [k, t] : templates) t.trials_per_session = 6;
  const auto mini = generate_cohort(cfg, templates);
  const Recording& rec = mini.front();

  // frozen-baseline online pass vs offline predictions on the same windows
  StreamConfig scfg;
  scfg.freeze_baseline = true;
  const auto zs = fit_zscore(rec);
  for (const auto& p : zs) {
    scfg.frozen_mean[static_cast<std::size_t>(p.channel)] = p.mean;
    scfg.frozen_std[static_cast<std::size_t>(p.channel)] = p.std_dev;
  }
  StreamState state(setup.model, scfg);
  std::vector<std::pair<long, double>> online;
  for (std::size_t i = 0; i < rec.length(); ++i) {
    auto p = state.push_sample(static_cast<double>(i) / 250.0, rec.pd_mm[i],
                               rec.gaze_x[i], rec.gaze_y[i]);
    if (p) online.emplace_back(p->window_start_index, p->probability);
  }
  cr.expect(!online.empty(), "no online predictions produced");

  const Recording norm = apply_zscore(rec, zs);
  double worst = 0.0;
  for (const auto& [start, prob] : online) {
    LabeledWindow w;
    for (int c = 0; c < kNumChannels; ++c) {
      const auto& series = norm.channel(static_cast<Channel>(c));
      w.values[static_cast<std::size_t>(c)].assign(
          series.begin() + start, series.begin() + start + kWindowSamples);
    }
    worst = std::max(worst, std::abs(predict_proba(setup.model, {w})[0] - prob));
  }
  cr.note(fmt("max online/offline probability gap %.3g over %g windows", worst,
              double(online.size())));
  cr.expect(worst < 1e-9, fmt("online/offline gap %.3g >= 1e-9", worst));

  // default incremental mode: first prediction at 61.0 s +/- one stride,
  // cadence exactly 0.1 s
  const auto trace = replay_trace(setup.model, rec);
  cr.expect(!trace.empty(), "empty probability trace");
  if (!trace.empty()) {
    cr.note(fmt("first prediction at t = %.2f s", trace.front().first));
    cr.expect(std::abs(trace.front().first - 61.0) <= 0.1 + 1e-9,
              fmt("first prediction at %.3f s, not 61.0 +/- 0.1", trace.front().first));
    for (std::size_t i = 1; i < trace.size(); ++i)
      if (std::abs(trace[i].first - trace[i - 1].first - 0.1) > 1e-9) {
        cr.expect(false, fmt("cadence broke at t = %.3f s", trace[i].first));
        break;
      }
  }

  const auto result = streaming_eval(setup.model, setup.eval_recordings);
  cr.note(fmt("online MCC %.3f, offline MCC %.3f, delta %.3f", result.online_mcc,
              result.offline_mcc, result.delta));
  cr.expect(result.scored_windows > 0, "no windows scored by streaming_eval");
  cr.expect(result.delta <= 0.05, fmt("online-offline delta %.3f > 0.05", result.delta));
}

// ---------------------------------------------------------------- criterion 9

void criterion_welford() {
  Criterion cr(9, "incremental statistics vs batch statistics at n = 1e6");

  Rng rng(900);
  RunningStats stats;
  std::vector<double> xs;
  xs.reserve(1000000);
  for (int i = 0; i < 1000000; ++i) {
    const double x = rng.normal(-2.0, 7.0) + (i % 97 == 0 ? 50.0 : 0.0);
    stats.push(x);
    xs.push_back(x);
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());

  cr.expect(std::abs(stats.mean - mean) < 1e-9,
            fmt("mean deviation %.3g >= 1e-9", std::abs(stats.mean - mean)));
  cr.expect(std::abs(stats.std_dev() - std::sqrt(var)) < 1e-9,
            fmt("std deviation %.3g >= 1e-9", std::abs(stats.std_dev() - std::sqrt(var))));
}

// --------------------------------------------------------------- criterion 10

void criterion_persistence() {
  Criterion cr(10, "weight and window archives round-trip and reject corruption");

  const auto dir = std::filesystem::temp_directory_path() / "pw_acceptance";
  std::filesystem::create_directories(dir);

  // weights
  Architecture arch;
  arch.conv = {{8, 5, 0.1}, {8, 3, 0.2}};
  arch.hidden_units = 8;
  const auto params = init_parameters(arch, 5);
  const auto wpath = dir / "model.pwnn";
  save_weights(params, wpath);
  const auto loaded = load_weights(wpath);
  cr.expect(loaded.theta == params.theta, "weight vector changed across the round trip");
  cr.expect(loaded.arch.in_channels == params.arch.in_channels &&
                loaded.arch.hidden_units == params.arch.hidden_units,
            "architecture header changed across the round trip");

  {
    std::fstream f(wpath, std::ios::in | std::ios::out | std::ios::binary);
    f.write("ZZZZ", 4);
  }
  bool threw = false;
  std::string msg;
  try { (void)load_weights(wpath); } catch (const std::exception& e) { threw = true; msg = e.what(); }
  cr.expect(threw && msg.find("bad magic") != std::string::npos,
            "corrupted weight magic not rejected with 'bad magic'");

  save_weights(params, wpath);
  std::filesystem::resize_file(wpath, std::filesystem::file_size(wpath) - 100);
  threw = false;
  try { (void)load_weights(wpath); } catch (const std::exception& e) { threw = true; msg = e.what(); }
  cr.expect(threw && msg.find("truncated") != std::string::npos,
            "truncated weight file not rejected");

  // window archive
  Recording rec;
  rec.participant_id = "P1";
  rec.session_id = "S1";
  rec.task = TaskKind::MA;
  const std::size_t n = 30 * 250;
  rec.pd_mm.resize(n);
  Rng rng(1);
  for (auto& v : rec.pd_mm) v = rng.normal();
  rec.gaze_x.assign(n, 0.0);
  rec.gaze_y.assign(n, 0.0);
  rec.stimulus_times_s = {10.0, 20.0};
  const auto windows = generate_labeled_samples(rec);
  const auto apath = dir / "windows.pwin";
  save_windows(windows, apath);
  const auto wloaded = load_windows(apath);
  bool same = wloaded.size() == windows.size();
  for (std::size_t i = 0; same && i < windows.size(); ++i)
    same = wloaded[i].values == windows[i].values && wloaded[i].label == windows[i].label &&
           wloaded[i].participant_id == windows[i].participant_id;
  cr.expect(same, "window archive changed across the round trip");

  {
    std::fstream f(apath, std::ios::in | std::ios::out | std::ios::binary);
    f.write("QQQQ", 4);
  }
  threw = false;
  try { (void)load_windows(apath); } catch (const std::exception& e) { threw = true; msg = e.what(); }
  cr.expect(threw && msg.find("bad magic") != std::string::npos,
            "corrupted archive magic not rejected with 'bad magic'");

  save_windows(windows, apath);
  std::filesystem::resize_file(apath, std::filesystem::file_size(apath) / 3);
  threw = false;
  try { (void)load_windows(apath); } catch (const std::exception&) { threw = true; }
  cr.expect(threw, "truncated window archive not rejected");

  std::filesystem::remove_all(dir);
}

}  // namespace

int main() {
  std::printf("pupilwatch acceptance suite\n");

  criterion_gradients();
  criterion_metrics();
  criterion_windows();
  criterion_leakage();
  criterion_welford();
  criterion_persistence();

  const auto setup = criterion_importance();
  criterion_streaming(setup);

  const auto models = criterion_end_to_end();
  criterion_cross_task(models);

  if (g_failures == 0) {
    std::printf("\nall 10 criteria passed\n");
    return 0;
  }
  std::printf("\n%d criteria FAILED\n", g_failures);
  return 1;
}
