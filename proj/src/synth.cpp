#include "pupilwatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pupilwatch/csv_io.hpp"
#include "pupilwatch/rng.hpp"
#include "pupilwatch/signal_model.hpp"

namespace pupilwatch {

namespace {

// Smoothstep-style cubic with zero slope at both ends.
double hermite01(double u) { return u * u * (3.0 - 2.0 * u); }

// Piecewise cubic through (t_k, v_k) anchors, flat tangents, 0 outside.
double anchored_curve(double t, const std::vector<std::pair<double, double>>& anchors) {
  if (anchors.empty() || t <= anchors.front().first) return 0.0;
  if (t >= anchors.back().first) return 0.0;
  for (std::size_t k = 1; k < anchors.size(); ++k) {
    if (t <= anchors[k].first) {
      const auto& [t0, v0] = anchors[k - 1];
      const auto& [t1, v1] = anchors[k];
      const double u = (t - t0) / (t1 - t0);
      return v0 + (v1 - v0) * hermite01(u);
    }
  }
  return 0.0;
}

double pd_delta_at(double t, const TaskResponseTemplate& tmpl, double depth_eff,
                   double overshoot_eff) {
  const double decay_end = tmpl.overshoot_peak_s + 1.0;
  return anchored_curve(t, {{0.0, 0.0},
                            {tmpl.trough_time_s, -depth_eff},
                            {tmpl.redilation_end_s, 0.0},
                            {tmpl.overshoot_peak_s, overshoot_eff},
                            {decay_end, 0.0}});
}

void add_gaze_pattern(GazePattern pattern, double t, double amp, double& gx, double& gy) {
  switch (pattern) {
    case GazePattern::SaccadeThenDrift:
      // quick jump at 0.2 s, linear drift back over ~1.8 s
      if (t >= 0.2 && t < 2.0) {
        const double frac = 1.0 - (t - 0.2) / 1.8;
        gx += amp * frac;
        gy += 0.3 * amp * frac;
      }
      break;
    case GazePattern::FixateThenSaccade:
      if (t >= 0.4 && t < 1.5) {
        gx += amp;
        gy -= 0.5 * amp;
      }
      break;
    case GazePattern::SlowOpposed:
      // kept well below the gaze noise floor: the MA signature lives in the
      // PD channel, and a large slow sweep would mimic the PVT saccade step
      // inside every window of the trial
      if (t >= 0.0 && t < 3.0) {
        const double s = std::sin(3.14159265358979323846 * t / 3.0);
        gx += 0.08 * amp * s;
        gy -= 0.08 * amp * s;
      }
      break;
    case GazePattern::HighVariance:
      // the event signature for VWM lives mostly in variance, added by the
      // caller as inflated noise; only a mild deflection here
      if (t >= 0.1 && t < 2.0) gy += 0.4 * amp;
      break;
  }
}

}  // namespace

std::map<TaskKind, TaskResponseTemplate> default_templates() {
  std::map<TaskKind, TaskResponseTemplate> out;

  TaskResponseTemplate dpt;
  dpt.task = TaskKind::DPT;
  dpt.constriction_depth_mm = 0.4;
  dpt.trough_time_s = 0.65;
  dpt.redilation_end_s = 1.6;
  dpt.gaze_pattern = GazePattern::SaccadeThenDrift;
  dpt.trials_per_session = 160;
  out[TaskKind::DPT] = dpt;

  TaskResponseTemplate ma;
  ma.task = TaskKind::MA;
  ma.constriction_depth_mm = 0.08;
  ma.trough_time_s = 0.65;
  ma.redilation_end_s = 1.0;
  ma.gaze_pattern = GazePattern::SlowOpposed;
  ma.trials_per_session = 40;
  out[TaskKind::MA] = ma;

  TaskResponseTemplate pvt;
  pvt.task = TaskKind::PVT;
  pvt.constriction_depth_mm = 0.0;
  pvt.trough_time_s = 0.25;  // pupil stays flat for the first half second
  pvt.redilation_end_s = 0.5;
  pvt.gaze_pattern = GazePattern::FixateThenSaccade;
  pvt.trials_per_session = 77;
  out[TaskKind::PVT] = pvt;

  TaskResponseTemplate vwm;
  vwm.task = TaskKind::VWM;
  vwm.constriction_depth_mm = 0.08;
  vwm.trough_time_s = 0.65;
  vwm.redilation_end_s = 1.0;
  vwm.gaze_pattern = GazePattern::HighVariance;
  vwm.trials_per_session = 48;
  out[TaskKind::VWM] = vwm;

  return out;
}

ParticipantProfile sample_profile(std::uint64_t rng_seed) {
  Rng rng(mix_seed(rng_seed, 0xbadc0ffee0ddf00dULL));
  ParticipantProfile p;
  // Baseline: narrow core around 4 mm plus a wide minority component so a
  // cohort shows both sub-3 and above-5.5 medians.
  const double sd = rng.uniform() < 0.85 ? 0.32 : 1.2;
  p.baseline_pd_mm = std::clamp(rng.normal(4.0, sd), 2.0, 7.0);
  p.constriction_gain = std::clamp(rng.normal(1.0, 0.3), 0.0, 2.0);
  p.dilation_gain = std::clamp(rng.normal(1.0, 0.3), 0.0, 2.0);
  p.plr_sensitivity = std::clamp(rng.normal(1.0, 0.3), 0.0, 2.0);
  p.noise_sd_mm = rng.uniform(0.03, 0.08);
  p.gaze_noise_sd = rng.uniform(3.0, 8.0);
  p.seed = rng_seed;
  return p;
}

TrialResponse generate_trial_response(const ParticipantProfile& profile,
                                      const TaskResponseTemplate& tmpl,
                                      double duration_s, std::uint64_t gaze_seed) {
  if (duration_s < 3.5) throw std::runtime_error("trial duration must be >= 3.5 s");
  const auto n = static_cast<std::size_t>(std::lround(duration_s * kSampleRateHz));

  double depth_eff = tmpl.constriction_depth_mm * profile.constriction_gain;
  const double overshoot_eff = tmpl.overshoot_mm * profile.dilation_gain;

  TrialResponse resp;
  resp.dpd_mm.resize(n);
  resp.gaze_x.assign(n, 0.0);
  resp.gaze_y.assign(n, 0.0);

  Rng rng(mix_seed(profile.seed, gaze_seed));
  const double amp = 4.0 * profile.gaze_noise_sd;  // saccade amplitude tracks scatter
  const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kSampleRateHz;
    resp.dpd_mm[i] = pd_delta_at(t, tmpl, depth_eff, overshoot_eff);
    add_gaze_pattern(tmpl.gaze_pattern, t, side * amp, resp.gaze_x[i], resp.gaze_y[i]);
  }
  return resp;
}

std::vector<Recording> generate_cohort(
    const CohortConfig& config,
    const std::map<TaskKind, TaskResponseTemplate>& templates) {
  if (config.n_participants < 1) throw std::runtime_error("need >= 1 participant");
  for (TaskKind t : kAllTasks)
    if (!templates.count(t))
      throw std::runtime_error("template map missing task " + to_string(t));

  std::vector<Recording> cohort;
  const double dt = 1.0 / kSampleRateHz;

  for (int p = 0; p < config.n_participants; ++p) {
    ParticipantProfile profile =
        sample_profile(mix_seed(config.master_seed, static_cast<std::uint64_t>(p)));
    if (config.gain_override) {
      profile.constriction_gain = *config.gain_override;
      profile.dilation_gain = *config.gain_override;
      profile.plr_sensitivity = *config.gain_override;
    }
    if (config.noise_override) {
      profile.noise_sd_mm = *config.noise_override;
      profile.gaze_noise_sd = *config.noise_override;
    }
    if (config.baseline_override) profile.baseline_pd_mm = *config.baseline_override;

    for (int s = 0; s < config.sessions_per_participant; ++s) {
      for (TaskKind task : kAllTasks) {
        const TaskResponseTemplate& tmpl = templates.at(task);
        Rng rng(mix_seed(mix_seed(config.master_seed, 0x7265636fULL),
                         static_cast<std::uint64_t>(((p * 64 + s) << 3) |
                                                    static_cast<int>(task))));

        Recording r;
        r.participant_id = "P" + std::to_string(p + 1);
        r.session_id = "S" + std::to_string(s + 1);
        r.task = task;

        // Stimulus times, snapped to the sample grid.
        double t = config.lead_in_s;
        for (int k = 0; k < tmpl.trials_per_session; ++k) {
          t += rng.uniform(tmpl.iti_min_s, tmpl.iti_max_s);
          const long idx = time_to_index(t);
          r.stimulus_times_s.push_back(static_cast<double>(idx) * dt);
        }
        const double duration = r.stimulus_times_s.back() + config.tail_s;
        const auto n = static_cast<std::size_t>(std::lround(duration * kSampleRateHz));

        const double phase = rng.uniform(0.0, 6.283185307179586);
        const double depth_eff =
            tmpl.constriction_depth_mm * profile.constriction_gain +
            (task == TaskKind::DPT ? config.plr_extra_mm * profile.plr_sensitivity
                                   : 0.0);
        const double overshoot_eff = tmpl.overshoot_mm * profile.dilation_gain;

        r.pd_mm.assign(n, profile.baseline_pd_mm);
        r.gaze_x.assign(n, 0.0);
        r.gaze_y.assign(n, 0.0);

        if (config.drift_amplitude_mm > 0.0) {
          for (std::size_t i = 0; i < n; ++i)
            r.pd_mm[i] += config.drift_amplitude_mm *
                          std::sin(6.283185307179586 * (static_cast<double>(i) * dt) /
                                       config.drift_period_s +
                                   phase);
        }

        // Superimpose one response per trial.
        std::size_t trial_idx = 0;
        for (double st : r.stimulus_times_s) {
          const auto start = static_cast<std::size_t>(time_to_index(st));
          const auto span = static_cast<std::size_t>(
              std::lround((tmpl.overshoot_peak_s + 1.0) * kSampleRateHz)) + 1;
          Rng trial_rng = rng.fork(0x74726c00ULL + trial_idx);
          const double side = trial_rng.uniform() < 0.5 ? -1.0 : 1.0;
          const double amp = 4.0 * profile.gaze_noise_sd * side;
          for (std::size_t i = 0; i < span && start + i < n; ++i) {
            const double tt = static_cast<double>(i) * dt;
            r.pd_mm[start + i] += pd_delta_at(tt, tmpl, depth_eff, overshoot_eff);
            if (config.gaze_informative)
              add_gaze_pattern(tmpl.gaze_pattern, tt, amp, r.gaze_x[start + i],
                               r.gaze_y[start + i]);
          }
          if (config.ma_second_peak && task == TaskKind::MA) {
            const auto late = static_cast<std::size_t>(
                std::lround((st + trial_rng.uniform(4.0, 5.0)) * kSampleRateHz));
            const auto bump = static_cast<std::size_t>(std::lround(0.8 * kSampleRateHz));
            for (std::size_t i = 0; late + i < n && i < bump; ++i) {
              const double u = static_cast<double>(i) / static_cast<double>(bump);
              r.pd_mm[late + i] += 0.05 * std::sin(3.14159265358979 * u);
            }
          }
          ++trial_idx;
        }

        // Measurement noise. VWM gaze variance is inflated, which is the
        // channel-level signature the task is known for.
        const double gsd =
            profile.gaze_noise_sd * (tmpl.gaze_pattern == GazePattern::HighVariance
                                         ? 3.0
                                         : 1.0);
        if (profile.noise_sd_mm > 0.0 || gsd > 0.0) {
          Rng noise_rng = rng.fork(0x6e6f6973ULL);
          for (std::size_t i = 0; i < n; ++i) {
            r.pd_mm[i] += noise_rng.normal(0.0, profile.noise_sd_mm);
            r.gaze_x[i] += noise_rng.normal(0.0, gsd);
            r.gaze_y[i] += noise_rng.normal(0.0, gsd);
          }
        }
        for (std::size_t i = 0; i < n; ++i)
          r.pd_mm[i] = std::clamp(r.pd_mm[i], 1.001, 8.999);

        // Bursty missing-data gaps across all three channels.
        if (config.gap_rate > 0.0) {
          Rng gap_rng = rng.fork(0x67617073ULL);
          const double mean_burst =
              0.5 * (config.gap_min_samples + config.gap_max_samples);
          const double p_start = config.gap_rate / mean_burst;
          std::size_t i = 0;
          while (i < n) {
            if (gap_rng.uniform() < p_start) {
              const auto burst = static_cast<std::size_t>(
                  config.gap_min_samples +
                  gap_rng.below(static_cast<std::uint64_t>(config.gap_max_samples -
                                                           config.gap_min_samples + 1)));
              for (std::size_t j = 0; j < burst && i + j < n; ++j) {
                r.pd_mm[i + j] = missing_marker();
                r.gaze_x[i + j] = missing_marker();
                r.gaze_y[i + j] = missing_marker();
              }
              i += burst;
            } else {
              ++i;
            }
          }
        }

        cohort.push_back(std::move(r));
      }
    }
  }
  return cohort;
}

void write_cohort(const std::vector<Recording>& cohort, const CohortConfig& config,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<ManifestEntry> entries;
  for (const Recording& r : cohort) {
    const std::string stem =
        r.participant_id + "_" + r.session_id + "_" + to_string(r.task);
    ManifestEntry e;
    e.participant_id = r.participant_id;
    e.session_id = r.session_id;
    e.task = r.task;
    e.samples_path = stem + ".csv";
    e.events_path = stem + "_events.csv";
    write_recording_csv(r, out_dir / e.samples_path, out_dir / e.events_path);
    entries.push_back(std::move(e));
  }
  write_manifest(entries, out_dir / "manifest.txt");

  std::ofstream f(out_dir / "cohort.params");
  f << "n_participants " << config.n_participants << "\n"
    << "sessions_per_participant " << config.sessions_per_participant << "\n"
    << "master_seed " << config.master_seed << "\n"
    << "lead_in_s " << config.lead_in_s << "\n"
    << "tail_s " << config.tail_s << "\n"
    << "gap_rate " << config.gap_rate << "\n"
    << "gap_min_samples " << config.gap_min_samples << "\n"
    << "gap_max_samples " << config.gap_max_samples << "\n"
    << "drift_amplitude_mm " << config.drift_amplitude_mm << "\n"
    << "drift_period_s " << config.drift_period_s << "\n"
    << "plr_extra_mm " << config.plr_extra_mm << "\n"
    << "gaze_informative " << (config.gaze_informative ? 1 : 0) << "\n"
    << "ma_second_peak " << (config.ma_second_peak ? 1 : 0) << "\n";
}

}  // namespace pupilwatch
