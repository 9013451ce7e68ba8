#ifndef PUPILWATCH_SYNTH_HPP
#define PUPILWATCH_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "pupilwatch/types.hpp"

namespace pupilwatch {

enum class GazePattern : std::uint8_t {
  SaccadeThenDrift,
  FixateThenSaccade,
  SlowOpposed,
  HighVariance,
};

/// Per-participant generative parameters. Gains scale the task template;
/// a gain of 1 reproduces the template exactly.
struct ParticipantProfile {
  double baseline_pd_mm = 4.0;
  double constriction_gain = 1.0;
  double dilation_gain = 1.0;
  double plr_sensitivity = 1.0;  // scales the DPT-only extra constriction
  double noise_sd_mm = 0.05;
  double gaze_noise_sd = 5.0;
  std::uint64_t seed = 0;
};

/// Shape of the event-locked pupil response for one task.
struct TaskResponseTemplate {
  TaskKind task = TaskKind::DPT;
  double constriction_depth_mm = 0.0;
  double trough_time_s = 0.65;
  double redilation_end_s = 1.0;
  double overshoot_mm = 0.12;
  double overshoot_peak_s = 2.5;
  GazePattern gaze_pattern = GazePattern::SaccadeThenDrift;
  int trials_per_session = 0;
  double iti_min_s = 4.0;  // must stay >= 3.0 so label windows never collide
  double iti_max_s = 8.0;
};

/// Task templates with the published response shapes and trial counts.
std::map<TaskKind, TaskResponseTemplate> default_templates();

/// Deterministic participant sampling; roughly 80% of baselines land in
/// [3.5, 4.5] mm with tails below 3.0 and above 5.5.
ParticipantProfile sample_profile(std::uint64_t rng_seed);

struct TrialResponse {
  std::vector<double> dpd_mm;  // PD change relative to pre-stimulus baseline
  std::vector<double> gaze_x;
  std::vector<double> gaze_y;
};

/// One event's response curves sampled at 250 Hz over [0, duration_s).
/// The PD curve is a C1 piecewise cubic through the template anchors:
/// 0 at onset, -depth*gain at the trough, 0 at redilation end,
/// +overshoot*gain at the peak, 0 again one second later.
TrialResponse generate_trial_response(const ParticipantProfile& profile,
                                      const TaskResponseTemplate& tmpl,
                                      double duration_s,
                                      std::uint64_t gaze_seed = 0);

struct CohortConfig {
  int n_participants = 57;
  int sessions_per_participant = 1;
  std::uint64_t master_seed = 7;
  double lead_in_s = 61.0;        // quiet span before the first stimulus
  double tail_s = 4.0;
  double gap_rate = 0.02;         // expected missing-sample fraction
  int gap_min_samples = 10;       // 40 ms
  int gap_max_samples = 30;       // 120 ms
  double drift_amplitude_mm = 0.05;
  double drift_period_s = 67.0;
  double plr_extra_mm = 0.0;      // additive DPT constriction, scaled by plr_sensitivity
  bool gaze_informative = true;   // false: gaze channels carry pure noise
  bool ma_second_peak = false;    // optional late low-amplitude bump (MA only)
  // Overrides for controlled experiments; unset means sample per participant.
  std::optional<double> gain_override;
  std::optional<double> noise_override;
  std::optional<double> baseline_override;
};

/// Full cohort: one Recording per participant x session x task, fully
/// deterministic in (config, templates).
std::vector<Recording> generate_cohort(
    const CohortConfig& config,
    const std::map<TaskKind, TaskResponseTemplate>& templates);

/// Writes the cohort as CSV + manifest + a `cohort.params` provenance file.
void write_cohort(const std::vector<Recording>& cohort, const CohortConfig& config,
                  const std::filesystem::path& out_dir);

}  // namespace pupilwatch

#endif
