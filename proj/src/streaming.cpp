#include "pupilwatch/streaming.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pupilwatch/evaluation.hpp"
#include "pupilwatch/preprocessing.hpp"

namespace pupilwatch {

double RunningStats::std_dev() const { return std::sqrt(variance()); }

StreamState::StreamState(const ModelParameters& model, StreamConfig config)
    : model_(model), config_(config) {
  for (auto& r : ring_) r.assign(kWindowSamples, 0.0);
  ring_missing_.assign(kWindowSamples, false);
  warmup_samples_ =
      static_cast<std::uint64_t>(std::llround(config_.baseline_s * kSampleRateHz));
}

std::optional<StreamPrediction> StreamState::push_sample(double t_s, double pd,
                                                         double gx, double gy) {
  if (t_s <= last_t_) throw std::runtime_error("time regression in stream");
  last_t_ = t_s;

  const double values[kNumChannels] = {pd, gx, gy};
  const std::size_t pos = samples_seen_ % kWindowSamples;
  bool any_missing = false;
  for (int c = 0; c < kNumChannels; ++c) {
    const double x = values[c];
    ring_[static_cast<std::size_t>(c)][pos] = x;
    if (is_missing(x)) {
      any_missing = true;
    } else {
      // Missing samples never update the baseline.
      stats_[static_cast<std::size_t>(c)].push(x);
    }
  }
  ring_missing_[pos] = any_missing;
  ++samples_seen_;

  const std::uint64_t first = warmup_samples_ + kWindowSamples;
  if (samples_seen_ < first ||
      (samples_seen_ - first) % static_cast<std::uint64_t>(config_.stride_samples) != 0)
    return std::nullopt;

  for (bool m : ring_missing_)
    if (m) return std::nullopt;  // cadence resumes at the next complete stride

  // Normalize the window with the statistics as of its last sample.
  std::vector<double> input(
      static_cast<std::size_t>(model_.arch.in_channels) * kWindowSamples);
  for (int c = 0; c < model_.arch.in_channels; ++c) {
    double mean, sd;
    if (config_.freeze_baseline) {
      mean = config_.frozen_mean[static_cast<std::size_t>(c)];
      sd = config_.frozen_std[static_cast<std::size_t>(c)];
    } else {
      mean = stats_[static_cast<std::size_t>(c)].mean;
      sd = stats_[static_cast<std::size_t>(c)].std_dev();
    }
    for (int i = 0; i < kWindowSamples; ++i) {
      // ring is chronological starting right after the write position
      const std::size_t src = (pos + 1 + static_cast<std::size_t>(i)) % kWindowSamples;
      const double x = ring_[static_cast<std::size_t>(c)][src];
      input[static_cast<std::size_t>(c) * kWindowSamples + static_cast<std::size_t>(i)] =
          sd > 0.0 ? (x - mean) / sd : 0.0;
    }
  }

  StreamPrediction pred;
  pred.window_start_index = static_cast<long>(samples_seen_) - kWindowSamples;
  pred.time_s = static_cast<double>(samples_seen_) / kSampleRateHz;
  pred.probability = forward(model_, input).p_clf;
  return pred;
}

std::vector<DetectedEvent> extract_events(
    const std::vector<std::pair<double, double>>& trace, double threshold,
    double refractory_s) {
  std::vector<DetectedEvent> events;
  bool above = false;
  for (const auto& [t, p] : trace) {
    if (p >= threshold) {
      if (!above) {
        // rising edge
        if (!events.empty() && t - events.back().crossing_time_s <= refractory_s) {
          // merge into the previous event; keep its onset
        } else {
          DetectedEvent e;
          e.crossing_time_s = t;
          e.onset_estimate_s = t - 0.5;
          e.peak_probability = p;
          events.push_back(e);
        }
        above = true;
      }
      if (!events.empty())
        events.back().peak_probability = std::max(events.back().peak_probability, p);
    } else {
      above = false;
    }
  }
  return events;
}

namespace {

StreamConfig config_for(const ModelParameters& model, const Recording& rec,
                        bool freeze_baseline) {
  StreamConfig cfg;
  cfg.freeze_baseline = freeze_baseline;
  if (freeze_baseline) {
    const auto params = fit_zscore(rec);
    for (const auto& p : params) {
      cfg.frozen_mean[static_cast<std::size_t>(p.channel)] = p.mean;
      cfg.frozen_std[static_cast<std::size_t>(p.channel)] = p.degenerate ? 0.0 : p.std_dev;
    }
  }
  (void)model;
  return cfg;
}

}  // namespace

std::vector<std::pair<double, double>> replay_trace(const ModelParameters& model,
                                                    const Recording& recording,
                                                    bool freeze_baseline) {
  StreamState state(model, config_for(model, recording, freeze_baseline));
  std::vector<std::pair<double, double>> trace;
  for (std::size_t i = 0; i < recording.length(); ++i) {
    const double t = static_cast<double>(i) / kSampleRateHz;
    auto pred = state.push_sample(t, recording.pd_mm[i], recording.gaze_x[i],
                                  recording.gaze_y[i]);
    if (pred) trace.emplace_back(pred->time_s, pred->probability);
  }
  return trace;
}

StreamingEvalResult streaming_eval(const ModelParameters& model,
                                   const std::vector<Recording>& recordings,
                                   bool freeze_baseline) {
  constexpr long kGridOrigin = 60 * 250;  // first scored window start
  constexpr long kStride = 25;

  std::vector<int> online_labels, offline_labels;
  std::vector<double> online_probs, offline_probs;

  for (const Recording& rec : recordings) {
    // Online pass, predictions indexed by window start.
    StreamState state(model, config_for(model, rec, freeze_baseline));
    std::vector<std::pair<long, double>> by_start;
    for (std::size_t i = 0; i < rec.length(); ++i) {
      const double t = static_cast<double>(i) / kSampleRateHz;
      auto pred = state.push_sample(t, rec.pd_mm[i], rec.gaze_x[i], rec.gaze_y[i]);
      if (pred) by_start.emplace_back(pred->window_start_index, pred->probability);
    }

    for (double st : rec.stimulus_times_s) {
      const long idx = time_to_index(st, rec.sample_rate_hz);
      const long starts[3] = {idx - 125, idx + 125, idx + 375};
      const int labels[3] = {0, 1, 0};
      for (int k = 0; k < 3; ++k) {
        // snap to the nearest stride of the prediction grid
        const long rel = starts[k] - kGridOrigin;
        const long snapped =
            kGridOrigin +
            static_cast<long>(std::llround(static_cast<double>(rel) / kStride)) * kStride;
        auto it = std::lower_bound(
            by_start.begin(), by_start.end(), snapped,
            [](const std::pair<long, double>& a, long v) { return a.first < v; });
        if (it != by_start.end() && it->first == snapped) {
          online_labels.push_back(labels[k]);
          online_probs.push_back(it->second);
        }
      }
    }

    // Offline reference on the same recordings.
    const Recording normalized = apply_zscore(rec, fit_zscore(rec));
    const auto windows = generate_labeled_samples(normalized);
    const auto probs = predict_proba(model, windows);
    for (std::size_t i = 0; i < windows.size(); ++i) {
      offline_labels.push_back(windows[i].label);
      offline_probs.push_back(probs[i]);
    }
  }

  StreamingEvalResult result;
  result.scored_windows = online_labels.size();
  if (!online_labels.empty())
    result.online_mcc = mcc(confusion(online_labels, online_probs));
  if (!offline_labels.empty())
    result.offline_mcc = mcc(confusion(offline_labels, offline_probs));
  result.delta = result.online_mcc - result.offline_mcc;
  return result;
}

}  // namespace pupilwatch
