#ifndef PUPILWATCH_STREAMING_HPP
#define PUPILWATCH_STREAMING_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "pupilwatch/neural.hpp"
#include "pupilwatch/types.hpp"

namespace pupilwatch {

/// Numerically stable running mean / population std (Welford).
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  double variance() const { return count ? m2 / static_cast<double>(count) : 0.0; }
  double std_dev() const;
};

struct StreamConfig {
  double baseline_s = 60.0;  // warm-up span before the first prediction
  int stride_samples = 25;   // 0.1 s between predictions
  bool freeze_baseline = false;
  // Used instead of the running statistics when freeze_baseline is set.
  std::array<double, kNumChannels> frozen_mean{};
  std::array<double, kNumChannels> frozen_std{};
};

struct StreamPrediction {
  double time_s = 0.0;  // window start + 1 s, when the window completes
  double probability = 0.0;
  long window_start_index = 0;
};

/// One live stream: running per-channel statistics, a 250-sample ring
/// buffer, and a stride counter. Memory is independent of stream length.
class StreamState {
 public:
  StreamState(const ModelParameters& model, StreamConfig config);

  /// Feeds one 4 ms sample (missing values allowed). Returns a prediction
  /// when a stride boundary lands on a complete window after warm-up.
  /// Throws on time regression.
  std::optional<StreamPrediction> push_sample(double t_s, double pd, double gx,
                                              double gy);

  std::uint64_t samples_seen() const { return samples_seen_; }
  const RunningStats& stats(Channel c) const {
    return stats_[static_cast<std::size_t>(c)];
  }

 private:
  const ModelParameters& model_;
  StreamConfig config_;
  std::array<RunningStats, kNumChannels> stats_;
  std::array<std::vector<double>, kNumChannels> ring_;
  std::vector<bool> ring_missing_;
  std::uint64_t samples_seen_ = 0;
  std::uint64_t warmup_samples_ = 0;
  double last_t_ = -1.0;
};

struct DetectedEvent {
  double onset_estimate_s = 0.0;  // first crossing minus the 0.5 s label lag
  double crossing_time_s = 0.0;
  double peak_probability = 0.0;
};

/// Rising-edge threshold crossings; crossings within the refractory span of
/// the previous one merge into the same event.
std::vector<DetectedEvent> extract_events(
    const std::vector<std::pair<double, double>>& trace, double threshold = 0.5,
    double refractory_s = 1.0);

struct StreamingEvalResult {
  double online_mcc = 0.0;
  double offline_mcc = 0.0;
  double delta = 0.0;  // online - offline
  std::uint64_t scored_windows = 0;
};

/// Replays recordings through the detector, scoring only strides that snap
/// to the canonical -0.5/+0.5/+1.5 s offsets so the online MCC is
/// label-compatible with the offline one. Also computes the offline MCC of
/// the same recordings for the delta.
StreamingEvalResult streaming_eval(const ModelParameters& model,
                                   const std::vector<Recording>& recordings,
                                   bool freeze_baseline = false);

/// Full probability trace for one recording, for trace/event CSV export.
std::vector<std::pair<double, double>> replay_trace(const ModelParameters& model,
                                                    const Recording& recording,
                                                    bool freeze_baseline = false);

}  // namespace pupilwatch

#endif
