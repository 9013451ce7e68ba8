#ifndef PUPILWATCH_TYPES_HPP
#define PUPILWATCH_TYPES_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace pupilwatch {

inline constexpr double kSampleRateHz = 250.0;
inline constexpr int kWindowSamples = 250;
inline constexpr int kNumChannels = 3;

enum class TaskKind : std::uint8_t { DPT, MA, PVT, VWM };

inline constexpr std::array<TaskKind, 4> kAllTasks = {TaskKind::DPT, TaskKind::MA,
                                                      TaskKind::PVT, TaskKind::VWM};

std::string to_string(TaskKind t);
bool task_from_string(const std::string& s, TaskKind& out);

// Missing samples (blinks, dropped frames) are carried as quiet NaN.
// On disk they round-trip as an empty CSV field.
inline double missing_marker() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double x) { return std::isnan(x); }

enum class Channel : int { PD = 0, GazeX = 1, GazeY = 2 };

std::string to_string(Channel c);

/// One participant/session/task recording at 250 Hz.
struct Recording {
  std::string participant_id;
  std::string session_id;
  TaskKind task = TaskKind::DPT;
  double sample_rate_hz = kSampleRateHz;
  std::vector<double> pd_mm;
  std::vector<double> gaze_x;
  std::vector<double> gaze_y;
  std::vector<double> stimulus_times_s;

  std::size_t length() const { return pd_mm.size(); }
  double duration_s() const { return static_cast<double>(length()) / sample_rate_hz; }

  const std::vector<double>& channel(Channel c) const {
    switch (c) {
      case Channel::PD: return pd_mm;
      case Channel::GazeX: return gaze_x;
      default: return gaze_y;
    }
  }
  std::vector<double>& channel(Channel c) {
    return const_cast<std::vector<double>&>(
        static_cast<const Recording*>(this)->channel(c));
  }
};

/// Nearest-sample index of a time in seconds. Rounding error is at most 2 ms
/// at 250 Hz.
inline long time_to_index(double t_s, double rate_hz = kSampleRateHz) {
  return static_cast<long>(std::lround(t_s * rate_hz));
}

}  // namespace pupilwatch

#endif
