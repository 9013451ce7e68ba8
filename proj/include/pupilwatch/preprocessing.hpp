#ifndef PUPILWATCH_PREPROCESSING_HPP
#define PUPILWATCH_PREPROCESSING_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "pupilwatch/types.hpp"

namespace pupilwatch {

/// Normalization statistics for one (participant, session, task, channel)
/// group. Fitting never crosses these boundaries, so deleting any other
/// group leaves the statistics untouched.
struct ZScoreParams {
  std::string participant_id;
  std::string session_id;
  TaskKind task;
  Channel channel;
  double mean = 0.0;
  double std_dev = 0.0;     // population std
  bool degenerate = false;  // std was zero; apply maps the channel to zeros
};

enum class WindowRole : std::uint8_t { Pre = 0, Onset = 1, Post = 2 };

std::string to_string(WindowRole r);

/// A 3x250 (or 1x250 in PD-only mode) normalized sample with its label.
struct LabeledWindow {
  std::array<std::vector<double>, kNumChannels> values;  // [channel][sample]
  std::uint8_t label = 0;
  WindowRole role = WindowRole::Pre;
  std::string participant_id;
  std::string session_id;
  TaskKind task = TaskKind::DPT;
  std::uint32_t stimulus_index = 0;
};

struct SplitSpec {
  std::set<std::string> train_participants;
  std::set<std::string> test_participants;
};

/// Per-channel mean and population std over the non-missing samples of one
/// recording. Throws if a channel is entirely missing.
std::vector<ZScoreParams> fit_zscore(const Recording& r);

/// (x - mean) / std per channel; degenerate channels map to all zeros;
/// missing markers pass through unchanged. Throws on identity mismatch.
Recording apply_zscore(const Recording& r, const std::vector<ZScoreParams>& params);

/// The three labeled windows per stimulus: [-0.5,0.5) s label 0,
/// [0.5,1.5) s label 1, [1.5,2.5) s label 0. Windows that leave the
/// recording or contain a missing sample are dropped.
std::vector<LabeledWindow> generate_labeled_samples(const Recording& normalized);

/// Deterministic participant-level split; throws when n_test covers the
/// whole cohort.
SplitSpec split_by_participant(const std::vector<std::string>& participants,
                               std::size_t n_test, std::uint64_t seed);

// Binary window archive: magic `PWIN`, version u16, count u64, then per
// window label u8, role u8, length-prefixed id strings, 750 LE doubles.
void save_windows(const std::vector<LabeledWindow>& windows,
                  const std::filesystem::path& path);
std::vector<LabeledWindow> load_windows(const std::filesystem::path& path);

void export_windows_csv(const std::vector<LabeledWindow>& windows,
                        const std::filesystem::path& path);

}  // namespace pupilwatch

#endif
