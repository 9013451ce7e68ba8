#ifndef PUPILWATCH_IMPORTANCE_HPP
#define PUPILWATCH_IMPORTANCE_HPP

#include <cstdint>
#include <vector>

#include "pupilwatch/neural.hpp"
#include "pupilwatch/preprocessing.hpp"

namespace pupilwatch {

struct ChannelImportance {
  Channel channel;
  double mean_importance = 0.0;  // mean of (s_base - s_i) over repetitions
  double std_importance = 0.0;   // population std of the same differences
};

struct ImportanceReport {
  std::vector<ChannelImportance> channels;
  int repetitions = 0;
  double baseline_mcc = 0.0;
  bool baseline_degenerate = false;
};

/// Replaces every value of one channel with an i.i.d. draw (with
/// replacement) from that channel's pooled empirical distribution over the
/// whole window set. Distribution preserved, temporal structure destroyed.
std::vector<LabeledWindow> distort_channel(const std::vector<LabeledWindow>& windows,
                                           Channel channel, std::uint64_t seed);

/// Permutation feature importance: I_j = mean over N repetitions of
/// (baseline MCC - MCC after distorting channel j).
ImportanceReport importance_scores(const ModelParameters& model,
                                   const std::vector<LabeledWindow>& windows,
                                   int repetitions, std::uint64_t seed);

std::string importance_csv(const ImportanceReport& report);

}  // namespace pupilwatch

#endif
