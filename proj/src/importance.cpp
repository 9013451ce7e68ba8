#include "pupilwatch/importance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pupilwatch/evaluation.hpp"
#include "pupilwatch/rng.hpp"

namespace pupilwatch {

std::vector<LabeledWindow> distort_channel(const std::vector<LabeledWindow>& windows,
                                           Channel channel, std::uint64_t seed) {
  const auto c = static_cast<std::size_t>(channel);
  std::vector<double> pool;
  pool.reserve(windows.size() * kWindowSamples);
  for (const auto& w : windows)
    pool.insert(pool.end(), w.values[c].begin(), w.values[c].end());
  if (pool.empty()) return windows;

  Rng rng(mix_seed(seed, 0x64697374ULL + c));
  std::vector<LabeledWindow> out = windows;
  for (auto& w : out)
    for (double& x : w.values[c]) x = pool[rng.below(pool.size())];
  return out;
}

ImportanceReport importance_scores(const ModelParameters& model,
                                   const std::vector<LabeledWindow>& windows,
                                   int repetitions, std::uint64_t seed) {
  if (repetitions < 1) throw std::runtime_error("repetitions must be >= 1");
  if (windows.empty()) throw std::runtime_error("no windows to score");

  std::vector<int> labels;
  labels.reserve(windows.size());
  for (const auto& w : windows) labels.push_back(w.label);

  ImportanceReport report;
  report.repetitions = repetitions;
  report.baseline_mcc = mcc(confusion(labels, predict_proba(model, windows)),
                            &report.baseline_degenerate);

  const int n_channels = model.arch.in_channels;
  for (int c = 0; c < n_channels; ++c) {
    const auto channel = static_cast<Channel>(c);
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < repetitions; ++i) {
      const auto distorted = distort_channel(
          windows, channel,
          mix_seed(seed, static_cast<std::uint64_t>(i) * 8 + static_cast<std::uint64_t>(c)));
      const double s_i = mcc(confusion(labels, predict_proba(model, distorted)));
      const double d = report.baseline_mcc - s_i;
      sum += d;
      sum_sq += d * d;
    }
    ChannelImportance ci;
    ci.channel = channel;
    ci.mean_importance = sum / repetitions;
    const double var =
        std::max(0.0, sum_sq / repetitions - ci.mean_importance * ci.mean_importance);
    ci.std_importance = std::sqrt(var);
    report.channels.push_back(ci);
  }
  return report;
}

std::string importance_csv(const ImportanceReport& report) {
  std::ostringstream os;
  os << "channel,mean_importance,std_importance,n,baseline_mcc\n";
  for (const auto& c : report.channels)
    os << to_string(c.channel) << ',' << c.mean_importance << ',' << c.std_importance
       << ',' << report.repetitions << ',' << report.baseline_mcc << '\n';
  return os.str();
}

}  // namespace pupilwatch
