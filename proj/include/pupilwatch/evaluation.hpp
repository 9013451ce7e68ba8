#ifndef PUPILWATCH_EVALUATION_HPP
#define PUPILWATCH_EVALUATION_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pupilwatch/types.hpp"

namespace pupilwatch {

struct ConfusionCounts {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::uint64_t total() const { return tp + tn + fp + fn; }
};

struct MetricsReport {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double f1 = 0.0;
  double auc = 0.5;
  double mcc = 0.0;
  double tnr = 0.0;
  double tpr = 0.0;
  bool mcc_degenerate = false;  // a marginal was zero; mcc reported as 0
  bool auc_defined = true;      // false when only one class is present
};

/// Threshold rule: predict 1 iff p >= threshold (a tie at 0.5 predicts 1).
ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<double>& probabilities,
                          double threshold = 0.5);

/// Matthews correlation; 0 with the degenerate flag when any marginal is 0.
double mcc(const ConfusionCounts& c, bool* degenerate = nullptr);

/// Accuracy/F1/TNR/TPR at threshold 0.5, AUC by the rank statistic with tie
/// averaging, MCC as above.
MetricsReport metrics_suite(const std::vector<int>& labels,
                            const std::vector<double>& probabilities);

struct CrossTaskCell {
  double tnr = 0.0;
  double tpr = 0.0;
  std::uint64_t n_windows = 0;
  bool same_task = false;
};

/// 5 models x (4 tasks + pooled column for the all-task row layout).
struct CrossTaskMatrix {
  std::vector<std::string> model_names;             // ALL, DPT, MA, PVT, VWM
  std::vector<std::string> dataset_names;           // DPT, MA, PVT, VWM, ALL(pooled)
  std::vector<std::vector<CrossTaskCell>> cells;    // [model][dataset]
};

/// Scores every model on every task's test windows. `probs_per_model`
/// carries each model's probabilities over the same window list, aligned
/// with `labels` and `tasks`.
CrossTaskMatrix cross_task_eval(const std::vector<std::string>& model_names,
                                const std::vector<std::vector<double>>& probs_per_model,
                                const std::vector<int>& labels,
                                const std::vector<TaskKind>& tasks);

std::string format_cross_task_table(const CrossTaskMatrix& m);
std::string cross_task_csv(const CrossTaskMatrix& m);

}  // namespace pupilwatch

#endif
