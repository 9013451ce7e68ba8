#include "pupilwatch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pupilwatch {

ConfusionCounts confusion(const std::vector<int>& labels,
                          const std::vector<double>& probabilities, double threshold) {
  if (labels.size() != probabilities.size() || labels.empty())
    throw std::runtime_error("labels/probabilities length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = probabilities[i] >= threshold;
    const bool truth = labels[i] != 0;
    if (pred && truth) ++c.tp;
    else if (pred && !truth) ++c.fp;
    else if (!pred && truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double mcc(const ConfusionCounts& c, bool* degenerate) {
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (degenerate) *degenerate = (denom == 0.0);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

namespace {

// Mann-Whitney AUC with tied scores averaged.
double rank_auc(const std::vector<int>& labels, const std::vector<double>& probs,
                bool& defined) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] != 0) {
      rank_sum_pos += rank[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    defined = false;
    return 0.5;
  }
  defined = true;
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace

MetricsReport metrics_suite(const std::vector<int>& labels,
                            const std::vector<double>& probabilities) {
  MetricsReport r;
  r.counts = confusion(labels, probabilities);
  const auto& c = r.counts;
  const double total = static_cast<double>(c.total());
  r.accuracy = static_cast<double>(c.tp + c.tn) / total;
  const double prec_den = static_cast<double>(c.tp + c.fp);
  const double rec_den = static_cast<double>(c.tp + c.fn);
  const double f1_den = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp) +
                        static_cast<double>(c.fn);
  r.f1 = f1_den > 0.0 ? 2.0 * static_cast<double>(c.tp) / f1_den : 0.0;
  r.tnr = (c.tn + c.fp) ? static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp) : 0.0;
  r.tpr = rec_den > 0.0 ? static_cast<double>(c.tp) / rec_den : 0.0;
  (void)prec_den;
  r.mcc = mcc(c, &r.mcc_degenerate);
  r.auc = rank_auc(labels, probabilities, r.auc_defined);
  return r;
}

CrossTaskMatrix cross_task_eval(const std::vector<std::string>& model_names,
                                const std::vector<std::vector<double>>& probs_per_model,
                                const std::vector<int>& labels,
                                const std::vector<TaskKind>& tasks) {
  if (model_names.size() != probs_per_model.size())
    throw std::runtime_error("model name/probability count mismatch");
  if (labels.size() != tasks.size())
    throw std::runtime_error("labels/tasks length mismatch");

  CrossTaskMatrix m;
  m.model_names = model_names;
  for (TaskKind t : kAllTasks) m.dataset_names.push_back(to_string(t));
  m.dataset_names.push_back("ALL");

  for (std::size_t mi = 0; mi < model_names.size(); ++mi) {
    const auto& probs = probs_per_model[mi];
    if (probs.size() != labels.size())
      throw std::runtime_error("probability vector length mismatch for model " +
                               model_names[mi]);
    std::vector<CrossTaskCell> row;
    for (std::size_t di = 0; di < m.dataset_names.size(); ++di) {
      const bool pooled = (di == kAllTasks.size());
      std::vector<int> sub_labels;
      std::vector<double> sub_probs;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (pooled || tasks[k] == kAllTasks[di]) {
          sub_labels.push_back(labels[k]);
          sub_probs.push_back(probs[k]);
        }
      }
      CrossTaskCell cell;
      cell.n_windows = sub_labels.size();
      if (!sub_labels.empty()) {
        const MetricsReport rep = metrics_suite(sub_labels, sub_probs);
        cell.tnr = rep.tnr;
        cell.tpr = rep.tpr;
      }
      // The all-task model counts as same-task everywhere; pooled column is
      // meaningful only for that row.
      cell.same_task = (model_names[mi] == "ALL") ||
                       (!pooled && model_names[mi] == m.dataset_names[di]);
      row.push_back(cell);
    }
    m.cells.push_back(std::move(row));
  }
  return m;
}

std::string format_cross_task_table(const CrossTaskMatrix& m) {
  std::ostringstream os;
  os << "model   ";
  for (const auto& d : m.dataset_names) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), " %14s", d.c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i < m.model_names.size(); ++i) {
    char head[16];
    std::snprintf(head, sizeof(head), "%-8s", m.model_names[i].c_str());
    os << head;
    for (const auto& cell : m.cells[i]) {
      char buf[40];
      if (cell.n_windows == 0) {
        std::snprintf(buf, sizeof(buf), " %14s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), "  (%.2f,%.2f)%s", cell.tnr, cell.tpr,
                      cell.same_task ? "*" : " ");
      }
      os << buf;
    }
    os << '\n';
  }
  os << "(TNR,TPR); * marks same-task cells\n";
  return os.str();
}

std::string cross_task_csv(const CrossTaskMatrix& m) {
  std::ostringstream os;
  os << "model,dataset,tnr,tpr,n_windows,same_task\n";
  for (std::size_t i = 0; i < m.model_names.size(); ++i)
    for (std::size_t j = 0; j < m.dataset_names.size(); ++j) {
      const auto& c = m.cells[i][j];
      os << m.model_names[i] << ',' << m.dataset_names[j] << ',' << c.tnr << ','
         << c.tpr << ',' << c.n_windows << ',' << (c.same_task ? 1 : 0) << '\n';
    }
  return os.str();
}

}  // namespace pupilwatch
