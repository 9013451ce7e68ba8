#include "pupilwatch/pipeline.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "pupilwatch/signal_model.hpp"

namespace pupilwatch {

std::vector<ModelVariant> all_variants() {
  std::vector<ModelVariant> out = {{"ALL", {}}};
  for (TaskKind t : kAllTasks) out.push_back({to_string(t), t});
  return out;
}

ModelVariant variant_by_name(const std::string& name) {
  for (const auto& v : all_variants())
    if (v.name == name) return v;
  throw std::runtime_error("unknown model variant: " + name);
}

std::vector<LabeledWindow> preprocess_cohort(const std::vector<Recording>& recordings) {
  std::vector<LabeledWindow> windows;
  for (const Recording& rec : recordings) {
    const Recording normalized = apply_zscore(rec, fit_zscore(rec));
    auto w = generate_labeled_samples(normalized);
    windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                   std::make_move_iterator(w.end()));
  }
  std::sort(windows.begin(), windows.end(),
            [](const LabeledWindow& a, const LabeledWindow& b) {
              return std::tie(a.participant_id, a.session_id, a.task, a.stimulus_index,
                              a.role) < std::tie(b.participant_id, b.session_id, b.task,
                                                 b.stimulus_index, b.role);
            });
  return windows;
}

std::vector<std::string> participants_of(const std::vector<Recording>& recordings) {
  std::vector<std::string> ids;
  for (const auto& r : recordings) ids.push_back(r.participant_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<LabeledWindow> filter_windows(const std::vector<LabeledWindow>& windows,
                                          const std::set<std::string>& participants,
                                          std::optional<TaskKind> task) {
  std::vector<LabeledWindow> out;
  for (const auto& w : windows) {
    if (!participants.count(w.participant_id)) continue;
    if (task && w.task != *task) continue;
    out.push_back(w);
  }
  return out;
}

std::pair<ModelParameters, TrainReport> train_variant(
    const std::vector<LabeledWindow>& train_windows, const Architecture& arch,
    const Hyperparams& hp, std::size_t n_val_participants, std::uint64_t seed) {
  if (train_windows.empty()) throw std::runtime_error("variant has zero windows");

  std::set<std::string> ids;
  for (const auto& w : train_windows) ids.insert(w.participant_id);

  std::vector<std::string> id_list(ids.begin(), ids.end());
  SplitSpec val_split;
  if (n_val_participants > 0 && n_val_participants < id_list.size())
    val_split = split_by_participant(id_list, n_val_participants, seed);
  else
    val_split.train_participants = ids;

  std::vector<LabeledWindow> fit_set, val_set;
  for (const auto& w : train_windows) {
    if (val_split.test_participants.count(w.participant_id))
      val_set.push_back(w);
    else
      fit_set.push_back(w);
  }
  return train(fit_set, val_set, arch, hp, seed);
}

}  // namespace pupilwatch
