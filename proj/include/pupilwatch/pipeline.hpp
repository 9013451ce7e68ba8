#ifndef PUPILWATCH_PIPELINE_HPP
#define PUPILWATCH_PIPELINE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pupilwatch/neural.hpp"
#include "pupilwatch/preprocessing.hpp"
#include "pupilwatch/types.hpp"

namespace pupilwatch {

/// Model variants: ALL trains on every task, the rest filter to one task.
struct ModelVariant {
  std::string name;
  std::optional<TaskKind> task_filter;  // empty = all tasks
};

std::vector<ModelVariant> all_variants();
ModelVariant variant_by_name(const std::string& name);

/// Per-recording z-score fit + apply + window extraction, output sorted by
/// (participant, session, task, stimulus, role).
std::vector<LabeledWindow> preprocess_cohort(const std::vector<Recording>& recordings);

std::vector<std::string> participants_of(const std::vector<Recording>& recordings);

std::vector<LabeledWindow> filter_windows(const std::vector<LabeledWindow>& windows,
                                          const std::set<std::string>& participants,
                                          std::optional<TaskKind> task = {});

/// Splits off `n_val` participants from the window set (deterministic by
/// seed) and trains; validation drives early stopping.
std::pair<ModelParameters, TrainReport> train_variant(
    const std::vector<LabeledWindow>& train_windows, const Architecture& arch,
    const Hyperparams& hp, std::size_t n_val_participants, std::uint64_t seed);

}  // namespace pupilwatch

#endif
