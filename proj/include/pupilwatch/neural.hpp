#ifndef PUPILWATCH_NEURAL_HPP
#define PUPILWATCH_NEURAL_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pupilwatch/preprocessing.hpp"
#include "pupilwatch/types.hpp"

namespace pupilwatch {

struct ConvLayerSpec {
  int out_channels;
  int kernel;       // odd; same-padding, stride 1
  double dropout;   // applied after the pool, train mode only
};

struct Architecture {
  int in_channels = 3;  // 1 in PD-only mode
  std::vector<ConvLayerSpec> conv = {{16, 7, 0.1}, {32, 5, 0.1}, {64, 3, 0.2}, {64, 3, 0.2}};
  int hidden_units = 64;   // first dense layer of the classification head
  double alpha = 0.004;    // reconstruction weight in the composite loss

  /// Sequence length after each pool, starting from 250.
  std::vector<int> pooled_lengths() const;
  /// Flattened feature count feeding both heads.
  int flat_features() const;
  /// Total parameter count.
  std::size_t parameter_count() const;
};

/// All weights, flattened in declaration order: per conv layer W then b,
/// then classification dense W1/b1/W2/b2, then reconstruction W/b.
struct ModelParameters {
  Architecture arch;
  std::vector<double> theta;
};

/// Offsets of each parameter group inside theta, for gradient reporting.
struct ParameterGroup {
  std::string name;
  std::size_t offset;
  std::size_t size;
};
std::vector<ParameterGroup> parameter_groups(const Architecture& arch);

ModelParameters init_parameters(const Architecture& arch, std::uint64_t seed);

struct PredictionPair {
  double p_clf = 0.5;
  std::vector<double> pd_recon;  // 250 values
};

/// One training sample in engine layout: channel-major in_ch x 250.
struct Sample {
  std::vector<double> input;
  double label = 0.0;
  std::string id;  // for diagnostics only
};

Sample to_sample(const LabeledWindow& w, int in_channels);

/// Inverted-dropout scale factors (0 or 1/(1-rate)) for one sample's pass,
/// one vector per conv layer sized out_channels * pooled_length. Derived
/// from the seed only, so a pass is reproducible anywhere.
struct DropoutMasks {
  std::vector<std::vector<double>> scale;
};
DropoutMasks make_dropout_masks(const Architecture& arch, std::uint64_t seed);

/// Forward pass. A null mask means inference (dropout off).
PredictionPair forward(const ModelParameters& params, const std::vector<double>& input,
                       const DropoutMasks* masks = nullptr);

/// Eq.-style composite objective: BCE(p, label) + alpha * MAE(recon, pd).
/// Probabilities are clamped to [1e-12, 1 - 1e-12] before the log.
double composite_loss(const PredictionPair& pred, double label,
                      const std::vector<double>& pd_input, double alpha);

/// Mean composite loss over a batch (masks parallel to the batch, may be null).
double batch_loss(const ModelParameters& params, const std::vector<Sample>& batch,
                  const std::vector<DropoutMasks>* masks = nullptr);

/// Exact reverse-mode gradient of the mean composite loss w.r.t. theta.
/// Deterministic for fixed masks regardless of thread count.
std::vector<double> backward_gradients(const ModelParameters& params,
                                       const std::vector<Sample>& batch,
                                       const std::vector<DropoutMasks>* masks = nullptr);

struct Hyperparams {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int max_epochs = 30;
  int patience = 5;  // epochs without a validation-MCC improvement
};

struct TrainReport {
  std::vector<double> epoch_train_loss;
  std::vector<double> epoch_val_mcc;
  int chosen_epoch = -1;  // 0-based epoch whose parameters are returned
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
};

/// Mini-batch Adam with early stopping on validation MCC. Fully
/// deterministic per seed.
std::pair<ModelParameters, TrainReport> train(const std::vector<LabeledWindow>& train_set,
                                              const std::vector<LabeledWindow>& val_set,
                                              const Architecture& arch,
                                              const Hyperparams& hp, std::uint64_t seed);

std::vector<double> predict_proba(const ModelParameters& params,
                                  const std::vector<LabeledWindow>& windows);

// Weight file: magic `PWNN`, version u16, channel mode u8, alpha f64,
// layer dims, then theta as LE doubles.
void save_weights(const ModelParameters& params, const std::filesystem::path& path);
ModelParameters load_weights(const std::filesystem::path& path);

/// Throws "channel-mode mismatch" when the model expects a different
/// channel count than the caller's data.
void ensure_channel_mode(const ModelParameters& params, int expected_channels);

}  // namespace pupilwatch

#endif
