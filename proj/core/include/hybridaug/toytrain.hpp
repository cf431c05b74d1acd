#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hybridaug/hybrid.hpp"
#include "hybridaug/image.hpp"

namespace hybridaug::toy {

/// Two-class synthetic set whose label lives in the low-frequency band
/// (orientation of a smooth ramp) while a class-correlated Nyquist-band
/// texture offers a high-frequency shortcut.
struct SyntheticShiftDataset {
  LabeledBatch train;
  LabeledBatch test_clean;
  LabeledBatch test_hf_corrupt;
  std::size_t image_side = 16;
  std::size_t n_classes = 2;
};

struct DatasetOptions {
  std::size_t image_side = 16;
  double texture_amplitude = 0.2;
  double texture_label_correlation = 0.95;
  double ramp_min = 0.02;
  double ramp_max = 0.06;
  double clutter_amplitude = 0.1;
};

/// Low-pass kernel that annihilates the Nyquist-band textures exactly:
/// K = 3 with sigma = 1/sqrt(2 ln 2) gives taps [1/4, 1/2, 1/4].
GaussianKernel texture_cutoff_kernel();

/// Throws InvalidArgument when n_train or n_test < 2.
SyntheticShiftDataset generate_dataset(std::uint64_t seed, std::size_t n_train, std::size_t n_test,
                                       const DatasetOptions& options = {});

/// Orientation classifier applied to the LF component: 0 for a horizontal
/// ramp (intensity varies along x), 1 for a vertical one.
std::int64_t lf_label(const ImageTensor& lf);

/// Two-layer perceptron: input -> hidden (ReLU) -> 2 logits.
class TinyClassifier {
 public:
  TinyClassifier(std::size_t input_dim, std::size_t hidden, std::size_t classes, Rng& rng);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t classes() const { return classes_; }

  /// All parameters flattened: w1 (hidden x input), b1, w2 (classes x hidden), b2.
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }

  std::vector<double> logits(std::span<const float> input) const;
  std::int64_t predict(std::span<const float> input) const;

  /// Mean cross-entropy over the batch; accumulates d(loss)/d(param) * scale
  /// into `grad` when it is non-null (grad must be sized like parameters()).
  double loss_and_gradient(const LabeledBatch& batch, std::vector<double>* grad,
                           double scale = 1.0) const;

  bool finite() const;

 private:
  std::size_t input_dim_;
  std::size_t hidden_;
  std::size_t classes_;
  std::vector<double> params_;
};

enum class ToyAugment { kNone, kHaP, kHaPPP };

struct TrainOptions {
  std::size_t epochs = 200;
  double lr = 0.05;
  std::size_t batch_size = 32;
};

/// Minibatch gradient descent on cross-entropy. With augmentation, each
/// step's loss is the mean of the loss on the minibatch and on its augmented
/// copy. Throws TrainingDiverged on a non-finite loss.
TinyClassifier train(TinyClassifier model, const LabeledBatch& data, ToyAugment augment,
                     const AugmentConfig& cfg, const TrainOptions& options, Rng& rng);

double evaluate(const TinyClassifier& model, const LabeledBatch& data);

struct ExperimentOptions {
  std::size_t n_train = 512;
  std::size_t n_test = 512;
  std::size_t hidden = 64;
  TrainOptions train{};
  DatasetOptions dataset{};
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  double clean_acc_baseline = 0.0;
  double shifted_acc_baseline = 0.0;
  std::optional<double> clean_acc_ha;
  std::optional<double> shifted_acc_ha;
};

/// Augmentation config used by the experiment: default gate probabilities
/// with the texture cut-off kernel.
AugmentConfig experiment_config(std::uint64_t seed);

/// Trains a baseline and (unless augment == kNone) an augmented model with
/// identical initialization and minibatch order, then evaluates both on the
/// clean and high-frequency-shifted test sets.
ExperimentReport run_experiment(std::uint64_t seed, ToyAugment augment = ToyAugment::kHaP,
                                const ExperimentOptions& options = {});

}  // namespace hybridaug::toy
