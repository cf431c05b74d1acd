#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hybridaug/image.hpp"
#include "hybridaug/photometric_ops.hpp"
#include "hybridaug/random.hpp"
#include "hybridaug/spectral.hpp"

namespace hybridaug {

/// Hyperparameters of every augmentation variant. The seed is the only
/// source of randomness for file-based workflows.
struct AugmentConfig {
  std::size_t kernel_size = 3;
  double sigma = 0.5;
  double p_paired = 0.6;
  double p_single = 0.5;
  double p_inner_apr = 0.6;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when a probability leaves [0, 1], the kernel size
  /// is even or zero, or sigma is not positive.
  void validate() const;
  GaussianKernel kernel() const { return gaussian_kernel(kernel_size, sigma); }
};

/// N images of identical shape with one class label each.
struct LabeledBatch {
  std::vector<ImageTensor> images;
  std::vector<std::int64_t> labels;

  std::size_t size() const { return images.size(); }
  /// Throws InvalidArgument for an empty batch, mixed shapes, or a label count mismatch.
  void validate() const;
};

using Permutation = std::vector<std::size_t>;

// ---------------------------------------------------------------------------
// Amplitude-phase recombination

/// Image whose DFT has the phase of `phase_donor` and the amplitude of
/// `amplitude_donor`. Shapes must match.
ImageTensor apr_p(const ImageTensor& phase_donor, const ImageTensor& amplitude_donor);

/// Two augmented views of one image, the first donating phase and the second amplitude.
struct AprPlan {
  OpChain phase_view;
  OpChain amplitude_view;
};

AprPlan sample_apr_plan(Rng& rng);
ImageTensor apply_apr_plan(const ImageTensor& x, const AprPlan& plan);

/// apr_p(apply_chain(x, c1), apply_chain(x, c2)) with c1, c2 freshly sampled.
ImageTensor apr_s(const ImageTensor& x, Rng& rng);

// ---------------------------------------------------------------------------
// Paired variants (batch level)

/// Random choices of one paired call. `hf_source` is empty when the batch
/// gate did not fire; `amplitude_source` is set only for HA++ when the inner
/// amplitude swap fired.
struct PairedPlan {
  std::optional<Permutation> hf_source;
  std::optional<Permutation> amplitude_source;

  bool applied() const { return hf_source.has_value(); }
};

/// Draw order: gate, permutation, then (HA++ only) inner gate and second permutation.
PairedPlan sample_paired_plan(std::size_t batch_size, const AugmentConfig& cfg, Rng& rng,
                              bool amplitude_phase);

/// Output image i = LF'(x_i) + HF(x_pi(i)), where LF' is LF(x_i) or, with an
/// amplitude source rho, apr_p(LF(x_i), LF(x_rho(i))). Labels are unchanged:
/// they always follow the low-frequency / phase donor x_i.
LabeledBatch apply_paired_plan(const LabeledBatch& batch, const PairedPlan& plan,
                               const GaussianKernel& kernel);

LabeledBatch ha_p(const LabeledBatch& batch, const AugmentConfig& cfg, Rng& rng);
LabeledBatch ha_pp_p(const LabeledBatch& batch, const AugmentConfig& cfg, Rng& rng);

/// Batch-gated amplitude swap: output i = apr_p(x_i, x_pi(i)) with probability p_paired.
LabeledBatch apr_p_batch(const LabeledBatch& batch, const AugmentConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Single-image variants

/// Random choices of one single-image call.
struct SinglePlan {
  bool applied = false;
  OpChain first_view;
  OpChain second_view;
  std::optional<AprPlan> first_lf_apr;   // HA++ only
  std::optional<AprPlan> second_lf_apr;  // HA++ only
  bool lf_from_first = true;  // true: LF(v1) + HF(v2); false: LF(v2) + HF(v1)
};

/// Draw order: gate, chain 1, chain 2, [HA++: gate + two chains for LF(v1),
/// gate + two chains for LF(v2)], source selection.
SinglePlan sample_single_plan(const AugmentConfig& cfg, Rng& rng, bool amplitude_phase);

ImageTensor apply_single_plan(const ImageTensor& x, const SinglePlan& plan,
                              const GaussianKernel& kernel);

ImageTensor ha_s(const ImageTensor& x, const AugmentConfig& cfg, Rng& rng);
ImageTensor ha_pp_s(const ImageTensor& x, const AugmentConfig& cfg, Rng& rng);

/// apr_s gated by p_single.
ImageTensor apr_s_gated(const ImageTensor& x, const AugmentConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Dispatch

enum class AugmentMode {
  kAprS,
  kAprP,
  kHaS,
  kHaP,
  kHaPPS,    // ha_pp_s
  kHaPPP,    // ha_pp_p
  kHaPS,     // ha_p then ha_s
  kHaPPPS,   // ha_pp_p then ha_pp_s
  kAprPS,    // apr_p then apr_s
};

std::string_view mode_name(AugmentMode mode);
/// Accepts apr_s, apr_p, ha_s, ha_p, ha_pp_s, ha_pp_p, ha_ps, ha_pp_ps, apr_ps.
/// Throws InvalidArgument otherwise.
AugmentMode parse_mode(std::string_view name);

/// Applies `mode` to the batch. Paired variants consume `rng` directly. The
/// single-image stage draws one base value from `rng` and gives image i its
/// own stream seeded with derive_seed(base, i), so per-image work can run in
/// any order with identical results. The original batch is not included in
/// the output.
LabeledBatch augment_batch(const LabeledBatch& batch, AugmentMode mode, const AugmentConfig& cfg,
                           Rng& rng);

}  // namespace hybridaug
