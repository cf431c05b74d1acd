#include "hybridaug/hybrid.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <string>

#include "hybridaug/errors.hpp"

namespace hybridaug {

void AugmentConfig::validate() const {
  auto check_probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
    }
  };
  check_probability(p_paired, "p_paired");
  check_probability(p_single, "p_single");
  check_probability(p_inner_apr, "p_inner_apr");
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw InvalidArgument("kernel_size must be odd and positive");
  }
  if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
}

void LabeledBatch::validate() const {
  if (images.empty()) throw InvalidArgument("batch is empty");
  if (labels.size() != images.size()) {
    throw InvalidArgument("batch has " + std::to_string(images.size()) + " images but " +
                          std::to_string(labels.size()) + " labels");
  }
  const Shape& shape = images.front().shape();
  for (const auto& img : images) {
    if (img.shape() != shape) throw InvalidArgument("batch images have mixed shapes");
  }
}

// ---------------------------------------------------------------------------

ImageTensor apr_p(const ImageTensor& phase_donor, const ImageTensor& amplitude_donor) {
  if (phase_donor.shape() != amplitude_donor.shape()) {
    throw InvalidArgument("apr_p requires images of identical shape");
  }
  const Spectrum phase_spec = dft2(phase_donor);
  Spectrum amp_spec = dft2(amplitude_donor);
  Spectrum mixed{phase_spec.shape, std::move(amp_spec.amplitude), phase_spec.phase};
  InverseResult inv = idft2_checked(mixed);
  // Both donors are real, so the swap keeps conjugate symmetry.
  assert(inv.max_imag_residual <= 1e-5 * std::max(1.0, inv.max_abs_real));
  return std::move(inv.image);
}

AprPlan sample_apr_plan(Rng& rng) {
  AprPlan plan;
  plan.phase_view = sample_chain(rng);
  plan.amplitude_view = sample_chain(rng);
  return plan;
}

ImageTensor apply_apr_plan(const ImageTensor& x, const AprPlan& plan) {
  return apr_p(apply_chain(x, plan.phase_view), apply_chain(x, plan.amplitude_view));
}

ImageTensor apr_s(const ImageTensor& x, Rng& rng) { return apply_apr_plan(x, sample_apr_plan(rng)); }

// ---------------------------------------------------------------------------

namespace {

void validate_permutation(const Permutation& perm, std::size_t n) {
  if (perm.size() != n) throw InvalidArgument("permutation length does not match batch size");
  std::vector<bool> seen(n, false);
  for (std::size_t v : perm) {
    if (v >= n || seen[v]) throw InvalidArgument("not a permutation");
    seen[v] = true;
  }
}

}  // namespace

PairedPlan sample_paired_plan(std::size_t batch_size, const AugmentConfig& cfg, Rng& rng,
                              bool amplitude_phase) {
  PairedPlan plan;
  if (!rng.chance(cfg.p_paired)) return plan;
  plan.hf_source = rng.permutation(batch_size);
  if (amplitude_phase && rng.chance(cfg.p_inner_apr)) {
    plan.amplitude_source = rng.permutation(batch_size);
  }
  return plan;
}

LabeledBatch apply_paired_plan(const LabeledBatch& batch, const PairedPlan& plan,
                               const GaussianKernel& kernel) {
  batch.validate();
  if (!plan.applied()) return batch;
  const std::size_t n = batch.size();
  validate_permutation(*plan.hf_source, n);
  if (plan.amplitude_source) validate_permutation(*plan.amplitude_source, n);

  std::vector<FrequencyDecomposition> parts;
  parts.reserve(n);
  for (const auto& img : batch.images) parts.push_back(decompose(img, kernel));

  LabeledBatch out;
  out.labels = batch.labels;
  out.images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ImageTensor& hf = parts[(*plan.hf_source)[i]].hf;
    if (plan.amplitude_source) {
      const ImageTensor lf = apr_p(parts[i].lf, parts[(*plan.amplitude_source)[i]].lf);
      out.images.push_back(add(lf, hf));
    } else {
      out.images.push_back(add(parts[i].lf, hf));
    }
  }
  return out;
}

LabeledBatch ha_p(const LabeledBatch& batch, const AugmentConfig& cfg, Rng& rng) {
  batch.validate();
  cfg.validate();
  return apply_paired_plan(batch, sample_paired_plan(batch.size(), cfg, rng, false), cfg.kernel());
}

LabeledBatch ha_pp_p(const LabeledBatch& batch, const AugmentConfig& cfg, Rng& rng) {
  batch.validate();
  cfg.validate();
  return apply_paired_plan(batch, sample_paired_plan(batch.size(), cfg, rng, true), cfg.kernel());
}

LabeledBatch apr_p_batch(const LabeledBatch& batch, const AugmentConfig& cfg, Rng& rng) {
  batch.validate();
  cfg.validate();
  if (!rng.chance(cfg.p_paired)) return batch;
  const Permutation perm = rng.permutation(batch.size());
  LabeledBatch out;
  out.labels = batch.labels;
  out.images.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out.images.push_back(apr_p(batch.images[i], batch.images[perm[i]]));
  }
  return out;
}

// ---------------------------------------------------------------------------

SinglePlan sample_single_plan(const AugmentConfig& cfg, Rng& rng, bool amplitude_phase) {
  SinglePlan plan;
  if (!rng.chance(cfg.p_single)) return plan;
  plan.applied = true;
  plan.first_view = sample_chain(rng);
  plan.second_view = sample_chain(rng);
  if (amplitude_phase) {
    if (rng.chance(cfg.p_inner_apr)) plan.first_lf_apr = sample_apr_plan(rng);
    if (rng.chance(cfg.p_inner_apr)) plan.second_lf_apr = sample_apr_plan(rng);
  }
  // The first view donates LF when the draw exceeds p_single.
  plan.lf_from_first = !rng.chance(cfg.p_single);
  return plan;
}

ImageTensor apply_single_plan(const ImageTensor& x, const SinglePlan& plan,
                              const GaussianKernel& kernel) {
  if (!plan.applied) return x;
  FrequencyDecomposition first = decompose(apply_chain(x, plan.first_view), kernel);
  FrequencyDecomposition second = decompose(apply_chain(x, plan.second_view), kernel);
  if (plan.first_lf_apr) first.lf = apply_apr_plan(first.lf, *plan.first_lf_apr);
  if (plan.second_lf_apr) second.lf = apply_apr_plan(second.lf, *plan.second_lf_apr);
  return plan.lf_from_first ? add(first.lf, second.hf) : add(second.lf, first.hf);
}

ImageTensor ha_s(const ImageTensor& x, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  return apply_single_plan(x, sample_single_plan(cfg, rng, false), cfg.kernel());
}

ImageTensor ha_pp_s(const ImageTensor& x, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  return apply_single_plan(x, sample_single_plan(cfg, rng, true), cfg.kernel());
}

ImageTensor apr_s_gated(const ImageTensor& x, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!rng.chance(cfg.p_single)) return x;
  return apr_s(x, rng);
}

// ---------------------------------------------------------------------------

namespace {

struct ModeEntry {
  AugmentMode mode;
  std::string_view name;
};

constexpr std::array<ModeEntry, 9> kModes = {{
    {AugmentMode::kAprS, "apr_s"},
    {AugmentMode::kAprP, "apr_p"},
    {AugmentMode::kHaS, "ha_s"},
    {AugmentMode::kHaP, "ha_p"},
    {AugmentMode::kHaPPS, "ha_pp_s"},
    {AugmentMode::kHaPPP, "ha_pp_p"},
    {AugmentMode::kHaPS, "ha_ps"},
    {AugmentMode::kHaPPPS, "ha_pp_ps"},
    {AugmentMode::kAprPS, "apr_ps"},
}};

enum class PairedStage { kNone, kHa, kHaPlus, kApr };
enum class SingleStage { kNone, kHa, kHaPlus, kApr };

struct Stages {
  PairedStage paired;
  SingleStage single;
};

Stages stages_for(AugmentMode mode) {
  switch (mode) {
    case AugmentMode::kAprS: return {PairedStage::kNone, SingleStage::kApr};
    case AugmentMode::kAprP: return {PairedStage::kApr, SingleStage::kNone};
    case AugmentMode::kHaS: return {PairedStage::kNone, SingleStage::kHa};
    case AugmentMode::kHaP: return {PairedStage::kHa, SingleStage::kNone};
    case AugmentMode::kHaPPS: return {PairedStage::kNone, SingleStage::kHaPlus};
    case AugmentMode::kHaPPP: return {PairedStage::kHaPlus, SingleStage::kNone};
    case AugmentMode::kHaPS: return {PairedStage::kHa, SingleStage::kHa};
    case AugmentMode::kHaPPPS: return {PairedStage::kHaPlus, SingleStage::kHaPlus};
    case AugmentMode::kAprPS: return {PairedStage::kApr, SingleStage::kApr};
  }
  throw InvalidArgument("unknown augment mode");
}

}  // namespace

std::string_view mode_name(AugmentMode mode) {
  for (const auto& entry : kModes) {
    if (entry.mode == mode) return entry.name;
  }
  return "unknown";
}

AugmentMode parse_mode(std::string_view name) {
  for (const auto& entry : kModes) {
    if (entry.name == name) return entry.mode;
  }
  throw InvalidArgument("unknown augment mode '" + std::string(name) + "'");
}

LabeledBatch augment_batch(const LabeledBatch& batch, AugmentMode mode, const AugmentConfig& cfg,
                           Rng& rng) {
  batch.validate();
  cfg.validate();
  const Stages stages = stages_for(mode);
  const GaussianKernel kernel = cfg.kernel();

  LabeledBatch out;
  switch (stages.paired) {
    case PairedStage::kNone:
      out = batch;
      break;
    case PairedStage::kHa:
      out = apply_paired_plan(batch, sample_paired_plan(batch.size(), cfg, rng, false), kernel);
      break;
    case PairedStage::kHaPlus:
      out = apply_paired_plan(batch, sample_paired_plan(batch.size(), cfg, rng, true), kernel);
      break;
    case PairedStage::kApr:
      out = apr_p_batch(batch, cfg, rng);
      break;
  }
  if (stages.single == SingleStage::kNone) return out;

  const std::uint64_t base = rng.next_u64();
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rng image_rng(derive_seed(base, i));
    ImageTensor& img = out.images[i];
    switch (stages.single) {
      case SingleStage::kHa:
        img = apply_single_plan(img, sample_single_plan(cfg, image_rng, false), kernel);
        break;
      case SingleStage::kHaPlus:
        img = apply_single_plan(img, sample_single_plan(cfg, image_rng, true), kernel);
        break;
      case SingleStage::kApr:
        if (image_rng.chance(cfg.p_single)) img = apr_s(img, image_rng);
        break;
      case SingleStage::kNone:
        break;
    }
  }
  return out;
}

}  // namespace hybridaug
