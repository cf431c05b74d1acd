#include "hybridaug/toytrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hybridaug/errors.hpp"
#include "hybridaug/metrics.hpp"

namespace hybridaug::toy {

namespace {

// Linear ramp over [0, n) mapped to [-1, 1].
double ramp(std::size_t t, std::size_t n) {
  const double half = (static_cast<double>(n) - 1.0) / 2.0;
  return (static_cast<double>(t) - half) / half;
}

double alternating(std::size_t t) { return (t % 2 == 0) ? 1.0 : -1.0; }

// Smooth part of a sample: a ramp along x (label 0) or y (label 1) plus
// low-frequency clutter.
std::vector<double> smooth_base(std::int64_t label, std::size_t side, const DatasetOptions& opt,
                                Rng& rng) {
  const double slope = rng.uniform(opt.ramp_min, opt.ramp_max) * (rng.chance(0.5) ? 1.0 : -1.0);
  const double fx = rng.uniform(0.5, 1.0);
  const double fy = rng.uniform(0.5, 1.0);
  const double px = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double py = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double scale = 2.0 * std::numbers::pi / static_cast<double>(side);
  std::vector<double> base(side * side);
  for (std::size_t y = 0; y < side; ++y) {
    for (std::size_t x = 0; x < side; ++x) {
      const double r = label == 0 ? ramp(x, side) : ramp(y, side);
      const double clutter = 0.5 * opt.clutter_amplitude *
                             (std::cos(fx * scale * static_cast<double>(x) + px) +
                              std::cos(fy * scale * static_cast<double>(y) + py));
      base[y * side + x] = 0.5 + slope * r + clutter;
    }
  }
  return base;
}

// Nyquist-band texture: (-1)^x for class 0, (-1)^y for class 1.
double texture(std::int64_t texture_class, std::size_t x, std::size_t y) {
  return texture_class == 0 ? alternating(x) : alternating(y);
}

ImageTensor to_image(const std::vector<double>& values, std::size_t side) {
  std::vector<float> data(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) data[i] = static_cast<float>(values[i]);
  return ImageTensor(Shape{side, side, 1}, std::move(data));
}

struct Sample {
  std::vector<double> base;
  std::int64_t label;
};

Sample draw_sample(std::size_t side, const DatasetOptions& opt, const GaussianKernel& kernel,
                   Rng& rng) {
  const auto label = static_cast<std::int64_t>(rng.below(2));
  // Redraw clutter until the smooth part alone determines the label.
  while (true) {
    auto base = smooth_base(label, side, opt, rng);
    if (lf_label(low_pass(to_image(base, side), kernel)) == label) return {std::move(base), label};
  }
}

}  // namespace

GaussianKernel texture_cutoff_kernel() {
  return gaussian_kernel(3, 1.0 / std::sqrt(2.0 * std::numbers::ln2));
}

std::int64_t lf_label(const ImageTensor& lf) {
  const std::size_t h = lf.height();
  const std::size_t w = lf.width();
  double along_x = 0.0;
  double along_y = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double v = 0.0;
      for (std::size_t c = 0; c < lf.channels(); ++c) v += lf.at(y, x, c);
      along_x += v * ramp(x, w);
      along_y += v * ramp(y, h);
    }
  }
  return std::abs(along_x) >= std::abs(along_y) ? 0 : 1;
}

SyntheticShiftDataset generate_dataset(std::uint64_t seed, std::size_t n_train, std::size_t n_test,
                                       const DatasetOptions& options) {
  if (n_train < 2 || n_test < 2) throw InvalidArgument("dataset sizes must be at least 2");
  const std::size_t side = options.image_side;
  if (side < 2) throw InvalidArgument("image_side must be at least 2");
  const GaussianKernel kernel = texture_cutoff_kernel();
  Rng rng(derive_seed(seed, 0x5eed));

  SyntheticShiftDataset ds;
  ds.image_side = side;
  ds.n_classes = 2;

  auto textured = [&](const Sample& s) {
    const std::int64_t tex =
        rng.chance(options.texture_label_correlation) ? s.label : 1 - s.label;
    std::vector<double> v = s.base;
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        v[y * side + x] += options.texture_amplitude * texture(tex, x, y);
      }
    }
    return v;
  };

  for (std::size_t i = 0; i < n_train; ++i) {
    const Sample s = draw_sample(side, options, kernel, rng);
    ds.train.images.push_back(to_image(textured(s), side));
    ds.train.labels.push_back(s.label);
  }

  // Texture energy is amplitude^2 per pixel for either class.
  const double texture_energy =
      options.texture_amplitude * options.texture_amplitude * static_cast<double>(side * side);
  for (std::size_t i = 0; i < n_test; ++i) {
    const Sample s = draw_sample(side, options, kernel, rng);
    ds.test_clean.images.push_back(to_image(textured(s), side));
    ds.test_clean.labels.push_back(s.label);

    // Label-independent noise in the blur's null space: (-1)^x g(y) + (-1)^y f(x).
    std::vector<double> g(side);
    std::vector<double> f(side);
    for (auto& v : g) v = rng.normal();
    for (auto& v : f) v = rng.normal();
    std::vector<double> noise(side * side);
    double energy = 0.0;
    for (std::size_t y = 0; y < side; ++y) {
      for (std::size_t x = 0; x < side; ++x) {
        const double n = alternating(x) * g[y] + alternating(y) * f[x];
        noise[y * side + x] = n;
        energy += n * n;
      }
    }
    const double gain = energy > 0.0 ? std::sqrt(texture_energy / energy) : 0.0;
    std::vector<double> shifted = s.base;
    for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] += gain * noise[k];
    ds.test_hf_corrupt.images.push_back(to_image(shifted, side));
    ds.test_hf_corrupt.labels.push_back(s.label);
  }
  return ds;
}

// ---------------------------------------------------------------------------

TinyClassifier::TinyClassifier(std::size_t input_dim, std::size_t hidden, std::size_t classes,
                               Rng& rng)
    : input_dim_(input_dim), hidden_(hidden), classes_(classes) {
  if (input_dim == 0 || hidden == 0 || classes < 2) {
    throw InvalidArgument("classifier needs positive widths and at least two classes");
  }
  params_.assign(hidden * input_dim + hidden + classes * hidden + classes, 0.0);
  const double std1 = std::sqrt(2.0 / static_cast<double>(input_dim));
  const double std2 = std::sqrt(1.0 / static_cast<double>(hidden));
  std::size_t k = 0;
  for (std::size_t i = 0; i < hidden * input_dim; ++i) params_[k++] = std1 * rng.normal();
  k += hidden;
  for (std::size_t i = 0; i < classes * hidden; ++i) params_[k++] = std2 * rng.normal();
}

namespace {

// Inputs are centered on mid-gray before the first layer.
constexpr double kInputCenter = 0.5;

struct Forward {
  std::vector<double> pre;     // hidden pre-activations
  std::vector<double> act;     // ReLU outputs
  std::vector<double> logits;
};

Forward forward(const std::vector<double>& p, std::size_t in, std::size_t hid, std::size_t out,
                std::span<const float> x) {
  Forward f{std::vector<double>(hid), std::vector<double>(hid), std::vector<double>(out)};
  const double* w1 = p.data();
  const double* b1 = w1 + hid * in;
  const double* w2 = b1 + hid;
  const double* b2 = w2 + out * hid;
  for (std::size_t j = 0; j < hid; ++j) {
    double acc = b1[j];
    const double* row = w1 + j * in;
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * (x[i] - kInputCenter);
    f.pre[j] = acc;
    f.act[j] = acc > 0.0 ? acc : 0.0;
  }
  for (std::size_t k = 0; k < out; ++k) {
    double acc = b2[k];
    const double* row = w2 + k * hid;
    for (std::size_t j = 0; j < hid; ++j) acc += row[j] * f.act[j];
    f.logits[k] = acc;
  }
  return f;
}

}  // namespace

std::vector<double> TinyClassifier::logits(std::span<const float> input) const {
  if (input.size() != input_dim_) throw InvalidArgument("classifier input has the wrong size");
  return forward(params_, input_dim_, hidden_, classes_, input).logits;
}

std::int64_t TinyClassifier::predict(std::span<const float> input) const {
  const auto z = logits(input);
  return static_cast<std::int64_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

double TinyClassifier::loss_and_gradient(const LabeledBatch& batch, std::vector<double>* grad,
                                         double scale) const {
  batch.validate();
  if (grad != nullptr && grad->size() != params_.size()) {
    throw InvalidArgument("gradient buffer has the wrong size");
  }
  const std::size_t in = input_dim_;
  const std::size_t hid = hidden_;
  const std::size_t out = classes_;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double* w2 = params_.data() + hid * in + hid;
  double loss = 0.0;
  std::vector<double> dz(out);
  std::vector<double> dpre(hid);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto x = batch.images[s].data();
    if (x.size() != in) throw InvalidArgument("classifier input has the wrong size");
    const auto label = batch.labels[s];
    if (label < 0 || static_cast<std::size_t>(label) >= out) {
      throw InvalidArgument("label out of range");
    }
    const Forward f = forward(params_, in, hid, out, x);
    const double zmax = *std::max_element(f.logits.begin(), f.logits.end());
    double denom = 0.0;
    for (double z : f.logits) denom += std::exp(z - zmax);
    const double log_denom = std::log(denom) + zmax;
    loss += (log_denom - f.logits[static_cast<std::size_t>(label)]) * inv_n;
    if (grad == nullptr) continue;

    for (std::size_t k = 0; k < out; ++k) {
      const double prob = std::exp(f.logits[k] - log_denom);
      dz[k] = (prob - (static_cast<std::size_t>(label) == k ? 1.0 : 0.0)) * inv_n * scale;
    }
    double* gw1 = grad->data();
    double* gb1 = gw1 + hid * in;
    double* gw2 = gb1 + hid;
    double* gb2 = gw2 + out * hid;
    for (std::size_t k = 0; k < out; ++k) {
      gb2[k] += dz[k];
      for (std::size_t j = 0; j < hid; ++j) gw2[k * hid + j] += dz[k] * f.act[j];
    }
    for (std::size_t j = 0; j < hid; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < out; ++k) d += w2[k * hid + j] * dz[k];
      dpre[j] = f.pre[j] > 0.0 ? d : 0.0;
    }
    for (std::size_t j = 0; j < hid; ++j) {
      if (dpre[j] == 0.0) continue;
      gb1[j] += dpre[j];
      double* row = gw1 + j * in;
      for (std::size_t i = 0; i < in; ++i) row[i] += dpre[j] * (x[i] - kInputCenter);
    }
  }
  return loss;
}

bool TinyClassifier::finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------------------

TinyClassifier train(TinyClassifier model, const LabeledBatch& data, ToyAugment augment,
                     const AugmentConfig& cfg, const TrainOptions& options, Rng& rng) {
  data.validate();
  cfg.validate();
  if (options.batch_size == 0) throw InvalidArgument("batch_size must be positive");
  Rng order_rng(rng.next_u64());
  Rng augment_rng(rng.next_u64());
  const std::size_t n = data.size();
  std::vector<double> grad(model.parameters().size());

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const auto order = order_rng.permutation(n);
    for (std::size_t start = 0; start < n; start += options.batch_size) {
      const std::size_t end = std::min(n, start + options.batch_size);
      LabeledBatch mb;
      for (std::size_t k = start; k < end; ++k) {
        mb.images.push_back(data.images[order[k]]);
        mb.labels.push_back(data.labels[order[k]]);
      }
      std::fill(grad.begin(), grad.end(), 0.0);
      double loss = 0.0;
      if (augment == ToyAugment::kNone) {
        loss = model.loss_and_gradient(mb, &grad);
      } else {
        const AugmentMode mode = augment == ToyAugment::kHaP ? AugmentMode::kHaP : AugmentMode::kHaPPP;
        const LabeledBatch aug = augment_batch(mb, mode, cfg, augment_rng);
        loss = 0.5 * model.loss_and_gradient(mb, &grad, 0.5) +
               0.5 * model.loss_and_gradient(aug, &grad, 0.5);
      }
      if (!std::isfinite(loss)) {
        throw TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch));
      }
      auto& p = model.parameters();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= options.lr * grad[i];
    }
  }
  if (!model.finite()) throw TrainingDiverged("parameters became non-finite");
  return model;
}

double evaluate(const TinyClassifier& model, const LabeledBatch& data) {
  data.validate();
  std::vector<std::int64_t> pred;
  pred.reserve(data.size());
  for (const auto& img : data.images) pred.push_back(model.predict(img.data()));
  return accuracy(pred, data.labels);
}

AugmentConfig experiment_config(std::uint64_t seed) {
  AugmentConfig cfg;
  const GaussianKernel k = texture_cutoff_kernel();
  cfg.kernel_size = k.size;
  cfg.sigma = k.sigma;
  cfg.seed = seed;
  return cfg;
}

ExperimentReport run_experiment(std::uint64_t seed, ToyAugment augment,
                                const ExperimentOptions& options) {
  const SyntheticShiftDataset ds =
      generate_dataset(seed, options.n_train, options.n_test, options.dataset);
  const std::size_t input_dim = ds.image_side * ds.image_side;
  const AugmentConfig cfg = experiment_config(seed);

  auto fit = [&](ToyAugment mode) {
    Rng init_rng(derive_seed(seed, 1));
    TinyClassifier model(input_dim, options.hidden, ds.n_classes, init_rng);
    Rng train_rng(derive_seed(seed, 2));
    return train(std::move(model), ds.train, mode, cfg, options.train, train_rng);
  };

  ExperimentReport report;
  report.seed = seed;
  const TinyClassifier baseline = fit(ToyAugment::kNone);
  report.clean_acc_baseline = evaluate(baseline, ds.test_clean);
  report.shifted_acc_baseline = evaluate(baseline, ds.test_hf_corrupt);
  if (augment != ToyAugment::kNone) {
    const TinyClassifier augmented = fit(augment);
    report.clean_acc_ha = evaluate(augmented, ds.test_clean);
    report.shifted_acc_ha = evaluate(augmented, ds.test_hf_corrupt);
  }
  return report;
}

}  // namespace hybridaug::toy
