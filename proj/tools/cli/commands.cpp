#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "hybridaug/errors.hpp"
#include "hybridaug/hybrid.hpp"
#include "hybridaug/io.hpp"
#include "hybridaug/metrics.hpp"
#include "hybridaug/spectral.hpp"
#include "hybridaug/toytrain.hpp"

namespace hybridaug::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised for bad flag values detected after parsing; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

void require_odd_kernel(std::size_t size) {
  if (size == 0 || size % 2 == 0) {
    throw UsageError("--kernel-size must be an odd positive integer, got " + std::to_string(size));
  }
}

// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string input;
  std::string out_lf;
  std::string out_hf;
  std::size_t kernel_size = 3;
  double sigma = 0.5;
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  require_odd_kernel(a.kernel_size);
  if (!(a.sigma > 0.0)) throw UsageError("--sigma must be positive");
  const ImageTensor x = io::load_image(a.input);
  const FrequencyDecomposition parts = decompose(x, gaussian_kernel(a.kernel_size, a.sigma));
  io::save_image(parts.lf, a.out_lf, 0.0);
  io::save_image(parts.hf, a.out_hf, 0.5);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", std::sqrt(squared_norm(parts.hf)));
  out << "hf_l2_norm " << buf << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string mode;
  std::string input_dir;
  std::string labels;
  std::string output_dir;
  std::string config;
  std::uint64_t seed = 0;
  double p_paired = 0.6;
  double p_single = 0.5;
  double p_inner = 0.6;
  std::size_t kernel_size = 3;
  double sigma = 0.5;
  std::size_t batch = 128;
};

struct AugmentFlagsGiven {
  bool seed, p_paired, p_single, p_inner, kernel_size, sigma;
};

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".hat";
}

int cmd_augment(const AugmentArgs& a, const AugmentFlagsGiven& given, std::ostream& out) {
  AugmentMode mode;
  try {
    mode = parse_mode(a.mode);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  AugmentConfig cfg = a.config.empty() ? AugmentConfig{} : io::load_config(a.config);
  if (given.seed || a.config.empty()) cfg.seed = a.seed;
  if (given.p_paired || a.config.empty()) cfg.p_paired = a.p_paired;
  if (given.p_single || a.config.empty()) cfg.p_single = a.p_single;
  if (given.p_inner || a.config.empty()) cfg.p_inner_apr = a.p_inner;
  if (given.kernel_size || a.config.empty()) cfg.kernel_size = a.kernel_size;
  if (given.sigma || a.config.empty()) cfg.sigma = a.sigma;
  require_odd_kernel(cfg.kernel_size);
  if (a.batch == 0) throw UsageError("--batch must be positive");
  try {
    cfg.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  if (!fs::is_directory(a.input_dir)) throw IoError("input directory " + a.input_dir + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.input_dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  // Filename order makes batching independent of directory iteration order.
  std::sort(files.begin(), files.end(),
            [](const fs::path& l, const fs::path& r) { return l.filename() < r.filename(); });
  if (files.empty()) throw IoError("no .png or .hat images in " + a.input_dir);
  const auto labels = io::load_labels(a.labels);

  const fs::path output_dir(a.output_dir);
  fs::path staging = output_dir;
  staging += ".partial";
  fs::remove_all(staging);
  fs::create_directories(staging);

  std::vector<std::pair<std::string, std::int64_t>> out_labels;
  std::vector<std::string> written;
  try {
    for (std::size_t start = 0, batch_index = 0; start < files.size();
         start += a.batch, ++batch_index) {
      const std::size_t end = std::min(files.size(), start + a.batch);
      LabeledBatch batch;
      for (std::size_t i = start; i < end; ++i) {
        const std::string name = files[i].filename().string();
        const auto it = labels.find(name);
        if (it == labels.end()) throw FormatError("no label for image " + name);
        batch.images.push_back(io::load_image(files[i]));
        batch.labels.push_back(it->second);
      }
      Rng rng(derive_seed(cfg.seed, batch_index));
      const LabeledBatch result = augment_batch(batch, mode, cfg, rng);
      for (std::size_t k = 0; k < result.size(); ++k) {
        const std::string name = "aug_" + files[start + k].filename().string();
        io::save_image(result.images[k], staging / name, 0.0);
        out_labels.emplace_back(name, result.labels[k]);
        written.push_back(name);
      }
    }
    io::write_file_atomic(staging / "labels.csv", io::format_labels(out_labels));
    written.push_back("labels.csv");

    fs::create_directories(output_dir);
    for (const auto& name : written) fs::rename(staging / name, output_dir / name);
    fs::remove_all(staging);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
  out << "augmented " << files.size() << " images with " << mode_name(mode) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MceArgs {
  std::string pred_dir;
  std::string truth;
  std::string reference;
  std::string report;
  std::vector<std::string> corruptions;
};

int cmd_metrics_mce(const MceArgs& a, std::ostream& out) {
  const auto truth = io::load_labels(a.truth);
  const CorruptionErrorTable reference = io::load_error_table(a.reference);
  const std::vector<std::string> names =
      a.corruptions.empty() ? standard_corruption_names() : a.corruptions;

  std::vector<std::string> gaps;
  for (const auto& name : names) {
    for (int s = 1; s <= kNumSeverities; ++s) {
      const fs::path file = fs::path(a.pred_dir) / name / (std::to_string(s) + ".csv");
      if (!fs::is_regular_file(file)) gaps.push_back(file.string());
    }
  }
  if (!gaps.empty()) {
    std::string list;
    for (const auto& g : gaps) list += "\n  " + g;
    throw MissingData("missing prediction files:" + list);
  }

  CorruptionErrorTable model;
  for (const auto& name : names) {
    for (int s = 1; s <= kNumSeverities; ++s) {
      const fs::path file = fs::path(a.pred_dir) / name / (std::to_string(s) + ".csv");
      const auto records = io::load_predictions(file);
      std::vector<std::int64_t> pred;
      std::vector<std::int64_t> gold;
      for (const auto& r : records) {
        const auto it = truth.find(r.image_id);
        if (it == truth.end()) {
          throw FormatError(file.string() + ": image '" + r.image_id + "' not in truth file");
        }
        if (it->second != r.true_label) {
          throw FormatError(file.string() + ": true_label of '" + r.image_id +
                            "' disagrees with the truth file");
        }
        pred.push_back(r.pred_label);
        gold.push_back(it->second);
      }
      if (pred.empty()) throw MissingData(file.string() + " has no predictions");
      model.set(name, s, 1.0 - accuracy(pred, gold));
    }
  }

  json report;
  report["corruptions"] = json::object();
  for (const auto& name : names) {
    const double ce = corruption_error(model, reference, name);
    std::vector<double> errors;
    for (int s = 1; s <= kNumSeverities; ++s) errors.push_back(model.get(name, s));
    report["corruptions"][name] = {{"ce", ce}, {"errors", errors}};
    out << name << " CE " << one_decimal(100.0 * ce) << "\n";
  }
  const double value = mean_corruption_error(model, reference, names);
  report["mce"] = value;
  report["mce_percent"] = 100.0 * value;
  out << "mCE " << one_decimal(100.0 * value) << "\n";

  const fs::path report_path =
      a.report.empty() ? fs::path(a.pred_dir) / "mce_report.json" : fs::path(a.report);
  io::write_file_atomic(report_path, report.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_metrics_auroc(const std::string& id_path, const std::string& ood_path, std::ostream& out) {
  ScoreSet scores{io::load_scores(id_path), io::load_scores(ood_path)};
  out << "AUROC " << one_decimal(100.0 * auroc(scores)) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ToyArgs {
  std::string augment = "ha_p";
  std::size_t seeds = 5;
  std::uint64_t first_seed = 0;
  std::string report;
  toy::ExperimentOptions options;
};

int cmd_toy_train(const ToyArgs& a, std::ostream& out) {
  toy::ToyAugment augment;
  if (a.augment == "none") {
    augment = toy::ToyAugment::kNone;
  } else if (a.augment == "ha_p") {
    augment = toy::ToyAugment::kHaP;
  } else if (a.augment == "ha_pp_p") {
    augment = toy::ToyAugment::kHaPPP;
  } else {
    throw UsageError("--augment must be none, ha_p or ha_pp_p");
  }
  if (a.seeds == 0) throw UsageError("--seeds must be positive");

  json per_seed = json::array();
  double sums[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < a.seeds; ++i) {
    const auto r = toy::run_experiment(a.first_seed + i, augment, a.options);
    json entry = {{"seed", r.seed},
                  {"clean_acc_baseline", r.clean_acc_baseline},
                  {"shifted_acc_baseline", r.shifted_acc_baseline}};
    sums[0] += r.clean_acc_baseline;
    sums[1] += r.shifted_acc_baseline;
    if (r.clean_acc_ha) {
      entry["clean_acc_ha"] = *r.clean_acc_ha;
      entry["shifted_acc_ha"] = *r.shifted_acc_ha;
      sums[2] += *r.clean_acc_ha;
      sums[3] += *r.shifted_acc_ha;
    }
    per_seed.push_back(entry);
  }
  const double n = static_cast<double>(a.seeds);
  json mean = {{"clean_acc_baseline", sums[0] / n}, {"shifted_acc_baseline", sums[1] / n}};
  out << "clean_acc_baseline " << sums[0] / n << "\n";
  out << "shifted_acc_baseline " << sums[1] / n << "\n";
  if (augment != toy::ToyAugment::kNone) {
    mean["clean_acc_ha"] = sums[2] / n;
    mean["shifted_acc_ha"] = sums[3] / n;
    out << "clean_acc_ha " << sums[2] / n << "\n";
    out << "shifted_acc_ha " << sums[3] / n << "\n";
  }

  const AugmentConfig cfg = toy::experiment_config(a.first_seed);
  const auto& o = a.options;
  json report = {
      {"augment", a.augment},
      {"seeds", a.seeds},
      {"first_seed", a.first_seed},
      {"config",
       {{"kernel_size", cfg.kernel_size},
        {"sigma", cfg.sigma},
        {"p_paired", cfg.p_paired},
        {"p_single", cfg.p_single},
        {"p_inner_apr", cfg.p_inner_apr},
        {"epochs", o.train.epochs},
        {"lr", o.train.lr},
        {"batch_size", o.train.batch_size},
        {"n_train", o.n_train},
        {"n_test", o.n_test},
        {"hidden", o.hidden}}},
      {"per_seed", per_seed},
      {"mean", mean},
  };
  if (!a.report.empty()) io::write_file_atomic(a.report, report.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-spectrum hybrid image augmentation and robustness metrics", "hybridaug"};
  app.require_subcommand(1, 1);

  DecomposeArgs dec;
  auto* dec_cmd = app.add_subcommand("decompose", "Split an image into LF and HF components");
  dec_cmd->add_option("--input", dec.input, "Input image (.png or .hat)")->required();
  dec_cmd->add_option("--out-lf", dec.out_lf, "Output LF image")->required();
  dec_cmd->add_option("--out-hf", dec.out_hf, "Output HF image (PNG gets a +0.5 offset)")->required();
  dec_cmd->add_option("--kernel-size", dec.kernel_size, "Gaussian kernel taps (odd)");
  dec_cmd->add_option("--sigma", dec.sigma, "Gaussian standard deviation");

  AugmentArgs aug;
  auto* aug_cmd = app.add_subcommand("augment", "Augment a directory of images");
  aug_cmd->add_option("--mode", aug.mode,
                      "apr_s|apr_p|ha_s|ha_p|ha_pp_s|ha_pp_p|ha_ps|ha_pp_ps|apr_ps")
      ->required();
  aug_cmd->add_option("--input-dir", aug.input_dir, "Directory of .png/.hat images")->required();
  aug_cmd->add_option("--labels", aug.labels, "CSV image_id,label")->required();
  aug_cmd->add_option("--output-dir", aug.output_dir, "Output directory")->required();
  aug_cmd->add_option("--config", aug.config, "JSON config with AugmentConfig fields");
  auto* seed_opt = aug_cmd->add_option("--seed", aug.seed, "Random seed");
  auto* pp_opt = aug_cmd->add_option("--p-paired", aug.p_paired, "Paired-variant probability");
  auto* ps_opt = aug_cmd->add_option("--p-single", aug.p_single, "Single-variant probability");
  auto* pi_opt = aug_cmd->add_option("--p-inner", aug.p_inner, "Inner amplitude-swap probability");
  auto* k_opt = aug_cmd->add_option("--kernel-size", aug.kernel_size, "Gaussian kernel taps (odd)");
  auto* s_opt = aug_cmd->add_option("--sigma", aug.sigma, "Gaussian standard deviation");
  aug_cmd->add_option("--batch", aug.batch, "Batch size");

  MceArgs mce_args;
  auto* mce_cmd = app.add_subcommand("metrics-mce", "Corruption errors and mCE from predictions");
  mce_cmd->add_option("--pred-dir", mce_args.pred_dir, "<dir>/<corruption>/<severity>.csv")
      ->required();
  mce_cmd->add_option("--truth", mce_args.truth, "CSV image_id,label")->required();
  mce_cmd->add_option("--reference", mce_args.reference, "Reference error table CSV")->required();
  mce_cmd->add_option("--report", mce_args.report, "JSON report path");
  mce_cmd->add_option("--corruptions", mce_args.corruptions,
                      "Restrict to these corruptions (default: the standard 15)")
      ->delimiter(',');

  std::string id_scores;
  std::string ood_scores;
  auto* auroc_cmd = app.add_subcommand("metrics-auroc", "AUROC of in-distribution vs OOD scores");
  auroc_cmd->add_option("--id-scores", id_scores, "In-distribution scores, one per line")
      ->required();
  auroc_cmd->add_option("--ood-scores", ood_scores, "OOD scores, one per line")->required();

  ToyArgs toy_args;
  auto* toy_cmd = app.add_subcommand("toy-train", "Desk-scale HF-shortcut experiment");
  toy_cmd->add_option("--augment", toy_args.augment, "none|ha_p|ha_pp_p");
  toy_cmd->add_option("--seeds", toy_args.seeds, "Number of seeds");
  toy_cmd->add_option("--first-seed", toy_args.first_seed, "First seed");
  toy_cmd->add_option("--report", toy_args.report, "JSON report path");
  toy_cmd->add_option("--epochs", toy_args.options.train.epochs, "Training epochs");
  toy_cmd->add_option("--lr", toy_args.options.train.lr, "Learning rate");
  toy_cmd->add_option("--batch-size", toy_args.options.train.batch_size, "Minibatch size");
  toy_cmd->add_option("--n-train", toy_args.options.n_train, "Training set size");
  toy_cmd->add_option("--n-test", toy_args.options.n_test, "Test set size");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (dec_cmd->parsed()) return cmd_decompose(dec, out);
    if (aug_cmd->parsed()) {
      const AugmentFlagsGiven given{seed_opt->count() > 0, pp_opt->count() > 0,
                                    ps_opt->count() > 0,   pi_opt->count() > 0,
                                    k_opt->count() > 0,    s_opt->count() > 0};
      return cmd_augment(aug, given, out);
    }
    if (mce_cmd->parsed()) return cmd_metrics_mce(mce_args, out);
    if (auroc_cmd->parsed()) return cmd_metrics_auroc(id_scores, ood_scores, out);
    if (toy_cmd->parsed()) return cmd_toy_train(toy_args, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hybridaug::cli
