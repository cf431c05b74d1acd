#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hybridaug {

inline constexpr int kNumSeverities = 5;

/// The 15 benchmark corruptions, grouped noise / blur / weather / digital.
struct CorruptionInfo {
  std::string_view name;
  std::string_view category;
};

inline constexpr std::array<CorruptionInfo, 15> kCorruptions = {{
    {"gaussian_noise", "noise"},
    {"shot_noise", "noise"},
    {"impulse_noise", "noise"},
    {"defocus_blur", "blur"},
    {"glass_blur", "blur"},
    {"motion_blur", "blur"},
    {"zoom_blur", "blur"},
    {"snow", "weather"},
    {"frost", "weather"},
    {"fog", "weather"},
    {"brightness", "weather"},
    {"contrast", "digital"},
    {"elastic_transform", "digital"},
    {"pixelate", "digital"},
    {"jpeg_compression", "digital"},
}};

std::vector<std::string> standard_corruption_names();

/// Error rates keyed by (corruption, severity).
class CorruptionErrorTable {
 public:
  /// Throws InvalidArgument for severity outside 1..5 or an error outside
  /// [0, 1]; throws FormatError if the key already exists.
  void set(const std::string& corruption, int severity, double error);

  bool contains(const std::string& corruption, int severity) const;
  /// Throws MissingData when absent.
  double get(const std::string& corruption, int severity) const;

  std::size_t size() const { return entries_.size(); }
  /// Distinct corruption names, sorted.
  std::vector<std::string> corruptions() const;
  const std::map<std::pair<std::string, int>, double>& entries() const { return entries_; }

 private:
  std::map<std::pair<std::string, int>, double> entries_;
};

/// Sum over severities 1..5 of model errors divided by the same sum for the
/// reference model. Throws MissingData when any severity is absent from
/// either table and DegenerateReference when the reference sum is zero.
double corruption_error(const CorruptionErrorTable& model, const CorruptionErrorTable& reference,
                        const std::string& corruption);

/// Unweighted mean of corruption_error over `corruptions`. Throws
/// MissingData when the list is empty.
double mean_corruption_error(const CorruptionErrorTable& model,
                             const CorruptionErrorTable& reference,
                             std::span<const std::string> corruptions);

/// mCE over the 15 standard corruptions. Fractional; multiply by 100 for display.
double mce(const CorruptionErrorTable& model, const CorruptionErrorTable& reference);

/// Fraction of positions where pred == truth. Throws InvalidArgument for
/// empty input or a length mismatch.
double accuracy(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth);

/// Detector scores, higher meaning "more in-distribution".
struct ScoreSet {
  std::vector<double> in_distribution;
  std::vector<double> ood;
};

/// Mann-Whitney AUROC: P(id score > ood score) with ties counted as 1/2.
/// Computed by sorting, O((n + m) log(n + m)). Throws InvalidArgument when
/// either list is empty or holds a non-finite value.
double auroc(const ScoreSet& scores);

/// The same quantity by explicit ROC construction and trapezoidal
/// integration. Kept as an independent cross-check of auroc().
double auroc_trapezoid(const ScoreSet& scores);

}  // namespace hybridaug
