#include "hybridaug/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "hybridaug/errors.hpp"

namespace hybridaug {

std::vector<std::string> standard_corruption_names() {
  std::vector<std::string> names;
  names.reserve(kCorruptions.size());
  for (const auto& c : kCorruptions) names.emplace_back(c.name);
  return names;
}

void CorruptionErrorTable::set(const std::string& corruption, int severity, double error) {
  if (severity < 1 || severity > kNumSeverities) {
    throw InvalidArgument("severity must be in 1..5, got " + std::to_string(severity));
  }
  if (!(error >= 0.0 && error <= 1.0)) {
    throw InvalidArgument("error rate for " + corruption + " must lie in [0, 1]");
  }
  const auto [it, inserted] = entries_.emplace(std::make_pair(corruption, severity), error);
  if (!inserted) {
    throw FormatError("duplicate entry for (" + corruption + ", " + std::to_string(severity) + ")");
  }
}

bool CorruptionErrorTable::contains(const std::string& corruption, int severity) const {
  return entries_.contains({corruption, severity});
}

double CorruptionErrorTable::get(const std::string& corruption, int severity) const {
  const auto it = entries_.find({corruption, severity});
  if (it == entries_.end()) {
    throw MissingData("no error rate for (" + corruption + ", " + std::to_string(severity) + ")");
  }
  return it->second;
}

std::vector<std::string> CorruptionErrorTable::corruptions() const {
  std::set<std::string> names;
  for (const auto& [key, value] : entries_) names.insert(key.first);
  return {names.begin(), names.end()};
}

double corruption_error(const CorruptionErrorTable& model, const CorruptionErrorTable& reference,
                        const std::string& corruption) {
  double model_sum = 0.0;
  double reference_sum = 0.0;
  for (int s = 1; s <= kNumSeverities; ++s) {
    model_sum += model.get(corruption, s);
    reference_sum += reference.get(corruption, s);
  }
  if (reference_sum == 0.0) {
    throw DegenerateReference("reference errors for " + corruption + " sum to zero");
  }
  return model_sum / reference_sum;
}

double mean_corruption_error(const CorruptionErrorTable& model,
                             const CorruptionErrorTable& reference,
                             std::span<const std::string> corruptions) {
  if (corruptions.empty()) throw MissingData("no corruptions to average");
  double sum = 0.0;
  for (const auto& name : corruptions) sum += corruption_error(model, reference, name);
  return sum / static_cast<double>(corruptions.size());
}

double mce(const CorruptionErrorTable& model, const CorruptionErrorTable& reference) {
  const auto names = standard_corruption_names();
  std::vector<std::string> missing;
  for (const auto& name : names) {
    for (int s = 1; s <= kNumSeverities; ++s) {
      if (!model.contains(name, s) || !reference.contains(name, s)) {
        missing.push_back(name);
        break;
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw MissingData("mCE needs all 15 corruptions at severities 1-5; incomplete: " + list);
  }
  return mean_corruption_error(model, reference, names);
}

double accuracy(std::span<const std::int64_t> pred, std::span<const std::int64_t> truth) {
  if (pred.empty()) throw InvalidArgument("accuracy of an empty prediction list");
  if (pred.size() != truth.size()) {
    throw InvalidArgument("prediction and label lists differ in length");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

namespace {

void validate_scores(const ScoreSet& scores) {
  if (scores.in_distribution.empty() || scores.ood.empty()) {
    throw InvalidArgument("AUROC needs nonempty in-distribution and OOD score lists");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(scores.in_distribution.begin(), scores.in_distribution.end(), finite) ||
      !std::all_of(scores.ood.begin(), scores.ood.end(), finite)) {
    throw InvalidArgument("AUROC scores must be finite");
  }
}

struct Scored {
  double score;
  bool in_distribution;
};

std::vector<Scored> sorted_scores(const ScoreSet& scores) {
  std::vector<Scored> all;
  all.reserve(scores.in_distribution.size() + scores.ood.size());
  for (double s : scores.in_distribution) all.push_back({s, true});
  for (double s : scores.ood) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.score < b.score; });
  return all;
}

}  // namespace

double auroc(const ScoreSet& scores) {
  validate_scores(scores);
  const auto all = sorted_scores(scores);
  // Walk tie groups in ascending order; every in-distribution score beats
  // the OOD scores strictly below it and gets half credit for tied ones.
  // Counts stay integral (doubled) so the result is exact up to the final division.
  double doubled_wins = 0.0;
  std::size_t ood_below = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t id_in_group = 0;
    std::size_t ood_in_group = 0;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].in_distribution ? id_in_group : ood_in_group) += 1;
      ++j;
    }
    doubled_wins += static_cast<double>(id_in_group) *
                    (2.0 * static_cast<double>(ood_below) + static_cast<double>(ood_in_group));
    ood_below += ood_in_group;
    i = j;
  }
  const double pairs = static_cast<double>(scores.in_distribution.size()) *
                       static_cast<double>(scores.ood.size());
  return doubled_wins / (2.0 * pairs);
}

double auroc_trapezoid(const ScoreSet& scores) {
  validate_scores(scores);
  auto all = sorted_scores(scores);
  std::reverse(all.begin(), all.end());
  const auto n_id = static_cast<double>(scores.in_distribution.size());
  const auto n_ood = static_cast<double>(scores.ood.size());
  double tp = 0.0;
  double fp = 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    const double prev_tpr = tp / n_id;
    const double prev_fpr = fp / n_ood;
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].in_distribution ? tp : fp) += 1.0;
      ++j;
    }
    area += (fp / n_ood - prev_fpr) * (tp / n_id + prev_tpr) / 2.0;
    i = j;
  }
  return area;
}

}  // namespace hybridaug
