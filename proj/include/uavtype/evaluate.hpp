#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "uavtype/types.hpp"

namespace uavtype {

/// Fold id per instance. Each class is shuffled with the seed and dealt
/// round-robin, the deal continuing where the previous class stopped, so
/// per-fold class counts differ by at most one.
/// Throws TooFewFolds (k < 2) and ClassTooSmall (a class with < k members).
std::vector<int> stratified_kfold(std::span<const int> labels, int k = 10, std::uint64_t seed = 0);

struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};  // [true][predicted]

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(int c) const;
  std::uint64_t col_sum(int c) const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws LengthMismatch, InvalidLabel.
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  bool precision_undefined = false;  // no predictions of the class
  bool recall_undefined = false;     // no true members of the class
};

using PerClass = std::array<ClassMetrics, kNumClasses>;

PerClass class_metrics(const ConfusionMatrix& cm);
double macro_f(std::span<const double> f_scores);
double macro_f(const PerClass& metrics);

struct FoldMetrics {
  PerClass per_class{};
  double macro_f = 0.0;
};

FoldMetrics fold_metrics(const ConfusionMatrix& cm);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
};

struct AggregateMetrics {
  std::array<std::array<MeanStd, 3>, kNumClasses> per_class{};  // [class][precision, recall, f]
  MeanStd macro_f;
};

/// Throws TooFewFolds with fewer than two folds.
AggregateMetrics aggregate_folds(std::span<const FoldMetrics> folds);

struct BaselineScores {
  PerClass majority{};
  PerClass uniform{};
  double majority_macro_f = 0.0;
  double uniform_macro_f = 0.0;
};

/// Always predicting the largest class, and guessing each class with
/// probability 1/3 (expected precision = prevalence, recall = 1/3).
BaselineScores baseline_scores(const std::array<std::size_t, kNumClasses>& counts);

/// One evaluated trial: aggregated fold metrics plus the pooled matrix.
struct TrialReport {
  int trial_id = 0;
  std::string method;
  std::string parameters;
  AggregateMetrics metrics;
  ConfusionMatrix pooled;
  std::vector<FoldMetrics> folds;
};

/// Flat CSV row: per class precision/recall/F mean and std, then macro-F.
struct TrialRow {
  int trial_id = 0;
  std::string method;
  std::string parameters;
  std::array<double, 20> values{};

  static TrialRow from_report(const TrialReport& report);
  double mean(int cls, int metric) const { return values[static_cast<std::size_t>(cls * 6 + metric * 2)]; }
  double stddev(int cls, int metric) const { return values[static_cast<std::size_t>(cls * 6 + metric * 2 + 1)]; }
  double macro_f_mean() const { return values[18]; }
  double macro_f_std() const { return values[19]; }
  bool operator==(const TrialRow&) const = default;
};

std::string trial_csv_header();
std::string render_trial_csv(std::span<const TrialRow> rows);
/// Throws InvalidConfig on a malformed file.
std::vector<TrialRow> parse_trial_csv(std::string_view text);

/// Fixed-width table in percent; `*` marks the best macro-F per method,
/// `^` the best of the whole table.
std::string render_trial_table(std::span<const TrialRow> rows);

struct TradeoffEntry {
  int cls = 0;
  int reference_trial = 0;
  int candidate_trial = 0;
  double reference_precision = 0.0;
  double reference_recall = 0.0;
  double candidate_precision = 0.0;
  double candidate_recall = 0.0;
  double delta_precision = 0.0;
  double delta_recall = 0.0;
};

/// For each minority class, the candidate with the highest mean recall
/// (ties to the lower trial id) against the reference row.
std::vector<TradeoffEntry> tradeoff(const TrialRow& reference, std::span<const TrialRow> candidates);
std::string render_tradeoff(std::span<const TradeoffEntry> entries);

std::string confusion_csv(const ConfusionMatrix& cm);
/// Pooled-matrix precision/recall/F per class, for comparison with fold means.
std::string pooled_metrics_csv(std::span<const TrialReport> reports);

/// Plain numeric files for external plotting tools.
std::string macro_f_plot_data(std::span<const TrialRow> rows);
std::string confusion_heatmap_data(const ConfusionMatrix& cm);

}  // namespace uavtype
