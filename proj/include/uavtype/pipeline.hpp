#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uavtype/evaluate.hpp"
#include "uavtype/features.hpp"
#include "uavtype/lstm.hpp"
#include "uavtype/rebalance.hpp"
#include "uavtype/resample.hpp"
#include "uavtype/synth.hpp"
#include "uavtype/ulog.hpp"

namespace uavtype {

/// Environment variable naming the default ULog directory.
inline constexpr const char* kDataDirEnv = "UAVTYPE_DATA_DIR";

enum class DataSource { UlogDir, Cache, Synth };

struct DataConfig {
  DataSource source = DataSource::Synth;
  std::filesystem::path path;  // ULog directory or cache file
  CorpusSpec synth;
};

struct EvalConfig {
  int k = 10;
  std::uint64_t seed = 0;
  int reference_trial = 1;  // Table-4 style tradeoffs are computed against it
};

struct RunConfig {
  DataConfig data;
  SubsetDeclaration features = baseline_declaration();
  double coverage_threshold = 0.6;  // only used when features.n_random > 0
  SamplingConfig sampling;
  BalanceConfig balance;
  TrainConfig train;
  EvalConfig evaluation;
  std::filesystem::path output_dir = "runs/default";

  /// Throws InvalidConfig.
  void validate() const;
};

/// Parses a run config; missing keys keep their defaults, unknown keys are
/// rejected. A ulog_dir source without a path falls back to $UAVTYPE_DATA_DIR.
RunConfig parse_run_config(std::string_view json_text);
RunConfig read_run_config(const std::filesystem::path& path);
/// Every field written out, so the file alone reproduces a run.
std::string run_config_json(const RunConfig& config);

/// Throws NoParsableLogs (directory), MissingCache (cache file).
std::vector<FlightLog> load_corpus(const DataConfig& data, std::vector<SkippedFile>* skipped = nullptr);

/// The first subset the declaration yields; random keys come from the
/// coverage-pruned pool of `corpus`.
FeatureSubset resolve_subset(const RunConfig& config, std::span<const FlightLog> corpus);

struct TrialSpec {
  int trial_id = 0;
  std::string method;
  std::string parameters;
  SamplingConfig sampling;
  BalanceConfig balance;
};

/// Trials 1-12: average sampling with 50/200/500 intervals, then fixed
/// windows of 2/5/10 s for each of those interval counts.
std::vector<TrialSpec> sampling_grid(const SamplingConfig& base);
/// Trials 13-27: augmentation, random oversampling, random undersampling,
/// SMOTE and cluster centroids at three levels each, sampling fixed.
std::vector<TrialSpec> imbalance_grid(const SamplingConfig& sampling, const BalanceConfig& base);

struct FoldOutcome {
  int fold = 0;
  std::vector<std::string> source_ids;
  std::vector<int> truth;
  std::vector<Prediction> predictions;
  std::vector<double> epoch_loss;
  std::array<std::size_t, kNumClasses> train_counts{};  // after rebalancing
};

struct TrialResult {
  TrialReport report;
  std::vector<FoldOutcome> folds;
};

using ProgressFn = std::function<void(const std::string& message)>;

/// Cross-validates one trial. Per fold: standardize on the training folds,
/// rebalance them, check the held-out fold is untouched, train, predict.
TrialResult run_trial(const Dataset& dataset, const TrialSpec& trial, const TrainConfig& train,
                      const EvalConfig& eval, const ProgressFn& progress = {});

/// Files written for a set of trials: trials.csv, table.txt,
/// pooled_metrics.csv, tradeoff.csv (when a reference and another trial
/// exist), per-trial confusion and prediction CSVs and plot data.
void write_trial_outputs(std::span<const TrialResult> results, const RunConfig& config,
                         const std::filesystem::path& dir);

/// Renders report files from an existing trials.csv (plus confusion CSVs if present).
void render_reports(const std::filesystem::path& dir, int reference_trial);

std::string predictions_csv(const TrialResult& result);
ConfusionMatrix parse_confusion_csv(std::string_view text);

}  // namespace uavtype
