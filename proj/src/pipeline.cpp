#include "uavtype/pipeline.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include "container.hpp"
#include "json.hpp"
#include "uavtype/cache.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, std::string_view section) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, fmt::format("'{}' must be an object", section));
  const std::set<std::string_view> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!keys.contains(key)) throw Error(ErrorCode::InvalidConfig, fmt::format("unknown key '{}' in {}", key, section));
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string_view source_name(DataSource s) {
  switch (s) {
    case DataSource::UlogDir: return "ulog_dir";
    case DataSource::Cache: return "cache";
    case DataSource::Synth: return "synth";
  }
  return "synth";
}

DataSource parse_source(const std::string& s) {
  if (s == "ulog_dir") return DataSource::UlogDir;
  if (s == "cache") return DataSource::Cache;
  if (s == "synth") return DataSource::Synth;
  throw Error(ErrorCode::InvalidConfig, "unknown data source '" + s + "'");
}

SamplingMethod parse_sampling_method(const std::string& s) {
  if (s == to_string(SamplingMethod::Average)) return SamplingMethod::Average;
  if (s == to_string(SamplingMethod::FixedWindowAverage)) return SamplingMethod::FixedWindowAverage;
  throw Error(ErrorCode::InvalidConfig, "unknown sampling method '" + s + "'");
}

BalanceMethod parse_balance_method(const std::string& s) {
  for (BalanceMethod m : {BalanceMethod::None, BalanceMethod::RandomOversample, BalanceMethod::RandomUndersample,
                          BalanceMethod::Smote, BalanceMethod::ClusterCentroid, BalanceMethod::Augmentation})
    if (s == to_string(m)) return m;
  throw Error(ErrorCode::InvalidConfig, "unknown balance method '" + s + "'");
}

json subset_to_json(const SubsetDeclaration& decl) { return json::parse(subset_declaration_json(decl)); }

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  detail::write_file_atomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

std::string fold_metrics_csv(const TrialReport& report) {
  std::string out = "fold";
  for (std::string_view cls : kClassNames) out += fmt::format(",{0}_precision,{0}_recall,{0}_f", cls);
  out += ",macro_f\n";
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    out += fmt::format("{}", f);
    for (const ClassMetrics& m : report.folds[f].per_class) out += fmt::format(",{},{},{}", m.precision, m.recall, m.f);
    out += fmt::format(",{}\n", report.folds[f].macro_f);
  }
  return out;
}

void emit_reports(std::span<const TrialRow> rows, const std::map<int, ConfusionMatrix>& confusions,
                  int reference_trial, const std::filesystem::path& dir) {
  write_text(dir / "table.txt", render_trial_table(rows));
  write_text(dir / "macro_f.dat", macro_f_plot_data(rows));
  for (const auto& [id, cm] : confusions) write_text(dir / fmt::format("trial_{}_confusion.dat", id), confusion_heatmap_data(cm));

  const TrialRow* reference = nullptr;
  std::vector<TrialRow> candidates;
  for (const TrialRow& r : rows) {
    if (r.trial_id == reference_trial) reference = &r;
    else candidates.push_back(r);
  }
  if (reference != nullptr && !candidates.empty()) {
    std::filesystem::remove(dir / "tradeoff.txt");
    write_text(dir / "tradeoff.csv", render_tradeoff(tradeoff(*reference, candidates)));
  } else {
    std::filesystem::remove(dir / "tradeoff.csv");
    write_text(dir / "tradeoff.txt",
               fmt::format("tradeoff omitted: needs reference trial {} and at least one other trial\n", reference_trial));
  }
}

}  // namespace

void RunConfig::validate() const {
  sampling.validate();
  balance.validate();
  train.validate();
  if (data.source == DataSource::Synth) data.synth.validate();
  else if (data.path.empty()) throw Error(ErrorCode::InvalidConfig, "data.path is required for this source");
  if (evaluation.k < 2) throw Error(ErrorCode::InvalidConfig, "evaluation.k must be >= 2");
  if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "coverage_threshold must be in [0, 1]");
  if (output_dir.empty()) throw Error(ErrorCode::InvalidConfig, "output_dir is empty");
}

RunConfig parse_run_config(std::string_view json_text) {
  RunConfig cfg;
  try {
    const json j = json::parse(json_text);
    check_keys(j, {"data", "features", "coverage_threshold", "sampling", "balance", "train", "evaluation", "output_dir"},
               "run config");
    if (j.contains("data")) {
      const json& d = j["data"];
      check_keys(d, {"source", "path", "synth"}, "data");
      if (d.contains("source")) cfg.data.source = parse_source(d["source"].get<std::string>());
      if (d.contains("path")) cfg.data.path = d["path"].get<std::string>();
      if (d.contains("synth")) {
        const json& s = d["synth"];
        check_keys(s, {"n_quadrotor", "n_hexarotor", "n_fixed_wing", "sample_rate_hz", "seed"}, "data.synth");
        read_opt(s, "n_quadrotor", cfg.data.synth.n_quadrotor);
        read_opt(s, "n_hexarotor", cfg.data.synth.n_hexarotor);
        read_opt(s, "n_fixed_wing", cfg.data.synth.n_fixed_wing);
        read_opt(s, "sample_rate_hz", cfg.data.synth.sample_rate_hz);
        read_opt(s, "seed", cfg.data.synth.seed);
      }
    }
    if (cfg.data.source == DataSource::UlogDir && cfg.data.path.empty())
      if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') cfg.data.path = env;
    if (j.contains("features")) cfg.features = parse_subset_declaration(j["features"].dump());
    read_opt(j, "coverage_threshold", cfg.coverage_threshold);
    if (j.contains("sampling")) {
      const json& s = j["sampling"];
      check_keys(s, {"method", "n_intervals", "window_s", "standardize"}, "sampling");
      if (s.contains("method")) cfg.sampling.method = parse_sampling_method(s["method"].get<std::string>());
      read_opt(s, "n_intervals", cfg.sampling.n_intervals);
      read_opt(s, "window_s", cfg.sampling.window_s);
      read_opt(s, "standardize", cfg.sampling.standardize);
    }
    if (j.contains("balance")) {
      const json& b = j["balance"];
      check_keys(b, {"method", "minority_factor", "majority_reduction", "smote_k", "augment", "seed"}, "balance");
      if (b.contains("method")) cfg.balance.method = parse_balance_method(b["method"].get<std::string>());
      read_opt(b, "minority_factor", cfg.balance.minority_factor);
      read_opt(b, "majority_reduction", cfg.balance.majority_reduction);
      read_opt(b, "smote_k", cfg.balance.smote_k);
      read_opt(b, "seed", cfg.balance.seed);
      if (b.contains("augment")) {
        const json& a = b["augment"];
        check_keys(a, {"crop_min", "drift_max", "reverse_probability"}, "balance.augment");
        read_opt(a, "crop_min", cfg.balance.augment.crop_min);
        read_opt(a, "drift_max", cfg.balance.augment.drift_max);
        read_opt(a, "reverse_probability", cfg.balance.augment.reverse_probability);
      }
    }
    if (j.contains("train")) {
      const json& t = j["train"];
      check_keys(t, {"epochs", "batch_size", "seed", "shuffle", "hidden", "learning_rate", "clip_norm"}, "train");
      read_opt(t, "epochs", cfg.train.epochs);
      read_opt(t, "batch_size", cfg.train.batch_size);
      read_opt(t, "seed", cfg.train.seed);
      read_opt(t, "shuffle", cfg.train.shuffle);
      read_opt(t, "hidden", cfg.train.hidden);
      read_opt(t, "learning_rate", cfg.train.learning_rate);
      read_opt(t, "clip_norm", cfg.train.clip_norm);
    }
    if (j.contains("evaluation")) {
      const json& e = j["evaluation"];
      check_keys(e, {"k", "seed", "reference_trial"}, "evaluation");
      read_opt(e, "k", cfg.evaluation.k);
      read_opt(e, "seed", cfg.evaluation.seed);
      read_opt(e, "reference_trial", cfg.evaluation.reference_trial);
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("run config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_run_config(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

std::string run_config_json(const RunConfig& c) {
  json j;
  j["data"] = {{"source", source_name(c.data.source)},
               {"path", c.data.path.string()},
               {"synth",
                {{"n_quadrotor", c.data.synth.n_quadrotor},
                 {"n_hexarotor", c.data.synth.n_hexarotor},
                 {"n_fixed_wing", c.data.synth.n_fixed_wing},
                 {"sample_rate_hz", c.data.synth.sample_rate_hz},
                 {"seed", c.data.synth.seed}}}};
  j["features"] = subset_to_json(c.features);
  j["coverage_threshold"] = c.coverage_threshold;
  j["sampling"] = {{"method", to_string(c.sampling.method)},
                   {"n_intervals", c.sampling.n_intervals},
                   {"window_s", c.sampling.window_s},
                   {"standardize", c.sampling.standardize}};
  j["balance"] = {{"method", to_string(c.balance.method)},
                  {"minority_factor", c.balance.minority_factor},
                  {"majority_reduction", c.balance.majority_reduction},
                  {"smote_k", c.balance.smote_k},
                  {"augment",
                   {{"crop_min", c.balance.augment.crop_min},
                    {"drift_max", c.balance.augment.drift_max},
                    {"reverse_probability", c.balance.augment.reverse_probability}}},
                  {"seed", c.balance.seed}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"seed", c.train.seed},
                {"shuffle", c.train.shuffle},
                {"hidden", c.train.hidden},
                {"learning_rate", c.train.learning_rate},
                {"clip_norm", c.train.clip_norm}};
  j["evaluation"] = {{"k", c.evaluation.k}, {"seed", c.evaluation.seed}, {"reference_trial", c.evaluation.reference_trial}};
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

std::vector<FlightLog> load_corpus(const DataConfig& data, std::vector<SkippedFile>* skipped) {
  switch (data.source) {
    case DataSource::Synth: return generate_corpus(data.synth);
    case DataSource::Cache:
      if (!std::filesystem::exists(data.path))
        throw Error(ErrorCode::MissingCache, "no cache at " + data.path.string());
      return read_cache(data.path);
    case DataSource::UlogDir: {
      if (!std::filesystem::is_directory(data.path))
        throw Error(ErrorCode::IoError, "not a directory: " + data.path.string());
      IngestResult res = ingest_directory(data.path);
      if (skipped != nullptr) *skipped = res.skipped;
      if (res.logs.empty())
        throw Error(ErrorCode::NoParsableLogs,
                    fmt::format("no usable logs in {} ({} skipped)", data.path.string(), res.skipped.size()));
      return std::move(res.logs);
    }
  }
  return {};
}

FeatureSubset resolve_subset(const RunConfig& config, std::span<const FlightLog> corpus) {
  const SubsetDeclaration& decl = config.features;
  if (decl.n_random == 0) return decl.base_subset();
  const auto pruned = prune_by_coverage(compute_coverage(corpus), config.coverage_threshold);
  return random_subsets(pruned, decl.base_subset(), decl.n_random, 1, decl.exclusions, decl.seed).front();
}

std::vector<TrialSpec> sampling_grid(const SamplingConfig& base) {
  std::vector<TrialSpec> grid;
  int id = 1;
  for (std::size_t n : {50, 200, 500}) {
    TrialSpec t;
    t.trial_id = id++;
    t.method = "Average Sampling";
    t.parameters = fmt::format("{}", n);
    t.sampling = base;
    t.sampling.method = SamplingMethod::Average;
    t.sampling.n_intervals = n;
    t.sampling.window_s = 0.0;
    grid.push_back(t);
  }
  for (std::size_t n : {50, 200, 500})
    for (double w : {2.0, 5.0, 10.0}) {
      TrialSpec t;
      t.trial_id = id++;
      t.method = "Fixed Window Average Sampling";
      t.parameters = fmt::format("{}, {}", n, w);
      t.sampling = base;
      t.sampling.method = SamplingMethod::FixedWindowAverage;
      t.sampling.n_intervals = n;
      t.sampling.window_s = w;
      grid.push_back(t);
    }
  return grid;
}

std::vector<TrialSpec> imbalance_grid(const SamplingConfig& sampling, const BalanceConfig& base) {
  struct Family {
    const char* name;
    BalanceMethod method;
    bool increase;
  };
  const Family families[] = {{"Data Augmentation", BalanceMethod::Augmentation, true},
                             {"Random Oversampling", BalanceMethod::RandomOversample, true},
                             {"Random Undersampling", BalanceMethod::RandomUndersample, false},
                             {"SMOTE Oversampling", BalanceMethod::Smote, true},
                             {"Cluster Centroid Undersampling", BalanceMethod::ClusterCentroid, false}};
  std::vector<TrialSpec> grid;
  int id = 13;
  for (const Family& fam : families) {
    const std::array<int, 3> levels = fam.increase ? std::array<int, 3>{150, 200, 250} : std::array<int, 3>{25, 50, 75};
    for (int level : levels) {
      TrialSpec t;
      t.trial_id = id++;
      t.method = fam.name;
      t.parameters = fmt::format("{}", level);
      t.sampling = sampling;
      t.balance = base;
      t.balance.method = fam.method;
      if (fam.increase) t.balance.minority_factor = level / 100.0;
      else t.balance.majority_reduction = level / 100.0;
      grid.push_back(t);
    }
  }
  return grid;
}

TrialResult run_trial(const Dataset& dataset, const TrialSpec& trial, const TrainConfig& train_config,
                      const EvalConfig& eval, const ProgressFn& progress) {
  const std::vector<int> labels = dataset.labels();
  const std::vector<int> folds = stratified_kfold(labels, eval.k, eval.seed);

  TrialResult result;
  TrialReport& report = result.report;
  report.trial_id = trial.trial_id;
  report.method = trial.method;
  report.parameters = trial.parameters;

  for (int f = 0; f < eval.k; ++f) {
    Instances all = dataset.instances;
    std::size_t n_test = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i].fold = folds[i];
      all[i].synthetic = false;
      if (folds[i] == f) ++n_test;
    }
    if (trial.sampling.standardize) {
      Instances train_part;
      for (const SampledInstance& inst : all)
        if (inst.fold != f) train_part.push_back(inst);
      Standardizer::fit(train_part).apply(all);
    }

    BalanceConfig balance = trial.balance;
    balance.seed = mix(trial.balance.seed, static_cast<std::uint64_t>(f));
    const Instances arranged = rebalance_training_folds(all, f, balance);
    assert_test_fold_purity(arranged, f, n_test);

    Instances test(arranged.begin(), arranged.begin() + static_cast<std::ptrdiff_t>(n_test));
    Instances train_split(arranged.begin() + static_cast<std::ptrdiff_t>(n_test), arranged.end());

    TrainConfig tc = train_config;
    tc.seed = mix(train_config.seed, static_cast<std::uint64_t>(f));
    TrainResult trained = train(train_split, tc);

    FoldOutcome outcome;
    outcome.fold = f;
    outcome.train_counts = class_counts(train_split);
    outcome.epoch_loss = std::move(trained.epoch_loss);
    outcome.predictions = predict_all(trained.model, test);
    std::vector<int> predicted;
    for (const SampledInstance& inst : test) {
      outcome.source_ids.push_back(inst.source_id);
      outcome.truth.push_back(inst.class_idx());
    }
    for (const Prediction& p : outcome.predictions) predicted.push_back(p.cls);
    const ConfusionMatrix cm = confusion(predicted, outcome.truth);
    report.pooled += cm;
    report.folds.push_back(fold_metrics(cm));
    if (progress)
      progress(fmt::format("trial {} fold {}/{}: macro-F {:.4f}, final loss {:.4f}", trial.trial_id, f + 1, eval.k,
                           report.folds.back().macro_f, outcome.epoch_loss.back()));
    result.folds.push_back(std::move(outcome));
  }
  report.metrics = aggregate_folds(report.folds);
  return result;
}

std::string predictions_csv(const TrialResult& result) {
  std::string out = "fold,source_id,truth,predicted,p_quadrotor,p_fixed_wing,p_hexarotor\n";
  for (const FoldOutcome& f : result.folds)
    for (std::size_t i = 0; i < f.truth.size(); ++i) {
      const Prediction& p = f.predictions[i];
      out += fmt::format("{},{},{},{},{},{},{}\n", f.fold, f.source_ids[i], kClassNames[static_cast<std::size_t>(f.truth[i])],
                         kClassNames[static_cast<std::size_t>(p.cls)], p.probabilities[0], p.probabilities[1],
                         p.probabilities[2]);
    }
  return out;
}

ConfusionMatrix parse_confusion_csv(std::string_view text) {
  ConfusionMatrix cm;
  std::size_t pos = text.find('\n');
  if (pos == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, "confusion CSV has no rows");
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    const std::size_t start = pos + 1;
    pos = text.find('\n', start);
    if (pos == std::string_view::npos) throw Error(ErrorCode::InvalidConfig, "confusion CSV is short");
    std::string_view line = text.substr(start, pos - start);
    if (!line.starts_with(kClassNames[r])) throw Error(ErrorCode::InvalidConfig, "confusion CSV row order");
    line.remove_prefix(kClassNames[r].size());
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (line.empty() || line.front() != ',') throw Error(ErrorCode::InvalidConfig, "confusion CSV field");
      line.remove_prefix(1);
      const std::size_t end = std::min(line.find(','), line.size());
      cm.counts[r][c] = std::stoull(std::string(line.substr(0, end)));
      line.remove_prefix(end);
    }
  }
  return cm;
}

void write_trial_outputs(std::span<const TrialResult> results, const RunConfig& config,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "resolved_config.json", run_config_json(config));
  std::vector<TrialRow> rows;
  std::vector<TrialReport> reports;
  std::map<int, ConfusionMatrix> confusions;
  for (const TrialResult& r : results) {
    rows.push_back(TrialRow::from_report(r.report));
    reports.push_back(r.report);
    confusions[r.report.trial_id] = r.report.pooled;
    write_text(dir / fmt::format("trial_{}_confusion.csv", r.report.trial_id), confusion_csv(r.report.pooled));
    write_text(dir / fmt::format("trial_{}_folds.csv", r.report.trial_id), fold_metrics_csv(r.report));
    write_text(dir / fmt::format("trial_{}_predictions.csv", r.report.trial_id), predictions_csv(r));
  }
  write_text(dir / "trials.csv", render_trial_csv(rows));
  write_text(dir / "pooled_metrics.csv", pooled_metrics_csv(reports));
  emit_reports(rows, confusions, config.evaluation.reference_trial, dir);
}

void render_reports(const std::filesystem::path& dir, int reference_trial) {
  if (!std::filesystem::exists(dir / "trials.csv"))
    throw Error(ErrorCode::IoError, "no trials.csv in " + dir.string());
  const std::vector<TrialRow> rows = parse_trial_csv(read_text(dir / "trials.csv"));
  std::map<int, ConfusionMatrix> confusions;
  for (const TrialRow& r : rows) {
    const auto path = dir / fmt::format("trial_{}_confusion.csv", r.trial_id);
    if (std::filesystem::exists(path)) confusions[r.trial_id] = parse_confusion_csv(read_text(path));
  }
  emit_reports(rows, confusions, reference_trial, dir);
}

}  // namespace uavtype
