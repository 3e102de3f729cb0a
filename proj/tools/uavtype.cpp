// Command-line driver: ingest, catalog, sample, balance, train, evaluate,
// experiment, report, synth. Every command reads an optional JSON run
// config; --set key.path=value overrides single keys.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>

#include "json.hpp"
#include "uavtype/cache.hpp"
#include "uavtype/error.hpp"
#include "uavtype/pipeline.hpp"

namespace {

using namespace uavtype;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void log_line(const CommonOptions& opts, const std::string& msg) {
  if (!opts.quiet) fmt::print(stderr, "{}\n", msg);
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;  // bare strings need no quotes on the command line
  }
}

RunConfig load_config(const CommonOptions& opts) {
  json j = json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + opts.config_path);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, std::string("run config: ") + e.what());
    }
  }
  for (const std::string& o : opts.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InvalidConfig, "--set expects key.path=value");
    std::string pointer = "/" + o.substr(0, eq);
    for (char& c : pointer)
      if (c == '.') c = '/';
    j[json::json_pointer(pointer)] = parse_override_value(o.substr(eq + 1));
  }
  return parse_run_config(j.dump());
}

void print_counts(const std::array<std::size_t, kNumClasses>& counts) {
  for (int c = 0; c < kNumClasses; ++c)
    fmt::print("  {:<11} {}\n", kClassNames[static_cast<std::size_t>(c)], counts[static_cast<std::size_t>(c)]);
}

std::array<std::size_t, kNumClasses> corpus_counts(std::span<const FlightLog> logs) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const FlightLog& log : logs)
    if (auto c = class_index(log.vehicle_type)) ++counts[static_cast<std::size_t>(*c)];
  return counts;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

Dataset sampled_dataset(const RunConfig& cfg, const CommonOptions& opts) {
  const std::vector<FlightLog> corpus = load_corpus(cfg.data);
  log_line(opts, fmt::format("loaded {} flights", corpus.size()));
  const FeatureSubset subset = resolve_subset(cfg, corpus);
  Dataset ds = build_dataset(corpus, subset, cfg.sampling);
  log_line(opts, fmt::format("sampled {} instances, skipped {}", ds.instances.size(), ds.skipped.size()));
  return ds;
}

int cmd_ingest(const CommonOptions& opts, const std::string& dir, const std::string& cache_out) {
  RunConfig cfg = load_config(opts);
  DataConfig data = cfg.data;
  data.source = DataSource::UlogDir;
  if (!dir.empty()) data.path = dir;
  if (data.path.empty())
    if (const char* env = std::getenv(kDataDirEnv)) data.path = env;
  if (data.path.empty()) throw Error(ErrorCode::InvalidConfig, fmt::format("no directory given and ${} unset", kDataDirEnv));
  std::vector<SkippedFile> skipped;
  std::vector<FlightLog> logs;
  try {
    logs = load_corpus(data, &skipped);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoParsableLogs)
      for (const SkippedFile& s : skipped) fmt::print(stderr, "skipped {}: {}\n", s.source_id, s.reason);
    throw;
  }
  write_cache(logs, cache_out);
  for (const SkippedFile& s : skipped) fmt::print("skipped {}: {}\n", s.source_id, s.reason);
  fmt::print("cached {} flights to {}\n", logs.size(), cache_out);
  print_counts(corpus_counts(logs));
  return 0;
}

int cmd_catalog(const CommonOptions& opts, const std::string& out_path) {
  const RunConfig cfg = load_config(opts);
  const std::vector<FlightLog> corpus = load_corpus(cfg.data);
  const CoverageTable table = compute_coverage(corpus);
  write_text_file(out_path, coverage_csv(table));
  const auto pruned = prune_by_coverage(table, cfg.coverage_threshold);
  fmt::print("{} fields, {} at coverage >= {}; table written to {}\n", table.fraction.size(), pruned.size(),
             cfg.coverage_threshold, out_path);
  const SubsetDeclaration& decl = cfg.features;
  for (const FeatureSubset& s :
       random_subsets(pruned, decl.base_subset(), decl.n_random, decl.k, decl.exclusions, decl.seed)) {
    std::vector<const FlightLog*> usable;
    for (const FlightLog& log : corpus)
      if (assemble_features(log, s)) usable.push_back(&log);
    fmt::print("subset {} ({} features): {} usable flights\n", s.name, s.keys.size(), usable.size());
  }
  return 0;
}

int cmd_sample(const CommonOptions& opts, const std::string& out_path) {
  const RunConfig cfg = load_config(opts);
  const Dataset ds = sampled_dataset(cfg, opts);
  write_dataset(ds, out_path);
  fmt::print("wrote {} instances ({} x {}) to {}\n", ds.instances.size(), cfg.sampling.n_intervals,
             ds.feature_names.size(), out_path);
  print_counts(ds.class_counts());
  return 0;
}

int cmd_balance(const CommonOptions& opts, const std::string& in_path, const std::string& out_path) {
  const RunConfig cfg = load_config(opts);
  Dataset ds = read_dataset(in_path);
  fmt::print("before ({}):\n", to_string(cfg.balance.method));
  print_counts(ds.class_counts());
  ds.instances = rebalance(ds.instances, cfg.balance);
  write_dataset(ds, out_path);
  fmt::print("after:\n");
  print_counts(ds.class_counts());
  return 0;
}

int cmd_train(const CommonOptions& opts, const std::string& in_path, const std::string& model_out) {
  const RunConfig cfg = load_config(opts);
  Dataset ds = in_path.empty() ? sampled_dataset(cfg, opts) : read_dataset(in_path);
  if (ds.sampling.standardize) Standardizer::fit(ds.instances).apply(ds.instances);
  const Instances train_split = rebalance(ds.instances, cfg.balance);
  const auto started = std::chrono::steady_clock::now();
  const TrainResult res = train(train_split, cfg.train, [&](std::size_t epoch, double loss) {
    log_line(opts, fmt::format("epoch {:>3}: loss {:.6f}", epoch, loss));
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  save_model(res.model, model_out);
  fmt::print("trained on {} instances in {:.1f} s, final loss {:.6f}; model saved to {}\n", train_split.size(), secs,
             res.epoch_loss.back(), model_out);
  return 0;
}

int cmd_evaluate(const CommonOptions& opts) {
  const RunConfig cfg = load_config(opts);
  const Dataset ds = sampled_dataset(cfg, opts);
  TrialSpec trial;
  trial.trial_id = 1;
  trial.method = fmt::format("{} / {}", to_string(cfg.sampling.method), to_string(cfg.balance.method));
  trial.parameters = cfg.sampling.method == SamplingMethod::Average
                         ? fmt::format("{}", cfg.sampling.n_intervals)
                         : fmt::format("{}, {}", cfg.sampling.n_intervals, cfg.sampling.window_s);
  trial.sampling = cfg.sampling;
  trial.balance = cfg.balance;
  const std::vector<TrialResult> results{
      run_trial(ds, trial, cfg.train, cfg.evaluation, [&](const std::string& m) { log_line(opts, m); })};
  write_trial_outputs(results, cfg, cfg.output_dir);
  const TrialReport& r = results.front().report;
  fmt::print("macro-F {:.4f} +- {:.4f} over {} folds; outputs in {}\n", r.metrics.macro_f.mean, r.metrics.macro_f.std,
             cfg.evaluation.k, cfg.output_dir.string());
  fmt::print("{}", confusion_csv(r.pooled));
  return 0;
}

int cmd_experiment(const CommonOptions& opts, const std::string& grid) {
  const RunConfig cfg = load_config(opts);
  const std::vector<FlightLog> corpus = load_corpus(cfg.data);
  const FeatureSubset subset = resolve_subset(cfg, corpus);
  std::vector<TrialSpec> trials;
  if (grid == "sampling") trials = sampling_grid(cfg.sampling);
  else {
    // the tradeoff table compares against a sampling-grid trial, so run it first
    trials = imbalance_grid(cfg.sampling, cfg.balance);
    for (const TrialSpec& t : sampling_grid(cfg.sampling))
      if (t.trial_id == cfg.evaluation.reference_trial) trials.insert(trials.begin(), t);
  }

  std::vector<TrialResult> results;
  std::optional<Dataset> ds;
  for (const TrialSpec& t : trials) {
    if (!ds || !(ds->sampling == t.sampling)) ds = build_dataset(corpus, subset, t.sampling);
    log_line(opts, fmt::format("trial {} ({} {}) on {} instances", t.trial_id, t.method, t.parameters,
                               ds->instances.size()));
    results.push_back(run_trial(*ds, t, cfg.train, cfg.evaluation, [&](const std::string& m) { log_line(opts, m); }));
  }
  write_trial_outputs(results, cfg, cfg.output_dir);
  std::vector<TrialRow> rows;
  for (const TrialResult& r : results) rows.push_back(TrialRow::from_report(r.report));
  fmt::print("{}", render_trial_table(rows));
  return 0;
}

int cmd_report(const std::string& dir, int reference) {
  render_reports(dir, reference);
  std::ifstream in(std::filesystem::path(dir) / "table.txt");
  std::cout << in.rdbuf();
  const auto tradeoff_path = std::filesystem::path(dir) / "tradeoff.csv";
  if (std::filesystem::exists(tradeoff_path)) {
    std::ifstream t(tradeoff_path);
    std::cout << "\n" << t.rdbuf();
  } else {
    std::ifstream t(std::filesystem::path(dir) / "tradeoff.txt");
    std::cout << "\n" << t.rdbuf();
  }
  return 0;
}

int cmd_synth(const CommonOptions& opts, const std::string& out_dir, const std::string& cache_out) {
  const RunConfig cfg = load_config(opts);
  if (out_dir.empty() && cache_out.empty())
    throw Error(ErrorCode::InvalidConfig, "synth needs --out-dir and/or --cache");
  const std::vector<FlightLog> corpus = generate_corpus(cfg.data.synth);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const FlightLog& log : corpus) write_ulog_file(log, std::filesystem::path(out_dir) / log.source_id);
    fmt::print("wrote {} ULog files to {}\n", corpus.size(), out_dir);
  }
  if (!cache_out.empty()) {
    write_cache(corpus, cache_out);
    fmt::print("wrote cache of {} flights to {}\n", corpus.size(), cache_out);
  }
  print_counts(corpus_counts(corpus));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV type classification from flight logs"};
  app.require_subcommand(1);
  CommonOptions opts;
  app.add_option("-c,--config", opts.config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--set", opts.overrides, "Override a config key, e.g. --set train.epochs=5");
  app.add_flag("-q,--quiet", opts.quiet, "No progress output on stderr");

  std::string dir, cache, out, in, model, grid = "sampling", report_dir;
  int reference = 1;

  auto* ingest = app.add_subcommand("ingest", "Parse a directory of .ulg files into a cache");
  ingest->add_option("dir", dir, fmt::format("ULog directory (default ${})", kDataDirEnv));
  ingest->add_option("--cache", cache, "Cache file to write")->required();

  auto* catalog = app.add_subcommand("catalog", "Field coverage table and feature subsets");
  catalog->add_option("--out", out, "Coverage CSV")->default_val("coverage.csv");

  auto* sample = app.add_subcommand("sample", "Resample the corpus into a dataset file");
  sample->add_option("--out", out, "Dataset file")->required();

  auto* balance = app.add_subcommand("balance", "Rebalance a dataset file");
  balance->add_option("--in", in, "Dataset file")->required()->check(CLI::ExistingFile);
  balance->add_option("--out", out, "Rebalanced dataset file")->required();

  auto* train_cmd = app.add_subcommand("train", "Train one model on a whole dataset");
  train_cmd->add_option("--in", in, "Dataset file (default: sample from the config's data source)");
  train_cmd->add_option("--model", model, "Checkpoint to write")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate the configured pipeline");

  auto* experiment = app.add_subcommand("experiment", "Run the sampling (1-12) or imbalance (13-27) trial grid");
  experiment->add_option("--grid", grid, "sampling | imbalance")->check(CLI::IsMember({"sampling", "imbalance"}));

  auto* report = app.add_subcommand("report", "Render tables, tradeoffs and plot data from a run directory");
  report->add_option("dir", report_dir, "Run directory with trials.csv")->required();
  report->add_option("--reference", reference, "Reference trial for the tradeoff table");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic labelled corpus");
  synth->add_option("--out-dir", dir, "Write one .ulg file per flight here");
  synth->add_option("--cache", cache, "Write the corpus as a cache file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return cmd_ingest(opts, dir, cache);
    if (*catalog) return cmd_catalog(opts, out);
    if (*sample) return cmd_sample(opts, out);
    if (*balance) return cmd_balance(opts, in, out);
    if (*train_cmd) return cmd_train(opts, in, model);
    if (*evaluate) return cmd_evaluate(opts);
    if (*experiment) return cmd_experiment(opts, grid);
    if (*report) return cmd_report(report_dir, reference);
    if (*synth) return cmd_synth(opts, dir, cache);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
