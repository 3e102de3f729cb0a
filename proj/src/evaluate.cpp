#include "uavtype/evaluate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "uavtype/error.hpp"

namespace uavtype {

namespace {

constexpr std::array<std::string_view, 3> kMetricNames = {"precision", "recall", "f"};

double ratio(std::uint64_t num, std::uint64_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  if (quoted) throw Error(ErrorCode::InvalidConfig, "unterminated quote in CSV line");
  return fields;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::InvalidConfig, "bad number '" + s + "' in CSV");
  return v;
}

std::string pct(double v) { return fmt::format("{:.2f}", 100.0 * v); }

}  // namespace

std::vector<int> stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::TooFewFolds, fmt::format("k = {}", k));
  std::array<std::vector<std::size_t>, kNumClasses> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= kNumClasses) throw Error(ErrorCode::InvalidLabel, fmt::format("label {}", labels[i]));
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (int c = 0; c < kNumClasses; ++c)
    if (members[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(k))
      throw Error(ErrorCode::ClassTooSmall, fmt::format("{} has {} instances, fewer than k = {}",
                                                        kClassNames[static_cast<std::size_t>(c)],
                                                        members[static_cast<std::size_t>(c)].size(), k));

  std::mt19937_64 rng(seed);
  std::vector<int> folds(labels.size(), -1);
  std::size_t offset = 0;
  for (auto& idx : members) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < idx.size(); ++j) folds[idx[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    offset += idx.size();
  }
  return folds;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), std::uint64_t{0});
  return n;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t n = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) n += counts[c][c];
  return n;
}

std::uint64_t ConfusionMatrix::row_sum(int c) const {
  const auto& row = counts[static_cast<std::size_t>(c)];
  return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::col_sum(int c) const {
  std::uint64_t n = 0;
  for (const auto& row : counts) n += row[static_cast<std::size_t>(c)];
  return n;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (std::size_t r = 0; r < kNumClasses; ++r)
    for (std::size_t c = 0; c < kNumClasses; ++c) counts[r][c] += other.counts[r][c];
  return *this;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} predictions for {} labels", predicted.size(), truth.size()));
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= kNumClasses || predicted[i] < 0 || predicted[i] >= kNumClasses)
      throw Error(ErrorCode::InvalidLabel, fmt::format("pair ({}, {}) at {}", truth[i], predicted[i], i));
    ++cm.counts[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

PerClass class_metrics(const ConfusionMatrix& cm) {
  PerClass out{};
  for (int c = 0; c < kNumClasses; ++c) {
    ClassMetrics& m = out[static_cast<std::size_t>(c)];
    const std::uint64_t hit = cm.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    m.precision = ratio(hit, cm.col_sum(c), m.precision_undefined);
    m.recall = ratio(hit, cm.row_sum(c), m.recall_undefined);
    m.f = harmonic(m.precision, m.recall);
  }
  return out;
}

double macro_f(std::span<const double> f_scores) {
  if (f_scores.empty()) return 0.0;
  return std::accumulate(f_scores.begin(), f_scores.end(), 0.0) / static_cast<double>(f_scores.size());
}

double macro_f(const PerClass& metrics) {
  std::array<double, kNumClasses> f{};
  for (std::size_t c = 0; c < kNumClasses; ++c) f[c] = metrics[c].f;
  return macro_f(f);
}

FoldMetrics fold_metrics(const ConfusionMatrix& cm) {
  FoldMetrics fm;
  fm.per_class = class_metrics(cm);
  fm.macro_f = macro_f(fm.per_class);
  return fm;
}

AggregateMetrics aggregate_folds(std::span<const FoldMetrics> folds) {
  if (folds.size() < 2) throw Error(ErrorCode::TooFewFolds, fmt::format("{} fold(s) to aggregate", folds.size()));
  auto summarize = [&](auto&& get) {
    MeanStd ms;
    for (const FoldMetrics& f : folds) ms.mean += get(f);
    ms.mean /= static_cast<double>(folds.size());
    double ss = 0.0;
    for (const FoldMetrics& f : folds) ss += (get(f) - ms.mean) * (get(f) - ms.mean);
    ms.std = std::sqrt(ss / static_cast<double>(folds.size() - 1));
    return ms;
  };
  AggregateMetrics agg;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    agg.per_class[c][0] = summarize([c](const FoldMetrics& f) { return f.per_class[c].precision; });
    agg.per_class[c][1] = summarize([c](const FoldMetrics& f) { return f.per_class[c].recall; });
    agg.per_class[c][2] = summarize([c](const FoldMetrics& f) { return f.per_class[c].f; });
  }
  agg.macro_f = summarize([](const FoldMetrics& f) { return f.macro_f; });
  return agg;
}

BaselineScores baseline_scores(const std::array<std::size_t, kNumClasses>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  BaselineScores s;
  if (total == 0.0) return s;
  const auto majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double prevalence = static_cast<double>(counts[c]) / total;
    if (c == majority) {
      s.majority[c].precision = prevalence;
      s.majority[c].recall = 1.0;
    } else {
      s.majority[c].precision_undefined = true;
    }
    s.majority[c].f = harmonic(s.majority[c].precision, s.majority[c].recall);
    s.uniform[c].precision = prevalence;
    s.uniform[c].recall = 1.0 / 3.0;
    s.uniform[c].f = harmonic(prevalence, 1.0 / 3.0);
  }
  s.majority_macro_f = macro_f(s.majority);
  s.uniform_macro_f = macro_f(s.uniform);
  return s;
}

TrialRow TrialRow::from_report(const TrialReport& report) {
  TrialRow row;
  row.trial_id = report.trial_id;
  row.method = report.method;
  row.parameters = report.parameters;
  for (std::size_t c = 0; c < kNumClasses; ++c)
    for (std::size_t m = 0; m < 3; ++m) {
      row.values[c * 6 + m * 2] = report.metrics.per_class[c][m].mean;
      row.values[c * 6 + m * 2 + 1] = report.metrics.per_class[c][m].std;
    }
  row.values[18] = report.metrics.macro_f.mean;
  row.values[19] = report.metrics.macro_f.std;
  return row;
}

std::string trial_csv_header() {
  std::string h = "trial_id,method,parameters";
  for (std::string_view cls : kClassNames)
    for (std::string_view metric : kMetricNames) h += fmt::format(",{0}_{1}_mean,{0}_{1}_std", cls, metric);
  return h + ",macro_f_mean,macro_f_std";
}

std::string render_trial_csv(std::span<const TrialRow> rows) {
  std::string out = trial_csv_header() + "\n";
  for (const TrialRow& row : rows) {
    out += fmt::format("{},{},{}", row.trial_id, csv_field(row.method), csv_field(row.parameters));
    for (double v : row.values) out += fmt::format(",{}", v);
    out += "\n";
  }
  return out;
}

std::vector<TrialRow> parse_trial_csv(std::string_view text) {
  std::vector<TrialRow> rows;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != trial_csv_header()) throw Error(ErrorCode::InvalidConfig, "unexpected trial CSV header");
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 23)
      throw Error(ErrorCode::InvalidConfig, fmt::format("trial CSV row has {} fields, expected 23", fields.size()));
    TrialRow row;
    row.trial_id = parse_number<int>(fields[0]);
    row.method = fields[1];
    row.parameters = fields[2];
    for (std::size_t i = 0; i < row.values.size(); ++i) row.values[i] = parse_number<double>(fields[3 + i]);
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw Error(ErrorCode::InvalidConfig, "trial CSV is empty");
  return rows;
}

std::string render_trial_table(std::span<const TrialRow> rows) {
  std::map<std::string, std::size_t> best_of_method;
  std::size_t best_overall = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto [it, inserted] = best_of_method.try_emplace(rows[i].method, i);
    if (!inserted && rows[i].macro_f_mean() > rows[it->second].macro_f_mean()) it->second = i;
    if (rows[i].macro_f_mean() > rows[best_overall].macro_f_mean()) best_overall = i;
  }

  std::string out = fmt::format("{:<20} {:>5} {:<16} | {:^23} | {:^23} | {:^23} | {:>8}\n", "method", "trial",
                                "parameter", "quadrotor P/R/F", "fixed-wing P/R/F", "hexarotor P/R/F", "macro-F");
  out += std::string(out.size() - 1, '-') + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TrialRow& r = rows[i];
    std::string mark;
    if (best_of_method[r.method] == i) mark += '*';
    if (!rows.empty() && best_overall == i) mark += '^';
    out += fmt::format("{:<20} {:>5} {:<16}", r.method, r.trial_id, r.parameters);
    for (int c = 0; c < kNumClasses; ++c)
      out += fmt::format(" | {:>7}{:>8}{:>8}", pct(r.mean(c, 0)), pct(r.mean(c, 1)), pct(r.mean(c, 2)));
    out += fmt::format(" | {:>6}{:<2}\n", pct(r.macro_f_mean()), mark);
  }
  out += "\n* best macro-F for the method, ^ best macro-F in the table. Values are fold means in percent.\n";
  return out;
}

std::vector<TradeoffEntry> tradeoff(const TrialRow& reference, std::span<const TrialRow> candidates) {
  std::vector<TradeoffEntry> out;
  if (candidates.empty()) return out;
  for (int cls : {kFixedWingClass, kHexarotorClass}) {
    const TrialRow* best = &candidates.front();
    for (const TrialRow& c : candidates)
      if (c.mean(cls, 1) > best->mean(cls, 1) ||
          (c.mean(cls, 1) == best->mean(cls, 1) && c.trial_id < best->trial_id))
        best = &c;
    TradeoffEntry e;
    e.cls = cls;
    e.reference_trial = reference.trial_id;
    e.candidate_trial = best->trial_id;
    e.reference_precision = reference.mean(cls, 0);
    e.reference_recall = reference.mean(cls, 1);
    e.candidate_precision = best->mean(cls, 0);
    e.candidate_recall = best->mean(cls, 1);
    e.delta_precision = e.candidate_precision - e.reference_precision;
    e.delta_recall = e.candidate_recall - e.reference_recall;
    out.push_back(e);
  }
  return out;
}

std::string render_tradeoff(std::span<const TradeoffEntry> entries) {
  std::string out = "class,reference_trial,reference_precision,reference_recall,candidate_trial,"
                    "candidate_precision,candidate_recall,delta_precision,delta_recall\n";
  for (const TradeoffEntry& e : entries)
    out += fmt::format("{},{},{},{},{},{},{},{:+.2f},{:+.2f}\n", kClassNames[static_cast<std::size_t>(e.cls)],
                       e.reference_trial, pct(e.reference_precision), pct(e.reference_recall), e.candidate_trial,
                       pct(e.candidate_precision), pct(e.candidate_recall),
                       std::round(e.delta_precision * 10000.0) / 100.0, std::round(e.delta_recall * 10000.0) / 100.0);
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\predicted";
  for (std::string_view name : kClassNames) out += fmt::format(",{}", name);
  out += "\n";
  for (std::size_t r = 0; r < kNumClasses; ++r) {
    out += kClassNames[r];
    for (std::size_t c = 0; c < kNumClasses; ++c) out += fmt::format(",{}", cm.counts[r][c]);
    out += "\n";
  }
  return out;
}

std::string pooled_metrics_csv(std::span<const TrialReport> reports) {
  std::string out = "trial_id";
  for (std::string_view cls : kClassNames)
    for (std::string_view metric : kMetricNames) out += fmt::format(",{}_{}", cls, metric);
  out += ",macro_f\n";
  for (const TrialReport& r : reports) {
    const FoldMetrics fm = fold_metrics(r.pooled);
    out += fmt::format("{}", r.trial_id);
    for (const ClassMetrics& m : fm.per_class) out += fmt::format(",{},{},{}", m.precision, m.recall, m.f);
    out += fmt::format(",{}\n", fm.macro_f);
  }
  return out;
}

std::string macro_f_plot_data(std::span<const TrialRow> rows) {
  std::string out = "# trial_id macro_f_mean macro_f_std\n";
  for (const TrialRow& r : rows) out += fmt::format("{} {} {}\n", r.trial_id, r.macro_f_mean(), r.macro_f_std());
  return out;
}

std::string confusion_heatmap_data(const ConfusionMatrix& cm) {
  std::string out = "# rows: true quadrotor, fixed_wing, hexarotor; columns: predicted, same order\n";
  for (const auto& row : cm.counts) out += fmt::format("{} {} {}\n", row[0], row[1], row[2]);
  return out;
}

}  // namespace uavtype
