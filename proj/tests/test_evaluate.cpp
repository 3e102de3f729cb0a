#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "test_support.hpp"
#include "uavtype/evaluate.hpp"

using namespace uavtype;
using testsupport::error_code_of;

namespace {

ConfusionMatrix reference_pooled() {
  ConfusionMatrix cm;
  cm.counts = {{{12742, 56, 83}, {124, 278, 10}, {214, 15, 118}}};
  return cm;
}

TrialRow row(int id, std::string method, std::map<std::pair<int, int>, double> means) {
  TrialRow r;
  r.trial_id = id;
  r.method = std::move(method);
  r.parameters = "x";
  for (const auto& [key, value] : means) r.values[static_cast<std::size_t>(key.first * 6 + key.second * 2)] = value;
  return r;
}

double pct2(double v) { return std::round(v * 10000.0) / 100.0; }

}  // namespace

TEST_CASE("stratified folds") {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 100; ++i) labels.push_back(c);
  const std::vector<int> folds = stratified_kfold(labels, 10, 1);
  std::array<std::array<int, 10>, 3> counts{};
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(folds[i])];
  for (const auto& per_class : counts)
    for (int n : per_class) CHECK(n == 10);
  CHECK(stratified_kfold(labels, 10, 1) == folds);
  CHECK(stratified_kfold(labels, 10, 2) != folds);

  std::vector<int> uneven(26706, 0);
  uneven.insert(uneven.end(), 1324, 1);
  uneven.insert(uneven.end(), 1332, 2);
  const std::vector<int> f = stratified_kfold(uneven, 10, 0);
  std::array<std::array<int, 10>, 3> uc{};
  for (std::size_t i = 0; i < uneven.size(); ++i) ++uc[static_cast<std::size_t>(uneven[i])][static_cast<std::size_t>(f[i])];
  for (int fold = 0; fold < 10; ++fold) {
    CHECK((uc[2][static_cast<std::size_t>(fold)] == 133 || uc[2][static_cast<std::size_t>(fold)] == 134));
    CHECK((uc[1][static_cast<std::size_t>(fold)] == 132 || uc[1][static_cast<std::size_t>(fold)] == 133));
  }
  std::array<int, 10> sizes{};
  for (int x : f) ++sizes[static_cast<std::size_t>(x)];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);

  CHECK(error_code_of([&] { stratified_kfold(labels, 1, 0); }) == ErrorCode::TooFewFolds);
  const std::vector<int> tiny = {0, 0, 0, 1, 1, 2, 2, 2};
  CHECK(error_code_of([&] { stratified_kfold(tiny, 3, 0); }) == ErrorCode::ClassTooSmall);
  const std::vector<int> bad = {0, 1, 5};
  CHECK(error_code_of([&] { stratified_kfold(bad, 2, 0); }) == ErrorCode::InvalidLabel);
}

TEST_CASE("confusion counting") {
  const std::vector<int> truth = {0, 0, 1, 2, 2, 2};
  const std::vector<int> pred = {0, 1, 1, 0, 2, 2};
  const ConfusionMatrix cm = confusion(pred, truth);
  CHECK(cm.counts[0][0] == 1);
  CHECK(cm.counts[0][1] == 1);
  CHECK(cm.counts[2][0] == 1);
  CHECK(cm.counts[2][2] == 2);
  CHECK(cm.total() == 6);
  CHECK(cm.trace() == 4);
  CHECK(cm.row_sum(2) == 3);
  CHECK(cm.col_sum(0) == 2);
  CHECK(error_code_of([&] { confusion(std::vector<int>{0}, truth); }) == ErrorCode::LengthMismatch);
  CHECK(error_code_of([&] { confusion(std::vector<int>{3}, std::vector<int>{0}); }) == ErrorCode::InvalidLabel);
}

TEST_CASE("reference pooled matrix replays") {
  const PerClass m = class_metrics(reference_pooled());
  CHECK(std::abs(m[0].precision * 100 - 97.42) < 0.005);
  CHECK(std::abs(m[0].recall * 100 - 98.92) < 0.005);
  CHECK(std::abs(m[1].precision * 100 - 79.66) < 0.005);
  // independent recount
  CHECK(m[2].recall == doctest::Approx(118.0 / 347.0));
  CHECK(m[2].precision == doctest::Approx(118.0 / 211.0));
  const double p = 278.0 / 349.0, r = 278.0 / 412.0;
  CHECK(m[1].f == doctest::Approx(2 * p * r / (p + r)));

  const std::vector<double> f = {98.16, 73.15, 42.15};
  CHECK(std::round(macro_f(f) * 100) / 100 == 71.15);
  CHECK(macro_f(f) == doctest::Approx(213.46 / 3));
}

TEST_CASE("undefined precision and recall") {
  ConfusionMatrix cm;
  cm.counts[0][0] = 5;
  cm.counts[1][0] = 2;
  const PerClass m = class_metrics(cm);
  CHECK(m[1].precision_undefined);
  CHECK(m[1].precision == 0.0);
  CHECK(m[1].f == 0.0);
  CHECK(m[2].recall_undefined);
  CHECK(m[2].f == 0.0);
  CHECK_FALSE(m[0].precision_undefined);
}

TEST_CASE("baselines on a skewed class distribution") {
  const BaselineScores b = baseline_scores({26706, 1324, 1332});
  CHECK(b.majority_macro_f >= 0.310);
  CHECK(b.majority_macro_f <= 0.325);
  CHECK(b.uniform_macro_f >= 0.200);
  CHECK(b.uniform_macro_f <= 0.225);

  const double total = 26706 + 1324 + 1332;
  const double pq = 26706 / total;
  CHECK(b.majority_macro_f == doctest::Approx(2 * pq / (pq + 1) / 3));
  double uniform = 0;
  for (double c : {26706.0, 1324.0, 1332.0}) {
    const double p = c / total;
    uniform += 2 * p * (1.0 / 3) / (p + 1.0 / 3) / 3;
  }
  CHECK(b.uniform_macro_f == doctest::Approx(uniform));
}

TEST_CASE("fold aggregation") {
  std::vector<FoldMetrics> folds(2);
  folds[0].macro_f = 0.6;
  folds[1].macro_f = 0.8;
  folds[0].per_class[1].recall = 0.5;
  folds[1].per_class[1].recall = 0.5;
  const AggregateMetrics a = aggregate_folds(folds);
  CHECK(a.macro_f.mean == doctest::Approx(0.7));
  CHECK(a.macro_f.std == doctest::Approx(0.1414).epsilon(1e-3));
  CHECK(a.per_class[1][1].mean == 0.5);
  CHECK(a.per_class[1][1].std == 0.0);
  CHECK(error_code_of([&] { aggregate_folds(std::span(folds).first(1)); }) == ErrorCode::TooFewFolds);
}

TEST_CASE("trial csv round trip") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  std::vector<TrialRow> rows;
  for (int id = 1; id <= 4; ++id) {
    TrialRow r;
    r.trial_id = id;
    r.method = id < 3 ? "Average Sampling" : "Fixed Window Average Sampling";
    r.parameters = id < 3 ? "50" : "50, 2";
    for (double& v : r.values) v = u(rng);
    rows.push_back(r);
  }
  const std::string csv = render_trial_csv(rows);
  CHECK(csv.rfind(trial_csv_header(), 0) == 0);
  CHECK(parse_trial_csv(csv) == rows);
  CHECK(error_code_of([] { parse_trial_csv("not,a,trial,file\n1,2\n"); }) == ErrorCode::InvalidConfig);

  const std::string table = render_trial_table(rows);
  CHECK(table.find('^') != std::string::npos);
  CHECK(table.find('*') != std::string::npos);
}

TEST_CASE("tradeoff selection and deltas") {
  const TrialRow reference = row(1, "Average Sampling", {{{1, 0}, 0.8051}, {{1, 1}, 0.6746}, {{2, 0}, 0.5708}, {{2, 1}, 0.3403}});
  const std::vector<TrialRow> candidates = {
      row(13, "Data Augmentation", {{{1, 0}, 0.75}, {{1, 1}, 0.70}, {{2, 0}, 0.5}, {{2, 1}, 0.40}}),
      row(21, "Random Undersampling", {{{1, 0}, 0.6707}, {{1, 1}, 0.7574}, {{2, 0}, 0.40}, {{2, 1}, 0.60}}),
      row(27, "Cluster Centroid Undersampling", {{{1, 0}, 0.50}, {{1, 1}, 0.7574}, {{2, 0}, 0.2111}, {{2, 1}, 0.8276}}),
  };
  const auto entries = tradeoff(reference, candidates);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].cls == kFixedWingClass);
  CHECK(entries[0].candidate_trial == 21);  // tie on recall goes to the lower id
  CHECK(pct2(entries[0].delta_precision) == -13.44);
  CHECK(pct2(entries[0].delta_recall) == 8.28);
  CHECK(entries[1].cls == kHexarotorClass);
  CHECK(entries[1].candidate_trial == 27);
  CHECK(pct2(entries[1].delta_precision) == -35.97);
  CHECK(pct2(entries[1].delta_recall) == 48.73);

  const std::string text = render_tradeoff(entries);
  CHECK(text.find("-13.44") != std::string::npos);
  CHECK(text.find("+48.73") != std::string::npos);
}

TEST_CASE("confusion csv and plot data") {
  const std::string csv = confusion_csv(reference_pooled());
  CHECK(csv == "true\\predicted,quadrotor,fixed_wing,hexarotor\n"
               "quadrotor,12742,56,83\nfixed_wing,124,278,10\nhexarotor,214,15,118\n");
  CHECK_FALSE(confusion_heatmap_data(reference_pooled()).empty());
}
