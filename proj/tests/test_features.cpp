#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>
#include <set>

#include "oracles.hpp"
#include "test_support.hpp"
#include "uavtype/features.hpp"

using namespace uavtype;
using testsupport::error_code_of;

namespace {

TopicSeries topic(std::string name, std::vector<std::string> fields, std::vector<std::uint64_t> ts = {0, 1'000'000}) {
  TopicSeries s;
  s.topic_name = std::move(name);
  s.timestamps = std::move(ts);
  for (auto& f : fields) s.columns.push_back({std::move(f), std::vector<double>(s.timestamps.size(), 1.0)});
  return s;
}

FlightLog log_with(std::vector<TopicSeries> topics) {
  FlightLog log;
  log.vehicle_type = VehicleType::Quadrotor;
  for (auto& t : topics) {
    TopicKey key{t.topic_name, t.instance_id};
    log.topics[key] = std::move(t);
  }
  return log;
}

FeatureKey key(std::string_view text) { return FeatureKey::parse(text); }

}  // namespace

TEST_CASE("feature keys parse and print") {
  const FeatureKey k = key("vehicle_attitude/q:yaw");
  CHECK(k.topic == "vehicle_attitude");
  CHECK(k.field == "q");
  CHECK(k.derived == Derivation::Yaw);
  CHECK(k.to_string() == "vehicle_attitude/q:yaw");
  CHECK(key("battery_status/temperature").derived == Derivation::None);
  CHECK(error_code_of([] { key("no_slash"); }) == ErrorCode::InvalidConfig);
  CHECK(error_code_of([] { key("a/b:sideways"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("coverage fractions") {
  CHECK(error_code_of([] { compute_coverage({}); }) == ErrorCode::EmptyCorpus);

  const std::vector<FlightLog> two = {log_with({topic("t", {"a"})}), log_with({topic("t", {"a"})})};
  CHECK(compute_coverage(two).fraction.at(key("t/a")) == 1.0);

  std::vector<FlightLog> four(4, log_with({topic("t", {"a"})}));
  four[0] = log_with({topic("t", {"a", "b"})});
  const CoverageTable table = compute_coverage(four);
  CHECK(table.fraction.at(key("t/b")) == 0.25);
  CHECK(table.corpus_size == 4);
}

TEST_CASE("coverage matches an independent recount") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> topics = {"alpha", "beta", "gamma"};
  const std::vector<std::string> fields = {"u", "v", "w", "x"};
  std::vector<FlightLog> corpus;
  std::vector<std::set<std::string>> present;
  for (int i = 0; i < 10; ++i) {
    std::vector<TopicSeries> ts;
    std::set<std::string> keys;
    for (const auto& t : topics) {
      std::vector<std::string> chosen;
      for (const auto& f : fields)
        if (rng() % 2) chosen.push_back(f);
      if (chosen.empty()) continue;
      for (const auto& f : chosen) keys.insert(t + "/" + f);
      ts.push_back(topic(t, chosen));
    }
    // an instance-1 topic must not count
    TopicSeries extra = topic("alpha", {"zzz"});
    extra.instance_id = 1;
    ts.push_back(extra);
    corpus.push_back(log_with(ts));
    present.push_back(keys);
  }
  const CoverageTable table = compute_coverage(corpus);
  CHECK_FALSE(table.fraction.contains(key("alpha/zzz")));
  for (const auto& t : topics)
    for (const auto& f : fields) {
      const std::string k = t + "/" + f;
      int count = 0;
      for (const auto& p : present) count += p.contains(k) ? 1 : 0;
      if (count == 0) {
        CHECK_FALSE(table.fraction.contains(key(k)));
      } else {
        CHECK(table.fraction.at(key(k)) == doctest::Approx(count / 10.0));
      }
    }
}

TEST_CASE("pruning threshold is inclusive and monotone") {
  CoverageTable table;
  table.fraction = {{key("t/a"), 0.61}, {key("t/b"), 0.59}, {key("t/c"), 0.6}, {key("s/d"), 1.0}};
  CHECK(prune_by_coverage(table, 0.6) == std::vector<FeatureKey>{key("s/d"), key("t/a"), key("t/c")});
  CHECK(prune_by_coverage(table, 1.0) == std::vector<FeatureKey>{key("s/d")});
  std::size_t previous = SIZE_MAX;
  for (double th : {0.1, 0.59, 0.6, 0.61, 0.9, 1.0}) {
    const std::size_t n = prune_by_coverage(table, th).size();
    CHECK(n <= previous);
    previous = n;
  }
}

TEST_CASE("random subsets") {
  const std::vector<FeatureKey> pruned = {key("p/a"), key("p/b"), key("p/c"), key("p/d"),
                                          key("p/e"), key("p/f"), key("p/g")};
  FeatureSubset base{"base", {key("p/a"), key("p/b")}, 0};
  const std::vector<FeatureKey> excl = {key("p/g")};

  const auto zero = random_subsets(pruned, base, 0, 3, excl, 1);
  REQUIRE(zero.size() == 3);
  for (const auto& s : zero) CHECK(s.keys == base.keys);

  const auto all = random_subsets(pruned, base, 4, 2, excl, 1);
  for (const auto& s : all) {
    REQUIRE(s.keys.size() == 6);
    CHECK(std::vector<FeatureKey>(s.keys.begin(), s.keys.begin() + 2) == base.keys);
    CHECK(std::set<FeatureKey>(s.keys.begin() + 2, s.keys.end()) ==
          std::set<FeatureKey>{key("p/c"), key("p/d"), key("p/e"), key("p/f")});
    CHECK(s.n_random == 4);
  }

  const auto a = random_subsets(pruned, base, 2, 5, excl, 42);
  const auto b = random_subsets(pruned, base, 2, 5, excl, 42);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].keys == b[i].keys);
    CHECK(std::find(a[i].keys.begin(), a[i].keys.end(), key("p/g")) == a[i].keys.end());
    CHECK(std::set<FeatureKey>(a[i].keys.begin(), a[i].keys.end()).size() == 4);
  }
  CHECK(error_code_of([&] { random_subsets(pruned, base, 5, 1, excl, 0); }) == ErrorCode::InsufficientFeatures);
}

TEST_CASE("quaternion to euler") {
  const EulerAngles id = quaternion_to_euler(1, 0, 0, 0);
  CHECK(id.roll == 0.0);
  CHECK(id.pitch == 0.0);
  CHECK(id.yaw == 0.0);

  const double h = std::sqrt(0.5);
  const EulerAngles yaw90 = quaternion_to_euler(h, 0, 0, h);
  CHECK(yaw90.yaw == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  CHECK(std::abs(yaw90.roll) < 1e-12);
  CHECK(std::abs(yaw90.pitch) < 1e-12);

  CHECK(error_code_of([] { quaternion_to_euler(0, 0, 0, 0); }) == ErrorCode::ZeroQuaternion);

  // gimbal lock: pitch pinned to +pi/2 without NaN
  const EulerAngles lock = quaternion_to_euler(h, 0, h, 0);
  CHECK(lock.pitch == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("euler angles recompose the quaternion's rotation") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const double w = g(rng), x = g(rng), y = g(rng), z = g(rng);
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    const EulerAngles e = quaternion_to_euler(w / n, x / n, y / n, z / n);
    const Eigen::Matrix3d diff =
        oracle::rotation_from_euler(e.roll, e.pitch, e.yaw) - oracle::rotation_from_quaternion(w, x, y, z);
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("assemble features in declared order") {
  FlightLog log;
  log.vehicle_type = VehicleType::Quadrotor;
  const SubsetDeclaration decl = baseline_declaration();
  REQUIRE(decl.base.size() == 9);

  // one topic per distinct base topic; every plain field gets a sentinel constant
  std::map<std::string, TopicSeries> topics;
  double sentinel = 1.0;
  std::map<FeatureKey, double> expected;
  for (const FeatureKey& k : decl.base) {
    TopicSeries& t = topics[k.topic];
    t.topic_name = k.topic;
    t.timestamps = {0, 500'000, 1'000'000};
    if (k.derived == Derivation::None) {
      t.columns.push_back({k.field, std::vector<double>(3, sentinel)});
      expected[k] = sentinel;
      sentinel += 1.0;
    } else if (t.find(k.field + "[0]") == nullptr) {
      for (int c = 0; c < 4; ++c)
        t.columns.push_back({k.field + "[" + std::to_string(c) + "]", std::vector<double>(3, c == 0 ? 1.0 : 0.0)});
    }
  }
  for (auto& [name, t] : topics) log.topics[{name, 0}] = t;

  const auto series = assemble_features(log, decl.base_subset());
  REQUIRE(series.has_value());
  REQUIRE(series->size() == 9);
  for (std::size_t i = 0; i < 9; ++i) {
    const FeatureKey& k = decl.base[i];
    CHECK((*series)[i].values.size() == 3);
    if (k.derived == Derivation::None) {
      CHECK((*series)[i].values.front() == expected[k]);
    } else {
      CHECK((*series)[i].values.front() == 0.0);
    }
  }

  log.topics.erase({"battery_status", 0});
  CHECK_FALSE(assemble_features(log, decl.base_subset()).has_value());
}

TEST_CASE("subset declaration json") {
  const SubsetDeclaration decl = baseline_declaration();
  const SubsetDeclaration back = parse_subset_declaration(subset_declaration_json(decl));
  CHECK(back.base == decl.base);
  CHECK(back.name == decl.name);
  CHECK(error_code_of([] { parse_subset_declaration(R"({"base":["a/b"],"colour":1})"); }) == ErrorCode::InvalidConfig);
  CHECK(error_code_of([] { parse_subset_declaration(R"({"base":[]})"); }) == ErrorCode::InvalidConfig);
}
