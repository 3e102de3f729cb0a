#include "uavtype/features.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <set>

#include "json.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

namespace {

std::string_view derivation_name(Derivation d) {
  switch (d) {
    case Derivation::Roll: return "roll";
    case Derivation::Pitch: return "pitch";
    case Derivation::Yaw: return "yaw";
    case Derivation::None: break;
  }
  return "";
}

const TopicSeries* topic_of(const FlightLog& log, const std::string& topic) { return log.topic(topic, 0); }

std::optional<FeatureSeries> raw_series(const TopicSeries& series, const std::string& field) {
  const Column* col = series.find(field);
  if (col == nullptr) return std::nullopt;
  FeatureSeries out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (!std::isfinite(col->values[i])) continue;
    out.timestamps.push_back(series.timestamps[i]);
    out.values.push_back(col->values[i]);
  }
  if (out.values.empty()) return std::nullopt;
  return out;
}

std::optional<FeatureSeries> euler_series(const TopicSeries& series, const std::string& field, Derivation which) {
  const Column* q[4];
  for (int i = 0; i < 4; ++i) {
    q[i] = series.find(fmt::format("{}[{}]", field, i));
    if (q[i] == nullptr) return std::nullopt;
  }
  FeatureSeries out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double w = q[0]->values[i], x = q[1]->values[i], y = q[2]->values[i], z = q[3]->values[i];
    if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) continue;
    if (w == 0.0 && x == 0.0 && y == 0.0 && z == 0.0) continue;  // uninitialised attitude
    const EulerAngles e = quaternion_to_euler(w, x, y, z);
    out.timestamps.push_back(series.timestamps[i]);
    out.values.push_back(which == Derivation::Roll ? e.roll : which == Derivation::Pitch ? e.pitch : e.yaw);
  }
  if (out.values.empty()) return std::nullopt;
  return out;
}

std::vector<FeatureKey> parse_key_list(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, std::string(what) + " must be an array of strings");
  std::vector<FeatureKey> keys;
  for (const auto& item : j) {
    if (!item.is_string()) throw Error(ErrorCode::InvalidConfig, std::string(what) + " entries must be strings");
    keys.push_back(FeatureKey::parse(item.get<std::string>()));
  }
  return keys;
}

}  // namespace

std::string FeatureKey::to_string() const {
  std::string s = topic + "/" + field;
  if (derived != Derivation::None) s += ":" + std::string(derivation_name(derived));
  return s;
}

FeatureKey FeatureKey::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == text.size())
    throw Error(ErrorCode::InvalidConfig, "feature key '" + std::string(text) + "' is not topic/field");
  FeatureKey key;
  key.topic = std::string(text.substr(0, slash));
  std::string_view field = text.substr(slash + 1);
  if (const auto colon = field.find(':'); colon != std::string_view::npos) {
    const std::string_view tag = field.substr(colon + 1);
    if (tag == "roll") key.derived = Derivation::Roll;
    else if (tag == "pitch") key.derived = Derivation::Pitch;
    else if (tag == "yaw") key.derived = Derivation::Yaw;
    else throw Error(ErrorCode::InvalidConfig, "unknown derivation '" + std::string(tag) + "'");
    field = field.substr(0, colon);
  }
  if (field.empty()) throw Error(ErrorCode::InvalidConfig, "feature key '" + std::string(text) + "' has no field");
  key.field = std::string(field);
  return key;
}

CoverageTable compute_coverage(std::span<const FlightLog> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "coverage needs at least one log");
  std::map<FeatureKey, std::size_t> field_counts;
  std::map<std::string, std::size_t> topic_counts;
  for (const FlightLog& log : corpus) {
    for (const auto& [key, series] : log.topics) {
      if (key.instance != 0) continue;
      ++topic_counts[key.name];
      for (const Column& col : series.columns) ++field_counts[FeatureKey{key.name, col.name}];
    }
  }
  CoverageTable table;
  table.corpus_size = corpus.size();
  const auto n = static_cast<double>(corpus.size());
  for (const auto& [key, count] : field_counts) table.fraction[key] = static_cast<double>(count) / n;
  for (const auto& [topic, count] : topic_counts) table.topic_fraction[topic] = static_cast<double>(count) / n;
  return table;
}

std::vector<FeatureKey> prune_by_coverage(const CoverageTable& table, double threshold) {
  std::vector<FeatureKey> kept;
  for (const auto& [key, fraction] : table.fraction)
    if (fraction >= threshold) kept.push_back(key);
  return kept;  // std::map iteration is already sorted
}

std::vector<FeatureSubset> random_subsets(std::span<const FeatureKey> pruned, const FeatureSubset& base, std::size_t n,
                                          std::size_t k, std::span<const FeatureKey> exclusions, std::uint64_t seed) {
  const std::set<FeatureKey> blocked = [&] {
    std::set<FeatureKey> s(exclusions.begin(), exclusions.end());
    s.insert(base.keys.begin(), base.keys.end());
    return s;
  }();
  std::vector<FeatureKey> pool;
  for (const FeatureKey& key : std::set<FeatureKey>(pruned.begin(), pruned.end()))
    if (!blocked.contains(key)) pool.push_back(key);
  if (n > pool.size())
    throw Error(ErrorCode::InsufficientFeatures,
                fmt::format("asked for {} random features but only {} are eligible", n, pool.size()));

  std::mt19937_64 rng(seed);
  std::vector<FeatureSubset> subsets;
  subsets.reserve(k);
  for (std::size_t s = 0; s < k; ++s) {
    std::vector<FeatureKey> draw = pool;
    // partial Fisher-Yates: the first n slots hold the sample
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, draw.size() - 1);
      std::swap(draw[i], draw[pick(rng)]);
    }
    draw.resize(n);
    std::sort(draw.begin(), draw.end());

    FeatureSubset subset;
    subset.name = n == 0 ? base.name : fmt::format("{}+{}#{}", base.name, n, s);
    subset.n_random = n;
    subset.keys = base.keys;
    subset.keys.insert(subset.keys.end(), draw.begin(), draw.end());
    subsets.push_back(std::move(subset));
  }
  return subsets;
}

EulerAngles quaternion_to_euler(double w, double x, double y, double z) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroQuaternion, "quaternion has zero norm");
  w /= norm;
  x /= norm;
  y /= norm;
  z /= norm;
  EulerAngles e;
  e.roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  e.pitch = std::asin(std::clamp(2.0 * (w * y - z * x), -1.0, 1.0));
  e.yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return e;
}

std::optional<std::vector<FeatureSeries>> assemble_features(const FlightLog& log, const FeatureSubset& subset) {
  std::vector<FeatureSeries> out;
  out.reserve(subset.keys.size());
  for (const FeatureKey& key : subset.keys) {
    const TopicSeries* series = topic_of(log, key.topic);
    if (series == nullptr) return std::nullopt;
    auto s = key.derived == Derivation::None ? raw_series(*series, key.field)
                                             : euler_series(*series, key.field, key.derived);
    if (!s) return std::nullopt;
    out.push_back(std::move(*s));
  }
  return out;
}

SubsetDeclaration baseline_declaration() {
  SubsetDeclaration decl;
  decl.name = "baseline";
  for (const char* text : {"vehicle_local_position/x", "vehicle_local_position/y", "vehicle_local_position/z",
                           "vehicle_attitude/q:roll", "vehicle_attitude/q:pitch", "vehicle_attitude/q:yaw",
                           "actuator_controls_0/control[3]", "vehicle_global_position/alt",
                           "battery_status/temperature"})
    decl.base.push_back(FeatureKey::parse(text));
  return decl;
}

SubsetDeclaration parse_subset_declaration(std::string_view json_text) {
  static const std::set<std::string> allowed = {"name", "base", "exclusions", "n_random", "k", "seed"};
  try {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "feature declaration must be an object");
    for (const auto& [key, value] : j.items())
      if (!allowed.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown feature declaration key '" + key + "'");
    SubsetDeclaration decl;
    decl.name = j.value("name", std::string("subset"));
    decl.base = parse_key_list(j.at("base"), "base");
    if (j.contains("exclusions")) decl.exclusions = parse_key_list(j["exclusions"], "exclusions");
    decl.n_random = j.value("n_random", std::size_t{0});
    decl.k = j.value("k", std::size_t{1});
    decl.seed = j.value("seed", std::uint64_t{0});
    if (decl.base.empty()) throw Error(ErrorCode::InvalidConfig, "feature declaration needs base keys");
    if (decl.k == 0) throw Error(ErrorCode::InvalidConfig, "feature declaration k must be >= 1");
    return decl;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("feature declaration: ") + e.what());
  }
}

std::string subset_declaration_json(const SubsetDeclaration& decl) {
  nlohmann::json j;
  j["name"] = decl.name;
  j["base"] = nlohmann::json::array();
  for (const FeatureKey& key : decl.base) j["base"].push_back(key.to_string());
  j["exclusions"] = nlohmann::json::array();
  for (const FeatureKey& key : decl.exclusions) j["exclusions"].push_back(key.to_string());
  j["n_random"] = decl.n_random;
  j["k"] = decl.k;
  j["seed"] = decl.seed;
  return j.dump(2);
}

SubsetDeclaration read_subset_declaration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_subset_declaration(text);
}

std::string coverage_csv(const CoverageTable& table) {
  std::string out = "feature,fraction\n";
  for (const auto& [key, fraction] : table.fraction) out += fmt::format("{},{}\n", key.to_string(), fraction);
  return out;
}

}  // namespace uavtype
