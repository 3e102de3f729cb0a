#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uavtype/ulog.hpp"

namespace uavtype {

enum class Derivation { None, Roll, Pitch, Yaw };

/// A column of an instance: `topic/field`, or `topic/field:roll|pitch|yaw`
/// for Euler angles derived from the quaternion array `field[0..3]`.
struct FeatureKey {
  std::string topic;
  std::string field;
  Derivation derived = Derivation::None;

  auto operator<=>(const FeatureKey&) const = default;
  bool operator==(const FeatureKey&) const = default;

  std::string to_string() const;
  /// Throws InvalidConfig on malformed text.
  static FeatureKey parse(std::string_view text);
};

struct CoverageTable {
  std::map<FeatureKey, double> fraction;       // raw (topic, field) keys only
  std::map<std::string, double> topic_fraction;
  std::size_t corpus_size = 0;
};

struct FeatureSubset {
  std::string name;
  std::vector<FeatureKey> keys;  // column order of every instance
  std::size_t n_random = 0;
};

/// Fraction of logs whose instance-0 topic carries each field. Throws EmptyCorpus.
CoverageTable compute_coverage(std::span<const FlightLog> corpus);

/// Keys with fraction >= threshold, lexicographically sorted.
std::vector<FeatureKey> prune_by_coverage(const CoverageTable& table, double threshold = 0.6);

/// `k` subsets of `base` plus `n` keys drawn without replacement from
/// pruned \ base \ exclusions. Sampled keys follow the base keys in sorted
/// order. Throws InsufficientFeatures when the pool is smaller than `n`.
std::vector<FeatureSubset> random_subsets(std::span<const FeatureKey> pruned, const FeatureSubset& base, std::size_t n,
                                          std::size_t k, std::span<const FeatureKey> exclusions, std::uint64_t seed);

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Aerospace ZYX angles of the rotation described by (w, x, y, z).
/// The quaternion is renormalised; throws ZeroQuaternion for a zero norm.
EulerAngles quaternion_to_euler(double w, double x, double y, double z);

struct FeatureSeries {
  std::vector<std::uint64_t> timestamps;
  std::vector<double> values;
};

/// One finite-valued series per key, in subset order; std::nullopt when any
/// key is absent from the log or has no finite samples.
std::optional<std::vector<FeatureSeries>> assemble_features(const FlightLog& log, const FeatureSubset& subset);

/// Human-editable subset declaration (JSON), see configs/baseline_features.json.
struct SubsetDeclaration {
  std::string name;
  std::vector<FeatureKey> base;
  std::vector<FeatureKey> exclusions;
  std::size_t n_random = 0;
  std::size_t k = 1;
  std::uint64_t seed = 0;

  FeatureSubset base_subset() const { return {name, base, 0}; }
};

/// The nine features the experiments settled on, mapped onto PX4 topics.
SubsetDeclaration baseline_declaration();

/// Throws InvalidConfig on unknown keys or malformed feature keys.
SubsetDeclaration parse_subset_declaration(std::string_view json_text);
std::string subset_declaration_json(const SubsetDeclaration& decl);
SubsetDeclaration read_subset_declaration(const std::filesystem::path& path);
std::string coverage_csv(const CoverageTable& table);

}  // namespace uavtype
