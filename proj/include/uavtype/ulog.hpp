#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uavtype/types.hpp"

namespace uavtype {

/// File magic of a ULog file; byte 7 is the format version.
inline constexpr std::uint8_t kULogMagic[7] = {0x55, 0x4C, 0x6F, 0x67, 0x01, 0x12, 0x35};
inline constexpr std::size_t kULogHeaderSize = 16;

enum class ScalarKind { I8, U8, I16, U16, I32, U32, I64, U64, F32, F64, Bool, Char };

std::size_t scalar_size(ScalarKind kind);
std::string_view scalar_type_name(ScalarKind kind);  // "int8_t", "float", ...

struct SchemaField {
  std::string name;
  ScalarKind kind = ScalarKind::U8;
  std::uint32_t array_len = 0;  // 0 for scalars
  std::string nested_type;      // non-empty when the field names another format

  bool operator==(const SchemaField&) const = default;
};

/// One FORMAT definition: `message_name:type field;type field;...`.
struct MessageSchema {
  std::string message_name;
  std::vector<SchemaField> fields;

  bool operator==(const MessageSchema&) const = default;
};

/// Parses the payload of an `F` message. Throws MalformedMessage when the
/// text lacks the `name:` prefix or a field declaration is unreadable.
/// Type tokens that are not scalar kinds are kept as nested_type; whether
/// they resolve is checked when a subscription needs them.
MessageSchema parse_format(std::string_view text);

struct Column {
  std::string name;
  std::vector<double> values;

  bool operator==(const Column&) const = default;
};

struct TopicSeries {
  std::string topic_name;
  std::uint8_t instance_id = 0;
  std::vector<std::uint64_t> timestamps;  // microseconds since boot, non-decreasing
  std::vector<Column> columns;            // schema order, each timestamps.size() long
  bool reordered = false;                 // raw stream was non-monotone and got sorted

  const Column* find(std::string_view field) const;
  std::size_t size() const { return timestamps.size(); }

  bool operator==(const TopicSeries&) const = default;
};

struct TopicKey {
  std::string name;
  std::uint8_t instance = 0;

  auto operator<=>(const TopicKey&) const = default;
};

struct FlightLog {
  std::map<TopicKey, TopicSeries> topics;
  VehicleType vehicle_type = VehicleType::Other;
  double duration_s = 0.0;
  std::string source_id;

  const TopicSeries* topic(std::string_view name, std::uint8_t instance = 0) const;

  bool operator==(const FlightLog&) const = default;
};

/// Maps a numeric airframe parameter to a vehicle class.
struct VehicleTypeTable {
  std::string key = "MAV_TYPE";
  std::map<long long, VehicleType> mapping = {
      {2, VehicleType::Quadrotor}, {13, VehicleType::Hexarotor}, {1, VehicleType::FixedWing}};

  static VehicleTypeTable defaults() { return {}; }
};

VehicleType extract_vehicle_type(const std::map<std::string, double>& info_and_params,
                                 const VehicleTypeTable& table = VehicleTypeTable::defaults());

struct ParseOutcome {
  FlightLog log;
  bool truncated = false;                  // input ended inside a message
  std::size_t skipped_data_messages = 0;   // unknown msg_id or short payload
  std::map<std::string, double> info_and_params;
  std::map<std::string, std::string> info_strings;
};

/// Decodes a ULog byte stream. Throws BadMagic and UnknownFieldKind (and
/// MalformedMessage for unreadable definitions); truncation is reported in
/// the outcome rather than thrown.
ParseOutcome parse_ulog(std::span<const std::uint8_t> bytes,
                        const VehicleTypeTable& table = VehicleTypeTable::defaults(),
                        std::string source_id = {});

ParseOutcome parse_ulog_file(const std::filesystem::path& path,
                             const VehicleTypeTable& table = VehicleTypeTable::defaults());

/// Seconds between the earliest first sample and the latest last sample.
/// Throws EmptyLog when no topic has samples.
double flight_duration(const FlightLog& log);

/// Same envelope restricted to the named topics (instance 0 unless the key says otherwise).
double flight_duration(const FlightLog& log, std::span<const TopicKey> topics);

struct SkippedFile {
  std::string source_id;
  std::string reason;
};

struct IngestResult {
  std::vector<FlightLog> logs;
  std::vector<SkippedFile> skipped;
};

/// Parses every `*.ulg` file below `dir` in sorted path order. Files that
/// fail to parse, carry no topics, or map to VehicleType::Other are listed
/// in `skipped` instead of aborting.
IngestResult ingest_directory(const std::filesystem::path& dir,
                              const VehicleTypeTable& table = VehicleTypeTable::defaults());

}  // namespace uavtype
