#include "uavtype/cache.hpp"

#include "container.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

using detail::append_le;
using detail::append_string;
using detail::Cursor;
using detail::require;

std::vector<std::uint8_t> encode_cache(const std::vector<FlightLog>& logs) {
  if (logs.empty()) throw Error(ErrorCode::EmptyCorpus, "refusing to write an empty cache");
  std::vector<std::uint8_t> payload;
  append_le<std::uint32_t>(payload, static_cast<std::uint32_t>(logs.size()));
  for (const FlightLog& log : logs) {
    append_string(payload, log.source_id);
    append_le<std::uint8_t>(payload, static_cast<std::uint8_t>(log.vehicle_type));
    append_le<double>(payload, log.duration_s);
    append_le<std::uint32_t>(payload, static_cast<std::uint32_t>(log.topics.size()));
    for (const auto& [key, series] : log.topics) {
      append_string(payload, series.topic_name);
      append_le<std::uint8_t>(payload, series.instance_id);
      append_le<std::uint8_t>(payload, series.reordered ? 1 : 0);
      append_le<std::uint64_t>(payload, series.timestamps.size());
      append_le<std::uint32_t>(payload, static_cast<std::uint32_t>(series.columns.size()));
      for (std::uint64_t t : series.timestamps) append_le<std::uint64_t>(payload, t);
      for (const Column& col : series.columns) {
        append_string(payload, col.name);
        for (double v : col.values) append_le<double>(payload, v);
      }
    }
  }
  return detail::wrap_container(detail::PayloadKind::FlightLogs, payload);
}

std::vector<FlightLog> decode_cache(const std::vector<std::uint8_t>& bytes) {
  const std::vector<std::uint8_t> payload = detail::unwrap_container(bytes, detail::PayloadKind::FlightLogs);
  Cursor cur(payload.data(), payload.size());
  const auto n_logs = cur.get<std::uint32_t>();
  require(cur, "log count");
  std::vector<FlightLog> logs;
  for (std::uint32_t i = 0; i < n_logs; ++i) {
    FlightLog log;
    log.source_id = detail::read_string(cur);
    const auto type = cur.get<std::uint8_t>();
    if (type > static_cast<std::uint8_t>(VehicleType::Other))
      throw Error(ErrorCode::ChecksumFailure, "invalid vehicle type tag");
    log.vehicle_type = static_cast<VehicleType>(type);
    log.duration_s = cur.get<double>();
    const auto n_topics = cur.get<std::uint32_t>();
    require(cur, "log header");
    for (std::uint32_t t = 0; t < n_topics; ++t) {
      TopicSeries series;
      series.topic_name = detail::read_string(cur);
      series.instance_id = cur.get<std::uint8_t>();
      series.reordered = cur.get<std::uint8_t>() != 0;
      const auto n = cur.get<std::uint64_t>();
      const auto n_cols = cur.get<std::uint32_t>();
      require(cur, "topic header");
      if (n > cur.remaining() / 8) throw Error(ErrorCode::ChecksumFailure, "sample count exceeds payload");
      series.timestamps.resize(n);
      for (auto& ts : series.timestamps) ts = cur.get<std::uint64_t>();
      for (std::uint32_t c = 0; c < n_cols; ++c) {
        Column col;
        col.name = detail::read_string(cur);
        if (n > cur.remaining() / 8) throw Error(ErrorCode::ChecksumFailure, "column exceeds payload");
        col.values.resize(n);
        for (double& v : col.values) v = cur.get<double>();
        series.columns.push_back(std::move(col));
      }
      require(cur, "topic data");
      TopicKey key{series.topic_name, series.instance_id};
      log.topics.emplace(std::move(key), std::move(series));
    }
    logs.push_back(std::move(log));
  }
  if (cur.remaining() != 0) throw Error(ErrorCode::ChecksumFailure, "trailing bytes after last log");
  return logs;
}

void write_cache(const std::vector<FlightLog>& logs, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_cache(logs));
}

std::vector<FlightLog> read_cache(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingCache, path.string() + " does not exist");
  return decode_cache(detail::read_file(path));
}

}  // namespace uavtype
