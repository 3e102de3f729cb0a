#pragma once

#include <filesystem>
#include <vector>

#include "uavtype/ulog.hpp"

namespace uavtype {

/// Columnar flight cache. Values are stored as f64, so float32 log fields
/// come back widened but otherwise exact. Layout: docs/cache_format.md.
void write_cache(const std::vector<FlightLog>& logs, const std::filesystem::path& path);
std::vector<FlightLog> read_cache(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_cache(const std::vector<FlightLog>& logs);
/// Throws VersionMismatch or ChecksumFailure.
std::vector<FlightLog> decode_cache(const std::vector<std::uint8_t>& bytes);

}  // namespace uavtype
