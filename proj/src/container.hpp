#pragma once

// Binary container shared by the flight cache and the sampled-dataset file:
//
//   offset  size  field
//   0       8     magic "UAVTCACH"
//   8       4     u32 format version
//   12      4     u32 payload kind (1 = flight logs, 2 = sampled dataset)
//   16      8     u64 payload length N
//   24      N     payload
//   24+N    4     u32 CRC-32 (zlib polynomial) of the payload
//
// All integers little-endian. See docs/cache_format.md for the payloads.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "byte_io.hpp"

namespace uavtype::detail {

inline constexpr char kContainerMagic[8] = {'U', 'A', 'V', 'T', 'C', 'A', 'C', 'H'};
inline constexpr std::uint32_t kContainerVersion = 1;

enum class PayloadKind : std::uint32_t { FlightLogs = 1, SampledDataset = 2 };

std::uint32_t crc32_of(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> wrap_container(PayloadKind kind, const std::vector<std::uint8_t>& payload);

/// Validates magic, version, kind and checksum and returns the payload.
std::vector<std::uint8_t> unwrap_container(const std::vector<std::uint8_t>& file, PayloadKind expected);

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

inline void append_string(std::vector<std::uint8_t>& out, std::string_view s) {
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  append_bytes(out, s);
}

/// Reads a length-prefixed string; throws on overrun.
std::string read_string(Cursor& cur);

/// Throws ChecksumFailure when the payload ends early.
void require(const Cursor& cur, const char* what);

}  // namespace uavtype::detail
