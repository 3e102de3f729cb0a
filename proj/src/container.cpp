#include "container.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>

#include "uavtype/error.hpp"

namespace uavtype::detail {

std::uint32_t crc32_of(const std::vector<std::uint8_t>& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  // zlib takes uInt lengths; feed large payloads in chunks.
  while (pos < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(chunk));
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> wrap_container(PayloadKind kind, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out(std::begin(kContainerMagic), std::end(kContainerMagic));
  out.reserve(payload.size() + 28);
  append_le<std::uint32_t>(out, kContainerVersion);
  append_le<std::uint32_t>(out, static_cast<std::uint32_t>(kind));
  append_le<std::uint64_t>(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  append_le<std::uint32_t>(out, crc32_of(payload));
  return out;
}

std::vector<std::uint8_t> unwrap_container(const std::vector<std::uint8_t>& file, PayloadKind expected) {
  if (file.size() < 28 || !std::equal(std::begin(kContainerMagic), std::end(kContainerMagic), file.begin()))
    throw Error(ErrorCode::VersionMismatch, "not a uavtype cache file");
  const auto version = read_le<std::uint32_t>(file.data() + 8);
  if (version != kContainerVersion)
    throw Error(ErrorCode::VersionMismatch,
                "cache format version " + std::to_string(version) + ", expected " + std::to_string(kContainerVersion));
  const auto kind = read_le<std::uint32_t>(file.data() + 12);
  if (kind != static_cast<std::uint32_t>(expected))
    throw Error(ErrorCode::VersionMismatch, "cache holds payload kind " + std::to_string(kind));
  const auto length = read_le<std::uint64_t>(file.data() + 16);
  if (length != file.size() - 28) throw Error(ErrorCode::ChecksumFailure, "payload length does not match file size");
  std::vector<std::uint8_t> payload(file.begin() + 24, file.begin() + 24 + static_cast<std::ptrdiff_t>(length));
  if (crc32_of(payload) != read_le<std::uint32_t>(file.data() + 24 + length))
    throw Error(ErrorCode::ChecksumFailure, "payload checksum mismatch");
  return payload;
}

void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_string(Cursor& cur) {
  const auto len = cur.get<std::uint32_t>();
  require(cur, "string length");
  std::string s = cur.get_string(len);
  require(cur, "string body");
  return s;
}

void require(const Cursor& cur, const char* what) {
  if (!cur.ok()) throw Error(ErrorCode::ChecksumFailure, std::string("payload ends inside ") + what);
}

}  // namespace uavtype::detail
