#include "uavtype/ulog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "byte_io.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

namespace {

// A D message payload is at most 65535 bytes, two of which carry the msg_id.
constexpr std::size_t kMaxMessageBytes = 65535;

struct KindName {
  std::string_view name;
  ScalarKind kind;
};

constexpr KindName kKindNames[] = {
    {"int8_t", ScalarKind::I8},     {"uint8_t", ScalarKind::U8},   {"int16_t", ScalarKind::I16},
    {"uint16_t", ScalarKind::U16},  {"int32_t", ScalarKind::I32},  {"uint32_t", ScalarKind::U32},
    {"int64_t", ScalarKind::I64},   {"uint64_t", ScalarKind::U64}, {"float", ScalarKind::F32},
    {"double", ScalarKind::F64},    {"bool", ScalarKind::Bool},    {"char", ScalarKind::Char},
};

std::optional<ScalarKind> kind_from_name(std::string_view name) {
  for (const auto& kn : kKindNames)
    if (kn.name == name) return kn.kind;
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\0'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\0'))
    s.remove_suffix(1);
  return s;
}

struct TypeToken {
  std::string type;
  std::uint32_t array_len = 0;
};

// "type" or "type[len]"
TypeToken parse_type_token(std::string_view token) {
  TypeToken out;
  const auto bracket = token.find('[');
  if (bracket == std::string_view::npos) {
    out.type = std::string(token);
    return out;
  }
  if (token.back() != ']' || bracket == 0)
    throw Error(ErrorCode::MalformedMessage, "bad array declaration '" + std::string(token) + "'");
  const std::string_view digits = token.substr(bracket + 1, token.size() - bracket - 2);
  unsigned long len = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), len);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || len == 0 || len > kMaxMessageBytes)
    throw Error(ErrorCode::MalformedMessage, "bad array length in '" + std::string(token) + "'");
  out.type = std::string(token.substr(0, bracket));
  out.array_len = static_cast<std::uint32_t>(len);
  return out;
}

double decode_scalar(ScalarKind kind, const std::uint8_t* p) {
  using detail::read_le;
  switch (kind) {
    case ScalarKind::I8: return read_le<std::int8_t>(p);
    case ScalarKind::U8: return read_le<std::uint8_t>(p);
    case ScalarKind::I16: return read_le<std::int16_t>(p);
    case ScalarKind::U16: return read_le<std::uint16_t>(p);
    case ScalarKind::I32: return read_le<std::int32_t>(p);
    case ScalarKind::U32: return read_le<std::uint32_t>(p);
    case ScalarKind::I64: return static_cast<double>(read_le<std::int64_t>(p));
    case ScalarKind::U64: return static_cast<double>(read_le<std::uint64_t>(p));
    case ScalarKind::F32: return static_cast<double>(read_le<float>(p));
    case ScalarKind::F64: return read_le<double>(p);
    case ScalarKind::Bool: return p[0] != 0 ? 1.0 : 0.0;
    case ScalarKind::Char: return p[0];
  }
  return 0.0;
}

struct FlatField {
  std::string name;
  ScalarKind kind;
  std::size_t offset;
};

// Flattened decode plan for one format: columns in schema order plus the
// offset of the top-level u64 `timestamp`.
struct DecodePlan {
  std::vector<FlatField> columns;
  std::optional<std::size_t> timestamp_offset;
  std::size_t size = 0;
};

class PlanBuilder {
 public:
  explicit PlanBuilder(const std::map<std::string, MessageSchema>& formats) : formats_(formats) {}

  DecodePlan build(const std::string& message_name) {
    DecodePlan plan;
    std::set<std::string> visiting;
    append(message_name, "", true, plan, visiting);
    return plan;
  }

 private:
  void append(const std::string& message_name, const std::string& prefix, bool top_level, DecodePlan& plan,
              std::set<std::string>& visiting) {
    const auto it = formats_.find(message_name);
    if (it == formats_.end())
      throw Error(ErrorCode::UnknownFieldKind, "type '" + message_name + "' is neither scalar nor a defined format");
    if (!visiting.insert(message_name).second)
      throw Error(ErrorCode::MalformedMessage, "recursive format '" + message_name + "'");

    for (const SchemaField& field : it->second.fields) {
      const std::uint32_t count = field.array_len == 0 ? 1 : field.array_len;
      const bool padding = field.name.rfind("_padding", 0) == 0;
      for (std::uint32_t i = 0; i < count; ++i) {
        if (++steps_ > kMaxPlanSteps)
          throw Error(ErrorCode::MalformedMessage, "format '" + message_name + "' expands too far");
        std::string name = prefix + field.name;
        if (field.array_len != 0) name += "[" + std::to_string(i) + "]";
        if (!field.nested_type.empty()) {
          append(field.nested_type, name + ".", false, plan, visiting);
          continue;
        }
        const std::size_t width = scalar_size(field.kind);
        if (top_level && !plan.timestamp_offset && field.name == "timestamp" && field.kind == ScalarKind::U64 &&
            field.array_len == 0) {
          plan.timestamp_offset = plan.size;
        } else if (!padding && field.kind != ScalarKind::Char) {
          plan.columns.push_back({std::move(name), field.kind, plan.size});
        }
        plan.size += width;
        if (plan.size > kMaxMessageBytes)
          throw Error(ErrorCode::MalformedMessage, "format '" + message_name + "' exceeds the message size limit");
      }
    }
    visiting.erase(message_name);
  }

  static constexpr std::size_t kMaxPlanSteps = std::size_t{1} << 20;

  const std::map<std::string, MessageSchema>& formats_;
  std::size_t steps_ = 0;
};

struct TopicBuilder {
  TopicSeries series;
};

struct Subscription {
  DecodePlan plan;
  TopicBuilder* topic = nullptr;
};

struct KeyDecl {
  std::string type;
  std::uint32_t array_len = 0;
  std::string name;
};

std::optional<KeyDecl> parse_key(std::string_view key) {
  key = trim(key);
  const auto space = key.find(' ');
  if (space == std::string_view::npos) return std::nullopt;
  KeyDecl decl;
  try {
    TypeToken tok = parse_type_token(key.substr(0, space));
    decl.type = std::move(tok.type);
    decl.array_len = tok.array_len;
  } catch (const Error&) {
    return std::nullopt;
  }
  decl.name = std::string(trim(key.substr(space + 1)));
  return decl;
}

// Decodes the value part of an I/M/P message into either a number or a string.
void store_key_value(std::string_view key, const std::uint8_t* value, std::size_t value_len, ParseOutcome& out) {
  const auto decl = parse_key(key);
  if (!decl) return;
  const auto kind = kind_from_name(decl->type);
  if (!kind) return;
  if (*kind == ScalarKind::Char) {
    out.info_strings[decl->name] = std::string(reinterpret_cast<const char*>(value), value_len);
    return;
  }
  if (decl->array_len != 0 || value_len < scalar_size(*kind)) return;
  out.info_and_params[decl->name] = decode_scalar(*kind, value);
}

void sort_if_needed(TopicSeries& s) {
  if (std::is_sorted(s.timestamps.begin(), s.timestamps.end())) return;
  std::vector<std::size_t> order(s.timestamps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s.timestamps[a] < s.timestamps[b]; });
  auto permute = [&](auto& v) {
    std::remove_reference_t<decltype(v)> sorted;
    sorted.reserve(v.size());
    for (std::size_t idx : order) sorted.push_back(v[idx]);
    v = std::move(sorted);
  };
  permute(s.timestamps);
  for (Column& c : s.columns) permute(c.values);
  s.reordered = true;
}

}  // namespace

std::size_t scalar_size(ScalarKind kind) {
  switch (kind) {
    case ScalarKind::I8:
    case ScalarKind::U8:
    case ScalarKind::Bool:
    case ScalarKind::Char: return 1;
    case ScalarKind::I16:
    case ScalarKind::U16: return 2;
    case ScalarKind::I32:
    case ScalarKind::U32:
    case ScalarKind::F32: return 4;
    case ScalarKind::I64:
    case ScalarKind::U64:
    case ScalarKind::F64: return 8;
  }
  return 1;
}

std::string_view scalar_type_name(ScalarKind kind) {
  for (const auto& kn : kKindNames)
    if (kn.kind == kind) return kn.name;
  return "uint8_t";
}

MessageSchema parse_format(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0)
    throw Error(ErrorCode::MalformedMessage, "format definition without 'name:' prefix");
  MessageSchema schema;
  schema.message_name = std::string(trim(text.substr(0, colon)));
  if (schema.message_name.empty()) throw Error(ErrorCode::MalformedMessage, "empty format name");

  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const std::string_view decl = trim(rest.substr(0, semi));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (decl.empty()) continue;

    const auto space = decl.find(' ');
    if (space == std::string_view::npos)
      throw Error(ErrorCode::MalformedMessage, "field declaration '" + std::string(decl) + "' has no name");
    TypeToken tok = parse_type_token(decl.substr(0, space));
    SchemaField field;
    field.name = std::string(trim(decl.substr(space + 1)));
    if (field.name.empty() || tok.type.empty())
      throw Error(ErrorCode::MalformedMessage, "field declaration '" + std::string(decl) + "' is incomplete");
    field.array_len = tok.array_len;
    if (auto kind = kind_from_name(tok.type)) {
      field.kind = *kind;
    } else {
      field.nested_type = std::move(tok.type);
    }
    schema.fields.push_back(std::move(field));
  }
  return schema;
}

const Column* TopicSeries::find(std::string_view field) const {
  for (const Column& c : columns)
    if (c.name == field) return &c;
  return nullptr;
}

const TopicSeries* FlightLog::topic(std::string_view name, std::uint8_t instance) const {
  const auto it = topics.find(TopicKey{std::string(name), instance});
  return it == topics.end() ? nullptr : &it->second;
}

VehicleType extract_vehicle_type(const std::map<std::string, double>& info_and_params, const VehicleTypeTable& table) {
  const auto it = info_and_params.find(table.key);
  if (it == info_and_params.end() || !std::isfinite(it->second)) return VehicleType::Other;
  const auto mapped = table.mapping.find(std::llround(it->second));
  return mapped == table.mapping.end() ? VehicleType::Other : mapped->second;
}

ParseOutcome parse_ulog(std::span<const std::uint8_t> bytes, const VehicleTypeTable& table, std::string source_id) {
  using detail::read_le;
  ParseOutcome out;
  out.log.source_id = std::move(source_id);

  if (bytes.size() < sizeof(kULogMagic) || !std::equal(std::begin(kULogMagic), std::end(kULogMagic), bytes.begin()))
    throw Error(ErrorCode::BadMagic, "input does not start with the ULog magic");
  if (bytes.size() < kULogHeaderSize) {
    out.truncated = true;
    return out;
  }

  std::map<std::string, MessageSchema> formats;
  std::map<std::uint16_t, Subscription> subscriptions;
  std::map<TopicKey, TopicBuilder> topics;

  std::size_t pos = kULogHeaderSize;
  const std::uint8_t* data = bytes.data();
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 3) {
      out.truncated = true;
      break;
    }
    const std::uint16_t msg_size = read_le<std::uint16_t>(data + pos);
    const char msg_type = static_cast<char>(data[pos + 2]);
    if (bytes.size() - pos - 3 < msg_size) {
      out.truncated = true;
      break;
    }
    const std::uint8_t* payload = data + pos + 3;
    pos += 3 + std::size_t{msg_size};

    switch (msg_type) {
      case 'F': {
        MessageSchema schema = parse_format({reinterpret_cast<const char*>(payload), msg_size});
        std::string name = schema.message_name;
        formats[name] = std::move(schema);
        break;
      }
      case 'I':
      case 'P': {
        if (msg_size < 1) break;
        const std::size_t key_len = payload[0];
        if (key_len > msg_size - 1u) break;
        store_key_value({reinterpret_cast<const char*>(payload + 1), key_len}, payload + 1 + key_len,
                        msg_size - 1 - key_len, out);
        break;
      }
      case 'M': {
        if (msg_size < 2) break;
        const std::size_t key_len = payload[1];
        if (key_len > msg_size - 2u) break;
        const auto decl = parse_key({reinterpret_cast<const char*>(payload + 2), key_len});
        // Multi-part info is only kept when it is a single string chunk.
        if (decl && payload[0] == 0 && decl->type == "char" && !out.info_strings.contains(decl->name))
          out.info_strings[decl->name] =
              std::string(reinterpret_cast<const char*>(payload + 2 + key_len), msg_size - 2 - key_len);
        break;
      }
      case 'A': {
        if (msg_size < 4) throw Error(ErrorCode::MalformedMessage, "subscription message too short");
        const std::uint8_t multi_id = payload[0];
        const std::uint16_t msg_id = read_le<std::uint16_t>(payload + 1);
        const std::string name(trim({reinterpret_cast<const char*>(payload + 3), msg_size - 3u}));
        if (!formats.contains(name))
          throw Error(ErrorCode::MalformedMessage, "subscription to undefined format '" + name + "'");
        Subscription sub;
        sub.plan = PlanBuilder(formats).build(name);
        TopicKey key{name, multi_id};
        auto [it, inserted] = topics.try_emplace(key);
        TopicSeries& series = it->second.series;
        if (inserted) {
          series.topic_name = name;
          series.instance_id = multi_id;
          for (const FlatField& f : sub.plan.columns) series.columns.push_back({f.name, {}});
        } else {
          const bool same = series.columns.size() == sub.plan.columns.size() &&
                            std::equal(series.columns.begin(), series.columns.end(), sub.plan.columns.begin(),
                                       [](const Column& c, const FlatField& f) { return c.name == f.name; });
          if (!same) throw Error(ErrorCode::MalformedMessage, "conflicting layouts for topic '" + name + "'");
        }
        sub.topic = &it->second;
        subscriptions[msg_id] = std::move(sub);
        break;
      }
      case 'R': {
        if (msg_size >= 2) subscriptions.erase(read_le<std::uint16_t>(payload));
        break;
      }
      case 'D': {
        if (msg_size < 2) {
          ++out.skipped_data_messages;
          break;
        }
        const auto it = subscriptions.find(read_le<std::uint16_t>(payload));
        if (it == subscriptions.end() || !it->second.plan.timestamp_offset ||
            msg_size - 2u < it->second.plan.size) {
          ++out.skipped_data_messages;
          break;
        }
        const DecodePlan& plan = it->second.plan;
        const std::uint8_t* record = payload + 2;
        TopicSeries& series = it->second.topic->series;
        series.timestamps.push_back(read_le<std::uint64_t>(record + *plan.timestamp_offset));
        for (std::size_t c = 0; c < plan.columns.size(); ++c)
          series.columns[c].values.push_back(decode_scalar(plan.columns[c].kind, record + plan.columns[c].offset));
        break;
      }
      default:
        // B flag bits, L/C logged strings, S sync, O dropout, Q defaults and
        // any message type this reader does not know are skipped.
        break;
    }
  }

  // Every format must resolve even if nothing subscribed to it.
  for (const auto& [name, schema] : formats) PlanBuilder(formats).build(name);

  for (auto& [key, builder] : topics) {
    if (builder.series.timestamps.empty()) continue;
    sort_if_needed(builder.series);
    out.log.topics.emplace(key, std::move(builder.series));
  }
  out.log.vehicle_type = extract_vehicle_type(out.info_and_params, table);
  out.log.duration_s = out.log.topics.empty() ? 0.0 : flight_duration(out.log);
  return out;
}

ParseOutcome parse_ulog_file(const std::filesystem::path& path, const VehicleTypeTable& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_ulog(bytes, table, path.filename().string());
}

double flight_duration(const FlightLog& log) {
  std::uint64_t t_min = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t t_max = 0;
  bool any = false;
  for (const auto& [key, s] : log.topics) {
    if (s.timestamps.empty()) continue;
    any = true;
    t_min = std::min(t_min, s.timestamps.front());
    t_max = std::max(t_max, s.timestamps.back());
  }
  if (!any) throw Error(ErrorCode::EmptyLog, "log '" + log.source_id + "' has no samples");
  return static_cast<double>(t_max - t_min) / 1e6;
}

double flight_duration(const FlightLog& log, std::span<const TopicKey> keys) {
  std::uint64_t t_min = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t t_max = 0;
  bool any = false;
  for (const TopicKey& key : keys) {
    const auto it = log.topics.find(key);
    if (it == log.topics.end() || it->second.timestamps.empty()) continue;
    any = true;
    t_min = std::min(t_min, it->second.timestamps.front());
    t_max = std::max(t_max, it->second.timestamps.back());
  }
  if (!any) throw Error(ErrorCode::EmptyLog, "none of the selected topics has samples");
  return static_cast<double>(t_max - t_min) / 1e6;
}

IngestResult ingest_directory(const std::filesystem::path& dir, const VehicleTypeTable& table) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ulg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  IngestResult result;
  for (const fs::path& file : files) {
    const std::string id = fs::relative(file, dir).generic_string();
    try {
      ParseOutcome parsed = parse_ulog_file(file, table);
      parsed.log.source_id = id;
      if (parsed.log.topics.empty()) {
        result.skipped.push_back({id, "no data topics"});
      } else if (parsed.log.vehicle_type == VehicleType::Other) {
        result.skipped.push_back({id, "vehicle type not quadrotor/hexarotor/fixed-wing"});
      } else {
        result.logs.push_back(std::move(parsed.log));
      }
    } catch (const Error& e) {
      result.skipped.push_back({id, e.what()});
    }
  }
  return result;
}

}  // namespace uavtype
