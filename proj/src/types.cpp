#include "uavtype/error.hpp"
#include "uavtype/types.hpp"

namespace uavtype {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedMessage: return "TruncatedMessage";
    case ErrorCode::UnknownFieldKind: return "UnknownFieldKind";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::ChecksumFailure: return "ChecksumFailure";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::InsufficientFeatures: return "InsufficientFeatures";
    case ErrorCode::ZeroQuaternion: return "ZeroQuaternion";
    case ErrorCode::AllEmpty: return "AllEmpty";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ClassSmallerThanK: return "ClassSmallerThanK";
    case ErrorCode::ContaminatedTestFold: return "ContaminatedTestFold";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::CacheMismatch: return "CacheMismatch";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewFolds: return "TooFewFolds";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::UnsupportedFieldKind: return "UnsupportedFieldKind";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NoParsableLogs: return "NoParsableLogs";
    case ErrorCode::MissingCache: return "MissingCache";
  }
  return "Unknown";
}

std::optional<int> class_index(VehicleType type) {
  switch (type) {
    case VehicleType::Quadrotor: return kQuadrotorClass;
    case VehicleType::FixedWing: return kFixedWingClass;
    case VehicleType::Hexarotor: return kHexarotorClass;
    case VehicleType::Other: return std::nullopt;
  }
  return std::nullopt;
}

VehicleType class_vehicle(int class_idx) {
  switch (class_idx) {
    case kQuadrotorClass: return VehicleType::Quadrotor;
    case kFixedWingClass: return VehicleType::FixedWing;
    case kHexarotorClass: return VehicleType::Hexarotor;
    default: return VehicleType::Other;
  }
}

std::string_view to_string(VehicleType type) {
  switch (type) {
    case VehicleType::Quadrotor: return "quadrotor";
    case VehicleType::Hexarotor: return "hexarotor";
    case VehicleType::FixedWing: return "fixed_wing";
    case VehicleType::Other: return "other";
  }
  return "other";
}

std::optional<VehicleType> vehicle_type_from_string(std::string_view name) {
  if (name == "quadrotor") return VehicleType::Quadrotor;
  if (name == "hexarotor") return VehicleType::Hexarotor;
  if (name == "fixed_wing" || name == "fixedwing") return VehicleType::FixedWing;
  if (name == "other") return VehicleType::Other;
  return std::nullopt;
}

}  // namespace uavtype
