#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace uavtype {

enum class VehicleType { Quadrotor, Hexarotor, FixedWing, Other };

/// Number of classes the classifier distinguishes.
inline constexpr int kNumClasses = 3;

/// Class indices fix the column order of every table and CSV:
/// 0 = quadrotor, 1 = fixed-wing, 2 = hexarotor.
inline constexpr int kQuadrotorClass = 0;
inline constexpr int kFixedWingClass = 1;
inline constexpr int kHexarotorClass = 2;

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {"quadrotor", "fixed_wing",
                                                                          "hexarotor"};

std::optional<int> class_index(VehicleType type);
VehicleType class_vehicle(int class_idx);

std::string_view to_string(VehicleType type);
std::optional<VehicleType> vehicle_type_from_string(std::string_view name);

}  // namespace uavtype
