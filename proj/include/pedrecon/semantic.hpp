#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace pedrecon {

enum class SemanticClass : std::uint8_t {
  road,
  sidewalk,
  building,
  wall,
  fence,
  pole,
  sign,
  vegetation,
  static_object,
  person,
  rider,
  car,
  bike,
};

inline constexpr int kClassCount = 13;

std::string_view class_name(SemanticClass c);
std::optional<SemanticClass> class_from_name(std::string_view name);
std::optional<SemanticClass> class_from_id(int id);

/// Independently moving classes: person, rider, car, bike.
constexpr bool is_dynamic(SemanticClass c) {
  return c == SemanticClass::person || c == SemanticClass::rider || c == SemanticClass::car ||
         c == SemanticClass::bike;
}

constexpr int class_id(SemanticClass c) { return static_cast<int>(c); }

}  // namespace pedrecon
