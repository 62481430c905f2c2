#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include "hiot/error.hpp"
#include "json.hpp"

namespace hiot::detail {

inline void require_object(const nlohmann::json& j, std::string_view context) {
  if (!j.is_object()) {
    throw Error(ErrorKind::Config, std::string(context) + " must be a JSON object");
  }
}

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> known,
                                std::string_view context) {
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (auto k : known) found = found || key == k;
    if (!found) {
      throw Error(ErrorKind::Config, "unknown key '" + key + "' in " + std::string(context));
    }
  }
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw Error(ErrorKind::Config, "");
    } else if constexpr (std::is_unsigned_v<T> && std::is_integral_v<T>) {
      if (!it->is_number_unsigned()) throw Error(ErrorKind::Config, "");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw Error(ErrorKind::Config, "");
    } else {
      if (!it->is_array()) throw Error(ErrorKind::Config, "");
      for (const auto& e : *it) {
        if (!e.is_number_unsigned()) throw Error(ErrorKind::Config, "");
      }
    }
    out = it->template get<T>();
  } catch (const std::exception&) {
    throw Error(ErrorKind::Config, std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace hiot::detail
