#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cloudmirror/error.hpp"

// Field accessors that turn nlohmann type errors into located parse errors.
namespace cloudmirror::json_util {

using nlohmann::json;

inline json parse_document(std::string_view text, const std::string& what) {
  try {
    json doc = json::parse(text.begin(), text.end());
    if (!doc.is_object()) {
      throw Error(ErrorCode::kParse, what + ": top level must be an object");
    }
    return doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, what + ": malformed JSON at byte " +
                                       std::to_string(e.byte) + ": " + e.what());
  }
}

inline const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::kValidation, where + ": missing field '" + key + "'");
  }
  return *it;
}

inline std::string string_field(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParse, where + ": field '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

inline std::int64_t int_field(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::kParse, where + ": field '" + std::string(key) + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

inline double number_field(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number()) {
    throw Error(ErrorCode::kParse, where + ": field '" + std::string(key) + "' must be a number");
  }
  return v.get<double>();
}

inline const json& array_field(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_array()) {
    throw Error(ErrorCode::kParse, where + ": field '" + std::string(key) + "' must be an array");
  }
  return v;
}

inline double optional_number(const json& j, const char* key, double fallback,
                              const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return number_field(j, key, where);
}

inline std::int64_t optional_int(const json& j, const char* key, std::int64_t fallback,
                                 const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return int_field(j, key, where);
}

}  // namespace cloudmirror::json_util
