#pragma once

// Private helpers for strict field access on nlohmann::json objects. Every
// failure becomes a refind::schema_error naming the field.

#include <string>
#include <string_view>

#include "json.hpp"
#include "refind/error.hpp"

namespace refind::detail {

using json = nlohmann::json;

inline const json& require(const json& obj, std::string_view field) {
    if (!obj.is_object()) throw schema_error("expected a JSON object");
    auto it = obj.find(field);
    if (it == obj.end()) throw schema_error("missing field '" + std::string(field) + "'");
    return *it;
}

template <typename T>
T get_as(const json& obj, std::string_view field) {
    const json& v = require(obj, field);
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw schema_error("field '" + std::string(field) + "' has the wrong type");
    }
}

template <typename T>
T get_or(const json& obj, std::string_view field, T fallback) {
    auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) return fallback;
    try {
        return it->template get<T>();
    } catch (const json::exception&) {
        throw schema_error("field '" + std::string(field) + "' has the wrong type");
    }
}

inline json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw schema_error(std::string(what) + ": invalid JSON (" + e.what() + ")");
    }
}

}  // namespace refind::detail
