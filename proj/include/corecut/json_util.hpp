#pragma once

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "corecut/errors.hpp"
#include "corecut/linalg.hpp"

namespace corecut {

// Rejects unknown keys so typos in experiment descriptions fail loudly.
inline void check_allowed_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                               const std::string& context) {
    if (!j.is_object()) throw ParseError(context + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ParseError(context + ": unknown key \"" + it.key() + "\"");
    }
}

inline void require_key(const nlohmann::json& j, const char* key, const std::string& context) {
    if (!j.contains(key)) throw ParseError(context + ": missing key \"" + std::string(key) + "\"");
}

inline Vec vec_from_json(const nlohmann::json& j, const std::string& context) {
    if (!j.is_array()) throw ParseError(context + ": expected an array of numbers");
    Vec v;
    v.reserve(j.size());
    for (const auto& e : j) {
        if (!e.is_number()) throw ParseError(context + ": expected an array of numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

}  // namespace corecut
