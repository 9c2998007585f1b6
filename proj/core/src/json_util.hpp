#ifndef SLICEQ_JSON_UTIL_HPP
#define SLICEQ_JSON_UTIL_HPP

#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace sliceq::detail {

/// Rejects any key of `j` not in `allowed`, naming the key and its path.
inline void expect_keys(const nlohmann::json& j,
                        std::initializer_list<std::string_view> allowed,
                        const std::string& context) {
    if (!j.is_object()) {
        throw std::runtime_error(context + ": expected a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (std::string_view a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw std::runtime_error(context + ": unknown key '" + key + "'");
        }
    }
}

inline double require_number(const nlohmann::json& j, const char* key,
                             const std::string& context) {
    if (!j.contains(key)) {
        throw std::runtime_error(context + ": missing key '" + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw std::runtime_error(context + ": key '" + key +
                                 "' must be a number");
    }
    return v.get<double>();
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& context) {
    if (!j.contains(key)) {
        throw std::runtime_error(context + ": missing key '" + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_string()) {
        throw std::runtime_error(context + ": key '" + key +
                                 "' must be a string");
    }
    return v.get<std::string>();
}

}  // namespace sliceq::detail

#endif  // SLICEQ_JSON_UTIL_HPP
