#pragma once

// JSON document helpers shared by every file format in the library.
// nlohmann::json with its default (alphabetically ordered) object keys
// keeps serialization deterministic.

#include "gcx/scalar.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcx {

using Json = nlohmann::json;

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline const Json& require_field(const Json& j, const std::string& key, const char* where) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::runtime_error(std::string(where) + ": missing field '" + key + "'");
    return *it;
}

inline Rational rational_from_json(const Json& j) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
    throw std::runtime_error("expected rational as integer or \"p/q\" string");
}

inline Json rational_to_json(const Rational& r) { return to_string(r); }

// Matrices are lists of rows of rational strings.
inline std::vector<std::vector<Rational>> matrix_from_json(const Json& j) {
    std::vector<std::vector<Rational>> m;
    if (!j.is_array()) throw std::runtime_error("expected matrix as array of rows");
    for (const auto& row : j) {
        std::vector<Rational> r;
        for (const auto& x : row) r.push_back(rational_from_json(x));
        m.push_back(std::move(r));
    }
    return m;
}

inline Json matrix_to_json(const std::vector<std::vector<Rational>>& m) {
    Json rows = Json::array();
    for (const auto& r : m) {
        Json row = Json::array();
        for (const auto& x : r) row.push_back(rational_to_json(x));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace gcx
