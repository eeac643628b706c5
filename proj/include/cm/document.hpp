#pragma once

#include "cm/form_system.hpp"
#include "cm/invariants.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace cm {

struct Budgets {
    std::optional<double> count;    // lattice points scanned by count and S(alpha)
    std::optional<double> residue;  // residue tuples scanned per modulus
    std::optional<std::uint64_t> locus;  // p^n limit for the B_d estimator

    bool operator==(const Budgets&) const = default;
};

// JSON description of a system together with run settings.
struct SystemDocument {
    std::string schema_version = "1";
    FormSystem system;
    SingularDims B_overrides;
    Budgets budgets;
    std::optional<std::uint64_t> seed;

    bool operator==(const SystemDocument&) const = default;
};

inline constexpr const char* kSchemaVersion = "1";

// Throws InputError naming the offending field (or line and column for bad JSON).
SystemDocument parse_system(const std::string& text);
SystemDocument parse_system(const nlohmann::json& j);
inline SystemDocument parse_system(const char* text) { return parse_system(std::string(text)); }

nlohmann::json to_json(const SystemDocument& doc);
std::string serialize_system(const SystemDocument& doc);

// {"num": "...", "den": "..."}
nlohmann::json rational_json(const Rational& r);

}  // namespace cm
