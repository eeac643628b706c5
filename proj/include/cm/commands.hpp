#pragma once

#include "cm/document.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cm {

// Bad or missing command-line options (as opposed to a bad document).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CommandFlags {
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<double> budget;
    bool timings = false;

    // count, predict, compare, expsum (S(alpha))
    std::vector<double> P;
    std::string strategy = "auto";

    // densities, predict, compare
    std::int64_t p_max = 100;
    int k_max = 3;
    std::uint64_t samples = 1000000;
    std::vector<double> eps{0.02, 0.01};

    // check
    std::vector<std::int64_t> locus_primes{5, 7, 11};

    // expsum
    std::optional<std::vector<double>> alpha;
    std::optional<std::vector<double>> gamma;
    std::optional<std::int64_t> q;
    std::vector<std::int64_t> a;
    std::optional<std::int64_t> series_H;
    std::optional<double> integral_H;
};

inline const std::vector<std::string> kVerbs{"check", "count", "densities", "predict", "compare", "expsum", "polar"};

// {command, inputs, results, warnings, timings}. Numbers in results are tagged
// {"type": "exact-rational", "num", "den"} or {"type": "float", "value", "error"}.
nlohmann::json run_command(const std::string& verb, const SystemDocument& doc, const CommandFlags& flags);

// The report as indented JSON, or as CSV rows "key,type,value,error".
std::string format_report(const nlohmann::json& report, bool as_json);

// Process exit status for an exception escaping run_command.
int exit_code_for(const std::exception& e);

}  // namespace cm
