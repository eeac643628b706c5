#pragma once

#include "cm/form_system.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cm {

enum class CountStrategy { full, solve_last };

std::string to_string(CountStrategy s);
CountStrategy parse_strategy(const std::string& name);

struct CountOptions {
    CountStrategy strategy = CountStrategy::full;
    unsigned threads = 1;
    // maximum number of scanned tuples
    double budget = 1e10;
};

struct CountReport {
    double P = 0;
    std::uint64_t count = 0;
    std::uint64_t points_scanned = 0;
    CountStrategy strategy = CountStrategy::full;
    double wall_time = 0;  // seconds
};

// Integers x with x = m0 (mod M) and ceil(P a) <= x <= floor(P b).
struct Progression {
    std::int64_t first = 0;
    std::int64_t step = 1;
    std::uint64_t size = 0;

    std::vector<std::int64_t> values() const;
};

Progression coordinate_progression(double P, const Interval& side, std::int64_t m0, std::int64_t modulus);

// Number of tuples the given strategy would scan, as a real to survive overflow.
double scan_size(const FormSystem& sys, double P, CountStrategy strategy);

// Whether the last variable occurs in exactly one form, as a pure power.
bool supports_solve_last(const FormSystem& sys);

// N(P): y in Z^n with m0 + M y in P B (closed box) and all forms vanishing.
CountReport count_solutions(const FormSystem& sys, double P, const CountOptions& options = {});

double empirical_ratio(const CountReport& report, double prediction);

}  // namespace cm
