#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cm {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Error categories. The CLI maps each one onto a stable exit code.
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string to_string(const Integer& v) { return v.str(); }

inline Integer ipow(const Integer& base, unsigned e) {
    return boost::multiprecision::pow(base, e);
}

inline std::int64_t ipow64(std::int64_t base, unsigned e) {
    std::int64_t r = 1;
    while (e--) r *= base;
    return r;
}

inline std::int64_t mod_floor(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

inline Integer factorial(unsigned d) {
    Integer f = 1;
    for (unsigned k = 2; k <= d; ++k) f *= k;
    return f;
}

bool is_prime(std::int64_t p);
std::vector<std::int64_t> primes_up_to(std::int64_t limit);

}  // namespace cm
