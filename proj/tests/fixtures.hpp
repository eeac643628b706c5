#pragma once

// Shared fixtures and brute-force oracles for the test binaries. The oracles
// deliberately avoid the library's scanning and polynomial evaluation code.

#include "cm/form_system.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fx {

using Term = std::pair<long long, std::vector<int>>;

inline cm::IntegerForm form(std::size_t n, int degree, const std::vector<Term>& terms) {
    std::vector<cm::Monomial> ms;
    for (const auto& [c, e] : terms) ms.push_back({cm::Integer(c), e});
    return cm::IntegerForm(n, degree, std::move(ms));
}

// x1^2 + x2^2 + x3^2 - x4^2 - x5^2 on [-1, 1]^5
inline cm::FormSystem quadric() {
    return cm::FormSystem(5, {form(5, 2, {{1, {2, 0, 0, 0, 0}},
                                          {1, {0, 2, 0, 0, 0}},
                                          {1, {0, 0, 2, 0, 0}},
                                          {-1, {0, 0, 0, 2, 0}},
                                          {-1, {0, 0, 0, 0, 2}}})});
}

// x1 - x2 on [-1, 1]^2
inline cm::FormSystem linear() { return cm::FormSystem(2, {form(2, 1, {{1, {1, 0}}, {-1, {0, 1}}})}); }

// x1 x2 on [-1, 1]^2
inline cm::FormSystem hyperbola() { return cm::FormSystem(2, {form(2, 2, {{1, {1, 1}}})}); }

// Direct monomial-by-monomial evaluation in long double (exact for small inputs).
inline long double eval(const cm::IntegerForm& f, const std::vector<long long>& x) {
    long double v = 0;
    for (const auto& m : f.monomials()) {
        long double t = static_cast<long double>(static_cast<long long>(m.coeff));
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int e = 0; e < m.exps[i]; ++e) t *= static_cast<long double>(x[i]);
        }
        v += t;
    }
    return v;
}

// Exact evaluation mod q by repeated reduction.
inline long long eval_mod(const cm::IntegerForm& f, const std::vector<long long>& x, long long q) {
    long long v = 0;
    for (const auto& m : f.monomials()) {
        long long t = static_cast<long long>(m.coeff % q);
        t = ((t % q) + q) % q;
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (int e = 0; e < m.exps[i]; ++e) t = t * (((x[i] % q) + q) % q) % q;
        }
        v = (v + t) % q;
    }
    return v;
}

// Calls visit(x) for every x in the product of [lo_i, hi_i] stepping by 1.
template <class F>
void for_each_point(const std::vector<long long>& lo, const std::vector<long long>& hi, F&& visit) {
    const std::size_t n = lo.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (lo[i] > hi[i]) return;
    }
    std::vector<long long> x = lo;
    while (true) {
        visit(x);
        std::size_t i = 0;
        while (i < n && x[i] == hi[i]) {
            x[i] = lo[i];
            ++i;
        }
        if (i == n) return;
        ++x[i];
    }
}

// N(P) by plain enumeration of the scaled box, checking the congruence per point.
inline std::uint64_t brute_count(const cm::FormSystem& sys, double P) {
    std::vector<long long> lo, hi;
    for (const auto& side : sys.box()) {
        lo.push_back(static_cast<long long>(std::ceil(P * side.lo)));
        hi.push_back(static_cast<long long>(std::floor(P * side.hi)));
    }
    std::uint64_t count = 0;
    const long long M = sys.modulus();
    for_each_point(lo, hi, [&](const std::vector<long long>& x) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if ((((x[i] - sys.m0()[i]) % M) + M) % M != 0) return;
        }
        for (const auto& f : sys.forms()) {
            if (eval(f, x) != 0) return;
        }
        ++count;
    });
    return count;
}

// #{x mod q : F(m0 + M x) = 0 mod q}
inline std::uint64_t brute_count_mod(const cm::FormSystem& sys, long long q) {
    const std::size_t n = sys.n();
    std::uint64_t count = 0;
    for_each_point(std::vector<long long>(n, 0), std::vector<long long>(n, q - 1), [&](const std::vector<long long>& y) {
        std::vector<long long> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = sys.m0()[i] + sys.modulus() * y[i];
        for (const auto& f : sys.forms()) {
            if (eval_mod(f, x, q) != 0) return;
        }
        ++count;
    });
    return count;
}

// Random homogeneous form of the given degree with coefficients in [-9, 9].
inline cm::IntegerForm random_form(std::mt19937_64& rng, std::size_t n, int degree) {
    std::uniform_int_distribution<int> coeff(-9, 9), var(0, static_cast<int>(n) - 1), count(1, 5);
    std::vector<cm::Monomial> ms;
    const int terms = count(rng);
    for (int t = 0; t < terms; ++t) {
        std::vector<int> e(n, 0);
        for (int k = 0; k < degree; ++k) ++e[static_cast<std::size_t>(var(rng))];
        int c = coeff(rng);
        if (c == 0) c = 1;
        ms.push_back({cm::Integer(c), e});
    }
    auto f = cm::IntegerForm(n, degree, std::move(ms));
    if (f.is_zero()) {
        std::vector<int> e(n, 0);
        e[0] = degree;
        return cm::IntegerForm(n, degree, {{cm::Integer(1), e}});
    }
    return f;
}

inline std::vector<cm::Integer> random_vector(std::mt19937_64& rng, std::size_t n, int bound = 9) {
    std::uniform_int_distribution<int> d(-bound, bound);
    std::vector<cm::Integer> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace fx
