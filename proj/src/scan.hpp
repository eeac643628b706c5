#pragma once

// Lattice scanning machinery shared by counting, residue counting and the
// exponential sums. Not part of the public interface.

#include "cm/form_system.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace cm::detail {

using Int128 = __int128;

template <class Acc>
Acc to_acc(const Integer& v) {
    if constexpr (std::is_same_v<Acc, Integer>) {
        return v;
    } else if constexpr (std::is_same_v<Acc, Int128>) {
        const bool neg = v < 0;
        Integer a = neg ? Integer(-v) : v;
        const auto lo = static_cast<unsigned long long>(a & Integer(~0ULL));
        const auto hi = static_cast<unsigned long long>(a >> 64);
        Int128 r = (static_cast<Int128>(hi) << 64) | static_cast<Int128>(lo);
        return neg ? -r : r;
    } else {
        return static_cast<Acc>(static_cast<long long>(v));
    }
}

template <class Acc>
Integer to_integer(const Acc& v) {
    if constexpr (std::is_same_v<Acc, Integer>) {
        return v;
    } else if constexpr (std::is_same_v<Acc, Int128>) {
        const bool neg = v < 0;
        const unsigned __int128 a = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
        Integer r = Integer(static_cast<unsigned long long>(a >> 64));
        r <<= 64;
        r += static_cast<unsigned long long>(a);
        return neg ? Integer(-r) : r;
    } else {
        return Integer(static_cast<long long>(v));
    }
}

// Upper bound on |p(x)| (and on every Horner partial sum) when |x_i| <= X.
inline Integer magnitude_bound(const Polynomial& p, const Integer& X) {
    Integer b = 0;
    for (const auto& m : p.terms()) b += abs(m.coeff) * ipow(X, static_cast<unsigned>(m.degree()));
    return b;
}

template <class T>
struct Tag {
    using type = T;
};

// Calls body(Tag<Acc>{}) with the narrowest accumulator that cannot overflow
// for values bounded by `bound` (with headroom for one extra product).
template <class Body>
decltype(auto) with_accumulator(const Integer& bound, Body&& body) {
    if (bound < (Integer(1) << 61)) return body(Tag<long long>{});
    if (bound < (Integer(1) << 124)) return body(Tag<Int128>{});
    return body(Tag<Integer>{});
}

// Evaluates a list of polynomials over every point of a product of
// coordinate value lists. The innermost coordinate is handled by Horner's
// rule on coefficients that are refreshed once per outer tuple.
template <class Acc>
class Scanner {
public:
    Scanner(const std::vector<Polynomial>& polys, std::vector<std::vector<std::int64_t>> coords)
        : coords_(std::move(coords)), k_(coords_.size()) {
        max_exp_ = 0;
        for (const auto& p : polys) {
            if (p.nvars() != k_) throw std::logic_error("scanner: polynomial ring mismatch");
            for (const auto& m : p.terms()) {
                for (int e : m.exps) max_exp_ = std::max(max_exp_, e);
            }
        }
        for (const auto& p : polys) {
            Compiled c;
            c.inner_degree = k_ == 0 ? 0 : p.degree_in(k_ - 1);
            c.groups.resize(c.inner_degree + 1);
            for (const auto& m : p.terms()) {
                const int e = k_ == 0 ? 0 : m.exps[k_ - 1];
                Exponents outer(m.exps.begin(), m.exps.end() - (k_ == 0 ? 0 : 1));
                c.groups[e].push_back({to_acc<Acc>(m.coeff), std::move(outer)});
            }
            polys_.push_back(std::move(c));
        }
        // pw_[j][idx * stride + e] = coords[j][idx]^e
        stride_ = static_cast<std::size_t>(max_exp_) + 1;
        pw_.resize(k_);
        for (std::size_t j = 0; j < k_; ++j) {
            pw_[j].resize(coords_[j].size() * stride_);
            for (std::size_t idx = 0; idx < coords_[j].size(); ++idx) {
                Acc v = 1;
                const Acc x = static_cast<Acc>(coords_[j][idx]);
                for (std::size_t e = 0; e < stride_; ++e) {
                    pw_[j][idx * stride_ + e] = v;
                    v *= x;
                }
            }
        }
    }

    std::size_t units() const { return k_ == 0 ? 1 : coords_[0].size(); }
    std::size_t poly_count() const { return polys_.size(); }

    // Visits all points whose first-coordinate index lies in [begin, end).
    // visit(const Acc* values) receives one value per polynomial.
    template <class Visit>
    void run(std::size_t begin, std::size_t end, Visit&& visit) const {
        const std::size_t np = polys_.size();
        std::vector<Acc> values(np);
        if (k_ == 0) {
            if (begin == 0 && end > 0) {
                for (std::size_t p = 0; p < np; ++p) {
                    values[p] = 0;
                    for (const auto& m : polys_[p].groups[0]) values[p] += m.coeff;
                }
                visit(values.data());
            }
            return;
        }
        if (begin >= end) return;
        for (const auto& c : coords_) {
            if (c.empty()) return;
        }

        const std::size_t inner = k_ - 1;
        std::vector<std::vector<Acc>> coef(np);
        for (std::size_t p = 0; p < np; ++p) coef[p].resize(polys_[p].groups.size());

        // odometer over outer coordinates 0..k-2; coordinate 0 limited to [begin, end)
        std::vector<std::size_t> idx(inner, 0);
        if (inner > 0) idx[0] = begin;
        const std::size_t inner_begin = inner == 0 ? begin : 0;
        const std::size_t inner_end = inner == 0 ? end : coords_[inner].size();
        const auto& inner_vals = coords_[inner];

        while (true) {
            for (std::size_t p = 0; p < np; ++p) {
                const auto& groups = polys_[p].groups;
                for (std::size_t e = 0; e < groups.size(); ++e) {
                    Acc c = 0;
                    for (const auto& m : groups[e]) {
                        Acc t = m.coeff;
                        for (std::size_t j = 0; j < inner; ++j) {
                            if (m.exps[j]) t *= pw_[j][idx[j] * stride_ + m.exps[j]];
                        }
                        c += t;
                    }
                    coef[p][e] = c;
                }
            }
            for (std::size_t t = inner_begin; t < inner_end; ++t) {
                const Acc x = static_cast<Acc>(inner_vals[t]);
                for (std::size_t p = 0; p < np; ++p) {
                    const auto& c = coef[p];
                    Acc v = c.back();
                    for (std::size_t e = c.size() - 1; e-- > 0;) v = v * x + c[e];
                    values[p] = v;
                }
                visit(values.data());
            }
            if (inner == 0) break;
            std::size_t j = inner;
            while (j-- > 0) {
                ++idx[j];
                const std::size_t limit = j == 0 ? end : coords_[j].size();
                if (idx[j] < limit) break;
                if (j == 0) return;
                idx[j] = 0;
            }
        }
    }

private:
    struct Term {
        Acc coeff;
        Exponents exps;
    };
    struct Compiled {
        int inner_degree = 0;
        std::vector<std::vector<Term>> groups;
    };

    std::vector<std::vector<std::int64_t>> coords_;
    std::size_t k_;
    int max_exp_ = 0;
    std::size_t stride_ = 1;
    std::vector<Compiled> polys_;
    std::vector<std::vector<Acc>> pw_;
};

// Runs work(chunk, begin, end) over `workers` contiguous chunks of [0, units)
// and returns the per-chunk results in chunk order.
template <class Result, class Work>
std::vector<Result> parallel_chunks(unsigned workers, std::size_t units, Work&& work) {
    if (workers == 0) workers = 1;
    std::vector<Result> results(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto task = [&](unsigned w) {
        const std::size_t begin = units * w / workers;
        const std::size_t end = units * (w + 1) / workers;
        try {
            results[w] = work(w, begin, end);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 1; w < workers; ++w) threads.emplace_back(task, w);
    task(0);
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

// The last variable occurs in exactly one form, only through a single term
// c * x_n^d. Everything else is a polynomial in x_1..x_{n-1}.
struct SolveLastPlan {
    std::size_t form_index = 0;  // in system order
    int degree = 0;
    Integer coeff;
    Polynomial rest;                  // peeled form minus its pure term, over n-1 variables
    std::vector<Polynomial> others;   // remaining forms, over n-1 variables
};

inline Polynomial drop_last_variable(const Polynomial& p) {
    std::vector<Monomial> out;
    for (const auto& m : p.terms()) {
        if (m.exps.back() != 0) throw std::logic_error("drop_last_variable: variable still present");
        out.push_back({m.coeff, Exponents(m.exps.begin(), m.exps.end() - 1)});
    }
    return Polynomial(p.nvars() - 1, std::move(out));
}

inline std::optional<SolveLastPlan> make_solve_last_plan(const FormSystem& sys) {
    const std::size_t last = sys.n() - 1;
    std::optional<std::size_t> owner;
    for (std::size_t f = 0; f < sys.forms().size(); ++f) {
        if (sys.forms()[f].polynomial().degree_in(last) > 0) {
            if (owner) return std::nullopt;
            owner = f;
        }
    }
    if (!owner) return std::nullopt;
    const auto& form = sys.forms()[*owner];
    SolveLastPlan plan;
    plan.form_index = *owner;
    plan.degree = form.degree();
    std::vector<Monomial> rest;
    int pure_terms = 0;
    for (const auto& m : form.monomials()) {
        if (m.exps[last] == 0) {
            rest.push_back(m);
        } else if (m.exps[last] == form.degree()) {
            plan.coeff = m.coeff;
            ++pure_terms;
        } else {
            return std::nullopt;
        }
    }
    if (pure_terms != 1) return std::nullopt;
    plan.rest = drop_last_variable(Polynomial(sys.n(), std::move(rest)));
    for (std::size_t f = 0; f < sys.forms().size(); ++f) {
        if (f != *owner) plan.others.push_back(drop_last_variable(sys.forms()[f].polynomial()));
    }
    return plan;
}

// Non-negative integer r with r^d <= v < (r+1)^d, for v >= 0.
inline Integer integer_root(const Integer& v, int d) {
    if (v < 2 || d == 1) return v;
    if (d == 2) return boost::multiprecision::sqrt(v);
    const unsigned bits = static_cast<unsigned>(msb(v)) / static_cast<unsigned>(d) + 1;
    Integer lo = 0, hi = Integer(1) << (bits + 1);
    while (lo < hi) {
        Integer mid = (lo + hi + 1) / 2;
        if (ipow(mid, static_cast<unsigned>(d)) <= v) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return lo;
}

inline long long integer_root64(long long v, int d) {
    if (v < 2 || d == 1) return v;
    auto r = static_cast<long long>(std::pow(static_cast<long double>(v), 1.0L / d));
    auto pow_le = [&](long long x) {
        // x^d <= v without overflow
        Int128 acc = 1;
        for (int k = 0; k < d; ++k) {
            acc *= x;
            if (acc > v) return false;
        }
        return true;
    };
    while (r > 0 && !pow_le(r)) --r;
    while (pow_le(r + 1)) ++r;
    return r;
}

// Calls f(x) for every integer x with x^d == v.
template <class Acc, class F>
void for_each_integer_root(const Acc& v, int d, F&& f) {
    if (v == 0) {
        f(Acc(0));
        return;
    }
    const bool negative = v < 0;
    if (negative && d % 2 == 0) return;
    const Acc mag = negative ? Acc(-v) : v;
    Acc r;
    if constexpr (std::is_same_v<Acc, long long>) {
        r = integer_root64(mag, d);
    } else {
        r = to_acc<Acc>(integer_root(to_integer(mag), d));
    }
    Acc check = 1;
    for (int k = 0; k < d; ++k) check *= r;
    if (check != mag) return;
    if (d % 2 == 1) {
        f(negative ? Acc(-r) : r);
    } else {
        f(r);
        f(Acc(-r));
    }
}

}  // namespace cm::detail
