#pragma once

#include "cm/form_system.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace cm {

// Degree d -> B_d. Degrees absent from the map are treated as B_d = 0, which
// is the convention for r_d = 0 and for B_0.
using SingularDims = std::map<int, std::int64_t>;

struct PrimeCount {
    std::int64_t prime;
    std::uint64_t count;
};

// Estimate of B_d, the dimension of the locus where the degree-d Jacobian
// drops rank. Obtained by counting that locus over F_p for a few primes and
// fitting |S_d(F_p)| ~ c p^B in log-log coordinates.
struct SingularLocusEstimate {
    int degree = 0;
    std::int64_t estimate = 0;
    std::vector<PrimeCount> counts;
    double fitted_exponent = 0.0;
    bool confident = false;
    bool override_used = false;
    bool empty_locus = false;  // no rank drop at any tested prime
    bool excluded = false;     // estimate == n, the system is out of scope
};

inline const std::vector<std::int64_t> kDefaultLocusPrimes{5, 7, 11};

SingularLocusEstimate estimate_Bd(const FormSystem& sys, int d, std::span<const std::int64_t> primes,
                                  std::uint64_t budget, std::optional<std::int64_t> override_value = std::nullopt);

// #{x in F_p^n : rank(J_d(x) mod p) < r_d}
std::uint64_t count_rank_deficient(const FormSystem& sys, int d, std::int64_t p);

std::int64_t curly_D(const DegreeProfile& profile, int j);

// s[d] for d = 1..D+1 (s[0] is unused and zero).
std::vector<Rational> s_values(const DegreeProfile& profile, const SingularDims& B, std::int64_t n);

struct N0Values {
    std::vector<Integer> t;             // t[d] for d = 1..D+1, t[0] unused
    std::map<int, Integer> n0_of_d;     // d in Delta and d = 0
    Integer n0;
};

N0Values n0_values(const DegreeProfile& profile);

struct BirchCheck {
    bool pass = false;
    Integer threshold;  // R(R+1)(D-1)2^{D-1}
    Integer slack;      // n - B - threshold; pass iff slack > 0
};

BirchCheck check_birch(std::int64_t n, std::int64_t B, std::int64_t R, int D);

struct MainCondition {
    std::map<int, Rational> margins;  // left-hand sides, keyed by d in Delta and 0
    bool pass = false;                // every margin < 1
};

MainCondition check_theorem_main(const DegreeProfile& profile, std::int64_t n, const SingularDims& B);

struct CrudeBounds {
    Integer n0;
    Integer lhs;                // n0 + R - 1
    Integer quadratic_bound;    // weight^2 2^{D-1}
    Integer exponential_bound;  // (weight - 1) 2^{weight}
    bool quadratic_holds = false;
    bool exponential_holds = false;
};

CrudeBounds check_crude_bounds(const DegreeProfile& profile);

// prod_d d^{r_d}
Integer variety_degree(const DegreeProfile& profile);

struct ThresholdPredicates {
    bool smooth_theorem = false;   // dim >= (deg - 1) 2^deg - 1
    bool conjecture = false;       // dim >= 2 deg - 1
    bool hartshorne_form = false;  // dim >= 2 deg - 1, the complete-intersection bound
};

ThresholdPredicates threshold_predicates(const Integer& dim, const Integer& deg);

// d -> whether B_d <= r_d + ... + r_D - 1, for d in Delta
std::map<int, bool> check_lemma_improve(const SingularDims& B, const DegreeProfile& profile);

struct InvariantReport {
    std::int64_t n = 0;
    SingularDims B;
    std::vector<std::int64_t> curly;  // D_0 .. D_D
    std::vector<Rational> s;          // s_1 .. s_{D+1} at index d
    N0Values n0;
    MainCondition main;
    std::int64_t B_max = 0;
    bool corollary_pass = false;  // n > max B_d + n0
    std::optional<BirchCheck> birch;  // single-degree profiles only
    CrudeBounds crude;
    std::map<int, bool> lemma_improve;
    Integer degree;
    ThresholdPredicates thresholds;  // evaluated at dim = n - 1 - R
};

InvariantReport compute_invariant_report(const DegreeProfile& profile, std::int64_t n, const SingularDims& B);

// Every degree profile with total weight between 1 and max_weight, as r_1..r_D.
std::vector<DegreeProfile> all_profiles(std::int64_t max_weight);

}  // namespace cm
