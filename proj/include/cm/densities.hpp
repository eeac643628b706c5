#pragma once

#include "cm/form_system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cm {

struct ResidueOptions {
    unsigned threads = 1;
    // maximum number of residue tuples scanned per modulus
    double budget = 1e9;
};

// Tuples scanned to count residues mod q: q^(n-1) when the last variable can
// be tabulated separately, q^n otherwise.
double residue_scan_size(const FormSystem& sys, std::int64_t q);

// N(q) = #{x mod q : F(m0 + M x) = 0 mod q for every form}
std::uint64_t count_mod(const FormSystem& sys, std::int64_t q, const ResidueOptions& options = {});

// Joint value distribution of the forms mod q. Entry sum_f v_f q^f counts
// x mod q with F_f(m0 + M x) = v_f (mod q), forms in system order.
std::vector<std::uint64_t> residue_histogram(const FormSystem& sys, std::int64_t q, const ResidueOptions& options = {});

struct LocalDensity {
    std::int64_t prime = 0;
    // levels[k-1] = p^{-(n-R)k} N(p^k)
    std::vector<Rational> levels;
    bool stabilized = false;      // the last two levels agree exactly
    bool divergent = false;       // the last three levels grow by a constant step
    bool budget_limited = false;  // stopped before k_max because of the budget

    double value() const;
};

LocalDensity sigma_p(const FormSystem& sys, std::int64_t p, int k_max, const ResidueOptions& options = {});

struct EulerProduct {
    std::int64_t p_max = 0;
    double value = 1.0;
    std::vector<LocalDensity> factors;
    std::vector<std::string> warnings;
};

// prod_{p <= p_max} of the last available level of sigma_p.
EulerProduct euler_product(const FormSystem& sys, std::int64_t p_max, int k_max, const ResidueOptions& options = {});

struct EpsilonLevel {
    double eps = 0;
    std::uint64_t hits = 0;
    double estimate = 0;
    double std_error = 0;
};

struct SigmaInfinity {
    double estimate = 0;
    double std_error = 0;
    std::vector<EpsilonLevel> levels;
    std::uint64_t samples = 0;  // points actually drawn
    std::uint64_t seed = 0;
    std::uint64_t strata_per_axis = 1;
    bool no_hits = false;
};

inline constexpr unsigned kMonteCarloStreams = 64;

// Real density as M^{-n} lim (2 eps)^{-R} vol{x in B : |F(x)| <= eps for all forms},
// estimated by stratified Monte Carlo at each eps and extrapolated linearly
// to eps = 0 from the last two levels.
SigmaInfinity sigma_infinity(const FormSystem& sys, std::uint64_t samples, const std::vector<double>& eps_schedule,
                             std::uint64_t seed, unsigned threads = 1);

// sigma_inf * euler * P^{n - weight}
double predict_main_term(double sigma_inf, double euler, std::int64_t n, std::int64_t weight, double P);

struct DensityEstimate {
    EulerProduct euler;
    SigmaInfinity sigma_inf;
    std::optional<double> P;
    std::optional<double> main_term;
};

}  // namespace cm
