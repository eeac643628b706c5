#pragma once

#include "cm/form_system.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace cm {

using Complex = std::complex<double>;

// One real frequency per form, in system order.
class FrequencyVector {
public:
    FrequencyVector(const FormSystem& sys, std::vector<double> values);
    static FrequencyVector zero(const FormSystem& sys);

    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t f) const { return values_[f]; }
    std::size_t size() const { return values_.size(); }

private:
    std::vector<double> values_;
};

struct ExpSumOptions {
    unsigned threads = 1;
    double budget = 1e10;
};

// sum over y with m0 + M y in P B of e(sum_f alpha_f F_f(m0 + M y))
Complex S_alpha(const FormSystem& sys, double P, const FrequencyVector& alpha, const ExpSumOptions& options = {});

// S(a, q) = sum over x mod q of e_q(sum_f a_f F_f(m0 + M x)), phases reduced exactly mod q.
Complex complete_sum(const FormSystem& sys, std::int64_t q, const std::vector<std::int64_t>& a,
                     const ExpSumOptions& options = {});

struct SeriesTerm {
    std::int64_t q = 1;
    Complex term;     // q^{-n} sum over reduced a of S(a, q)
    Complex running;  // partial sum through q
};

struct SingularSeries {
    std::int64_t H = 1;
    double value = 0;
    double imaginary = 0;  // should vanish up to rounding
    std::vector<SeriesTerm> terms;
};

SingularSeries singular_series(const FormSystem& sys, std::int64_t H, const ExpSumOptions& options = {});

struct QuadratureOptions {
    std::uint64_t max_nodes = 1ULL << 20;
    double tolerance = 1e-4;
};

struct JValue {
    Complex value;
    std::uint64_t points_per_axis = 0;
    double change = 0;  // difference between the last two refinements
    bool converged = false;
};

// Midpoint tensor grid over the box, refined by doubling the points per axis.
// The value reported is the Richardson combination of the last two grids.
JValue J_gamma(const FormSystem& sys, const FrequencyVector& gamma, const QuadratureOptions& options = {});

struct SingularIntegral {
    double H = 0;
    double value = 0;
    double error = 0;  // quadrature error indicator
    bool converged = true;
    std::uint64_t evaluations = 0;
};

// M^{-n} times the integral of J over [-H, H]^R, using adaptive Gauss-Kronrod
// rules nested once per form.
SingularIntegral singular_integral(const FormSystem& sys, double H, const QuadratureOptions& options = {});

// 1 / (2R + 4)
Rational default_varpi(int R);

struct MajorArcParams {
    double P = 1;
    Rational varpi;
    std::int64_t q = 1;
    std::vector<std::int64_t> a;

    // varpi in (0, 1/3), q >= 1, gcd(q, a) = 1, one a per form
    void validate(const FormSystem& sys) const;
};

// |alpha_f - a_f / q| <= P^{-d_f + varpi} for every form (distance taken mod 1)
// and q <= P^varpi.
bool major_arc_membership(const FormSystem& sys, const FrequencyVector& alpha, const MajorArcParams& params);

}  // namespace cm
