#pragma once

#include "cm/numeric.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cm {

using Exponents = std::vector<int>;

struct Monomial {
    Integer coeff;
    Exponents exps;

    int degree() const;
    bool operator==(const Monomial&) const = default;
};

// Graded lexicographic order, largest first: higher total degree wins, ties
// broken by the first differing exponent. This is the canonical storage order.
bool grlex_before(const Exponents& a, const Exponents& b);

// Sparse integer polynomial in a fixed number of variables. Terms are kept
// collected, nonzero, and in canonical order, so == is structural equality.
class Polynomial {
public:
    explicit Polynomial(std::size_t nvars = 0);
    Polynomial(std::size_t nvars, std::vector<Monomial> terms);

    static Polynomial variable(std::size_t nvars, std::size_t index);
    static Polynomial constant(std::size_t nvars, const Integer& value);

    std::size_t nvars() const { return nvars_; }
    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    // -1 for the zero polynomial.
    int total_degree() const;
    bool is_homogeneous(int degree) const;
    // Highest exponent of a variable across all terms.
    int degree_in(std::size_t var) const;

    Integer operator()(std::span<const Integer> x) const;
    Integer operator()(std::span<const std::int64_t> x) const;

    Polynomial derivative(std::size_t var) const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Integer& c, const Polynomial& a);
    bool operator==(const Polynomial&) const = default;

private:
    std::size_t nvars_;
    std::vector<Monomial> terms_;
};

// Substitutes variable i of f by images[i]; all images share one ring.
Polynomial compose(const Polynomial& f, std::span<const Polynomial> images);

// Delta_h f(y) = f(y + h) - f(y).
Polynomial forward_difference(const Polynomial& f, std::span<const Integer> h);
Polynomial forward_difference(const Polynomial& f, std::span<const std::int64_t> h);

// Homogeneous integer form of a fixed degree. The zero form is representable
// (it is a legal multiplier) but FormSystem refuses it.
class IntegerForm {
public:
    IntegerForm(std::size_t n, int degree, std::vector<Monomial> monomials);
    IntegerForm(int degree, Polynomial poly);

    std::size_t n() const { return poly_.nvars(); }
    int degree() const { return degree_; }
    const std::vector<Monomial>& monomials() const { return poly_.terms(); }
    const Polynomial& polynomial() const { return poly_; }
    bool is_zero() const { return poly_.is_zero(); }

    Integer operator()(std::span<const Integer> x) const;
    Integer operator()(std::span<const std::int64_t> x) const;
    std::vector<Integer> gradient(std::span<const Integer> x) const;

    bool operator==(const IntegerForm&) const = default;

private:
    int degree_;
    Polynomial poly_;
};

using IntVector = std::vector<Integer>;

IntVector to_integers(std::span<const std::int64_t> v);

// Symmetric d-multilinear form in d slots of n variables each. A term with
// slot indices (i_1, ..., i_d) contributes coeff * x1[i_1] * ... * xd[i_d].
class MultilinearForm {
public:
    struct Term {
        Integer coeff;
        std::vector<int> slots;
        bool operator==(const Term&) const = default;
    };

    MultilinearForm(std::size_t n, int arity, std::vector<Term> terms);

    std::size_t n() const { return n_; }
    int arity() const { return arity_; }
    const std::vector<Term>& terms() const { return terms_; }

    Integer operator()(std::span<const IntVector> slots) const;
    // The vector v with form(x_1, ..., x_{d-1}, x_d) = v . x_d.
    IntVector row_vector(std::span<const IntVector> leading) const;
    MultilinearForm permuted(std::span<const int> perm) const;
    bool is_symmetric() const;

    bool operator==(const MultilinearForm&) const = default;

private:
    std::size_t n_;
    int arity_;
    std::vector<Term> terms_;
};

// Polar form normalized as the iterated forward difference
// Delta_{x_1} ... Delta_{x_d} F, so that polar(x, ..., x) = d! F(x).
MultilinearForm polar_form(const IntegerForm& form);

IntVector polar_row_vector(const IntegerForm& form, std::span<const IntVector> leading);

}  // namespace cm
