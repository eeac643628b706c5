#include "fixtures.hpp"

#include "cm/form_system.hpp"
#include "cm/polynomial.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace cm;

namespace {

std::vector<Integer> add(const std::vector<Integer>& a, const std::vector<Integer>& b) {
    std::vector<Integer> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Integer dot(const IntVector& a, const IntVector& b) {
    Integer s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("form validation names the monomial") {
    CHECK_THROWS_WITH_AS(fx::form(2, 2, {{1, {2, 0}}, {3, {1, 0}}}), doctest::Contains("monomial 1"), InputError);
    CHECK_THROWS_WITH_AS(fx::form(3, 2, {{1, {2, 0}}}), doctest::Contains("monomial 0"), InputError);
    CHECK_THROWS_AS(fx::form(2, -1, {}), InputError);
    const auto zero = fx::form(2, 3, {});
    CHECK(zero.is_zero());
    // opposite terms collect to nothing
    CHECK(fx::form(2, 1, {{2, {1, 0}}, {-2, {1, 0}}}).is_zero());
}

TEST_CASE("polynomial arithmetic matches hand expansion") {
    const auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
    const auto sq = (x + y) * (x + y);
    const Polynomial expected(2, {{Integer(1), {2, 0}}, {Integer(2), {1, 1}}, {Integer(1), {0, 2}}});
    CHECK(sq == expected);
    CHECK(sq.total_degree() == 2);
    CHECK(sq.is_homogeneous(2));
    CHECK((sq - sq).is_zero());
    CHECK(sq.derivative(0) == Integer(2) * x + Integer(2) * y);
    const std::vector<std::int64_t> pt{3, -5};
    CHECK(sq(std::span<const std::int64_t>(pt)) == 4);

    // compose x -> x + y, y -> x - y on x*y gives x^2 - y^2
    const std::vector<Polynomial> images{x + y, x - y};
    CHECK(compose(x * y, images) == x * x - y * y);
}

TEST_CASE("forward difference against direct evaluation") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + trial % 4;
        const auto f = fx::random_form(rng, n, 1 + trial % 4);
        const auto h = fx::random_vector(rng, n);
        const auto diff = forward_difference(f.polynomial(), h);
        for (int k = 0; k < 5; ++k) {
            const auto y = fx::random_vector(rng, n);
            CHECK(diff(y) == f(add(y, h)) - f(y));
        }
    }
}

TEST_CASE("polar form of a binary quadratic") {
    // F = x^2 + 3xy: Delta_a Delta_b F = 2 a1 b1 + 3 (a1 b2 + a2 b1)
    const auto f = fx::form(2, 2, {{1, {2, 0}}, {3, {1, 1}}});
    const auto polar = polar_form(f);
    CHECK(polar.arity() == 2);
    CHECK(polar.is_symmetric());
    const std::vector<IntVector> slots{{Integer(1), Integer(2)}, {Integer(5), Integer(-1)}};
    CHECK(polar(slots) == 2 * 1 * 5 + 3 * (1 * -1 + 2 * 5));
    const std::vector<IntVector> same{{Integer(2), Integer(7)}, {Integer(2), Integer(7)}};
    CHECK(polar(same) == 2 * f(same[0]));
}

TEST_CASE("polar form identities on random forms") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const int d = 1 + trial % 4;
        const auto f = fx::random_form(rng, n, d);
        const auto polar = polar_form(f);
        const auto x = fx::random_vector(rng, n);
        const std::vector<IntVector> diag(static_cast<std::size_t>(d), x);
        CHECK(polar(diag) == factorial(static_cast<unsigned>(d)) * f(x));

        std::vector<IntVector> slots;
        for (int k = 0; k < d; ++k) slots.push_back(fx::random_vector(rng, n));
        std::vector<IntVector> leading(slots.begin(), slots.end() - 1);
        CHECK(dot(polar.row_vector(leading), slots.back()) == polar(slots));
        CHECK(polar_row_vector(f, leading) == polar.row_vector(leading));

        std::vector<int> perm(static_cast<std::size_t>(d));
        std::iota(perm.begin(), perm.end(), 0);
        std::reverse(perm.begin(), perm.end());
        CHECK(polar.permuted(perm) == polar);
    }
}

TEST_CASE("degree profile weights") {
    const DegreeProfile p({0, 2, 1});  // two quadratics, one cubic
    CHECK(p.max_degree() == 3);
    CHECK(p.total_forms() == 3);
    CHECK(p.weight(0) == 0);
    CHECK(p.weight(1) == 0);
    CHECK(p.weight(2) == 4);
    CHECK(p.weight(3) == 7);
    CHECK(p.degrees() == std::vector<int>{2, 3});
    CHECK_FALSE(p.single_degree());
    CHECK(DegreeProfile({0, 1, 0, 0}) == DegreeProfile({0, 1}));
    CHECK_THROWS_AS(DegreeProfile({0, 0}), InputError);
}

TEST_CASE("form system validation and ordering") {
    const auto cubic = fx::form(2, 3, {{1, {3, 0}}});
    const auto quad = fx::form(2, 2, {{1, {1, 1}}});
    const FormSystem sys(2, {cubic, quad});
    CHECK(sys.forms()[0].degree() == 2);
    CHECK(sys.forms()[1].degree() == 3);
    CHECK(sys.index_of(3, 1) == 1);
    CHECK(sys.forms_of_degree(2).size() == 1);
    CHECK(sys.box_volume() == doctest::Approx(4.0));

    CHECK_THROWS_WITH_AS(FormSystem(2, {quad}, 3, {0, 3}, {{-1, 1}, {-1, 1}}), doctest::Contains("m0 coordinate 1"),
                         InputError);
    CHECK_THROWS_AS(FormSystem(2, {quad}, 0, {0, 0}, {{-1, 1}, {-1, 1}}), InputError);
    CHECK_THROWS_AS(FormSystem(2, {quad}, 1, {0, 0}, {{0.5, 0.5}, {-1, 1}}), InputError);
    CHECK_THROWS_AS(FormSystem(2, {quad}, 1, {0, 0}, {{-2, 1}, {-1, 1}}), InputError);
    CHECK_THROWS_AS(FormSystem(2, {fx::form(2, 2, {})}), InputError);
    CHECK_THROWS_AS(FormSystem(2, {}), InputError);
    CHECK_THROWS_AS(FormSystem(3, {quad}), InputError);
}

TEST_CASE("jacobians and the polar jacobian") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3;
        const FormSystem sys(n, {fx::random_form(rng, n, 3), fx::random_form(rng, n, 3), fx::random_form(rng, n, 2)});
        const auto x = fx::random_vector(rng, n);
        const auto J = jacobian_matrix(sys, 3, x);
        REQUIRE(J.size() == 2);
        // rows are gradients: compare with symbolic derivatives
        for (std::size_t f = 0; f < 2; ++f) {
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(J[f][j] == sys.forms_of_degree(3)[f].polynomial().derivative(j)(x));
            }
        }
        const std::vector<IntVector> slots(2, x);
        const auto H = hat_jacobian(sys, 3, slots);
        for (std::size_t f = 0; f < 2; ++f) {
            for (std::size_t j = 0; j < n; ++j) CHECK(H[f][j] == 2 * J[f][j]);
        }
    }
    CHECK_THROWS_AS(jacobian_matrix(fx::quadric(), 3, std::vector<Integer>(5)), InputError);
}

TEST_CASE("system equivalence") {
    const auto l = fx::form(2, 1, {{1, {1, 0}}});
    const auto q = fx::form(2, 2, {{1, {0, 2}}});
    const FormSystem sys(2, {l, q});
    // G_{1,2} = y^2 + (x + y) * x
    const std::vector<EquivalenceStep> steps{{2, 1, {{1, 1, fx::form(2, 1, {{1, {1, 0}}, {1, {0, 1}}})}}}};
    const auto g = apply_equivalence(sys, steps);
    CHECK(g.forms()[0] == l);
    CHECK(g.forms()[1] == fx::form(2, 2, {{1, {0, 2}}, {1, {2, 0}}, {1, {1, 1}}}));

    // higher-degree sources are refused, as are factors of the wrong degree
    const std::vector<EquivalenceStep> upward{{1, 1, {{2, 1, fx::form(2, 0, {{1, {0, 0}}})}}}};
    CHECK_THROWS_AS(apply_equivalence(sys, upward), InputError);
    const std::vector<EquivalenceStep> wrong{{2, 1, {{1, 1, fx::form(2, 2, {{1, {2, 0}}})}}}};
    CHECK_THROWS_WITH_AS(apply_equivalence(sys, wrong), doctest::Contains("expected 1"), InputError);
}
