// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero on
// any failure. Expected values come from closed forms and independent oracles.

#include "fixtures.hpp"

#include "cm/commands.hpp"
#include "cm/counting.hpp"
#include "cm/densities.hpp"
#include "cm/document.hpp"
#include "cm/expsums.hpp"
#include "cm/invariants.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

using namespace cm;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            if (pass) detail << "first failure: " << what << "; ";
            pass = false;
        }
    }
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Integer pow2(int e) { return Integer(1) << e; }

Integer factorial_of(int d) {
    Integer f = 1;
    for (int k = 2; k <= d; ++k) f *= k;
    return f;
}

void closed_form_n0(Outcome& out) {
    int cases = 0;
    for (int r = 1; r <= 6; ++r) {
        for (int D = 3; D <= 8; ++D) {
            std::vector<int> counts(static_cast<std::size_t>(D), 0);
            counts[1] = r;
            counts[static_cast<std::size_t>(D - 1)] = 1;
            const auto v = n0_values(DegreeProfile(counts));
            const Integer c = (D - 1) * pow2(D - 1);
            const Integer expected = r > (D - 1) * (1 << (D - 2)) ? (2 + r) * c + 2 * r * (r + 1) : (2 + 2 * r) * c + 4 * r;
            const std::string tag = "r=" + std::to_string(r) + " D=" + std::to_string(D);
            out.expect(v.n0 == expected, tag + " n0");
            out.expect(v.n0_of_d.at(D) == (D + 2 * r) * pow2(D - 1), tag + " n0(D)");
            out.expect(v.n0_of_d.at(2) == (2 + 2 * r) * c + 4 * r, tag + " n0(2)");
            out.expect(v.n0_of_d.at(0) == (2 + r) * c + 2 * r * (1 + r), tag + " n0(0)");
            ++cases;
        }
    }
    for (int D = 3; D <= 8; ++D) {
        for (int E = 2; E < D; ++E) {
            std::vector<int> counts(static_cast<std::size_t>(D), 0);
            counts[static_cast<std::size_t>(E - 1)] = 1;
            counts[static_cast<std::size_t>(D - 1)] = 1;
            const auto v = n0_values(DegreeProfile(counts));
            out.expect(v.n0 == (2 + E) * (D - 1) * pow2(D - 1) + E * pow2(E - 1),
                       "D=" + std::to_string(D) + " E=" + std::to_string(E));
            ++cases;
        }
    }
    out.detail << cases << " profiles matched exactly";
}

void crude_bound_sweep(Outcome& out) {
    const auto profiles = all_profiles(20);
    int violations = 0;
    for (const auto& p : profiles) {
        const auto v = n0_values(p);
        const Integer lhs = v.n0 + p.total_forms() - 1;
        const Integer W = p.total_weight();
        const Integer quadratic_rhs = W * W * pow2(p.max_degree() - 1);
        const Integer exponential_rhs = (W - 1) * pow2(static_cast<int>(W));
        const bool quadratic = lhs <= quadratic_rhs, exponential = lhs <= exponential_rhs;
        const auto crude = check_crude_bounds(p);
        out.expect(crude.quadratic_holds == quadratic && crude.exponential_holds == exponential, "library disagrees");
        if (!(quadratic && exponential)) {
            std::ostringstream name;
            name << "r = (";
            for (int d = 1; d <= p.max_degree(); ++d) name << (d > 1 ? ", " : "") << p.count(d);
            name << "): n0 + R - 1 = " << lhs << " against " << quadratic_rhs << " and " << exponential_rhs;
            out.expect(false, name.str());
            ++violations;
        }
    }
    out.detail << violations << " of " << profiles.size() << " profiles with weight <= 20 violate a bound";
}

void quadric_experiment(Outcome& out) {
    const auto quad = fx::quadric();
    const unsigned threads = workers();
    const auto sigma = sigma_infinity(quad, 1000000, {0.02, 0.01}, 20240601, threads);
    const auto euler = euler_product(quad, 100, 3, {threads, 1e9});
    out.detail << "sigma_inf " << sigma.estimate << " +- " << sigma.std_error << ", Euler product " << euler.value
               << "; ";
    double previous = INFINITY;
    for (double P : {20.0, 40.0, 60.0}) {
        const auto N = count_solutions(quad, P, {CountStrategy::solve_last, threads});
        const double predicted = predict_main_term(sigma.estimate, euler.value, 5, 2, P);
        const double ratio = static_cast<double>(N.count) / predicted;
        const double distance = std::fabs(ratio - 1);
        out.detail << "P=" << P << " N=" << N.count << " ratio=" << ratio << "; ";
        out.expect(distance <= previous, "distance increased at P=" + std::to_string(P));
        previous = distance;
    }
    out.expect(previous <= 0.10, "ratio at P=60 outside 10%");
}

void series_cross_check(Outcome& out) {
    const auto quad = fx::quadric();
    const auto series = singular_series(quad, 50);
    // level k with p^k <= 50 gathers exactly the prime-power terms that the truncated series contains
    double product = 1;
    for (auto p : primes_up_to(50)) {
        int k = 1;
        for (std::int64_t q = p * p; q <= 50; q *= p) ++k;
        product *= static_cast<double>(sigma_p(quad, p, k).levels.back());
    }
    const double rel = series.value / product - 1;
    out.detail << "S(50) " << series.value << ", product " << product << ", relative gap " << rel;
    out.expect(std::fabs(rel) <= 0.02, "gap above 2%");
    out.expect(std::fabs(series.imaginary) < 1e-9, "imaginary part");
}

void linear_densities(Outcome& out) {
    const auto lin = fx::linear();
    for (auto p : primes_up_to(20)) {
        const auto local = sigma_p(lin, p, 3);
        out.expect(local.levels.size() == 3, "missing levels at p=" + std::to_string(p));
        for (const auto& l : local.levels) out.expect(l == 1, "sigma_p != 1 at p=" + std::to_string(p));
    }
    const auto sigma = sigma_infinity(lin, 1000000, {0.02, 0.01}, 7, workers());
    const auto euler = euler_product(lin, 20, 3);
    const double predicted = predict_main_term(sigma.estimate, euler.value, 2, 1, 10);
    const auto N = count_solutions(lin, 10);
    const double ratio = static_cast<double>(N.count) / predicted;
    out.detail << "sigma_inf " << sigma.estimate << ", predicted " << predicted << ", N " << N.count;
    out.expect(std::fabs(sigma.estimate - 2) <= 0.05, "sigma_inf");
    out.expect(euler.value == 1.0, "Euler product");
    out.expect(N.count == 21, "N(10)");
    out.expect(std::fabs(ratio - 1) <= 0.1, "ratio");
}

void identity_suite(Outcome& out) {
    std::mt19937_64 rng(31415);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng() % 5);
        const int d = 1 + static_cast<int>(rng() % 4);
        const auto f = fx::random_form(rng, n, d);
        const auto polar = polar_form(f);
        const auto x = fx::random_vector(rng, n);
        const std::vector<IntVector> diag(static_cast<std::size_t>(d), x);
        out.expect(polar(diag) == factorial_of(d) * f(x), "normalization");
        out.expect(polar.is_symmetric(), "symmetric terms");

        std::vector<IntVector> slots;
        for (int k = 0; k < d; ++k) slots.push_back(fx::random_vector(rng, n));
        std::vector<int> perm(static_cast<std::size_t>(d));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<IntVector> permuted(slots.size());
        for (std::size_t k = 0; k < slots.size(); ++k) permuted[k] = slots[static_cast<std::size_t>(perm[k])];
        out.expect(polar(permuted) == polar(slots), "slot symmetry");

        // linearity in a random slot
        const auto slot = static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(d));
        const auto y = fx::random_vector(rng, n);
        const Integer a = static_cast<long long>(rng() % 7) - 3, b = static_cast<long long>(rng() % 7) - 3;
        auto mixed = slots, other = slots;
        other[slot] = y;
        for (std::size_t i = 0; i < n; ++i) mixed[slot][i] = a * slots[slot][i] + b * y[i];
        out.expect(polar(mixed) == a * polar(slots) + b * polar(other), "multilinearity");

        const std::vector<IntVector> leading(slots.begin(), slots.end() - 1);
        const auto row = polar.row_vector(leading);
        Integer dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += row[i] * slots.back()[i];
        out.expect(dot == polar(slots), "row vector");

        const FormSystem sys(n, {f});
        const std::vector<IntVector> hat_slots(static_cast<std::size_t>(d - 1), x);
        const auto H = hat_jacobian(sys, d, hat_slots);
        const auto J = jacobian_matrix(sys, d, x);
        for (std::size_t i = 0; i < n; ++i) out.expect(H[0][i] == factorial_of(d - 1) * J[0][i], "hat jacobian");
    }
    out.detail << "200 random forms";
}

void birch_consistency(Outcome& out) {
    int agreements = 0;
    for (int D = 2; D <= 6; ++D) {
        std::vector<int> counts(static_cast<std::size_t>(D), 0);
        counts.back() = 1;
        const DegreeProfile p(counts);
        for (std::int64_t n = 1; n <= 200; ++n) {
            const bool main = check_theorem_main(p, n, {{D, 0}}).pass;
            const bool birch = check_birch(n, 0, 1, D).pass;
            out.expect(main == birch, "D=" + std::to_string(D) + " n=" + std::to_string(n));
            agreements += main == birch;
        }
    }
    out.detail << agreements << " of 1000 (D, n) pairs agree";
}

void locus_fixtures(Outcome& out) {
    const auto diag = FormSystem(3, {fx::form(3, 2, {{1, {2, 0, 0}}, {2, {0, 2, 0}}, {3, {0, 0, 2}}})});
    const auto square = FormSystem(3, {fx::form(3, 2, {{1, {2, 0, 0}}})});
    const auto pair = FormSystem(3, {fx::form(3, 2, {{1, {2, 0, 0}}, {1, {0, 1, 1}}}),
                                     fx::form(3, 2, {{2, {2, 0, 0}}, {2, {0, 1, 1}}})});
    const auto a = estimate_Bd(diag, 2, kDefaultLocusPrimes, 20000000);
    const auto b = estimate_Bd(square, 2, kDefaultLocusPrimes, 20000000);
    const auto c = estimate_Bd(pair, 2, kDefaultLocusPrimes, 20000000);
    out.expect(a.estimate == 0 && a.confident, "diagonal");
    out.expect(b.estimate == 2 && b.confident, "x1^2");
    out.expect(c.excluded && c.confident, "dependent pair");
    out.detail << "B = " << a.estimate << ", " << b.estimate << ", " << c.estimate << (c.excluded ? " (excluded)" : "");
}

void determinism(Outcome& out) {
    const auto quad = fx::quadric();
    const auto c1 = count_solutions(quad, 15, {CountStrategy::solve_last, 1});
    const auto c2 = count_solutions(quad, 15, {CountStrategy::solve_last, 2});
    const auto c8 = count_solutions(quad, 15, {CountStrategy::solve_last, 8});
    const auto f8 = count_solutions(quad, 15, {CountStrategy::full, 8});
    out.expect(c1.count == c2.count && c1.count == c8.count && c1.count == f8.count, "counts");

    const auto s1 = sigma_infinity(quad, 200000, {0.02, 0.01}, 3, 1);
    const auto s2 = sigma_infinity(quad, 200000, {0.02, 0.01}, 3, 2);
    const auto s8 = sigma_infinity(quad, 200000, {0.02, 0.01}, 3, 8);
    out.expect(s1.estimate == s2.estimate && s1.estimate == s8.estimate && s1.std_error == s8.std_error, "sigma_inf");

    const auto e1 = euler_product(quad, 11, 2, {1, 1e9});
    const auto e8 = euler_product(quad, 11, 2, {8, 1e9});
    out.expect(e1.value == e8.value, "Euler product");

    const auto doc = parse_system(serialize_system({kSchemaVersion, quad, {}, {}, 11}));
    std::string reference;
    for (unsigned threads : {1u, 2u, 8u, 1u}) {
        CommandFlags flags;
        flags.threads = threads;
        flags.P = {8, 12};
        flags.p_max = 7;
        flags.k_max = 2;
        flags.samples = 100000;
        auto report = run_command("compare", doc, flags);
        report["inputs"]["flags"].erase("threads");
        const auto text = format_report(report, true);
        if (reference.empty()) reference = text;
        out.expect(text == reference, "JSON differs at threads=" + std::to_string(threads));
    }
    out.detail << "N(15) = " << c1.count << ", sigma_inf " << s1.estimate << ", JSON " << reference.size() << " bytes";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"closed-form n0 for quadratics plus one form, and for two forms", closed_form_n0},
        {"crude n0 bounds over all profiles of weight <= 20", crude_bound_sweep},
        {"quadric main-term experiment", quadric_experiment},
        {"singular series against local densities", series_cross_check},
        {"linear form densities and main term", linear_densities},
        {"polar form identities", identity_suite},
        {"single-form criterion agrees with Birch", birch_consistency},
        {"singular locus dimension fixtures", locus_fixtures},
        {"determinism across worker counts", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "exception: " << e.what();
        }
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        failures += out.pass ? 0 : 1;
        std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << " ("
                  << out.detail.str() << ", " << took.count() << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
