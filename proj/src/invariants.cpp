#include "cm/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cm {

namespace {

Integer pow2(std::int64_t e) { return Integer(1) << static_cast<unsigned>(e); }

struct ModMonomial {
    std::int64_t coeff;
    Exponents exps;
};

// Rank of a small matrix over F_p, destroying the input.
int rank_mod_p(std::vector<std::vector<std::int64_t>>& m, std::int64_t p) {
    const std::size_t rows = m.size();
    const std::size_t cols = rows ? m[0].size() : 0;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t pivot = rank;
        while (pivot < rows && m[pivot][c] == 0) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[pivot], m[rank]);
        // inverse by Fermat
        std::int64_t inv = 1, base = m[rank][c], e = p - 2;
        while (e > 0) {
            if (e & 1) inv = inv * base % p;
            base = base * base % p;
            e >>= 1;
        }
        for (std::size_t r = rank + 1; r < rows; ++r) {
            if (m[r][c] == 0) continue;
            const std::int64_t f = m[r][c] * inv % p;
            for (std::size_t k = c; k < cols; ++k) m[r][k] = mod_floor(m[r][k] - f * m[rank][k], p);
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

}  // namespace

bool is_prime(std::int64_t p) {
    if (p < 2) return false;
    for (std::int64_t k = 2; k * k <= p; ++k) {
        if (p % k == 0) return false;
    }
    return true;
}

std::vector<std::int64_t> primes_up_to(std::int64_t limit) {
    std::vector<std::int64_t> out;
    for (std::int64_t p = 2; p <= limit; ++p) {
        if (is_prime(p)) out.push_back(p);
    }
    return out;
}

std::uint64_t count_rank_deficient(const FormSystem& sys, int d, std::int64_t p) {
    if (!is_prime(p) || p > (std::int64_t{1} << 30)) throw InputError("locus counting needs a prime below 2^30");
    const auto forms = sys.forms_of_degree(d);
    if (forms.empty()) throw InputError("degree " + std::to_string(d) + " has no forms in this system");
    const std::size_t n = sys.n();
    const int rd = static_cast<int>(forms.size());

    // grad[f][j] = partial derivative of form f in x_j, coefficients mod p
    std::vector<std::vector<std::vector<ModMonomial>>> grad(forms.size(), std::vector<std::vector<ModMonomial>>(n));
    for (std::size_t f = 0; f < forms.size(); ++f) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto partial = forms[f].polynomial().derivative(j);
            for (const auto& m : partial.terms()) {
                Integer c = m.coeff % p;
                if (c < 0) c += p;
                if (c != 0) grad[f][j].push_back({static_cast<std::int64_t>(c), m.exps});
            }
        }
    }

    const int maxe = std::max(d - 1, 0);
    std::vector<std::int64_t> x(n, 0);
    std::vector<std::vector<std::int64_t>> powers(n, std::vector<std::int64_t>(maxe + 1, 0));
    auto refresh = [&](std::size_t i) {
        powers[i][0] = 1;
        for (int e = 1; e <= maxe; ++e) powers[i][e] = powers[i][e - 1] * x[i] % p;
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    std::vector<std::vector<std::int64_t>> mat(rd, std::vector<std::int64_t>(n));
    std::uint64_t count = 0;
    while (true) {
        for (int f = 0; f < rd; ++f) {
            for (std::size_t j = 0; j < n; ++j) {
                std::int64_t v = 0;
                for (const auto& m : grad[f][j]) {
                    std::int64_t term = m.coeff;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (m.exps[i]) term = term * powers[i][m.exps[i]] % p;
                    }
                    v = (v + term) % p;
                }
                mat[f][j] = v;
            }
        }
        if (rank_mod_p(mat, p) < rd) ++count;

        std::size_t i = 0;
        while (i < n && ++x[i] == p) {
            x[i] = 0;
            refresh(i);
            ++i;
        }
        if (i == n) break;
        refresh(i);
    }
    return count;
}

SingularLocusEstimate estimate_Bd(const FormSystem& sys, int d, std::span<const std::int64_t> primes,
                                  std::uint64_t budget, std::optional<std::int64_t> override_value) {
    if (sys.profile().count(d) == 0) throw InputError("degree " + std::to_string(d) + " has no forms in this system");
    const auto n = static_cast<std::int64_t>(sys.n());
    SingularLocusEstimate out;
    out.degree = d;

    if (override_value) {
        if (*override_value < 0 || *override_value > n) {
            throw InputError("override for B_" + std::to_string(d) + " must lie in [0, n]");
        }
        out.estimate = *override_value;
        out.fitted_exponent = static_cast<double>(*override_value);
        out.override_used = true;
        out.confident = true;
        out.excluded = out.estimate == n;
        return out;
    }
    if (primes.empty()) throw InputError("B_d estimation needs at least one prime");

    for (auto p : primes) {
        const double size = std::pow(static_cast<double>(p), static_cast<double>(n));
        if (size > static_cast<double>(budget)) {
            throw BudgetError("counting the singular locus of degree " + std::to_string(d) + " mod " +
                              std::to_string(p) + " needs " + std::to_string(static_cast<long double>(size)) +
                              " points, above the budget; provide an override for B_" + std::to_string(d));
        }
    }

    std::vector<double> xs, ys;
    for (auto p : primes) {
        const auto c = count_rank_deficient(sys, d, p);
        out.counts.push_back({p, c});
        if (c > 0) {
            xs.push_back(std::log(static_cast<double>(p)));
            ys.push_back(std::log(static_cast<double>(c)));
        }
    }

    if (xs.empty()) {
        out.empty_locus = true;
        out.confident = true;
        out.estimate = 0;
        return out;
    }

    auto clamp_round = [&](double v) { return std::clamp<std::int64_t>(std::llround(v), 0, n); };

    if (xs.size() == 1) {
        out.fitted_exponent = ys[0] / xs[0];
        out.estimate = clamp_round(out.fitted_exponent);
        out.confident = false;
    } else {
        double mx = 0, my = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            mx += xs[k];
            my += ys[k];
        }
        mx /= static_cast<double>(xs.size());
        my /= static_cast<double>(xs.size());
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxy += (xs[k] - mx) * (ys[k] - my);
            sxx += (xs[k] - mx) * (xs[k] - mx);
        }
        out.fitted_exponent = sxx > 0 ? sxy / sxx : ys[0] / xs[0];
        out.estimate = clamp_round(out.fitted_exponent);
        out.confident = true;
        for (std::size_t k = 1; k < xs.size(); ++k) {
            if (xs[k] == xs[k - 1]) continue;
            const double slope = (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1]);
            if (clamp_round(slope) != out.estimate) out.confident = false;
        }
    }
    out.excluded = out.estimate == n;
    return out;
}

std::int64_t curly_D(const DegreeProfile& profile, int j) {
    if (j < 0 || j > profile.max_degree()) throw InputError("D_j needs 0 <= j <= D");
    return profile.weight(j);
}

std::vector<Rational> s_values(const DegreeProfile& profile, const SingularDims& B, std::int64_t n) {
    const int D = profile.max_degree();
    for (int k : profile.degrees()) {
        auto it = B.find(k);
        const std::int64_t bk = it == B.end() ? 0 : it->second;
        if (n <= bk) throw InputError("n must exceed B_" + std::to_string(k));
    }
    std::vector<Rational> s(D + 2, Rational(0));
    for (int d = D; d >= 1; --d) {
        s[d] = s[d + 1];
        const int rk = profile.count(d);
        if (rk == 0) continue;
        auto it = B.find(d);
        const std::int64_t bk = it == B.end() ? 0 : it->second;
        s[d] += Rational(pow2(d - 1) * (d - 1) * rk, Integer(n - bk));
    }
    return s;
}

N0Values n0_values(const DegreeProfile& profile) {
    const int D = profile.max_degree();
    N0Values out;
    out.t.assign(D + 2, Integer(0));
    for (int d = D; d >= 1; --d) out.t[d] = out.t[d + 1] + pow2(d - 1) * (d - 1) * profile.count(d);

    auto n0_at = [&](int d) {
        Integer v = out.t[d + 1];
        if (d >= 1) v += profile.weight(d) * (pow2(d - 1) + out.t[d + 1]);
        for (int j = d + 1; j <= D; ++j) v += out.t[j] * profile.count(j);
        return v;
    };
    std::vector<int> ds{0};
    for (int d : profile.degrees()) ds.push_back(d);
    out.n0 = 0;
    for (int d : ds) {
        out.n0_of_d[d] = n0_at(d);
        out.n0 = std::max(out.n0, out.n0_of_d[d]);
    }
    return out;
}

BirchCheck check_birch(std::int64_t n, std::int64_t B, std::int64_t R, int D) {
    BirchCheck out;
    out.threshold = Integer(R) * (R + 1) * (D - 1) * pow2(D - 1);
    out.slack = Integer(n) - B - out.threshold;
    out.pass = out.slack > 0;
    return out;
}

MainCondition check_theorem_main(const DegreeProfile& profile, std::int64_t n, const SingularDims& B) {
    const auto s = s_values(profile, B, n);
    const int D = profile.max_degree();
    MainCondition out;
    out.pass = true;

    std::vector<int> ds{0};
    for (int d : profile.degrees()) ds.push_back(d);
    for (int d : ds) {
        Rational lhs = s[d + 1];
        if (d >= 1) {
            auto it = B.find(d);
            const std::int64_t bd = it == B.end() ? 0 : it->second;
            lhs += Rational(profile.weight(d)) * (Rational(pow2(d - 1), Integer(n - bd)) + s[d + 1]);
        }
        for (int j = d + 1; j <= D; ++j) lhs += s[j] * profile.count(j);
        if (lhs >= 1) out.pass = false;
        out.margins[d] = lhs;
    }
    return out;
}

CrudeBounds check_crude_bounds(const DegreeProfile& profile) {
    CrudeBounds out;
    out.n0 = n0_values(profile).n0;
    const std::int64_t w = profile.total_weight();
    out.lhs = out.n0 + profile.total_forms() - 1;
    out.quadratic_bound = Integer(w) * w * pow2(profile.max_degree() - 1);
    out.exponential_bound = Integer(w - 1) * pow2(w);
    out.quadratic_holds = out.lhs <= out.quadratic_bound;
    out.exponential_holds = out.lhs <= out.exponential_bound;
    return out;
}

Integer variety_degree(const DegreeProfile& profile) {
    Integer deg = 1;
    for (int d = 1; d <= profile.max_degree(); ++d) deg *= ipow(Integer(d), static_cast<unsigned>(profile.count(d)));
    return deg;
}

ThresholdPredicates threshold_predicates(const Integer& dim, const Integer& deg) {
    ThresholdPredicates out;
    // 2^deg outgrows any representable dimension long before deg reaches 2^16
    if (deg < 65536) {
        const auto e = static_cast<unsigned>(deg);
        out.smooth_theorem = dim >= (deg - 1) * (Integer(1) << e) - 1;
    } else {
        out.smooth_theorem = false;
    }
    out.conjecture = dim >= 2 * deg - 1;
    out.hartshorne_form = dim >= 2 * deg - 1;
    return out;
}

std::map<int, bool> check_lemma_improve(const SingularDims& B, const DegreeProfile& profile) {
    std::map<int, bool> out;
    for (int d : profile.degrees()) {
        std::int64_t tail = 0;
        for (int e = d; e <= profile.max_degree(); ++e) tail += profile.count(e);
        auto it = B.find(d);
        const std::int64_t bd = it == B.end() ? 0 : it->second;
        out[d] = bd <= tail - 1;
    }
    return out;
}

InvariantReport compute_invariant_report(const DegreeProfile& profile, std::int64_t n, const SingularDims& B) {
    InvariantReport rep;
    rep.n = n;
    for (int d : profile.degrees()) {
        auto it = B.find(d);
        rep.B[d] = it == B.end() ? 0 : it->second;
        rep.B_max = std::max(rep.B_max, rep.B[d]);
    }
    for (int j = 0; j <= profile.max_degree(); ++j) rep.curly.push_back(curly_D(profile, j));
    rep.s = s_values(profile, rep.B, n);
    rep.n0 = n0_values(profile);
    rep.main = check_theorem_main(profile, n, rep.B);
    rep.corollary_pass = Integer(n) > rep.B_max + rep.n0.n0;
    if (profile.single_degree()) {
        rep.birch = check_birch(n, rep.B_max, profile.total_forms(), profile.max_degree());
    }
    rep.crude = check_crude_bounds(profile);
    rep.lemma_improve = check_lemma_improve(rep.B, profile);
    rep.degree = variety_degree(profile);
    rep.thresholds = threshold_predicates(Integer(n - 1 - profile.total_forms()), rep.degree);
    return rep;
}

namespace {

void extend_profiles(std::vector<int>& counts, int degree, std::int64_t remaining, std::vector<DegreeProfile>& out) {
    if (degree == 0) {
        if (std::any_of(counts.begin(), counts.end(), [](int c) { return c > 0; })) out.emplace_back(counts);
        return;
    }
    for (std::int64_t r = 0; r * degree <= remaining; ++r) {
        counts[degree - 1] = static_cast<int>(r);
        extend_profiles(counts, degree - 1, remaining - r * degree, out);
    }
    counts[degree - 1] = 0;
}

}  // namespace

std::vector<DegreeProfile> all_profiles(std::int64_t max_weight) {
    std::vector<DegreeProfile> out;
    for (std::int64_t D = 1; D <= max_weight; ++D) {
        std::vector<int> counts(D, 0);
        for (std::int64_t rD = 1; rD * D <= max_weight; ++rD) {
            counts[D - 1] = static_cast<int>(rD);
            extend_profiles(counts, static_cast<int>(D) - 1, max_weight - rD * D, out);
        }
    }
    return out;
}

}  // namespace cm
