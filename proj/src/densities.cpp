#include "cm/densities.hpp"

#include "scan.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace cm {

namespace {

template <class Acc>
std::int64_t reduce(const Acc& v, std::int64_t q) {
    Acc r = v % static_cast<Acc>(q);
    if (r < 0) r += static_cast<Acc>(q);
    return static_cast<std::int64_t>(static_cast<long long>(r));
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// What to scan for residues mod q: either every coordinate, or the first
// n-1 coordinates plus a tabulated last coordinate.
struct ResiduePlan {
    std::int64_t q = 1;
    std::vector<Polynomial> polys;
    std::vector<std::size_t> form_of_poly;  // system index of each scanned polynomial
    std::vector<std::vector<std::int64_t>> coords;
    std::optional<detail::SolveLastPlan> peel;
    std::vector<std::uint64_t> last_distribution;  // #{t : c (m0_n + M t)^d = v mod q}
    Integer bound;
};

ResiduePlan make_residue_plan(const FormSystem& sys, std::int64_t q) {
    if (q < 1) throw InputError("modulus q must be positive");
    ResiduePlan plan;
    plan.q = q;
    plan.peel = detail::make_solve_last_plan(sys);
    const std::size_t n = sys.n();
    const std::size_t scanned = plan.peel ? n - 1 : n;
    for (std::size_t i = 0; i < scanned; ++i) {
        std::vector<std::int64_t> vals(static_cast<std::size_t>(q));
        for (std::int64_t y = 0; y < q; ++y) vals[y] = mod_floor((sys.m0()[i] % q) + (sys.modulus() % q) * y % q, q);
        plan.coords.push_back(std::move(vals));
    }
    if (plan.peel) {
        plan.polys.push_back(plan.peel->rest);
        plan.form_of_poly.push_back(plan.peel->form_index);
        std::size_t other = 0;
        for (std::size_t f = 0; f < sys.forms().size(); ++f) {
            if (f == plan.peel->form_index) continue;
            plan.polys.push_back(plan.peel->others[other++]);
            plan.form_of_poly.push_back(f);
        }
        plan.last_distribution.assign(static_cast<std::size_t>(q), 0);
        const Integer c = plan.peel->coeff;
        for (std::int64_t t = 0; t < q; ++t) {
            const Integer x = (Integer(sys.m0().back()) + Integer(sys.modulus()) * t) % q;
            Integer v = (c * ipow(x, static_cast<unsigned>(plan.peel->degree))) % q;
            if (v < 0) v += q;
            plan.last_distribution[static_cast<std::size_t>(v)] += 1;
        }
    } else {
        for (std::size_t f = 0; f < sys.forms().size(); ++f) {
            plan.polys.push_back(sys.forms()[f].polynomial());
            plan.form_of_poly.push_back(f);
        }
    }
    plan.bound = 0;
    for (const auto& p : plan.polys) plan.bound = std::max(plan.bound, detail::magnitude_bound(p, Integer(q)));
    return plan;
}

void check_budget(const FormSystem& sys, std::int64_t q, const ResidueOptions& options) {
    const double size = residue_scan_size(sys, q);
    if (size > options.budget) {
        throw BudgetError("residue count mod " + std::to_string(q) + " scans " + fmt(size) +
                          " tuples, above the budget of " + fmt(options.budget));
    }
}

}  // namespace

double residue_scan_size(const FormSystem& sys, std::int64_t q) {
    const auto dims = detail::make_solve_last_plan(sys) ? sys.n() - 1 : sys.n();
    return std::pow(static_cast<double>(q), static_cast<double>(dims));
}

std::uint64_t count_mod(const FormSystem& sys, std::int64_t q, const ResidueOptions& options) {
    check_budget(sys, q, options);
    if (q == 1) return 1;
    auto plan = make_residue_plan(sys, q);

    return detail::with_accumulator(plan.bound, [&](auto tag) -> std::uint64_t {
        using Acc = typename decltype(tag)::type;
        detail::Scanner<Acc> scanner(plan.polys, plan.coords);
        const std::size_t np = plan.polys.size();
        auto chunks = detail::parallel_chunks<std::uint64_t>(
            options.threads, scanner.units(), [&](unsigned, std::size_t begin, std::size_t end) {
                std::uint64_t count = 0;
                if (!plan.peel) {
                    scanner.run(begin, end, [&](const Acc* v) {
                        for (std::size_t p = 0; p < np; ++p) {
                            if (v[p] % static_cast<Acc>(q) != 0) return;
                        }
                        ++count;
                    });
                } else {
                    scanner.run(begin, end, [&](const Acc* v) {
                        for (std::size_t p = 1; p < np; ++p) {
                            if (v[p] % static_cast<Acc>(q) != 0) return;
                        }
                        count += plan.last_distribution[static_cast<std::size_t>(mod_floor(-reduce(v[0], q), q))];
                    });
                }
                return count;
            });
        return std::accumulate(chunks.begin(), chunks.end(), std::uint64_t{0});
    });
}

std::vector<std::uint64_t> residue_histogram(const FormSystem& sys, std::int64_t q, const ResidueOptions& options) {
    check_budget(sys, q, options);
    const auto R = static_cast<std::size_t>(sys.total_forms());
    const double cells = std::pow(static_cast<double>(q), static_cast<double>(R));
    if (cells > static_cast<double>(1 << 24)) {
        throw BudgetError("value histogram mod " + std::to_string(q) + " needs " + fmt(cells) + " cells");
    }
    const auto size = static_cast<std::size_t>(cells);
    auto plan = make_residue_plan(sys, q);
    std::vector<std::size_t> stride(R, 1);
    for (std::size_t f = 1; f < R; ++f) stride[f] = stride[f - 1] * static_cast<std::size_t>(q);

    auto partial = detail::with_accumulator(plan.bound, [&](auto tag) {
        using Acc = typename decltype(tag)::type;
        detail::Scanner<Acc> scanner(plan.polys, plan.coords);
        const std::size_t np = plan.polys.size();
        auto chunks = detail::parallel_chunks<std::vector<std::uint64_t>>(
            options.threads, scanner.units(), [&](unsigned, std::size_t begin, std::size_t end) {
                std::vector<std::uint64_t> h(size, 0);
                scanner.run(begin, end, [&](const Acc* v) {
                    std::size_t idx = 0;
                    for (std::size_t p = 0; p < np; ++p) {
                        idx += static_cast<std::size_t>(reduce(v[p], q)) * stride[plan.form_of_poly[p]];
                    }
                    h[idx] += 1;
                });
                return h;
            });
        std::vector<std::uint64_t> total(size, 0);
        for (const auto& h : chunks) {
            for (std::size_t i = 0; i < size; ++i) total[i] += h[i];
        }
        return total;
    });
    if (!plan.peel) return partial;

    // spread the peeled form's axis by the tabulated last-coordinate values
    const std::size_t axis = stride[plan.peel->form_index];
    std::vector<std::uint64_t> out(size, 0);
    for (std::size_t idx = 0; idx < size; ++idx) {
        if (partial[idx] == 0) continue;
        const auto digit = static_cast<std::int64_t>((idx / axis) % static_cast<std::size_t>(q));
        const std::size_t base = idx - static_cast<std::size_t>(digit) * axis;
        for (std::int64_t v = 0; v < q; ++v) {
            const auto c = plan.last_distribution[static_cast<std::size_t>(v)];
            if (c == 0) continue;
            out[base + static_cast<std::size_t>((digit + v) % q) * axis] += partial[idx] * c;
        }
    }
    return out;
}

double LocalDensity::value() const {
    if (levels.empty()) return std::nan("");
    return static_cast<double>(levels.back());
}

LocalDensity sigma_p(const FormSystem& sys, std::int64_t p, int k_max, const ResidueOptions& options) {
    if (!is_prime(p)) throw InputError(std::to_string(p) + " is not prime");
    if (k_max < 1) throw InputError("k_max must be at least 1");
    LocalDensity out;
    out.prime = p;
    const std::int64_t excess = static_cast<std::int64_t>(sys.n()) - sys.total_forms();
    std::int64_t q = 1;
    for (int k = 1; k <= k_max; ++k) {
        if (q > std::numeric_limits<std::int64_t>::max() / p) {
            out.budget_limited = true;
            break;
        }
        q *= p;
        if (residue_scan_size(sys, q) > options.budget) {
            out.budget_limited = true;
            break;
        }
        const Integer count = count_mod(sys, q, options);
        const Integer scale = ipow(Integer(p), static_cast<unsigned>(std::llabs(excess) * k));
        out.levels.push_back(excess >= 0 ? Rational(count, scale) : Rational(count * scale));
    }
    const auto& L = out.levels;
    out.stabilized = L.size() >= 2 && L[L.size() - 1] == L[L.size() - 2];
    if (L.size() >= 3) {
        const Rational step1 = L[L.size() - 2] - L[L.size() - 3];
        const Rational step2 = L[L.size() - 1] - L[L.size() - 2];
        out.divergent = step1 > 0 && step1 == step2;
    }
    return out;
}

EulerProduct euler_product(const FormSystem& sys, std::int64_t p_max, int k_max, const ResidueOptions& options) {
    EulerProduct out;
    out.p_max = p_max;
    for (auto p : primes_up_to(p_max)) {
        auto local = sigma_p(sys, p, k_max, options);
        if (local.divergent) {
            throw ConvergenceError("sigma_p does not converge at p = " + std::to_string(p) +
                                   " (levels grow by a constant step)");
        }
        if (local.levels.empty()) {
            throw BudgetError("no level of sigma_p fits the budget at p = " + std::to_string(p));
        }
        if (!local.stabilized) {
            out.warnings.push_back("sigma_p at p = " + std::to_string(p) + " not stabilized after " +
                                   std::to_string(local.levels.size()) + " level(s)");
        }
        out.value *= local.value();
        out.factors.push_back(std::move(local));
    }
    return out;
}

namespace {

struct DoubleTerm {
    double coeff;
    Exponents exps;
};

struct LevelSums {
    std::uint64_t hits = 0;
    double mean_sum = 0;  // sum over strata of the stratum mean
    double var_sum = 0;   // sum over strata of (sample variance / m)
};

struct StreamResult {
    std::vector<LevelSums> levels;  // one per eps, then the extrapolated combination
};

}  // namespace

SigmaInfinity sigma_infinity(const FormSystem& sys, std::uint64_t samples, const std::vector<double>& eps_schedule,
                             std::uint64_t seed, unsigned threads) {
    if (samples < 10000) throw InputError("sigma_infinity needs at least 10^4 samples");
    if (eps_schedule.size() < 2) throw InputError("eps schedule needs at least two values");
    for (std::size_t j = 0; j < eps_schedule.size(); ++j) {
        if (!(eps_schedule[j] > 0)) throw InputError("eps values must be positive");
        if (j > 0 && !(eps_schedule[j] < eps_schedule[j - 1])) {
            throw InputError("eps schedule must be strictly decreasing");
        }
    }
    const std::size_t n = sys.n();
    const int R = sys.total_forms();
    const std::size_t L = eps_schedule.size();

    std::vector<std::vector<DoubleTerm>> forms;
    int max_exp = 0;
    for (const auto& f : sys.forms()) {
        std::vector<DoubleTerm> terms;
        for (const auto& m : f.monomials()) {
            terms.push_back({static_cast<double>(m.coeff), m.exps});
            for (int e : m.exps) max_exp = std::max(max_exp, e);
        }
        forms.push_back(std::move(terms));
    }

    // k strata per axis with at least two points per stratum
    std::uint64_t k = 1;
    auto strata_for = [&](std::uint64_t kk) {
        double c = 1;
        for (std::size_t i = 0; i < n; ++i) c *= static_cast<double>(kk);
        return c;
    };
    while (2.0 * strata_for(k + 1) <= static_cast<double>(samples)) ++k;
    const auto K = static_cast<std::uint64_t>(strata_for(k));
    const std::uint64_t m = samples / K;

    // weights turning indicators into density estimates
    std::vector<double> weight(L);
    for (std::size_t j = 0; j < L; ++j) weight[j] = 1.0 / std::pow(2.0 * eps_schedule[j], R);
    const double ea = eps_schedule[L - 2], eb = eps_schedule[L - 1];
    const double alpha = ea / (ea - eb), beta = -eb / (ea - eb);  // v0 = alpha v_b + beta v_a

    const unsigned streams = static_cast<unsigned>(std::min<std::uint64_t>(kMonteCarloStreams, K));
    auto per_stream = [&](unsigned s) {
        StreamResult res;
        res.levels.assign(L + 1, {});
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(s), 0x5eedu};
        std::mt19937_64 rng(seq);
        auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

        const std::uint64_t h_begin = K * s / streams, h_end = K * (s + 1) / streams;
        std::vector<std::uint64_t> digit(n);
        std::vector<double> x(n);
        std::vector<std::vector<double>> pw(n, std::vector<double>(max_exp + 1));
        std::vector<double> sum(L + 1), sumsq(L + 1);
        std::vector<char> inside(L);
        for (std::uint64_t h = h_begin; h < h_end; ++h) {
            std::uint64_t rem = h;
            for (std::size_t i = 0; i < n; ++i) {
                digit[i] = rem % k;
                rem /= k;
            }
            std::fill(sum.begin(), sum.end(), 0.0);
            std::fill(sumsq.begin(), sumsq.end(), 0.0);
            for (std::uint64_t r = 0; r < m; ++r) {
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& side = sys.box()[i];
                    x[i] = side.lo + (side.hi - side.lo) * (static_cast<double>(digit[i]) + uniform()) /
                                         static_cast<double>(k);
                    pw[i][0] = 1.0;
                    for (int e = 1; e <= max_exp; ++e) pw[i][e] = pw[i][e - 1] * x[i];
                }
                double worst = 0;
                for (const auto& terms : forms) {
                    double v = 0;
                    for (const auto& t : terms) {
                        double term = t.coeff;
                        for (std::size_t i = 0; i < n; ++i) {
                            if (t.exps[i]) term *= pw[i][t.exps[i]];
                        }
                        v += term;
                    }
                    worst = std::max(worst, std::fabs(v));
                }
                for (std::size_t j = 0; j < L; ++j) {
                    inside[j] = worst <= eps_schedule[j];
                    const double y = inside[j] ? weight[j] : 0.0;
                    sum[j] += y;
                    sumsq[j] += y * y;
                    res.levels[j].hits += inside[j] ? 1 : 0;
                }
                const double comb = alpha * (inside[L - 1] ? weight[L - 1] : 0.0) + beta * (inside[L - 2] ? weight[L - 2] : 0.0);
                sum[L] += comb;
                sumsq[L] += comb * comb;
            }
            const double md = static_cast<double>(m);
            for (std::size_t j = 0; j <= L; ++j) {
                const double mean = sum[j] / md;
                const double var = m > 1 ? std::max(0.0, (sumsq[j] - md * mean * mean) / (md - 1)) : 0.0;
                res.levels[j].mean_sum += mean;
                res.levels[j].var_sum += var / md;
            }
        }
        return res;
    };

    auto results = detail::parallel_chunks<std::vector<StreamResult>>(
        threads, streams, [&](unsigned, std::size_t begin, std::size_t end) {
            std::vector<StreamResult> out;
            for (std::size_t s = begin; s < end; ++s) out.push_back(per_stream(static_cast<unsigned>(s)));
            return out;
        });

    std::vector<LevelSums> total(L + 1);
    for (const auto& chunk : results) {
        for (const auto& res : chunk) {
            for (std::size_t j = 0; j <= L; ++j) {
                total[j].hits += res.levels[j].hits;
                total[j].mean_sum += res.levels[j].mean_sum;
                total[j].var_sum += res.levels[j].var_sum;
            }
        }
    }

    const double scale = sys.box_volume() / std::pow(static_cast<double>(sys.modulus()), static_cast<double>(n));
    const double Kd = static_cast<double>(K);
    SigmaInfinity out;
    out.samples = K * m;
    out.seed = seed;
    out.strata_per_axis = k;
    for (std::size_t j = 0; j < L; ++j) {
        out.levels.push_back({eps_schedule[j], total[j].hits, scale * total[j].mean_sum / Kd,
                              scale * std::sqrt(total[j].var_sum) / Kd});
    }
    bool any_hit = false;
    for (std::size_t j = 0; j < L; ++j) any_hit = any_hit || total[j].hits > 0;
    if (!any_hit) {
        out.no_hits = true;
        out.estimate = 0;
        // rule of three at the smallest eps
        out.std_error = scale * 3.0 * weight[L - 1] / static_cast<double>(out.samples);
        return out;
    }
    out.estimate = scale * total[L].mean_sum / Kd;
    out.std_error = scale * std::sqrt(total[L].var_sum) / Kd;
    return out;
}

double predict_main_term(double sigma_inf, double euler, std::int64_t n, std::int64_t weight, double P) {
    if (!std::isfinite(sigma_inf) || !std::isfinite(euler) || !std::isfinite(P)) {
        throw InputError("main term inputs must be finite");
    }
    return sigma_inf * euler * std::pow(P, static_cast<double>(n - weight));
}

}  // namespace cm
