#include "cm/counting.hpp"

#include "scan.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cm {

std::string to_string(CountStrategy s) { return s == CountStrategy::full ? "full" : "solve-last"; }

CountStrategy parse_strategy(const std::string& name) {
    if (name == "full") return CountStrategy::full;
    if (name == "solve-last") return CountStrategy::solve_last;
    throw InputError("unknown counting strategy '" + name + "' (expected full or solve-last)");
}

std::vector<std::int64_t> Progression::values() const {
    std::vector<std::int64_t> out;
    out.reserve(size);
    for (std::uint64_t k = 0; k < size; ++k) out.push_back(first + static_cast<std::int64_t>(k) * step);
    return out;
}

Progression coordinate_progression(double P, const Interval& side, std::int64_t m0, std::int64_t modulus) {
    const double lo_real = std::ceil(P * side.lo);
    const double hi_real = std::floor(P * side.hi);
    constexpr double limit = 9.0e15;
    if (std::fabs(lo_real) > limit || std::fabs(hi_real) > limit) throw BudgetError("box side too large to scan");
    const auto lo = static_cast<std::int64_t>(lo_real);
    const auto hi = static_cast<std::int64_t>(hi_real);
    Progression pr;
    pr.step = modulus;
    pr.first = lo + mod_floor(m0 - lo, modulus);
    pr.size = pr.first > hi ? 0 : static_cast<std::uint64_t>((hi - pr.first) / modulus + 1);
    return pr;
}

bool supports_solve_last(const FormSystem& sys) { return detail::make_solve_last_plan(sys).has_value(); }

double scan_size(const FormSystem& sys, double P, CountStrategy strategy) {
    const std::size_t scanned = strategy == CountStrategy::full ? sys.n() : sys.n() - 1;
    double size = 1.0;
    for (std::size_t i = 0; i < scanned; ++i) {
        size *= static_cast<double>(coordinate_progression(P, sys.box()[i], sys.m0()[i], sys.modulus()).size);
    }
    return size;
}

namespace {

std::string format_size(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

CountReport count_solutions(const FormSystem& sys, double P, const CountOptions& options) {
    if (!(P > 0) || !std::isfinite(P)) throw InputError("P must be a positive real");
    const auto start = std::chrono::steady_clock::now();

    std::optional<detail::SolveLastPlan> plan;
    if (options.strategy == CountStrategy::solve_last) {
        plan = detail::make_solve_last_plan(sys);
        if (!plan) {
            throw InputError("solve-last needs the last variable in exactly one form, as a single term c*x_n^d");
        }
    }

    const double size = scan_size(sys, P, options.strategy);
    if (size > options.budget) {
        throw BudgetError("scan of " + format_size(size) + " points exceeds the budget of " +
                          format_size(options.budget));
    }

    std::vector<Progression> sides;
    for (std::size_t i = 0; i < sys.n(); ++i) {
        sides.push_back(coordinate_progression(P, sys.box()[i], sys.m0()[i], sys.modulus()));
    }
    Integer X = 0;
    for (const auto& s : sides) {
        if (s.size == 0) continue;
        const std::int64_t last = s.first + static_cast<std::int64_t>(s.size - 1) * s.step;
        X = std::max({X, Integer(std::abs(s.first)), Integer(std::abs(last))});
    }

    std::vector<Polynomial> polys;
    std::vector<std::vector<std::int64_t>> coords;
    if (plan) {
        polys.push_back(plan->rest);
        polys.insert(polys.end(), plan->others.begin(), plan->others.end());
        for (std::size_t i = 0; i + 1 < sys.n(); ++i) coords.push_back(sides[i].values());
    } else {
        for (const auto& f : sys.forms()) polys.push_back(f.polynomial());
        for (const auto& s : sides) coords.push_back(s.values());
    }
    Integer bound = 0;
    for (const auto& p : polys) bound = std::max(bound, detail::magnitude_bound(p, X));
    if (plan) bound = std::max(bound, abs(plan->coeff) * ipow(X, static_cast<unsigned>(plan->degree)));

    CountReport report;
    report.P = P;
    report.strategy = options.strategy;
    report.points_scanned = static_cast<std::uint64_t>(size);

    report.count = detail::with_accumulator(bound, [&](auto tag) -> std::uint64_t {
        using Acc = typename decltype(tag)::type;
        detail::Scanner<Acc> scanner(polys, std::move(coords));
        const std::size_t np = polys.size();

        auto chunks = detail::parallel_chunks<std::uint64_t>(
            options.threads, scanner.units(), [&](unsigned, std::size_t begin, std::size_t end) {
                std::uint64_t count = 0;
                if (!plan) {
                    scanner.run(begin, end, [&](const Acc* v) {
                        for (std::size_t p = 0; p < np; ++p) {
                            if (v[p] != 0) return;
                        }
                        ++count;
                    });
                    return count;
                }
                const Acc c = detail::to_acc<Acc>(plan->coeff);
                const auto& last = sides.back();
                const Acc lo = static_cast<Acc>(last.first);
                const Acc hi = static_cast<Acc>(last.first + static_cast<std::int64_t>(last.size) * last.step - last.step);
                const Acc step = static_cast<Acc>(last.step);
                const bool empty = last.size == 0;
                scanner.run(begin, end, [&](const Acc* v) {
                    if (empty) return;
                    for (std::size_t p = 1; p < np; ++p) {
                        if (v[p] != 0) return;
                    }
                    Acc target = -v[0];
                    if (target % c != 0) return;
                    target /= c;
                    detail::for_each_integer_root(target, plan->degree, [&](const Acc& x) {
                        if (x < lo || x > hi) return;
                        if ((x - lo) % step != 0) return;
                        ++count;
                    });
                });
                return count;
            });
        return std::accumulate(chunks.begin(), chunks.end(), std::uint64_t{0});
    });

    report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double empirical_ratio(const CountReport& report, double prediction) {
    if (!(prediction > 0)) throw InputError("prediction must be positive");
    return static_cast<double>(report.count) / prediction;
}

}  // namespace cm
