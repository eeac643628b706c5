#include "cm/expsums.hpp"

#include "cm/counting.hpp"
#include "cm/densities.hpp"
#include "scan.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace cm {

FrequencyVector::FrequencyVector(const FormSystem& sys, std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(sys.total_forms())) {
        throw InputError("frequency vector has " + std::to_string(values_.size()) + " entries, the system has " +
                         std::to_string(sys.total_forms()) + " forms");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InputError("frequency entries must be finite");
    }
}

FrequencyVector FrequencyVector::zero(const FormSystem& sys) {
    return FrequencyVector(sys, std::vector<double>(static_cast<std::size_t>(sys.total_forms()), 0.0));
}

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

template <class Acc>
long double to_long_double(const Acc& v) {
    if constexpr (std::is_same_v<Acc, Integer>) {
        return v.template convert_to<long double>();
    } else {
        return static_cast<long double>(v);
    }
}

std::vector<Complex> unit_roots(std::int64_t q) {
    std::vector<Complex> table(static_cast<std::size_t>(q));
    for (std::int64_t k = 0; k < q; ++k) {
        const double t = two_pi * static_cast<double>(k) / static_cast<double>(q);
        table[static_cast<std::size_t>(k)] = {std::cos(t), std::sin(t)};
    }
    return table;
}

// sum over histogram cells of e_q(sum_f a_f v_f)
Complex histogram_sum(const std::vector<std::uint64_t>& hist, std::int64_t q, const std::vector<std::int64_t>& a,
                      const std::vector<Complex>& roots) {
    const std::size_t R = a.size();
    std::vector<std::int64_t> reduced(R);
    for (std::size_t f = 0; f < R; ++f) reduced[f] = mod_floor(a[f], q);
    Complex total = 0;
    for (std::size_t idx = 0; idx < hist.size(); ++idx) {
        if (hist[idx] == 0) continue;
        std::size_t rem = idx;
        std::int64_t phase = 0;
        for (std::size_t f = 0; f < R; ++f) {
            const auto v = static_cast<std::int64_t>(rem % static_cast<std::size_t>(q));
            rem /= static_cast<std::size_t>(q);
            phase = (phase + reduced[f] * v) % q;
        }
        total += static_cast<double>(hist[idx]) * roots[static_cast<std::size_t>(phase)];
    }
    return total;
}

std::int64_t gcd_with(std::int64_t q, const std::vector<std::int64_t>& a) {
    std::int64_t g = q;
    for (auto v : a) g = std::gcd(g, v);
    return g;
}

}  // namespace

Complex S_alpha(const FormSystem& sys, double P, const FrequencyVector& alpha, const ExpSumOptions& options) {
    if (alpha.size() != static_cast<std::size_t>(sys.total_forms())) throw InputError("frequency vector size mismatch");
    if (!(P > 0) || !std::isfinite(P)) throw InputError("P must be a positive real");
    const double size = scan_size(sys, P, CountStrategy::full);
    if (size > options.budget) {
        throw BudgetError("exponential sum scan of " + std::to_string(static_cast<long double>(size)) +
                          " points exceeds the budget");
    }
    std::vector<std::vector<std::int64_t>> coords;
    Integer X = 0;
    for (std::size_t i = 0; i < sys.n(); ++i) {
        auto pr = coordinate_progression(P, sys.box()[i], sys.m0()[i], sys.modulus());
        auto vals = pr.values();
        for (auto v : vals) X = std::max(X, Integer(std::abs(v)));
        coords.push_back(std::move(vals));
    }
    std::vector<Polynomial> polys;
    Integer bound = 0;
    for (const auto& f : sys.forms()) {
        polys.push_back(f.polynomial());
        bound = std::max(bound, detail::magnitude_bound(f.polynomial(), X));
    }

    return detail::with_accumulator(bound, [&](auto tag) -> Complex {
        using Acc = typename decltype(tag)::type;
        detail::Scanner<Acc> scanner(polys, std::move(coords));
        const std::size_t R = polys.size();
        // one partial sum per leading coordinate, reduced in index order below
        auto chunks = detail::parallel_chunks<std::vector<Complex>>(
            options.threads, scanner.units(), [&](unsigned, std::size_t begin, std::size_t end) {
                std::vector<Complex> sums;
                for (std::size_t u = begin; u < end; ++u) {
                    Complex s = 0;
                    scanner.run(u, u + 1, [&](const Acc* v) {
                        long double phase = 0;
                        for (std::size_t f = 0; f < R; ++f) {
                            const long double t = static_cast<long double>(alpha[f]) * to_long_double(v[f]);
                            phase += t - std::floor(t);
                        }
                        phase -= std::floor(phase);
                        const double th = two_pi * static_cast<double>(phase);
                        s += Complex(std::cos(th), std::sin(th));
                    });
                    sums.push_back(s);
                }
                return sums;
            });
        Complex total = 0;
        for (const auto& chunk : chunks) {
            for (const auto& s : chunk) total += s;
        }
        return total;
    });
}

Complex complete_sum(const FormSystem& sys, std::int64_t q, const std::vector<std::int64_t>& a,
                     const ExpSumOptions& options) {
    if (q < 1) throw InputError("q must be positive");
    if (a.size() != static_cast<std::size_t>(sys.total_forms())) {
        throw InputError("a has " + std::to_string(a.size()) + " entries, the system has " +
                         std::to_string(sys.total_forms()) + " forms");
    }
    if (gcd_with(q, a) != 1) throw InputError("gcd(q, a) must be 1");
    const auto hist = residue_histogram(sys, q, {options.threads, options.budget});
    return histogram_sum(hist, q, a, unit_roots(q));
}

SingularSeries singular_series(const FormSystem& sys, std::int64_t H, const ExpSumOptions& options) {
    if (H < 1) throw InputError("H must be at least 1");
    const auto R = static_cast<std::size_t>(sys.total_forms());
    SingularSeries out;
    out.H = H;
    Complex running = 0;
    for (std::int64_t q = 1; q <= H; ++q) {
        const double work = std::pow(static_cast<double>(q), 2.0 * static_cast<double>(R));
        if (work > options.budget) {
            throw BudgetError("enumerating a mod " + std::to_string(q) + " exceeds the budget");
        }
        const auto hist = residue_histogram(sys, q, {options.threads, options.budget});
        const auto roots = unit_roots(q);
        std::vector<std::int64_t> a(R, 0);
        Complex sum = 0;
        while (true) {
            if (gcd_with(q, a) == 1) sum += histogram_sum(hist, q, a, roots);
            // lexicographic successor, first entry most significant
            std::size_t f = R;
            while (f > 0 && a[f - 1] == q - 1) a[--f] = 0;
            if (f == 0) break;
            ++a[f - 1];
        }
        SeriesTerm term;
        term.q = q;
        term.term = sum / std::pow(static_cast<double>(q), static_cast<double>(sys.n()));
        running += term.term;
        term.running = running;
        out.terms.push_back(term);
    }
    out.value = running.real();
    out.imaginary = running.imag();
    return out;
}

namespace {

// Evaluates J on midpoint grids, caching the form values of each grid.
class JEngine {
public:
    JEngine(const FormSystem& sys, QuadratureOptions options) : sys_(sys), options_(options) {
        for (const auto& f : sys.forms()) {
            std::vector<Term> terms;
            double scale = 0;
            for (const auto& m : f.monomials()) {
                terms.push_back({static_cast<double>(m.coeff), m.exps});
                double mag = std::fabs(static_cast<double>(m.coeff));
                for (std::size_t i = 0; i < m.exps.size(); ++i) {
                    const auto& side = sys.box()[i];
                    mag *= std::pow(std::max(std::fabs(side.lo), std::fabs(side.hi)), m.exps[i]);
                }
                scale += mag;
            }
            forms_.push_back(std::move(terms));
            scales_.push_back(scale);
        }
    }

    JValue operator()(const FrequencyVector& gamma) {
        // rough count of phase cycles across the box, used to pick the first grid
        double cycles = 0;
        for (std::size_t f = 0; f < forms_.size(); ++f) cycles += std::fabs(gamma[f]) * scales_[f];
        std::uint64_t N = 8;
        while (static_cast<double>(N) < 4.0 * cycles) N *= 2;
        // the cap wins over the cycle estimate; the result is then flagged as unconverged
        while (N > 1 && nodes(N) > static_cast<double>(options_.max_nodes)) N /= 2;


        JValue out;
        Complex previous_plain = 0, previous_estimate = 0;
        int level = 0;
        while (nodes(N) <= static_cast<double>(options_.max_nodes)) {
            const Complex plain = grid_sum(gamma, N);
            const Complex estimate = level == 0 ? plain : (4.0 * plain - previous_plain) / 3.0;
            out.value = estimate;
            out.points_per_axis = N;
            if (level > 0) {
                out.change = std::abs(estimate - previous_estimate);
                if (out.change < options_.tolerance) {
                    out.converged = true;
                    return out;
                }
            }
            previous_plain = plain;
            previous_estimate = estimate;
            ++level;
            N *= 2;
        }
        if (level == 0) throw BudgetError("the node cap admits no quadrature grid");
        if (level == 1) out.change = std::numeric_limits<double>::infinity();
        return out;
    }

private:
    struct Term {
        double coeff;
        Exponents exps;
    };

    double nodes(std::uint64_t N) const { return std::pow(static_cast<double>(N), static_cast<double>(sys_.n())); }

    const std::vector<double>& grid_values(std::uint64_t N) {
        auto it = cache_.find(N);
        if (it != cache_.end()) return it->second;
        const std::size_t n = sys_.n();
        const std::size_t R = forms_.size();
        int max_exp = 0;
        for (const auto& terms : forms_) {
            for (const auto& t : terms) {
                for (int e : t.exps) max_exp = std::max(max_exp, e);
            }
        }
        // pw[i][j * (max_exp + 1) + e] = (coordinate j on axis i)^e
        const std::size_t stride = static_cast<std::size_t>(max_exp) + 1;
        std::vector<std::vector<double>> pw(n, std::vector<double>(N * stride));
        for (std::size_t i = 0; i < n; ++i) {
            const auto& side = sys_.box()[i];
            const double h = (side.hi - side.lo) / static_cast<double>(N);
            for (std::uint64_t j = 0; j < N; ++j) {
                const double x = side.lo + (static_cast<double>(j) + 0.5) * h;
                double v = 1;
                for (std::size_t e = 0; e < stride; ++e) {
                    pw[i][j * stride + e] = v;
                    v *= x;
                }
            }
        }
        const auto total = static_cast<std::uint64_t>(nodes(N));
        std::vector<double> values(total * R);
        std::vector<std::uint64_t> idx(n, 0);
        for (std::uint64_t node = 0; node < total; ++node) {
            for (std::size_t f = 0; f < R; ++f) {
                double v = 0;
                for (const auto& t : forms_[f]) {
                    double term = t.coeff;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (t.exps[i]) term *= pw[i][idx[i] * stride + static_cast<std::size_t>(t.exps[i])];
                    }
                    v += term;
                }
                values[node * R + f] = v;
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (++idx[i] < N) break;
                idx[i] = 0;
            }
        }
        return cache_.emplace(N, std::move(values)).first->second;
    }

    Complex grid_sum(const FrequencyVector& gamma, std::uint64_t N) {
        const auto& values = grid_values(N);
        const std::size_t R = forms_.size();
        const std::size_t total = values.size() / std::max<std::size_t>(R, 1);
        Complex s = 0;
        for (std::size_t node = 0; node < total; ++node) {
            double phase = 0;
            for (std::size_t f = 0; f < R; ++f) phase += gamma[f] * values[node * R + f];
            s += Complex(std::cos(two_pi * phase), std::sin(two_pi * phase));
        }
        return s * (sys_.box_volume() / static_cast<double>(total));
    }

    const FormSystem& sys_;
    QuadratureOptions options_;
    std::vector<std::vector<Term>> forms_;
    std::vector<double> scales_;
    std::map<std::uint64_t, std::vector<double>> cache_;
};

}  // namespace

JValue J_gamma(const FormSystem& sys, const FrequencyVector& gamma, const QuadratureOptions& options) {
    JEngine engine(sys, options);
    return engine(gamma);
}

SingularIntegral singular_integral(const FormSystem& sys, double H, const QuadratureOptions& options) {
    if (!(H >= 0) || !std::isfinite(H)) throw InputError("H must be a finite nonnegative real");
    SingularIntegral out;
    out.H = H;
    if (H == 0) return out;

    JEngine engine(sys, options);
    const auto R = static_cast<std::size_t>(sys.total_forms());
    std::vector<double> gamma(R, 0.0);
    using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
    constexpr unsigned max_depth = 12;
    constexpr double rel_tol = 1e-6;

    // J(-g) is the conjugate of J(g), so over a symmetric domain only the real part survives
    std::function<double(std::size_t)> integrate = [&](std::size_t axis) -> double {
        if (axis == R) {
            auto j = engine(FrequencyVector(sys, gamma));
            ++out.evaluations;
            out.converged = out.converged && j.converged;
            return j.value.real();
        }
        double error = 0;
        const double v = Rule::integrate(
            [&](double t) {
                gamma[axis] = t;
                return integrate(axis + 1);
            },
            -H, H, max_depth, rel_tol, &error);
        if (error > 1e-4 * std::max(1.0, std::fabs(v))) out.converged = false;
        if (axis == 0) out.error = error;
        return v;
    };
    const double scale = std::pow(static_cast<double>(sys.modulus()), -static_cast<double>(sys.n()));
    out.value = scale * integrate(0);
    out.error *= scale;
    return out;
}

Rational default_varpi(int R) {
    if (R < 1) throw InputError("R must be positive");
    return Rational(1, 2 * R + 4);
}

void MajorArcParams::validate(const FormSystem& sys) const {
    if (!(P >= 1) || !std::isfinite(P)) throw InputError("P must be a finite real >= 1");
    if (varpi <= 0 || varpi >= Rational(1, 3)) throw InputError("varpi must lie in (0, 1/3)");
    if (q < 1) throw InputError("q must be positive");
    if (a.size() != static_cast<std::size_t>(sys.total_forms())) throw InputError("a must have one entry per form");
    if (gcd_with(q, a) != 1) throw InputError("gcd(q, a) must be 1");
}

bool major_arc_membership(const FormSystem& sys, const FrequencyVector& alpha, const MajorArcParams& params) {
    params.validate(sys);
    const double w = static_cast<double>(params.varpi);
    if (static_cast<double>(params.q) > std::pow(params.P, w)) return false;
    for (std::size_t f = 0; f < alpha.size(); ++f) {
        double dist = alpha[f] - static_cast<double>(params.a[f]) / static_cast<double>(params.q);
        dist -= std::round(dist);
        if (std::fabs(dist) > std::pow(params.P, -sys.forms()[f].degree() + w)) return false;
    }
    return true;
}

}  // namespace cm
