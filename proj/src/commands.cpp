#include "cm/commands.hpp"

#include "cm/counting.hpp"
#include "cm/densities.hpp"
#include "cm/expsums.hpp"
#include "cm/invariants.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace cm {

using nlohmann::json;

namespace {

constexpr double kDefaultCountBudget = 1e10;
constexpr double kDefaultResidueBudget = 1e9;
constexpr std::uint64_t kDefaultLocusBudget = 20000000;

json exact(const Rational& r) {
    json j = rational_json(r);
    j["type"] = "exact-rational";
    return j;
}

json exact(const Integer& v) { return exact(Rational(v)); }
json exact(std::int64_t v) { return exact(Rational(v)); }

json approx(double value, double error) {
    json j{{"type", "float"}};
    j["value"] = std::isfinite(value) ? json(value) : json(nullptr);
    j["error"] = std::isfinite(error) ? json(error) : json(nullptr);
    return j;
}

json approx(const Complex& z, double error) { return {{"re", approx(z.real(), error)}, {"im", approx(z.imag(), error)}}; }

class Stopwatch {
public:
    void mark(const std::string& step) {
        const auto now = std::chrono::steady_clock::now();
        laps_[step] = std::chrono::duration<double>(now - last_).count();
        last_ = now;
    }
    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : laps_) j[k] = v;
        return j;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    std::map<std::string, double> laps_;
};

struct Context {
    const SystemDocument& doc;
    const CommandFlags& flags;
    json warnings = json::array();
    Stopwatch clock;

    const FormSystem& sys() const { return doc.system; }

    double count_budget() const { return flags.budget.value_or(doc.budgets.count.value_or(kDefaultCountBudget)); }
    double residue_budget() const {
        return flags.budget.value_or(doc.budgets.residue.value_or(kDefaultResidueBudget));
    }
    std::uint64_t locus_budget() const {
        if (flags.budget) return static_cast<std::uint64_t>(std::min(*flags.budget, 1.8e19));
        return doc.budgets.locus.value_or(kDefaultLocusBudget);
    }
    std::uint64_t seed() const {
        if (flags.seed) return *flags.seed;
        if (doc.seed) return *doc.seed;
        throw UsageError("this command draws random samples; pass --seed or set seed in the document");
    }
    const std::vector<double>& P_schedule() const {
        if (flags.P.empty()) throw UsageError("this command needs at least one --P value");
        for (double p : flags.P) {
            if (!(p > 0) || !std::isfinite(p)) throw UsageError("--P values must be positive");
        }
        return flags.P;
    }
    CountStrategy strategy() const {
        if (flags.strategy == "auto") return supports_solve_last(sys()) ? CountStrategy::solve_last : CountStrategy::full;
        try {
            return parse_strategy(flags.strategy);
        } catch (const InputError& e) {
            throw UsageError(e.what());
        }
    }
};

json system_summary(const FormSystem& sys) {
    const auto& profile = sys.profile();
    json r = json::object();
    for (int d : profile.degrees()) r[std::to_string(d)] = profile.count(d);
    return {{"n", sys.n()}, {"R", profile.total_forms()}, {"D", profile.max_degree()},
            {"weight", profile.total_weight()}, {"r", r}};
}

json flags_json(const CommandFlags& f) {
    json j{{"threads", f.threads}, {"strategy", f.strategy}, {"p_max", f.p_max}, {"k_max", f.k_max},
           {"samples", f.samples}, {"eps", f.eps}, {"locus_primes", f.locus_primes}, {"P", f.P}};
    j["seed"] = f.seed ? json(*f.seed) : json(nullptr);
    j["budget"] = f.budget ? json(*f.budget) : json(nullptr);
    if (f.alpha) j["alpha"] = *f.alpha;
    if (f.gamma) j["gamma"] = *f.gamma;
    if (f.q) {
        j["q"] = *f.q;
        j["a"] = f.a;
    }
    if (f.series_H) j["series_H"] = *f.series_H;
    if (f.integral_H) j["integral_H"] = *f.integral_H;
    return j;
}

json run_check(Context& ctx) {
    const auto& sys = ctx.sys();
    const auto& profile = sys.profile();
    SingularDims B;
    json locus = json::object();
    for (int d : profile.degrees()) {
        std::optional<std::int64_t> override_value;
        if (auto it = ctx.doc.B_overrides.find(d); it != ctx.doc.B_overrides.end()) override_value = it->second;
        const auto est = estimate_Bd(sys, d, ctx.flags.locus_primes, ctx.locus_budget(), override_value);
        B[d] = est.estimate;
        json counts = json::array();
        for (const auto& c : est.counts) counts.push_back({{"p", c.prime}, {"count", exact(Integer(c.count))}});
        locus[std::to_string(d)] = {{"B", exact(est.estimate)},
                                    {"source", est.override_used ? "override" : "estimate"},
                                    {"fitted_exponent", approx(est.fitted_exponent, std::nan(""))},
                                    {"confident", est.confident},
                                    {"empty_locus", est.empty_locus},
                                    {"excluded", est.excluded},
                                    {"counts", counts}};
        if (!est.override_used && !est.confident) {
            ctx.warnings.push_back("B_" + std::to_string(d) + " estimate is not stable across the tested primes");
        }
        if (est.excluded) ctx.warnings.push_back("B_" + std::to_string(d) + " equals n; the criterion cannot hold");
    }
    ctx.clock.mark("locus");

    json out{{"system", system_summary(sys)}, {"locus", locus}};
    const auto n = static_cast<std::int64_t>(sys.n());
    bool in_range = true;
    for (const auto& [d, b] : B) in_range = in_range && b < n;
    if (!in_range) {
        out["verdict"] = "fail";
        out["reason"] = "some B_d equals n";
        return out;
    }
    const auto rep = compute_invariant_report(profile, n, B);
    ctx.clock.mark("invariants");

    json curly = json::array();
    for (auto v : rep.curly) curly.push_back(exact(v));
    json s = json::object();
    for (std::size_t d = 1; d < rep.s.size(); ++d) s[std::to_string(d)] = exact(rep.s[d]);
    json t = json::object();
    for (std::size_t d = 1; d < rep.n0.t.size(); ++d) t[std::to_string(d)] = exact(rep.n0.t[d]);
    json n0d = json::object();
    for (const auto& [d, v] : rep.n0.n0_of_d) n0d[std::to_string(d)] = exact(v);
    json margins = json::object();
    for (const auto& [d, v] : rep.main.margins) margins[std::to_string(d)] = exact(v);
    json lemma = json::object();
    for (const auto& [d, v] : rep.lemma_improve) lemma[std::to_string(d)] = v;

    out["verdict"] = rep.main.pass ? "pass" : "fail";
    out["curly_D"] = curly;
    out["s"] = s;
    out["t"] = t;
    out["n0_of_d"] = n0d;
    out["n0"] = exact(rep.n0.n0);
    out["margins"] = margins;
    out["B_max"] = exact(rep.B_max);
    out["corollary_pass"] = rep.corollary_pass;
    if (rep.birch) {
        out["birch"] = {{"pass", rep.birch->pass},
                        {"threshold", exact(rep.birch->threshold)},
                        {"slack", exact(rep.birch->slack)}};
    }
    out["crude_bounds"] = {{"lhs", exact(rep.crude.lhs)},
                           {"quadratic_bound", exact(rep.crude.quadratic_bound)},
                           {"exponential_bound", exact(rep.crude.exponential_bound)},
                           {"quadratic_holds", rep.crude.quadratic_holds},
                           {"exponential_holds", rep.crude.exponential_holds}};
    out["lemma_bound_holds"] = lemma;
    out["variety_degree"] = exact(rep.degree);
    out["thresholds"] = {{"dimension", exact(n - 1 - profile.total_forms())},
                         {"smooth_theorem", rep.thresholds.smooth_theorem},
                         {"conjecture", rep.thresholds.conjecture},
                         {"hartshorne_form", rep.thresholds.hartshorne_form}};
    return out;
}

json count_json(const CountReport& rep, const Context& ctx) {
    json j{{"P", approx(rep.P, 0.0)},
           {"N", exact(Integer(rep.count))},
           {"points_scanned", exact(Integer(rep.points_scanned))},
           {"strategy", to_string(rep.strategy)}};
    if (ctx.flags.timings) j["wall_time"] = rep.wall_time;
    return j;
}

json run_count(Context& ctx) {
    json rows = json::array();
    for (double P : ctx.P_schedule()) {
        const auto rep = count_solutions(ctx.sys(), P, {ctx.strategy(), ctx.flags.threads, ctx.count_budget()});
        rows.push_back(count_json(rep, ctx));
    }
    ctx.clock.mark("count");
    return {{"rows", rows}};
}

struct Densities {
    EulerProduct euler;
    double euler_error = 0;
    SigmaInfinity sigma;
};

Densities compute_densities(Context& ctx) {
    const auto& sys = ctx.sys();
    Densities out;
    out.euler = euler_product(sys, ctx.flags.p_max, ctx.flags.k_max, {ctx.flags.threads, ctx.residue_budget()});
    // change of the product when every factor drops its last level
    double previous = 1.0;
    for (const auto& f : out.euler.factors) {
        previous *= f.levels.size() >= 2 ? static_cast<double>(f.levels[f.levels.size() - 2]) : f.value();
    }
    out.euler_error = std::fabs(out.euler.value - previous);
    for (const auto& w : out.euler.warnings) ctx.warnings.push_back(w);
    ctx.clock.mark("euler_product");

    out.sigma = sigma_infinity(sys, ctx.flags.samples, ctx.flags.eps, ctx.seed(), ctx.flags.threads);
    if (out.sigma.no_hits) ctx.warnings.push_back("no Monte Carlo sample landed in the thickened zero set");
    ctx.clock.mark("sigma_infinity");
    return out;
}

json densities_json(const Densities& d) {
    json factors = json::array();
    for (const auto& f : d.euler.factors) {
        json levels = json::array();
        for (const auto& l : f.levels) levels.push_back(exact(l));
        factors.push_back({{"p", f.prime},
                           {"levels", levels},
                           {"stabilized", f.stabilized},
                           {"budget_limited", f.budget_limited}});
    }
    json eps = json::array();
    for (const auto& l : d.sigma.levels) {
        eps.push_back({{"eps", approx(l.eps, 0.0)},
                       {"hits", exact(Integer(l.hits))},
                       {"estimate", approx(l.estimate, l.std_error)}});
    }
    return {{"euler_product", {{"p_max", d.euler.p_max}, {"value", approx(d.euler.value, d.euler_error)}, {"factors", factors}}},
            {"sigma_infinity",
             {{"value", approx(d.sigma.estimate, d.sigma.std_error)},
              {"samples", exact(Integer(d.sigma.samples))},
              {"seed", d.sigma.seed},
              {"strata_per_axis", d.sigma.strata_per_axis},
              {"levels", eps}}}};
}

// main term and its propagated error
std::pair<double, double> main_term(const Densities& d, const FormSystem& sys, double P) {
    const double value = predict_main_term(d.sigma.estimate, d.euler.value, static_cast<std::int64_t>(sys.n()),
                                           sys.profile().total_weight(), P);
    double rel = 0;
    if (d.sigma.estimate != 0) rel += d.sigma.std_error / std::fabs(d.sigma.estimate);
    if (d.euler.value != 0) rel += d.euler_error / std::fabs(d.euler.value);
    return {value, std::fabs(value) * rel};
}

json run_densities(Context& ctx) {
    const auto d = compute_densities(ctx);
    json out = densities_json(d);
    if (!ctx.flags.P.empty()) {
        json terms = json::array();
        for (double P : ctx.P_schedule()) {
            const auto [v, e] = main_term(d, ctx.sys(), P);
            terms.push_back({{"P", approx(P, 0.0)}, {"main_term", approx(v, e)}});
        }
        out["main_terms"] = terms;
    }
    return out;
}

json run_predict(Context& ctx) {
    const auto& schedule = ctx.P_schedule();
    const auto d = compute_densities(ctx);
    json terms = json::array();
    for (double P : schedule) {
        const auto [v, e] = main_term(d, ctx.sys(), P);
        terms.push_back({{"P", approx(P, 0.0)}, {"main_term", approx(v, e)}});
    }
    return {{"sigma_infinity", approx(d.sigma.estimate, d.sigma.std_error)},
            {"euler_product", approx(d.euler.value, d.euler_error)},
            {"rows", terms}};
}

json run_compare(Context& ctx) {
    const auto& schedule = ctx.P_schedule();
    const auto d = compute_densities(ctx);
    json rows = json::array();
    for (double P : schedule) {
        const auto rep = count_solutions(ctx.sys(), P, {ctx.strategy(), ctx.flags.threads, ctx.count_budget()});
        const auto [v, e] = main_term(d, ctx.sys(), P);
        json row = count_json(rep, ctx);
        row["prediction"] = approx(v, e);
        if (v > 0) {
            const double ratio = empirical_ratio(rep, v);
            const double ratio_error = ratio * e / v;
            row["ratio"] = approx(ratio, ratio_error);
            row["distance_from_1"] = approx(std::fabs(ratio - 1.0), ratio_error);
        } else {
            ctx.warnings.push_back("prediction is not positive; ratio omitted");
        }
        rows.push_back(row);
    }
    ctx.clock.mark("count");
    return {{"sigma_infinity", approx(d.sigma.estimate, d.sigma.std_error)},
            {"euler_product", approx(d.euler.value, d.euler_error)},
            {"rows", rows}};
}

json run_expsum(Context& ctx) {
    const auto& sys = ctx.sys();
    const auto& f = ctx.flags;
    if (!f.alpha && !f.gamma && !f.q && !f.series_H && !f.integral_H) {
        throw UsageError("expsum needs one of --alpha, --gamma, --q, --series-H, --integral-H");
    }
    const ExpSumOptions options{f.threads, f.budget.value_or(ctx.doc.budgets.count.value_or(kDefaultCountBudget))};
    json out = json::object();
    if (f.alpha) {
        const FrequencyVector alpha(sys, *f.alpha);
        json rows = json::array();
        for (double P : ctx.P_schedule()) {
            const double points = scan_size(sys, P, CountStrategy::full);
            const Complex s = S_alpha(sys, P, alpha, options);
            rows.push_back({{"P", approx(P, 0.0)},
                            {"S", approx(s, points * 4.0 * std::numeric_limits<double>::epsilon())}});
        }
        out["S_alpha"] = rows;
        ctx.clock.mark("S_alpha");
    }
    if (f.q) {
        const Complex s = complete_sum(sys, *f.q, f.a, {f.threads, ctx.residue_budget()});
        const double points = std::pow(static_cast<double>(*f.q), static_cast<double>(sys.n()));
        out["complete_sum"] = {{"q", *f.q}, {"a", f.a},
                               {"S", approx(s, points * 4.0 * std::numeric_limits<double>::epsilon())}};
        ctx.clock.mark("complete_sum");
    }
    if (f.series_H) {
        const auto series = singular_series(sys, *f.series_H, {f.threads, ctx.residue_budget()});
        json terms = json::array();
        for (const auto& t : series.terms) {
            terms.push_back({{"q", t.q}, {"term", approx(t.term, 0.0)}, {"running", approx(t.running, 0.0)}});
        }
        const double last = series.terms.empty() ? 0.0 : std::abs(series.terms.back().term);
        out["singular_series"] = {{"H", series.H},
                                  {"value", approx(series.value, last)},
                                  {"imaginary", approx(series.imaginary, 0.0)},
                                  {"terms", terms}};
        if (std::fabs(series.imaginary) > 1e-9) ctx.warnings.push_back("singular series has a nonzero imaginary part");
        ctx.clock.mark("singular_series");
    }
    if (f.gamma) {
        const auto j = J_gamma(sys, FrequencyVector(sys, *f.gamma));
        out["J_gamma"] = {{"J", approx(j.value, j.change)},
                          {"points_per_axis", j.points_per_axis},
                          {"converged", j.converged}};
        if (!j.converged) ctx.warnings.push_back("J(gamma) quadrature did not converge within the node cap");
        ctx.clock.mark("J_gamma");
    }
    if (f.integral_H) {
        const auto si = singular_integral(sys, *f.integral_H);
        out["singular_integral"] = {{"H", approx(si.H, 0.0)},
                                    {"value", approx(si.value, si.error)},
                                    {"evaluations", si.evaluations},
                                    {"converged", si.converged}};
        if (!si.converged) ctx.warnings.push_back("singular integral quadrature did not converge");
        ctx.clock.mark("singular_integral");
    }
    return out;
}

json run_polar(Context& ctx) {
    json forms = json::array();
    const auto& sys = ctx.sys();
    for (std::size_t i = 0; i < sys.forms().size(); ++i) {
        const auto& form = sys.forms()[i];
        const auto polar = polar_form(form);
        json terms = json::array();
        for (const auto& t : polar.terms()) terms.push_back({{"coeff", exact(t.coeff)}, {"slots", t.slots}});
        forms.push_back({{"form", i}, {"degree", form.degree()}, {"symmetric", polar.is_symmetric()}, {"terms", terms}});
    }
    ctx.clock.mark("polar");
    return {{"forms", forms}};
}

// CSV flattening of tagged values
void flatten(const json& j, const std::string& key, std::vector<std::array<std::string, 4>>& rows) {
    auto plain = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (j.is_object() && j.contains("type") && j["type"] == "exact-rational") {
        const auto num = j["num"].get<std::string>(), den = j["den"].get<std::string>();
        rows.push_back({key, "exact-rational", den == "1" ? num : num + "/" + den, ""});
    } else if (j.is_object() && j.contains("type") && j["type"] == "float") {
        rows.push_back({key, "float", plain(j["value"]), plain(j["error"])});
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), key.empty() ? it.key() : key + "." + it.key(), rows);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], key + "[" + std::to_string(i) + "]", rows);
    } else {
        rows.push_back({key, j.is_boolean() ? "bool" : j.is_string() ? "text" : "number", plain(j), ""});
    }
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

json run_command(const std::string& verb, const SystemDocument& doc, const CommandFlags& flags) {
    if (flags.threads < 1) throw UsageError("--threads must be at least 1");
    Context ctx{doc, flags, json::array(), {}};
    json results;
    if (verb == "check") {
        results = run_check(ctx);
    } else if (verb == "count") {
        results = run_count(ctx);
    } else if (verb == "densities") {
        results = run_densities(ctx);
    } else if (verb == "predict") {
        results = run_predict(ctx);
    } else if (verb == "compare") {
        results = run_compare(ctx);
    } else if (verb == "expsum") {
        results = run_expsum(ctx);
    } else if (verb == "polar") {
        results = run_polar(ctx);
    } else {
        throw UsageError("unknown command '" + verb + "'");
    }
    json report;
    report["command"] = verb;
    report["inputs"] = {{"document", to_json(doc)}, {"flags", flags_json(flags)}};
    report["results"] = results;
    report["warnings"] = ctx.warnings;
    report["timings"] = flags.timings ? ctx.clock.to_json() : json::object();
    return report;
}

std::string format_report(const json& report, bool as_json) {
    if (as_json) return report.dump(2) + "\n";
    std::vector<std::array<std::string, 4>> rows;
    flatten(report["results"], "", rows);
    std::ostringstream os;
    os << "# command," << csv_field(report["command"].get<std::string>()) << "\n";
    os << "key,type,value,error\n";
    for (const auto& r : rows) {
        os << csv_field(r[0]) << ',' << r[1] << ',' << csv_field(r[2]) << ',' << csv_field(r[3]) << '\n';
    }
    for (const auto& w : report["warnings"]) os << "# warning," << csv_field(w.get<std::string>()) << "\n";
    for (auto it = report["timings"].begin(); it != report["timings"].end(); ++it) {
        os << "# timing," << it.key() << ',' << it.value().dump() << "\n";
    }
    return os.str();
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e)) return 1;
    if (dynamic_cast<const InputError*>(&e)) return 2;
    if (dynamic_cast<const BudgetError*>(&e)) return 3;
    if (dynamic_cast<const ConvergenceError*>(&e)) return 4;
    return 1;
}

}  // namespace cm
