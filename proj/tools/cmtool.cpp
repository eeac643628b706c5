// cmtool: command-line front end for the circle-method toolkit.
//
//   cmtool <verb> [options] [system.json]
//
// Reads the system document from the given path, or stdin when absent or "-".
// Exit status: 0 ok, 1 usage, 2 validation, 3 budget, 4 non-convergence.

#include "cm/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

namespace {

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") {
        return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cm::InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Circle-method toolkit: invariants, lattice counts, local densities, exponential sums"};
    app.require_subcommand(1);

    cm::CommandFlags flags;
    std::string input;
    bool as_json = false;
    std::uint64_t seed = 0;
    double budget = 0;
    std::vector<double> alpha, gamma;
    std::int64_t q = 0, series_H = 0;
    double integral_H = 0;

    const std::map<std::string, std::string> about{
        {"check", "invariants, singular-locus estimates and the solubility criteria"},
        {"count", "exact solution counts N(P)"},
        {"densities", "local densities, Euler product and real density"},
        {"predict", "predicted main terms"},
        {"compare", "counts against predicted main terms"},
        {"expsum", "exponential sums, singular series and singular integral"},
        {"polar", "polar forms of each form"},
    };
    std::map<std::string, CLI::App*> verbs;
    for (const auto& verb : cm::kVerbs) {
        auto* sub = app.add_subcommand(verb, about.at(verb));
        sub->add_option("input", input, "system document (JSON); stdin if omitted or -");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Monte Carlo seed");
        sub->add_option("--budget", budget, "work budget overriding the document")->check(CLI::PositiveNumber);
        sub->add_flag("--json", as_json, "emit JSON instead of CSV");
        sub->add_flag("--timings", flags.timings, "include wall-clock timings (breaks byte-identical output)");
        verbs[verb] = sub;
    }
    for (const char* verb : {"count", "densities", "predict", "compare", "expsum"}) {
        verbs[verb]->add_option("--P", flags.P, "box scale(s)")->delimiter(',')->allow_extra_args(false);
    }
    for (const char* verb : {"count", "compare"}) {
        verbs[verb]->add_option("--strategy", flags.strategy, "auto, full or solve-last");
    }
    for (const char* verb : {"densities", "predict", "compare"}) {
        auto* sub = verbs[verb];
        sub->add_option("--p-max", flags.p_max, "largest prime in the Euler product");
        sub->add_option("--k-max", flags.k_max, "highest prime-power level");
        sub->add_option("--samples", flags.samples, "Monte Carlo samples for the real density");
        sub->add_option("--eps", flags.eps, "decreasing thickening widths")->delimiter(',')->allow_extra_args(false);
    }
    verbs["check"]->add_option("--primes", flags.locus_primes, "primes for the singular-locus estimate")->delimiter(',')->allow_extra_args(false);
    auto* ex = verbs["expsum"];
    ex->add_option("--alpha", alpha, "frequencies for S(alpha), one per form")->delimiter(',')->allow_extra_args(false);
    ex->add_option("--gamma", gamma, "frequencies for J(gamma), one per form")->delimiter(',')->allow_extra_args(false);
    ex->add_option("--q", q, "modulus for the complete sum S(a, q)");
    ex->add_option("--a", flags.a, "residues for S(a, q), one per form")->delimiter(',')->allow_extra_args(false);
    ex->add_option("--series-H", series_H, "truncation of the singular series");
    ex->add_option("--integral-H", integral_H, "truncation of the singular integral");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    std::string verb;
    for (const auto& [name, sub] : verbs) {
        if (sub->parsed()) verb = name;
    }
    auto* sub = verbs[verb];
    if (sub->count("--seed")) flags.seed = seed;
    if (sub->count("--budget")) flags.budget = budget;
    if (verb == "expsum") {
        if (ex->count("--alpha")) flags.alpha = alpha;
        if (ex->count("--gamma")) flags.gamma = gamma;
        if (ex->count("--q")) flags.q = q;
        if (ex->count("--series-H")) flags.series_H = series_H;
        if (ex->count("--integral-H")) flags.integral_H = integral_H;
    }

    try {
        const auto doc = cm::parse_system(read_input(input));
        const auto report = cm::run_command(verb, doc, flags);
        std::cout << cm::format_report(report, as_json);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "cmtool " << verb << ": " << e.what() << "\n";
        return cm::exit_code_for(e);
    }
}
