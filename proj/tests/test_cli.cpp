#include "fixtures.hpp"

#include "cm/commands.hpp"
#include "cm/document.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace cm;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "cmtool-tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::filesystem::path write_scratch(const std::string& name, const std::string& text) {
    const auto p = scratch(name);
    std::ofstream(p) << text;
    return p;
}

// Runs cmtool with stdout captured to a file; returns the exit status.
int run_tool(const std::string& args, const std::filesystem::path& out) {
    const std::string cmd = std::string(CMTOOL_PATH) + " " + args + " > " + out.string() + " 2> " + out.string() + ".err";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data(const std::string& name) { return std::string(TEST_DATA_DIR) + "/" + name; }

// sum x_i^2 and sum x_i^3 in 37 variables
std::string quadratic_cubic_document() {
    json forms = json::array();
    for (int d : {2, 3}) {
        json ms = json::array();
        for (int i = 0; i < 37; ++i) {
            std::vector<int> e(37, 0);
            e[static_cast<std::size_t>(i)] = d;
            ms.push_back({{"coeff", 1}, {"exps", e}});
        }
        forms.push_back({{"degree", d}, {"monomials", ms}});
    }
    json doc{{"schema_version", "1"}, {"n", 37}, {"forms", forms}, {"overrides", {{"B", {{"2", 1}, {"3", 0}}}}}};
    return doc.dump();
}

}  // namespace

TEST_CASE("minimal documents take defaults") {
    const auto doc = parse_system(R"({"schema_version": "1", "n": 2, "forms": [{"degree": 1, "monomials": [{"coeff": 1, "exps": [1, 0]}]}]})");
    CHECK(doc.system.modulus() == 1);
    CHECK(doc.system.m0() == std::vector<std::int64_t>{0, 0});
    CHECK(doc.system.box()[1] == Interval{-1, 1});
    CHECK_FALSE(doc.seed.has_value());
}

TEST_CASE("document validation names the field") {
    const std::string base = R"({"schema_version": "1", "n": 2, "M": 3, "m0": [0, 3], "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1, 1]}]}]})";
    CHECK_THROWS_WITH_AS(parse_system(base), doctest::Contains("m0 coordinate 1"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_system(R"({"schema_version": "1", "n": 2, "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1, 1]}, {"coeff": 1, "exps": [2, 1]}]}]})"),
        doctest::Contains("forms[0]"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_system(R"({"schema_version": "1", "n": 2, "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1, 1]}, {"coeff": 1, "exps": [2, 1]}]}]})"),
        doctest::Contains("monomial 1"), InputError);
    CHECK_THROWS_WITH_AS(parse_system(R"({"schema_version": "1", "n": 2, "colour": 1, "forms": []})"), doctest::Contains("colour"), InputError);
    CHECK_THROWS_WITH_AS(
        parse_system(R"({"schema_version": "1", "n": 2, "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1, 1], "x": 0}]}]})"),
        doctest::Contains("forms[0].monomials[0]"), InputError);
    CHECK_THROWS_WITH_AS(parse_system("{\"n\": 2,\n \"forms\": ["), doctest::Contains("malformed JSON"), InputError);
    CHECK_THROWS_WITH_AS(parse_system(R"({"n": 1, "forms": [{"degree": 1, "monomials": [{"coeff": 1, "exps": [1]}]}]})"),
                         doctest::Contains("schema_version"), InputError);
    CHECK_THROWS_AS(parse_system(R"({"schema_version": "1", "n": 2, "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1, 1]}]}],
                                    "overrides": {"B": {"3": 1}}})"),
                    InputError);
}

TEST_CASE("documents round trip") {
    const auto text = read_file(data("quadric.json"));
    const auto doc = parse_system(text);
    const auto again = parse_system(serialize_system(doc));
    CHECK(again == doc);
    CHECK(serialize_system(again) == serialize_system(doc));

    const auto big = parse_system(
        R"({"schema_version": "1", "n": 1, "M": 4, "m0": [3], "box": [[-0.5, 1]], "forms": [{"degree": 2, "monomials": [{"coeff": "123456789012345678901234567890", "exps": [2]}]}],
           "overrides": {"B": {"2": 0}}, "budgets": {"count": 1e6}, "seed": 5})");
    CHECK(parse_system(serialize_system(big)) == big);
    CHECK(big.system.forms()[0].monomials()[0].coeff == Integer("123456789012345678901234567890"));
}

TEST_CASE("check reports the quadratic plus cubic verdict") {
    const auto doc = parse_system(quadratic_cubic_document());
    const auto report = run_command("check", doc, {});
    const auto& r = report["results"];
    CHECK(r["verdict"] == "pass");
    CHECK(r["s"]["2"]["num"] == "181");
    CHECK(r["s"]["2"]["den"] == "666");
    CHECK(r["locus"]["2"]["source"] == "override");
    CHECK(report["timings"].empty());
}

TEST_CASE("run_command on small systems") {
    const auto lin = parse_system(read_file(data("linear.json")));
    CommandFlags flags;
    flags.P = {10};
    const auto count = run_command("count", lin, flags);
    CHECK(count["results"]["rows"][0]["N"]["num"] == "21");
    CHECK_THROWS_AS(run_command("count", lin, {}), UsageError);
    CHECK_THROWS_AS(run_command("frobnicate", lin, flags), UsageError);

    auto noseed = lin;
    noseed.seed.reset();
    CHECK_THROWS_AS(run_command("densities", noseed, {}), UsageError);

    const auto csv = format_report(count, false);
    CHECK(csv.find("key,type,value,error\n") != std::string::npos);
    CHECK(csv.find("exact-rational,21") != std::string::npos);
}

TEST_CASE("exit codes") {
    const auto out = scratch("exit.out");
    CHECK(run_tool("count --P 10 " + data("linear.json"), out) == 0);
    CHECK(run_tool("count --bogus " + data("linear.json"), out) == 1);
    CHECK(run_tool("count " + data("linear.json"), out) == 1);
    const auto bad = write_scratch("bad.json", R"({"schema_version": "1", "n": 2, "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1]}]}]})");
    CHECK(run_tool("check " + bad.string(), out) == 2);
    CHECK(run_tool("check " + scratch("missing.json").string(), out) == 2);
    CHECK(run_tool("count --P 100 --budget 1000 " + data("quadric.json"), out) == 3);
    const auto hyper = write_scratch(
        "hyper.json", R"({"schema_version": "1", "n": 2, "forms": [{"degree": 2, "monomials": [{"coeff": 1, "exps": [1, 1]}]}], "seed": 1})");
    CHECK(run_tool("densities --p-max 5 --samples 10000 " + hyper.string(), out) == 4);
}

TEST_CASE("reports are byte-identical across reruns and worker counts") {
    const std::string args = "compare --json --P 6,10 --p-max 7 --k-max 2 --samples 100000 " + data("quadric.json");
    std::string first;
    for (int threads : {1, 2, 8, 1}) {
        const auto out = scratch("compare" + std::to_string(threads) + ".json");
        REQUIRE(run_tool(args + " --threads " + std::to_string(threads), out) == 0);
        auto report = json::parse(read_file(out));
        report["inputs"]["flags"].erase("threads");
        const auto text = report.dump(2);
        if (first.empty()) first = text;
        CHECK(text == first);
    }
    const auto a = scratch("rerun-a.json"), b = scratch("rerun-b.json");
    REQUIRE(run_tool(args, a) == 0);
    REQUIRE(run_tool(args, b) == 0);
    CHECK(read_file(a) == read_file(b));
}
