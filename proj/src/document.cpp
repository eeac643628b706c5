#include "cm/document.hpp"

#include <limits>
#include <set>

namespace cm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw InputError(path + ": " + what); }

void only_fields(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path.empty() ? "document" : path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

const json& required(const json& j, const std::string& path, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) fail(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

std::int64_t as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        fail(path, "integer out of range");
    }
    return j.get<std::int64_t>();
}

std::uint64_t as_uint(const json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
        fail(path, "expected a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

double as_real(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

Integer as_coefficient(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.is_number_unsigned() ? Integer(j.get<std::uint64_t>()) : Integer(j.get<std::int64_t>());
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        const std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
        if (start == s.size()) fail(path, "expected an integer string");
        for (std::size_t i = start; i < s.size(); ++i) {
            if (s[i] < '0' || s[i] > '9') fail(path, "expected an integer string");
        }
        return Integer(s);
    }
    fail(path, "expected an integer or a decimal string");
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

}  // namespace

SystemDocument parse_system(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    return parse_system(j);
}

SystemDocument parse_system(const json& j) {
    only_fields(j, "", {"schema_version", "n", "M", "m0", "box", "forms", "overrides", "budgets", "seed"});
    const auto& version = required(j, "", "schema_version");
    if (!version.is_string() || version.get<std::string>() != kSchemaVersion) {
        fail("schema_version", std::string("expected \"") + kSchemaVersion + "\"");
    }

    const std::int64_t n_signed = as_int(required(j, "", "n"), "n");
    if (n_signed < 1) fail("n", "must be at least 1");
    const auto n = static_cast<std::size_t>(n_signed);

    const std::int64_t M = j.contains("M") ? as_int(j["M"], "M") : 1;
    if (M < 1) fail("M", "must be at least 1");

    std::vector<std::int64_t> m0(n, 0);
    if (j.contains("m0")) {
        const auto& arr = as_array(j["m0"], "m0");
        if (arr.size() != n) fail("m0", "expected " + std::to_string(n) + " entries");
        for (std::size_t i = 0; i < n; ++i) m0[i] = as_int(arr[i], at("m0", i));
    }

    std::vector<Interval> box(n, Interval{-1.0, 1.0});
    if (j.contains("box")) {
        const auto& arr = as_array(j["box"], "box");
        if (arr.size() != n) fail("box", "expected " + std::to_string(n) + " intervals");
        for (std::size_t i = 0; i < n; ++i) {
            const auto& side = as_array(arr[i], at("box", i));
            if (side.size() != 2) fail(at("box", i), "expected [lo, hi]");
            box[i] = {as_real(side[0], at("box", i) + "[0]"), as_real(side[1], at("box", i) + "[1]")};
        }
    }

    std::vector<IntegerForm> forms;
    const auto& farr = as_array(required(j, "", "forms"), "forms");
    for (std::size_t f = 0; f < farr.size(); ++f) {
        const std::string fpath = at("forms", f);
        only_fields(farr[f], fpath, {"degree", "monomials"});
        const std::int64_t degree = as_int(required(farr[f], fpath, "degree"), fpath + ".degree");
        if (degree < 1 || degree > 64) fail(fpath + ".degree", "must lie in [1, 64]");
        const auto& marr = as_array(required(farr[f], fpath, "monomials"), fpath + ".monomials");
        std::vector<Monomial> monomials;
        for (std::size_t k = 0; k < marr.size(); ++k) {
            const std::string mpath = at(fpath + ".monomials", k);
            only_fields(marr[k], mpath, {"coeff", "exps"});
            Monomial m;
            m.coeff = as_coefficient(required(marr[k], mpath, "coeff"), mpath + ".coeff");
            const auto& earr = as_array(required(marr[k], mpath, "exps"), mpath + ".exps");
            for (std::size_t i = 0; i < earr.size(); ++i) {
                const auto e = as_int(earr[i], at(mpath + ".exps", i));
                if (e < 0 || e > 64) fail(at(mpath + ".exps", i), "exponent must lie in [0, 64]");
                m.exps.push_back(static_cast<int>(e));
            }
            monomials.push_back(std::move(m));
        }
        try {
            forms.emplace_back(n, static_cast<int>(degree), std::move(monomials));
        } catch (const InputError& e) {
            fail(fpath, e.what());
        }
    }

    SystemDocument doc{kSchemaVersion, [&] {
                           try {
                               return FormSystem(n, std::move(forms), M, std::move(m0), std::move(box));
                           } catch (const InputError& e) {
                               throw InputError(std::string("system: ") + e.what());
                           }
                       }(), {}, {}, std::nullopt};

    if (j.contains("overrides")) {
        only_fields(j["overrides"], "overrides", {"B"});
        if (j["overrides"].contains("B")) {
            const auto& bobj = j["overrides"]["B"];
            if (!bobj.is_object()) fail("overrides.B", "expected an object mapping degree to dimension");
            for (auto it = bobj.begin(); it != bobj.end(); ++it) {
                const std::string path = "overrides.B." + it.key();
                int d = 0;
                try {
                    std::size_t used = 0;
                    d = std::stoi(it.key(), &used);
                    if (used != it.key().size()) throw std::invalid_argument("trailing");
                } catch (const std::exception&) {
                    fail(path, "degree key must be an integer");
                }
                if (doc.system.profile().count(d) == 0) fail(path, "no forms of this degree");
                const auto b = as_int(it.value(), path);
                if (b < 0 || b > static_cast<std::int64_t>(n)) fail(path, "must lie in [0, n]");
                doc.B_overrides[d] = b;
            }
        }
    }
    if (j.contains("budgets")) {
        only_fields(j["budgets"], "budgets", {"count", "residue", "locus"});
        const auto& b = j["budgets"];
        auto positive = [&](const char* key) {
            const double v = as_real(b[key], std::string("budgets.") + key);
            if (!(v > 0)) fail(std::string("budgets.") + key, "must be positive");
            return v;
        };
        if (b.contains("count")) doc.budgets.count = positive("count");
        if (b.contains("residue")) doc.budgets.residue = positive("residue");
        if (b.contains("locus")) doc.budgets.locus = as_uint(b["locus"], "budgets.locus");
    }
    if (j.contains("seed")) doc.seed = as_uint(j["seed"], "seed");
    return doc;
}

json to_json(const SystemDocument& doc) {
    const auto& sys = doc.system;
    json j;
    j["schema_version"] = doc.schema_version;
    j["n"] = sys.n();
    j["M"] = sys.modulus();
    j["m0"] = sys.m0();
    json box = json::array();
    for (const auto& side : sys.box()) box.push_back({side.lo, side.hi});
    j["box"] = box;
    json forms = json::array();
    for (const auto& f : sys.forms()) {
        json monomials = json::array();
        for (const auto& m : f.monomials()) {
            json coeff;
            if (m.coeff >= std::numeric_limits<std::int64_t>::min() && m.coeff <= std::numeric_limits<std::int64_t>::max()) {
                coeff = static_cast<std::int64_t>(m.coeff);
            } else {
                coeff = m.coeff.str();
            }
            monomials.push_back({{"coeff", coeff}, {"exps", m.exps}});
        }
        forms.push_back({{"degree", f.degree()}, {"monomials", monomials}});
    }
    j["forms"] = forms;
    if (!doc.B_overrides.empty()) {
        json b = json::object();
        for (const auto& [d, v] : doc.B_overrides) b[std::to_string(d)] = v;
        j["overrides"] = {{"B", b}};
    }
    json budgets = json::object();
    if (doc.budgets.count) budgets["count"] = *doc.budgets.count;
    if (doc.budgets.residue) budgets["residue"] = *doc.budgets.residue;
    if (doc.budgets.locus) budgets["locus"] = *doc.budgets.locus;
    if (!budgets.empty()) j["budgets"] = budgets;
    if (doc.seed) j["seed"] = *doc.seed;
    return j;
}

std::string serialize_system(const SystemDocument& doc) { return to_json(doc).dump(2) + "\n"; }

json rational_json(const Rational& r) {
    return {{"num", numerator(r).str()}, {"den", denominator(r).str()}};
}

}  // namespace cm
