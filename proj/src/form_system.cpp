#include "cm/form_system.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cm {

DegreeProfile::DegreeProfile(std::vector<int> counts) {
    r_.assign(1, 0);
    r_.insert(r_.end(), counts.begin(), counts.end());
    while (r_.size() > 1 && r_.back() == 0) r_.pop_back();
    for (int c : r_) {
        if (c < 0) throw InputError("degree profile entries must be non-negative");
    }
    if (r_.size() == 1) throw InputError("degree profile needs at least one form");
}

int DegreeProfile::count(int d) const {
    if (d < 1 || d > max_degree()) return 0;
    return r_[d];
}

int DegreeProfile::total_forms() const {
    int total = 0;
    for (int c : r_) total += c;
    return total;
}

std::int64_t DegreeProfile::weight(int j) const {
    std::int64_t w = 0;
    for (int k = 1; k <= std::min(j, max_degree()); ++k) w += static_cast<std::int64_t>(k) * r_[k];
    return w;
}

std::vector<int> DegreeProfile::degrees() const {
    std::vector<int> out;
    for (int d = 1; d <= max_degree(); ++d) {
        if (r_[d] > 0) out.push_back(d);
    }
    return out;
}

FormSystem::FormSystem(std::size_t n, std::vector<IntegerForm> forms, std::int64_t modulus,
                       std::vector<std::int64_t> m0, std::vector<Interval> box)
    : n_(n), modulus_(modulus), m0_(std::move(m0)), box_(std::move(box)) {
    if (n == 0) throw InputError("n must be positive");
    if (modulus < 1) throw InputError("modulus M must be positive");
    if (m0_.size() != n) throw InputError("m0 has " + std::to_string(m0_.size()) + " entries, expected n");
    for (std::size_t i = 0; i < n; ++i) {
        if (m0_[i] < 0 || m0_[i] >= modulus) {
            throw InputError("m0 coordinate " + std::to_string(i) + " out of [0, M-1]");
        }
    }
    if (box_.size() != n) throw InputError("box has " + std::to_string(box_.size()) + " intervals, expected n");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& iv = box_[i];
        if (!(iv.lo >= -1.0 && iv.hi <= 1.0 && iv.lo < iv.hi)) {
            throw InputError("box interval " + std::to_string(i) + " must satisfy -1 <= a < b <= 1");
        }
    }
    if (forms.empty()) throw InputError("a system needs at least one form");
    for (std::size_t k = 0; k < forms.size(); ++k) {
        if (forms[k].n() != n) throw InputError("form " + std::to_string(k) + " has the wrong number of variables");
        if (forms[k].degree() < 1) throw InputError("form " + std::to_string(k) + " has degree < 1");
        if (forms[k].is_zero()) throw InputError("form " + std::to_string(k) + " is the zero form");
    }
    std::stable_sort(forms.begin(), forms.end(),
                     [](const IntegerForm& a, const IntegerForm& b) { return a.degree() < b.degree(); });
    std::vector<int> counts(forms.back().degree(), 0);
    for (const auto& f : forms) counts[f.degree() - 1] += 1;
    forms_ = std::move(forms);
    profile_ = DegreeProfile(std::move(counts));
}

FormSystem::FormSystem(std::size_t n, std::vector<IntegerForm> forms)
    : FormSystem(n, std::move(forms), 1, std::vector<std::int64_t>(n, 0),
                 std::vector<Interval>(n, Interval{-1.0, 1.0})) {}

double FormSystem::box_volume() const {
    double v = 1.0;
    for (const auto& iv : box_) v *= iv.hi - iv.lo;
    return v;
}

std::span<const IntegerForm> FormSystem::forms_of_degree(int d) const {
    auto first = std::find_if(forms_.begin(), forms_.end(), [&](const IntegerForm& f) { return f.degree() == d; });
    auto count = static_cast<std::size_t>(profile_.count(d));
    return {forms_.data() + (first - forms_.begin()), count};
}

std::size_t FormSystem::index_of(int d, int i) const {
    if (i < 1 || i > profile_.count(d)) {
        throw InputError("no form F_{" + std::to_string(i) + "," + std::to_string(d) + "}");
    }
    std::size_t base = 0;
    for (int e = 1; e < d; ++e) base += static_cast<std::size_t>(profile_.count(e));
    return base + static_cast<std::size_t>(i - 1);
}

FormSystem FormSystem::with_forms(std::vector<IntegerForm> forms) const {
    return FormSystem(n_, std::move(forms), modulus_, m0_, box_);
}

namespace {

void require_degree(const FormSystem& sys, int d) {
    if (sys.profile().count(d) == 0) {
        throw InputError("degree " + std::to_string(d) + " has no forms in this system");
    }
}

}  // namespace

IntMatrix jacobian_matrix(const FormSystem& sys, int d, std::span<const Integer> x) {
    require_degree(sys, d);
    if (x.size() != sys.n()) throw InputError("point has the wrong dimension");
    IntMatrix rows;
    for (const auto& f : sys.forms_of_degree(d)) rows.push_back(f.gradient(x));
    return rows;
}

IntMatrix hat_jacobian(const FormSystem& sys, int d, std::span<const IntVector> slots) {
    require_degree(sys, d);
    IntMatrix rows;
    for (const auto& f : sys.forms_of_degree(d)) rows.push_back(polar_row_vector(f, slots));
    return rows;
}

FormSystem apply_equivalence(const FormSystem& sys, std::span<const EquivalenceStep> steps) {
    std::vector<Polynomial> updated;
    for (const auto& f : sys.forms()) updated.push_back(f.polynomial());

    for (const auto& step : steps) {
        const std::size_t target = sys.index_of(step.target_degree, step.target_index);
        for (const auto& m : step.terms) {
            const std::size_t source = sys.index_of(m.source_degree, m.source_index);
            const bool lower = m.source_degree < step.target_degree;
            const bool earlier = m.source_degree == step.target_degree && m.source_index < step.target_index;
            if (!lower && !earlier) {
                throw InputError("multiplier for F_{" + std::to_string(step.target_index) + "," +
                                 std::to_string(step.target_degree) +
                                 "} must use a lower degree or an earlier form of the same degree");
            }
            if (m.factor.degree() != step.target_degree - m.source_degree) {
                throw InputError("multiplier H has degree " + std::to_string(m.factor.degree()) + ", expected " +
                                 std::to_string(step.target_degree - m.source_degree));
            }
            if (m.factor.n() != sys.n()) throw InputError("multiplier H has the wrong number of variables");
            updated[target] = updated[target] + m.factor.polynomial() * sys.forms()[source].polynomial();
        }
    }

    std::vector<IntegerForm> forms;
    for (std::size_t k = 0; k < updated.size(); ++k) {
        forms.emplace_back(sys.forms()[k].degree(), std::move(updated[k]));
    }
    return sys.with_forms(std::move(forms));
}

}  // namespace cm
