#pragma once

#include "cm/polynomial.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cm {

struct Interval {
    double lo;
    double hi;
    bool operator==(const Interval&) const = default;
};

// r_1, ..., r_D: number of forms of each degree. Index 0 is unused.
class DegreeProfile {
public:
    DegreeProfile() = default;
    // counts[d - 1] = r_d
    explicit DegreeProfile(std::vector<int> counts);

    int max_degree() const { return static_cast<int>(r_.size()) - 1; }
    // r_d, zero outside 1..D
    int count(int d) const;
    int total_forms() const;
    // D_j = r_1 + 2 r_2 + ... + j r_j, with D_0 = 0
    std::int64_t weight(int j) const;
    std::int64_t total_weight() const { return weight(max_degree()); }
    // the set of degrees d with r_d >= 1, ascending
    std::vector<int> degrees() const;
    bool single_degree() const { return degrees().size() == 1; }

    bool operator==(const DegreeProfile&) const = default;

private:
    std::vector<int> r_{0};
};

// Integral forms of degrees 1..D in n variables, together with the counting
// data: modulus M, residue class m0 and the box B inside [-1, 1]^n.
// Forms are stored grouped by ascending degree, keeping input order within a
// degree; "system order" below always refers to that ordering.
class FormSystem {
public:
    FormSystem(std::size_t n, std::vector<IntegerForm> forms, std::int64_t modulus,
               std::vector<std::int64_t> m0, std::vector<Interval> box);
    // M = 1, m0 = 0, box [-1, 1]^n
    FormSystem(std::size_t n, std::vector<IntegerForm> forms);

    std::size_t n() const { return n_; }
    std::int64_t modulus() const { return modulus_; }
    const std::vector<std::int64_t>& m0() const { return m0_; }
    const std::vector<Interval>& box() const { return box_; }
    double box_volume() const;

    const DegreeProfile& profile() const { return profile_; }
    int max_degree() const { return profile_.max_degree(); }
    int total_forms() const { return profile_.total_forms(); }

    const std::vector<IntegerForm>& forms() const { return forms_; }
    std::span<const IntegerForm> forms_of_degree(int d) const;
    // position of F_{i,d} (1-based i) in system order
    std::size_t index_of(int d, int i) const;

    FormSystem with_forms(std::vector<IntegerForm> forms) const;

    bool operator==(const FormSystem&) const = default;

private:
    std::size_t n_;
    std::vector<IntegerForm> forms_;
    std::int64_t modulus_;
    std::vector<std::int64_t> m0_;
    std::vector<Interval> box_;
    DegreeProfile profile_;
};

using IntMatrix = std::vector<IntVector>;

// r_d x n matrix of gradients of the degree-d forms at x.
IntMatrix jacobian_matrix(const FormSystem& sys, int d, std::span<const Integer> x);

// Rows are the polar row vectors of the degree-d forms at (x_1, ..., x_{d-1}).
IntMatrix hat_jacobian(const FormSystem& sys, int d, std::span<const IntVector> slots);

// One summand H * F_{j,e} added to a target form F_{i,d}.
struct Multiplier {
    int source_degree;  // e
    int source_index;   // j, 1-based within degree e
    IntegerForm factor; // H, of degree d - e
};

struct EquivalenceStep {
    int target_degree;  // d
    int target_index;   // i, 1-based
    std::vector<Multiplier> terms;
};

// G_{i,d} = F_{i,d} + sum_{j<i} H_{j,d} F_{j,d} + sum_{e<d} sum_j H_{j,e} F_{j,e},
// with every product formed from the original forms F.
FormSystem apply_equivalence(const FormSystem& sys, std::span<const EquivalenceStep> steps);

}  // namespace cm
