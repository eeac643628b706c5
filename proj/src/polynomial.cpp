#include "cm/polynomial.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace cm {

namespace {

struct GrlexCmp {
    bool operator()(const Exponents& a, const Exponents& b) const { return grlex_before(a, b); }
};

using TermMap = std::map<Exponents, Integer, GrlexCmp>;

std::vector<Monomial> flatten(TermMap&& map) {
    std::vector<Monomial> out;
    out.reserve(map.size());
    for (auto& [exps, coeff] : map) {
        if (coeff != 0) out.push_back({std::move(coeff), exps});
    }
    return out;
}

void accumulate(TermMap& map, const Exponents& exps, const Integer& coeff) {
    auto [it, inserted] = map.try_emplace(exps, coeff);
    if (!inserted) it->second += coeff;
}

template <class Value>
Integer evaluate_terms(const std::vector<Monomial>& terms, std::size_t nvars, std::span<const Value> x) {
    if (x.size() != nvars) {
        throw InputError("point has " + std::to_string(x.size()) + " coordinates, expected " +
                         std::to_string(nvars));
    }
    Integer total = 0;
    for (const auto& m : terms) {
        Integer v = m.coeff;
        for (std::size_t i = 0; i < nvars; ++i) {
            for (int k = 0; k < m.exps[i]; ++k) v *= x[i];
        }
        total += v;
    }
    return total;
}

}  // namespace

int Monomial::degree() const { return std::accumulate(exps.begin(), exps.end(), 0); }

bool grlex_before(const Exponents& a, const Exponents& b) {
    int da = std::accumulate(a.begin(), a.end(), 0);
    int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

Polynomial::Polynomial(std::size_t nvars) : nvars_(nvars) {}

Polynomial::Polynomial(std::size_t nvars, std::vector<Monomial> terms) : nvars_(nvars) {
    TermMap map;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const auto& m = terms[k];
        if (m.exps.size() != nvars) {
            throw InputError("monomial " + std::to_string(k) + " has " + std::to_string(m.exps.size()) +
                             " exponents, expected " + std::to_string(nvars));
        }
        for (int e : m.exps) {
            if (e < 0) throw InputError("monomial " + std::to_string(k) + " has a negative exponent");
        }
        accumulate(map, m.exps, m.coeff);
    }
    terms_ = flatten(std::move(map));
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t index) {
    Exponents e(nvars, 0);
    e.at(index) = 1;
    return Polynomial(nvars, {{1, std::move(e)}});
}

Polynomial Polynomial::constant(std::size_t nvars, const Integer& value) {
    return Polynomial(nvars, {{value, Exponents(nvars, 0)}});
}

int Polynomial::total_degree() const { return terms_.empty() ? -1 : terms_.front().degree(); }

bool Polynomial::is_homogeneous(int degree) const {
    return std::all_of(terms_.begin(), terms_.end(), [&](const Monomial& m) { return m.degree() == degree; });
}

int Polynomial::degree_in(std::size_t var) const {
    int d = 0;
    for (const auto& m : terms_) d = std::max(d, m.exps[var]);
    return d;
}

Integer Polynomial::operator()(std::span<const Integer> x) const { return evaluate_terms(terms_, nvars_, x); }

Integer Polynomial::operator()(std::span<const std::int64_t> x) const {
    return evaluate_terms(terms_, nvars_, x);
}

Polynomial Polynomial::derivative(std::size_t var) const {
    std::vector<Monomial> out;
    for (const auto& m : terms_) {
        if (m.exps[var] == 0) continue;
        Monomial d{m.coeff * m.exps[var], m.exps};
        d.exps[var] -= 1;
        out.push_back(std::move(d));
    }
    return Polynomial(nvars_, std::move(out));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_) throw InputError("polynomial ring mismatch");
    std::vector<Monomial> all = a.terms_;
    all.insert(all.end(), b.terms_.begin(), b.terms_.end());
    return Polynomial(a.nvars_, std::move(all));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Integer(-1) * b; }

Polynomial operator*(const Integer& c, const Polynomial& a) {
    std::vector<Monomial> out = a.terms_;
    for (auto& m : out) m.coeff *= c;
    return Polynomial(a.nvars_, std::move(out));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.nvars_ != b.nvars_) throw InputError("polynomial ring mismatch");
    TermMap map;
    Exponents e(a.nvars_);
    for (const auto& x : a.terms_) {
        for (const auto& y : b.terms_) {
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = x.exps[i] + y.exps[i];
            accumulate(map, e, x.coeff * y.coeff);
        }
    }
    Polynomial p(a.nvars_);
    p.terms_ = flatten(std::move(map));
    return p;
}

Polynomial compose(const Polynomial& f, std::span<const Polynomial> images) {
    if (images.size() != f.nvars()) throw InputError("compose: wrong number of images");
    if (images.empty()) return f;
    const std::size_t target = images.front().nvars();
    // powers[i][k] = images[i]^k, grown on demand
    std::vector<std::vector<Polynomial>> powers(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) powers[i].push_back(Polynomial::constant(target, 1));

    Polynomial result(target);
    for (const auto& m : f.terms()) {
        Polynomial term = Polynomial::constant(target, m.coeff);
        for (std::size_t i = 0; i < images.size(); ++i) {
            auto& pw = powers[i];
            while (static_cast<int>(pw.size()) <= m.exps[i]) pw.push_back(pw.back() * images[i]);
            if (m.exps[i] > 0) term = term * pw[m.exps[i]];
        }
        result = result + term;
    }
    return result;
}

namespace {

template <class Value>
Polynomial forward_difference_impl(const Polynomial& f, std::span<const Value> h) {
    if (h.size() != f.nvars()) {
        throw InputError("shift has " + std::to_string(h.size()) + " coordinates, expected " +
                         std::to_string(f.nvars()));
    }
    std::vector<Polynomial> images;
    images.reserve(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        images.push_back(Polynomial::variable(f.nvars(), i) + Polynomial::constant(f.nvars(), Integer(h[i])));
    }
    return compose(f, images) - f;
}

}  // namespace

Polynomial forward_difference(const Polynomial& f, std::span<const Integer> h) {
    return forward_difference_impl(f, h);
}

Polynomial forward_difference(const Polynomial& f, std::span<const std::int64_t> h) {
    return forward_difference_impl(f, h);
}

IntegerForm::IntegerForm(std::size_t n, int degree, std::vector<Monomial> monomials)
    : degree_(degree), poly_(n) {
    if (degree < 0) throw InputError("form degree must be non-negative");
    for (std::size_t k = 0; k < monomials.size(); ++k) {
        if (monomials[k].exps.size() != n) {
            throw InputError("monomial " + std::to_string(k) + " has " +
                             std::to_string(monomials[k].exps.size()) + " exponents, expected " +
                             std::to_string(n));
        }
        if (monomials[k].degree() != degree) {
            throw InputError("monomial " + std::to_string(k) + " has degree " +
                             std::to_string(monomials[k].degree()) + ", form degree is " + std::to_string(degree));
        }
    }
    poly_ = Polynomial(n, std::move(monomials));
}

IntegerForm::IntegerForm(int degree, Polynomial poly) : degree_(degree), poly_(std::move(poly)) {
    if (degree < 0) throw InputError("form degree must be non-negative");
    if (!poly_.is_homogeneous(degree)) {
        throw InputError("polynomial is not homogeneous of degree " + std::to_string(degree));
    }
}

Integer IntegerForm::operator()(std::span<const Integer> x) const { return poly_(x); }
Integer IntegerForm::operator()(std::span<const std::int64_t> x) const { return poly_(x); }

std::vector<Integer> IntegerForm::gradient(std::span<const Integer> x) const {
    std::vector<Integer> g;
    g.reserve(n());
    for (std::size_t i = 0; i < n(); ++i) g.push_back(poly_.derivative(i)(x));
    return g;
}

IntVector to_integers(std::span<const std::int64_t> v) { return IntVector(v.begin(), v.end()); }

MultilinearForm::MultilinearForm(std::size_t n, int arity, std::vector<Term> terms) : n_(n), arity_(arity) {
    std::map<std::vector<int>, Integer> map;
    for (auto& t : terms) {
        if (static_cast<int>(t.slots.size()) != arity) throw InputError("multilinear term has wrong arity");
        for (int s : t.slots) {
            if (s < 0 || static_cast<std::size_t>(s) >= n) throw InputError("multilinear slot index out of range");
        }
        auto [it, inserted] = map.try_emplace(t.slots, t.coeff);
        if (!inserted) it->second += t.coeff;
    }
    for (auto& [slots, coeff] : map) {
        if (coeff != 0) terms_.push_back({std::move(coeff), slots});
    }
}

Integer MultilinearForm::operator()(std::span<const IntVector> slots) const {
    if (static_cast<int>(slots.size()) != arity_) throw InputError("multilinear form: wrong number of slots");
    for (const auto& s : slots) {
        if (s.size() != n_) throw InputError("multilinear form: slot vector has wrong length");
    }
    Integer total = 0;
    for (const auto& t : terms_) {
        Integer v = t.coeff;
        for (int s = 0; s < arity_; ++s) v *= slots[s][t.slots[s]];
        total += v;
    }
    return total;
}

IntVector MultilinearForm::row_vector(std::span<const IntVector> leading) const {
    if (static_cast<int>(leading.size()) != arity_ - 1) {
        throw InputError("row vector needs " + std::to_string(arity_ - 1) + " slot vectors");
    }
    for (const auto& s : leading) {
        if (s.size() != n_) throw InputError("multilinear form: slot vector has wrong length");
    }
    IntVector row(n_, 0);
    for (const auto& t : terms_) {
        Integer v = t.coeff;
        for (int s = 0; s + 1 < arity_; ++s) v *= leading[s][t.slots[s]];
        row[t.slots.back()] += v;
    }
    return row;
}

MultilinearForm MultilinearForm::permuted(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != arity_) throw InputError("permutation has wrong length");
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
        Term p{t.coeff, std::vector<int>(arity_)};
        for (int s = 0; s < arity_; ++s) p.slots[s] = t.slots[perm[s]];
        out.push_back(std::move(p));
    }
    return MultilinearForm(n_, arity_, std::move(out));
}

bool MultilinearForm::is_symmetric() const {
    std::vector<int> perm(arity_);
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
        if (!(permuted(perm) == *this)) return false;
    }
    return true;
}

MultilinearForm polar_form(const IntegerForm& form) {
    const int d = form.degree();
    if (d < 1) throw InputError("polar form needs degree >= 1");
    const std::size_t n = form.n();
    // Ring layout: y_0..y_{n-1}, then one block of n variables per slot.
    const std::size_t width = n * static_cast<std::size_t>(d + 1);

    std::vector<Polynomial> embed;
    for (std::size_t i = 0; i < n; ++i) embed.push_back(Polynomial::variable(width, i));
    Polynomial g = compose(form.polynomial(), embed);

    for (int s = 1; s <= d; ++s) {
        std::vector<Polynomial> shift;
        shift.reserve(width);
        for (std::size_t v = 0; v < width; ++v) {
            Polynomial image = Polynomial::variable(width, v);
            if (v < n) image = image + Polynomial::variable(width, s * n + v);
            shift.push_back(std::move(image));
        }
        g = compose(g, shift) - g;
    }

    std::vector<MultilinearForm::Term> terms;
    for (const auto& m : g.terms()) {
        MultilinearForm::Term t{m.coeff, std::vector<int>(d, -1)};
        for (std::size_t v = 0; v < width; ++v) {
            if (m.exps[v] == 0) continue;
            // d-fold differencing leaves exactly one variable per slot block
            if (v < n || m.exps[v] != 1) throw std::logic_error("polar form: residual non-multilinear term");
            const std::size_t block = v / n;
            if (t.slots[block - 1] != -1) throw std::logic_error("polar form: slot used twice");
            t.slots[block - 1] = static_cast<int>(v % n);
        }
        if (std::find(t.slots.begin(), t.slots.end(), -1) != t.slots.end()) {
            throw std::logic_error("polar form: empty slot");
        }
        terms.push_back(std::move(t));
    }
    return MultilinearForm(n, d, std::move(terms));
}

IntVector polar_row_vector(const IntegerForm& form, std::span<const IntVector> leading) {
    return polar_form(form).row_vector(leading);
}

}  // namespace cm
