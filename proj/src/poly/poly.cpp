#include "casbridge/poly/poly.hpp"

#include <algorithm>
#include <cctype>

namespace casbridge::poly {

Rational ratio(const mpz_class& n, const mpz_class& d) {
    if (d == 0) throw std::domain_error("zero denominator");
    Rational q(n, d);
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& value) {
    Rational q = value;
    q.canonicalize();
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw std::invalid_argument("empty rational");
    try {
        if (auto dot = t.find('.'); dot != std::string::npos) {
            bool neg = t[0] == '-';
            std::string digits = t.substr(neg ? 1 : 0);
            dot = digits.find('.');
            std::string frac = digits.substr(dot + 1);
            mpz_class scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
            Rational r(mpz_class(digits.substr(0, dot).empty() ? "0" : digits.substr(0, dot)) * scale +
                           (frac.empty() ? mpz_class(0) : mpz_class(frac)),
                       scale);
            r.canonicalize();
            return neg ? Rational(-r) : r;
        }
        Rational r(t);
        if (r.get_den() == 0) throw std::invalid_argument("zero denominator");
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("not a rational number: '" + text + "'");
    }
}

unsigned degree(const Monomial& m) {
    unsigned d = 0;
    for (const auto& [v, e] : m) d += e;
    return d;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
    Monomial r = a;
    for (const auto& [v, e] : b) r[v] += e;
    return r;
}

namespace {

// Lexicographic with variables ordered by name: x > y when "x" < "y".
bool lex_greater(const Monomial& a, const Monomial& b) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) return true;
        if (ia == a.end() || ib->first < ia->first) return false;
        if (ia->second != ib->second) return ia->second > ib->second;
        ++ia;
        ++ib;
    }
    return false;
}

bool divides(const Monomial& d, const Monomial& m) {
    for (const auto& [v, e] : d) {
        auto it = m.find(v);
        if (it == m.end() || it->second < e) return false;
    }
    return true;
}

Monomial quotient(const Monomial& m, const Monomial& d) {
    Monomial r = m;
    for (const auto& [v, e] : d) {
        auto it = r.find(v);
        it->second -= e;
        if (it->second == 0) r.erase(it);
    }
    return r;
}

}  // namespace

Poly::Poly(const Rational& c) { add_term({}, c); }

Poly Poly::variable(const std::string& name) { return monomial({{name, 1}}, 1); }

Poly Poly::monomial(const Monomial& m, const Rational& c) {
    Poly p;
    p.add_term(m, c);
    return p;
}

void Poly::add_term(const Monomial& m, const Rational& value) {
    Rational c = value;
    c.canonicalize();
    if (c == 0) return;
    for (const auto& [v, e] : m)
        if (e == 0) throw std::invalid_argument("monomial with zero exponent for " + v);
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

Rational Poly::constant_term() const { return coefficient({}); }

Rational Poly::coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
}

unsigned Poly::total_degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, casbridge::poly::degree(m));
    return d;
}

unsigned Poly::degree(const std::string& var) const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) {
        auto it = m.find(var);
        if (it != m.end()) d = std::max(d, it->second);
    }
    return d;
}

std::set<std::string> Poly::variables() const {
    std::set<std::string> vs;
    for (const auto& [m, c] : terms_)
        for (const auto& [v, e] : m) vs.insert(v);
    return vs;
}

std::pair<Monomial, Rational> Poly::leading_term() const {
    if (terms_.empty()) throw std::domain_error("leading term of the zero polynomial");
    auto best = terms_.begin();
    for (auto it = terms_.begin(); it != terms_.end(); ++it)
        if (lex_greater(it->first, best->first)) best = it;
    return *best;
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

Poly& Poly::operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Poly& Poly::operator*=(const Poly& o) {
    Poly r;
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
    *this = std::move(r);
    return *this;
}

Poly Poly::pow(unsigned k) const {
    Poly result(1);
    Poly base = *this;
    while (k > 0) {
        if (k & 1u) result *= base;
        k >>= 1u;
        if (k) base *= base;
    }
    return result;
}

Rational Poly::evaluate(const Assignment& a) const {
    Poly p = partial_evaluate(a);
    if (!p.is_constant()) throw std::out_of_range("unassigned variable " + *p.variables().begin());
    return p.constant_term();
}

Poly Poly::partial_evaluate(const Assignment& a) const {
    Poly r;
    for (const auto& [m, c] : terms_) {
        Rational coeff = c;
        Monomial rest;
        for (const auto& [v, e] : m) {
            auto it = a.find(v);
            if (it == a.end()) {
                rest[v] = e;
                continue;
            }
            Rational p = 1;
            for (unsigned i = 0; i < e; ++i) p *= it->second;
            coeff *= p;
        }
        r.add_term(rest, coeff);
    }
    return r;
}

Poly Poly::substitute(const std::string& var, const Poly& value) const {
    Poly r;
    std::vector<Poly> powers{Poly(1)};
    for (const auto& [m, c] : terms_) {
        auto it = m.find(var);
        if (it == m.end()) {
            r.add_term(m, c);
            continue;
        }
        while (powers.size() <= it->second) powers.push_back(powers.back() * value);
        Monomial rest = m;
        rest.erase(var);
        r += monomial(rest, c) * powers[it->second];
    }
    return r;
}

std::vector<Poly> Poly::coefficients_in(const std::string& var) const {
    std::vector<Poly> out(degree(var) + 1);
    for (const auto& [m, c] : terms_) {
        auto it = m.find(var);
        unsigned e = it == m.end() ? 0 : it->second;
        Monomial rest = m;
        rest.erase(var);
        out[e].add_term(rest, c);
    }
    return out;
}

std::string Poly::to_string() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<Monomial, Rational>> ts(terms_.begin(), terms_.end());
    std::sort(ts.begin(), ts.end(), [](const auto& a, const auto& b) {
        unsigned da = casbridge::poly::degree(a.first), db = casbridge::poly::degree(b.first);
        if (da != db) return da > db;
        return lex_greater(a.first, b.first);
    });
    std::string out;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto& [m, c] = ts[i];
        Rational a = abs(c);
        if (i == 0)
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? " - " : " + ";
        std::string factors;
        for (const auto& [v, e] : m) {
            if (!factors.empty()) factors += "*";
            factors += v;
            if (e > 1) factors += "^" + std::to_string(e);
        }
        if (factors.empty())
            out += casbridge::poly::to_string(a);
        else if (a == 1)
            out += factors;
        else
            out += casbridge::poly::to_string(a) + "*" + factors;
    }
    return out;
}

Poly divide_exact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::domain_error("division by the zero polynomial");
    auto [lb, cb] = b.leading_term();
    Poly q;
    Poly r = a;
    while (!r.is_zero()) {
        auto [lr, cr] = r.leading_term();
        if (!divides(lb, lr)) throw NotExactDivision("polynomial division leaves a remainder");
        Poly t = Poly::monomial(quotient(lr, lb), cr / cb);
        q += t;
        r -= t * b;
    }
    return q;
}

// ---------------------------------------------------------------- univariate

void trim(UPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

UPoly to_upoly(const Poly& p, const std::string& var) {
    UPoly out(p.degree(var) + 1);
    for (const auto& [m, c] : p.terms()) {
        if (m.size() > 1 || (m.size() == 1 && m.begin()->first != var))
            throw std::invalid_argument("polynomial is not univariate in " + var);
        out[m.empty() ? 0 : m.begin()->second] += c;
    }
    trim(out);
    return out;
}

Poly from_upoly(const UPoly& p, const std::string& var) {
    Poly r;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0) continue;
        r += i == 0 ? Poly(p[i]) : Poly::monomial({{var, static_cast<unsigned>(i)}}, p[i]);
    }
    return r;
}

UPoly derivative(const UPoly& p) {
    UPoly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
    trim(d);
    return d;
}

std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b) {
    UPoly bb = b;
    trim(bb);
    if (bb.empty()) throw std::domain_error("division by the zero polynomial");
    UPoly r = a;
    trim(r);
    if (r.size() < bb.size()) return {UPoly{}, r};
    UPoly q(r.size() - bb.size() + 1);
    while (r.size() >= bb.size() && !r.empty()) {
        std::size_t shift = r.size() - bb.size();
        Rational f = r.back() / bb.back();
        q[shift] = f;
        for (std::size_t i = 0; i < bb.size(); ++i) r[i + shift] -= f * bb[i];
        r.pop_back();
        trim(r);
    }
    trim(q);
    return {q, r};
}

UPoly gcd(UPoly a, UPoly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        UPoly r = divmod(a, b).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        Rational lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

Rational evaluate(const UPoly& p, const Rational& x) {
    Rational acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
    return acc;
}

// ---------------------------------------------------------------- constraints

std::string to_string(Relation r) {
    switch (r) {
        case Relation::Le0:
            return "<=";
        case Relation::Lt0:
            return "<";
        case Relation::Eq0:
            return "=";
    }
    return "?";
}

LinConstraint::LinConstraint(Poly p, Relation r) : poly(std::move(p)), rel(r) {
    if (poly.total_degree() > 1) throw NonLinear("constraint is not linear: " + poly.to_string());
}

bool LinConstraint::satisfied_by(const Assignment& a) const {
    Rational v = poly.evaluate(a);
    switch (rel) {
        case Relation::Le0:
            return v <= 0;
        case Relation::Lt0:
            return v < 0;
        case Relation::Eq0:
            return v == 0;
    }
    return false;
}

std::string LinConstraint::to_string() const { return poly.to_string() + " " + poly::to_string(rel) + " 0"; }

}  // namespace casbridge::poly
