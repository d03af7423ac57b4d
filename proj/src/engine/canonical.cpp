#include <algorithm>
#include <cctype>

#include "casbridge/engine/algebra.hpp"

namespace casbridge::engine {

using cexpr::CKind;

namespace {

std::optional<mpq_class> num(const CExpr& e) { return e.number(); }

bool is_num(const CExpr& e) { return e.is(CKind::Int) || e.is(CKind::Real) || e.has_head("Rational", 2); }

bool is_one(const CExpr& e) { return e.is(CKind::Int) && e.int_value() == 1; }

int sign(int c) { return (c > 0) - (c < 0); }

// Alphabetical with case ignored first, lower case ahead of upper on ties.
int symbol_compare(const std::string& a, const std::string& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        int la = std::tolower(static_cast<unsigned char>(a[i])), lb = std::tolower(static_cast<unsigned char>(b[i]));
        if (la != lb) return la < lb ? -1 : 1;
    }
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] != b[i]) return std::islower(static_cast<unsigned char>(a[i])) ? -1 : 1;
    return 0;
}

int kind_rank(const CExpr& e) {
    if (is_num(e)) return 0;
    switch (e.kind()) {
        case CKind::Str:
            return 1;
        case CKind::Sym:
            return 2;
        default:
            return 3;
    }
}

int base_compare(const CExpr& a, const CExpr& b) {
    int ra = kind_rank(a), rb = kind_rank(b);
    if (ra != rb) return ra < rb ? -1 : 1;
    switch (ra) {
        case 0: {
            mpq_class x = *num(a), y = *num(b);
            if (x != y) return x < y ? -1 : 1;
            return cexpr::compare(a, b);
        }
        case 1:
            return sign(a.text().compare(b.text()));
        case 2:
            return symbol_compare(a.text(), b.text());
        default:
            break;
    }
    if (int c = base_compare(a.head(), b.head())) return c;
    std::size_t n = std::min(a.args().size(), b.args().size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = canonical_compare(a.arg(i), b.arg(i))) return c;
    if (a.args().size() != b.args().size()) return a.args().size() < b.args().size() ? -1 : 1;
    return 0;
}

struct MonomialView {
    CExpr coefficient = CExpr::integer(1);
    std::vector<std::pair<CExpr, CExpr>> factors;  // largest base first
};

std::pair<CExpr, CExpr> base_exp(const CExpr& f) {
    if (f.has_head("Power", 2)) return {f.arg(0), f.arg(1)};
    return {f, CExpr::integer(1)};
}

MonomialView view(const CExpr& t) {
    MonomialView v;
    if (t.has_head("Times") && !t.args().empty()) {
        std::size_t start = 0;
        if (is_num(t.arg(0))) {
            v.coefficient = t.arg(0);
            start = 1;
        }
        for (std::size_t i = start; i < t.args().size(); ++i) v.factors.push_back(base_exp(t.arg(i)));
    } else {
        v.factors.push_back(base_exp(t));
    }
    std::stable_sort(v.factors.begin(), v.factors.end(),
                     [](const auto& x, const auto& y) { return base_compare(x.first, y.first) > 0; });
    return v;
}

int exponent_compare(const CExpr& a, const CExpr& b) {
    if (is_num(a) && is_num(b)) {
        mpq_class x = *num(a), y = *num(b);
        if (x != y) return x < y ? -1 : 1;
        return 0;
    }
    return canonical_compare(a, b);
}

}  // namespace

int canonical_compare(const CExpr& a, const CExpr& b) {
    bool na = is_num(a), nb = is_num(b);
    if (na || nb) {
        if (na && nb) return base_compare(a, b);
        return na ? -1 : 1;
    }
    MonomialView va = view(a), vb = view(b);
    std::size_t n = std::min(va.factors.size(), vb.factors.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (int c = base_compare(va.factors[i].first, vb.factors[i].first)) return c;
        if (int c = exponent_compare(va.factors[i].second, vb.factors[i].second)) return c;
    }
    if (va.factors.size() != vb.factors.size()) return va.factors.size() < vb.factors.size() ? -1 : 1;
    if (int c = base_compare(va.coefficient, vb.coefficient)) return c;
    return cexpr::compare(a, b);
}

namespace {

void sort_canonical(std::vector<CExpr>& v) {
    std::sort(v.begin(), v.end(), [](const CExpr& x, const CExpr& y) { return canonical_compare(x, y) < 0; });
}

void flatten_into(const CExpr& e, const char* head, std::vector<CExpr>& out) {
    if (e.has_head(head)) {
        for (const auto& a : e.args()) flatten_into(a, head, out);
    } else {
        out.push_back(e);
    }
}

// Keeps insertion order so the result does not depend on map iteration.
template <typename V>
struct Collector {
    std::vector<CExpr> keys;
    std::map<CExpr, V, cexpr::CExprLess> values;
    V& at(const CExpr& k, const V& init) {
        auto it = values.find(k);
        if (it == values.end()) {
            keys.push_back(k);
            it = values.emplace(k, init).first;
        }
        return it->second;
    }
};

}  // namespace

CExpr make_plus(std::vector<CExpr> terms) {
    std::vector<CExpr> flat;
    for (const auto& t : terms) flatten_into(t, "Plus", flat);
    mpq_class constant = 0;
    Collector<mpq_class> like;
    for (const auto& t : flat) {
        if (auto q = num(t)) {
            constant += *q;
            continue;
        }
        mpq_class coef = 1;
        CExpr rest = t;
        if (t.has_head("Times") && t.args().size() >= 2 && is_num(t.arg(0))) {
            coef = *num(t.arg(0));
            std::vector<CExpr> others(t.args().begin() + 1, t.args().end());
            rest = others.size() == 1 ? others[0] : CExpr::app("Times", others);
        }
        like.at(rest, mpq_class(0)) += coef;
    }
    std::vector<CExpr> out;
    for (const auto& k : like.keys) {
        const mpq_class& c = like.values.at(k);
        if (c == 0) continue;
        if (c == 1) {
            out.push_back(k);
            continue;
        }
        std::vector<CExpr> fs{CExpr::rational(c)};
        if (k.has_head("Times")) {
            fs.insert(fs.end(), k.args().begin(), k.args().end());
        } else {
            fs.push_back(k);
        }
        out.push_back(CExpr::app("Times", fs));
    }
    sort_canonical(out);
    if (constant != 0) out.insert(out.begin(), CExpr::rational(constant));
    if (out.empty()) return CExpr::integer(0);
    if (out.size() == 1) return out[0];
    return CExpr::app("Plus", out);
}

CExpr make_times(std::vector<CExpr> factors) {
    std::vector<CExpr> flat;
    for (const auto& f : factors) flatten_into(f, "Times", flat);
    mpq_class coef = 1;
    Collector<std::vector<CExpr>> powers;
    for (const auto& f : flat) {
        if (auto q = num(f)) {
            coef *= *q;
            continue;
        }
        auto [b, e] = base_exp(f);
        powers.at(b, {}).push_back(e);
    }
    if (coef == 0) return CExpr::integer(0);
    std::vector<CExpr> out;
    bool again = false;
    for (const auto& b : powers.keys) {
        const auto& exps = powers.values.at(b);
        CExpr e = exps.size() == 1 ? exps[0] : make_plus(exps);
        CExpr p = exps.size() == 1 ? (is_one(e) ? b : CExpr::app("Power", {b, e})) : make_power(b, e);
        if (num(p) || p.has_head("Times")) again = true;
        out.push_back(p);
    }
    if (again) {
        out.push_back(CExpr::rational(coef));
        return make_times(out);
    }
    sort_canonical(out);
    if (coef != 1) out.insert(out.begin(), CExpr::rational(coef));
    if (out.empty()) return CExpr::integer(1);
    if (out.size() == 1) return out[0];
    return CExpr::app("Times", out);
}

namespace {

constexpr unsigned long kMaxFoldedBits = 1u << 20;

std::optional<mpz_class> exact_root(const mpz_class& n, unsigned long k) {
    if (n < 0) {
        if (k % 2 == 0) return std::nullopt;
        auto r = exact_root(-n, k);
        if (!r) return std::nullopt;
        return mpz_class(-*r);
    }
    mpz_class r;
    if (mpz_root(r.get_mpz_t(), n.get_mpz_t(), k) == 0) return std::nullopt;
    return r;
}

std::optional<mpq_class> rational_power(const mpq_class& b, const mpz_class& e) {
    if (!e.fits_slong_p()) return std::nullopt;
    long n = e.get_si();
    if (b == 0) {
        if (n < 0) return std::nullopt;
        return mpq_class(n == 0 ? 1 : 0);
    }
    unsigned long an = static_cast<unsigned long>(n < 0 ? -n : n);
    std::size_t bits = mpz_sizeinbase(b.get_num_mpz_t(), 2) + mpz_sizeinbase(b.get_den_mpz_t(), 2);
    if (an > kMaxFoldedBits || bits * an > kMaxFoldedBits) return std::nullopt;
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), b.get_num_mpz_t(), an);
    mpz_pow_ui(den.get_mpz_t(), b.get_den_mpz_t(), an);
    mpq_class r = n < 0 ? poly::ratio(den, num) : poly::ratio(num, den);
    return r;
}

}  // namespace

CExpr make_power(const CExpr& base, const CExpr& exponent) {
    auto be = num(base), ee = num(exponent);
    if (ee && *ee == 0) return CExpr::integer(1);
    if (ee && *ee == 1) return base;
    if (be && *be == 1) return CExpr::integer(1);
    bool int_exp = ee && ee->get_den() == 1;
    if (be && int_exp) {
        if (auto r = rational_power(*be, ee->get_num())) return CExpr::rational(*r);
        return CExpr::app("Power", {base, exponent});
    }
    if (be && ee && *be > 0 && ee->get_num().fits_slong_p() && ee->get_den().fits_ulong_p()) {
        // b^(p/q) with b a perfect q-th power
        unsigned long q = ee->get_den().get_ui();
        auto rn = exact_root(be->get_num(), q), rd = exact_root(be->get_den(), q);
        if (rn && rd)
            if (auto r = rational_power(poly::ratio(*rn, *rd), ee->get_num())) return CExpr::rational(*r);
    }
    if (be && *be == 0 && ee && *ee > 0) return CExpr::integer(0);
    if (int_exp && base.has_head("Power", 2)) {
        const CExpr& inner = base.arg(1);
        auto ie = num(inner);
        CExpr prod = ie ? CExpr::rational(*ie * *ee) : make_times({inner, exponent});
        return make_power(base.arg(0), prod);
    }
    if (int_exp && base.has_head("Times")) {
        std::vector<CExpr> fs;
        for (const auto& f : base.args()) fs.push_back(make_power(f, exponent));
        return make_times(fs);
    }
    return CExpr::app("Power", {base, exponent});
}

// ---------------------------------------------------------------- polynomial view

std::string Atoms::name_of(const CExpr& atom) {
    auto it = names_.find(atom);
    if (it != names_.end()) return it->second;
    std::string name = atom.is(CKind::Sym) ? atom.text() : "#" + std::to_string(atoms_.size() + 1);
    names_.emplace(atom, name);
    atoms_.emplace(name, atom);
    return name;
}

CExpr Atoms::atom(const std::string& name) const {
    auto it = atoms_.find(name);
    return it == atoms_.end() ? CExpr::sym(name) : it->second;
}

namespace {

constexpr unsigned kMaxPolyExponent = 4096;

Poly convert(const CExpr& e, Atoms* atoms) {
    auto opaque = [&](const CExpr& x) -> Poly {
        if (!atoms) throw NotPolynomial(x);
        return Poly::variable(atoms->name_of(x));
    };
    if (auto q = num(e)) return Poly(*q);
    if (e.is(CKind::Sym)) return Poly::variable(atoms ? atoms->name_of(e) : e.text());
    if (!e.is(CKind::App)) return opaque(e);
    if (e.has_head("Plus")) {
        Poly s;
        for (const auto& a : e.args()) s += convert(a, atoms);
        return s;
    }
    if (e.has_head("Times")) {
        Poly s(1);
        for (const auto& a : e.args()) s *= convert(a, atoms);
        return s;
    }
    if (e.has_head("Subtract", 2)) return convert(e.arg(0), atoms) - convert(e.arg(1), atoms);
    if (e.has_head("Minus", 1)) return -convert(e.arg(0), atoms);
    if (e.has_head("Divide", 2)) {
        auto d = num(e.arg(1));
        if (d && *d != 0) return convert(e.arg(0), atoms) * Poly(mpq_class(1 / *d));
        return opaque(e);
    }
    if (e.has_head("Power", 2) && e.arg(1).is(CKind::Int) && e.arg(1).int_value() >= 0 &&
        e.arg(1).int_value() <= kMaxPolyExponent)
        return convert(e.arg(0), atoms).pow(static_cast<unsigned>(e.arg(1).int_value().get_ui()));
    if (e.has_head("Power", 2) && e.arg(1).is(CKind::Int) && e.arg(1).int_value() < 0 &&
        -e.arg(1).int_value() <= kMaxPolyExponent) {
        // only a constant base may be inverted
        auto b = num(e.arg(0));
        if (b && *b != 0) {
            mpq_class inv = 1 / *b;
            return Poly(inv).pow(static_cast<unsigned>(mpz_class(-e.arg(1).int_value()).get_ui()));
        }
    }
    return opaque(e);
}

}  // namespace

Poly to_poly(const CExpr& e) { return convert(e, nullptr); }

Poly to_poly(const CExpr& e, Atoms& atoms) { return convert(e, &atoms); }

CExpr from_poly(const Poly& p, const Atoms& atoms) {
    std::vector<CExpr> terms;
    for (const auto& [m, c] : p.terms()) {
        std::vector<CExpr> fs{CExpr::rational(c)};
        for (const auto& [v, k] : m) fs.push_back(make_power(atoms.atom(v), CExpr::integer(static_cast<long>(k))));
        terms.push_back(make_times(fs));
    }
    return make_plus(terms);
}

}  // namespace casbridge::engine
