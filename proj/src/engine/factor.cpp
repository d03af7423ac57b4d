#include <algorithm>
#include <numeric>

#include "casbridge/engine/algebra.hpp"

namespace casbridge::engine {

using poly::UPoly;

// ---------------------------------------------------------------- rational roots

namespace {

UPoly scale_to_integers(UPoly p) {
    mpz_class l = 1;
    for (const auto& c : p) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    mpz_class g = 0;
    for (auto& c : p) {
        c *= l;
        c.canonicalize();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
    }
    if (g > 1)
        for (auto& c : p) c /= g;
    return p;
}

int sign_at(const UPoly& p, const mpq_class& x) { return sgn(poly::evaluate(p, x)); }

std::vector<UPoly> sturm_sequence(const UPoly& p) {
    std::vector<UPoly> seq{p, poly::derivative(p)};
    while (seq.back().size() > 1) {
        UPoly r = poly::divmod(seq[seq.size() - 2], seq.back()).second;
        poly::trim(r);
        if (r.empty()) break;
        for (auto& c : r) c = -c;
        seq.push_back(scale_to_integers(r));
    }
    return seq;
}

int variations(const std::vector<UPoly>& seq, const mpq_class& x) {
    int count = 0, last = 0;
    for (const auto& s : seq) {
        int v = sign_at(s, x);
        if (v == 0) continue;
        if (last != 0 && v != last) ++count;
        last = v;
    }
    return count;
}

// Integer roots of a square-free integer polynomial inside (lo, hi].
void integer_roots(const UPoly& g, const std::vector<UPoly>& seq, const mpz_class& lo, const mpz_class& hi, int vlo,
                   int vhi, std::vector<mpz_class>& out) {
    int count = vlo - vhi;
    if (count <= 0) return;
    if (hi - lo == 1) {
        if (poly::evaluate(g, mpq_class(hi)) == 0) out.push_back(hi);
        return;
    }
    mpz_class mid = lo + (hi - lo) / 2;
    int vmid = variations(seq, mpq_class(mid));
    integer_roots(g, seq, lo, mid, vlo, vmid, out);
    integer_roots(g, seq, mid, hi, vmid, vhi, out);
}

}  // namespace

std::vector<Rational> rational_roots(const UPoly& input) {
    UPoly p = input;
    poly::trim(p);
    if (p.empty()) throw std::invalid_argument("rational_roots of the zero polynomial");
    std::vector<Rational> roots;
    std::size_t zeros = 0;
    while (zeros < p.size() && p[zeros] == 0) ++zeros;
    if (zeros > 0) {
        roots.emplace_back(0);
        p.erase(p.begin(), p.begin() + static_cast<long>(zeros));
    }
    if (p.size() <= 1) return roots;
    UPoly g0 = poly::gcd(p, poly::derivative(p));
    UPoly sf = g0.size() > 1 ? poly::divmod(p, g0).first : p;
    sf = scale_to_integers(sf);
    std::size_t n = sf.size() - 1;
    mpz_class a = sf[n].get_num();
    if (a < 0) {
        for (auto& c : sf) c = -c;
        a = -a;
    }
    // g(z) = a^(n-1) f(z/a) is monic with integer coefficients; its rational
    // roots are integers z and the roots of f are z/a.
    UPoly g(n + 1);
    mpz_class apow = 1;
    for (std::size_t i = n; i-- > 0;) {
        g[i] = sf[i] * apow;
        apow *= a;
    }
    g[n] = 1;
    mpz_class bound = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (abs(g[i].get_num()) > bound) bound = abs(g[i].get_num());
    bound += 1;
    auto seq = sturm_sequence(g);
    std::vector<mpz_class> zs;
    mpz_class lo = -bound - 1;
    integer_roots(g, seq, lo, bound, variations(seq, mpq_class(lo)), variations(seq, mpq_class(bound)), zs);
    for (const auto& z : zs) roots.push_back(poly::ratio(z, a));
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

// ---------------------------------------------------------------- resultant

Poly resultant(const Poly& p, const Poly& q, const std::string& var) {
    auto a = p.coefficients_in(var), b = q.coefficients_in(var);
    while (!a.empty() && a.back().is_zero()) a.pop_back();
    while (!b.empty() && b.back().is_zero()) b.pop_back();
    if (a.empty() || b.empty()) return Poly();
    std::size_t m = a.size() - 1, n = b.size() - 1;
    if (m == 0) return a[0].pow(static_cast<unsigned>(n));
    if (n == 0) return b[0].pow(static_cast<unsigned>(m));
    std::size_t size = m + n;
    std::vector<std::vector<Poly>> mat(size, std::vector<Poly>(size));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i <= m; ++i) mat[r][r + i] = a[m - i];
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i <= n; ++i) mat[n + r][r + i] = b[n - i];
    // Bareiss fraction-free elimination
    Poly prev(1);
    bool negate = false;
    for (std::size_t k = 0; k + 1 < size; ++k) {
        if (mat[k][k].is_zero()) {
            std::size_t r = k + 1;
            while (r < size && mat[r][k].is_zero()) ++r;
            if (r == size) return Poly();
            std::swap(mat[k], mat[r]);
            negate = !negate;
        }
        for (std::size_t i = k + 1; i < size; ++i) {
            for (std::size_t j = k + 1; j < size; ++j)
                mat[i][j] = poly::divide_exact(mat[i][j] * mat[k][k] - mat[i][k] * mat[k][j], prev);
            mat[i][k] = Poly();
        }
        prev = mat[k][k];
    }
    Poly det = mat[size - 1][size - 1];
    return negate ? -det : det;
}

// ---------------------------------------------------------------- factorization

namespace {

using Factors = std::vector<std::pair<Poly, unsigned>>;

// Splits p into unit * primitive integer polynomial with positive leading coefficient.
std::pair<Rational, Poly> normalize(const Poly& p) {
    mpz_class l = 1, g = 0;
    for (const auto& [m, c] : p.terms()) {
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
    }
    Rational unit = poly::ratio(g, l);
    if (p.leading_term().second < 0) unit = -unit;
    Poly q = p * Poly(Rational(1 / unit));
    return {unit, q};
}

UPoly cyclotomic(unsigned n) {
    UPoly num(n + 1);
    num[0] = -1;
    num[n] = 1;
    for (unsigned d = 1; d < n; ++d)
        if (n % d == 0) num = poly::divmod(num, cyclotomic(d)).first;
    return num;
}

std::optional<mpq_class> exact_kth_root(const mpq_class& c, unsigned long k) {
    mpz_class rn, rd;
    mpz_class n = abs(c.get_num());
    if (mpz_root(rn.get_mpz_t(), n.get_mpz_t(), k) == 0) return std::nullopt;
    if (mpz_root(rd.get_mpz_t(), c.get_den_mpz_t(), k) == 0) return std::nullopt;
    return poly::ratio(rn, rd);
}

Poly monomial_root(const poly::Monomial& m, unsigned k) {
    poly::Monomial r;
    for (const auto& [v, e] : m) r[v] = e / k;
    return Poly::monomial(r, 1);
}

// u^k - c v^k over the homogenized cyclotomic polynomials.
std::optional<Factors> split_binomial(const Poly& p) {
    if (p.terms().size() != 2) return std::nullopt;
    auto it = p.terms().begin();
    poly::Monomial m2 = it->first, m1 = std::next(it)->first;
    Rational b2 = it->second, a1 = std::next(it)->second;
    if (p.leading_term().first != m1) {
        std::swap(m1, m2);
        std::swap(a1, b2);
    }
    unsigned g = 0;
    for (const auto* m : {&m1, &m2})
        for (const auto& [v, e] : *m) g = std::gcd(g, e);
    if (g < 2) return std::nullopt;
    Rational c = -b2 / a1;
    for (unsigned k = g; k >= 2; --k) {
        if (g % k != 0) continue;
        auto beta = exact_kth_root(c, k);
        if (!beta) continue;
        std::vector<unsigned> ds;
        if (c > 0 || k % 2 == 1) {
            if (c < 0) *beta = -*beta;
            for (unsigned d = 1; d <= k; ++d)
                if (k % d == 0) ds.push_back(d);
        } else {
            for (unsigned d = 1; d <= 2 * k; ++d)
                if ((2 * k) % d == 0 && k % d != 0) ds.push_back(d);
        }
        if (ds.size() < 2) continue;
        Poly u = monomial_root(m1, k), v = monomial_root(m2, k) * Poly(*beta);
        Factors out;
        for (unsigned d : ds) {
            UPoly phi = cyclotomic(d);
            std::size_t deg = phi.size() - 1;
            Poly f;
            for (std::size_t i = 0; i <= deg; ++i)
                if (phi[i] != 0) f += Poly(phi[i]) * u.pow(static_cast<unsigned>(i)) * v.pow(static_cast<unsigned>(deg - i));
            out.emplace_back(f, 1);
        }
        return out;
    }
    return std::nullopt;
}

Factors factor_univariate(const Poly& p, const std::string& var) {
    UPoly f = poly::to_upoly(p, var);
    Factors out;
    // Yun's square-free decomposition
    UPoly d = poly::derivative(f);
    UPoly c = poly::gcd(f, d);
    UPoly w = poly::divmod(f, c).first;
    UPoly y = poly::divmod(d, c).first;
    auto sub = [](UPoly a, const UPoly& b) {
        if (a.size() < b.size()) a.resize(b.size());
        for (std::size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
        poly::trim(a);
        return a;
    };
    UPoly z = sub(y, poly::derivative(w));
    for (unsigned i = 1; w.size() > 1; ++i) {
        UPoly g = poly::gcd(w, z);
        if (g.size() > 1) {
            UPoly rest = g;
            for (const auto& r : rational_roots(g)) {
                UPoly lin{-r, 1};
                rest = poly::divmod(rest, lin).first;
                out.emplace_back(poly::from_upoly(lin, var), i);
            }
            if (rest.size() > 1) out.emplace_back(poly::from_upoly(rest, var), i);
        }
        w = poly::divmod(w, g).first;
        y = poly::divmod(z, g).first;
        z = sub(y, poly::derivative(w));
    }
    return out;
}

Factors factor_primitive(const Poly& p) {
    if (p.is_constant()) return {};
    if (auto b = split_binomial(p)) return *b;
    auto vars = p.variables();
    if (vars.size() == 1) return factor_univariate(p, *vars.begin());
    return {{p, 1}};
}

}  // namespace

std::vector<std::pair<Poly, unsigned>> factor(const Poly& p) {
    if (p.is_zero()) throw std::invalid_argument("factor of the zero polynomial");
    if (p.is_constant()) return {{p, 1}};
    Poly q = normalize(p).second;
    poly::Monomial common;
    bool first = true;
    for (const auto& [m, c] : q.terms()) {
        if (first) {
            common = m;
            first = false;
            continue;
        }
        for (auto it = common.begin(); it != common.end();) {
            auto f = m.find(it->first);
            if (f == m.end()) {
                it = common.erase(it);
            } else {
                it->second = std::min(it->second, f->second);
                ++it;
            }
        }
    }
    Factors raw;
    if (!common.empty()) {
        q = poly::divide_exact(q, Poly::monomial(common, 1));
        for (const auto& [v, e] : common) raw.emplace_back(Poly::variable(v), e);
    }
    for (auto& f : factor_primitive(q)) raw.push_back(f);
    Factors merged;
    Poly product(1);
    for (const auto& [f, k] : raw) {
        Poly g = normalize(f).second;
        product *= g.pow(k);
        auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& x) { return x.first == g; });
        if (it == merged.end()) {
            merged.emplace_back(g, k);
        } else {
            it->second += k;
        }
    }
    Rational unit = poly::divide_exact(p, product).constant_term();
    Factors out;
    if (unit != 1) out.emplace_back(Poly(unit), 1);
    out.insert(out.end(), merged.begin(), merged.end());
    return out;
}

CExpr factor_expr(const std::vector<std::pair<Poly, unsigned>>& factors, const Atoms& atoms) {
    std::vector<CExpr> parts;
    for (const auto& [f, k] : factors)
        parts.push_back(make_power(from_poly(f, atoms), CExpr::integer(static_cast<long>(k))));
    return make_times(parts);
}

}  // namespace casbridge::engine
