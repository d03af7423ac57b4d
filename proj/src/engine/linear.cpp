#include <algorithm>
#include <set>

#include "casbridge/engine/algebra.hpp"

namespace casbridge::engine {

namespace {

// sum a[v] * v + c, with `< 0` when strict and `<= 0` otherwise.
struct Row {
    std::map<std::string, Rational> a;
    Rational c;
    bool strict = false;

    Rational value(const Assignment& x) const {
        Rational s = c;
        for (const auto& [v, k] : a) s += k * x.at(v);
        return s;
    }
    bool operator<(const Row& o) const {
        if (a != o.a) return a < o.a;
        if (c != o.c) return c < o.c;
        return strict < o.strict;
    }
};

Row row_of(const Poly& p) {
    Row r;
    for (const auto& [m, k] : p.terms()) {
        if (m.empty()) {
            r.c = k;
        } else {
            r.a[m.begin()->first] = k;
        }
    }
    return r;
}

void add_scaled(Row& into, const Row& from, const Rational& k) {
    for (const auto& [v, x] : from.a) {
        Rational& slot = into.a[v];
        slot += k * x;
        if (slot == 0) into.a.erase(v);
    }
    into.c += k * from.c;
}

// Replaces v by the affine expression `expr` (a row read as v = sum + c).
Row substitute(const Row& r, const std::string& v, const Row& expr) {
    auto it = r.a.find(v);
    if (it == r.a.end()) return r;
    Rational k = it->second;
    Row out = r;
    out.a.erase(v);
    add_scaled(out, expr, k);
    return out;
}

// Positive scaling so that duplicates compare equal.
Row normalized(Row r) {
    Rational scale = 0;
    for (const auto& [v, k] : r.a) scale = std::max(scale, Rational(abs(k)));
    if (scale == 0) return r;
    for (auto& [v, k] : r.a) k /= scale;
    r.c /= scale;
    return r;
}

struct Stage {
    std::string var;
    std::vector<Row> bounds;  // every row mentioning var at this stage
};

std::optional<Rational> pick(const std::optional<Rational>& lo, bool lo_strict, const std::optional<Rational>& hi,
                             bool hi_strict) {
    auto ok = [&](const Rational& x) {
        if (lo && (lo_strict ? x <= *lo : x < *lo)) return false;
        if (hi && (hi_strict ? x >= *hi : x > *hi)) return false;
        return true;
    };
    if (ok(0)) return Rational(0);
    if (lo) {
        mpz_class f;
        mpz_fdiv_q(f.get_mpz_t(), lo->get_num_mpz_t(), lo->get_den_mpz_t());
        for (mpz_class z = f; z <= f + 1; ++z)
            if (ok(Rational(z))) return Rational(z);
    }
    if (hi) {
        mpz_class f;
        mpz_cdiv_q(f.get_mpz_t(), hi->get_num_mpz_t(), hi->get_den_mpz_t());
        for (mpz_class z = f; z >= f - 1; --z)
            if (ok(Rational(z))) return Rational(z);
    }
    if (lo && hi) {
        Rational mid = (*lo + *hi) / 2;
        if (ok(mid)) return mid;
    }
    return std::nullopt;
}

}  // namespace

std::optional<Assignment> find_instance(const std::vector<LinConstraint>& constraints,
                                        const std::vector<std::string>& vars, const LinearOptions& opts) {
    std::set<std::string> all(vars.begin(), vars.end());
    for (const auto& k : constraints)
        for (const auto& v : k.poly.variables()) all.insert(v);
    if (all.size() > opts.max_variables) throw VariableLimit(opts.max_variables);

    std::vector<Row> eqs, rows;
    for (const auto& k : constraints) {
        Row r = row_of(k.poly);
        r.strict = k.rel == poly::Relation::Lt0;
        (k.rel == poly::Relation::Eq0 ? eqs : rows).push_back(r);
    }

    // equalities first, by substitution
    std::vector<std::pair<std::string, Row>> solved;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        Row e = eqs[i];
        if (e.a.empty()) {
            if (e.c != 0) return std::nullopt;
            continue;
        }
        auto [v, k] = *e.a.begin();
        Row expr;
        for (const auto& [w, x] : e.a)
            if (w != v) expr.a[w] = -x / k;
        expr.c = -e.c / k;
        for (std::size_t j = i + 1; j < eqs.size(); ++j) eqs[j] = substitute(eqs[j], v, expr);
        for (auto& r : rows) r = substitute(r, v, expr);
        for (auto& [w, ex] : solved) ex = substitute(ex, v, expr);
        solved.emplace_back(v, expr);
    }

    // Fourier-Motzkin on the inequalities
    std::vector<Stage> stages;
    while (true) {
        std::set<Row> unique;
        std::vector<Row> next;
        for (auto& r : rows) {
            if (r.a.empty()) {
                if (r.strict ? r.c >= 0 : r.c > 0) return std::nullopt;
                continue;
            }
            if (unique.insert(normalized(r)).second) next.push_back(r);
        }
        rows = std::move(next);
        if (rows.empty()) break;
        std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
        for (const auto& r : rows)
            for (const auto& [v, k] : r.a) (k > 0 ? counts[v].second : counts[v].first)++;
        std::string var;
        std::size_t best = ~std::size_t{0};
        for (const auto& [v, c] : counts) {
            std::size_t cost = c.first * c.second;
            if (cost < best) {
                best = cost;
                var = v;
            }
        }
        Stage st{var, {}};
        std::vector<Row> lower, upper, rest;
        for (auto& r : rows) {
            auto it = r.a.find(var);
            if (it == r.a.end()) {
                rest.push_back(r);
                continue;
            }
            st.bounds.push_back(r);
            (it->second > 0 ? upper : lower).push_back(r);
        }
        if (rest.size() + lower.size() * upper.size() > opts.max_constraints)
            throw std::runtime_error("Fourier-Motzkin elimination exceeded the constraint limit");
        for (const auto& lo : lower) {
            for (const auto& up : upper) {
                Rational kl = -lo.a.at(var), ku = up.a.at(var);
                Row combined;
                add_scaled(combined, lo, ku);
                add_scaled(combined, up, kl);
                combined.a.erase(var);
                combined.strict = lo.strict || up.strict;
                rest.push_back(combined);
            }
        }
        stages.push_back(std::move(st));
        rows = std::move(rest);
    }

    // variables that cancelled out of every later stage are free
    Assignment x;
    for (const auto& v : all) {
        bool staged = std::any_of(stages.begin(), stages.end(), [&](const Stage& s) { return s.var == v; });
        bool eliminated = std::any_of(solved.begin(), solved.end(), [&](const auto& s) { return s.first == v; });
        if (!staged && !eliminated) x[v] = 0;
    }
    for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
        std::optional<Rational> lo, hi;
        bool lo_strict = false, hi_strict = false;
        for (const auto& r : it->bounds) {
            Rational k = r.a.at(it->var);
            Row others = r;
            others.a.erase(it->var);
            Rational bound = -others.value(x) / k;
            if (k > 0) {
                if (!hi || bound < *hi) {
                    hi = bound;
                    hi_strict = r.strict;
                } else if (bound == *hi) {
                    hi_strict = hi_strict || r.strict;
                }
            } else if (!lo || bound > *lo) {
                lo = bound;
                lo_strict = r.strict;
            } else if (bound == *lo) {
                lo_strict = lo_strict || r.strict;
            }
        }
        auto v = pick(lo, lo_strict, hi, hi_strict);
        if (!v) return std::nullopt;  // not reached when elimination is exact
        x[it->var] = *v;
    }
    for (auto it = solved.rbegin(); it != solved.rend(); ++it) x[it->first] = it->second.value(x);
    for (const auto& k : constraints)
        if (!k.satisfied_by(x)) throw std::logic_error("find_instance produced a non-solution");
    return x;
}

std::optional<std::vector<Rational>> farkas_coefficients(const std::vector<LinConstraint>& hyps,
                                                         const LinearOptions& opts) {
    if (hyps.empty()) return std::nullopt;
    std::set<std::string> vars;
    for (const auto& h : hyps)
        for (const auto& v : h.poly.variables()) vars.insert(v);
    std::vector<std::string> cs;
    for (std::size_t i = 0; i < hyps.size(); ++i) cs.push_back("c" + std::to_string(i));

    std::vector<LinConstraint> dual;
    for (const auto& v : vars) {
        Poly s;
        for (std::size_t i = 0; i < hyps.size(); ++i)
            s += Poly::variable(cs[i]) * Poly(hyps[i].poly.coefficient({{v, 1}}));
        dual.emplace_back(s, poly::Relation::Eq0);
    }
    Poly q, strict_weight;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        q += Poly::variable(cs[i]) * Poly(hyps[i].poly.constant_term());
        if (hyps[i].rel != poly::Relation::Eq0) dual.emplace_back(-Poly::variable(cs[i]), poly::Relation::Le0);
        if (hyps[i].rel == poly::Relation::Lt0) strict_weight += Poly::variable(cs[i]);
    }
    std::optional<Assignment> sol;
    {
        auto d = dual;
        d.emplace_back(-q, poly::Relation::Lt0);
        sol = find_instance(d, cs, opts);
    }
    if (!sol && !strict_weight.is_zero()) {
        auto d = dual;
        d.emplace_back(-q, poly::Relation::Le0);
        d.emplace_back(-strict_weight, poly::Relation::Lt0);
        sol = find_instance(d, cs, opts);
    }
    if (!sol) return std::nullopt;
    std::vector<Rational> c;
    mpz_class l = 1, g = 0;
    for (const auto& name : cs) {
        c.push_back(sol->at(name));
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.back().get_den_mpz_t());
    }
    for (auto& x : c) {
        x *= l;
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_num_mpz_t());
    }
    if (g > 1)
        for (auto& x : c) x /= g;
    return c;
}

}  // namespace casbridge::engine
