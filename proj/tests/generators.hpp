#pragma once

// Hand-rolled random generators shared by the unit and acceptance suites.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/kexpr/context.hpp"
#include "casbridge/kexpr/expr.hpp"
#include "casbridge/poly/poly.hpp"

namespace testgen {

using casbridge::kexpr::BinderInfo;
using casbridge::kexpr::KExpr;
using casbridge::kexpr::Level;
using casbridge::kexpr::Name;

inline int pick(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Name random_name(std::mt19937& rng) {
    static const std::vector<Name> pool{Name{"x"}, Name{"y"}, Name{"f"}, Name{"real", "has_add"},
                                        Name{std::uint64_t{17}, std::uint64_t{27}}, Name{"a", std::uint64_t{3}}};
    return pool[pick(rng, 0, static_cast<int>(pool.size()) - 1)];
}

inline Level random_level(std::mt19937& rng, int depth = 2) {
    switch (depth <= 0 ? pick(rng, 0, 1) : pick(rng, 0, 3)) {
        case 0:
            return Level::of_nat(pick(rng, 0, 2));
        case 1:
            return Level::param(Name{"u"});
        case 2:
            return Level::succ(random_level(rng, depth - 1));
        default:
            return Level::max(random_level(rng, depth - 1), random_level(rng, depth - 1));
    }
}

inline BinderInfo random_bi(std::mt19937& rng) {
    return static_cast<BinderInfo>(pick(rng, 0, 2));
}

/// Random well-scoped kernel expression over every kind (no holes or ascriptions).
/// `binders` is the number of enclosing binders; locals are drawn from `locals`.
inline KExpr random_kexpr(std::mt19937& rng, int depth, std::uint32_t binders, const std::vector<KExpr>& locals) {
    int choice = depth <= 0 ? pick(rng, 0, 4) : pick(rng, 0, 9);
    switch (choice) {
        case 0:
            if (binders > 0) return KExpr::var(static_cast<std::uint32_t>(pick(rng, 0, static_cast<int>(binders) - 1)));
            return KExpr::constant(Name{"real"});
        case 1:
            return KExpr::sort(random_level(rng));
        case 2: {
            std::vector<Level> ls;
            for (int i = pick(rng, 0, 2); i > 0; --i) ls.push_back(random_level(rng));
            return KExpr::constant(random_name(rng), ls);
        }
        case 3:
            if (!locals.empty()) return locals[pick(rng, 0, static_cast<int>(locals.size()) - 1)];
            return KExpr::constant(Name{"one"});
        case 4:
            return KExpr::mvar(Name{"m", std::uint64_t(pick(rng, 1, 3))}, KExpr::constant(Name{"real"}));
        case 5:
        case 6:
            return KExpr::app(random_kexpr(rng, depth - 1, binders, locals),
                              random_kexpr(rng, depth - 1, binders, locals));
        case 7:
            return KExpr::lam(random_name(rng), random_bi(rng), random_kexpr(rng, depth - 1, binders, locals),
                              random_kexpr(rng, depth - 1, binders + 1, locals));
        case 8:
            return KExpr::pi(random_name(rng), random_bi(rng), random_kexpr(rng, depth - 1, binders, locals),
                             random_kexpr(rng, depth - 1, binders + 1, locals));
        default:
            return KExpr::let(random_name(rng), random_kexpr(rng, depth - 1, binders, locals),
                              random_kexpr(rng, depth - 1, binders, locals),
                              random_kexpr(rng, depth - 1, binders + 1, locals));
    }
}

/// Random polynomial in surface syntax over the given variable names, e.g. `3*x^2 - y + 1`.
inline std::string random_poly_text(std::mt19937& rng, const std::vector<std::string>& vars, int max_terms = 4,
                                    int max_exp = 3, int coeff = 9) {
    auto atom = [&]() -> std::string {
        int k = pick(rng, 0, 4);
        if (k == 0) return std::to_string(pick(rng, 0, coeff));
        std::string v = vars[pick(rng, 0, static_cast<int>(vars.size()) - 1)];
        int e = pick(rng, 1, max_exp);
        return e == 1 ? v : v + "^" + std::to_string(e);
    };
    std::function<std::string(int)> term = [&](int d) -> std::string {
        int k = d <= 0 ? 0 : pick(rng, 0, 5);
        switch (k) {
            case 0:
            case 1:
                return atom();
            case 2:
                return std::to_string(pick(rng, 1, coeff)) + "*" + term(d - 1);
            case 3:
                return "(" + term(d - 1) + ")*(" + term(d - 1) + ")";
            case 4:
                return "-" + term(d - 1);
            default:
                return "(" + term(d - 1) + " - " + term(d - 1) + ")^" + std::to_string(pick(rng, 1, 2));
        }
    };
    std::string out = term(2);
    for (int i = pick(rng, 0, max_terms - 1); i > 0; --i) out += (pick(rng, 0, 1) ? " + " : " - ") + term(2);
    return out;
}

/// Random C-expression covering every atom kind, compound heads and empty argument lists.
inline casbridge::cexpr::CExpr random_cexpr(std::mt19937& rng, int depth) {
    using casbridge::cexpr::CExpr;
    static const std::vector<std::string> syms{"x", "y", "Plus", "Times", "F", "LeanApp", "a$1", "List", "$z2", "ctx`f"};
    static const std::vector<std::string> strs{"", "17.27", "x", "say \"hi\"", "back\\slash", "two\nlines", "real.has_add"};
    static const std::vector<std::string> reals{"0.001", "-2.50", "3.", "1.5*^3", "-7.25*^-2", "0.0"};
    int choice = depth <= 0 ? pick(rng, 0, 4) : pick(rng, 0, 7);
    switch (choice) {
        case 0:
            return CExpr::sym(syms[pick(rng, 0, static_cast<int>(syms.size()) - 1)]);
        case 1:
            return CExpr::str(strs[pick(rng, 0, static_cast<int>(strs.size()) - 1)]);
        case 2: {
            mpz_class v = pick(rng, -50, 50);
            if (pick(rng, 0, 4) == 0) v = v * mpz_class("123456789012345678901234567890");
            return CExpr::integer(v);
        }
        case 3:
            return CExpr::real(reals[pick(rng, 0, static_cast<int>(reals.size()) - 1)]);
        case 4:
            return CExpr::sym("x");
        default: {
            CExpr head = pick(rng, 0, 4) == 0 ? random_cexpr(rng, 0) : CExpr::sym(syms[pick(rng, 0, 5)]);
            if (!head.is(casbridge::cexpr::CKind::Sym)) head = CExpr::app("Inactive", {CExpr::sym("Plus")});
            std::vector<CExpr> args;
            for (int i = pick(rng, 0, 3); i > 0; --i) args.push_back(random_cexpr(rng, depth - 1));
            return CExpr::app(head, args);
        }
    }
}

/// Random polynomial over `vars` with up to `max_terms` terms, total degree at most
/// `max_degree` and integer coefficients in [-coeff, coeff].
inline casbridge::poly::Poly random_poly(std::mt19937& rng, const std::vector<std::string>& vars, int max_terms = 5,
                                         int max_degree = 6, int coeff = 10) {
    casbridge::poly::Poly p;
    for (int t = pick(rng, 1, max_terms); t > 0; --t) {
        casbridge::poly::Monomial m;
        int budget = pick(rng, 0, max_degree);
        for (const auto& v : vars) {
            int e = pick(rng, 0, budget);
            budget -= e;
            if (e > 0) m[v] = static_cast<unsigned>(e);
        }
        p += casbridge::poly::Poly::monomial(m, pick(rng, -coeff, coeff));
    }
    return p;
}

}  // namespace testgen

#ifdef DOCTEST_LIBRARY_INCLUDED
namespace doctest {
template <>
struct StringMaker<casbridge::cexpr::CExpr> {
    static String convert(const casbridge::cexpr::CExpr& e) { return casbridge::cexpr::print_fullform(e).c_str(); }
};
}  // namespace doctest
#endif
