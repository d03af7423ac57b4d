#include <algorithm>
#include <set>

#include "casbridge/engine/algebra.hpp"

namespace casbridge::engine {

namespace {

constexpr int kMaxEliminations = 6;

std::vector<Poly> substitute_all(const std::vector<Poly>& ps, const std::string& var, const Poly& value) {
    std::vector<Poly> out;
    for (const auto& p : ps) out.push_back(p.substitute(var, value));
    return out;
}

std::vector<Assignment> solve_rec(std::vector<Poly> system, int budget) {
    std::vector<Poly> live;
    for (auto& p : system) {
        if (p.is_zero()) continue;
        if (p.is_constant()) return {};
        live.push_back(std::move(p));
    }
    if (live.empty()) return {Assignment{}};

    // a univariate equation fixes its variable
    for (std::size_t i = 0; i < live.size(); ++i) {
        auto vars = live[i].variables();
        if (vars.size() != 1) continue;
        const std::string& v = *vars.begin();
        std::vector<Assignment> out;
        for (const auto& r : rational_roots(poly::to_upoly(live[i], v))) {
            for (auto sol : solve_rec(substitute_all(live, v, Poly(r)), budget)) {
                sol[v] = r;
                out.push_back(std::move(sol));
            }
        }
        return out;
    }

    // linear with a constant coefficient: substitute it away
    for (std::size_t i = 0; i < live.size(); ++i) {
        for (const auto& v : live[i].variables()) {
            auto cs = live[i].coefficients_in(v);
            if (cs.size() != 2 || !cs[1].is_constant()) continue;
            Poly value = -cs[0] * Poly(Rational(1 / cs[1].constant_term()));
            std::vector<Poly> rest;
            for (std::size_t j = 0; j < live.size(); ++j)
                if (j != i) rest.push_back(live[j].substitute(v, value));
            std::vector<Assignment> out;
            for (auto sol : solve_rec(rest, budget)) {
                Poly x = value.partial_evaluate(sol);
                if (!x.is_constant()) continue;  // underdetermined
                sol[v] = x.constant_term();
                out.push_back(std::move(sol));
            }
            return out;
        }
    }

    // eliminate a shared variable with a resultant
    if (budget <= 0) return {};
    std::string best_var;
    std::size_t bi = 0, bj = 0;
    unsigned best_cost = ~0u;
    for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t j = i + 1; j < live.size(); ++j) {
            for (const auto& v : live[i].variables()) {
                unsigned dj = live[j].degree(v);
                if (dj == 0) continue;
                unsigned cost = live[i].degree(v) * dj;
                if (cost < best_cost) {
                    best_cost = cost;
                    best_var = v;
                    bi = i;
                    bj = j;
                }
            }
        }
    }
    if (best_var.empty()) return {};
    Poly r = resultant(live[bi], live[bj], best_var);
    if (r.is_zero()) return {};
    // keep the lower-degree equation so the variable can be recovered later
    std::size_t keep = live[bi].degree(best_var) <= live[bj].degree(best_var) ? bi : bj;
    std::size_t drop = keep == bi ? bj : bi;
    std::vector<Poly> next;
    for (std::size_t k = 0; k < live.size(); ++k)
        if (k != drop) next.push_back(live[k]);
    next.push_back(r);
    return solve_rec(next, budget - 1);
}

}  // namespace

std::vector<Assignment> solve(const std::vector<Poly>& equations, const std::vector<std::string>& vars) {
    std::vector<std::string> wanted = vars;
    if (wanted.empty()) {
        std::set<std::string> all;
        for (const auto& p : equations)
            for (const auto& v : p.variables()) all.insert(v);
        wanted.assign(all.begin(), all.end());
    }
    std::vector<Assignment> out;
    for (auto& sol : solve_rec(equations, kMaxEliminations)) {
        bool complete = std::all_of(wanted.begin(), wanted.end(), [&](const auto& v) { return sol.count(v) > 0; });
        if (!complete) continue;
        bool ok = true;
        for (const auto& p : equations) {
            try {
                if (p.evaluate(sol) != 0) ok = false;
            } catch (const std::out_of_range&) {
                ok = false;
            }
        }
        if (!ok) continue;
        Assignment restricted;
        for (const auto& v : wanted) restricted[v] = sol.at(v);
        if (std::find(out.begin(), out.end(), restricted) == out.end()) out.push_back(restricted);
    }
    std::sort(out.begin(), out.end(), [&](const Assignment& a, const Assignment& b) {
        for (const auto& v : wanted) {
            if (a.at(v) != b.at(v)) return a.at(v) < b.at(v);
        }
        return false;
    });
    return out;
}

}  // namespace casbridge::engine
