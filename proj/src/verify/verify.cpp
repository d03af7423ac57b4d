#include "casbridge/verify/verify.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/signature.hpp"
#include "casbridge/kexpr/surface.hpp"
#include "casbridge/reflect/reflect.hpp"

namespace casbridge::verify {

namespace names = kexpr::names;
using poly::Relation;

namespace detail {
struct LedgerAccess {
    static void append(TrustLedger& l, LedgerEntry e) { l.append(std::move(e)); }
};
}  // namespace detail

namespace {

std::string now_iso8601() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void record(TrustLedger* ledger, const Certificate& c, Status status, const std::string& provenance,
            const Environment& env, bool flagged = false) {
    if (!ledger) return;
    detail::LedgerAccess::append(*ledger, LedgerEntry{c, status, claim_text(c, env), provenance, now_iso8601(), flagged});
}

std::string join(const std::vector<KExpr>& es, const Environment& env, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < es.size(); ++i) out += (i ? sep : "") + kexpr::print_kexpr(es[i], env);
    return out;
}

std::string assignment_text(const Assignment& a) {
    std::string out;
    for (const auto& [v, q] : a) out += (out.empty() ? "" : ", ") + v + " = " + rational_text(q);
    return out;
}

bool holds(const Poly& p, Relation rel, const Assignment& a) {
    Rational v = p.evaluate(a);
    switch (rel) {
        case Relation::Le0: return v <= 0;
        case Relation::Lt0: return v < 0;
        case Relation::Eq0: return v == 0;
    }
    return false;
}

using System = std::vector<std::pair<Poly, Relation>>;

// ¬goal as a disjunction of conjunctions.
std::vector<System> negate_goal(const KExpr& goal, PolyReader& reader) {
    if (goal.is(kexpr::ExprKind::Const) && goal.name() == names::false_) return {System{}};
    if (kexpr::is_const_app(goal, names::and_, 2)) {
        auto args = kexpr::get_app_args(goal);
        auto out = negate_goal(args[0], reader);
        for (auto& s : negate_goal(args[1], reader)) out.push_back(std::move(s));
        return out;
    }
    auto [p, rel] = reader.read_relation(goal);
    switch (rel) {
        case Relation::Le0: return {System{{-p, Relation::Lt0}}};
        case Relation::Lt0: return {System{{-p, Relation::Le0}}};
        case Relation::Eq0: return {System{{-p, Relation::Lt0}}, System{{p, Relation::Lt0}}};
    }
    return {};
}

// Rationals with bounded denominators in [-box, box], simplest first.
std::vector<Rational> grid_values(const SanityOptions& opts) {
    std::vector<Rational> out;
    std::set<Rational> seen;
    for (std::size_t d = 1; d <= opts.max_denominator; ++d) {
        std::vector<Rational> level;
        for (long n = 0; n <= opts.box * static_cast<long>(d); ++n) {
            Rational q = poly::ratio(n, static_cast<long>(d));
            if (!seen.insert(q).second) continue;
            level.push_back(q);
            if (n) level.push_back(-q);
            seen.insert(-q);
        }
        out.insert(out.end(), level.begin(), level.end());
    }
    return out;
}

// Tuples ordered by their largest index, so simple points come first.
std::optional<Assignment> grid_search(const System& sys, const std::vector<std::string>& vars,
                                      const SanityOptions& opts) {
    auto values = grid_values(opts);
    std::size_t budget = opts.max_points;
    std::vector<std::size_t> idx(vars.size());
    Assignment a;
    std::optional<Assignment> found;
    std::function<bool(std::size_t, std::size_t, bool)> rec = [&](std::size_t k, std::size_t m, bool hit) {
        if (k == vars.size()) {
            if (!hit) return false;
            if (budget-- == 0) return true;
            for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = values[idx[i]];
            if (std::all_of(sys.begin(), sys.end(), [&](const auto& r) { return holds(r.first, r.second, a); })) {
                found = a;
                return true;
            }
            return false;
        }
        bool last = k + 1 == vars.size();
        for (std::size_t i = last && !hit ? m : 0; i <= m; ++i) {
            idx[k] = i;
            if (rec(k + 1, m, hit || i == m)) return true;
        }
        return false;
    };
    if (vars.empty()) {
        if (std::all_of(sys.begin(), sys.end(), [&](const auto& r) { return holds(r.first, r.second, a); })) return a;
        return std::nullopt;
    }
    for (std::size_t m = 0; m < values.size(); ++m)
        if (rec(0, m, false)) break;
    return found;
}

}  // namespace

// ---- text ----

std::string rational_text(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + " / " + q.get_den().get_str();
}

std::string to_string(Status s) { return s == Status::Verified ? "verified" : "trusted"; }

std::string claim_text(const Certificate& c, const Environment& env) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, RingEq>) {
                return kexpr::print_kexpr(x.lhs, env) + " = " + kexpr::print_kexpr(x.rhs, env);
            } else if constexpr (std::is_same_v<T, FarkasWitness>) {
                return join(x.hyps, env, ", ") + " |- false";
            } else if constexpr (std::is_same_v<T, SolutionWitness>) {
                return join(x.system, env, ", ") + " at " + assignment_text(x.assignment);
            } else if constexpr (std::is_same_v<T, Counterexample>) {
                return "not (" + join(x.hyps, env, ", ") + " |- " + kexpr::print_kexpr(x.goal, env) + ") at " +
                       assignment_text(x.assignment);
            } else if constexpr (std::is_same_v<T, TrustedAxiom>) {
                return kexpr::print_kexpr(x.claim, env);
            } else {
                if (x.lower == x.upper) return kexpr::print_kexpr(x.target, env) + " = " + rational_text(x.lower);
                return rational_text(x.lower) + " < " + kexpr::print_kexpr(x.target, env) + " < " +
                       rational_text(x.upper);
            }
        },
        c);
}

// ---- ledger ----

void TrustLedger::open_log(const std::string& path) {
    std::lock_guard lock(mu_);
    std::ofstream probe(path, std::ios::app);
    if (!probe) throw std::runtime_error("cannot open ledger log " + path);
    log_path_ = path;
}

void TrustLedger::append(LedgerEntry e) {
    std::lock_guard lock(mu_);
    if (!log_path_.empty()) {
        std::ofstream out(log_path_, std::ios::app);
        out << log_line(e) << '\n';
    }
    entries_.push_back(std::move(e));
}

std::vector<LedgerEntry> TrustLedger::snapshot() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t TrustLedger::verified_count() const {
    std::lock_guard lock(mu_);
    return std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.status == Status::Verified; });
}

std::size_t TrustLedger::trusted_count() const {
    std::lock_guard lock(mu_);
    return std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.status == Status::Trusted; });
}

std::size_t TrustLedger::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::string TrustLedger::log_line(const LedgerEntry& e) {
    std::string status = to_string(e.status);
    if (e.flagged) status += "!";
    return status + '\t' + e.claim + '\t' + e.provenance + '\t' + e.timestamp;
}

// ---- checkers ----

Certificate check_ring_eq(const KExpr& e1, const KExpr& e2, const Environment& env, TrustLedger* ledger) {
    KExpr t1 = kexpr::infer_type(e1, env), t2 = kexpr::infer_type(e2, env);
    if (!kexpr::is_def_eq(t1, t2, env))
        throw OutOfFragment("sides have different types", kexpr::print_kexpr(t1, env) + " vs " + kexpr::print_kexpr(t2, env));
    PolyReader reader(env);
    Poly p1 = reader.read(e1), p2 = reader.read(e2);
    if (p1 != p2) throw UnableToSimplify(p1.to_string(), p2.to_string());
    Certificate c = RingEq{e1, e2};
    record(ledger, c, Status::Verified, "check_ring_eq", env);
    return c;
}

Certificate check_farkas(const std::vector<KExpr>& hyps, const std::vector<Rational>& coeffs, const Environment& env,
                         TrustLedger* ledger) {
    if (hyps.size() != coeffs.size())
        throw BadCertificate(BadCertificate::kWholeSum, std::to_string(coeffs.size()) + " coefficients for " +
                                                            std::to_string(hyps.size()) + " hypotheses");
    PolyReader reader(env);
    Poly sum;
    bool strict_weight = false;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        auto [p, rel] = reader.read_relation(hyps[i]);
        if (p.total_degree() > 1) throw OutOfFragment("hypothesis is not linear", kexpr::print_kexpr(hyps[i], env));
        if (rel != Relation::Eq0 && coeffs[i] < 0) throw BadCertificate(i, "negative weight on an inequality");
        if (rel == Relation::Lt0 && coeffs[i] > 0) strict_weight = true;
        sum += p * Poly(coeffs[i]);
    }
    if (!sum.is_constant()) throw BadCertificate(BadCertificate::kWholeSum, "sum is not constant: " + sum.to_string());
    Rational q = sum.constant_term();
    if (q < 0 || (q == 0 && !strict_weight))
        throw BadCertificate(BadCertificate::kWholeSum, "sum " + poly::to_string(q) + " is not positive");
    Certificate c = FarkasWitness{hyps, coeffs, q};
    record(ledger, c, Status::Verified, "check_farkas", env);
    return c;
}

Certificate check_solution(const std::vector<KExpr>& system, const Assignment& assignment, const Environment& env,
                           TrustLedger* ledger) {
    PolyReader reader(env);
    for (std::size_t i = 0; i < system.size(); ++i) {
        auto [p, rel] = reader.read_relation(system[i]);
        if (rel != Relation::Eq0) throw OutOfFragment("not an equation", kexpr::print_kexpr(system[i], env));
        for (const auto& v : p.variables())
            if (!assignment.count(v)) throw std::invalid_argument("assignment has no value for " + v);
        Rational r = p.evaluate(assignment);
        if (r != 0) throw ResidueNonZero(i, r);
    }
    Certificate c = SolutionWitness{system, assignment};
    record(ledger, c, Status::Verified, "check_solution", env);
    return c;
}

const interpret::BackRuleSet& factor_rules() {
    static const interpret::BackRuleSet rules =
        interpret::register_keyed_rule(interpret::BackRuleSet::defaults(), "Plus", interpret::plus_constants_last());
    return rules;
}

FactorResult factor_check(const KExpr& e, const Environment& env, const Oracle& oracle, TrustLedger* ledger) {
    using cexpr::CExpr;
    KExpr type = kexpr::infer_type(e, env);
    PolyReader(env).read(e);  // fail early outside the fragment
    CExpr request =
        CExpr::app("Factor", {CExpr::app("Activate", {CExpr::app("LeanConvert", {reflect::encode_kernel_expr(e)})})});
    CExpr answer = oracle(request);
    KExpr factored = interpret::back_translate(answer, env, type, factor_rules());
    try {
        return {factored, check_ring_eq(e, factored, env, ledger)};
    } catch (const UnableToSimplify& u) {
        throw CertificationFailed("oracle answer " + kexpr::print_kexpr(factored, env) +
                                  " is not equal to the input: " + u.lhs + " vs " + u.rhs);
    }
}

std::optional<Certificate> sanity_check(const std::vector<KExpr>& hyps, const KExpr& goal, const Environment& env,
                                        const LinearSearch& search, TrustLedger* ledger, const SanityOptions& opts) {
    PolyReader reader(env);
    System base;
    for (const auto& h : hyps)
        for (auto& r : reader.read_hypothesis(h)) base.push_back(std::move(r));
    for (const auto& alt : negate_goal(goal, reader)) {
        System sys = base;
        sys.insert(sys.end(), alt.begin(), alt.end());
        std::set<std::string> vs;
        bool linear = true;
        for (const auto& [p, rel] : sys) {
            for (const auto& v : p.variables()) vs.insert(v);
            if (p.total_degree() > 1) linear = false;
        }
        std::vector<std::string> vars(vs.begin(), vs.end());
        std::optional<Assignment> a;
        if (linear) {
            std::vector<poly::LinConstraint> lin;
            for (const auto& [p, rel] : sys) lin.emplace_back(p, rel);
            a = search(lin, vars);
        } else {
            a = grid_search(sys, vars, opts);
        }
        if (!a) continue;
        bool valid = std::all_of(vars.begin(), vars.end(), [&](const auto& v) { return a->count(v) > 0; }) &&
                     std::all_of(sys.begin(), sys.end(), [&](const auto& r) { return holds(r.first, r.second, *a); });
        if (!valid) throw CertificationFailed("search returned a point that fails substitution: " + assignment_text(*a));
        Assignment restricted;
        for (const auto& v : vars) restricted[v] = a->at(v);
        Certificate c = Counterexample{hyps, goal, restricted};
        record(ledger, c, Status::Verified, "sanity_check", env);
        return c;
    }
    return std::nullopt;
}

Certificate declare_trusted(const KExpr& claim, const std::string& provenance, const Environment& env,
                            TrustLedger& ledger) {
    bool prop = false;
    try {
        prop = kexpr::is_proposition(claim, env);
    } catch (const std::exception&) {
    }
    if (!prop) throw NotAProposition("not a proposition: " + kexpr::print_kexpr(claim, env));
    bool flagged = claim.is(kexpr::ExprKind::Const) && claim.name() == names::false_;
    Certificate c = TrustedAxiom{claim, provenance};
    record(&ledger, c, Status::Trusted, provenance, env, flagged);
    return c;
}

Rational simplest_between(const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) throw std::invalid_argument("empty interval");
    if (lo < 0 && hi > 0) return 0;
    if (hi <= 0) return -simplest_between(-hi, -lo);
    // 0 <= lo < hi: continued fraction descent, hi may become infinite
    std::function<Rational(const Rational&, const std::optional<Rational>&)> go =
        [&](const Rational& a, const std::optional<Rational>& b) -> Rational {
        mpz_class k;
        mpz_fdiv_q(k.get_mpz_t(), a.get_num_mpz_t(), a.get_den_mpz_t());
        if (!b || Rational(k + 1) < *b) return Rational(k + 1);
        // no integer strictly inside, so k <= a < b <= k + 1
        std::optional<Rational> inv_a;
        if (a != k) inv_a = Rational(1 / (a - k));
        Rational inv_b = 1 / (*b - k);
        Rational r = go(inv_b, inv_a);
        return Rational(k) + Rational(1 / r);
    };
    return go(lo, hi);
}

Certificate approx_bounds(const KExpr& e, const Rational& radius, const Environment& env, TrustLedger& ledger,
                          const NumericOracle& numeric) {
    if (radius < 0) throw std::invalid_argument("negative radius");
    std::optional<Rational> exact;
    try {
        Poly p = PolyReader(env).read(e);
        if (p.is_constant()) exact = p.constant_term();
    } catch (const OutOfFragment&) {
    }
    std::optional<Rational> value = exact;
    if (!value && numeric) value = numeric(e);
    if (!value) throw std::invalid_argument("no numeric value for " + kexpr::print_kexpr(e, env));
    if (radius == 0 && !exact) throw std::invalid_argument("radius 0 needs an exactly evaluable term");
    Rational center = radius == 0 ? *value : simplest_between(*value - radius, *value + radius);
    Certificate c = ApproxBound{e, center - radius, center + radius};
    if (exact) {
        const auto& b = std::get<ApproxBound>(c);
        bool ok = radius == 0 ? (b.lower == *exact && b.upper == *exact) : (b.lower < *exact && *exact < b.upper);
        if (!ok) throw CertificationFailed("bound does not contain the exact value");
        record(&ledger, c, Status::Verified, "exact evaluation", env);
    } else {
        record(&ledger, c, Status::Trusted, "numeric approximation " + poly::to_string(*value), env);
    }
    return c;
}

}  // namespace casbridge::verify
