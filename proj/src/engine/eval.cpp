#include "casbridge/engine/eval.hpp"

#include <algorithm>
#include <atomic>
#include <set>

#include "casbridge/engine/algebra.hpp"

namespace casbridge::engine {

using cexpr::CKind;

namespace {
std::atomic<std::uint64_t> next_context_id{1};
}

EvalContext::EvalContext(ContextMode mode)
    : id_(next_context_id.fetch_add(1)), mode_(mode), forward_(reflect::ForwardRuleSet::defaults()) {}

EvalContext EvalContext::scoped_copy() const {
    check_usable();
    EvalContext c(ContextMode::Scoped);
    c.own_ = own_;
    c.down_ = down_;
    c.forward_ = forward_;
    c.recursion_limit = recursion_limit;
    return c;
}

void EvalContext::define(const Definition& d) {
    check_usable();
    const CExpr& target = d.lhs.has_head("Condition", 2) ? d.lhs.arg(0) : d.lhs;
    auto& table = target.is(CKind::Sym) ? own_[target.text()] : down_[target.head().text()];
    for (auto& old : table) {
        if (old.lhs == d.lhs) {
            old = d;
            return;
        }
    }
    table.push_back(d);
}

const std::vector<Definition>* EvalContext::own_value(const std::string& sym) const {
    auto it = own_.find(sym);
    return it == own_.end() ? nullptr : &it->second;
}

const std::vector<Definition>* EvalContext::down_values(const std::string& head) const {
    auto it = down_.find(head);
    return it == down_.end() ? nullptr : &it->second;
}

std::size_t EvalContext::definition_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : own_) n += v.size();
    for (const auto& [k, v] : down_) n += v.size();
    return n;
}

void EvalContext::clear() {
    own_.clear();
    down_.clear();
    forward_ = reflect::ForwardRuleSet::defaults();
    cleared_ = true;
}

void EvalContext::check_usable() const {
    if (cleared_) throw ContextCleared("evaluation context " + std::to_string(id_) + " was cleared");
}

// ---------------------------------------------------------------- evaluator

namespace {

const CExpr kTrue = CExpr::sym("True");
const CExpr kFalse = CExpr::sym("False");
const CExpr kNull = CExpr::sym("Null");

bool is_num(const CExpr& e) { return e.number().has_value(); }

CExpr boolean(bool b) { return b ? kTrue : kFalse; }

std::vector<CExpr> flatten_logical(const CExpr& e, const char* head) {
    std::vector<CExpr> out;
    if (e.has_head(head) || e.has_head("List")) {
        for (const auto& a : e.args()) {
            auto sub = flatten_logical(a, head);
            out.insert(out.end(), sub.begin(), sub.end());
        }
    } else {
        out.push_back(e);
    }
    return out;
}

CExpr rule_list(const std::vector<Assignment>& sols, const std::vector<CExpr>& vars, const std::vector<std::string>& names) {
    std::vector<CExpr> out;
    for (const auto& s : sols) {
        std::vector<CExpr> rules;
        for (std::size_t i = 0; i < vars.size(); ++i)
            rules.push_back(CExpr::app("Rule", {vars[i], CExpr::rational(s.at(names[i]))}));
        out.push_back(CExpr::list(rules));
    }
    return CExpr::list(out);
}

std::vector<CExpr> variable_list(const CExpr& v) {
    if (v.has_head("List")) return v.args();
    return {v};
}

class Evaluator {
  public:
    explicit Evaluator(EvalContext& ctx) : ctx_(ctx) {}

    CExpr run(const CExpr& input) {
        Guard g(*this);
        CExpr e = input;
        for (;;) {
            CExpr next = step(e);
            if (next == e) return e;
            e = next;
            if (++iterations_ > ctx_.recursion_limit) throw RecursionLimit(ctx_.recursion_limit);
        }
    }

  private:
    EvalContext& ctx_;
    std::size_t depth_ = 0;
    std::size_t iterations_ = 0;

    struct Guard {
        explicit Guard(Evaluator& ev) : ev(ev) {
            if (++ev.depth_ > ev.ctx_.recursion_limit) {
                --ev.depth_;
                throw RecursionLimit(ev.ctx_.recursion_limit);
            }
        }
        ~Guard() { --ev.depth_; }
        Evaluator& ev;
    };

    CExpr step(const CExpr& e) {
        if (e.is(CKind::Sym)) {
            if (const auto* defs = ctx_.own_value(e.text()); defs && !defs->empty()) return defs->front().rhs;
            return e;
        }
        if (!e.is(CKind::App)) return e;
        if (e.head().has_head("Inactive") || e.has_head("Inactive")) return e;

        CExpr head = run(e.head());
        std::string h = head.is(CKind::Sym) ? head.text() : "";
        std::vector<CExpr> args;
        bool hold_all = h == "SetDelayed" || h == "Function" || h == "Hold" || h == "HoldForm" || h == "Pattern" ||
                        h == "Condition" || h == "CompoundExpression" || h == "LeanForm";
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            bool hold = hold_all || (i == 0 && h == "Set") || (i > 0 && h == "RuleDelayed");
            args.push_back(hold ? e.arg(i) : run(e.arg(i)));
        }
        if (head.has_head("Function")) return apply_function(head, args);
        if (h.empty()) return CExpr::app(head, args);
        if (auto user = user_rule(h, CExpr::app(head, args))) return *user;
        if (auto b = builtin(h, args)) return *b;
        return CExpr::app(head, args);
    }

    std::optional<CExpr> user_rule(const std::string& h, const CExpr& e) {
        const auto* defs = ctx_.down_values(h);
        if (!defs) return std::nullopt;
        for (const auto& d : *defs) {
            CExpr pattern = d.lhs;
            std::optional<CExpr> test;
            if (pattern.has_head("Condition", 2)) {
                test = pattern.arg(1);
                pattern = pattern.arg(0);
            }
            auto b = cexpr::match(pattern, e);
            if (!b) continue;
            if (test && run(cexpr::substitute(*test, *b)) != kTrue) continue;
            return cexpr::substitute(d.rhs, *b);
        }
        return std::nullopt;
    }

    CExpr apply_function(const CExpr& fn, const std::vector<CExpr>& args) {
        CExpr whole = CExpr::app(fn, args);
        if (fn.args().size() == 1) {
            // Function[body] with slots
            return cexpr::transform(fn.arg(0), [&](const CExpr& x) -> std::optional<CExpr> {
                if (x.has_head("Slot", 1) && x.arg(0).is(CKind::Int)) {
                    long i = x.arg(0).int_value().get_si();
                    if (i >= 1 && static_cast<std::size_t>(i) <= args.size()) return args[i - 1];
                }
                return std::nullopt;
            });
        }
        if (fn.args().size() != 2) return whole;
        auto params = variable_list(fn.arg(0));
        if (params.size() != args.size()) return whole;
        cexpr::Bindings b;
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!params[i].is(CKind::Sym)) return whole;
            b[params[i].text()] = args[i];
        }
        return cexpr::substitute(fn.arg(1), b);
    }

    CExpr define(const std::vector<CExpr>& args, bool delayed) {
        const CExpr& lhs = args[0];
        const CExpr& rhs = args[1];
        if (lhs.has_head("LeanForm", 1) || (lhs.has_head("Condition", 2) && lhs.arg(0).has_head("LeanForm", 1))) {
            // Condition[LeanForm[p], c] is written LeanForm[p /; c] in rule files
            CExpr eqn = CExpr::app("SetDelayed", {lhs, rhs});
            if (lhs.has_head("Condition"))
                eqn = CExpr::app("SetDelayed",
                                 {CExpr::app("LeanForm", {CExpr::app("Condition", {lhs.arg(0).arg(0), lhs.arg(1)})}),
                                  rhs});
            ctx_.add_forward_rule(reflect::parse_forward_rule(eqn));
            return kNull;
        }
        bool sym = lhs.is(CKind::Sym);
        bool app = lhs.is(CKind::App) && (lhs.head().is(CKind::Sym) ||
                                          (lhs.has_head("Condition", 2) && lhs.arg(0).is(CKind::App) &&
                                           lhs.arg(0).head().is(CKind::Sym)));
        if (!sym && !app) throw std::invalid_argument("cannot assign to " + cexpr::print_fullform(lhs));
        ctx_.define(Definition{lhs, rhs, delayed});
        return delayed ? kNull : rhs;
    }

    std::optional<CExpr> relation(const std::string& h, const std::vector<CExpr>& args) {
        if (args.size() < 2) return std::nullopt;
        bool all_num = std::all_of(args.begin(), args.end(), is_num);
        if (h == "Equal" || h == "Unequal") {
            bool same = std::all_of(args.begin(), args.end(), [&](const CExpr& a) { return a == args[0]; });
            bool eq;
            if (all_num) {
                eq = std::all_of(args.begin(), args.end(), [&](const CExpr& a) { return *a.number() == *args[0].number(); });
            } else if (same) {
                eq = true;
            } else {
                return std::nullopt;
            }
            if (h == "Unequal" && args.size() != 2) return std::nullopt;
            return boolean(h == "Equal" ? eq : !eq);
        }
        if (!all_num) return std::nullopt;
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            mpq_class a = *args[i].number(), b = *args[i + 1].number();
            bool ok = h == "Less" ? a < b : h == "LessEqual" ? a <= b : h == "Greater" ? a > b : a >= b;
            if (!ok) return kFalse;
        }
        return kTrue;
    }

    std::optional<CExpr> logical(const std::string& h, const std::vector<CExpr>& args) {
        bool is_and = h == "And";
        std::vector<CExpr> kept;
        for (const auto& a : args) {
            if (a == (is_and ? kTrue : kFalse)) continue;
            if (a == (is_and ? kFalse : kTrue)) return a;
            if (a.has_head(h)) {
                kept.insert(kept.end(), a.args().begin(), a.args().end());
            } else {
                kept.push_back(a);
            }
        }
        if (kept.empty()) return boolean(is_and);
        if (kept.size() == 1) return kept[0];
        if (kept.size() == args.size()) return std::nullopt;
        return CExpr::app(h, kept);
    }

    std::optional<CExpr> solve_command(const std::vector<CExpr>& args) {
        if (args.size() != 2) return std::nullopt;
        Atoms atoms;
        std::vector<Poly> eqs;
        for (const auto& eq : flatten_logical(args[0], "And")) {
            if (eq == kTrue) continue;
            if (eq == kFalse) return CExpr::list({});
            if (!eq.has_head("Equal", 2)) return std::nullopt;
            eqs.push_back(to_poly(eq.arg(0), atoms) - to_poly(eq.arg(1), atoms));
        }
        auto vars = variable_list(args[1]);
        std::vector<std::string> names;
        for (const auto& v : vars) names.push_back(atoms.name_of(v));
        return rule_list(solve(eqs, names), vars, names);
    }

    std::optional<CExpr> find_instance_command(const std::vector<CExpr>& args) {
        if (args.size() < 2) return std::nullopt;
        Atoms atoms;
        std::vector<LinConstraint> cons;
        try {
            for (const auto& c : flatten_logical(args[0], "And")) {
                if (c == kTrue) continue;
                if (c == kFalse) return CExpr::list({});
                if (!c.is(CKind::App) || !c.head().is(CKind::Sym) || c.args().size() < 2) return std::nullopt;
                const std::string& h = c.head().text();
                for (std::size_t i = 0; i + 1 < c.args().size(); ++i) {
                    Poly a = to_poly(c.arg(i), atoms), b = to_poly(c.arg(i + 1), atoms);
                    if (h == "LessEqual") {
                        cons.emplace_back(a - b, poly::Relation::Le0);
                    } else if (h == "Less") {
                        cons.emplace_back(a - b, poly::Relation::Lt0);
                    } else if (h == "GreaterEqual") {
                        cons.emplace_back(b - a, poly::Relation::Le0);
                    } else if (h == "Greater") {
                        cons.emplace_back(b - a, poly::Relation::Lt0);
                    } else if (h == "Equal") {
                        cons.emplace_back(a - b, poly::Relation::Eq0);
                    } else {
                        return std::nullopt;
                    }
                }
            }
        } catch (const poly::NonLinear&) {
            return std::nullopt;
        }
        auto vars = variable_list(args[1]);
        std::vector<std::string> names;
        for (const auto& v : vars) names.push_back(atoms.name_of(v));
        auto sol = find_instance(cons, names);
        if (!sol) return CExpr::list({});
        return rule_list({*sol}, vars, names);
    }

    std::optional<CExpr> replace_all(const std::vector<CExpr>& args) {
        if (args.size() != 2) return std::nullopt;
        std::vector<CExpr> rules = args[1].has_head("List") ? args[1].args() : std::vector<CExpr>{args[1]};
        for (const auto& r : rules)
            if (!(r.has_head("Rule", 2) || r.has_head("RuleDelayed", 2))) return std::nullopt;
        return cexpr::transform(args[0], [&](const CExpr& x) -> std::optional<CExpr> {
            for (const auto& r : rules)
                if (auto b = cexpr::match(r.arg(0), x)) return cexpr::substitute(r.arg(1), *b);
            return std::nullopt;
        });
    }

    std::optional<CExpr> builtin(const std::string& h, const std::vector<CExpr>& args) {
        auto arity = [&](std::size_t n) { return args.size() == n; };
        if (h == "Plus") return make_plus(args);
        if (h == "Times") return make_times(args);
        if (h == "Power" && arity(2)) return make_power(args[0], args[1]);
        if (h == "Subtract" && arity(2))
            return CExpr::app("Plus", {args[0], CExpr::app("Times", {CExpr::integer(-1), args[1]})});
        if (h == "Minus" && arity(1)) return CExpr::app("Times", {CExpr::integer(-1), args[0]});
        if (h == "Divide" && arity(2))
            return CExpr::app("Times", {args[0], CExpr::app("Power", {args[1], CExpr::integer(-1)})});
        if (h == "Sqrt" && arity(1)) return CExpr::app("Power", {args[0], CExpr::rational(poly::ratio(1, 2))});
        if (h == "Rational" && arity(2) && args[0].is(CKind::Int) && args[1].is(CKind::Int) && args[1].int_value() != 0)
            return CExpr::rational(poly::ratio(args[0].int_value(), args[1].int_value()));
        if (h == "Equal" || h == "Unequal" || h == "Less" || h == "LessEqual" || h == "Greater" || h == "GreaterEqual")
            return relation(h, args);
        if (h == "And" || h == "Or") return logical(h, args);
        if (h == "Not" && arity(1)) {
            if (args[0] == kTrue) return kFalse;
            if (args[0] == kFalse) return kTrue;
            return std::nullopt;
        }
        if (h == "Set" && arity(2)) return define(args, false);
        if (h == "SetDelayed" && arity(2)) return define(args, true);
        if (h == "CompoundExpression") {
            CExpr last = kNull;
            for (const auto& a : args) last = run(a);
            return last;
        }
        if (h == "ReplaceAll") return replace_all(args);
        if (h == "Factor" && arity(1)) {
            Atoms atoms;
            Poly p = to_poly(args[0], atoms);
            if (p.is_zero()) return CExpr::integer(0);
            return factor_expr(factor(p), atoms);
        }
        if (h == "Expand" && arity(1)) {
            Atoms atoms;
            return from_poly(to_poly(args[0], atoms), atoms);
        }
        if (h == "Solve") return solve_command(args);
        if (h == "FindInstance") return find_instance_command(args);
        if (h == "LeanConvert" && arity(1)) return reflect::lean_form(args[0], ctx_.forward_rules());
        if (h == "Activate" && arity(1)) return reflect::strip_inactive(args[0]);
        return std::nullopt;
    }
};

}  // namespace

CExpr eval(const CExpr& e, EvalContext& ctx) {
    ctx.check_usable();
    Evaluator ev(ctx);
    return ev.run(e);
}

CExpr eval(const CExpr& e) {
    EvalContext ctx(ContextMode::Scoped);
    return eval(e, ctx);
}

}  // namespace casbridge::engine
