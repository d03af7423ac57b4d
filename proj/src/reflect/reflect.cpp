#include "casbridge/reflect/reflect.hpp"

#include <cctype>
#include <set>

#include "default_forward_rules.hpp"

namespace casbridge::reflect {

using cexpr::CKind;
using kexpr::BinderInfo;
using kexpr::ExprKind;
using kexpr::Level;
using kexpr::LevelKind;

// ---------------------------------------------------------------- encoding

std::string binder_info_text(BinderInfo bi) {
    switch (bi) {
        case BinderInfo::Default:
            return "bi";
        case BinderInfo::Implicit:
            return "implicit";
        case BinderInfo::InstImplicit:
            return "inst_implicit";
    }
    return "bi";
}

CExpr encode_level(const Level& l) {
    // A plain succ chain over zero is a number; anything else keeps its shape.
    std::uint64_t n = 0;
    const Level* cur = &l;
    while (cur->kind() == LevelKind::Succ) {
        ++n;
        cur = &cur->lhs();
    }
    if (cur->kind() == LevelKind::Zero) return CExpr::integer(static_cast<long>(n));
    switch (l.kind()) {
        case LevelKind::Succ:
            return CExpr::app("LeanLevelSucc", {encode_level(l.lhs())});
        case LevelKind::Max:
            return CExpr::app("LeanLevelMax", {encode_level(l.lhs()), encode_level(l.rhs())});
        case LevelKind::Param:
            return CExpr::app("LeanLevelParam", {CExpr::str(l.name().to_string())});
        case LevelKind::Zero:
            break;
    }
    return CExpr::integer(0);
}

CExpr encode_kernel_expr(const KExpr& e) {
    switch (e.kind()) {
        case ExprKind::Var:
            return CExpr::app("LeanVar", {CExpr::integer(static_cast<long>(e.var_index()))});
        case ExprKind::Sort:
            return CExpr::app("LeanSort", {encode_level(e.sort_level())});
        case ExprKind::Const: {
            if (e.is_explicit()) throw std::invalid_argument("explicit constants only occur in pre-expressions");
            std::vector<CExpr> ls;
            for (const auto& l : e.levels()) ls.push_back(encode_level(l));
            return CExpr::app("LeanConst", {CExpr::str(e.name().to_string()), CExpr::list(ls)});
        }
        case ExprKind::MVar:
            return CExpr::app("LeanMVar", {CExpr::str(e.name().to_string()), encode_kernel_expr(e.type())});
        case ExprKind::Local:
            return CExpr::app("LeanLocal", {CExpr::str(e.name().to_string()), CExpr::str(e.pretty_name().to_string()),
                                            CExpr::str(binder_info_text(e.binder_info())),
                                            encode_kernel_expr(e.type())});
        case ExprKind::App:
            return CExpr::app("LeanApp", {encode_kernel_expr(e.fn()), encode_kernel_expr(e.arg())});
        case ExprKind::Lam:
        case ExprKind::Pi:
            return CExpr::app(e.is(ExprKind::Lam) ? "LeanLam" : "LeanPi",
                              {CExpr::str(e.name().to_string()), CExpr::str(binder_info_text(e.binder_info())),
                               encode_kernel_expr(e.type()), encode_kernel_expr(e.body())});
        case ExprKind::Let:
            return CExpr::app("LeanLet", {CExpr::str(e.name().to_string()), encode_kernel_expr(e.type()),
                                          encode_kernel_expr(e.value()), encode_kernel_expr(e.body())});
        case ExprKind::Hole:
        case ExprKind::Ascribe:
            break;
    }
    throw std::invalid_argument("holes and ascriptions have no kernel encoding");
}

// ---------------------------------------------------------------- rules

namespace {

const std::set<std::string> kSlotHeads{"LeanForm", "LeanFormUnder", "LeanFresh"};

void check_slots(const CExpr& t, const std::vector<std::string>& vars) {
    if (!t.is(CKind::App)) return;
    if (t.head().is(CKind::Sym) && kSlotHeads.count(t.head().text())) {
        const std::string& h = t.head().text();
        std::size_t max_args = h == "LeanFormUnder" ? 2 : 1;
        if (t.args().empty() || t.args().size() > max_args)
            throw MalformedRule(h + " slot takes " + (max_args == 2 ? "one or two arguments" : "one argument"));
        const CExpr& v = t.arg(0);
        if (!v.is(CKind::Sym) || std::find(vars.begin(), vars.end(), v.text()) == vars.end())
            throw MalformedRule("template slot " + cexpr::print_fullform(t) + " does not name a pattern variable");
        if (t.args().size() == 2) check_slots(t.arg(1), vars);
        return;
    }
    check_slots(t.head(), vars);
    for (const auto& a : t.args()) check_slots(a, vars);
}

ForwardRule make_rule(const CExpr& lhs, const CExpr& tmpl) {
    ForwardRule r;
    if (lhs.has_head("Condition", 2)) {
        r.pattern = lhs.arg(0);
        r.condition = lhs.arg(1);
    } else {
        r.pattern = lhs;
    }
    auto vars = cexpr::pattern_variables(r.pattern);
    if (r.condition) {
        const CExpr& c = *r.condition;
        if (!c.has_head("PropBody", 1) || !c.arg(0).is(CKind::Sym) ||
            std::find(vars.begin(), vars.end(), c.arg(0).text()) == vars.end())
            throw MalformedRule("unsupported rule condition " + cexpr::print_fullform(c));
    }
    check_slots(tmpl, vars);
    r.tmpl = tmpl;
    return r;
}

// Strict mode: Prop-valued encodings recognised by their head constant.
bool is_prop_encoding(const CExpr& e) {
    static const std::set<std::string> props{"le", "lt", "eq", "and", "or", "not", "false", "true", "exists", "iff"};
    const CExpr* h = &e;
    while (h->has_head("LeanApp", 2)) h = &h->arg(0);
    if (h->has_head("LeanConst", 2) && h->arg(0).is(CKind::Str)) return props.count(h->arg(0).text()) > 0;
    if (h->has_head("LeanPi", 4)) return is_prop_encoding(h->arg(3));
    if (h->has_head("LeanLocal", 4)) return h->arg(3) == CExpr::app("LeanSort", {CExpr::integer(0)});
    return false;
}

}  // namespace

ForwardRule parse_forward_rule(const CExpr& equation) {
    if (!(equation.has_head("SetDelayed", 2) || equation.has_head("Set", 2)))
        throw MalformedRule("expected LeanForm[pattern] := template");
    const CExpr& lhs = equation.arg(0);
    if (!lhs.has_head("LeanForm", 1)) throw MalformedRule("rule left-hand side must be LeanForm[pattern]");
    return make_rule(lhs.arg(0), equation.arg(1));
}

void ForwardRuleSet::add(ForwardRule rule) { rules_.insert(rules_.begin(), std::move(rule)); }

void ForwardRuleSet::load(std::string_view text) {
    std::string pending;
    int depth = 0;
    bool in_string = false;
    auto flush = [&] {
        bool blank = pending.find_first_not_of(" \t\r\n") == std::string::npos;
        if (!blank) add(parse_forward_rule(cexpr::parse_fullform(pending)));
        pending.clear();
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        auto first = line.find_first_not_of(" \t\r");
        if (depth == 0 && (first == std::string_view::npos || line[first] == '#')) continue;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char c = line[i];
            if (in_string) {
                if (c == '\\')
                    ++i;
                else if (c == '"')
                    in_string = false;
            } else if (c == '"') {
                in_string = true;
            } else if (c == '[' || c == '{' || c == '(') {
                ++depth;
            } else if (c == ']' || c == '}' || c == ')') {
                --depth;
            }
        }
        pending += line;
        pending += '\n';
        auto last = pending.find_last_not_of(" \t\r\n");
        bool dangling = last != std::string::npos && std::string_view(":=,;/+-*^&|<>").find(pending[last]) != std::string_view::npos;
        if (depth <= 0 && !in_string && !dangling) {
            flush();
            depth = 0;
        }
    }
    if (depth != 0 || in_string) throw MalformedRule("unbalanced brackets at end of rule text");
    if (pending.find_first_not_of(" \t\r\n") != std::string::npos) throw MalformedRule("incomplete rule at end of text");
}

const ForwardRuleSet& ForwardRuleSet::defaults() {
    static const ForwardRuleSet rules = [] {
        ForwardRuleSet r;
        r.load(detail::kDefaultForwardRules);
        return r;
    }();
    return rules;
}

ForwardRuleSet register_forward_rule(const ForwardRuleSet& rules, const CExpr& pattern, const CExpr& tmpl) {
    ForwardRuleSet out = rules;
    out.add(make_rule(pattern, tmpl));
    return out;
}

// ---------------------------------------------------------------- LeanForm

namespace {

void collect_symbols(const CExpr& e, std::set<std::string>& out) {
    if (e.is(CKind::Sym)) {
        out.insert(e.text());
    } else if (e.is(CKind::App)) {
        collect_symbols(e.head(), out);
        for (const auto& a : e.args()) collect_symbols(a, out);
    }
}

bool is_lean_head(const CExpr& e) {
    return e.is(CKind::App) && e.head().is(CKind::Sym) && e.head().text().rfind("Lean", 0) == 0;
}

class Translator {
  public:
    Translator(const ForwardRuleSet& rules, const CExpr& root, const BinderEnv& env) : rules_(rules) {
        collect_symbols(root, taken_);
        for (const auto& s : env) collect_symbols(s, taken_);
    }

    CExpr run(const CExpr& e, const BinderEnv& env) {
        for (const auto& rule : rules_.rules()) {
            auto b = cexpr::match(rule.pattern, e);
            if (!b) continue;
            if (rule.condition && !is_prop_encoding(b->at(rule.condition->arg(0).text()))) continue;
            std::optional<CExpr> fresh;
            return instantiate(rule.tmpl, *b, env, fresh);
        }
        if (e.has_head("LeanVar", 1) && e.arg(0).is(CKind::Int)) {
            const mpz_class& i = e.arg(0).int_value();
            if (i < 0 || i >= static_cast<long>(env.size()))
                throw UnboundVariable(i.fits_ulong_p() ? i.get_ui() : static_cast<std::size_t>(-1));
            return env[i.get_ui()];
        }
        if (!e.is(CKind::App) || (is_lean_head(e) && !e.has_head("LeanApp"))) return e;
        std::vector<CExpr> args;
        for (const auto& a : e.args()) args.push_back(run(a, env));
        return CExpr::app(is_lean_head(e) ? e.head() : run(e.head(), env), args);
    }

  private:
    const ForwardRuleSet& rules_;
    std::set<std::string> taken_;

    CExpr fresh_symbol(const CExpr& name) {
        std::string base;
        if (name.is(CKind::Str) || name.is(CKind::Sym)) {
            for (char c : name.text())
                if (std::isalnum(static_cast<unsigned char>(c))) base += c;
        }
        if (base.empty() || !std::isalpha(static_cast<unsigned char>(base[0]))) base = "v" + base;
        for (int k = 1;; ++k) {
            std::string candidate = base + "$" + std::to_string(k);
            if (taken_.insert(candidate).second) return CExpr::sym(candidate);
        }
    }

    CExpr instantiate(const CExpr& t, const cexpr::Bindings& b, const BinderEnv& env, std::optional<CExpr>& fresh) {
        if (t.is(CKind::Sym)) {
            auto it = b.find(t.text());
            return it == b.end() ? t : it->second;
        }
        if (!t.is(CKind::App)) return t;
        if (t.has_head("LeanForm", 1)) return run(b.at(t.arg(0).text()), env);
        if (t.has_head("LeanFresh", 1)) {
            if (!fresh) fresh = fresh_symbol(b.at(t.arg(0).text()));
            return *fresh;
        }
        if (t.has_head("LeanFormUnder")) {
            BinderEnv inner;
            if (t.args().size() == 2) {
                inner.push_back(instantiate(t.arg(1), b, env, fresh));
            } else {
                if (!fresh) fresh = fresh_symbol(CExpr::str("v"));
                inner.push_back(*fresh);
            }
            inner.insert(inner.end(), env.begin(), env.end());
            return run(b.at(t.arg(0).text()), inner);
        }
        std::vector<CExpr> args;
        for (const auto& a : t.args()) args.push_back(instantiate(a, b, env, fresh));
        return CExpr::app(instantiate(t.head(), b, env, fresh), args);
    }
};

}  // namespace

CExpr lean_form(const CExpr& e, const BinderEnv& env, const ForwardRuleSet& rules) {
    Translator t(rules, e, env);
    return t.run(e, env);
}

CExpr lean_form(const CExpr& e, const ForwardRuleSet& rules) { return lean_form(e, {}, rules); }

// ---------------------------------------------------------------- activation

CExpr strip_inactive(const CExpr& e) {
    return cexpr::transform(e, [](const CExpr& x) -> std::optional<CExpr> {
        if (x.is(CKind::App) && x.head().has_head("Inactive", 1)) {
            std::vector<CExpr> args;
            for (const auto& a : x.args()) args.push_back(strip_inactive(a));
            return CExpr::app(strip_inactive(x.head().arg(0)), args);
        }
        if (x.has_head("Inactive", 1)) return strip_inactive(x.arg(0));
        return std::nullopt;
    });
}

CExpr activate(const CExpr& e, const Evaluator& eval) { return eval(strip_inactive(e)); }

// ---------------------------------------------------------------- collapse

namespace {

bool is_collapse_symbol(const std::string& s) {
    if (s.size() < 3 || s.compare(0, 2, "$k") != 0) return false;
    return std::all_of(s.begin() + 2, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

Collapsed collapse(const CExpr& e) {
    std::set<std::string> taken;
    collect_symbols(e, taken);
    Collapsed out;
    std::map<CExpr, std::string, cexpr::CExprLess> assigned;
    // Names of that shape already in the input map to themselves, so inflate
    // can tell them apart from dangling references.
    for (const auto& s : taken)
        if (is_collapse_symbol(s)) out.table.emplace(s, CExpr::sym(s));
    int counter = 0;
    out.expr = cexpr::transform(e, [&](const CExpr& x) -> std::optional<CExpr> {
        if (!is_lean_head(x)) return std::nullopt;
        auto it = assigned.find(x);
        if (it == assigned.end()) {
            std::string name;
            do {
                name = "$k" + std::to_string(++counter);
            } while (taken.count(name));
            it = assigned.emplace(x, name).first;
            out.table.emplace(name, x);
        }
        return CExpr::sym(it->second);
    });
    return out;
}

CExpr inflate(const CExpr& e, const std::map<std::string, CExpr>& table) {
    return cexpr::transform(e, [&](const CExpr& x) -> std::optional<CExpr> {
        if (!x.is(CKind::Sym)) return std::nullopt;
        auto it = table.find(x.text());
        if (it != table.end()) return it->second;
        if (is_collapse_symbol(x.text())) throw MissingEntry("no table entry for " + x.text());
        return std::nullopt;
    });
}

}  // namespace casbridge::reflect
