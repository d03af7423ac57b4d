#include "casbridge/interpret/interpret.hpp"

#include "casbridge/kexpr/numeral.hpp"
#include "casbridge/kexpr/signature.hpp"

namespace casbridge::interpret {

using cexpr::CKind;
using kexpr::BinderInfo;
using kexpr::Level;
using kexpr::Name;
namespace names = kexpr::names;

// ---------------------------------------------------------------- rule sets

const std::vector<KeyedRule>& BackRuleSet::keyed_rules(const std::string& key) const {
    static const std::vector<KeyedRule> none;
    auto it = keyed_.find(key);
    return it == keyed_.end() ? none : it->second;
}

std::optional<BinderKind> BackRuleSet::binder(const std::string& head) const {
    auto it = binders_.find(head);
    if (it == binders_.end()) return std::nullopt;
    return it->second;
}

void BackRuleSet::add_sym(std::string sym, KExpr value) { sym_.insert(sym_.begin(), {std::move(sym), std::move(value)}); }

void BackRuleSet::add_keyed(std::string key, KeyedRule rule) {
    if (key.empty()) throw std::invalid_argument("keyed rule needs a nonempty key");
    auto& v = keyed_[std::move(key)];
    v.insert(v.begin(), std::move(rule));
}

void BackRuleSet::add_unkeyed(UnkeyedRule rule) { unkeyed_.insert(unkeyed_.begin(), std::move(rule)); }

void BackRuleSet::add_binder(std::string head, BinderKind kind) { binders_[std::move(head)] = kind; }

BackRuleSet register_sym_rule(const BackRuleSet& rules, const std::string& sym, const KExpr& value) {
    BackRuleSet out = rules;
    out.add_sym(sym, value);
    return out;
}

BackRuleSet register_keyed_rule(const BackRuleSet& rules, const std::string& key, KeyedRule rule) {
    BackRuleSet out = rules;
    out.add_keyed(key, std::move(rule));
    return out;
}

BackRuleSet register_unkeyed_rule(const BackRuleSet& rules, UnkeyedRule rule) {
    BackRuleSet out = rules;
    out.add_unkeyed(std::move(rule));
    return out;
}

BackRuleSet register_binder(const BackRuleSet& rules, const std::string& head, BinderKind kind) {
    BackRuleSet out = rules;
    out.add_binder(head, kind);
    return out;
}

// ---------------------------------------------------------------- encodings

namespace {

KExpr c(const Name& n) { return KExpr::constant(n); }

KExpr numeral(const mpz_class& n) {
    if (n < 0) return KExpr::app(c(names::neg), kexpr::encode_numeral(-n));
    return kexpr::encode_numeral(n);
}

KExpr rational(const mpq_class& q) {
    if (q.get_den() == 1) return numeral(q.get_num());
    mpz_class num = abs(q.get_num());
    KExpr quot = KExpr::app(c(names::div), {kexpr::encode_numeral(num), kexpr::encode_numeral(q.get_den())});
    return q < 0 ? KExpr::app(c(names::neg), quot) : quot;
}

BinderInfo parse_bi(const CExpr& e) {
    if (e.is(CKind::Str)) {
        if (e.text() == "bi") return BinderInfo::Default;
        if (e.text() == "implicit") return BinderInfo::Implicit;
        if (e.text() == "inst_implicit") return BinderInfo::InstImplicit;
    }
    throw NoTranslation(e);
}

Name parse_name(const CExpr& e) {
    if (!e.is(CKind::Str)) throw NoTranslation(e);
    try {
        return Name::parse(e.text());
    } catch (const std::exception&) {
        throw NoTranslation(e);
    }
}

Level decode_level(const CExpr& e) {
    if (e.is(CKind::Int)) {
        if (e.int_value() < 0 || !e.int_value().fits_ulong_p()) throw NoTranslation(e);
        return Level::of_nat(e.int_value().get_ui());
    }
    if (e.has_head("LeanLevelSucc", 1)) return Level::succ(decode_level(e.arg(0)));
    if (e.has_head("LeanLevelMax", 2)) return Level::max(decode_level(e.arg(0)), decode_level(e.arg(1)));
    if (e.has_head("LeanLevelParam", 1)) return Level::param(parse_name(e.arg(0)));
    throw NoTranslation(e);
}

// explicit_consts: inside a pre-expression an encoded constant already carries
// its implicit arguments, so it must not get fresh ones from the elaborator.
KExpr decode(const TransEnv& env, const CExpr& e, bool explicit_consts) {
    auto sub = [&](const CExpr& x) { return decode(env, x, explicit_consts); };
    if (e.is(CKind::Sym)) {
        auto it = env.find(e.text());
        if (it != env.end()) return it->second;
        throw NoTranslation(e);
    }
    if (e.has_head("LeanVar", 1) && e.arg(0).is(CKind::Int) && e.arg(0).int_value() >= 0 &&
        e.arg(0).int_value().fits_uint_p())
        return KExpr::var(static_cast<std::uint32_t>(e.arg(0).int_value().get_ui()));
    if (e.has_head("LeanSort", 1)) return KExpr::sort(decode_level(e.arg(0)));
    if (e.has_head("LeanConst", 2) && e.arg(1).has_head("List")) {
        std::vector<Level> ls;
        for (const auto& l : e.arg(1).args()) ls.push_back(decode_level(l));
        Name n = parse_name(e.arg(0));
        return explicit_consts ? KExpr::explicit_constant(n, ls) : KExpr::constant(n, ls);
    }
    if (e.has_head("LeanMVar", 2)) return KExpr::mvar(parse_name(e.arg(0)), sub(e.arg(1)));
    if (e.has_head("LeanLocal", 4)) {
        // the local's own type is always kernel-level
        return KExpr::local(parse_name(e.arg(0)), parse_name(e.arg(1)), parse_bi(e.arg(2)),
                            decode(env, e.arg(3), false));
    }
    if (e.has_head("LeanApp", 2)) return KExpr::app(sub(e.arg(0)), sub(e.arg(1)));
    if (e.has_head("LeanLam", 4))
        return KExpr::lam(parse_name(e.arg(0)), parse_bi(e.arg(1)), sub(e.arg(2)), sub(e.arg(3)));
    if (e.has_head("LeanPi", 4))
        return KExpr::pi(parse_name(e.arg(0)), parse_bi(e.arg(1)), sub(e.arg(2)), sub(e.arg(3)));
    if (e.has_head("LeanLet", 4))
        return KExpr::let(parse_name(e.arg(0)), sub(e.arg(1)), sub(e.arg(2)), sub(e.arg(3)));
    throw NoTranslation(e);
}

}  // namespace

KExpr expr_of_mmexpr(const TransEnv& env, const CExpr& e) { return decode(env, e, false); }

// ---------------------------------------------------------------- pexpr_of_mmexpr

namespace {

class Translation {
  public:
    explicit Translation(const BackRuleSet& rules) : rules_(rules) {}

    KExpr run(const TransEnv& env, const CExpr& e) {
        switch (e.kind()) {
            case CKind::Str:
                return kexpr::string_literal(e.text());
            case CKind::Int:
                return numeral(e.int_value());
            case CKind::Real:
                return rational(*e.number());
            case CKind::Sym: {
                auto it = env.find(e.text());
                if (it != env.end()) return it->second;
                for (const auto& [s, v] : rules_.sym_rules())
                    if (s == e.text()) return v;
                throw NoTranslation(e);
            }
            case CKind::App:
                break;
        }
        if (e.head().is(CKind::Sym)) return app(env, e, e.head().text(), e.args());
        return unkeyed(env, e);
    }

    KExpr app(const TransEnv& env, const CExpr& whole, const std::string& head, const std::vector<CExpr>& args) {
        if (auto kind = rules_.binder(head)) return binder(env, whole, *kind, args);
        std::optional<NoTranslation> first_error;
        for (const auto& rule : rules_.keyed_rules(head)) {
            try {
                if (auto r = rule(recurse_, env, args)) return *r;
            } catch (const NoTranslation& err) {
                if (!first_error) first_error = err;
            }
        }
        try {
            return unkeyed(env, whole);
        } catch (const NoTranslation&) {
            if (first_error) throw *first_error;
            throw;
        }
    }

  private:
    const BackRuleSet& rules_;
    kexpr::LocalContext placeholders_;
    Recurse recurse_ = [this](const TransEnv& env, const CExpr& e) { return run(env, e); };

    KExpr unkeyed(const TransEnv& env, const CExpr& e) {
        std::optional<NoTranslation> first_error;
        for (const auto& rule : rules_.unkeyed_rules()) {
            try {
                if (auto r = rule(recurse_, env, e.head(), e.args())) return *r;
            } catch (const NoTranslation& err) {
                if (!first_error) first_error = err;
            }
        }
        if (first_error) throw *first_error;
        throw NoTranslation(e);
    }

    KExpr binder(const TransEnv& env, const CExpr& whole, BinderKind kind, const std::vector<CExpr>& args) {
        if (args.size() != 2) throw NoTranslation(whole);
        std::vector<CExpr> vars;
        if (args[0].has_head("List")) {
            vars = args[0].args();
        } else {
            vars.push_back(args[0]);
        }
        if (vars.empty()) throw NoTranslation(whole);
        TransEnv inner = env;
        std::vector<KExpr> locals;
        for (const auto& v : vars) {
            if (!v.is(CKind::Sym)) throw NoTranslation(whole);
            std::string pretty = v.text().substr(0, v.text().find('$'));
            if (pretty.empty()) pretty = "x";
            KExpr l = placeholders_.fresh(Name({pretty}), KExpr::hole());
            inner[v.text()] = l;
            locals.push_back(l);
        }
        KExpr body = run(inner, args[1]);
        for (auto it = locals.rbegin(); it != locals.rend(); ++it) {
            body = kexpr::abstract_local(body, *it);
            body = kind == BinderKind::Lam ? KExpr::lam(it->pretty_name(), BinderInfo::Default, KExpr::hole(), body)
                                           : KExpr::pi(it->pretty_name(), BinderInfo::Default, KExpr::hole(), body);
        }
        return body;
    }
};

// ---- default keyed rules

KeyedRule fold_left(Name op, Name unit) {
    return [op, unit](const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) -> std::optional<KExpr> {
        if (args.empty()) return unit == names::zero ? kexpr::encode_numeral(0) : kexpr::encode_numeral(1);
        KExpr acc = r(env, args[0]);
        for (std::size_t i = 1; i < args.size(); ++i) acc = KExpr::app(c(op), {acc, r(env, args[i])});
        return acc;
    };
}

KeyedRule unary(Name op) {
    return [op](const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) -> std::optional<KExpr> {
        if (args.size() != 1) return std::nullopt;
        return KExpr::app(c(op), r(env, args[0]));
    };
}

KeyedRule binary(Name op, bool swap = false) {
    return [op, swap](const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) -> std::optional<KExpr> {
        if (args.size() != 2) return std::nullopt;
        KExpr a = r(env, args[0]), b = r(env, args[1]);
        return swap ? KExpr::app(c(op), {b, a}) : KExpr::app(c(op), {a, b});
    };
}

KExpr and_all(std::vector<KExpr> parts) {
    KExpr acc = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) acc = KExpr::app(c(names::and_), {parts[i], acc});
    return acc;
}

// Relations chain like the CAS does: Less[a, b, c] is a < b and b < c.
KeyedRule relation(Name op, bool swap) {
    return [op, swap](const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) -> std::optional<KExpr> {
        if (args.size() < 2) return std::nullopt;
        std::vector<KExpr> ts;
        for (const auto& a : args) ts.push_back(r(env, a));
        std::vector<KExpr> links;
        for (std::size_t i = 0; i + 1 < ts.size(); ++i)
            links.push_back(swap ? KExpr::app(c(op), {ts[i + 1], ts[i]}) : KExpr::app(c(op), {ts[i], ts[i + 1]}));
        return and_all(links);
    };
}

std::optional<KExpr> power(const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) {
    if (args.size() != 2) return std::nullopt;
    KExpr base = r(env, args[0]);
    const CExpr& n = args[1];
    if (n.is(CKind::Int)) {
        KExpr p = KExpr::app(c(names::pow_nat), {base, kexpr::encode_numeral(abs(n.int_value()))});
        if (n.int_value() >= 0) return p;
        return KExpr::app(c(names::div), {kexpr::encode_numeral(1), p});
    }
    if (n.is(CKind::Real) || n.has_head("Rational")) return std::nullopt;
    return KExpr::app(c(names::pow_nat), {base, r(env, n)});
}

std::optional<KExpr> rational_rule(const Recurse&, const TransEnv&, const std::vector<CExpr>& args) {
    if (args.size() != 2 || !args[0].is(CKind::Int) || !args[1].is(CKind::Int) || args[1].int_value() == 0)
        return std::nullopt;
    mpq_class q(args[0].int_value(), args[1].int_value());
    q.canonicalize();
    return rational(q);
}

std::optional<KExpr> and_rule(const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) {
    if (args.empty()) return std::nullopt;
    std::vector<KExpr> parts;
    for (const auto& a : args) parts.push_back(r(env, a));
    return and_all(parts);
}

std::optional<KExpr> list_rule(const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) {
    KExpr acc = c(names::list_nil);
    for (auto it = args.rbegin(); it != args.rend(); ++it) acc = KExpr::app(c(names::list_cons), {r(env, *it), acc});
    return acc;
}

std::optional<KExpr> encoded(const std::string& head, const TransEnv& env, const std::vector<CExpr>& args) {
    return decode(env, CExpr::app(head, args), true);
}

// Inactive[h][args] reads like h[args]; Inactive[h] alone like h.
std::optional<KExpr> inactive_head(const Recurse& r, const TransEnv& env, const CExpr& head,
                                   const std::vector<CExpr>& args) {
    if (!head.has_head("Inactive", 1)) return std::nullopt;
    return r(env, CExpr::app(head.arg(0), args));
}

std::optional<KExpr> fold_application(const Recurse& r, const TransEnv& env, const CExpr& head,
                                      const std::vector<CExpr>& args) {
    KExpr f = r(env, head);
    for (const auto& a : args) f = KExpr::app(f, r(env, a));
    return f;
}

BackRuleSet make_defaults() {
    BackRuleSet s;
    s.add_sym("Real", c(names::real));
    s.add_sym("Integer", c(names::int_));
    s.add_sym("False", c(names::false_));
    s.add_keyed("Plus", fold_left(names::add, names::zero));
    s.add_keyed("Times", fold_left(names::mul, names::one));
    s.add_keyed("Power", power);
    s.add_keyed("Subtract", binary(names::sub));
    s.add_keyed("Divide", binary(names::div));
    s.add_keyed("Minus", unary(names::neg));
    s.add_keyed("Rational", rational_rule);
    s.add_keyed("Equal", relation(names::eq, false));
    s.add_keyed("LessEqual", relation(names::le, false));
    s.add_keyed("Less", relation(names::lt, false));
    s.add_keyed("GreaterEqual", relation(names::le, true));
    s.add_keyed("Greater", relation(names::lt, true));
    s.add_keyed("And", and_rule);
    s.add_keyed("List", list_rule);
    for (std::string h : {"LeanApp", "LeanConst", "LeanLocal", "LeanVar", "LeanSort", "LeanMVar", "LeanLam",
                          "LeanPi", "LeanLet"}) {
        s.add_keyed(h, [h](const Recurse&, const TransEnv& env, const std::vector<CExpr>& args) {
            return encoded(h, env, args);
        });
    }
    s.add_unkeyed(fold_application);
    s.add_unkeyed(inactive_head);
    s.add_binder("Function", BinderKind::Lam);
    s.add_binder("ForAll", BinderKind::Pi);
    return s;
}

bool is_number(const CExpr& e) {
    return e.is(CKind::Int) || e.is(CKind::Real) || e.has_head("Rational", 2);
}

}  // namespace

const BackRuleSet& BackRuleSet::defaults() {
    static const BackRuleSet rules = make_defaults();
    return rules;
}

KeyedRule plus_constants_last() {
    return [](const Recurse& r, const TransEnv& env, const std::vector<CExpr>& args) -> std::optional<KExpr> {
        std::vector<CExpr> ordered;
        for (const auto& a : args)
            if (!is_number(a)) ordered.push_back(a);
        for (const auto& a : args)
            if (is_number(a)) ordered.push_back(a);
        return fold_left(names::add, names::zero)(r, env, ordered);
    };
}

KExpr pexpr_of_mmexpr(const TransEnv& env, const CExpr& e, const BackRuleSet& rules) {
    Translation t(rules);
    return t.run(env, e);
}

KExpr back_translate(const CExpr& e, const kexpr::Environment& env, const std::optional<KExpr>& expected,
                     const BackRuleSet& rules) {
    return kexpr::elaborate(pexpr_of_mmexpr({}, e, rules), env, expected);
}

}  // namespace casbridge::interpret
