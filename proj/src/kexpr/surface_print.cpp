#include <functional>
#include <set>

#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/numeral.hpp"
#include "casbridge/kexpr/surface.hpp"

namespace casbridge::kexpr {

namespace {

constexpr int kAtom = 1024;
constexpr int kApp = 1000;
constexpr int kPow = 80;
constexpr int kNeg = 75;
constexpr int kMul = 70;
constexpr int kAdd = 65;
constexpr int kRel = 50;
constexpr int kAnd = 35;
constexpr int kArrow = 25;
constexpr int kBinder = 0;

struct Doc {
    std::string text;
    int prec;
};

std::string wrap(const Doc& d, int min_prec) { return d.prec < min_prec ? "(" + d.text + ")" : d.text; }

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

bool is_numeral_head(const Name& n) {
    return n == names::zero || n == names::one || n == names::bit0 || n == names::bit1;
}

/// The implicit-free spine of a numeral, to compare with the canonical encoding.
std::optional<KExpr> untyped_spine(const KExpr& e) {
    KExpr h = get_app_fn(e);
    if (!h.is(ExprKind::Const)) return std::nullopt;
    auto args = get_app_args(e);
    if (h.name() == names::zero || h.name() == names::one) return KExpr::constant(h.name());
    if (h.name() != names::bit0 && h.name() != names::bit1) return std::nullopt;
    if (args.empty()) return std::nullopt;
    auto inner = untyped_spine(args.back());
    if (!inner) return std::nullopt;
    return KExpr::app(KExpr::constant(h.name()), *inner);
}

std::optional<mpz_class> canonical_numeral(const KExpr& e) {
    auto v = try_decode_numeral(e);
    if (!v) return std::nullopt;
    auto spine = untyped_spine(e);
    if (!spine || !(*spine == encode_numeral(*v))) return std::nullopt;
    return v;
}

class Printer {
  public:
    explicit Printer(const Environment& env) : env_(env) {}

    std::string run(const KExpr& e) {
        collect_names(e);
        return print(e, false).text;
    }

  private:
    const Environment& env_;
    LocalContext lctx_;
    std::set<std::string> taken_;
    std::vector<std::string> scope_;

    void collect_names(const KExpr& e) {
        switch (e.kind()) {
            case ExprKind::Const:
                taken_.insert(e.name().to_string());
                return;
            case ExprKind::Local:
                taken_.insert(e.pretty_name().to_string());
                collect_names(e.type());
                return;
            case ExprKind::MVar:
                collect_names(e.type());
                return;
            case ExprKind::App:
                collect_names(e.fn());
                collect_names(e.arg());
                return;
            case ExprKind::Lam:
            case ExprKind::Pi:
                collect_names(e.type());
                collect_names(e.body());
                return;
            case ExprKind::Let:
                collect_names(e.type());
                collect_names(e.value());
                collect_names(e.body());
                return;
            case ExprKind::Ascribe:
                collect_names(e.term());
                collect_names(e.type());
                return;
            default:
                return;
        }
    }

    /// Binder name that captures nothing: renamed only on a clash.
    std::string binder_name(const Name& n) {
        std::string base = n.empty() ? "x" : n.to_string();
        auto clash = [&](const std::string& s) {
            if (taken_.count(s)) return true;
            for (const auto& b : scope_)
                if (b == s) return true;
            return false;
        };
        if (!clash(base)) return base;
        for (int k = 1;; ++k) {
            std::string cand = base + "_" + std::to_string(k);
            if (!clash(cand)) return cand;
        }
    }

    std::vector<BinderInfo> binder_infos(const KExpr& head, std::size_t nargs) {
        std::vector<BinderInfo> out;
        KExpr t;
        if (head.is(ExprKind::Const)) {
            if (const auto* d = env_.sig.find(head.name())) t = d->type;
        } else if (head.is(ExprKind::Local)) {
            t = head.type();
        }
        for (std::size_t i = 0; i < nargs; ++i) {
            if (!t.empty() && t.is(ExprKind::Pi)) {
                out.push_back(t.binder_info());
                t = t.body();
            } else {
                out.push_back(BinderInfo::Default);
                t = KExpr();
            }
        }
        return out;
    }

    std::vector<KExpr> explicit_args(const KExpr& e) {
        KExpr head = get_app_fn(e);
        auto args = get_app_args(e);
        if (head.is(ExprKind::Const) && head.is_explicit()) return args;
        auto infos = binder_infos(head, args.size());
        std::vector<KExpr> out;
        for (std::size_t i = 0; i < args.size(); ++i)
            if (infos[i] == BinderInfo::Default) out.push_back(args[i]);
        return out;
    }

    /// Builtin operator application with exactly its full argument list.
    bool is_op(const KExpr& e, const Name& op, std::size_t explicit_count) {
        KExpr h = get_app_fn(e);
        if (!h.is(ExprKind::Const) || h.name() != op || h.is_explicit()) return false;
        auto args = get_app_args(e);
        auto infos = binder_infos(h, args.size());
        std::size_t total = 0;
        if (const auto* d = env_.sig.find(op)) {
            KExpr t = d->type;
            while (t.is(ExprKind::Pi)) {
                ++total;
                t = t.body();
            }
        }
        if (args.size() != total) return false;
        std::size_t n = 0;
        for (auto bi : infos)
            if (bi == BinderInfo::Default) ++n;
        return n == explicit_count;
    }

    /// Whether the term pins down its own carrier when elaborated without an expected type.
    bool anchored(const KExpr& e) {
        KExpr h = get_app_fn(e);
        if (h.is(ExprKind::Const) && !h.is_explicit()) {
            const Name& n = h.name();
            if (is_numeral_head(n)) return false;
            if (is_op(e, names::add, 2) || is_op(e, names::mul, 2) || is_op(e, names::sub, 2) ||
                is_op(e, names::div, 2)) {
                auto xs = explicit_args(e);
                return anchored(xs[0]) || anchored(xs[1]);
            }
            if (is_op(e, names::neg, 1)) return anchored(explicit_args(e)[0]);
            if (is_op(e, names::pow_nat, 2)) return anchored(explicit_args(e)[0]);
        }
        return true;
    }

    Doc ascribed(const KExpr& e) {
        KExpr ty;
        try {
            ty = infer_type(e, env_);
        } catch (const std::exception&) {
            return print(e, true);
        }
        return {"(" + print(e, true).text + " : " + print(ty, true).text + ")", kAtom};
    }

    Doc binary(const KExpr& e, const char* op, int prec, bool right_assoc, bool known, bool spaced = true) {
        auto xs = explicit_args(e);
        int lmin = right_assoc ? prec + 1 : prec;
        int rmin = right_assoc ? prec : prec + 1;
        std::string sep = spaced ? std::string(" ") + op + " " : std::string(op);
        return {wrap(print(xs[0], known), lmin) + sep + wrap(print(xs[1], known), rmin), prec};
    }

    Doc relation(const KExpr& lhs, const KExpr& rhs, const char* op) {
        bool known = anchored(lhs) || anchored(rhs);
        return {wrap(print(lhs, known), kRel + 1) + " " + op + " " + wrap(print(rhs, true), kRel + 1), kRel};
    }

    const char* rel_symbol(const KExpr& e) {
        if (is_op(e, names::le, 2)) return "<=";
        if (is_op(e, names::lt, 2)) return "<";
        if (is_op(e, names::eq, 2)) return "=";
        return nullptr;
    }

    Doc print_binder(const KExpr& e, bool known) {
        std::string name = binder_name(e.name());
        std::string dom = print(e.type(), true).text;
        KExpr l = lctx_.fresh(Name::parse(name), e.type(), e.binder_info());
        scope_.push_back(name);
        Doc body = print(instantiate(e.body(), l), e.is(ExprKind::Lam) ? known : true);
        scope_.pop_back();
        std::string open = "", close = "";
        if (e.binder_info() == BinderInfo::Implicit) {
            open = "{";
            close = "}";
        } else if (e.binder_info() == BinderInfo::InstImplicit) {
            open = "[";
            close = "]";
        }
        std::string kw = e.is(ExprKind::Lam) ? "fun " : "Pi ";
        return {kw + open + name + " : " + dom + close + ", " + body.text, kBinder};
    }

    Doc print(const KExpr& e, bool known) {
        if (!known && !anchored(e)) return ascribed(e);
        switch (e.kind()) {
            case ExprKind::Var:
                return {"#" + std::to_string(e.var_index()), kAtom};
            case ExprKind::Sort: {
                Level l = e.sort_level().normalize();
                if (auto v = l.to_nat()) {
                    if (*v == 0) return {"Prop", kAtom};
                    if (*v == 1) return {"Type", kAtom};
                    return {"Sort " + std::to_string(*v), kApp};
                }
                std::string s = l.to_string();
                bool simple = l.kind() == LevelKind::Param;
                return {"Sort " + (simple ? s : "(" + s + ")"), kApp};
            }
            case ExprKind::Const:
                if (is_string_literal(e)) return {quote(string_literal_text(e)), kAtom};
                if (auto v = canonical_numeral(e)) return {v->get_str(), kAtom};
                return {(e.is_explicit() ? "@" : "") + e.name().to_string(), kAtom};
            case ExprKind::MVar:
                return {"?" + e.name().to_string(), kAtom};
            case ExprKind::Local:
                return {e.pretty_name().to_string(), kAtom};
            case ExprKind::Hole:
                return {"_", kAtom};
            case ExprKind::Ascribe:
                return {"(" + print(e.term(), true).text + " : " + print(e.type(), true).text + ")", kAtom};
            case ExprKind::Lam:
                return print_binder(e, known);
            case ExprKind::Pi: {
                if (e.binder_info() == BinderInfo::Default && e.name() == Name{"a"} &&
                    e.body().loose_bvar_range() == 0) {
                    return {wrap(print(e.type(), true), kArrow + 1) + " -> " + wrap(print(e.body(), true), kArrow),
                            kArrow};
                }
                return print_binder(e, true);
            }
            case ExprKind::Let: {
                std::string name = binder_name(e.name());
                std::string ty = print(e.type(), true).text;
                std::string val = print(e.value(), true).text;
                KExpr l = lctx_.fresh(Name::parse(name), e.type(), BinderInfo::Default);
                scope_.push_back(name);
                Doc body = print(instantiate(e.body(), l), known);
                scope_.pop_back();
                return {"let " + name + " : " + ty + " := " + val + " in " + body.text, kBinder};
            }
            case ExprKind::App:
                return print_app(e);
        }
        return {"?", kAtom};
    }

    Doc print_app(const KExpr& e) {
        if (auto v = canonical_numeral(e)) return {v->get_str(), kAtom};
        if (is_op(e, names::add, 2)) return binary(e, "+", kAdd, false, true);
        if (is_op(e, names::sub, 2)) return binary(e, "-", kAdd, false, true);
        if (is_op(e, names::mul, 2)) return binary(e, "*", kMul, false, true);
        if (is_op(e, names::div, 2)) return binary(e, "/", kMul, false, true);
        if (is_op(e, names::pow_nat, 2)) return binary(e, "^", kPow, true, true, false);
        if (is_op(e, names::neg, 1)) {
            std::string inner = wrap(print(explicit_args(e)[0], true), kNeg);
            return {(inner.rfind('-', 0) == 0 ? "- " : "-") + inner, kNeg};
        }
        if (const char* op = rel_symbol(e)) {
            auto xs = explicit_args(e);
            return relation(xs[0], xs[1], op);
        }
        if (is_op(e, names::and_, 2)) {
            auto xs = explicit_args(e);
            const char* r1 = rel_symbol(xs[0]);
            const char* r2 = rel_symbol(xs[1]);
            if (r1 && r2 && std::string(r1) != "=" && std::string(r2) != "=") {
                auto a = explicit_args(xs[0]);
                auto b = explicit_args(xs[1]);
                if (a[1] == b[0] && (anchored(a[0]) || anchored(a[1]) || anchored(b[1]))) {
                    return {wrap(print(a[0], true), kRel + 1) + " " + r1 + " " + wrap(print(a[1], true), kRel + 1) +
                                " " + r2 + " " + wrap(print(b[1], true), kRel + 1),
                            kRel};
                }
            }
            return {wrap(print(xs[0], true), kAnd + 1) + " /\\ " + wrap(print(xs[1], true), kAnd), kAnd};
        }
        if (is_op(e, names::exists, 1)) {
            KExpr p = explicit_args(e)[0];
            if (p.is(ExprKind::Lam) && p.binder_info() == BinderInfo::Default) {
                Doc d = print_binder(p, true);
                return {"exists" + d.text.substr(3), kBinder};
            }
        }
        KExpr head = get_app_fn(e);
        auto xs = explicit_args(e);
        std::string out = wrap(print(head, true), kApp);
        if (xs.empty()) return {out, kAtom};
        for (const auto& a : xs) out += " " + wrap(print(a, true), kApp + 1);
        return {out, kApp};
    }
};

}  // namespace

std::string print_kexpr(const KExpr& e, const Environment& env) {
    Printer p(env);
    return p.run(e);
}

std::string print_kexpr(const KExpr& e) {
    static const Environment env;
    return print_kexpr(e, env);
}

}  // namespace casbridge::kexpr
