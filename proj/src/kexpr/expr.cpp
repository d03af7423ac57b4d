#include "casbridge/kexpr/expr.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace casbridge::kexpr {

struct KExpr::Node {
    ExprKind kind = ExprKind::Var;
    std::uint32_t index = 0;
    Level level;
    Name name;
    Name pretty;
    std::vector<Level> levels;
    bool explicit_const = false;
    BinderInfo bi = BinderInfo::Default;
    // Children: type/domain/fn in a, arg/body in b, let value in c.
    KExpr a, b, c;

    std::uint32_t loose_range = 0;
    bool has_mvar = false;
    bool has_local = false;
    bool pre_only = false;
};

KExpr::KExpr() = default;

namespace {

std::uint32_t under_binder(std::uint32_t r) { return r > 0 ? r - 1 : 0; }

}  // namespace

KExpr KExpr::var(std::uint32_t index) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Var;
    n->index = index;
    n->loose_range = index + 1;
    return KExpr(std::move(n));
}

KExpr KExpr::sort(Level level) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Sort;
    n->level = std::move(level);
    return KExpr(std::move(n));
}

KExpr KExpr::constant(Name name, std::vector<Level> levels) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Const;
    n->name = std::move(name);
    n->levels = std::move(levels);
    return KExpr(std::move(n));
}

KExpr KExpr::explicit_constant(Name name, std::vector<Level> levels) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Const;
    n->name = std::move(name);
    n->levels = std::move(levels);
    n->explicit_const = true;
    n->pre_only = true;
    return KExpr(std::move(n));
}

KExpr KExpr::mvar(Name name, KExpr type) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::MVar;
    n->name = std::move(name);
    n->loose_range = type.node_->loose_range;
    n->has_local = type.node_->has_local;
    n->pre_only = type.node_->pre_only;
    n->a = std::move(type);
    n->has_mvar = true;
    return KExpr(std::move(n));
}

KExpr KExpr::local(Name unique, Name pretty, BinderInfo bi, KExpr type) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Local;
    n->name = std::move(unique);
    n->pretty = std::move(pretty);
    n->bi = bi;
    n->loose_range = type.node_->loose_range;
    n->has_mvar = type.node_->has_mvar;
    n->pre_only = type.node_->pre_only;
    n->a = std::move(type);
    n->has_local = true;
    return KExpr(std::move(n));
}

KExpr KExpr::app(KExpr fn, KExpr arg) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::App;
    n->loose_range = std::max(fn.node_->loose_range, arg.node_->loose_range);
    n->has_mvar = fn.node_->has_mvar || arg.node_->has_mvar;
    n->has_local = fn.node_->has_local || arg.node_->has_local;
    n->pre_only = fn.node_->pre_only || arg.node_->pre_only;
    n->a = std::move(fn);
    n->b = std::move(arg);
    return KExpr(std::move(n));
}

KExpr KExpr::app(KExpr fn, const std::vector<KExpr>& args) {
    for (const auto& a : args) fn = app(std::move(fn), a);
    return fn;
}

KExpr KExpr::lam(Name name, BinderInfo bi, KExpr domain, KExpr body) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Lam;
    n->name = std::move(name);
    n->bi = bi;
    n->loose_range = std::max(domain.node_->loose_range, under_binder(body.node_->loose_range));
    n->has_mvar = domain.node_->has_mvar || body.node_->has_mvar;
    n->has_local = domain.node_->has_local || body.node_->has_local;
    n->pre_only = domain.node_->pre_only || body.node_->pre_only;
    n->a = std::move(domain);
    n->b = std::move(body);
    return KExpr(std::move(n));
}

KExpr KExpr::pi(Name name, BinderInfo bi, KExpr domain, KExpr body) {
    KExpr e = lam(std::move(name), bi, std::move(domain), std::move(body));
    auto n = std::make_shared<Node>(*e.node_);
    n->kind = ExprKind::Pi;
    return KExpr(std::move(n));
}

KExpr KExpr::let(Name name, KExpr type, KExpr value, KExpr body) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Let;
    n->name = std::move(name);
    n->loose_range = std::max({type.node_->loose_range, value.node_->loose_range,
                               under_binder(body.node_->loose_range)});
    n->has_mvar = type.node_->has_mvar || value.node_->has_mvar || body.node_->has_mvar;
    n->has_local = type.node_->has_local || value.node_->has_local || body.node_->has_local;
    n->pre_only = type.node_->pre_only || value.node_->pre_only || body.node_->pre_only;
    n->a = std::move(type);
    n->b = std::move(body);
    n->c = std::move(value);
    return KExpr(std::move(n));
}

KExpr KExpr::hole() {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Hole;
    n->pre_only = true;
    return KExpr(std::move(n));
}

KExpr KExpr::ascribe(KExpr term, KExpr type) {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::Ascribe;
    n->loose_range = std::max(term.node_->loose_range, type.node_->loose_range);
    n->has_mvar = term.node_->has_mvar || type.node_->has_mvar;
    n->has_local = term.node_->has_local || type.node_->has_local;
    n->pre_only = true;
    n->a = std::move(type);
    n->b = std::move(term);
    return KExpr(std::move(n));
}

ExprKind KExpr::kind() const { return node_->kind; }
std::uint32_t KExpr::var_index() const { return node_->index; }
const Level& KExpr::sort_level() const { return node_->level; }
const Name& KExpr::name() const { return node_->name; }
const Name& KExpr::pretty_name() const { return node_->pretty; }
const std::vector<Level>& KExpr::levels() const { return node_->levels; }
bool KExpr::is_explicit() const { return node_->explicit_const; }
BinderInfo KExpr::binder_info() const { return node_->bi; }

const KExpr& KExpr::type() const { return node_->a; }
const KExpr& KExpr::fn() const { return node_->a; }
const KExpr& KExpr::arg() const { return node_->b; }
const KExpr& KExpr::body() const { return node_->b; }
const KExpr& KExpr::value() const { return node_->c; }
const KExpr& KExpr::term() const { return node_->b; }

std::uint32_t KExpr::loose_bvar_range() const { return node_->loose_range; }
bool KExpr::has_mvar() const { return node_->has_mvar; }
bool KExpr::has_local() const { return node_->has_local; }
bool KExpr::is_pre_only() const { return node_->pre_only; }

bool operator==(const KExpr& x, const KExpr& y) {
    const auto* a = x.node_.get();
    const auto* b = y.node_.get();
    if (a == b) return true;
    if (a->kind != b->kind || a->loose_range != b->loose_range) return false;
    switch (a->kind) {
        case ExprKind::Var:
            return a->index == b->index;
        case ExprKind::Sort:
            return a->level == b->level;
        case ExprKind::Const:
            return a->name == b->name && a->levels == b->levels && a->explicit_const == b->explicit_const;
        case ExprKind::MVar:
            return a->name == b->name && x.type() == y.type();
        case ExprKind::Local:
            return a->name == b->name && a->pretty == b->pretty && a->bi == b->bi && x.type() == y.type();
        case ExprKind::App:
            return x.fn() == y.fn() && x.arg() == y.arg();
        case ExprKind::Lam:
        case ExprKind::Pi:
            return a->name == b->name && a->bi == b->bi && x.type() == y.type() && x.body() == y.body();
        case ExprKind::Let:
            return a->name == b->name && x.type() == y.type() && x.value() == y.value() && x.body() == y.body();
        case ExprKind::Hole:
            return true;
        case ExprKind::Ascribe:
            return x.term() == y.term() && x.type() == y.type();
    }
    return false;
}

KExpr get_app_fn(const KExpr& e) {
    const KExpr* cur = &e;
    while (cur->is(ExprKind::App)) cur = &cur->fn();
    return *cur;
}

std::vector<KExpr> get_app_args(const KExpr& e) {
    std::vector<KExpr> args;
    const KExpr* cur = &e;
    while (cur->is(ExprKind::App)) {
        args.push_back(cur->arg());
        cur = &cur->fn();
    }
    std::reverse(args.begin(), args.end());
    return args;
}

bool is_const_app(const KExpr& e, const Name& head, std::size_t nargs) {
    std::size_t n = 0;
    const KExpr* cur = &e;
    while (cur->is(ExprKind::App)) {
        ++n;
        cur = &cur->fn();
    }
    return n == nargs && cur->is(ExprKind::Const) && cur->name() == head;
}

namespace {

/// Generic structural map over binder depth; `leaf` returns a replacement or nullopt.
KExpr replace(const KExpr& e, std::uint32_t depth,
              const std::function<std::optional<KExpr>(const KExpr&, std::uint32_t)>& leaf) {
    if (auto r = leaf(e, depth)) return *r;
    switch (e.kind()) {
        case ExprKind::Var:
        case ExprKind::Sort:
        case ExprKind::Const:
        case ExprKind::Hole:
            return e;
        case ExprKind::MVar: {
            KExpr t = replace(e.type(), depth, leaf);
            return t.identity() == e.type().identity() ? e : KExpr::mvar(e.name(), t);
        }
        case ExprKind::Local: {
            KExpr t = replace(e.type(), depth, leaf);
            return t.identity() == e.type().identity() ? e
                                                       : KExpr::local(e.name(), e.pretty_name(), e.binder_info(), t);
        }
        case ExprKind::App: {
            KExpr f = replace(e.fn(), depth, leaf);
            KExpr a = replace(e.arg(), depth, leaf);
            if (f.identity() == e.fn().identity() && a.identity() == e.arg().identity()) return e;
            return KExpr::app(f, a);
        }
        case ExprKind::Lam:
        case ExprKind::Pi: {
            KExpr d = replace(e.type(), depth, leaf);
            KExpr b = replace(e.body(), depth + 1, leaf);
            if (d.identity() == e.type().identity() && b.identity() == e.body().identity()) return e;
            return e.is(ExprKind::Lam) ? KExpr::lam(e.name(), e.binder_info(), d, b)
                                       : KExpr::pi(e.name(), e.binder_info(), d, b);
        }
        case ExprKind::Let: {
            KExpr t = replace(e.type(), depth, leaf);
            KExpr v = replace(e.value(), depth, leaf);
            KExpr b = replace(e.body(), depth + 1, leaf);
            return KExpr::let(e.name(), t, v, b);
        }
        case ExprKind::Ascribe: {
            KExpr t = replace(e.term(), depth, leaf);
            KExpr ty = replace(e.type(), depth, leaf);
            return KExpr::ascribe(t, ty);
        }
    }
    return e;
}

}  // namespace

KExpr lift_loose(const KExpr& e, std::uint32_t amount, std::uint32_t cutoff) {
    if (amount == 0) return e;
    return replace(e, 0, [&](const KExpr& x, std::uint32_t depth) -> std::optional<KExpr> {
        if (x.loose_bvar_range() <= cutoff + depth) return x;
        if (x.is(ExprKind::Var)) return KExpr::var(x.var_index() + amount);
        return std::nullopt;
    });
}

KExpr instantiate_rev(const KExpr& body, const std::vector<KExpr>& values) {
    const auto n = static_cast<std::uint32_t>(values.size());
    if (n == 0) return body;
    return replace(body, 0, [&](const KExpr& x, std::uint32_t depth) -> std::optional<KExpr> {
        if (x.loose_bvar_range() <= depth) return x;
        if (x.is(ExprKind::Var)) {
            std::uint32_t i = x.var_index();
            if (i < depth) return x;
            if (i - depth < n) return lift_loose(values[i - depth], depth);
            return KExpr::var(i - n);
        }
        return std::nullopt;
    });
}

KExpr instantiate(const KExpr& body, const KExpr& value) { return instantiate_rev(body, {value}); }

KExpr abstract_local(const KExpr& e, const KExpr& l) {
    if (!e.has_local()) return lift_loose(e, 1);
    const Name& unique = l.name();
    return replace(e, 0, [&](const KExpr& x, std::uint32_t depth) -> std::optional<KExpr> {
        if (x.is(ExprKind::Local) && x.name() == unique) return KExpr::var(depth);
        if (x.is(ExprKind::Var) && x.var_index() >= depth) return KExpr::var(x.var_index() + 1);
        if (!x.has_local() && x.loose_bvar_range() <= depth) return x;
        return std::nullopt;
    });
}

bool is_closed(const KExpr& e) { return e.loose_bvar_range() == 0; }

bool is_well_scoped(const KExpr& e, std::uint32_t outer_depth) {
    // Recomputes ranges explicitly so the check does not trust cached metadata.
    std::function<bool(const KExpr&, std::uint32_t)> go = [&](const KExpr& x, std::uint32_t d) -> bool {
        switch (x.kind()) {
            case ExprKind::Var:
                return x.var_index() < d;
            case ExprKind::Sort:
            case ExprKind::Const:
            case ExprKind::Hole:
                return true;
            case ExprKind::MVar:
            case ExprKind::Local:
                return go(x.type(), d);
            case ExprKind::App:
                return go(x.fn(), d) && go(x.arg(), d);
            case ExprKind::Lam:
            case ExprKind::Pi:
                return go(x.type(), d) && go(x.body(), d + 1);
            case ExprKind::Let:
                return go(x.type(), d) && go(x.value(), d) && go(x.body(), d + 1);
            case ExprKind::Ascribe:
                return go(x.term(), d) && go(x.type(), d);
        }
        return false;
    };
    return go(e, outer_depth);
}

bool locals_consistent(const KExpr& e) {
    std::map<Name, KExpr> seen;
    bool ok = true;
    std::function<void(const KExpr&)> go = [&](const KExpr& x) {
        if (!ok) return;
        switch (x.kind()) {
            case ExprKind::Local: {
                auto [it, inserted] = seen.emplace(x.name(), x);
                if (!inserted && !(it->second == x)) {
                    ok = false;
                    return;
                }
                go(x.type());
                return;
            }
            case ExprKind::MVar:
                go(x.type());
                return;
            case ExprKind::App:
                go(x.fn());
                go(x.arg());
                return;
            case ExprKind::Lam:
            case ExprKind::Pi:
                go(x.type());
                go(x.body());
                return;
            case ExprKind::Let:
                go(x.type());
                go(x.value());
                go(x.body());
                return;
            case ExprKind::Ascribe:
                go(x.term());
                go(x.type());
                return;
            default:
                return;
        }
    };
    go(e);
    return ok;
}

std::string to_string(BinderInfo bi) {
    switch (bi) {
        case BinderInfo::Default:
            return "default";
        case BinderInfo::Implicit:
            return "implicit";
        case BinderInfo::InstImplicit:
            return "inst_implicit";
    }
    return "?";
}

namespace {

void debug_print(const KExpr& e, std::string& out, bool paren) {
    auto open = [&] {
        if (paren) out += '(';
    };
    auto close = [&] {
        if (paren) out += ')';
    };
    switch (e.kind()) {
        case ExprKind::Var:
            out += "#" + std::to_string(e.var_index());
            return;
        case ExprKind::Sort:
            out += "Sort " + e.sort_level().to_string();
            return;
        case ExprKind::Const: {
            if (e.is_explicit()) out += '@';
            out += e.name().to_string();
            if (!e.levels().empty()) {
                out += ".{";
                for (std::size_t i = 0; i < e.levels().size(); ++i) {
                    if (i) out += ", ";
                    out += e.levels()[i].to_string();
                }
                out += '}';
            }
            return;
        }
        case ExprKind::MVar:
            out += "?" + e.name().to_string();
            return;
        case ExprKind::Local:
            out += e.pretty_name().to_string();
            return;
        case ExprKind::App: {
            open();
            debug_print(get_app_fn(e), out, true);
            for (const auto& a : get_app_args(e)) {
                out += ' ';
                debug_print(a, out, true);
            }
            close();
            return;
        }
        case ExprKind::Lam:
        case ExprKind::Pi: {
            open();
            out += e.is(ExprKind::Lam) ? "fun " : "Pi ";
            const char* l = e.binder_info() == BinderInfo::Implicit       ? "{"
                            : e.binder_info() == BinderInfo::InstImplicit ? "["
                                                                          : "(";
            const char* r = e.binder_info() == BinderInfo::Implicit       ? "}"
                            : e.binder_info() == BinderInfo::InstImplicit ? "]"
                                                                          : ")";
            out += l + e.name().to_string() + " : ";
            debug_print(e.type(), out, false);
            out += r;
            out += ", ";
            debug_print(e.body(), out, false);
            close();
            return;
        }
        case ExprKind::Let:
            open();
            out += "let " + e.name().to_string() + " : ";
            debug_print(e.type(), out, false);
            out += " := ";
            debug_print(e.value(), out, false);
            out += " in ";
            debug_print(e.body(), out, false);
            close();
            return;
        case ExprKind::Hole:
            out += "_";
            return;
        case ExprKind::Ascribe:
            out += "(";
            debug_print(e.term(), out, false);
            out += " : ";
            debug_print(e.type(), out, false);
            out += ")";
            return;
    }
}

}  // namespace

std::string debug_string(const KExpr& e) {
    std::string out;
    debug_print(e, out, false);
    return out;
}

}  // namespace casbridge::kexpr
