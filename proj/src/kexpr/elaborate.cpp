#include "casbridge/kexpr/elaborate.hpp"

#include <functional>
#include <map>

namespace casbridge::kexpr {

namespace {

const Name kMetaPrefix{"?m"};
const Name kLevelMetaPrefix{"?u"};

bool is_level_meta(const Level& l) {
    return l.kind() == LevelKind::Param && !l.name().empty() && l.name().prefix() == kLevelMetaPrefix;
}

bool is_prop_const(const KExpr& e) { return e.is(ExprKind::Const) && e.name() == names::prop; }

Level imax(const Level& a, const Level& b) {
    Level bn = b.normalize();
    if (auto v = bn.to_nat()) {
        if (*v == 0) return Level::zero();
        return Level::max(a, bn).normalize();
    }
    if (bn.kind() == LevelKind::Succ) return Level::max(a, bn).normalize();
    return Level::max(a, bn);
}

/// Shared core of the typechecker and the elaborator. With `assignable` set,
/// definitional equality may assign metavariables (unification).
class Core {
  public:
    Core(const Environment& env, bool assignable) : env_(env), assignable_(assignable) {}

    const Environment& env() const { return env_; }

    KExpr new_meta(const KExpr& type) { return KExpr::mvar(kMetaPrefix.append(++meta_counter_), type); }
    Level new_level_meta() { return Level::param(kLevelMetaPrefix.append(++meta_counter_)); }
    KExpr new_type_meta() { return new_meta(KExpr::sort(new_level_meta())); }
    KExpr fresh_local(const Name& pretty, const KExpr& type, BinderInfo bi) { return lctx_.fresh(pretty, type, bi); }

    // ---- metavariable instantiation ----

    Level inst_level(const Level& l) const {
        switch (l.kind()) {
            case LevelKind::Zero:
                return l;
            case LevelKind::Succ:
                return Level::succ(inst_level(l.lhs()));
            case LevelKind::Max:
                return Level::max(inst_level(l.lhs()), inst_level(l.rhs()));
            case LevelKind::Param:
                if (is_level_meta(l)) {
                    auto it = level_assign_.find(l.name());
                    if (it != level_assign_.end()) return inst_level(it->second);
                }
                return l;
        }
        return l;
    }

    KExpr inst(const KExpr& e) const {
        switch (e.kind()) {
            case ExprKind::Var:
            case ExprKind::Hole:
                return e;
            case ExprKind::Sort:
                return KExpr::sort(inst_level(e.sort_level()));
            case ExprKind::Const: {
                if (e.levels().empty()) return e;
                std::vector<Level> ls;
                for (const auto& l : e.levels()) ls.push_back(inst_level(l));
                return e.is_explicit() ? KExpr::explicit_constant(e.name(), ls) : KExpr::constant(e.name(), ls);
            }
            case ExprKind::MVar: {
                auto it = assign_.find(e.name());
                if (it != assign_.end()) return inst(it->second);
                return KExpr::mvar(e.name(), inst(e.type()));
            }
            case ExprKind::Local:
                if (!e.type().has_mvar() && !has_level_meta(e.type())) return e;
                return KExpr::local(e.name(), e.pretty_name(), e.binder_info(), inst(e.type()));
            case ExprKind::App:
                return KExpr::app(inst(e.fn()), inst(e.arg()));
            case ExprKind::Lam:
                return KExpr::lam(e.name(), e.binder_info(), inst(e.type()), inst(e.body()));
            case ExprKind::Pi:
                return KExpr::pi(e.name(), e.binder_info(), inst(e.type()), inst(e.body()));
            case ExprKind::Let:
                return KExpr::let(e.name(), inst(e.type()), inst(e.value()), inst(e.body()));
            case ExprKind::Ascribe:
                return KExpr::ascribe(inst(e.term()), inst(e.type()));
        }
        return e;
    }

    static bool has_level_meta(const KExpr& e) {
        bool found = false;
        std::function<void(const Level&)> lv = [&](const Level& l) {
            if (found) return;
            if (is_level_meta(l)) found = true;
            else if (l.kind() == LevelKind::Succ) lv(l.lhs());
            else if (l.kind() == LevelKind::Max) {
                lv(l.lhs());
                lv(l.rhs());
            }
        };
        std::function<void(const KExpr&)> go = [&](const KExpr& x) {
            if (found) return;
            switch (x.kind()) {
                case ExprKind::Sort:
                    lv(x.sort_level());
                    return;
                case ExprKind::Const:
                    for (const auto& l : x.levels()) lv(l);
                    return;
                case ExprKind::MVar:
                case ExprKind::Local:
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
        return found;
    }

    bool is_assigned(const KExpr& m) const { return assign_.count(m.name()) != 0; }

    // ---- reduction ----

    KExpr whnf(const KExpr& e) const {
        KExpr cur = e;
        while (true) {
            if (cur.is(ExprKind::MVar)) {
                auto it = assign_.find(cur.name());
                if (it == assign_.end()) return cur;
                cur = it->second;
                continue;
            }
            if (cur.is(ExprKind::Let)) {
                cur = instantiate(cur.body(), cur.value());
                continue;
            }
            if (cur.is(ExprKind::App)) {
                KExpr f = get_app_fn(cur);
                KExpr fw = whnf(f);
                if (fw.is(ExprKind::Lam)) {
                    auto args = get_app_args(cur);
                    KExpr r = fw;
                    std::size_t i = 0;
                    while (i < args.size() && r.is(ExprKind::Lam)) {
                        r = instantiate(r.body(), args[i]);
                        ++i;
                    }
                    for (; i < args.size(); ++i) r = KExpr::app(r, args[i]);
                    cur = r;
                    continue;
                }
                if (fw.identity() != f.identity() && !(fw == f)) {
                    cur = KExpr::app(fw, get_app_args(cur));
                }
                return cur;
            }
            return cur;
        }
    }

    // ---- type inference ----

    KExpr infer(const KExpr& e, bool check) {
        switch (e.kind()) {
            case ExprKind::Var:
                throw TypeError("loose bound variable #" + std::to_string(e.var_index()));
            case ExprKind::Sort:
                return KExpr::sort(Level::succ(e.sort_level()));
            case ExprKind::Const: {
                if (is_prop_const(e)) return KExpr::sort(Level::of_nat(1));
                const Declaration& d = env_.sig.get(e.name());
                if (!e.levels().empty() && e.levels().size() != d.univ_params.size())
                    throw TypeError("wrong number of universe levels for " + e.name().to_string());
                if (e.levels().empty() && !d.univ_params.empty()) {
                    // Missing levels default to zero; printed forms omit them.
                    std::vector<Level> zeros(d.univ_params.size());
                    return env_.sig.instantiate_type(d, zeros);
                }
                return env_.sig.instantiate_type(d, e.levels());
            }
            case ExprKind::MVar:
            case ExprKind::Local:
                return e.type();
            case ExprKind::App: {
                KExpr ft = whnf(infer(e.fn(), check));
                if (!ft.is(ExprKind::Pi)) {
                    throw TypeError("function expected in " + debug_string(e) + ", got type " + debug_string(ft));
                }
                if (check) {
                    KExpr at = infer(e.arg(), check);
                    if (!def_eq(at, ft.type())) {
                        throw TypeError("argument " + debug_string(e.arg()) + " has type " + debug_string(inst(at)) +
                                        " but is expected to have type " + debug_string(inst(ft.type())));
                    }
                }
                return instantiate(ft.body(), e.arg());
            }
            case ExprKind::Lam: {
                if (check) ensure_sort(e.type());
                KExpr l = fresh_local(e.name(), e.type(), e.binder_info());
                KExpr bt = infer(instantiate(e.body(), l), check);
                return KExpr::pi(e.name(), e.binder_info(), e.type(), abstract_local(bt, l));
            }
            case ExprKind::Pi: {
                Level l1 = ensure_sort(e.type());
                KExpr l = fresh_local(e.name(), e.type(), e.binder_info());
                Level l2 = ensure_sort(instantiate(e.body(), l));
                return KExpr::sort(imax(l1, l2));
            }
            case ExprKind::Let: {
                if (check) {
                    ensure_sort(e.type());
                    KExpr vt = infer(e.value(), check);
                    if (!def_eq(vt, e.type())) throw TypeError("let value has the wrong type");
                }
                return infer(instantiate(e.body(), e.value()), check);
            }
            case ExprKind::Hole:
                throw TypeError("hole in a term that should be elaborated");
            case ExprKind::Ascribe:
                throw TypeError("type ascription in a term that should be elaborated");
        }
        throw TypeError("unknown expression kind");
    }

    /// Universe level of a type; `t` must infer to a sort.
    Level ensure_sort(const KExpr& t) {
        KExpr s = whnf(infer(t, false));
        if (is_prop_const(s)) return Level::zero();
        if (s.is(ExprKind::Sort)) return inst_level(s.sort_level());
        if (assignable_ && s.is(ExprKind::MVar)) {
            Level u = new_level_meta();
            if (unify_assign(s, KExpr::sort(u))) return inst_level(u);
        }
        throw TypeError("type expected, got " + debug_string(inst(t)));
    }

    // ---- definitional equality / unification ----

    bool level_eq(const Level& x, const Level& y) {
        Level a = inst_level(x).normalize();
        Level b = inst_level(y).normalize();
        if (a == b) return true;
        if (assignable_) {
            if (is_level_meta(a)) return assign_level(a, b);
            if (is_level_meta(b)) return assign_level(b, a);
            if (a.kind() == LevelKind::Succ && b.kind() == LevelKind::Succ) return level_eq(a.lhs(), b.lhs());
            // succ ?u against a closed positive level
            if (a.kind() == LevelKind::Succ && b.to_nat() && *b.to_nat() > 0)
                return level_eq(a.lhs(), Level::of_nat(*b.to_nat() - 1));
            if (b.kind() == LevelKind::Succ && a.to_nat() && *a.to_nat() > 0)
                return level_eq(Level::of_nat(*a.to_nat() - 1), b.lhs());
        }
        return level_equiv(a, b);
    }

    bool assign_level(const Level& meta, const Level& value) {
        std::function<bool(const Level&)> occurs = [&](const Level& l) {
            if (l.kind() == LevelKind::Param) return l.name() == meta.name();
            if (l.kind() == LevelKind::Succ) return occurs(l.lhs());
            if (l.kind() == LevelKind::Max) return occurs(l.lhs()) || occurs(l.rhs());
            return false;
        };
        if (occurs(value)) return false;
        level_assign_[meta.name()] = value;
        return true;
    }

    bool def_eq(const KExpr& x, const KExpr& y) {
        if (x == y) return true;
        KExpr a = whnf(x);
        KExpr b = whnf(y);
        if (assignable_) {
            if (a.is(ExprKind::MVar) && !is_assigned(a)) return unify_assign(a, b);
            if (b.is(ExprKind::MVar) && !is_assigned(b)) return unify_assign(b, a);
        }
        if (is_prop_const(a)) a = KExpr::prop();
        if (is_prop_const(b)) b = KExpr::prop();
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
            case ExprKind::Var:
                return a.var_index() == b.var_index();
            case ExprKind::Sort:
                return level_eq(a.sort_level(), b.sort_level());
            case ExprKind::Const: {
                if (a.name() != b.name()) return false;
                const auto& la = a.levels();
                const auto& lb = b.levels();
                if (la.size() != lb.size()) {
                    // An omitted level list stands for all-zero levels.
                    const auto& full = la.empty() ? lb : la;
                    if (!la.empty() && !lb.empty()) return false;
                    for (const auto& l : full)
                        if (!level_eq(l, Level::zero())) return false;
                    return true;
                }
                for (std::size_t i = 0; i < la.size(); ++i)
                    if (!level_eq(la[i], lb[i])) return false;
                return true;
            }
            case ExprKind::MVar:
                return a.name() == b.name();
            case ExprKind::Local:
                return a.name() == b.name();
            case ExprKind::App:
                return def_eq(a.fn(), b.fn()) && def_eq(a.arg(), b.arg());
            case ExprKind::Lam:
            case ExprKind::Pi:
                return def_eq(a.type(), b.type()) && def_eq(a.body(), b.body());
            default:
                return false;
        }
    }

    bool unify_assign(const KExpr& meta, const KExpr& value) {
        KExpr v = inst(value);
        if (v.is(ExprKind::MVar) && v.name() == meta.name()) return true;
        if (v.has_loose_bvars()) return false;
        bool occurs = false;
        std::function<void(const KExpr&)> scan = [&](const KExpr& x) {
            if (occurs || !x.has_mvar()) return;
            switch (x.kind()) {
                case ExprKind::MVar:
                    if (x.name() == meta.name()) occurs = true;
                    else scan(x.type());
                    return;
                case ExprKind::Local:
                    scan(x.type());
                    return;
                case ExprKind::App:
                    scan(x.fn());
                    scan(x.arg());
                    return;
                case ExprKind::Lam:
                case ExprKind::Pi:
                    scan(x.type());
                    scan(x.body());
                    return;
                case ExprKind::Let:
                    scan(x.type());
                    scan(x.value());
                    scan(x.body());
                    return;
                default:
                    return;
            }
        };
        scan(v);
        if (occurs) return false;
        assign_[meta.name()] = v;
        KExpr vt;
        try {
            vt = infer(v, false);
        } catch (const std::exception&) {
            assign_.erase(meta.name());
            return false;
        }
        if (!def_eq(meta.type(), vt)) {
            assign_.erase(meta.name());
            return false;
        }
        return true;
    }

  protected:
    const Environment& env_;
    bool assignable_;
    std::map<Name, KExpr> assign_;
    std::map<Name, Level> level_assign_;
    std::uint64_t meta_counter_ = 0;
    LocalContext lctx_;
};

class Elaborator : public Core {
  public:
    explicit Elaborator(const Environment& env) : Core(env, true) {}

    KExpr run(const KExpr& pre, const std::optional<KExpr>& expected) {
        KExpr e = elab(pre, expected);
        resolve_instances(pre);
        KExpr r = inst(e);
        if (r.has_mvar() || has_level_meta(r)) {
            throw AmbiguousType(debug_string(pre), "cannot infer the type of every subterm; add a type ascription");
        }
        try {
            KExpr t = infer(r, true);
            if (expected && !def_eq(t, *expected)) {
                throw ElaborationFailed(debug_string(pre), "has type " + debug_string(t) + " but " +
                                                               debug_string(*expected) + " was expected");
            }
        } catch (const TypeError& ex) {
            throw ElaborationFailed(debug_string(pre), ex.what());
        }
        return r;
    }

  private:
    std::vector<KExpr> instance_metas_;

    [[noreturn]] void fail(const KExpr& at, const std::string& reason) {
        throw ElaborationFailed(debug_string(inst(at)), reason);
    }

    void expect(const KExpr& at, const KExpr& actual, const std::optional<KExpr>& expected) {
        if (!expected) return;
        if (!def_eq(actual, *expected)) {
            fail(at, "type mismatch: " + debug_string(inst(actual)) + " vs expected " + debug_string(inst(*expected)));
        }
    }

    KExpr meta_for_binder(const KExpr& pi) {
        KExpr m = new_meta(pi.type());
        if (pi.binder_info() == BinderInfo::InstImplicit) instance_metas_.push_back(m);
        return m;
    }

    /// Applies metavariables for leading implicit and instance binders of `type`.
    KExpr insert_implicits(KExpr e, KExpr& type) {
        while (true) {
            KExpr t = whnf(type);
            if (!t.is(ExprKind::Pi) || t.binder_info() == BinderInfo::Default) return e;
            KExpr m = meta_for_binder(t);
            e = KExpr::app(e, m);
            type = instantiate(t.body(), m);
        }
    }

    KExpr level_instance(const KExpr& c) {
        const Declaration& d = env_.sig.get(c.name());
        if (!c.levels().empty()) return KExpr::constant(c.name(), c.levels());
        std::vector<Level> ls;
        for (std::size_t i = 0; i < d.univ_params.size(); ++i) ls.push_back(new_level_meta());
        return KExpr::constant(c.name(), ls);
    }

    KExpr elab_type(const KExpr& pre) {
        KExpr e = elab(pre, std::nullopt);
        try {
            ensure_sort(e);
        } catch (const TypeError& ex) {
            fail(pre, ex.what());
        }
        return e;
    }

    KExpr elab(const KExpr& pre, const std::optional<KExpr>& expected) {
        switch (pre.kind()) {
            case ExprKind::Var:
                fail(pre, "loose bound variable");
            case ExprKind::Sort:
                expect(pre, KExpr::sort(Level::succ(pre.sort_level())), expected);
                return pre;
            case ExprKind::Const: {
                if (is_prop_const(pre)) {
                    expect(pre, KExpr::sort(Level::of_nat(1)), expected);
                    return KExpr::prop();
                }
                if (!env_.sig.contains(pre.name())) fail(pre, "unknown constant '" + pre.name().to_string() + "'");
                KExpr c = level_instance(pre);
                KExpr type = infer(c, false);
                KExpr e = pre.is_explicit() ? c : insert_implicits(c, type);
                expect(pre, type, expected);
                return e;
            }
            case ExprKind::Hole: {
                KExpr m = new_meta(expected ? *expected : new_type_meta());
                return m;
            }
            case ExprKind::MVar:
                expect(pre, pre.type(), expected);
                return pre;
            case ExprKind::Local: {
                KExpr type = pre.type();
                KExpr e = insert_implicits(pre, type);
                expect(pre, type, expected);
                return e;
            }
            case ExprKind::App:
                return elab_app(pre, expected);
            case ExprKind::Lam: {
                std::optional<KExpr> exp_pi;
                if (expected) {
                    KExpr t = whnf(*expected);
                    if (t.is(ExprKind::Pi)) exp_pi = t;
                }
                KExpr dom;
                if (pre.type().is(ExprKind::Hole)) {
                    dom = exp_pi ? exp_pi->type() : new_type_meta();
                } else {
                    dom = elab_type(pre.type());
                    if (exp_pi && !def_eq(dom, exp_pi->type())) fail(pre, "binder domain does not match expected type");
                }
                KExpr l = fresh_local(pre.name(), dom, pre.binder_info());
                std::optional<KExpr> body_exp;
                if (exp_pi) body_exp = instantiate(exp_pi->body(), l);
                KExpr b = elab(instantiate(pre.body(), l), body_exp);
                return KExpr::lam(pre.name(), pre.binder_info(), dom, abstract_local(inst(b), l));
            }
            case ExprKind::Pi: {
                KExpr dom = pre.type().is(ExprKind::Hole) ? new_type_meta() : elab_type(pre.type());
                KExpr l = fresh_local(pre.name(), dom, pre.binder_info());
                KExpr b = elab_type(instantiate(pre.body(), l));
                KExpr r = KExpr::pi(pre.name(), pre.binder_info(), dom, abstract_local(inst(b), l));
                if (expected) expect(pre, infer(r, false), expected);
                return r;
            }
            case ExprKind::Let: {
                KExpr ty = pre.type().is(ExprKind::Hole) ? new_type_meta() : elab_type(pre.type());
                KExpr v = elab(pre.value(), ty);
                KExpr l = fresh_local(pre.name(), ty, BinderInfo::Default);
                KExpr b = elab(instantiate(pre.body(), l), expected);
                return KExpr::let(pre.name(), ty, v, abstract_local(inst(b), l));
            }
            case ExprKind::Ascribe: {
                KExpr ty = elab_type(pre.type());
                KExpr t = elab(pre.term(), ty);
                expect(pre, ty, expected);
                return t;
            }
        }
        fail(pre, "unsupported expression");
    }

    KExpr elab_app(const KExpr& pre, const std::optional<KExpr>& expected) {
        KExpr head = get_app_fn(pre);
        auto args = get_app_args(pre);
        KExpr f;
        KExpr ftype;
        bool all_explicit = head.is(ExprKind::Const) && head.is_explicit();
        if (all_explicit) {
            if (!env_.sig.contains(head.name())) fail(head, "unknown constant '" + head.name().to_string() + "'");
            f = level_instance(head);
            ftype = infer(f, false);
        } else {
            f = elab(head, std::nullopt);
            ftype = infer(f, false);
        }

        // First pass: apply placeholders so the result type can meet the expected
        // type before any argument is elaborated.
        std::vector<std::pair<KExpr, KExpr>> pending;  // placeholder, pre-argument
        for (const auto& a : args) {
            if (!all_explicit) f = insert_implicits(f, ftype);
            KExpr t = whnf(ftype);
            if (!t.is(ExprKind::Pi)) fail(pre, "too many arguments for " + debug_string(inst(head)));
            KExpr slot = new_meta(t.type());
            if (all_explicit && t.binder_info() == BinderInfo::InstImplicit) instance_metas_.push_back(slot);
            pending.emplace_back(slot, a);
            f = KExpr::app(f, slot);
            ftype = instantiate(t.body(), slot);
        }
        if (!all_explicit) {
            bool keep_implicit = false;
            if (expected) {
                KExpr e = whnf(*expected);
                keep_implicit = e.is(ExprKind::Pi) && e.binder_info() != BinderInfo::Default;
            }
            if (!keep_implicit) f = insert_implicits(f, ftype);
        }
        if (expected && !def_eq(ftype, *expected)) {
            fail(pre, "type mismatch: " + debug_string(inst(ftype)) + " vs expected " + debug_string(inst(*expected)));
        }
        for (auto& [slot, a] : pending) {
            KExpr slot_type = inst(slot.type());
            if (a.is(ExprKind::Hole)) continue;
            KExpr v = elab(a, slot_type);
            if (!def_eq(slot, v)) fail(a, "argument does not fit its parameter");
        }
        return f;
    }

    void resolve_instances(const KExpr& pre) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (const auto& m : instance_metas_) {
                if (is_assigned(m)) continue;
                KExpr t = whnf(inst(m.type()));
                KExpr cls = get_app_fn(t);
                auto targs = get_app_args(t);
                if (!cls.is(ExprKind::Const) || targs.size() != 1) continue;
                KExpr carrier = whnf(inst(targs[0]));
                if (!carrier.is(ExprKind::Const)) continue;
                auto found = env_.instances.find(cls.name(), carrier.name());
                if (!found) {
                    fail(pre, "no instance of " + cls.name().to_string() + " for " + carrier.name().to_string());
                }
                if (!unify_assign(m, KExpr::constant(*found))) {
                    fail(pre, "instance " + found->to_string() + " does not have type " + debug_string(t));
                }
                progress = true;
            }
        }
        for (const auto& m : instance_metas_) {
            if (!is_assigned(m)) {
                throw AmbiguousType(debug_string(pre), "cannot determine the carrier type for instance of " +
                                                           debug_string(inst(m.type())));
            }
        }
    }
};

}  // namespace

KExpr infer_type(const KExpr& e, const Environment& env) {
    Core c(env, false);
    return c.infer(e, true);
}

KExpr whnf(const KExpr& e) {
    static const Environment empty_env{Signature{}, InstanceTable{}};
    Core c(empty_env, false);
    return c.whnf(e);
}

bool is_def_eq(const KExpr& a, const KExpr& b, const Environment& env) {
    Core c(env, false);
    return c.def_eq(a, b);
}

KExpr elaborate(const KExpr& pre, const Environment& env, const std::optional<KExpr>& expected) {
    Elaborator el(env);
    return el.run(pre, expected);
}

bool is_proposition(const KExpr& e, const Environment& env) {
    try {
        KExpr t = infer_type(e, env);
        KExpr s = whnf(t);
        if (s.is(ExprKind::Const) && s.name() == names::prop) return true;
        return s.is(ExprKind::Sort) && s.sort_level().normalize() == Level::zero();
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace casbridge::kexpr
