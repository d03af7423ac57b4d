#include "casbridge/kexpr/signature.hpp"

#include <functional>

namespace casbridge::kexpr {

namespace {

const Name kU{"u"};

KExpr type_u() { return KExpr::sort(Level::succ(Level::param(kU))); }
KExpr sort_u() { return KExpr::sort(Level::param(kU)); }
KExpr type0() { return KExpr::sort(Level::of_nat(1)); }

KExpr implicit_pi(const char* n, KExpr dom, KExpr body) {
    return KExpr::pi(Name{n}, BinderInfo::Implicit, std::move(dom), std::move(body));
}
KExpr inst_pi(KExpr dom, KExpr body) {
    return KExpr::pi(Name{"inst"}, BinderInfo::InstImplicit, std::move(dom), std::move(body));
}
KExpr arrow(KExpr dom, KExpr body) {
    return KExpr::pi(Name{"a"}, BinderInfo::Default, std::move(dom), lift_loose(body, 1));
}
KExpr cls(const Name& c, std::uint32_t var) {
    return KExpr::app(KExpr::constant(c, {Level::param(kU)}), KExpr::var(var));
}

// Pi {A : Type u} [C A], A -> ... with `explicit_arity` arguments of type A and
// result `result(depth)`, where depth is the number of binders in scope.
KExpr class_op(const std::vector<Name>& classes, std::size_t explicit_arity,
               const std::function<KExpr(std::uint32_t)>& result) {
    // Built inside-out with de Bruijn indices counted from the innermost binder.
    const auto ninst = static_cast<std::uint32_t>(classes.size());
    const auto nexp = static_cast<std::uint32_t>(explicit_arity);
    KExpr body = result(ninst + nexp);
    for (std::uint32_t k = nexp; k-- > 0;) {
        // Binder k sits under 1 + ninst + k binders; A is var(ninst + k).
        body = KExpr::pi(Name{"a"}, BinderInfo::Default, KExpr::var(ninst + k), body);
    }
    for (std::uint32_t k = ninst; k-- > 0;) {
        body = inst_pi(cls(classes[k], k), body);
    }
    return implicit_pi("A", type_u(), body);
}

}  // namespace

void Signature::declare(Name name, KExpr type, std::vector<Name> univ_params) {
    if (!is_closed(type)) throw std::invalid_argument("declared type of '" + name.to_string() + "' is not closed");
    Declaration d{name, std::move(univ_params), std::move(type)};
    decls_.insert_or_assign(std::move(name), std::move(d));
}

const Declaration* Signature::find(const Name& n) const {
    auto it = decls_.find(n);
    if (it != decls_.end()) return &it->second;
    return nullptr;
}

const Declaration& Signature::get(const Name& n) const {
    if (auto* d = find(n)) return *d;
    throw UnknownConstant(n);
}

namespace {

Level subst_level(const Level& l, const std::vector<Name>& params, const std::vector<Level>& levels) {
    switch (l.kind()) {
        case LevelKind::Zero:
            return l;
        case LevelKind::Succ:
            return Level::succ(subst_level(l.lhs(), params, levels));
        case LevelKind::Max:
            return Level::max(subst_level(l.lhs(), params, levels), subst_level(l.rhs(), params, levels));
        case LevelKind::Param:
            for (std::size_t i = 0; i < params.size() && i < levels.size(); ++i)
                if (params[i] == l.name()) return levels[i];
            return l;
    }
    return l;
}

KExpr subst_levels(const KExpr& e, const std::vector<Name>& params, const std::vector<Level>& levels) {
    switch (e.kind()) {
        case ExprKind::Sort:
            return KExpr::sort(subst_level(e.sort_level(), params, levels));
        case ExprKind::Const: {
            std::vector<Level> ls;
            for (const auto& l : e.levels()) ls.push_back(subst_level(l, params, levels));
            return e.is_explicit() ? KExpr::explicit_constant(e.name(), ls) : KExpr::constant(e.name(), ls);
        }
        case ExprKind::App:
            return KExpr::app(subst_levels(e.fn(), params, levels), subst_levels(e.arg(), params, levels));
        case ExprKind::Lam:
            return KExpr::lam(e.name(), e.binder_info(), subst_levels(e.type(), params, levels),
                              subst_levels(e.body(), params, levels));
        case ExprKind::Pi:
            return KExpr::pi(e.name(), e.binder_info(), subst_levels(e.type(), params, levels),
                             subst_levels(e.body(), params, levels));
        case ExprKind::Let:
            return KExpr::let(e.name(), subst_levels(e.type(), params, levels),
                              subst_levels(e.value(), params, levels), subst_levels(e.body(), params, levels));
        default:
            return e;
    }
}

}  // namespace

KExpr Signature::instantiate_type(const Declaration& d, const std::vector<Level>& levels) const {
    if (d.univ_params.empty()) return d.type;
    return subst_levels(d.type, d.univ_params, levels);
}

Signature Signature::builtin() {
    Signature s;
    const KExpr prop = KExpr::prop();
    for (const auto& t : {names::real, names::int_, names::nat, names::string}) s.declare(t, type0());
    s.declare(names::prop, KExpr::sort(Level::of_nat(1)));

    const auto ret_a = [](std::uint32_t depth) { return KExpr::var(depth); };
    const auto ret_prop = [](std::uint32_t) { return KExpr::prop(); };
    const auto ret_last_a = [](std::uint32_t depth) { return KExpr::var(depth); };

    // Class constants: has_add.{u} : Type u -> Type u
    for (const auto& c : {names::has_add, names::has_mul, names::has_neg, names::has_sub, names::has_div,
                          names::has_pow_nat, names::has_le, names::has_lt, names::has_zero, names::has_one}) {
        s.declare(c, KExpr::pi(Name{"A"}, BinderInfo::Default, type_u(), type_u()), {kU});
    }

    for (const auto& [op, c] : std::vector<std::pair<Name, Name>>{{names::add, names::has_add},
                                                                  {names::mul, names::has_mul},
                                                                  {names::sub, names::has_sub},
                                                                  {names::div, names::has_div}}) {
        s.declare(op, class_op({c}, 2, ret_a), {kU});
    }
    s.declare(names::neg, class_op({names::has_neg}, 1, ret_a), {kU});
    s.declare(names::le, class_op({names::has_le}, 2, ret_prop), {kU});
    s.declare(names::lt, class_op({names::has_lt}, 2, ret_prop), {kU});
    s.declare(names::zero, class_op({names::has_zero}, 0, ret_a), {kU});
    s.declare(names::one, class_op({names::has_one}, 0, ret_a), {kU});
    s.declare(names::bit0, class_op({names::has_add}, 1, ret_a), {kU});
    s.declare(names::bit1, class_op({names::has_add, names::has_one}, 1, ret_last_a), {kU});

    // pow_nat : Pi {A : Type u} [has_pow_nat A], A -> nat -> A
    s.declare(names::pow_nat,
              implicit_pi("A", type_u(),
                          inst_pi(cls(names::has_pow_nat, 0),
                                  KExpr::pi(Name{"a"}, BinderInfo::Default, KExpr::var(1),
                                            KExpr::pi(Name{"n"}, BinderInfo::Default, KExpr::constant(names::nat),
                                                      KExpr::var(3))))),
              {kU});

    // eq : Pi {A : Sort u}, A -> A -> Prop
    s.declare(names::eq,
              implicit_pi("A", sort_u(),
                          KExpr::pi(Name{"a"}, BinderInfo::Default, KExpr::var(0),
                                    KExpr::pi(Name{"b"}, BinderInfo::Default, KExpr::var(1), prop))),
              {kU});
    s.declare(names::and_, arrow(prop, arrow(prop, prop)));
    s.declare(names::false_, prop);
    // exists : Pi {A : Sort u}, (A -> Prop) -> Prop
    s.declare(names::exists,
              implicit_pi("A", sort_u(),
                          KExpr::pi(Name{"p"}, BinderInfo::Default,
                                    KExpr::pi(Name{"a"}, BinderInfo::Default, KExpr::var(0), prop), prop)),
              {kU});

    // list : Type u -> Type u, with nil and cons.
    s.declare(names::list, KExpr::pi(Name{"A"}, BinderInfo::Default, type_u(), type_u()), {kU});
    const auto list_of = [](std::uint32_t v) {
        return KExpr::app(KExpr::constant(names::list, {Level::param(kU)}), KExpr::var(v));
    };
    s.declare(names::list_nil, implicit_pi("A", type_u(), list_of(0)), {kU});
    s.declare(names::list_cons,
              implicit_pi("A", type_u(),
                          KExpr::pi(Name{"hd"}, BinderInfo::Default, KExpr::var(0),
                                    KExpr::pi(Name{"tl"}, BinderInfo::Default, list_of(1), list_of(2)))),
              {kU});

    // Instances: real.has_add : has_add.{0} real, and so on.
    for (const auto& carrier : base_carriers()) {
        for (const auto& c : {names::has_add, names::has_mul, names::has_neg, names::has_sub, names::has_div,
                              names::has_pow_nat, names::has_le, names::has_lt, names::has_zero, names::has_one}) {
            s.declare(instance_name(c, carrier),
                      KExpr::app(KExpr::constant(c, {Level::zero()}), KExpr::constant(carrier)));
        }
    }
    return s;
}

bool is_string_literal(const KExpr& e) {
    return e.is(ExprKind::Const) && e.name().segments().size() == 3 && e.name().prefix() == names::string_lit;
}

KExpr string_literal(const std::string& text) { return KExpr::constant(names::string_lit.append(text)); }

std::string string_literal_text(const KExpr& e) { return e.name().last_text(); }

Name instance_name(const Name& cls, const Name& carrier) {
    auto segs = carrier.segments();
    for (const auto& s : cls.segments()) segs.push_back(s);
    return Name(std::move(segs));
}

const std::vector<Name>& base_carriers() {
    static const std::vector<Name> carriers{names::real, names::int_, names::nat};
    return carriers;
}

InstanceTable InstanceTable::builtin() {
    InstanceTable t;
    for (const auto& carrier : base_carriers()) {
        for (const auto& c : {names::has_add, names::has_mul, names::has_neg, names::has_sub, names::has_div,
                              names::has_pow_nat, names::has_le, names::has_lt, names::has_zero, names::has_one}) {
            t.add(c, carrier, instance_name(c, carrier));
        }
    }
    return t;
}

void InstanceTable::add(Name cls, Name carrier, Name instance) {
    table_.insert_or_assign({std::move(cls), std::move(carrier)}, std::move(instance));
}

std::optional<Name> InstanceTable::find(const Name& cls, const Name& carrier) const {
    auto it = table_.find({cls, carrier});
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

}  // namespace casbridge::kexpr
