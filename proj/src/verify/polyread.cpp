#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/numeral.hpp"
#include "casbridge/kexpr/signature.hpp"
#include "casbridge/kexpr/surface.hpp"
#include "casbridge/verify/verify.hpp"

namespace casbridge::verify {

namespace names = kexpr::names;
using kexpr::ExprKind;

namespace {

// Which operations are honest ring operations on the carrier: natural
// subtraction truncates and integer division rounds, so neither is read.
struct Carrier {
    bool sub = true;
    bool div = true;
};

Carrier carrier_of(const KExpr& e, const Environment& env) {
    KExpr t;
    try {
        t = kexpr::whnf(kexpr::infer_type(e, env));
    } catch (const std::exception& ex) {
        throw OutOfFragment(std::string("ill-typed term (") + ex.what() + ")", kexpr::debug_string(e));
    }
    if (t.is(ExprKind::Const)) {
        if (t.name() == names::real) return {};
        if (t.name() == names::int_) return {true, false};
        if (t.name() == names::nat) return {false, false};
    }
    throw OutOfFragment("carrier is not real, int or nat", kexpr::print_kexpr(t, env));
}

const KExpr& last_arg(const std::vector<KExpr>& args, std::size_t from_end) {
    return args[args.size() - 1 - from_end];
}

}  // namespace

Poly PolyReader::read(const KExpr& e) {
    if (!env_) throw std::logic_error("PolyReader without an environment");
    Carrier c = carrier_of(e, *env_);
    std::function<Poly(const KExpr&)> go = [&](const KExpr& t) -> Poly {
        if (auto n = kexpr::try_decode_numeral(t)) return Poly(Rational(*n));
        if (t.is(ExprKind::Local)) {
            std::string pretty = t.pretty_name().to_string(), unique = t.name().to_string();
            auto [it, fresh] = unique_of_.emplace(pretty, unique);
            if (!fresh && it->second != unique)
                throw OutOfFragment("two different locals are both named", pretty);
            return Poly::variable(pretty);
        }
        KExpr fn = kexpr::get_app_fn(t);
        auto args = kexpr::get_app_args(t);
        if (fn.is(ExprKind::Const)) {
            const auto& h = fn.name();
            if (h == names::add && args.size() >= 2) return go(last_arg(args, 1)) + go(last_arg(args, 0));
            if (h == names::mul && args.size() >= 2) return go(last_arg(args, 1)) * go(last_arg(args, 0));
            if (h == names::sub && args.size() >= 2 && c.sub) return go(last_arg(args, 1)) - go(last_arg(args, 0));
            if (h == names::neg && args.size() >= 1 && c.sub) return -go(last_arg(args, 0));
            if (h == names::div && args.size() >= 2 && c.div) {
                Poly d = go(last_arg(args, 0));
                if (d.is_constant() && d.constant_term() != 0)
                    return go(last_arg(args, 1)) * Poly(Rational(1 / d.constant_term()));
            }
            if (h == names::pow_nat && args.size() >= 2) {
                if (auto k = kexpr::try_decode_numeral(last_arg(args, 0)); k && k->fits_uint_p() && *k <= 4096)
                    return go(last_arg(args, 1)).pow(static_cast<unsigned>(k->get_ui()));
            }
        }
        throw OutOfFragment("not a polynomial term", kexpr::print_kexpr(t, *env_));
    };
    return go(e);
}

std::pair<Poly, poly::Relation> PolyReader::read_relation(const KExpr& prop) {
    KExpr fn = kexpr::get_app_fn(prop);
    auto args = kexpr::get_app_args(prop);
    if (fn.is(ExprKind::Const) && args.size() >= 2) {
        const auto& h = fn.name();
        std::optional<poly::Relation> rel;
        if (h == names::le) rel = poly::Relation::Le0;
        if (h == names::lt) rel = poly::Relation::Lt0;
        if (h == names::eq) rel = poly::Relation::Eq0;
        if (rel) return {read(last_arg(args, 1)) - read(last_arg(args, 0)), *rel};
    }
    throw OutOfFragment("not a polynomial relation", kexpr::print_kexpr(prop, *env_));
}

std::vector<std::pair<Poly, poly::Relation>> PolyReader::read_hypothesis(const KExpr& prop) {
    if (kexpr::is_const_app(prop, names::and_, 2)) {
        auto args = kexpr::get_app_args(prop);
        auto out = read_hypothesis(args[0]);
        for (auto& r : read_hypothesis(args[1])) out.push_back(std::move(r));
        return out;
    }
    return {read_relation(prop)};
}

}  // namespace casbridge::verify
