#include "casbridge/kexpr/numeral.hpp"

#include <functional>
#include <stdexcept>

namespace casbridge::kexpr {

namespace {

KExpr numeral_spine(const mpz_class& n, const std::function<KExpr(const Name&)>& head) {
    if (n < 0) throw std::invalid_argument("numerals are nonnegative");
    if (n == 0) return head(names::zero);
    if (n == 1) return head(names::one);
    // Most significant bit first: one, then one bit0/bit1 per remaining bit.
    std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
    KExpr e = head(names::one);
    for (std::size_t i = bits - 1; i-- > 0;) {
        bool set = mpz_tstbit(n.get_mpz_t(), i) != 0;
        e = KExpr::app(head(set ? names::bit1 : names::bit0), e);
    }
    return e;
}

}  // namespace

KExpr encode_numeral(const mpz_class& n) {
    return numeral_spine(n, [](const Name& c) { return KExpr::constant(c); });
}

KExpr encode_numeral(const mpz_class& n, const Name& carrier, const InstanceTable& instances) {
    const KExpr ty = KExpr::constant(carrier);
    auto inst = [&](const Name& cls) {
        auto found = instances.find(cls, carrier);
        if (!found) throw std::invalid_argument("no " + cls.to_string() + " instance for " + carrier.to_string());
        return KExpr::constant(*found);
    };
    return numeral_spine(n, [&](const Name& c) {
        KExpr head = KExpr::app(KExpr::constant(c, {Level::zero()}), ty);
        if (c == names::zero) return KExpr::app(head, inst(names::has_zero));
        if (c == names::one) return KExpr::app(head, inst(names::has_one));
        if (c == names::bit0) return KExpr::app(head, inst(names::has_add));
        return KExpr::app(KExpr::app(head, inst(names::has_add)), inst(names::has_one));
    });
}

std::optional<mpz_class> try_decode_numeral(const KExpr& e) {
    KExpr head = get_app_fn(e);
    if (!head.is(ExprKind::Const)) return std::nullopt;
    auto args = get_app_args(e);
    const Name& c = head.name();
    // Untyped spines have 0 or 1 arguments; elaborated ones add the type and instances.
    if (c == names::zero || c == names::one) {
        if (args.size() != 0 && args.size() != 2) return std::nullopt;
        return mpz_class(c == names::zero ? 0 : 1);
    }
    std::size_t expected_untyped = 1;
    std::size_t expected_typed = c == names::bit0 ? 3 : 4;
    if (c != names::bit0 && c != names::bit1) return std::nullopt;
    if (args.size() != expected_untyped && args.size() != expected_typed) return std::nullopt;
    auto inner = try_decode_numeral(args.back());
    if (!inner) return std::nullopt;
    mpz_class v = 2 * *inner;
    if (c == names::bit1) v += 1;
    return v;
}

mpz_class decode_numeral(const KExpr& e) {
    if (auto v = try_decode_numeral(e)) return *v;
    throw NotANumeral("not a numeral: " + debug_string(e));
}

}  // namespace casbridge::kexpr
