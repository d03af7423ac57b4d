#include <random>

#include "casbridge/kexpr/surface.hpp"
#include "casbridge/reflect/reflect.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace casbridge;
using cexpr::CExpr;
using cexpr::parse_fullform;
using cexpr::print_fullform;
using kexpr::KExpr;
using kexpr::Level;
using reflect::ForwardRuleSet;

namespace {

const kexpr::Environment& env() {
    static kexpr::Environment e;
    return e;
}

KExpr real_t() { return KExpr::constant("real"); }

KExpr x_local() { return KExpr::local(kexpr::Name("17.27"), "x", kexpr::BinderInfo::Default, real_t()); }

const char* kX = "LeanLocal[\"17.27\", \"x\", \"bi\", LeanConst[\"real\", {}]]";

std::string with_x(std::string text) {
    for (std::size_t p; (p = text.find('X')) != std::string::npos;) text.replace(p, 1, kX);
    return text;
}

}  // namespace

TEST_CASE("encoding of x + x keeps type and instance") {
    KExpr add = KExpr::constant("add", {Level::zero()});
    KExpr e = KExpr::app(add, {real_t(), KExpr::constant("real.has_add"), x_local(), x_local()});
    CHECK(print_fullform(reflect::encode_kernel_expr(e)) ==
          with_x("LeanApp[LeanApp[LeanApp[LeanApp[LeanConst[\"add\", {0}], LeanConst[\"real\", {}]], "
                 "LeanConst[\"real.has_add\", {}]], X], X]"));
}

TEST_CASE("encoding of the remaining node kinds") {
    CHECK(print_fullform(reflect::encode_kernel_expr(KExpr::var(0))) == "LeanVar[0]");
    CHECK(print_fullform(reflect::encode_kernel_expr(KExpr::sort(Level::of_nat(1)))) == "LeanSort[1]");
    CHECK(print_fullform(reflect::encode_level(Level::succ(Level::param("u")))) ==
          "LeanLevelSucc[LeanLevelParam[\"u\"]]");
    CHECK(print_fullform(reflect::encode_level(Level::max(Level::zero(), Level::of_nat(2)))) ==
          "LeanLevelMax[0, 2]");
    KExpr lam = KExpr::lam("y", kexpr::BinderInfo::Implicit, real_t(), KExpr::var(0));
    CHECK(print_fullform(reflect::encode_kernel_expr(lam)) ==
          "LeanLam[\"y\", \"implicit\", LeanConst[\"real\", {}], LeanVar[0]]");
    KExpr let = KExpr::let("z", real_t(), x_local(), KExpr::var(0));
    CHECK(print_fullform(reflect::encode_kernel_expr(let)) ==
          with_x("LeanLet[\"z\", LeanConst[\"real\", {}], X, LeanVar[0]]"));
    CHECK_THROWS_AS(reflect::encode_kernel_expr(KExpr::hole()), std::invalid_argument);
}

TEST_CASE("encoding is injective on random terms") {
    std::mt19937 rng(11);
    for (int i = 0; i < 400; ++i) {
        KExpr a = testgen::random_kexpr(rng, 4, 0, {x_local()});
        KExpr b = testgen::random_kexpr(rng, 4, 0, {x_local()});
        CHECK((reflect::encode_kernel_expr(a) == reflect::encode_kernel_expr(b)) == (a == b));
    }
}

TEST_CASE("forward translation of the running example") {
    kexpr::LocalContext ctx;
    kexpr::declare_context("x : real", env(), ctx);
    KExpr e = kexpr::parse_kexpr("x^2 - 2*x + 1", env(), &ctx);
    CExpr x = reflect::encode_kernel_expr(*ctx.lookup("x"));
    CExpr lf = reflect::lean_form(reflect::encode_kernel_expr(e));
    CExpr expected = cexpr::substitute(
        parse_fullform("Inactive[Plus][Inactive[Subtract][Inactive[Power][X, Inactive[Times][2, 1]], "
                       "Inactive[Times][Inactive[Times][2, 1], X]], 1]"),
        {{"X", x}});
    CHECK(lf == expected);
    CHECK(reflect::strip_inactive(lf) ==
          cexpr::substitute(parse_fullform("Plus[Subtract[Power[X, Times[2, 1]], Times[Times[2, 1], X]], 1]"),
                            {{"X", x}}));
}

TEST_CASE("numerals, locals and unmatched nodes") {
    CExpr three = parse_fullform(
        "LeanApp[LeanApp[LeanApp[LeanApp[LeanConst[\"bit1\", {0}], LeanConst[\"real\", {}]], "
        "LeanConst[\"real.has_one\", {}]], LeanConst[\"real.has_add\", {}]], "
        "LeanApp[LeanApp[LeanConst[\"one\", {0}], LeanConst[\"real\", {}]], LeanConst[\"real.has_one\", {}]]]");
    CHECK(print_fullform(reflect::lean_form(three)) == "Inactive[Plus][Inactive[Times][2, 1], 1]");
    CHECK(print_fullform(reflect::lean_form(parse_fullform("LeanApp[LeanConst[\"bit0\", {}], LeanConst[\"one\", {}]]"))) ==
          "Inactive[Times][2, 1]");
    CExpr x = parse_fullform(with_x("X"));
    CHECK(reflect::lean_form(x) == x);
    CExpr sin = parse_fullform(with_x("LeanApp[LeanConst[\"sin\", {}], X]"));
    CHECK(reflect::lean_form(sin) == sin);
    CHECK_THROWS_AS(reflect::lean_form(parse_fullform("LeanVar[0]")), reflect::UnboundVariable);
    CHECK(reflect::lean_form(parse_fullform("LeanVar[1]"), {CExpr::sym("a"), CExpr::sym("b")},
                             ForwardRuleSet::defaults()) == CExpr::sym("b"));
}

TEST_CASE("empty rule set is the identity on closed encodings") {
    std::mt19937 rng(5);
    ForwardRuleSet none;
    for (int i = 0; i < 200; ++i) {
        KExpr k = testgen::random_kexpr(rng, 4, 0, {x_local()});
        if (k.has_loose_bvars()) continue;
        CExpr c = reflect::encode_kernel_expr(k);
        CHECK(reflect::lean_form(c, none) == c);
    }
}

TEST_CASE("binders get fresh symbols") {
    kexpr::LocalContext ctx;
    KExpr f = kexpr::parse_kexpr("fun x : real, x + x", env(), &ctx);
    CHECK(print_fullform(reflect::lean_form(reflect::encode_kernel_expr(f))) ==
          "Inactive[Function][x$1, Inactive[Plus][x$1, x$1]]");
    // a symbol already present in the input is skipped
    CExpr lam = parse_fullform("LeanLam[\"x\", \"bi\", LeanConst[\"real\", {}], LeanApp[LeanConst[\"f\", {}], x$1]]");
    CHECK(print_fullform(reflect::lean_form(lam)) == "Inactive[Function][x$2, LeanApp[LeanConst[\"f\", {}], x$1]]");
    KExpr all = kexpr::parse_kexpr("forall y : real, y <= y", env(), &ctx);
    CHECK(print_fullform(reflect::lean_form(reflect::encode_kernel_expr(all))) ==
          "Inactive[ForAll][y$1, Inactive[LessEqual][y$1, y$1]]");
    KExpr arrow = kexpr::parse_kexpr("real -> real", env(), &ctx);
    CHECK(reflect::lean_form(reflect::encode_kernel_expr(arrow)).has_head("LeanPi", 4));
    CExpr let = parse_fullform(with_x("LeanLet[\"z\", LeanConst[\"real\", {}], X, LeanApp[LeanConst[\"f\", {}], LeanVar[0]]]"));
    CHECK(print_fullform(reflect::lean_form(let)) == with_x("LeanApp[LeanConst[\"f\", {}], X]"));
}

TEST_CASE("registered rules take precedence and slots are validated") {
    CExpr pat = parse_fullform("LeanApp[LeanApp[LeanApp[LeanApp[LeanConst[\"add\", _], _], _], a_], b_]");
    auto rules = reflect::register_forward_rule(ForwardRuleSet::defaults(), pat,
                                                parse_fullform("MyAdd[LeanForm[a], b]"));
    CExpr e = parse_fullform(
        "LeanApp[LeanApp[LeanApp[LeanApp[LeanConst[\"add\", {0}], r], i], LeanConst[\"one\", {}]], LeanConst[\"one\", {}]]");
    CHECK(print_fullform(reflect::lean_form(e, rules)) == "MyAdd[1, LeanConst[\"one\", {}]]");
    CHECK(print_fullform(reflect::lean_form(e)) == "Inactive[Plus][1, 1]");
    CHECK_THROWS_AS(reflect::register_forward_rule(rules, pat, parse_fullform("LeanForm[c]")), reflect::MalformedRule);
    CHECK_THROWS_AS(reflect::register_forward_rule(rules, pat, parse_fullform("LeanForm[F[a]]")), reflect::MalformedRule);
    ForwardRuleSet loaded;
    loaded.load("# comment\nLeanForm[LeanConst[\"pi\", _]] :=\n  Pi\n\nLeanForm[LeanConst[\"e\", _]] := E\n");
    CHECK(loaded.rules().size() == 2);
    CHECK(reflect::lean_form(parse_fullform("LeanConst[\"pi\", {}]"), loaded) == CExpr::sym("Pi"));
    CHECK_THROWS_AS(loaded.load("LeanForm[F[x_] := x"), std::exception);
    CHECK_THROWS_AS(loaded.load("Foo[x_] := x"), reflect::MalformedRule);
}

TEST_CASE("collapse and inflate") {
    CExpr x = parse_fullform(with_x("X"));
    CExpr e = parse_fullform(with_x("Plus[Times[2, X], LeanApp[LeanConst[\"sin\", {}], X], X, $k1]"));
    auto c = reflect::collapse(e);
    CHECK(print_fullform(c.expr) == "Plus[Times[2, $k2], $k3, $k2, $k1]");
    CHECK(c.table.at("$k2") == x);
    CHECK(reflect::inflate(c.expr, c.table) == e);
    CHECK_THROWS_AS(reflect::inflate(parse_fullform("Plus[$k9, 1]"), c.table), reflect::MissingEntry);
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
        CExpr r = testgen::random_cexpr(rng, 4);
        auto cr = reflect::collapse(r);
        CHECK(reflect::inflate(cr.expr, cr.table) == r);
    }
}
