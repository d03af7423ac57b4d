#include <doctest.h>

#include <random>
#include <set>

#include "casbridge/cexpr/cexpr.hpp"
#include "generators.hpp"

using namespace casbridge::cexpr;

namespace {

CExpr I(long v) { return CExpr::integer(v); }
CExpr S(const char* s) { return CExpr::sym(s); }

void subterms(const CExpr& e, std::vector<CExpr>& out) {
    out.push_back(e);
    if (!e.is(CKind::App)) return;
    subterms(e.head(), out);
    for (const auto& a : e.args()) subterms(a, out);
}

// Replaces every `Pattern[v, Blank[]]` by the value assigned to v.
CExpr plug(const CExpr& p, const Bindings& b) {
    return transform(p, [&](const CExpr& x) -> std::optional<CExpr> {
        if (x.has_head("Pattern", 2)) return b.at(x.arg(0).text());
        return std::nullopt;
    });
}

// Exhaustive matcher: tries every assignment of pattern variables to subterms of e.
bool brute_force_matches(const CExpr& p, const CExpr& e) {
    auto vars = pattern_variables(p);
    std::vector<CExpr> pool;
    subterms(e, pool);
    Bindings b;
    std::function<bool(std::size_t)> go = [&](std::size_t k) {
        if (k == vars.size()) return plug(p, b) == e;
        for (const auto& t : pool) {
            b[vars[k]] = t;
            if (go(k + 1)) return true;
        }
        return false;
    };
    return go(0);
}

CExpr punch_holes(std::mt19937& rng, const CExpr& e) {
    if (testgen::pick(rng, 0, 3) == 0) {
        const char* v = testgen::pick(rng, 0, 1) ? "u" : "w";
        return CExpr::app("Pattern", {S(v), CExpr::app("Blank", {})});
    }
    if (!e.is(CKind::App)) return e;
    std::vector<CExpr> args;
    for (const auto& a : e.args()) args.push_back(punch_holes(rng, a));
    return CExpr::app(e.head(), args);
}

}  // namespace

TEST_CASE("parse FullForm") {
    CExpr e = parse_fullform("Power[Plus[-1, X], 2]");
    CHECK(e == CExpr::app("Power", {CExpr::app("Plus", {I(-1), S("X")}), I(2)}));
    CHECK(parse_fullform("x") == S("x"));
    CHECK(parse_fullform("Plus[2, 3]") == CExpr::app("Plus", {I(2), I(3)}));
    CHECK(parse_fullform("  Plus[ 2 ,3 ] ") == CExpr::app("Plus", {I(2), I(3)}));
    CHECK(parse_fullform("Inactive[Plus][x, y]").head() == CExpr::app("Inactive", {S("Plus")}));
    CHECK(parse_fullform("{0}") == CExpr::list({I(0)}));
    CHECK(parse_fullform("F[x_] := Plus[x, 1]") ==
          CExpr::app("SetDelayed", {CExpr::app("F", {CExpr::app("Pattern", {S("x"), CExpr::app("Blank", {})})}),
                                    CExpr::app("Plus", {S("x"), I(1)})}));
    CHECK(parse_fullform("x // Activate // Factor") ==
          CExpr::app("Factor", {CExpr::app("Activate", {S("x")})}));
    CHECK(parse_fullform("x^2 - 2*x + 1") ==
          CExpr::app("Plus", {CExpr::app("Power", {S("x"), I(2)}), CExpr::app("Times", {I(-2), S("x")}), I(1)}));
    CHECK(parse_fullform("a/b") == CExpr::app("Times", {S("a"), CExpr::app("Power", {S("b"), I(-1)})}));
    CHECK(parse_fullform("x -> 2") == CExpr::app("Rule", {S("x"), I(2)}));
    CHECK(parse_fullform("x <= 1 && y > 2") ==
          CExpr::app("And", {CExpr::app("LessEqual", {S("x"), I(1)}), CExpr::app("Greater", {S("y"), I(2)})}));
    CHECK(parse_fullform("0.001").is(CKind::Real));
    CHECK(parse_fullform("0.001").real_value() == mpq_class(1, 1000));
    CHECK(parse_fullform("1.5*^3").real_value() == 1500);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(parse_fullform("Plus["), SyntaxError);
    CHECK_THROWS_AS(parse_fullform("Plus[1,]"), SyntaxError);
    CHECK_THROWS_AS(parse_fullform("\"open"), SyntaxError);
    try {
        parse_fullform("F[1] ]");
        FAIL("expected a syntax error");
    } catch (const SyntaxError& e) {
        CHECK(e.position == 5);
    }
}

TEST_CASE("print FullForm") {
    CHECK(print_fullform(CExpr::app("Plus", {I(2), I(3)})) == "Plus[2, 3]");
    CHECK(print_fullform(CExpr::str("17.27")) == "\"17.27\"");
    CHECK(print_fullform(CExpr::real("-0.0010")) == "-0.0010");
    CHECK(print_fullform(CExpr::rational(mpq_class(3, 6))) == "Rational[1, 2]");
    CHECK(print_fullform(CExpr::rational(mpq_class(4, 2))) == "2");
    CExpr x = CExpr::app("LeanLocal", {CExpr::str("17.27"), CExpr::str("x"), CExpr::str("bi"),
                                       CExpr::app("LeanConst", {CExpr::str("real"), CExpr::list({})})});
    CHECK(print_fullform(x) == "LeanLocal[\"17.27\", \"x\", \"bi\", LeanConst[\"real\", {}]]");
    CExpr factored = CExpr::app("Power", {CExpr::app("Plus", {I(-1), x}), I(2)});
    CHECK(print_repr(factored) ==
          "app (sym \"Power\") [app (sym \"Plus\") [mint -1, app (sym \"LeanLocal\") [str \"17.27\", str \"x\", "
          "str \"bi\", app (sym \"LeanConst\") [str \"real\", []]]], mint 2]");
}

TEST_CASE("FullForm round trip on random expressions") {
    std::mt19937 rng(21);
    for (int i = 0; i < 2000; ++i) {
        CExpr e = testgen::random_cexpr(rng, 4);
        std::string text = print_fullform(e);
        CAPTURE(text);
        REQUIRE(parse_fullform(text) == e);
        REQUIRE(print_fullform(parse_fullform(text)) == text);
    }
}

TEST_CASE("structural order is a strict total order") {
    std::mt19937 rng(4);
    std::vector<CExpr> xs;
    for (int i = 0; i < 200; ++i) xs.push_back(testgen::random_cexpr(rng, 2));
    for (const auto& a : xs) {
        for (const auto& b : xs) {
            int ab = compare(a, b), ba = compare(b, a);
            REQUIRE(ab == -ba);
            REQUIRE((ab == 0) == (a == b));
        }
    }
    CHECK(compare(I(-3), S("a")) < 0);
    CHECK(compare(CExpr::rational(mpq_class(1, 2)), I(1)) < 0);
}

TEST_CASE("match examples") {
    auto p = parse_fullform("F[x_, y_]");
    auto b = match(p, parse_fullform("F[1, 2]"));
    REQUIRE(b);
    CHECK(b->at("x") == I(1));
    CHECK(b->at("y") == I(2));
    CHECK_FALSE(match(parse_fullform("F[x_, x_]"), parse_fullform("F[1, 2]")));
    CHECK(match(parse_fullform("F[x_, x_]"), parse_fullform("F[2, 2]")));
    CHECK_FALSE(match(parse_fullform("LeanApp[h_, a_]"), parse_fullform("Power[X, 2]")));
    CHECK(match(parse_fullform("LeanConst[\"add\", _]"), parse_fullform("LeanConst[\"add\", {0}]")));
    CHECK(match(parse_fullform("F[n_Integer]"), parse_fullform("F[3]")));
    CHECK_FALSE(match(parse_fullform("F[n_Integer]"), parse_fullform("F[x]")));
    CHECK(match(parse_fullform("F[n_List]"), parse_fullform("F[{1}]")));
}

TEST_CASE("match agrees with an exhaustive matcher") {
    std::mt19937 rng(8);
    int matched = 0;
    for (int i = 0; i < 600; ++i) {
        CExpr e = testgen::random_cexpr(rng, 3);
        CExpr p = punch_holes(rng, testgen::pick(rng, 0, 2) ? e : testgen::random_cexpr(rng, 3));
        auto got = match(p, e);
        REQUIRE(got.has_value() == brute_force_matches(p, e));
        if (got) {
            ++matched;
            REQUIRE(plug(p, *got) == e);
        }
    }
    CHECK(matched > 100);
}

TEST_CASE("linear patterns match their own instances") {
    std::mt19937 rng(9);
    for (int i = 0; i < 300; ++i) {
        CExpr body = testgen::random_cexpr(rng, 2);
        CExpr p = CExpr::app("G", {CExpr::app("Pattern", {S("u"), CExpr::app("Blank", {})}), body,
                                   CExpr::app("Pattern", {S("w"), CExpr::app("Blank", {})})});
        Bindings sigma{{"u", testgen::random_cexpr(rng, 2)}, {"w", testgen::random_cexpr(rng, 2)}};
        auto got = match(p, plug(p, sigma));
        REQUIRE(got);
        REQUIRE(got->at("u") == sigma.at("u"));
        REQUIRE(got->at("w") == sigma.at("w"));
    }
}

TEST_CASE("substitute replaces named symbols") {
    CExpr e = parse_fullform("Plus[x, Times[2, x], y]");
    CHECK(substitute(e, {{"x", I(5)}}) == parse_fullform("Plus[5, Times[2, 5], y]"));
}
