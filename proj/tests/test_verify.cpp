#include <fstream>
#include <random>
#include <thread>

#include "casbridge/engine/algebra.hpp"
#include "casbridge/engine/eval.hpp"
#include "casbridge/kexpr/signature.hpp"
#include "casbridge/kexpr/surface.hpp"
#include "casbridge/verify/verify.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace casbridge;
using kexpr::KExpr;
using poly::Rational;
using verify::Certificate;

namespace {

struct Session {
    kexpr::Environment env;
    kexpr::LocalContext ctx;
    verify::TrustLedger ledger;

    explicit Session(const std::string& decls = "x y z : real") { kexpr::declare_context(decls, env, ctx); }

    KExpr k(const std::string& text) { return kexpr::parse_kexpr(text, env, &ctx); }
    KExpr prop(const std::string& text) { return kexpr::parse_kexpr(text, env, &ctx, KExpr::prop()); }
    std::vector<KExpr> props(const std::vector<std::string>& texts) {
        std::vector<KExpr> out;
        for (const auto& t : texts) out.push_back(prop(t));
        return out;
    }
    std::string show(const KExpr& e) { return kexpr::print_kexpr(e, env); }
};

cexpr::CExpr builtin_oracle(const cexpr::CExpr& e) { return engine::eval(e); }

std::optional<poly::Assignment> builtin_search(const std::vector<poly::LinConstraint>& cs,
                                               const std::vector<std::string>& vars) {
    return engine::find_instance(cs, vars);
}

std::vector<Rational> Q(std::initializer_list<Rational> xs) { return xs; }

}  // namespace

TEST_CASE("check_ring_eq") {
    Session s;
    auto c = verify::check_ring_eq(s.k("x^2 - 2*x + 1"), s.k("(x + -1)^2"), s.env, &s.ledger);
    CHECK(std::holds_alternative<verify::RingEq>(c));
    CHECK(s.ledger.verified_count() == 1);
    CHECK(s.ledger.snapshot()[0].claim == "x^2 - 2 * x + 1 = (x + -1)^2");
    CHECK_NOTHROW(verify::check_ring_eq(s.k("x*y + 3"), s.k("x*y + 3"), s.env));
    CHECK_THROWS_AS(verify::check_ring_eq(s.k("x"), s.k("x + 1"), s.env, &s.ledger), verify::UnableToSimplify);
    CHECK(s.ledger.size() == 1);
    CHECK_NOTHROW(verify::check_ring_eq(s.k("x / 2 + x / 2"), s.k("x"), s.env));
    CHECK_THROWS_AS(verify::check_ring_eq(s.k("x / y"), s.k("x / y"), s.env), verify::OutOfFragment);
}

TEST_CASE("natural subtraction is not read as a ring operation") {
    Session s("n : nat");
    CHECK_THROWS_AS(verify::check_ring_eq(s.k("n - n + 1"), s.k("(1 : nat)"), s.env), verify::OutOfFragment);
    CHECK_NOTHROW(verify::check_ring_eq(s.k("(n + 1)^2"), s.k("n^2 + 2*n + 1"), s.env));
}

TEST_CASE("factor_check on the running example") {
    Session s("x : real");
    auto r = verify::factor_check(s.k("x^2 - 2*x + 1"), s.env, builtin_oracle, &s.ledger);
    CHECK(s.show(r.factored) == "(x + -1)^2");
    CHECK(s.ledger.verified_count() == 1);
    auto five = verify::factor_check(s.k("(5 : real)"), s.env, builtin_oracle);
    CHECK(s.show(five.factored) == "(5 : real)");
    CHECK_THROWS_AS(verify::factor_check(s.k("x / x"), s.env, builtin_oracle), verify::OutOfFragment);
}

TEST_CASE("factor_check on x^10 - y^10") {
    Session s("x y : real");
    auto r = verify::factor_check(s.k("x^10 - y^10"), s.env, builtin_oracle, &s.ledger);
    CHECK(s.show(r.factored) ==
          "(x + -1 * y) * (x + y) * (x^4 + -1 * x^3 * y + x^2 * y^2 + -1 * x * y^3 + y^4) * "
          "(x^4 + x^3 * y + x^2 * y^2 + x * y^3 + y^4)");
    CHECK(s.ledger.verified_count() == 1);
}

TEST_CASE("factor_check rejects a lying oracle") {
    Session s("x : real");
    auto liar = [](const cexpr::CExpr& e) {
        auto out = engine::eval(e);
        return engine::eval(cexpr::CExpr::app("Plus", {out, cexpr::CExpr::integer(1)}));
    };
    CHECK_THROWS_AS(verify::factor_check(s.k("x^2 - 1"), s.env, liar, &s.ledger), verify::CertificationFailed);
    CHECK(s.ledger.size() == 0);
}

TEST_CASE("check_farkas") {
    Session s;
    auto hyps = s.props({"2*x + 4*y <= 4", "-x <= 1", "-y <= -5"});
    auto c = verify::check_farkas(hyps, Q({poly::ratio(1, 2), 1, 2}), s.env, &s.ledger);
    CHECK(std::get<verify::FarkasWitness>(c).constant == 7);
    CHECK_THROWS_AS(verify::check_farkas(hyps, Q({0, 0, 0}), s.env), verify::BadCertificate);
    try {
        verify::check_farkas(s.props({"x <= 0", "-x + 1 <= 0"}), Q({-1, 1}), s.env);
        FAIL("accepted a negative weight");
    } catch (const verify::BadCertificate& b) {
        CHECK(b.row == 0);
    }
    CHECK_NOTHROW(verify::check_farkas(s.props({"x < 0", "-x <= 0"}), Q({1, 1}), s.env));
    CHECK_THROWS_AS(verify::check_farkas(s.props({"x <= 0", "-x <= 0"}), Q({1, 1}), s.env), verify::BadCertificate);
    CHECK_THROWS_AS(verify::check_farkas(hyps, Q({1, 2}), s.env), verify::BadCertificate);
    CHECK_THROWS_AS(verify::check_farkas(s.props({"x*x <= -1"}), Q({1}), s.env), verify::OutOfFragment);
    // equalities take weights of either sign
    CHECK_NOTHROW(verify::check_farkas(s.props({"x = 1", "x <= 0"}), Q({-1, 1}), s.env));
    CHECK(s.ledger.verified_count() == 1);
}

TEST_CASE("check_farkas accepts engine certificates and rejects mutations") {
    Session s;
    std::mt19937 rng(12);
    int infeasible = 0;
    for (int i = 0; i < 2000 && infeasible < 200; ++i) {
        std::vector<std::string> texts;
        std::vector<poly::LinConstraint> lin;
        for (int k = testgen::pick(rng, 2, 4); k > 0; --k) {
            int a = testgen::pick(rng, -3, 3), b = testgen::pick(rng, -3, 3), c = testgen::pick(rng, -4, 4);
            bool strict = testgen::pick(rng, 0, 3) == 0;
            texts.push_back(std::to_string(a) + "*x + " + std::to_string(b) + "*y + " + std::to_string(c) +
                            (strict ? " < 0" : " <= 0"));
            poly::Poly p = poly::Poly::variable("x") * poly::Poly(a) + poly::Poly::variable("y") * poly::Poly(b) +
                           poly::Poly(c);
            lin.emplace_back(p, strict ? poly::Relation::Lt0 : poly::Relation::Le0);
        }
        auto cert = engine::farkas_coefficients(lin);
        if (!cert) continue;
        ++infeasible;
        auto hyps = s.props(texts);
        REQUIRE_NOTHROW(verify::check_farkas(hyps, *cert, s.env));
        for (std::size_t r = 0; r < cert->size(); ++r) {
            auto bad = *cert;
            bad[r] = -1;
            CHECK_THROWS_AS(verify::check_farkas(hyps, bad, s.env), verify::BadCertificate);
            if (lin[r].poly.is_constant()) continue;
            bad = *cert;
            bad[r] += 1;
            CHECK_THROWS_AS(verify::check_farkas(hyps, bad, s.env), verify::BadCertificate);
        }
    }
    CHECK(infeasible == 200);
}

TEST_CASE("check_solution") {
    Session s;
    CHECK_NOTHROW(verify::check_solution(s.props({"x^2 - 1 = 0"}), {{"x", 1}}, s.env));
    try {
        verify::check_solution(s.props({"x - 1 = 0"}), {{"x", 2}}, s.env);
        FAIL("accepted a wrong solution");
    } catch (const verify::ResidueNonZero& r) {
        CHECK(r.index == 0);
        CHECK(r.residue == 1);
    }
    auto sys = s.props({"99/20*y^2 - x^2*y + x*y = 0", "2*y^3 - 2*x^2*y^2 - 2*x^3 + 6381/4 = 0"});
    CHECK_NOTHROW(verify::check_solution(sys, {{"x", poly::ratio(11, 2)}, {"y", 5}}, s.env, &s.ledger));
    CHECK(s.ledger.verified_count() == 1);
    CHECK_THROWS_AS(verify::check_solution(sys, {{"x", 1}}, s.env), std::invalid_argument);
}

TEST_CASE("sanity_check") {
    Session s;
    CHECK_FALSE(verify::sanity_check(s.props({"x <= 0"}), s.prop("x <= 1"), s.env, builtin_search, &s.ledger));
    CHECK(s.ledger.size() == 0);
    auto c = verify::sanity_check({}, s.prop("x = 0"), s.env, builtin_search, &s.ledger);
    REQUIRE(c);
    CHECK(std::get<verify::Counterexample>(*c).assignment == poly::Assignment{{"x", 1}});
    CHECK(s.ledger.verified_count() == 1);
    auto hyps = s.props({"2*x + 4*y <= 4", "-x <= 1"});
    auto d = verify::sanity_check(hyps, s.prop("false"), s.env, builtin_search);
    REQUIRE(d);
    auto a = std::get<verify::Counterexample>(*d).assignment;
    CHECK(2 * a["x"] + 4 * a["y"] <= 4);
    CHECK(-a["x"] <= 1);
    CHECK_FALSE(verify::sanity_check(s.props({"2*x + 4*y <= 4", "-x <= 1", "-y <= -5"}), s.prop("false"), s.env,
                                     builtin_search));
}

TEST_CASE("sanity_check falls back to a grid for nonlinear systems") {
    Session s;
    auto c = verify::sanity_check(s.props({"x*x <= 2", "1 <= x*x"}), s.prop("false"), s.env, builtin_search);
    REQUIRE(c);
    CHECK(std::get<verify::Counterexample>(*c).assignment == poly::Assignment{{"x", 1}});
    auto d = verify::sanity_check(s.props({"x*y = 1"}), s.prop("x <= 3"), s.env, builtin_search);
    REQUIRE(d);
    auto a = std::get<verify::Counterexample>(*d).assignment;
    CHECK(a["x"] * a["y"] == 1);
    CHECK(a["x"] > 3);
    verify::SanityOptions small{2, 1, 1000};
    CHECK_FALSE(verify::sanity_check(s.props({"x*x = 2"}), s.prop("false"), s.env, builtin_search, nullptr, small));
}

TEST_CASE("a search that lies is caught") {
    Session s;
    auto liar = [](const std::vector<poly::LinConstraint>&, const std::vector<std::string>& vars) {
        poly::Assignment a;
        for (const auto& v : vars) a[v] = 100;
        return std::optional<poly::Assignment>(a);
    };
    CHECK_THROWS_AS(verify::sanity_check(s.props({"x <= 0"}), s.prop("x <= 1"), s.env, liar),
                    verify::CertificationFailed);
}

TEST_CASE("declare_trusted") {
    Session s;
    s.env.sig.declare(kexpr::Name{"BesselJ"},
                      kexpr::KExpr::pi(kexpr::Name{"a"}, kexpr::BinderInfo::Default, s.k("real"),
                                       kexpr::KExpr::pi(kexpr::Name{"b"}, kexpr::BinderInfo::Default, s.k("real"),
                                                        s.k("real"))));
    auto claim = s.prop("forall x : real, x*BesselJ 2 x + x*BesselJ 0 x = 2*BesselJ 1 x");
    verify::declare_trusted(claim, "FullSimplify", s.env, s.ledger);
    CHECK(s.ledger.trusted_count() == 1);
    CHECK(s.ledger.verified_count() == 0);
    auto e = s.ledger.snapshot()[0];
    CHECK_FALSE(e.flagged);
    CHECK(e.claim.find("BesselJ 2 x") != std::string::npos);
    verify::declare_trusted(s.prop("false"), "user", s.env, s.ledger);
    CHECK(s.ledger.snapshot()[1].flagged);
    CHECK(verify::TrustLedger::log_line(s.ledger.snapshot()[1]).rfind("trusted!\tfalse\tuser\t", 0) == 0);
    CHECK_THROWS_AS(verify::declare_trusted(s.k("(3 : real)"), "user", s.env, s.ledger), verify::NotAProposition);
    CHECK(s.ledger.trusted_count() == 2);
}

TEST_CASE("simplest_between") {
    CHECK(verify::simplest_between(poly::ratio(3303478015644405, 1000000000000000),
                                   poly::ratio(3305478015644405, 1000000000000000)) == poly::ratio(76, 23));
    CHECK(verify::simplest_between(poly::ratio(-1, 2), 3) == 0);
    CHECK(verify::simplest_between(-3, poly::ratio(-5, 2)) == poly::ratio(-8, 3));
    CHECK(verify::simplest_between(1, 2) == poly::ratio(3, 2));
    std::mt19937 rng(3);
    for (int i = 0; i < 300; ++i) {
        Rational lo = poly::ratio(testgen::pick(rng, -200, 200), testgen::pick(rng, 1, 30));
        Rational hi = lo + poly::ratio(testgen::pick(rng, 1, 50), testgen::pick(rng, 1, 200));
        Rational q = verify::simplest_between(lo, hi);
        CHECK(lo < q);
        CHECK(q < hi);
        // nothing with a smaller denominator fits
        for (long d = 1; d < q.get_den().get_si(); ++d) {
            mpz_class n;
            Rational scaled = lo * d;
            mpz_fdiv_q(n.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
            CHECK_FALSE(poly::ratio(n + 1, d) < hi);
        }
    }
}

TEST_CASE("approx_bounds") {
    Session s;
    auto c = verify::approx_bounds(s.k("(1 / 3 : real)"), poly::ratio(1, 100), s.env, s.ledger);
    auto b = std::get<verify::ApproxBound>(c);
    CHECK(b.lower < poly::ratio(1, 3));
    CHECK(poly::ratio(1, 3) < b.upper);
    CHECK(b.upper - b.lower <= poly::ratio(2, 100));
    CHECK(s.ledger.verified_count() == 1);
    auto z = std::get<verify::ApproxBound>(verify::approx_bounds(s.k("(3 / 4 : real)"), 0, s.env, s.ledger));
    CHECK(z.lower == poly::ratio(3, 4));
    CHECK(z.upper == poly::ratio(3, 4));

    s.env.sig.declare(kexpr::Name{"BesselJ"},
                      kexpr::KExpr::pi(kexpr::Name{"a"}, kexpr::BinderInfo::Default, s.k("real"),
                                       kexpr::KExpr::pi(kexpr::Name{"b"}, kexpr::BinderInfo::Default, s.k("real"),
                                                        s.k("real"))));
    auto numeric = [](const KExpr&) {
        return std::optional<Rational>(poly::parse_rational("3.30447801564440548771718205845"));
    };
    auto t = verify::approx_bounds(s.k("100 * BesselJ 2 (13 / 25)"), poly::ratio(1, 1000), s.env, s.ledger, numeric);
    CHECK(verify::claim_text(t, s.env) == "75977 / 23000 < 100 * BesselJ 2 (13 / 25) < 76023 / 23000");
    CHECK(s.ledger.trusted_count() == 1);
    CHECK_THROWS_AS(verify::approx_bounds(s.k("BesselJ 2 1"), 0, s.env, s.ledger, numeric), std::invalid_argument);
}

TEST_CASE("ring_eq agrees with expansion on random factorizations") {
    Session s("x y : real");
    std::mt19937 rng(8);
    for (int i = 0; i < 500; ++i) {
        std::string text = testgen::random_poly_text(rng, {"x", "y"});
        KExpr e;
        try {
            e = s.k(text);
        } catch (const std::exception&) {
            continue;  // bare constants have no carrier
        }
        auto r = verify::factor_check(e, s.env, builtin_oracle);
        poly::Poly expanded = verify::PolyReader(s.env).read(r.factored);
        CHECK(expanded == verify::PolyReader(s.env).read(e));
        KExpr bumped = s.k("(" + s.show(r.factored) + ") + 1");
        CHECK_THROWS_AS(verify::check_ring_eq(e, bumped, s.env), verify::UnableToSimplify);
    }
}

TEST_CASE("ledger is append-only and thread safe") {
    Session s;
    std::string path = "ledger_test.log";
    std::remove(path.c_str());
    s.ledger.open_log(path);
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
        ts.emplace_back([&] {
            for (int i = 0; i < 25; ++i) verify::declare_trusted(s.prop("x <= x"), "t", s.env, s.ledger);
        });
    for (auto& t : ts) t.join();
    CHECK(s.ledger.trusted_count() == 100);
    std::ifstream in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        CHECK(line.rfind("trusted\tx <= x\tt\t", 0) == 0);
        CHECK(line.back() == 'Z');
    }
    CHECK(n == 100);
}
