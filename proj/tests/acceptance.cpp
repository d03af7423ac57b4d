// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "casbridge/bridge/bridge.hpp"
#include "casbridge/cli/cli.hpp"
#include "casbridge/engine/algebra.hpp"
#include "casbridge/engine/eval.hpp"
#include "casbridge/interpret/interpret.hpp"
#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/numeral.hpp"
#include "casbridge/kexpr/surface.hpp"
#include "casbridge/reflect/reflect.hpp"
#include "casbridge/verify/verify.hpp"
#include "generators.hpp"

using namespace casbridge;
using cexpr::CExpr;
using cexpr::parse_fullform;
using cexpr::print_fullform;
using kexpr::KExpr;
using poly::Poly;
using poly::Rational;

namespace {

using Clock = std::chrono::steady_clock;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CExpr builtin(const CExpr& e) { return engine::eval(e); }

struct Session {
    kexpr::Environment env;
    kexpr::LocalContext ctx;
    verify::TrustLedger ledger;

    explicit Session(const std::string& decls) { kexpr::declare_context(decls, env, ctx); }
    KExpr k(const std::string& text) { return kexpr::parse_kexpr(text, env, &ctx); }
    KExpr prop(const std::string& text) { return kexpr::parse_kexpr(text, env, &ctx, KExpr::prop()); }
    std::string show(const KExpr& e) { return kexpr::print_kexpr(e, env); }
};

void declare_bessel(Session& s) {
    s.env.sig.declare(kexpr::Name{"BesselJ"},
                      KExpr::pi(kexpr::Name{"a"}, kexpr::BinderInfo::Default, s.k("real"),
                                KExpr::pi(kexpr::Name{"b"}, kexpr::BinderInfo::Default, s.k("real"), s.k("real"))));
}

// 1: the running factor example, through the library and through the CLI
std::string running_example() {
    auto t0 = Clock::now();
    Session s("x : real");
    auto r = verify::factor_check(s.k("x^2-2*x+1"), s.env, builtin, &s.ledger);
    expect(s.show(r.factored) == "(x + -1)^2", "factored as " + s.show(r.factored));
    expect(std::holds_alternative<verify::RingEq>(r.cert), "certificate is not a ring equality");
    expect(s.ledger.verified_count() == 1 && s.ledger.trusted_count() == 0, "ledger not verified-only");
    std::istringstream in;
    std::ostringstream out, err;
    int code = cli::run({"--format", "kv", "--context", "x:real", "factor", "x^2-2*x+1"}, in, out, err);
    expect(code == cli::kOk, "cli exit " + std::to_string(code));
    expect(out.str().find("result=(x + -1)^2\n") != std::string::npos, "cli printed " + out.str());
    expect(out.str().find("status=verified\n") != std::string::npos, "cli status not verified");
    double dt = seconds_since(t0);
    expect(dt < 1.0, "took " + std::to_string(dt) + " s");
    return "(x + -1)^2, ring equality verified, " + std::to_string(dt) + " s";
}

// 2: x^10 - y^10 splits into four factors that multiply back to the input
std::string tenth_powers() {
    auto t0 = Clock::now();
    Session s("x y : real");
    KExpr e = s.k("x^10 - y^10");
    auto r = verify::factor_check(e, s.env, builtin, &s.ledger);
    expect(std::holds_alternative<verify::RingEq>(r.cert), "not verified");
    Poly input = verify::PolyReader(s.env).read(e);
    expect(verify::PolyReader(s.env).read(r.factored) == input, "expansion differs");
    auto fs = engine::factor(input);
    int nonconstant = 0;
    Poly product(1);
    for (const auto& [f, m] : fs) {
        if (!f.is_constant()) {
            ++nonconstant;
            expect(m == 1, "repeated factor");
        }
        product *= f.pow(m);
    }
    expect(nonconstant == 4, std::to_string(nonconstant) + " factors");
    expect(product == input, "factor product differs");
    std::vector<Poly> want{engine::to_poly(parse_fullform("Plus[x, Times[-1, y]]")),
                           engine::to_poly(parse_fullform("Plus[x, y]")),
                           engine::to_poly(parse_fullform("Plus[Power[x, 4], Times[-1, Power[x, 3], y], Times[Power[x, "
                                                          "2], Power[y, 2]], Times[-1, x, Power[y, 3]], Power[y, 4]]")),
                           engine::to_poly(parse_fullform("Plus[Power[x, 4], Times[Power[x, 3], y], Times[Power[x, 2], "
                                                          "Power[y, 2]], Times[x, Power[y, 3]], Power[y, 4]]"))};
    for (const auto& w : want) {
        bool found = false;
        for (const auto& [f, m] : fs) found = found || f == w || f == w * Poly(-1);
        expect(found, "missing factor " + print_fullform(engine::from_poly(w)));
    }
    double dt = seconds_since(t0);
    expect(dt < 2.0, "took " + std::to_string(dt) + " s");
    return "4 factors, product equals input, " + std::to_string(dt) + " s";
}

// 3: the encoding of x + x, token for token, and its inverse
std::string encoding_of_sum() {
    KExpr real = KExpr::constant("real");
    KExpr x = KExpr::local(kexpr::Name("17.27"), "x", kexpr::BinderInfo::Default, real);
    KExpr e = KExpr::app(KExpr::constant("add", {kexpr::Level::zero()}), {real, KExpr::constant("real.has_add"), x, x});
    const std::string X = "LeanLocal[\"17.27\", \"x\", \"bi\", LeanConst[\"real\", {}]]";
    const std::string want = "LeanApp[LeanApp[LeanApp[LeanApp[LeanConst[\"add\", {0}], LeanConst[\"real\", {}]], "
                             "LeanConst[\"real.has_add\", {}]], " + X + "], " + X + "]";
    CExpr enc = reflect::encode_kernel_expr(e);
    std::string got = print_fullform(enc);
    expect(got == want, "encoded as " + got);
    expect(parse_fullform(want) == enc, "parsed text differs from the encoding");
    KExpr back = interpret::expr_of_mmexpr({}, enc);
    expect(back == e, "expr_of_mmexpr did not invert the encoding");
    expect(print_fullform(reflect::encode_kernel_expr(back)) == want, "re-encoding differs");
    return "encoding matches token for token and inverts";
}

// 4: the linear arithmetic certificate and its perturbations
std::string farkas_certificate() {
    auto t0 = Clock::now();
    Session s("x y : real");
    std::vector<KExpr> hyps{s.prop("2*x + 4*y <= 4"), s.prop("-x <= 1"), s.prop("-y <= -5")};
    std::vector<poly::LinConstraint> lin{
        {engine::to_poly(parse_fullform("Plus[Times[2, x], Times[4, y], -4]")), poly::Relation::Le0},
        {engine::to_poly(parse_fullform("Plus[Times[-1, x], -1]")), poly::Relation::Le0},
        {engine::to_poly(parse_fullform("Plus[Times[-1, y], 5]")), poly::Relation::Le0}};
    auto found = engine::farkas_coefficients(lin);
    expect(found.has_value(), "no certificate found");
    verify::check_farkas(hyps, *found, s.env, &s.ledger);
    std::vector<Rational> fixed{poly::ratio(1, 2), 1, 2};
    auto w = std::get<verify::FarkasWitness>(verify::check_farkas(hyps, fixed, s.env, &s.ledger));
    expect(w.constant == 7, "weighted sum is " + w.constant.get_str());
    int rejected = 0, tried = 0;
    for (std::size_t r = 0; r < fixed.size(); ++r) {
        for (const Rational& delta : {Rational(-1), poly::ratio(-1, 2), poly::ratio(1, 3), Rational(1), Rational(-5)}) {
            auto bad = fixed;
            bad[r] += delta;
            ++tried;
            try {
                verify::check_farkas(hyps, bad, s.env);
            } catch (const verify::BadCertificate&) {
                ++rejected;
            }
        }
    }
    expect(rejected == tried, std::to_string(tried - rejected) + " perturbations accepted");
    double dt = seconds_since(t0);
    expect(dt < 1.0, "took " + std::to_string(dt) + " s");
    return "found and fixed certificates verify (sum 7), " + std::to_string(tried) + " perturbations rejected";
}

// 5: numerals survive encoding, and machine integers come back as numerals
std::string numeral_law() {
    for (long n = 0; n <= 10000; ++n)
        expect(kexpr::decode_numeral(kexpr::encode_numeral(n)) == n, "decode(encode " + std::to_string(n) + ")");
    kexpr::Environment env;
    KExpr nat = KExpr::constant("nat");
    for (long n = 0; n <= 1000; ++n) {
        KExpr e = interpret::back_translate(CExpr::integer(n), env, nat);
        expect(e == kexpr::encode_numeral(n, "nat", env.instances), "integer " + std::to_string(n));
    }
    return "0..10000 decode-encode, 0..1000 back-translated";
}

// 6: random terms survive encoding; random polynomials survive the whole pipeline
std::string round_trips() {
    std::mt19937 rng(606);
    KExpr x = KExpr::local(kexpr::Name("17.27"), "x", kexpr::BinderInfo::Default, KExpr::constant("real"));
    for (int i = 0; i < 1000; ++i) {
        KExpr k = testgen::random_kexpr(rng, 5, 0, {x});
        expect(interpret::expr_of_mmexpr({}, reflect::encode_kernel_expr(k)) == k, "term round trip " + std::to_string(i));
    }
    Session s("x y : real");
    int done = 0;
    while (done < 500) {
        std::string text = testgen::random_poly_text(rng, {"x", "y"});
        KExpr e;
        try {
            e = s.k(text);
        } catch (const std::exception&) {
            continue;  // bare constants have no carrier
        }
        CExpr activated = reflect::activate(reflect::lean_form(reflect::encode_kernel_expr(e)), builtin);
        KExpr back = interpret::back_translate(activated, s.env, kexpr::infer_type(e, s.env));
        try {
            verify::check_ring_eq(e, back, s.env);
        } catch (const std::exception& ex) {
            throw Failure(text + ": " + ex.what());
        }
        ++done;
    }
    return "1000 terms, 500 polynomials ring-equal after the pipeline";
}

bool certificate_ok(const std::vector<poly::LinConstraint>& hyps, const std::vector<Rational>& c) {
    Poly sum;
    bool strict_weight = false;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        if (hyps[i].rel != poly::Relation::Eq0 && c[i] < 0) return false;
        if (hyps[i].rel == poly::Relation::Lt0 && c[i] > 0) strict_weight = true;
        sum += hyps[i].poly * Poly(c[i]);
    }
    if (!sum.is_constant()) return false;
    return sum.constant_term() > 0 || (sum.constant_term() == 0 && strict_weight);
}

std::vector<poly::LinConstraint> random_linear_system(std::mt19937& rng, const std::vector<std::string>& vars) {
    std::vector<poly::LinConstraint> out;
    for (int k = testgen::pick(rng, 1, 4); k > 0; --k) {
        Poly p(testgen::pick(rng, -5, 5));
        for (const auto& v : vars) p += Poly::variable(v) * Poly(testgen::pick(rng, -3, 3));
        int r = testgen::pick(rng, 0, 9);
        out.emplace_back(p, r < 6 ? poly::Relation::Le0 : r < 9 ? poly::Relation::Lt0 : poly::Relation::Eq0);
    }
    return out;
}

// 7: the engine's own algorithms against independent oracles
std::string engine_oracles() {
    std::mt19937 rng(707);
    for (int i = 0; i < 1000; ++i) {
        Poly p = testgen::random_poly(rng, {"x", "y"}, 4, 3, 10);
        if (testgen::pick(rng, 0, 1)) p *= testgen::random_poly(rng, {"x", "y"}, 3, 3, 10);
        if (p.is_zero()) continue;
        Poly product(1);
        for (const auto& [f, m] : engine::factor(p)) product *= f.pow(m);
        expect(product == p, "factor product differs at case " + std::to_string(i));
    }
    std::vector<Rational> grid;
    for (int d = 1; d <= 8; ++d)
        for (int n = -2 * d; n <= 2 * d; ++n) grid.push_back(poly::ratio(n, d));
    for (int i = 0; i < 200; ++i) {
        auto sys = random_linear_system(rng, {"x", "y"});
        bool grid_hit = false;
        for (std::size_t a = 0; a < grid.size() && !grid_hit; ++a)
            for (std::size_t b = 0; b < grid.size() && !grid_hit; ++b) {
                poly::Assignment pt{{"x", grid[a]}, {"y", grid[b]}};
                grid_hit = std::all_of(sys.begin(), sys.end(), [&](const auto& c) { return c.satisfied_by(pt); });
            }
        auto inst = engine::find_instance(sys, {"x", "y"});
        expect(!grid_hit || inst.has_value(), "find_instance missed a grid point at case " + std::to_string(i));
        if (inst)
            for (const auto& c : sys) expect(c.satisfied_by(*inst), "find_instance returned a non-solution");
    }
    for (int i = 0; i < 200; ++i) {
        std::vector<std::string> vars{"x", "y", "z"};
        vars.resize(testgen::pick(rng, 2, 3));
        auto sys = random_linear_system(rng, vars);
        auto inst = engine::find_instance(sys, vars);
        auto cert = engine::farkas_coefficients(sys);
        expect(inst.has_value() != cert.has_value(), "Farkas alternative broken at case " + std::to_string(i));
        if (cert) expect(certificate_ok(sys, *cert), "bad certificate at case " + std::to_string(i));
    }
    return "factor 1000, find_instance 200, Farkas alternative 200";
}

bridge::ServerConfig config(const std::string& address) {
    bridge::ServerConfig c;
    c.address = address;
    return c;
}

// 8: the server keeps scoped requests apart, keeps global ones, and moves bytes exactly
std::string server_behaviour() {
    std::mt19937 rng(808);
    bridge::Server shared(config("/tmp/unused.sock"));
    for (int i = 0; i < 200; ++i) {
        for (int k = testgen::pick(rng, 1, 6); k > 0; --k) {
            std::string f = "H" + std::to_string(testgen::pick(rng, 0, 2));
            std::string v = std::to_string(testgen::pick(rng, -5, 5));
            std::string q;
            switch (testgen::pick(rng, 0, 3)) {
                case 0: q = f + "[x_] := Plus[x, " + v + "]"; break;
                case 1: q = f + " = " + v; break;
                case 2: q = f + "[" + v + "]"; break;
                default: q = "Plus[" + f + ", " + v + "]"; break;
            }
            bridge::Server fresh(config("/tmp/unused.sock"));
            auto a = shared.handle({1, bridge::Op::EvalScoped, q});
            auto b = fresh.handle({1, bridge::Op::EvalScoped, q});
            expect(a.ok == b.ok && a.payload == b.payload, "scoped leak on " + q);
        }
    }
    expect(shared.global_context().definition_count() == 0, "scoped definitions reached the global context");

    std::string address = (std::filesystem::temp_directory_path() /
                           ("cbaccept-" + std::to_string(::getpid()) + ".sock")).string();
    bridge::Server server(config(address));
    server.bind();
    std::thread t([&] { server.serve(); });
    std::string problem;
    try {
        {
            bridge::Client c(address);
            c.execute_global("K = 11");
        }
        bridge::Client c(address);
        if (print_fullform(c.execute("Plus[K, 1]")) != "12") problem = "global definition lost between connections";
        for (int i = 0; i < 1000 && problem.empty(); ++i) {
            std::string text = print_fullform(testgen::random_cexpr(rng, 4));
            auto resp = c.request(bridge::Op::EvalScoped, "Hold[" + text + "]");
            if (!resp.ok || resp.payload != "Hold[" + text + "]") problem = "wire changed " + text;
        }
        c.shutdown();
    } catch (const std::exception& e) {
        problem = e.what();
        try {
            bridge::Client(address).shutdown();
        } catch (...) {
        }
    }
    t.join();
    expect(problem.empty(), problem);
    return "200 isolation sequences, global persistence, 1000 exact echoes";
}

// 9: trusted results are counted and the approximation renders as a bound
std::string trust_accounting() {
    Session s("x : real");
    declare_bessel(s);
    verify::check_ring_eq(s.k("x^2 - 2*x + 1"), s.k("(x + -1)^2"), s.env, &s.ledger);
    verify::declare_trusted(s.prop("forall x : real, x*BesselJ 2 x + x*BesselJ 0 x = 2*BesselJ 1 x"), "FullSimplify",
                            s.env, s.ledger);
    expect(s.ledger.trusted_count() == 1, "trusted count " + std::to_string(s.ledger.trusted_count()));
    expect(s.ledger.verified_count() == 1, "verified count " + std::to_string(s.ledger.verified_count()));
    Session b("x : real");
    declare_bessel(b);
    auto numeric = [](const KExpr&) {
        return std::optional<Rational>(poly::parse_rational("3.30447801564440548771718205845"));
    };
    auto bound = verify::approx_bounds(b.k("100 * BesselJ 2 (13 / 25)"), poly::ratio(1, 1000), b.env, b.ledger, numeric);
    std::string text = verify::claim_text(bound, b.env);
    expect(text == "75977 / 23000 < 100 * BesselJ 2 (13 / 25) < 76023 / 23000", "rendered " + text);
    expect(b.ledger.trusted_count() == 1, "bound not recorded as trusted");
    return "trusted count 1, bound " + text;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria{
        {"factor running example", running_example},
        {"factor x^10 - y^10", tenth_powers},
        {"encoding of x + x", encoding_of_sum},
        {"linear arithmetic certificate", farkas_certificate},
        {"numeral law", numeral_law},
        {"round trips", round_trips},
        {"engine against oracles", engine_oracles},
        {"server isolation and wire", server_behaviour},
        {"trust accounting", trust_accounting},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string line;
        bool ok = false;
        try {
            line = criteria[i].second();
            ok = true;
        } catch (const std::exception& e) {
            line = e.what();
        }
        if (!ok) ++failed;
        std::cout << "criterion " << i + 1 << " " << (ok ? "PASS" : "FAIL") << "  " << criteria[i].first << ": " << line
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
