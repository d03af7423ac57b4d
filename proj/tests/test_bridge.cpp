#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "casbridge/bridge/bridge.hpp"
#include "casbridge/kexpr/surface.hpp"
#include "casbridge/verify/verify.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace casbridge;
using bridge::Client;
using bridge::Op;
using cexpr::parse_fullform;
using cexpr::print_fullform;

namespace {

std::string temp_socket(const std::string& tag) {
    return (std::filesystem::temp_directory_path() / ("cbtest-" + tag + "-" + std::to_string(::getpid()) + ".sock"))
        .string();
}

// Server on a background thread, shut down by the destructor.
struct Running {
    std::string address;
    bridge::Server server;
    std::thread thread;

    explicit Running(const std::string& tag, bridge::ServerConfig cfg = {})
        : address(temp_socket(tag)), server([&] {
              cfg.address = address;
              return cfg;
          }()) {
        server.bind();
        thread = std::thread([this] { server.serve(); });
    }
    ~Running() {
        if (!server.stopping()) {
            try {
                Client(address).shutdown();
            } catch (...) {
            }
        }
        thread.join();
    }
};

}  // namespace

TEST_CASE("frames and message bodies") {
    auto f = bridge::encode_frame("1 ping ");
    CHECK(f.size() == 11);
    CHECK(f.substr(0, 4) == std::string("\0\0\0\7", 4));
    auto r = bridge::parse_request("42 eval_scoped Plus[2, 3]");
    CHECK(r.id == 42);
    CHECK(r.op == Op::EvalScoped);
    CHECK(r.payload == "Plus[2, 3]");
    CHECK(bridge::parse_request("7 ping").payload.empty());
    CHECK_THROWS_AS(bridge::parse_request("x ping "), bridge::ProtocolError);
    CHECK_THROWS_AS(bridge::parse_request("1 dance "), bridge::ProtocolError);
    auto resp = bridge::parse_response("3 error no good");
    CHECK_FALSE(resp.ok);
    CHECK(resp.payload == "no good");
    CHECK(bridge::format_response({3, true, "5"}) == "3 ok 5");
}

TEST_CASE("addresses") {
    auto u = bridge::parse_address("/tmp/x.sock");
    CHECK(u.unix_socket);
    auto t = bridge::parse_address("localhost:7000");
    CHECK_FALSE(t.unix_socket);
    CHECK(t.host == "localhost");
    CHECK(t.port == 7000);
    CHECK_THROWS(bridge::parse_address("nowhere"));
    CHECK(bridge::resolve_address("a:1") == "a:1");
    ::setenv("BRIDGE_ADDR", "/tmp/from-env.sock", 1);
    CHECK(bridge::resolve_address() == "/tmp/from-env.sock");
    ::unsetenv("BRIDGE_ADDR");
}

TEST_CASE("postfix commands") {
    CHECK(print_fullform(bridge::parse_command("x // LeanConvert // Activate // Factor")) ==
          "Factor[Activate[LeanConvert[x]]]");
    CHECK(print_fullform(bridge::parse_command("f[\"a // b\"]")) == "f[\"a // b\"]");
}

TEST_CASE("server handles requests without transport") {
    bridge::Server s({"/tmp/unused.sock"});
    CHECK(s.handle({1, Op::EvalScoped, "Plus[2, 3]"}).payload == "5");
    CHECK(s.handle({2, Op::EvalScoped, "Plus[Factor, Plus]"}).payload == "Plus[Factor, Plus]");
    auto bad = s.handle({3, Op::EvalScoped, "Plus["});
    CHECK_FALSE(bad.ok);
    CHECK(bad.id == 3);
    CHECK(s.handle({4, Op::EvalGlobal, "F[x_] := Plus[x, 1]"}).ok);
    CHECK(s.handle({5, Op::EvalGlobal, "F[2]"}).payload == "3");
    CHECK(s.handle({6, Op::EvalScoped, "G[x_] := x"}).ok);
    CHECK(s.handle({7, Op::EvalScoped, "G[2]"}).payload == "G[2]");
    CHECK(s.handle({8, Op::EvalScoped, "F[5]"}).payload == "6");
    CHECK(s.handle({9, Op::Shutdown, ""}).ok);
    CHECK(s.stopping());
}

TEST_CASE("client and server over a unix socket") {
    Running r("basic");
    Client c(r.address);
    c.ping();
    CHECK(print_fullform(c.execute("Factor[Plus[1, Times[-2, x], Power[x, 2]]]")) == "Power[Plus[-1, x], 2]");
    CHECK(print_fullform(c.execute("Plus[Factor, Plus]")) == "Plus[Factor, Plus]");
    CHECK_THROWS_AS(c.execute("Plus["), bridge::ServerError);
    c.ping();  // the connection survives an error
    c.execute_global("F[x_] := Plus[x, 1]");
    CHECK(print_fullform(c.execute_global("F[2]")) == "3");
    c.shutdown();
}

TEST_CASE("malformed frames get an error response and keep the connection") {
    Running r("malformed");
    Client c(r.address);
    auto resp = c.request(Op::EvalScoped, "Plus[");
    CHECK_FALSE(resp.ok);
    CHECK(c.request(Op::Ping, "").ok);
}

TEST_CASE("tcp transport") {
    bridge::ServerConfig cfg;
    cfg.address = "127.0.0.1:" + std::to_string(20000 + ::getpid() % 20000);
    bridge::Server s(cfg);
    try {
        s.bind();
    } catch (const bridge::TransportError&) {
        MESSAGE("tcp port unavailable, skipping");
        return;
    }
    std::thread t([&] { s.serve(); });
    {
        Client c(cfg.address);
        CHECK(print_fullform(c.execute("Times[6, 7]")) == "42");
        c.shutdown();
    }
    t.join();
}

TEST_CASE("context isolation on random define/use sequences") {
    std::mt19937 rng(4);
    bridge::Server shared({"/tmp/unused.sock"});
    for (int i = 0; i < 200; ++i) {
        std::vector<std::string> reqs;
        for (int k = testgen::pick(rng, 1, 6); k > 0; --k) {
            std::string f = "H" + std::to_string(testgen::pick(rng, 0, 2));
            int v = testgen::pick(rng, -5, 5);
            switch (testgen::pick(rng, 0, 3)) {
                case 0: reqs.push_back(f + "[x_] := Plus[x, " + std::to_string(v) + "]"); break;
                case 1: reqs.push_back(f + " = " + std::to_string(v)); break;
                case 2: reqs.push_back(f + "[" + std::to_string(v) + "]"); break;
                default: reqs.push_back("Plus[" + f + ", " + std::to_string(v) + "]"); break;
            }
        }
        for (const auto& q : reqs) {
            bridge::Server fresh({"/tmp/unused.sock"});
            auto a = shared.handle({1, Op::EvalScoped, q});
            auto b = fresh.handle({1, Op::EvalScoped, q});
            CHECK(a.ok == b.ok);
            CHECK(a.payload == b.payload);
        }
    }
    CHECK(shared.global_context().definition_count() == 0);
}

TEST_CASE("global definitions persist across connections") {
    Running r("global");
    {
        Client c(r.address);
        c.execute_global("K = 11");
    }
    Client c(r.address);
    CHECK(print_fullform(c.execute("Plus[K, 1]")) == "12");
    CHECK(print_fullform(c.execute_global("Plus[K, 1]")) == "12");
}

TEST_CASE("wire round trip is bit-exact") {
    int sv[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) == 0);
    std::mt19937 rng(21);
    bridge::Server s({"/tmp/unused.sock"});
    for (int i = 0; i < 1000; ++i) {
        cexpr::CExpr e = testgen::random_cexpr(rng, 4);
        std::string text = print_fullform(e);
        bridge::write_frame(sv[0], bridge::format_request({std::uint64_t(i), Op::EvalScoped, text}));
        auto body = bridge::read_frame(sv[1]);
        REQUIRE(body);
        auto req = bridge::parse_request(*body);
        CHECK(req.id == std::uint64_t(i));
        CHECK(req.payload == text);
        cexpr::CExpr back = parse_fullform(req.payload);
        CHECK(back == e);
        CHECK(print_fullform(back) == text);
        // and echoed through a held evaluation on the server
        auto resp = s.handle({1, Op::EvalScoped, "Hold[" + text + "]"});
        REQUIRE(resp.ok);
        CHECK(resp.payload == "Hold[" + text + "]");
    }
    ::close(sv[0]);
    ::close(sv[1]);
}

TEST_CASE("run_command_on") {
    Running r("command");
    Client c(r.address);
    kexpr::Environment env;
    kexpr::LocalContext ctx;
    kexpr::declare_context("x : real", env, ctx);
    kexpr::KExpr e = kexpr::parse_kexpr("x^2 - 2*x + 1", env, &ctx);
    auto pre = bridge::run_command_on("\xE2\x9F\xA8" "e\xE2\x9F\xA9 // LeanConvert // Activate // Factor", e, c,
                                      verify::factor_rules());
    auto back = kexpr::elaborate(pre, env);
    CHECK(kexpr::print_kexpr(back, env) == "(x + -1)^2");
    auto same = bridge::run_command_on("<e>", e, c);
    CHECK(kexpr::elaborate(same, env) == e);
    CHECK_THROWS_AS(bridge::run_command_on("Factor[x]", e, c), std::invalid_argument);
    CHECK_THROWS_AS(bridge::run_command_on("<e> + <e>", e, c), std::invalid_argument);

    std::string aux = temp_socket("aux") + ".m";
    {
        std::ofstream out(aux);
        out << "# helpers\n\nSq[y_] := Power[y, 2]\n";
    }
    auto sq = bridge::run_command_on("Sq[<e>]", kexpr::parse_kexpr("x", env, &ctx), c, interpret::BackRuleSet::defaults(),
                                     aux);
    CHECK(kexpr::print_kexpr(kexpr::elaborate(sq, env), env) == "x^2");
    std::filesystem::remove(aux);
}
