#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "casbridge/cli/cli.hpp"
#include "doctest.h"

using casbridge::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome call(const std::vector<std::string>& args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    int code = run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string golden(const std::string& name) {
    std::ifstream in(std::string(GOLDEN_DIR) + "/" + name + ".kv");
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_golden(const std::string& name, std::vector<std::string> args) {
    args.insert(args.begin(), {"--format", "kv"});
    for (int round = 0; round < 2; ++round) {
        auto o = call(args);
        INFO(name << " stderr: " << o.err);
        CHECK(o.out + "exit=" + std::to_string(o.code) + "\n" == golden(name));
    }
}

}  // namespace

TEST_CASE("machine-readable output matches the golden files") {
    check_golden("factor_running", {"--context", "x:real", "factor", "x^2-2*x+1"});
    check_golden("factor_goal", {"--context", "x:real", "factor", "x^2-2*x+1", "--goal", "x^2-2*x+1 = 0"});
    check_golden("factor_x10", {"--context", "x:real,y:real", "factor", "x^10-y^10"});
    check_golden("factor_sin", {"factor", "sin x"});
    check_golden("lincert_farkas", {"lincert", "2*x + 4*y <= 4", "-x <= 1", "-y <= -5"});
    check_golden("lincert_sat", {"lincert", "x <= 1"});
    check_golden("solve_quadratic", {"solve", "x^2 - 1 = 0"});
    check_golden("solve_system",
                 {"solve", "99/20*y^2 - x^2*y + x*y = 0", "2*y^3 - 2*x^2*y^2 - 2*x^3 + 6381/4 = 0"});
    check_golden("sanity_counterexample", {"sanity", "x = 0"});
    check_golden("sanity_ok", {"sanity", "--hyp", "x <= 0", "x <= 1"});
    check_golden("trust_bessel", {"trust", "forall x : real, x*BesselJ 2 x + x*BesselJ 0 x = 2*BesselJ 1 x",
                                  "--provenance", "FullSimplify"});
    check_golden("approx_bessel", {"approx", "100 * BesselJ 2 (13 / 25)", "0.001", "--value",
                                   "3.30447801564440548771718205845"});
    check_golden("approx_exact", {"approx", "1/3", "1/100"});
}

TEST_CASE("exit codes") {
    CHECK(call({}).code == casbridge::cli::kUsage);
    CHECK(call({"--bogus", "factor", "x"}).code == casbridge::cli::kUsage);
    CHECK(call({"lincert"}).code == casbridge::cli::kUsage);
    CHECK(call({"--format", "xml", "factor", "x"}).code == casbridge::cli::kUsage);
    CHECK(call({"--oracle", "nonsense", "factor", "x"}).code == casbridge::cli::kUsage);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"--oracle", "remote:/nonexistent/socket", "factor", "x^2"}).code == casbridge::cli::kTransport);
    CHECK(call({"trust", "(3 : real)"}).code == casbridge::cli::kOutOfFragment);
    CHECK(call({"factor", "x +"}).code == casbridge::cli::kOutOfFragment);
}

TEST_CASE("text output and the other commands") {
    auto t = call({"translate", "x + x"});
    CHECK(t.code == 0);
    CHECK(t.out.find("leanform: Inactive[Plus][LeanLocal[") != std::string::npos);
    CHECK(t.out.find("back: 2 * x") != std::string::npos);
    auto r = call({"repl", "--global"}, "F[x_] := Times[x, x]\nF[5]\nPlus[\n// comment-free\nF[2] // Factor\n");
    CHECK(r.code == 0);
    CHECK(r.out == "Null\n25\n4\n");
    CHECK(r.err.find("error:") != std::string::npos);
    auto f = call({"--declare", "g : real -> real", "factor", "g x"});
    CHECK(f.code == casbridge::cli::kOutOfFragment);
}

TEST_CASE("rules file and config file") {
    auto dir = std::filesystem::temp_directory_path();
    std::string rules = (dir / ("cbcli-" + std::to_string(::getpid()) + ".rules")).string();
    std::string config = (dir / ("cbcli-" + std::to_string(::getpid()) + ".toml")).string();
    {
        std::ofstream r(rules);
        r << "# sine\nLeanForm[LeanApp[LeanConst[\"sin\", _], x_]] :=\n    Inactive[Sin][LeanForm[x]]\n";
        std::ofstream c(config);
        c << "format = \"kv\"\nrules = [\"" << rules << "\"]\ndeclare = [\"f : real -> real\"]\n"
          << "[trust]\nprovenance = \"table\"\n";
    }
    auto t = call({"--config", config, "translate", "sin x + f x"});
    CHECK(t.code == 0);
    CHECK(t.out.find("leanform=Inactive[Plus][Inactive[Sin][") != std::string::npos);
    CHECK(t.out.find("back=f x + sin x\n") != std::string::npos);
    auto tr = call({"--config", config, "trust", "x <= x"});
    CHECK(tr.out.find("provenance=table\n") != std::string::npos);
    CHECK(call({"--config", config, "--format", "text", "trust", "x <= x"}).out.rfind("x <= x\n", 0) == 0);
    std::filesystem::remove(rules);
    std::filesystem::remove(config);
}
