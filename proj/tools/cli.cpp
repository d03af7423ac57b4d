#include "casbridge/cli/cli.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "casbridge/bridge/bridge.hpp"
#include "casbridge/engine/algebra.hpp"
#include "casbridge/engine/eval.hpp"
#include "casbridge/interpret/interpret.hpp"
#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/signature.hpp"
#include "casbridge/kexpr/surface.hpp"
#include "casbridge/reflect/reflect.hpp"
#include "casbridge/verify/verify.hpp"

namespace casbridge::cli {

namespace {

using cexpr::CExpr;
using kexpr::KExpr;

struct Options {
    std::string oracle = "builtin";
    std::string addr;
    std::vector<std::string> rules;
    std::string context;
    std::string format = "text";
    std::string ledger;
    std::vector<std::string> declare;
};

// Uninterpreted functions every session knows about.
const char* kDefaultDeclarations[] = {
    "sin : real -> real", "cos : real -> real", "tan : real -> real",  "exp : real -> real",
    "log : real -> real", "sqrt : real -> real", "BesselJ : real -> real -> real",
};

// Engine heads that read back as those functions.
const std::pair<const char*, const char*> kFunctionHeads[] = {
    {"Sin", "sin"}, {"Cos", "cos"}, {"Tan", "tan"}, {"Exp", "exp"}, {"Log", "log"}, {"Sqrt", "sqrt"},
};

class Report {
  public:
    explicit Report(std::string headline) : headline_(std::move(headline)) {}
    void add(std::string key, std::string value) { fields_.emplace_back(std::move(key), std::move(value)); }

    void print(std::ostream& out, const std::string& format) const {
        if (format == "kv") {
            out << "result=" << headline_ << '\n';
            for (const auto& [k, v] : fields_) out << k << '=' << v << '\n';
        } else {
            out << headline_ << '\n';
            for (const auto& [k, v] : fields_) out << "  " << k << ": " << v << '\n';
        }
    }

  private:
    std::string headline_;
    std::vector<std::pair<std::string, std::string>> fields_;
};

class Session {
  public:
    Session(const Options& opts, std::ostream& out) : opts_(opts), out_(out) {
        for (const char* d : kDefaultDeclarations) declare_constant(d);
        back_rules = verify::factor_rules();
        for (const auto& [head, name] : kFunctionHeads)
            back_rules = interpret::register_sym_rule(back_rules, head, KExpr::constant(name));
        for (const auto& d : opts.declare) declare_constant(d);
        if (!opts.context.empty()) kexpr::declare_context(opts.context, env, ctx);
        for (const auto& path : opts.rules) {
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot read rules file " + path);
            std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
            reflect::ForwardRuleSet extra;
            extra.load(text);
            for (const auto& r : extra.rules()) engine_.add_forward_rule(r);
        }
        if (!opts.ledger.empty()) ledger.open_log(opts.ledger);
        if (opts.oracle != "builtin" && opts.oracle != "remote" && opts.oracle.rfind("remote:", 0) != 0)
            throw CLI::ValidationError("--oracle", "expected builtin, remote or remote:ADDRESS");
    }

    kexpr::Environment env;
    interpret::BackRuleSet back_rules;
    kexpr::LocalContext ctx;
    verify::TrustLedger ledger;

    bool remote() const { return opts_.oracle != "builtin"; }

    CExpr evaluate(const CExpr& e, bool global = false) {
        if (remote()) return global ? client().execute_global(e) : client().execute(e);
        if (global) return engine::eval(e, engine_);
        auto scoped = engine_.scoped_copy();
        return engine::eval(e, scoped);
    }

    verify::Oracle oracle() {
        return [this](const CExpr& e) { return evaluate(e); };
    }

    // Without --context, unknown lower-case identifiers become real variables.
    KExpr parse(const std::string& text, const std::optional<KExpr>& expected = std::nullopt) {
        for (int attempt = 0;; ++attempt) {
            try {
                return kexpr::parse_kexpr(text, env, &ctx, expected);
            } catch (const kexpr::UnknownConstant& u) {
                if (!opts_.context.empty() || attempt > 64 || u.name.segments().size() != 1) throw;
                ctx.declare(u.name, KExpr::constant(kexpr::names::real));
            }
        }
    }
    KExpr parse_prop(const std::string& text) { return parse(text, KExpr::prop()); }

    std::string show(const KExpr& e) const { return kexpr::print_kexpr(e, env); }

    void emit(Report r) {
        r.add("trusted", std::to_string(ledger.trusted_count()));
        r.print(out_, opts_.format);
    }

    bridge::Client& client() {
        if (!client_) {
            std::string addr = opts_.oracle.rfind("remote:", 0) == 0 ? opts_.oracle.substr(7) : opts_.addr;
            client_ = std::make_unique<bridge::Client>(bridge::resolve_address(addr));
        }
        return *client_;
    }

    engine::EvalContext& engine_context() { return engine_; }

  private:
    void declare_constant(const std::string& decl) {
        auto colon = decl.find(':');
        if (colon == std::string::npos) throw CLI::ValidationError("--declare", "expected NAME : TYPE, got " + decl);
        std::string name = decl.substr(0, colon);
        name.erase(std::remove_if(name.begin(), name.end(), ::isspace), name.end());
        KExpr type = kexpr::parse_kexpr(decl.substr(colon + 1), env);
        env.sig.declare(kexpr::Name::parse(name), type);
    }

    Options opts_;
    std::ostream& out_;
    engine::EvalContext engine_;
    std::unique_ptr<bridge::Client> client_;
};

// Structural replacement of a closed subterm.
KExpr replace(const KExpr& e, const KExpr& from, const KExpr& to) {
    using kexpr::ExprKind;
    if (e == from) return to;
    switch (e.kind()) {
        case ExprKind::App: return KExpr::app(replace(e.fn(), from, to), replace(e.arg(), from, to));
        case ExprKind::Lam:
            return KExpr::lam(e.name(), e.binder_info(), replace(e.type(), from, to), replace(e.body(), from, to));
        case ExprKind::Pi:
            return KExpr::pi(e.name(), e.binder_info(), replace(e.type(), from, to), replace(e.body(), from, to));
        case ExprKind::Let:
            return KExpr::let(e.name(), replace(e.type(), from, to), replace(e.value(), from, to),
                              replace(e.body(), from, to));
        default: return e;
    }
}

std::string coefficient_list(const std::vector<poly::Rational>& cs) {
    std::string out;
    for (const auto& c : cs) out += (out.empty() ? "" : " ") + poly::to_string(c);
    return out;
}

std::string assignment_text(const poly::Assignment& a) {
    std::string out;
    for (const auto& [v, q] : a) out += (out.empty() ? "" : ", ") + v + " = " + poly::to_string(q);
    return out.empty() ? "(empty)" : out;
}

int cmd_factor(Session& s, const std::string& text, const std::string& goal_text) {
    KExpr e = s.parse(text);
    auto res = verify::factor_check(e, s.env, s.oracle(), &s.ledger);
    Report r(s.show(res.factored));
    r.add("input", s.show(e));
    r.add("status", "verified");
    r.add("certificate", "ring equality");
    if (!goal_text.empty()) r.add("goal", s.show(replace(s.parse_prop(goal_text), e, res.factored)));
    s.emit(r);
    return kOk;
}

std::vector<poly::LinConstraint> linear_rows(Session& s, const std::vector<KExpr>& hyps) {
    verify::PolyReader reader(s.env);
    std::vector<poly::LinConstraint> rows;
    for (const auto& h : hyps) {
        auto [p, rel] = reader.read_relation(h);
        if (p.total_degree() > 1) throw verify::OutOfFragment("hypothesis is not linear", s.show(h));
        rows.emplace_back(p, rel);
    }
    return rows;
}

int cmd_lincert(Session& s, const std::vector<std::string>& texts) {
    std::vector<KExpr> hyps;
    for (const auto& t : texts) hyps.push_back(s.parse_prop(t));
    auto rows = linear_rows(s, hyps);
    if (auto coeffs = engine::farkas_coefficients(rows)) {
        auto c = verify::check_farkas(hyps, *coeffs, s.env, &s.ledger);
        Report r("infeasible");
        r.add("coefficients", coefficient_list(*coeffs));
        r.add("constant", poly::to_string(std::get<verify::FarkasWitness>(c).constant));
        r.add("status", "verified");
        r.add("certificate", "farkas");
        s.emit(r);
        return kOk;
    }
    std::vector<std::string> vars;
    for (const auto& row : rows)
        for (const auto& v : row.poly.variables())
            if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    auto w = engine::find_instance(rows, vars);
    if (!w) throw std::runtime_error("neither a certificate nor a witness was found");
    for (const auto& row : rows)
        if (!row.satisfied_by(*w)) throw verify::CertificationFailed("witness fails " + row.to_string());
    Report r("satisfiable");
    r.add("witness", assignment_text(*w));
    r.add("status", "checked");
    s.emit(r);
    return kFalse;
}

int cmd_solve(Session& s, const std::vector<std::string>& texts, const std::string& vars_text) {
    std::vector<KExpr> eqs;
    verify::PolyReader reader(s.env);
    std::vector<CExpr> c_eqs;
    std::set<std::string> seen;
    for (const auto& t : texts) {
        eqs.push_back(s.parse_prop(t));
        auto [p, rel] = reader.read_relation(eqs.back());
        if (rel != poly::Relation::Eq0) throw verify::OutOfFragment("not an equation", t);
        c_eqs.push_back(CExpr::app("Equal", {engine::from_poly(p), CExpr::integer(0)}));
        for (const auto& v : p.variables()) seen.insert(v);
    }
    std::vector<std::string> vars;
    if (vars_text.empty()) {
        vars.assign(seen.begin(), seen.end());
    } else {
        std::stringstream ss(vars_text);
        for (std::string v; std::getline(ss, v, ',');) {
            v.erase(std::remove_if(v.begin(), v.end(), ::isspace), v.end());
            if (!v.empty()) vars.push_back(v);
        }
    }
    std::vector<CExpr> c_vars;
    for (const auto& v : vars) c_vars.push_back(CExpr::sym(v));
    CExpr answer = s.evaluate(CExpr::app("Solve", {CExpr::list(c_eqs), CExpr::list(c_vars)}));
    if (!answer.has_head("List")) throw verify::OutOfFragment("oracle gave no solution list", cexpr::print_fullform(answer));
    std::vector<poly::Assignment> sols;
    for (const auto& sol : answer.args()) {
        poly::Assignment a;
        for (const auto& rule : sol.args()) {
            auto q = rule.has_head("Rule", 2) ? rule.arg(1).number() : std::nullopt;
            if (!q || !rule.arg(0).is(cexpr::CKind::Sym))
                throw verify::OutOfFragment("solution is not an exact rational", cexpr::print_fullform(rule));
            a[rule.arg(0).text()] = *q;
        }
        verify::check_solution(eqs, a, s.env, &s.ledger);
        sols.push_back(a);
    }
    Report r(std::to_string(sols.size()) + (sols.size() == 1 ? " solution" : " solutions"));
    for (std::size_t i = 0; i < sols.size(); ++i) r.add("solution." + std::to_string(i + 1), assignment_text(sols[i]));
    r.add("status", sols.empty() ? "none found" : "verified");
    s.emit(r);
    return sols.empty() ? kFalse : kOk;
}

int cmd_sanity(Session& s, const std::vector<std::string>& hyp_texts, const std::string& goal_text) {
    std::vector<KExpr> hyps;
    for (const auto& t : hyp_texts) hyps.push_back(s.parse_prop(t));
    KExpr goal = s.parse_prop(goal_text);
    auto search = [](const std::vector<poly::LinConstraint>& cs, const std::vector<std::string>& vars) {
        return engine::find_instance(cs, vars);
    };
    auto c = verify::sanity_check(hyps, goal, s.env, search, &s.ledger);
    if (c) {
        Report r("counterexample");
        r.add("assignment", assignment_text(std::get<verify::Counterexample>(*c).assignment));
        r.add("status", "verified");
        s.emit(r);
        return kFalse;
    }
    Report r("no counterexample found");
    r.add("status", "unchecked (not a proof)");
    s.emit(r);
    return kOk;
}

int cmd_translate(Session& s, const std::string& text) {
    KExpr e = s.parse(text);
    CExpr enc = reflect::encode_kernel_expr(e);
    CExpr form = s.evaluate(CExpr::app("LeanConvert", {enc}));
    CExpr active = s.evaluate(CExpr::app("Activate", {form}));
    KExpr back = interpret::back_translate(active, s.env, kexpr::infer_type(e, s.env), s.back_rules);
    Report r(s.show(e));
    r.add("encoding", cexpr::print_fullform(enc));
    r.add("leanform", cexpr::print_fullform(form));
    r.add("activated", cexpr::print_fullform(active));
    r.add("back", s.show(back));
    r.add("status", "unchecked");
    s.emit(r);
    return kOk;
}

int cmd_serve(const Options& opts, const std::string& aux, std::ostream& out) {
    bridge::ServerConfig cfg;
    cfg.address = bridge::resolve_address(opts.addr);
    cfg.rule_files = opts.rules;
    cfg.aux_file = aux;
    bridge::Server server(cfg);
    server.bind();
    out << "listening on " << cfg.address << std::endl;
    server.serve();
    out << "shut down" << std::endl;
    return kOk;
}

int cmd_repl(Session& s, bool global, std::istream& in, std::ostream& out, std::ostream& err) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out << cexpr::print_fullform(s.evaluate(bridge::parse_command(line), global)) << '\n';
        } catch (const bridge::TransportError& e) {
            err << "error: " << e.what() << '\n';
            return kTransport;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
        }
    }
    return kOk;
}

int cmd_trust(Session& s, const std::string& text, const std::string& provenance) {
    KExpr claim = s.parse_prop(text);
    auto c = verify::declare_trusted(claim, provenance, s.env, s.ledger);
    Report r(verify::claim_text(c, s.env));
    r.add("status", "trusted");
    r.add("provenance", provenance);
    if (s.ledger.snapshot().back().flagged) r.add("warning", "the trusted claim is false");
    s.emit(r);
    return kOk;
}

int cmd_approx(Session& s, const std::string& text, const std::string& radius_text, const std::string& value_text) {
    KExpr e = s.parse(text, KExpr::constant(kexpr::names::real));
    poly::Rational radius = poly::parse_rational(radius_text);
    verify::NumericOracle numeric;
    if (!value_text.empty()) {
        poly::Rational v = poly::parse_rational(value_text);
        numeric = [v](const KExpr&) { return std::optional<poly::Rational>(v); };
    }
    auto c = verify::approx_bounds(e, radius, s.env, s.ledger, numeric);
    Report r(verify::claim_text(c, s.env));
    r.add("status", verify::to_string(s.ledger.snapshot().back().status));
    s.emit(r);
    return kOk;
}

int exit_for(const std::exception& e) {
    if (dynamic_cast<const bridge::TransportError*>(&e) || dynamic_cast<const bridge::ServerError*>(&e) ||
        dynamic_cast<const bridge::ProtocolError*>(&e))
        return kTransport;
    if (dynamic_cast<const verify::CertificationFailed*>(&e) || dynamic_cast<const verify::UnableToSimplify*>(&e) ||
        dynamic_cast<const verify::BadCertificate*>(&e) || dynamic_cast<const verify::ResidueNonZero*>(&e))
        return kFalse;
    return kOutOfFragment;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Certified computer algebra over a small kernel language", "casbridge"};
    app.set_config("--config", "", "TOML file with option defaults");
    app.require_subcommand(1);
    Options opts;
    app.add_option("--oracle", opts.oracle, "builtin, remote, or remote:ADDRESS")->capture_default_str();
    app.add_option("--addr", opts.addr, "server address (path or host:port); defaults to $BRIDGE_ADDR");
    app.add_option("--rules", opts.rules, "extra forward rule file")->check(CLI::ExistingFile);
    app.add_option("--context", opts.context, "local declarations, e.g. \"x:real,y:real\"");
    app.add_option("--format", opts.format, "output format")->check(CLI::IsMember({"text", "kv"}))->capture_default_str();
    app.add_option("--ledger", opts.ledger, "append ledger entries to this file");
    app.add_option("--declare", opts.declare, "uninterpreted constant, e.g. \"f : real -> real\"");

    std::string expr, goal, vars, provenance = "user", radius, value, aux;
    std::vector<std::string> hyps, eqs;
    bool global = false;

    auto* factor = app.add_subcommand("factor", "factor a polynomial and certify the result");
    factor->add_option("expr", expr)->required();
    factor->add_option("--goal", goal, "proposition in which to rewrite the expression");
    // hypotheses such as "-x <= 1" look like flags, so these two take their arguments verbatim
    auto* lincert = app.add_subcommand("lincert", "refute linear hypotheses with a Farkas certificate");
    lincert->prefix_command();
    auto* solve = app.add_subcommand("solve", "solve polynomial equations and check every solution (--vars x,y)");
    solve->prefix_command();
    auto* sanity = app.add_subcommand("sanity", "look for a counterexample to hyps |- goal");
    sanity->add_option("goal", goal)->required();
    sanity->add_option("--hyp", hyps, "hypothesis (repeatable)");
    auto* translate = app.add_subcommand("translate", "show every stage of the round trip");
    translate->add_option("expr", expr)->required();
    auto* serve = app.add_subcommand("serve", "run the evaluation server");
    serve->add_option("--aux", aux, "definitions evaluated globally at startup")->check(CLI::ExistingFile);
    auto* repl = app.add_subcommand("repl", "evaluate FullForm lines from stdin");
    repl->add_flag("--global", global, "keep definitions between lines");
    auto* trust = app.add_subcommand("trust", "record a claim as a trusted axiom");
    trust->add_option("claim", expr)->required();
    trust->add_option("--provenance", provenance)->capture_default_str();
    auto* approx = app.add_subcommand("approx", "rational bounds around a numeric value");
    approx->add_option("term", expr)->required();
    approx->add_option("radius", radius)->required();
    approx->add_option("--value", value, "numeric value for terms exact arithmetic cannot evaluate");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n' << "run with --help for usage\n";
        return kUsage;
    }

    if (lincert->parsed()) {
        hyps = lincert->remaining();
        if (hyps.empty()) {
            err << "usage error: lincert needs at least one hypothesis\n";
            return kUsage;
        }
    }
    if (solve->parsed()) {
        auto rest = solve->remaining();
        for (std::size_t i = 0; i < rest.size(); ++i) {
            if (rest[i] == "--vars" && i + 1 < rest.size()) vars = rest[++i];
            else if (rest[i].rfind("--vars=", 0) == 0) vars = rest[i].substr(7);
            else eqs.push_back(rest[i]);
        }
        if (eqs.empty()) {
            err << "usage error: solve needs at least one equation\n";
            return kUsage;
        }
    }

    try {
        if (serve->parsed()) return cmd_serve(opts, aux, out);
        Session s(opts, out);
        if (factor->parsed()) return cmd_factor(s, expr, goal);
        if (lincert->parsed()) return cmd_lincert(s, hyps);
        if (solve->parsed()) return cmd_solve(s, eqs, vars);
        if (sanity->parsed()) return cmd_sanity(s, hyps, goal);
        if (translate->parsed()) return cmd_translate(s, expr);
        if (repl->parsed()) return cmd_repl(s, global, in, out, err);
        if (trust->parsed()) return cmd_trust(s, expr, provenance);
        if (approx->parsed()) return cmd_approx(s, expr, radius, value);
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        int code = exit_for(e);
        err << "error: " << e.what() << '\n';
        if (opts.format == "kv") out << "error=" << e.what() << '\n';
        return code;
    }
    return kUsage;
}

}  // namespace casbridge::cli
