#include "casbridge/cexpr/cexpr.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace casbridge::cexpr {

struct CExpr::Node {
    CKind kind = CKind::Sym;
    std::string text;
    mpz_class value;
    std::vector<CExpr> children;  // head first, then arguments
    std::vector<CExpr> args;
    std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

// Decimal literal: -?D+ ( . D* )? ( *^ -?D+ )?, and at least one of the optional parts.
bool valid_decimal(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && s[i] == '-') ++i;
    std::size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == start) return false;
    bool real = false;
    if (i < s.size() && s[i] == '.') {
        real = true;
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    }
    if (i + 1 < s.size() && s[i] == '*' && s[i + 1] == '^') {
        real = true;
        i += 2;
        if (i < s.size() && s[i] == '-') ++i;
        std::size_t es = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == es) return false;
    }
    return real && i == s.size();
}

const CExpr& null_symbol() {
    static const CExpr n = CExpr::sym("Null");
    return n;
}

}  // namespace

CExpr::CExpr() : CExpr(null_symbol()) {}

CExpr CExpr::sym(std::string name) {
    auto n = std::make_shared<Node>();
    n->kind = CKind::Sym;
    n->hash = mix(1, std::hash<std::string>{}(name));
    n->text = std::move(name);
    return CExpr(std::move(n));
}

CExpr CExpr::str(std::string text) {
    auto n = std::make_shared<Node>();
    n->kind = CKind::Str;
    n->hash = mix(2, std::hash<std::string>{}(text));
    n->text = std::move(text);
    return CExpr(std::move(n));
}

CExpr CExpr::integer(mpz_class value) {
    auto n = std::make_shared<Node>();
    n->kind = CKind::Int;
    n->hash = mix(3, std::hash<std::string>{}(value.get_str(16)));
    n->value = std::move(value);
    return CExpr(std::move(n));
}

CExpr CExpr::real(std::string text) {
    if (!valid_decimal(text)) throw std::invalid_argument("malformed decimal literal '" + text + "'");
    auto n = std::make_shared<Node>();
    n->kind = CKind::Real;
    n->hash = mix(4, std::hash<std::string>{}(text));
    n->text = std::move(text);
    return CExpr(std::move(n));
}

CExpr CExpr::app(CExpr head, std::vector<CExpr> args) {
    auto n = std::make_shared<Node>();
    n->kind = CKind::App;
    std::size_t h = mix(5, head.hash());
    for (const auto& a : args) h = mix(h, a.hash());
    n->hash = h;
    n->children.push_back(std::move(head));
    n->args = std::move(args);
    return CExpr(std::move(n));
}

CExpr CExpr::rational(const mpq_class& q) {
    mpq_class c = q;
    c.canonicalize();
    if (c.get_den() == 1) return integer(c.get_num());
    return app("Rational", {integer(c.get_num()), integer(c.get_den())});
}

CKind CExpr::kind() const { return node_->kind; }

bool CExpr::is_sym(std::string_view name) const { return node_->kind == CKind::Sym && node_->text == name; }

bool CExpr::has_head(std::string_view name) const { return node_->kind == CKind::App && head().is_sym(name); }

bool CExpr::has_head(std::string_view name, std::size_t arity) const {
    return has_head(name) && node_->args.size() == arity;
}

const std::string& CExpr::text() const {
    if (node_->kind == CKind::Int || node_->kind == CKind::App) throw std::logic_error("text() on a non-atomic C-expression");
    return node_->text;
}

const mpz_class& CExpr::int_value() const {
    if (node_->kind != CKind::Int) throw std::logic_error("int_value() on a non-integer");
    return node_->value;
}

const CExpr& CExpr::head() const {
    if (node_->kind != CKind::App) throw std::logic_error("head() on an atom");
    return node_->children.front();
}

const std::vector<CExpr>& CExpr::args() const {
    if (node_->kind != CKind::App) throw std::logic_error("args() on an atom");
    return node_->args;
}

mpq_class CExpr::real_value() const {
    const std::string& s = text();
    std::size_t i = 0;
    bool neg = s[0] == '-';
    if (neg) ++i;
    std::string digits;
    long exp10 = 0;
    for (; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) digits += s[i];
    if (i < s.size() && s[i] == '.') {
        for (++i; i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])); ++i) {
            digits += s[i];
            --exp10;
        }
    }
    if (i < s.size()) exp10 += std::stol(s.substr(i + 2));
    mpq_class v{mpz_class(digits)};
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    if (exp10 < 0)
        v /= p;
    else
        v *= p;
    v.canonicalize();
    return neg ? mpq_class(-v) : v;
}

std::optional<mpq_class> CExpr::number() const {
    switch (node_->kind) {
        case CKind::Int:
            return mpq_class(node_->value);
        case CKind::Real:
            return real_value();
        case CKind::App:
            if (has_head("Rational", 2) && arg(0).is(CKind::Int) && arg(1).is(CKind::Int) && arg(1).int_value() != 0) {
                mpq_class q(arg(0).int_value(), arg(1).int_value());
                q.canonicalize();
                return q;
            }
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

std::size_t CExpr::hash() const { return node_->hash; }

bool operator==(const CExpr& a, const CExpr& b) {
    if (a.node_ == b.node_) return true;
    if (a.node_->hash != b.node_->hash || a.node_->kind != b.node_->kind) return false;
    switch (a.node_->kind) {
        case CKind::Int:
            return a.node_->value == b.node_->value;
        case CKind::App:
            return a.head() == b.head() && a.args() == b.args();
        default:
            return a.node_->text == b.node_->text;
    }
}

int compare(const CExpr& a, const CExpr& b) {
    if (a == b) return 0;
    auto na = a.number();
    auto nb = b.number();
    if (na && nb) {
        int c = cmp(*na, *nb);
        if (c != 0) return c < 0 ? -1 : 1;
        // Same value in different spellings: integers before rationals before decimals.
        auto rank = [](const CExpr& e) { return e.is(CKind::Int) ? 0 : e.is(CKind::App) ? 1 : 2; };
        if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
        if (a.is(CKind::Real)) return a.text() < b.text() ? -1 : 1;
    } else if (na) {
        return -1;
    } else if (nb) {
        return 1;
    }
    auto rank = [](const CExpr& e) { return e.is(CKind::Str) ? 0 : e.is(CKind::Sym) ? 1 : 2; };
    if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
    if (!a.is(CKind::App)) return a.text() < b.text() ? -1 : 1;
    if (int c = compare(a.head(), b.head()); c != 0) return c;
    const auto& xa = a.args();
    const auto& xb = b.args();
    for (std::size_t i = 0; i < xa.size() && i < xb.size(); ++i)
        if (int c = compare(xa[i], xb[i]); c != 0) return c;
    return xa.size() < xb.size() ? -1 : xa.size() > xb.size() ? 1 : 0;
}

bool is_symbol_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '$')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '$' || c == '`';
    });
}

// ---------------------------------------------------------------- printing

namespace {

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"':
                out += "\\\"";
                break;
            case '\\':
                out += "\\\\";
                break;
            case '\n':
                out += "\\n";
                break;
            case '\t':
                out += "\\t";
                break;
            default:
                out += c;
        }
    }
    return out + "\"";
}

void print_to(const CExpr& e, std::string& out) {
    switch (e.kind()) {
        case CKind::Sym:
        case CKind::Real:
            out += e.text();
            return;
        case CKind::Str:
            out += quote(e.text());
            return;
        case CKind::Int:
            out += e.int_value().get_str();
            return;
        case CKind::App: {
            bool braces = e.has_head("List");
            if (braces) {
                out += '{';
            } else {
                print_to(e.head(), out);
                out += '[';
            }
            for (std::size_t i = 0; i < e.args().size(); ++i) {
                if (i) out += ", ";
                print_to(e.args()[i], out);
            }
            out += braces ? '}' : ']';
            return;
        }
    }
}

void repr_to(const CExpr& e, std::string& out) {
    switch (e.kind()) {
        case CKind::Sym:
            out += "sym " + quote(e.text());
            return;
        case CKind::Str:
            out += "str " + quote(e.text());
            return;
        case CKind::Int:
            out += "mint " + e.int_value().get_str();
            return;
        case CKind::Real:
            out += "mreal " + e.text();
            return;
        case CKind::App: {
            auto items = [&](const std::vector<CExpr>& xs) {
                out += '[';
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (i) out += ", ";
                    repr_to(xs[i], out);
                }
                out += ']';
            };
            if (e.has_head("List")) {
                items(e.args());
                return;
            }
            out += "app (";
            repr_to(e.head(), out);
            out += ") ";
            items(e.args());
            return;
        }
    }
}

}  // namespace

std::string print_fullform(const CExpr& e) {
    std::string out;
    print_to(e, out);
    return out;
}

std::string print_repr(const CExpr& e) {
    std::string out;
    repr_to(e, out);
    return out;
}

// ---------------------------------------------------------------- parsing

namespace {

class Parser {
  public:
    explicit Parser(std::string_view s) : s_(s) {}

    CExpr parse_all() {
        CExpr e = set();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return e;
    }

  private:
    std::string_view s_;
    std::size_t i_ = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, i_); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    bool peek(std::string_view op) {
        skip();
        return s_.substr(i_, op.size()) == op;
    }

    bool eat(std::string_view op) {
        if (!peek(op)) return false;
        i_ += op.size();
        return true;
    }

    void expect(std::string_view op) {
        if (!eat(op)) fail("expected '" + std::string(op) + "'");
    }

    CExpr set() {
        CExpr lhs = postfix();
        if (eat(":=")) return CExpr::app("SetDelayed", {lhs, set()});
        if (peek("=") && !peek("==")) {
            ++i_;
            return CExpr::app("Set", {lhs, set()});
        }
        return lhs;
    }

    CExpr postfix() {
        CExpr e = condition();
        while (eat("//")) e = CExpr::app(condition(), {e});
        return e;
    }

    CExpr condition() {
        CExpr e = rule();
        if (eat("/;")) return CExpr::app("Condition", {e, rule()});
        return e;
    }

    CExpr rule() {
        CExpr lhs = disjunction();
        if (eat("->")) return CExpr::app("Rule", {lhs, rule()});
        if (eat(":>")) return CExpr::app("RuleDelayed", {lhs, rule()});
        return lhs;
    }

    CExpr disjunction() {
        std::vector<CExpr> xs{conjunction()};
        while (eat("||")) xs.push_back(conjunction());
        return xs.size() == 1 ? xs[0] : CExpr::app("Or", xs);
    }

    CExpr conjunction() {
        std::vector<CExpr> xs{relation()};
        while (eat("&&")) xs.push_back(relation());
        return xs.size() == 1 ? xs[0] : CExpr::app("And", xs);
    }

    CExpr relation() {
        CExpr lhs = sum();
        static const std::pair<std::string_view, const char*> ops[] = {
            {"==", "Equal"}, {"!=", "Unequal"}, {"<=", "LessEqual"}, {">=", "GreaterEqual"}, {"<", "Less"},
            {">", "Greater"}};
        for (const auto& [op, head] : ops) {
            if (op == "<" && peek("<=")) continue;
            if (op == ">" && peek(">=")) continue;
            if (eat(op)) return CExpr::app(head, {lhs, sum()});
        }
        return lhs;
    }

    static CExpr negate(const CExpr& e) {
        if (e.is(CKind::Int)) return CExpr::integer(-e.int_value());
        if (e.has_head("Times") && !e.args().empty() && e.arg(0).is(CKind::Int)) {
            std::vector<CExpr> xs = e.args();
            xs[0] = CExpr::integer(-xs[0].int_value());
            return CExpr::app("Times", xs);
        }
        return CExpr::app("Times", {CExpr::integer(-1), e});
    }

    CExpr sum() {
        std::vector<CExpr> xs{product()};
        for (;;) {
            if (peek("->")) break;
            if (eat("+")) {
                xs.push_back(product());
            } else if (eat("-")) {
                xs.push_back(negate(product()));
            } else {
                break;
            }
        }
        return xs.size() == 1 ? xs[0] : CExpr::app("Plus", xs);
    }

    CExpr product() {
        std::vector<CExpr> xs{unary()};
        for (;;) {
            if (peek("*^")) fail("misplaced exponent marker");
            if (eat("*")) {
                xs.push_back(unary());
            } else if (peek("/") && !peek("//") && !peek("/;")) {
                ++i_;
                xs.push_back(CExpr::app("Power", {unary(), CExpr::integer(-1)}));
            } else {
                break;
            }
        }
        return xs.size() == 1 ? xs[0] : CExpr::app("Times", xs);
    }

    CExpr unary() {
        if (peek("->")) fail("unexpected '->'");
        if (eat("-")) {
            skip();
            if (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) {
                CExpr n = number(true);
                if (peek("^")) fail("ambiguous negative base; parenthesize it");
                return n;
            }
            return negate(unary());
        }
        return power();
    }

    CExpr power() {
        CExpr base = application();
        if (eat("^")) return CExpr::app("Power", {base, unary()});
        return base;
    }

    CExpr application() {
        CExpr e = atom();
        while (peek("[")) {
            ++i_;
            e = CExpr::app(e, arguments("]"));
        }
        return e;
    }

    std::vector<CExpr> arguments(std::string_view close) {
        std::vector<CExpr> args;
        if (eat(close)) return args;
        for (;;) {
            args.push_back(set());
            if (eat(close)) return args;
            expect(",");
        }
    }

    CExpr number(bool negative) {
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        bool real = false;
        if (i_ < s_.size() && s_[i_] == '.' && !(i_ + 1 < s_.size() && s_[i_ + 1] == '.')) {
            real = true;
            ++i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        }
        if (s_.substr(i_, 2) == "*^") {
            real = true;
            i_ += 2;
            if (i_ < s_.size() && s_[i_] == '-') ++i_;
            std::size_t es = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
            if (es == i_) fail("exponent digits expected");
        }
        std::string text = (negative ? "-" : "") + std::string(s_.substr(start, i_ - start));
        if (real) return CExpr::real(text);
        return CExpr::integer(mpz_class(text));
    }

    std::string symbol_name() {
        std::size_t start = i_;
        while (i_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '$' || s_[i_] == '`'))
            ++i_;
        return std::string(s_.substr(start, i_ - start));
    }

    CExpr blank() {
        // At '_': optional head symbol.
        ++i_;
        if (i_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[i_])) || s_[i_] == '$'))
            return CExpr::app("Blank", {CExpr::sym(symbol_name())});
        return CExpr::app("Blank", {});
    }

    CExpr atom() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of input");
        char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c))) return number(false);
        if (c == '"') return string_literal();
        if (c == '{') {
            ++i_;
            return CExpr::list(arguments("}"));
        }
        if (c == '(') {
            ++i_;
            CExpr e = set();
            expect(")");
            return e;
        }
        if (c == '_') return blank();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '$') {
            CExpr s = CExpr::sym(symbol_name());
            if (i_ < s_.size() && s_[i_] == '_') return CExpr::app("Pattern", {s, blank()});
            return s;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    CExpr string_literal() {
        ++i_;
        std::string out;
        while (i_ < s_.size() && s_[i_] != '"') {
            char c = s_[i_++];
            if (c == '\\') {
                if (i_ >= s_.size()) break;
                char d = s_[i_++];
                out += d == 'n' ? '\n' : d == 't' ? '\t' : d;
            } else {
                out += c;
            }
        }
        if (i_ >= s_.size()) fail("unterminated string");
        ++i_;
        return CExpr::str(std::move(out));
    }
};

}  // namespace

CExpr parse_fullform(std::string_view text) { return Parser(text).parse_all(); }

// ---------------------------------------------------------------- patterns

namespace {

void collect_vars(const CExpr& p, std::vector<std::string>& out) {
    if (!p.is(CKind::App)) return;
    if (p.has_head("Pattern", 2) && p.arg(0).is(CKind::Sym)) {
        if (std::find(out.begin(), out.end(), p.arg(0).text()) == out.end()) out.push_back(p.arg(0).text());
        collect_vars(p.arg(1), out);
        return;
    }
    collect_vars(p.head(), out);
    for (const auto& a : p.args()) collect_vars(a, out);
}

std::string atom_head(const CExpr& e) {
    switch (e.kind()) {
        case CKind::Sym:
            return "Symbol";
        case CKind::Str:
            return "String";
        case CKind::Int:
            return "Integer";
        case CKind::Real:
            return "Real";
        case CKind::App:
            break;
    }
    return {};
}

bool match_into(const CExpr& p, const CExpr& e, Bindings& b) {
    if (p.is(CKind::App)) {
        if (p.has_head("Pattern", 2) && p.arg(0).is(CKind::Sym)) {
            const std::string& v = p.arg(0).text();
            if (auto it = b.find(v); it != b.end()) return it->second == e;
            if (!match_into(p.arg(1), e, b)) return false;
            b.emplace(v, e);
            return true;
        }
        if (p.has_head("Blank")) {
            if (p.args().empty()) return true;
            const CExpr& h = p.arg(0);
            if (e.is(CKind::App)) return e.head() == h;
            if (e.has_head("Rational")) return h.is_sym("Rational");
            return h.is(CKind::Sym) && h.text() == atom_head(e);
        }
        if (!e.is(CKind::App) || p.args().size() != e.args().size()) return false;
        if (!match_into(p.head(), e.head(), b)) return false;
        for (std::size_t i = 0; i < p.args().size(); ++i)
            if (!match_into(p.args()[i], e.args()[i], b)) return false;
        return true;
    }
    return p == e;
}

}  // namespace

std::vector<std::string> pattern_variables(const CExpr& p) {
    std::vector<std::string> out;
    collect_vars(p, out);
    return out;
}

std::optional<Bindings> match(const CExpr& pattern, const CExpr& e, const Bindings& seed) {
    Bindings b = seed;
    if (match_into(pattern, e, b)) return b;
    return std::nullopt;
}

CExpr transform(const CExpr& e, const std::function<std::optional<CExpr>(const CExpr&)>& f) {
    if (auto r = f(e)) return *r;
    if (!e.is(CKind::App)) return e;
    CExpr h = transform(e.head(), f);
    std::vector<CExpr> args;
    args.reserve(e.args().size());
    bool changed = !(h == e.head());
    for (const auto& a : e.args()) {
        args.push_back(transform(a, f));
        changed = changed || !(args.back() == a);
    }
    return changed ? CExpr::app(h, std::move(args)) : e;
}

CExpr substitute(const CExpr& e, const Bindings& b) {
    if (b.empty()) return e;
    return transform(e, [&](const CExpr& x) -> std::optional<CExpr> {
        if (x.is(CKind::Sym)) {
            if (auto it = b.find(x.text()); it != b.end()) return it->second;
        }
        return std::nullopt;
    });
}

}  // namespace casbridge::cexpr
