#include <cctype>
#include <vector>

#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/numeral.hpp"
#include "casbridge/kexpr/surface.hpp"

namespace casbridge::kexpr {

namespace {

enum class Tok { Ident, Number, String, Op, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t pos = 0;
};

// Unicode operator spellings mapped to their ASCII equivalents.
struct UnicodeOp {
    const char* utf8;
    const char* ascii;
};
constexpr UnicodeOp kUnicodeOps[] = {
    {"\xCE\xBB", "fun"},        // λ
    {"\xCE\xA0", "Pi"},         // Π
    {"\xE2\x88\x80", "forall"}, // ∀
    {"\xE2\x88\x83", "exists"}, // ∃
    {"\xE2\x86\x92", "->"},     // →
    {"\xE2\x89\xA4", "<="},     // ≤
    {"\xE2\x89\xA5", ">="},     // ≥
    {"\xE2\x88\xA7", "/\\"},    // ∧
};

class Lexer {
  public:
    explicit Lexer(std::string_view s) : s_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_space();
            Token t;
            t.pos = i_;
            if (i_ >= s_.size()) {
                out.push_back(t);
                return out;
            }
            if (auto u = unicode_op()) {
                t.kind = is_word(u) ? Tok::Ident : Tok::Op;
                t.text = u;
                out.push_back(t);
                continue;
            }
            char c = s_[i_];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t j = i_;
                while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
                if (j + 1 < s_.size() && s_[j] == '.' && std::isdigit(static_cast<unsigned char>(s_[j + 1]))) {
                    ++j;
                    while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
                }
                t.kind = Tok::Number;
                t.text = std::string(s_.substr(i_, j - i_));
                i_ = j;
                out.push_back(t);
                continue;
            }
            if (c == '"') {
                t.kind = Tok::String;
                t.text = read_string();
                out.push_back(t);
                continue;
            }
            if (ident_start()) {
                t.kind = Tok::Ident;
                t.text = read_ident();
                out.push_back(t);
                continue;
            }
            static const char* two[] = {"->", "<=", ">=", "/\\", ":=", ".{"};
            bool matched = false;
            for (const char* op : two) {
                if (s_.substr(i_, 2) == op) {
                    t.kind = Tok::Op;
                    t.text = op;
                    i_ += 2;
                    matched = true;
                    break;
                }
            }
            if (matched) {
                out.push_back(t);
                continue;
            }
            if (std::string_view("()[]{},:+-*/^<>=@#_").find(c) != std::string_view::npos) {
                t.kind = Tok::Op;
                t.text = std::string(1, c);
                ++i_;
                out.push_back(t);
                continue;
            }
            throw SyntaxError(std::string("unexpected character '") + c + "'", i_);
        }
    }

  private:
    std::string_view s_;
    std::size_t i_ = 0;

    static bool is_word(const char* u) { return std::isalpha(static_cast<unsigned char>(u[0])) != 0; }

    void skip_space() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    const char* unicode_op() {
        for (const auto& op : kUnicodeOps) {
            std::string_view u(op.utf8);
            if (s_.substr(i_, u.size()) == u) {
                i_ += u.size();
                return op.ascii;
            }
        }
        return nullptr;
    }

    bool at_unicode_op(std::size_t j) const {
        for (const auto& op : kUnicodeOps) {
            std::string_view u(op.utf8);
            if (s_.substr(j, u.size()) == u) return true;
        }
        return false;
    }

    bool ident_char(std::size_t j) const {
        if (j >= s_.size()) return false;
        auto c = static_cast<unsigned char>(s_[j]);
        if (c >= 0x80) return !at_unicode_op(j);
        return std::isalnum(c) || c == '_' || c == '\'';
    }

    bool ident_start() const {
        auto c = static_cast<unsigned char>(s_[i_]);
        if (c == '_') return ident_char(i_ + 1);
        if (c >= 0x80) return !at_unicode_op(i_);
        return std::isalpha(c) != 0;
    }

    std::string read_ident() {
        std::size_t start = i_;
        while (true) {
            if (s_.substr(i_, 2) == "\xC2\xAB") {  // «...»
                std::size_t close = s_.find("\xC2\xBB", i_);
                if (close == std::string_view::npos) throw SyntaxError("unterminated \xC2\xAB", i_);
                i_ = close + 2;
            } else if (ident_char(i_)) {
                ++i_;
            } else if (i_ < s_.size() && s_[i_] == '.' &&
                       (ident_char(i_ + 1) || s_.substr(i_ + 1, 2) == "\xC2\xAB")) {
                ++i_;
            } else {
                break;
            }
        }
        return std::string(s_.substr(start, i_ - start));
    }

    std::string read_string() {
        std::size_t start = i_;
        ++i_;
        std::string out;
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
                ++i_;
                char e = s_[i_];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += s_[i_];
            }
            ++i_;
        }
        if (i_ >= s_.size()) throw SyntaxError("unterminated string literal", start);
        ++i_;
        return out;
    }
};

bool is_keyword(const std::string& s) {
    static const char* kws[] = {"fun", "Pi", "forall", "exists", "let", "in", "Prop", "Type", "Sort"};
    for (const char* k : kws)
        if (s == k) return true;
    return false;
}

class Parser {
  public:
    Parser(std::string_view text, const Environment& env, const LocalContext* ctx)
        : toks_(Lexer(text).run()), env_(env), ctx_(ctx) {}

    KExpr parse_all() {
        KExpr e = expr();
        if (peek().kind != Tok::End) error("unexpected '" + peek().text + "'");
        return e;
    }

    /// Parses `x y : T, z : U` into the context.
    void declarations(LocalContext& ctx) {
        while (peek().kind != Tok::End) {
            std::vector<Token> ids;
            while (peek().kind == Tok::Ident && !is_keyword(peek().text)) ids.push_back(next());
            if (ids.empty()) error("expected a variable name");
            expect_op(":");
            KExpr pre = arrow();
            KExpr ty = elaborate(pre, env_);
            for (const auto& id : ids) ctx.declare(Name::parse(id.text), ty);
            ctx_ = &ctx;
            if (accept_op(",")) continue;
            if (accept_op(";")) continue;
            if (peek().kind != Tok::End) error("expected ','");
        }
    }

  private:
    std::vector<Token> toks_;
    std::size_t p_ = 0;
    const Environment& env_;
    const LocalContext* ctx_;
    std::vector<Name> bound_;  // innermost last

    const Token& peek(std::size_t k = 0) const { return toks_[std::min(p_ + k, toks_.size() - 1)]; }
    Token next() {
        Token t = peek();
        if (p_ < toks_.size() - 1) ++p_;
        return t;
    }
    bool is_op(const char* op, std::size_t k = 0) const { return peek(k).kind == Tok::Op && peek(k).text == op; }
    bool is_ident(const char* id) const { return peek().kind == Tok::Ident && peek().text == id; }
    bool accept_op(const char* op) {
        if (!is_op(op)) return false;
        next();
        return true;
    }
    void expect_op(const char* op) {
        if (!accept_op(op)) error(std::string("expected '") + op + "'");
    }
    [[noreturn]] void error(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }

    // expr := binder-form | arrow
    KExpr expr() {
        if (is_ident("fun")) return binder_form(ExprKind::Lam);
        if (is_ident("Pi") || is_ident("forall")) return binder_form(ExprKind::Pi);
        if (is_ident("exists")) return exists_form();
        if (is_ident("let")) return let_form();
        return arrow();
    }

    struct Binder {
        Name name;
        BinderInfo bi;
        KExpr type;
    };

    /// `x y : T` or a sequence of bracketed groups `(x : T) {y : U} [i : C]`.
    std::vector<Binder> binders() {
        std::vector<Binder> out;
        auto group = [&](BinderInfo bi, const char* close) {
            std::vector<Name> ids;
            while (peek().kind == Tok::Ident && !is_keyword(peek().text)) ids.push_back(Name::parse(next().text));
            if (ids.empty()) error("expected a binder name");
            if (!accept_op(":")) error("binder domain required: unelaborated binder domain not allowed at this layer");
            // Each later name in a group sits under the earlier ones.
            KExpr ty = expr();
            for (std::size_t k = 0; k < ids.size(); ++k) {
                out.push_back({ids[k], bi, lift_loose(ty, static_cast<std::uint32_t>(k))});
            }
            if (close) expect_op(close);
            for (const auto& id : ids) bound_.push_back(id);
        };
        if (is_op("(") || is_op("{") || is_op("[")) {
            while (is_op("(") || is_op("{") || is_op("[")) {
                std::string open = next().text;
                if (open == "(") group(BinderInfo::Default, ")");
                else if (open == "{") group(BinderInfo::Implicit, "}");
                else group(BinderInfo::InstImplicit, "]");
            }
        } else {
            group(BinderInfo::Default, nullptr);
        }
        return out;
    }

    KExpr close_binders(const std::vector<Binder>& bs, KExpr body, ExprKind kind) {
        for (std::size_t k = bs.size(); k-- > 0;) {
            const auto& b = bs[k];
            body = kind == ExprKind::Lam ? KExpr::lam(b.name, b.bi, b.type, body) : KExpr::pi(b.name, b.bi, b.type, body);
            bound_.pop_back();
        }
        return body;
    }

    KExpr binder_form(ExprKind kind) {
        next();
        auto bs = binders();
        expect_op(",");
        KExpr body = expr();
        return close_binders(bs, body, kind);
    }

    KExpr exists_form() {
        next();
        auto bs = binders();
        expect_op(",");
        KExpr body = expr();
        for (std::size_t k = bs.size(); k-- > 0;) {
            const auto& b = bs[k];
            body = KExpr::app(KExpr::constant(names::exists), KExpr::lam(b.name, b.bi, b.type, body));
            bound_.pop_back();
        }
        return body;
    }

    KExpr let_form() {
        next();
        if (peek().kind != Tok::Ident) error("expected a name after let");
        Name n = Name::parse(next().text);
        KExpr ty = KExpr::hole();
        if (accept_op(":")) ty = arrow();
        expect_op(":=");
        KExpr v = expr();
        if (!is_ident("in")) error("expected 'in'");
        next();
        bound_.push_back(n);
        KExpr body = expr();
        bound_.pop_back();
        return KExpr::let(n, ty, v, body);
    }

    // arrow := conj ('->' arrow)?
    KExpr arrow() {
        KExpr lhs = conj();
        if (accept_op("->")) {
            KExpr rhs = arrow();
            return KExpr::pi(Name{"a"}, BinderInfo::Default, lhs, lift_loose(rhs, 1));
        }
        return lhs;
    }

    // conj := rel ('/\' conj)?
    KExpr conj() {
        KExpr lhs = relation();
        if (accept_op("/\\")) {
            KExpr rhs = conj();
            return KExpr::app(KExpr::constant(names::and_), {lhs, rhs});
        }
        return lhs;
    }

    static std::optional<std::pair<Name, bool>> rel_op(const Token& t) {
        if (t.kind != Tok::Op) return std::nullopt;
        if (t.text == "<=") return std::make_pair(names::le, false);
        if (t.text == "<") return std::make_pair(names::lt, false);
        if (t.text == ">=") return std::make_pair(names::le, true);
        if (t.text == ">") return std::make_pair(names::lt, true);
        if (t.text == "=") return std::make_pair(names::eq, false);
        return std::nullopt;
    }

    // rel := sum (relop sum)*, chains become conjunctions: a < b < c.
    KExpr relation() {
        KExpr lhs = sum();
        std::vector<KExpr> links;
        while (auto op = rel_op(peek())) {
            next();
            KExpr rhs = sum();
            auto [name, swap] = *op;
            links.push_back(swap ? KExpr::app(KExpr::constant(name), {rhs, lhs})
                                 : KExpr::app(KExpr::constant(name), {lhs, rhs}));
            lhs = rhs;
        }
        if (links.empty()) return lhs;
        KExpr out = links.back();
        for (std::size_t k = links.size() - 1; k-- > 0;)
            out = KExpr::app(KExpr::constant(names::and_), {links[k], out});
        return out;
    }

    KExpr sum() {
        KExpr lhs = product();
        while (is_op("+") || is_op("-")) {
            bool plus = next().text == "+";
            KExpr rhs = product();
            lhs = KExpr::app(KExpr::constant(plus ? names::add : names::sub), {lhs, rhs});
        }
        return lhs;
    }

    KExpr product() {
        KExpr lhs = unary();
        while (is_op("*") || is_op("/")) {
            bool times = next().text == "*";
            KExpr rhs = unary();
            lhs = KExpr::app(KExpr::constant(times ? names::mul : names::div), {lhs, rhs});
        }
        return lhs;
    }

    KExpr unary() {
        if (accept_op("-")) return KExpr::app(KExpr::constant(names::neg), unary());
        return power();
    }

    KExpr power() {
        KExpr base = application();
        if (accept_op("^")) {
            KExpr exp = is_op("-") ? unary() : power();
            return KExpr::app(KExpr::constant(names::pow_nat), {base, exp});
        }
        return base;
    }

    bool starts_atom() const {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Ident:
                return !is_keyword(t.text) || t.text == "Prop" || t.text == "Type" || t.text == "Sort";
            case Tok::Number:
            case Tok::String:
                return true;
            case Tok::Op:
                return t.text == "(" || t.text == "@" || t.text == "#" || t.text == "_";
            case Tok::End:
                return false;
        }
        return false;
    }

    KExpr application() {
        KExpr f = atom();
        while (starts_atom()) f = KExpr::app(f, atom());
        return f;
    }

    Level level_atom() {
        const Token& t = peek();
        if (t.kind == Tok::Number) return Level::of_nat(std::stoull(next().text));
        if (t.kind == Tok::Ident && t.text == "max") {
            next();
            Level a = level_atom();
            Level b = level_atom();
            return Level::max(a, b);
        }
        if (t.kind == Tok::Ident) return Level::param(Name::parse(next().text));
        if (accept_op("(")) {
            Level l = level();
            expect_op(")");
            return l;
        }
        error("expected a universe level");
    }

    Level level() {
        Level l = level_atom();
        while (accept_op("+")) {
            if (peek().kind != Tok::Number) error("expected a number after '+' in a level");
            auto k = std::stoull(next().text);
            for (std::uint64_t i = 0; i < k; ++i) l = Level::succ(l);
        }
        return l;
    }

    KExpr numeral_literal(const std::string& text) {
        auto dot = text.find('.');
        if (dot == std::string::npos) return encode_numeral(mpz_class(text));
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        mpz_class num(digits);
        mpz_class den;
        mpz_ui_pow_ui(den.get_mpz_t(), 10, text.size() - dot - 1);
        return KExpr::app(KExpr::constant(names::div), {encode_numeral(num), encode_numeral(den)});
    }

    KExpr resolve(const Token& t) {
        Name n = Name::parse(t.text);
        for (std::size_t k = bound_.size(); k-- > 0;) {
            if (bound_[k] == n) return KExpr::var(static_cast<std::uint32_t>(bound_.size() - 1 - k));
        }
        if (ctx_) {
            if (auto l = ctx_->lookup(n)) return *l;
        }
        if (t.text == "\xE2\x84\x9D") return KExpr::constant(names::real);  // ℝ
        if (t.text == "\xE2\x84\x95") return KExpr::constant(names::nat);   // ℕ
        if (t.text == "\xE2\x84\xA4") return KExpr::constant(names::int_);  // ℤ
        if (env_.sig.contains(n)) return KExpr::constant(n);
        throw UnknownConstant(n);
    }

    std::vector<Level> level_list() {
        std::vector<Level> ls;
        if (!accept_op("}")) {
            do {
                ls.push_back(level());
            } while (accept_op(","));
            expect_op("}");
        }
        return ls;
    }

    KExpr atom() {
        const Token& t = peek();
        if (t.kind == Tok::Number) return numeral_literal(next().text);
        if (t.kind == Tok::String) return string_literal(next().text);
        if (t.kind == Tok::Ident) {
            if (t.text == "Prop") {
                next();
                return KExpr::prop();
            }
            if (t.text == "Type") {
                next();
                return KExpr::sort(Level::of_nat(1));
            }
            if (t.text == "Sort") {
                next();
                return KExpr::sort(level_atom());
            }
            Token id = next();
            KExpr e = resolve(id);
            if (is_op(".{")) {
                next();
                if (!e.is(ExprKind::Const)) error("universe levels on a non-constant");
                e = KExpr::constant(e.name(), level_list());
            }
            return e;
        }
        if (accept_op("@")) {
            if (peek().kind != Tok::Ident) error("expected a constant after '@'");
            Token id = next();
            Name n = Name::parse(id.text);
            if (!env_.sig.contains(n)) throw UnknownConstant(n);
            std::vector<Level> ls;
            if (is_op(".{")) {
                next();
                ls = level_list();
            }
            return KExpr::explicit_constant(n, ls);
        }
        if (accept_op("#")) {
            if (peek().kind != Tok::Number) error("expected an index after '#'");
            return KExpr::var(static_cast<std::uint32_t>(std::stoul(next().text)));
        }
        if (accept_op("_")) return KExpr::hole();
        if (accept_op("(")) {
            KExpr e = expr();
            if (accept_op(":")) {
                KExpr ty = expr();
                expect_op(")");
                return KExpr::ascribe(e, ty);
            }
            expect_op(")");
            return e;
        }
        if (t.kind == Tok::End) error("unexpected end of input");
        error("unexpected '" + t.text + "'");
    }
};

}  // namespace

KExpr parse_pexpr(std::string_view text, const Environment& env, const LocalContext* ctx) {
    Parser p(text, env, ctx);
    return p.parse_all();
}

KExpr parse_kexpr(std::string_view text, const Environment& env, const LocalContext* ctx,
                  const std::optional<KExpr>& expected) {
    return elaborate(parse_pexpr(text, env, ctx), env, expected);
}

void declare_context(std::string_view text, const Environment& env, LocalContext& ctx) {
    std::string t(text);
    for (auto& c : t)
        if (c == ';') c = ',';
    Parser p(t, env, &ctx);
    p.declarations(ctx);
}

}  // namespace casbridge::kexpr
