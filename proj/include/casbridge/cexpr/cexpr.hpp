#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace casbridge::cexpr {

enum class CKind { Sym, Str, Int, App, Real };

/// Untyped CAS expression: symbols, strings, integers, exact decimals and
/// head applications such as `Plus[2, 3]` or `Inactive[Plus][x, y]`.
class CExpr {
  public:
    CExpr();  // the symbol Null

    static CExpr sym(std::string name);
    static CExpr str(std::string text);
    static CExpr integer(mpz_class value);
    static CExpr integer(long value) { return integer(mpz_class(value)); }
    /// Decimal literal kept as written, e.g. `-0.001` or `1.5*^3`. Throws on malformed text.
    static CExpr real(std::string text);
    static CExpr app(CExpr head, std::vector<CExpr> args);
    static CExpr app(std::string head, std::vector<CExpr> args) { return app(sym(std::move(head)), std::move(args)); }
    static CExpr list(std::vector<CExpr> items) { return app("List", std::move(items)); }
    /// Integer when the denominator is one, otherwise `Rational[p, q]`.
    static CExpr rational(const mpq_class& q);

    CKind kind() const;
    bool is(CKind k) const { return kind() == k; }
    bool is_sym(std::string_view name) const;
    /// Application whose head is the symbol `name` (any arity, or exactly `arity`).
    bool has_head(std::string_view name) const;
    bool has_head(std::string_view name, std::size_t arity) const;

    const std::string& text() const;  // symbol name, string contents, or decimal text
    const mpz_class& int_value() const;
    const CExpr& head() const;
    const std::vector<CExpr>& args() const;
    const CExpr& arg(std::size_t i) const { return args().at(i); }

    /// Exact value of an integer, `Rational[p, q]` or decimal; nullopt otherwise.
    std::optional<mpq_class> number() const;
    mpq_class real_value() const;

    std::size_t hash() const;
    friend bool operator==(const CExpr& a, const CExpr& b);
    friend bool operator!=(const CExpr& a, const CExpr& b) { return !(a == b); }

  private:
    struct Node;
    explicit CExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// Structural total order: numbers, strings, symbols, then applications.
int compare(const CExpr& a, const CExpr& b);
struct CExprLess {
    bool operator()(const CExpr& a, const CExpr& b) const { return compare(a, b) < 0; }
};

class SyntaxError : public std::runtime_error {
  public:
    SyntaxError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

/// Bracket syntax plus the usual shorthands: `{a, b}`, `x_`, `_h`, infix
/// arithmetic and relations, `->`, `/;`, `e // f`, `:=` and `=`.
CExpr parse_fullform(std::string_view text);
/// Fully bracketed form; lists print with braces.
std::string print_fullform(const CExpr& e);
/// The constructor view, e.g. `app (sym "Power") [app (sym "Plus") [mint -1, X], mint 2]`.
std::string print_repr(const CExpr& e);

bool is_symbol_name(std::string_view s);

// ---- patterns ----

using Bindings = std::map<std::string, CExpr>;

/// Pattern variables occurring in `p` (`x_` written as `Pattern[x, Blank[]]`).
std::vector<std::string> pattern_variables(const CExpr& p);

/// First-match structural matching. `Blank[]` matches anything, `Blank[h]`
/// anything with head h (Integer, Symbol, String, Real for atoms). Repeated
/// variables must bind syntactically equal subterms.
std::optional<Bindings> match(const CExpr& pattern, const CExpr& e, const Bindings& seed = {});

/// Replaces symbols named in `b` by their bindings.
CExpr substitute(const CExpr& e, const Bindings& b);

/// Rebuilds `e` top-down: a node for which `f` returns a value is replaced and
/// not descended into.
CExpr transform(const CExpr& e, const std::function<std::optional<CExpr>(const CExpr&)>& f);

}  // namespace casbridge::cexpr

template <>
struct std::hash<casbridge::cexpr::CExpr> {
    std::size_t operator()(const casbridge::cexpr::CExpr& e) const { return e.hash(); }
};
