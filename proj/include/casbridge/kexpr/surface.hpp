#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "casbridge/kexpr/context.hpp"
#include "casbridge/kexpr/expr.hpp"

namespace casbridge::kexpr {

class SyntaxError : public std::runtime_error {
  public:
    SyntaxError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
    std::size_t position;
};

/// Parses surface syntax into a pre-expression: implicit arguments are omitted,
/// numerals are untyped, `_` is a hole and `(e : T)` an ascription.
/// Identifiers resolve to bound variables, then `ctx` locals, then constants.
KExpr parse_pexpr(std::string_view text, const Environment& env, const LocalContext* ctx = nullptr);

/// parse_pexpr followed by elaboration.
KExpr parse_kexpr(std::string_view text, const Environment& env, const LocalContext* ctx = nullptr,
                  const std::optional<KExpr>& expected = std::nullopt);

/// Conventional notation with implicit arguments hidden, e.g. `(x + -1)^2`.
/// Adds ascriptions where the carrier type could not be re-inferred, so that
/// parsing the output in the same context gives back the same term.
std::string print_kexpr(const KExpr& e, const Environment& env);
std::string print_kexpr(const KExpr& e);

/// Parses a context declaration list such as `x : real, y : real` (commas or
/// semicolons separate entries; `x y : real` declares both).
void declare_context(std::string_view text, const Environment& env, LocalContext& ctx);

}  // namespace casbridge::kexpr
