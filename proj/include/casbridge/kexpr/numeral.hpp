#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>

#include "casbridge/kexpr/expr.hpp"
#include "casbridge/kexpr/signature.hpp"

namespace casbridge::kexpr {

class NotANumeral : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Binary numeral over `zero`, `one`, `bit0`, `bit1` with no type arguments,
/// e.g. 6 -> bit0 (bit1 one). This is the pre-expression form.
KExpr encode_numeral(const mpz_class& n);

/// Fully elaborated numeral at `carrier` (a base type constant such as real),
/// with the carrier's instances applied: bit0.{0} real real.has_add (...).
KExpr encode_numeral(const mpz_class& n, const Name& carrier, const InstanceTable& instances);

/// Accepts both the untyped and the elaborated spine.
mpz_class decode_numeral(const KExpr& e);

/// Same as decode_numeral but returns nullopt instead of throwing.
std::optional<mpz_class> try_decode_numeral(const KExpr& e);

}  // namespace casbridge::kexpr
