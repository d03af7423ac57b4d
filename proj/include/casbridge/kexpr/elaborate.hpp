#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "casbridge/kexpr/context.hpp"
#include "casbridge/kexpr/expr.hpp"

namespace casbridge::kexpr {

class TypeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ElaborationFailed : public std::runtime_error {
  public:
    ElaborationFailed(std::string location, std::string reason)
        : std::runtime_error("elaboration failed at " + location + ": " + reason),
          location(std::move(location)),
          reason(std::move(reason)) {}
    std::string location;
    std::string reason;
};

/// No expected type and nothing in the term fixes the carrier, e.g. a bare `2`.
class AmbiguousType : public ElaborationFailed {
  public:
    using ElaborationFailed::ElaborationFailed;
};

/// Type of a fully elaborated term. Locals carry their own types; loose bound
/// variables are rejected. Checks argument types against binder domains.
KExpr infer_type(const KExpr& e, const Environment& env);

/// Head normal form: beta reduction and let unfolding at the head.
KExpr whnf(const KExpr& e);

/// Structural equality up to beta, let, level normalization and `Prop` = `Sort 0`.
bool is_def_eq(const KExpr& a, const KExpr& b, const Environment& env);

/// Fills holes and omitted implicit/instance arguments. Type arguments come from
/// unification with argument types and the expected type; instance arguments
/// come from the instance table once their carrier is known.
KExpr elaborate(const KExpr& pre, const Environment& env, const std::optional<KExpr>& expected = std::nullopt);

/// True for Prop-valued terms such as `x <= 1`.
bool is_proposition(const KExpr& e, const Environment& env);

}  // namespace casbridge::kexpr
