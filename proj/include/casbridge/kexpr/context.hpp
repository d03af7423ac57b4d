#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "casbridge/kexpr/expr.hpp"
#include "casbridge/kexpr/signature.hpp"

namespace casbridge::kexpr {

/// Signature plus instance table; what the parser and elaborator resolve against.
struct Environment {
    Signature sig = Signature::builtin();
    InstanceTable instances = InstanceTable::builtin();
};

/// Local hypotheses and variables in scope, e.g. `x : real`.
/// Unique names are `<context id>.<counter>`, like the `17.27` of a reflected local.
class LocalContext {
  public:
    LocalContext();

    /// Declares a new local shadowing earlier ones with the same pretty name.
    KExpr declare(const Name& pretty, const KExpr& type, BinderInfo bi = BinderInfo::Default);
    /// A fresh local that is not recorded in the context.
    KExpr fresh(const Name& pretty, const KExpr& type, BinderInfo bi = BinderInfo::Default);
    Name fresh_unique();

    std::optional<KExpr> lookup(const Name& pretty) const;
    const std::vector<KExpr>& locals() const { return locals_; }
    std::uint64_t id() const { return id_; }

  private:
    std::uint64_t id_;
    std::uint64_t counter_ = 0;
    std::vector<KExpr> locals_;
};

}  // namespace casbridge::kexpr
