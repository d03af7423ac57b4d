#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "casbridge/kexpr/level.hpp"
#include "casbridge/kexpr/name.hpp"

namespace casbridge::kexpr {

enum class BinderInfo { Default, Implicit, InstImplicit };

/// Expression kinds of the kernel language. `Hole` and `Ascribe` only occur in
/// pre-expressions and never survive elaboration.
enum class ExprKind { Var, Sort, Const, MVar, Local, App, Lam, Pi, Let, Hole, Ascribe };

/// Immutable kernel expression with shared subterms and de Bruijn bound variables.
class KExpr {
  public:
    KExpr();  // empty placeholder; every accessor requires a non-empty expression
    bool empty() const { return node_ == nullptr; }

    static KExpr var(std::uint32_t index);
    static KExpr sort(Level level);
    static KExpr constant(Name name, std::vector<Level> levels = {});
    /// A constant whose implicit arguments are supplied explicitly (pre-expressions only).
    static KExpr explicit_constant(Name name, std::vector<Level> levels);
    static KExpr mvar(Name name, KExpr type);
    static KExpr local(Name unique, Name pretty, BinderInfo bi, KExpr type);
    static KExpr app(KExpr fn, KExpr arg);
    static KExpr app(KExpr fn, const std::vector<KExpr>& args);
    static KExpr lam(Name name, BinderInfo bi, KExpr domain, KExpr body);
    static KExpr pi(Name name, BinderInfo bi, KExpr domain, KExpr body);
    static KExpr let(Name name, KExpr type, KExpr value, KExpr body);
    static KExpr hole();
    static KExpr ascribe(KExpr term, KExpr type);

    static KExpr prop() { return sort(Level::zero()); }

    ExprKind kind() const;
    bool is(ExprKind k) const { return kind() == k; }

    std::uint32_t var_index() const;
    const Level& sort_level() const;
    /// Constant name, mvar name, local unique name, or binder name.
    const Name& name() const;
    const Name& pretty_name() const;  // locals
    const std::vector<Level>& levels() const;
    bool is_explicit() const;  // constants
    BinderInfo binder_info() const;
    /// Type of an mvar or local; domain of a binder; let type; ascription type.
    const KExpr& type() const;
    const KExpr& fn() const;
    const KExpr& arg() const;
    const KExpr& body() const;     // binders and let
    const KExpr& value() const;    // let
    const KExpr& term() const;     // ascription

    /// Upper bound on loose bound variables: var(i) at depth d contributes i - d + 1.
    std::uint32_t loose_bvar_range() const;
    bool has_loose_bvars() const { return loose_bvar_range() > 0; }
    bool has_mvar() const;
    bool has_local() const;
    bool is_pre_only() const;  // contains Hole, Ascribe or explicit constants

    const void* identity() const { return node_.get(); }

    friend bool operator==(const KExpr& a, const KExpr& b);

  private:
    struct Node;
    explicit KExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// Head of an application spine and its arguments in order.
KExpr get_app_fn(const KExpr& e);
std::vector<KExpr> get_app_args(const KExpr& e);
bool is_const_app(const KExpr& e, const Name& head, std::size_t nargs);

/// Replaces var(0) of `body` by `value`, shifting deeper indices down by one.
KExpr instantiate(const KExpr& body, const KExpr& value);
/// Replaces var(i) for i < values.size() with values[i] (values[0] is innermost).
KExpr instantiate_rev(const KExpr& body, const std::vector<KExpr>& values);
/// Abstracts the local `l` (matched by unique name) into var(0) with correct shifting.
KExpr abstract_local(const KExpr& e, const KExpr& l);
/// Adds `amount` to every loose var with index >= `cutoff`.
KExpr lift_loose(const KExpr& e, std::uint32_t amount, std::uint32_t cutoff = 0);

/// True when every var(i) sits under at least i+1 binders.
bool is_closed(const KExpr& e);
/// Checks every var(i) at binder depth d satisfies i < d + outer_depth.
bool is_well_scoped(const KExpr& e, std::uint32_t outer_depth = 0);
/// Checks that locals with equal unique names agree on pretty name, binder info and type.
bool locals_consistent(const KExpr& e);

/// Fully explicit debug rendering, e.g. `add.{0} real real.has_add #0 #0`.
std::string debug_string(const KExpr& e);

std::string to_string(BinderInfo bi);

}  // namespace casbridge::kexpr
