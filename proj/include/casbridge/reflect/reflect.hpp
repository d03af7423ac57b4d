#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/kexpr/expr.hpp"

namespace casbridge::reflect {

using cexpr::CExpr;
using kexpr::KExpr;

/// Verbatim encoding with the Lean* head symbols: nothing is stripped, so
/// `x + x` keeps its type argument and instance.
CExpr encode_kernel_expr(const KExpr& e);
CExpr encode_level(const kexpr::Level& l);
std::string binder_info_text(kexpr::BinderInfo bi);

/// One `LeanForm[pattern] := template` equation. In the template, `LeanForm[v]`
/// translates the binding of v, a bare v copies it verbatim, `LeanFresh[n]` is
/// the fresh symbol for a binder named by n, `LeanFormUnder[b]` translates b
/// with that symbol pushed on the binder environment and `LeanFormUnder[b, t]`
/// pushes the template value t instead.
struct ForwardRule {
    CExpr pattern;
    std::optional<CExpr> condition;  // PropBody[v] is the only predicate
    CExpr tmpl;
};

class MalformedRule : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Rules are kept newest first; the first match wins.
class ForwardRuleSet {
  public:
    ForwardRuleSet() = default;
    static const ForwardRuleSet& defaults();

    const std::vector<ForwardRule>& rules() const { return rules_; }
    /// Parses `LeanForm[p] := t` lines (# comments, brackets may span lines)
    /// and registers them in file order.
    void load(std::string_view text);
    void add(ForwardRule rule);

  private:
    std::vector<ForwardRule> rules_;
};

/// Validates template slots and returns a set where the new rule takes precedence.
ForwardRuleSet register_forward_rule(const ForwardRuleSet& rules, const CExpr& pattern, const CExpr& tmpl);

/// Parses one rule equation `LeanForm[p] := t` or `LeanForm[p /; c] := t`.
ForwardRule parse_forward_rule(const CExpr& equation);

class UnboundVariable : public std::runtime_error {
  public:
    explicit UnboundVariable(std::size_t index)
        : std::runtime_error("LeanVar[" + std::to_string(index) + "] is not bound by the environment"), index(index) {}
    std::size_t index;
};

/// Symbols standing for enclosing binders, innermost first.
using BinderEnv = std::vector<CExpr>;

/// Rewrites familiar patterns of the encoding into Inactive-guarded CAS terms.
/// Unmatched LeanApp nodes and non-Lean applications are descended into;
/// every other unmatched node is left verbatim.
CExpr lean_form(const CExpr& e, const BinderEnv& env, const ForwardRuleSet& rules);
CExpr lean_form(const CExpr& e, const ForwardRuleSet& rules = ForwardRuleSet::defaults());

using Evaluator = std::function<CExpr(const CExpr&)>;

/// `Inactive[f][args]` becomes `f[args]` everywhere.
CExpr strip_inactive(const CExpr& e);
/// Strips every Inactive wrapper, then evaluates.
CExpr activate(const CExpr& e, const Evaluator& eval);

class MissingEntry : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

struct Collapsed {
    CExpr expr;
    std::map<std::string, CExpr> table;  // opaque symbol -> encoded subterm
};

/// Replaces each maximal untranslated Lean* subtree by a short symbol ($k1, $k2, ...);
/// equal subtrees share a symbol.
Collapsed collapse(const CExpr& e);
CExpr inflate(const CExpr& e, const std::map<std::string, CExpr>& table);

}  // namespace casbridge::reflect
