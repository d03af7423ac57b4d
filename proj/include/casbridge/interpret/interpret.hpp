#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/kexpr/context.hpp"
#include "casbridge/kexpr/elaborate.hpp"
#include "casbridge/kexpr/expr.hpp"

namespace casbridge::interpret {

using cexpr::CExpr;
using kexpr::KExpr;

/// Symbol name to the placeholder local standing for a bound variable.
using TransEnv = std::map<std::string, KExpr>;

class NoTranslation : public std::runtime_error {
  public:
    explicit NoTranslation(const CExpr& subterm)
        : std::runtime_error("no translation for " + cexpr::print_fullform(subterm)), subterm(subterm) {}
    CExpr subterm;
};

/// Translates a subterm with the rule set in use; throws NoTranslation.
using Recurse = std::function<KExpr(const TransEnv&, const CExpr&)>;
/// A rule fails by returning nullopt or by letting NoTranslation escape.
using KeyedRule = std::function<std::optional<KExpr>(const Recurse&, const TransEnv&, const std::vector<CExpr>&)>;
using UnkeyedRule =
    std::function<std::optional<KExpr>(const Recurse&, const TransEnv&, const CExpr& head, const std::vector<CExpr>&)>;

enum class BinderKind { Lam, Pi };

/// Sym, keyed and unkeyed rules, each class newest first, plus the symbols
/// treated as binders (`Function[x, body]` or `Function[{x, y}, body]`).
class BackRuleSet {
  public:
    static const BackRuleSet& defaults();

    const std::vector<std::pair<std::string, KExpr>>& sym_rules() const { return sym_; }
    const std::vector<KeyedRule>& keyed_rules(const std::string& key) const;
    const std::vector<UnkeyedRule>& unkeyed_rules() const { return unkeyed_; }
    std::optional<BinderKind> binder(const std::string& head) const;

    void add_sym(std::string sym, KExpr value);
    void add_keyed(std::string key, KeyedRule rule);
    void add_unkeyed(UnkeyedRule rule);
    void add_binder(std::string head, BinderKind kind);

  private:
    std::vector<std::pair<std::string, KExpr>> sym_;
    std::map<std::string, std::vector<KeyedRule>> keyed_;
    std::vector<UnkeyedRule> unkeyed_;
    std::map<std::string, BinderKind> binders_;
};

BackRuleSet register_sym_rule(const BackRuleSet& rules, const std::string& sym, const KExpr& value);
BackRuleSet register_keyed_rule(const BackRuleSet& rules, const std::string& key, KeyedRule rule);
BackRuleSet register_unkeyed_rule(const BackRuleSet& rules, UnkeyedRule rule);
BackRuleSet register_binder(const BackRuleSet& rules, const std::string& head, BinderKind kind);

/// Keyed Plus rule that folds `add` with numeric summands moved after the
/// others, so `Plus[-1, x]` reads back as `x + -1`.
KeyedRule plus_constants_last();

/// C-expression to pre-expression. Integers become untyped numerals (negatives
/// as `neg` of the positive numeral), reals and rationals become exact
/// quotients, strings become string literals and binder heads abstract over a
/// placeholder local.
KExpr pexpr_of_mmexpr(const TransEnv& env, const CExpr& e, const BackRuleSet& rules = BackRuleSet::defaults());

/// Exact inverse of encode_kernel_expr. Symbols bound in env are allowed;
/// any other non-encoding node throws NoTranslation.
KExpr expr_of_mmexpr(const TransEnv& env, const CExpr& e);

using kexpr::elaborate;

/// pexpr_of_mmexpr followed by elaboration.
KExpr back_translate(const CExpr& e, const kexpr::Environment& env, const std::optional<KExpr>& expected = std::nullopt,
                     const BackRuleSet& rules = BackRuleSet::defaults());

}  // namespace casbridge::interpret
