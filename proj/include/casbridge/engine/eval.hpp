#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/reflect/reflect.hpp"

namespace casbridge::engine {

using cexpr::CExpr;

class RecursionLimit : public std::runtime_error {
  public:
    explicit RecursionLimit(std::size_t depth)
        : std::runtime_error("recursion limit " + std::to_string(depth) + " exceeded"), depth(depth) {}
    std::size_t depth;
};

class ContextCleared : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

enum class ContextMode { Scoped, Global };

/// One `lhs = rhs` or `lhs := rhs` definition.
struct Definition {
    CExpr lhs;
    CExpr rhs;
    bool delayed = false;
};

/// User definitions plus the forward rules that LeanConvert uses. Scoped
/// contexts are copies of a global one that are cleared after one request.
class EvalContext {
  public:
    explicit EvalContext(ContextMode mode = ContextMode::Global);

    /// Fresh id, scoped mode, same definitions.
    EvalContext scoped_copy() const;

    std::uint64_t id() const { return id_; }
    ContextMode mode() const { return mode_; }

    /// Symbol definitions (`x = 3`) and down values (`f[x_] := x^2`). A
    /// definition with an identical left-hand side replaces the older one.
    void define(const Definition& d);
    const std::vector<Definition>* own_value(const std::string& sym) const;
    const std::vector<Definition>* down_values(const std::string& head) const;
    std::size_t definition_count() const;

    const reflect::ForwardRuleSet& forward_rules() const { return forward_; }
    void add_forward_rule(reflect::ForwardRule rule) { forward_.add(std::move(rule)); }

    void clear();
    bool cleared() const { return cleared_; }
    /// Throws ContextCleared on a cleared context.
    void check_usable() const;

    std::size_t recursion_limit = 10000;

  private:
    std::uint64_t id_;
    ContextMode mode_;
    bool cleared_ = false;
    std::map<std::string, std::vector<Definition>> own_;
    std::map<std::string, std::vector<Definition>> down_;
    reflect::ForwardRuleSet forward_;
};

/// Innermost-first evaluation to a fixed point: numeric folding and canonical
/// Plus/Times/Power, user definitions, and the commands Factor, Expand, Solve,
/// FindInstance, LeanConvert and Activate. Anything under Inactive is left alone.
CExpr eval(const CExpr& e, EvalContext& ctx);
CExpr eval(const CExpr& e);

}  // namespace casbridge::engine
