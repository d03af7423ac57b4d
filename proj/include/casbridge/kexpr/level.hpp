#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "casbridge/kexpr/name.hpp"

namespace casbridge::kexpr {

enum class LevelKind { Zero, Succ, Param, Max };

/// Universe level: zero, succ, a named parameter, or max of two levels.
class Level {
  public:
    Level();  // zero

    static Level zero() { return Level(); }
    static Level succ(Level l);
    static Level param(Name n);
    static Level max(Level a, Level b);
    static Level of_nat(std::uint64_t n);

    LevelKind kind() const;
    const Level& lhs() const;  // succ operand or max lhs
    const Level& rhs() const;  // max rhs
    const Name& name() const;  // param name

    /// Numeric value of a closed level (max is evaluated).
    std::optional<std::uint64_t> to_nat() const;
    bool has_param() const;

    /// Folds closed subterms to numerals and flattens trivial max; keeps parameters.
    Level normalize() const;
    std::string to_string() const;

    friend bool operator==(const Level& a, const Level& b);

  private:
    struct Node;
    explicit Level(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

/// Equality after normalization, so `max 1 0` equals `1`.
bool level_equiv(const Level& a, const Level& b);

}  // namespace casbridge::kexpr
