#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "casbridge/kexpr/expr.hpp"

namespace casbridge::kexpr {

namespace names {
inline const Name real{"real"};
inline const Name int_{"int"};
inline const Name nat{"nat"};
inline const Name prop{"Prop"};
inline const Name string{"string"};
inline const Name list{"list"};
inline const Name list_nil{"list", "nil"};
inline const Name list_cons{"list", "cons"};
inline const Name add{"add"};
inline const Name mul{"mul"};
inline const Name neg{"neg"};
inline const Name sub{"sub"};
inline const Name div{"div"};
inline const Name pow_nat{"pow_nat"};
inline const Name le{"le"};
inline const Name lt{"lt"};
inline const Name eq{"eq"};
inline const Name zero{"zero"};
inline const Name one{"one"};
inline const Name bit0{"bit0"};
inline const Name bit1{"bit1"};
inline const Name and_{"and"};
inline const Name exists{"exists"};
inline const Name false_{"false"};
inline const Name has_add{"has_add"};
inline const Name has_mul{"has_mul"};
inline const Name has_neg{"has_neg"};
inline const Name has_sub{"has_sub"};
inline const Name has_div{"has_div"};
inline const Name has_pow_nat{"has_pow_nat"};
inline const Name has_le{"has_le"};
inline const Name has_lt{"has_lt"};
inline const Name has_zero{"has_zero"};
inline const Name has_one{"has_one"};
/// Prefix of string-literal constants: `string.lit.«text»`.
inline const Name string_lit{"string", "lit"};
}  // namespace names

struct Declaration {
    Name name;
    std::vector<Name> univ_params;
    KExpr type;
};

class UnknownConstant : public std::runtime_error {
  public:
    explicit UnknownConstant(const Name& n)
        : std::runtime_error("unknown constant '" + n.to_string() + "'"), name(n) {}
    Name name;
};

/// Declared constants with their types. Built-in arithmetic follows the
/// type-class style signature `add {u} : Pi {A : Type u} [has_add A], A -> A -> A`.
class Signature {
  public:
    Signature() = default;
    static Signature builtin();

    /// Adds or replaces a user declaration. The type must be closed.
    void declare(Name name, KExpr type, std::vector<Name> univ_params = {});

    const Declaration* find(const Name& n) const;
    const Declaration& get(const Name& n) const;
    bool contains(const Name& n) const { return find(n) != nullptr; }

    /// Declared type with universe parameters replaced by `levels`.
    KExpr instantiate_type(const Declaration& d, const std::vector<Level>& levels) const;

    const std::map<Name, Declaration>& declarations() const { return decls_; }

  private:
    std::map<Name, Declaration> decls_;
};

bool is_string_literal(const KExpr& e);
KExpr string_literal(const std::string& text);
std::string string_literal_text(const KExpr& e);

/// Instance lookup keyed by (class, carrier type); stands in for type-class resolution.
class InstanceTable {
  public:
    static InstanceTable builtin();

    void add(Name cls, Name carrier, Name instance);
    std::optional<Name> find(const Name& cls, const Name& carrier) const;

    const std::map<std::pair<Name, Name>, Name>& entries() const { return table_; }

  private:
    std::map<std::pair<Name, Name>, Name> table_;
};

/// Instance constant name for a class at a base type, e.g. (has_add, real) -> real.has_add.
Name instance_name(const Name& cls, const Name& carrier);

/// The arithmetic carrier types with full instance coverage.
const std::vector<Name>& base_carriers();

}  // namespace casbridge::kexpr
