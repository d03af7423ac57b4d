#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/poly/poly.hpp"

namespace casbridge::engine {

using cexpr::CExpr;
using poly::Assignment;
using poly::LinConstraint;
using poly::Poly;
using poly::Rational;

// ---- canonical forms

/// Term order used for the arguments of Plus and Times: numbers first by value,
/// then terms compared by their largest base, lower powers first, with the
/// numeric coefficient as the last tie break. `Plus[1, Times[-2, x], Power[x, 2]]`
/// is sorted.
int canonical_compare(const CExpr& a, const CExpr& b);

/// Flattening, like-term collection and sorting; the result is never a Plus
/// with fewer than two arguments.
CExpr make_plus(std::vector<CExpr> terms);
CExpr make_times(std::vector<CExpr> factors);
CExpr make_power(const CExpr& base, const CExpr& exponent);

// ---- polynomial view

class NotPolynomial : public std::invalid_argument {
  public:
    explicit NotPolynomial(const CExpr& subterm)
        : std::invalid_argument("not a polynomial: " + cexpr::print_fullform(subterm)), subterm(subterm) {}
    CExpr subterm;
};

/// Non-polynomial subterms standing in as variables. Symbols keep their own
/// name; anything else gets a `#n` name that no symbol can have.
class Atoms {
  public:
    std::string name_of(const CExpr& atom);
    CExpr atom(const std::string& name) const;

  private:
    std::map<CExpr, std::string, cexpr::CExprLess> names_;
    std::map<std::string, CExpr> atoms_;
};

/// Plus, Times, Power with natural exponents, numbers and symbols only.
Poly to_poly(const CExpr& e);
/// Same, but every other subterm becomes an atom.
Poly to_poly(const CExpr& e, Atoms& atoms);
/// Canonical expanded CExpr. Variables not known to atoms are read as symbols.
CExpr from_poly(const Poly& p, const Atoms& atoms = {});

// ---- factorization

/// Factors with multiplicities whose product is p. A constant factor other than
/// 1 comes first with multiplicity 1; the others are primitive with integer
/// coefficients and a positive leading coefficient.
std::vector<std::pair<Poly, unsigned>> factor(const Poly& p);
/// Product of the factors as a canonical CExpr, e.g. `Power[Plus[-1, x], 2]`.
CExpr factor_expr(const std::vector<std::pair<Poly, unsigned>>& factors, const Atoms& atoms = {});

/// Distinct rational roots in increasing order.
std::vector<Rational> rational_roots(const poly::UPoly& p);

/// Resultant with respect to var.
Poly resultant(const Poly& p, const Poly& q, const std::string& var);

// ---- solving

/// Exact rational solutions of `p = 0` for all p, covering every listed
/// variable. Incomplete: returns what substitution, rational roots and
/// resultants can reach, each one checked against the input.
std::vector<Assignment> solve(const std::vector<Poly>& equations, const std::vector<std::string>& vars);

class VariableLimit : public std::runtime_error {
  public:
    explicit VariableLimit(std::size_t n)
        : std::runtime_error("Fourier-Motzkin limited to " + std::to_string(n) + " variables"), limit(n) {}
    std::size_t limit;
};

struct LinearOptions {
    std::size_t max_variables = 16;
    std::size_t max_constraints = 20000;
};

/// A satisfying assignment (covering vars and every variable in the
/// constraints), or nullopt when the system is infeasible. Exact
/// Fourier-Motzkin elimination.
std::optional<Assignment> find_instance(const std::vector<LinConstraint>& constraints,
                                        const std::vector<std::string>& vars = {}, const LinearOptions& opts = {});

/// Coefficients c with c_i >= 0 on inequality rows such that sum c_i p_i is a
/// constant q with q > 0, or q >= 0 with positive weight on a strict row.
/// Scaled to coprime integers.
std::optional<std::vector<Rational>> farkas_coefficients(const std::vector<LinConstraint>& hyps,
                                                         const LinearOptions& opts = {});

}  // namespace casbridge::engine
