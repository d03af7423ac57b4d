#pragma once

#include <gmpxx.h>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace casbridge::poly {

using Rational = mpq_class;
using Assignment = std::map<std::string, Rational>;

/// n/d in lowest terms (mpq_class's two-argument constructor does not reduce).
Rational ratio(const mpz_class& n, const mpz_class& d);

/// `p/q` or `p`.
std::string to_string(const Rational& q);
/// Accepts `p`, `p/q` and decimals such as `-0.25`.
Rational parse_rational(const std::string& text);

/// Variable name to positive exponent.
using Monomial = std::map<std::string, unsigned>;

unsigned degree(const Monomial& m);
Monomial operator*(const Monomial& a, const Monomial& b);

/// Sparse multivariate polynomial with exact rational coefficients. Zero
/// coefficients are never stored, so equal polynomials have equal term maps.
class Poly {
  public:
    Poly() = default;
    Poly(const Rational& c);  // NOLINT: constants convert implicitly
    Poly(long c) : Poly(Rational(c)) {}
    static Poly variable(const std::string& name);
    static Poly monomial(const Monomial& m, const Rational& c);

    const std::map<Monomial, Rational>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_term() const;
    Rational coefficient(const Monomial& m) const;
    unsigned total_degree() const;
    unsigned degree(const std::string& var) const;
    std::set<std::string> variables() const;
    /// Largest monomial in lexicographic order (variables compared by name).
    std::pair<Monomial, Rational> leading_term() const;

    Poly operator-() const;
    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, const Poly& b) { return a *= b; }
    Poly pow(unsigned k) const;

    /// Value when every variable is assigned; throws std::out_of_range otherwise.
    Rational evaluate(const Assignment& a) const;
    /// Substitutes the assigned variables, leaving the rest symbolic.
    Poly partial_evaluate(const Assignment& a) const;
    Poly substitute(const std::string& var, const Poly& value) const;
    /// Coefficients of var^0, var^1, ... as polynomials in the other variables.
    std::vector<Poly> coefficients_in(const std::string& var) const;

    std::string to_string() const;

    friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  private:
    void add_term(const Monomial& m, const Rational& c);
    std::map<Monomial, Rational> terms_;
};

class NotExactDivision : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Exact multivariate division; throws NotExactDivision when a remainder is left.
Poly divide_exact(const Poly& a, const Poly& b);

// ---- dense univariate helpers (coefficient of x^i at index i) ----

using UPoly = std::vector<Rational>;

void trim(UPoly& p);
UPoly to_upoly(const Poly& p, const std::string& var);  // p must not mention other variables
Poly from_upoly(const UPoly& p, const std::string& var);
UPoly derivative(const UPoly& p);
/// Quotient and remainder; b must be nonzero.
std::pair<UPoly, UPoly> divmod(const UPoly& a, const UPoly& b);
/// Monic greatest common divisor.
UPoly gcd(UPoly a, UPoly b);
Rational evaluate(const UPoly& p, const Rational& x);

// ---- linear constraints ----

enum class Relation { Le0, Lt0, Eq0 };

std::string to_string(Relation r);

class NonLinear : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// `poly REL 0` with poly of total degree at most one.
struct LinConstraint {
    LinConstraint(Poly p, Relation r);
    Poly poly;
    Relation rel;

    bool satisfied_by(const Assignment& a) const;
    std::string to_string() const;
};

}  // namespace casbridge::poly
