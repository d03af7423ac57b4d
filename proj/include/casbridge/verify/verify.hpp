#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "casbridge/cexpr/cexpr.hpp"
#include "casbridge/interpret/interpret.hpp"
#include "casbridge/kexpr/context.hpp"
#include "casbridge/kexpr/expr.hpp"
#include "casbridge/poly/poly.hpp"

namespace casbridge::verify {

using kexpr::Environment;
using kexpr::KExpr;
using poly::Assignment;
using poly::Poly;
using poly::Rational;

// ---- errors ----

class UnableToSimplify : public std::runtime_error {
  public:
    UnableToSimplify(std::string lhs, std::string rhs)
        : std::runtime_error("unable to simplify: " + lhs + " vs " + rhs), lhs(std::move(lhs)), rhs(std::move(rhs)) {}
    std::string lhs, rhs;  // canonical forms
};

class OutOfFragment : public std::runtime_error {
  public:
    OutOfFragment(const std::string& what, const std::string& term)
        : std::runtime_error(what + ": " + term), term(term) {}
    std::string term;
};

class BadCertificate : public std::runtime_error {
  public:
    static constexpr std::size_t kWholeSum = static_cast<std::size_t>(-1);
    BadCertificate(std::size_t row, const std::string& reason)
        : std::runtime_error(row == kWholeSum ? "bad certificate: " + reason
                                              : "bad certificate at row " + std::to_string(row) + ": " + reason),
          row(row),
          reason(reason) {}
    std::size_t row;
    std::string reason;
};

class ResidueNonZero : public std::runtime_error {
  public:
    ResidueNonZero(std::size_t index, const Rational& residue)
        : std::runtime_error("equation " + std::to_string(index) + " leaves residue " + poly::to_string(residue)),
          index(index),
          residue(residue) {}
    std::size_t index;
    Rational residue;
};

class NotAProposition : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class CertificationFailed : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---- polynomial view of kernel terms ----

/// Reads arithmetic terms (add, mul, sub, neg, pow_nat with a numeral exponent,
/// division by a nonzero constant, numerals) into polynomials. Locals become
/// variables named by their pretty name; two different locals with one pretty
/// name are rejected. Anything else throws OutOfFragment.
class PolyReader {
  public:
    explicit PolyReader(const Environment& env) : env_(&env) {}

    /// The carrier must be real, int or nat; subtraction is only read over
    /// real and int, division by a constant only over real.
    Poly read(const KExpr& e);
    /// Prop `a <= b`, `a < b` or `a = b` as `a - b` against zero.
    std::pair<Poly, poly::Relation> read_relation(const KExpr& prop);
    /// Conjunctions are split into their parts.
    std::vector<std::pair<Poly, poly::Relation>> read_hypothesis(const KExpr& prop);

  private:
    const Environment* env_;
    std::map<std::string, std::string> unique_of_;  // pretty name -> unique name
};

// ---- certificates ----

struct RingEq {
    KExpr lhs, rhs;
};
struct FarkasWitness {
    std::vector<KExpr> hyps;
    std::vector<Rational> coeffs;
    Rational constant;  // what the weighted sum reduces to
};
struct SolutionWitness {
    std::vector<KExpr> system;
    Assignment assignment;
};
struct Counterexample {
    std::vector<KExpr> hyps;
    KExpr goal;
    Assignment assignment;
};
struct TrustedAxiom {
    KExpr claim;
    std::string provenance;
};
struct ApproxBound {
    KExpr target;
    Rational lower, upper;
};

using Certificate = std::variant<RingEq, FarkasWitness, SolutionWitness, Counterexample, TrustedAxiom, ApproxBound>;

/// Surface rendering of what the certificate asserts, e.g. `x^2 - 2*x + 1 = (x + -1)^2`
/// or `75977 / 23000 < 100 * BesselJ 2 (13 / 25) < 76023 / 23000`.
std::string claim_text(const Certificate& c, const Environment& env);

/// `n / d` with spaces, or just `n` for integers.
std::string rational_text(const Rational& q);

// ---- ledger ----

enum class Status { Verified, Trusted };
std::string to_string(Status s);

struct LedgerEntry {
    Certificate cert;
    Status status;
    std::string claim;
    std::string provenance;
    std::string timestamp;  // ISO-8601, UTC
    bool flagged = false;   // a trusted claim of `false`
};

namespace detail {
struct LedgerAccess;
}

/// Append-only record of verified and trusted results. Safe to share between
/// threads; entries never change once written.
class TrustLedger {
  public:
    TrustLedger() = default;
    TrustLedger(const TrustLedger&) = delete;
    TrustLedger& operator=(const TrustLedger&) = delete;

    /// Also appends every new entry as a line to `path`.
    void open_log(const std::string& path);

    std::vector<LedgerEntry> snapshot() const;
    std::size_t verified_count() const;
    std::size_t trusted_count() const;
    std::size_t size() const;

    /// `status<TAB>claim<TAB>provenance<TAB>timestamp`
    static std::string log_line(const LedgerEntry& e);

  private:
    friend struct detail::LedgerAccess;
    void append(LedgerEntry e);

    mutable std::mutex mu_;
    std::vector<LedgerEntry> entries_;
    std::string log_path_;
};

// ---- checkers ----
// Every checker re-derives its verdict from the certificate data alone and
// records a verified entry when a ledger is given.

Certificate check_ring_eq(const KExpr& e1, const KExpr& e2, const Environment& env, TrustLedger* ledger = nullptr);

/// Σ cᵢ·pᵢ must reduce to a constant q with q > 0, or q = 0 with positive
/// weight on a strict row; inequality rows need cᵢ ≥ 0.
Certificate check_farkas(const std::vector<KExpr>& hyps, const std::vector<Rational>& coeffs, const Environment& env,
                         TrustLedger* ledger = nullptr);

/// Assignment keys are the pretty names of the locals.
Certificate check_solution(const std::vector<KExpr>& system, const Assignment& assignment, const Environment& env,
                           TrustLedger* ledger = nullptr);

/// Evaluates a C-expression somewhere else (the built-in engine or a remote oracle).
using Oracle = std::function<cexpr::CExpr(const cexpr::CExpr&)>;

struct FactorResult {
    KExpr factored;
    Certificate cert;
};

/// Sends `Factor[Activate[LeanConvert[<encoding of e>]]]` to the oracle, reads
/// the answer back at e's type and checks it ring-equal to e.
FactorResult factor_check(const KExpr& e, const Environment& env, const Oracle& oracle, TrustLedger* ledger = nullptr);

/// Back-translation rules used by factor_check: the defaults plus
/// plus_constants_last.
const interpret::BackRuleSet& factor_rules();

/// Finds a point satisfying a linear system, or nullopt when it is infeasible.
using LinearSearch =
    std::function<std::optional<Assignment>(const std::vector<poly::LinConstraint>&, const std::vector<std::string>&)>;

struct SanityOptions {
    std::size_t max_denominator = 16;
    long box = 32;  // nonlinear search stays in [-box, box]
    std::size_t max_points = 2000000;
};

/// A counterexample to `hyps ⊢ goal`, checked by substitution, or nullopt when
/// none was found. nullopt is not evidence and is never recorded.
std::optional<Certificate> sanity_check(const std::vector<KExpr>& hyps, const KExpr& goal, const Environment& env,
                                        const LinearSearch& search, TrustLedger* ledger = nullptr,
                                        const SanityOptions& opts = {});

/// Records `claim` as an axiom. A claim of `false` is accepted but flagged.
Certificate declare_trusted(const KExpr& claim, const std::string& provenance, const Environment& env,
                            TrustLedger& ledger);

/// Numeric approximation of a term that exact arithmetic cannot evaluate.
using NumericOracle = std::function<std::optional<Rational>(const KExpr&)>;

/// Simplest rational strictly inside (lo, hi); lo < hi.
Rational simplest_between(const Rational& lo, const Rational& hi);

/// Bounds `center ± radius` around the simplest rational within `radius` of the
/// value. Exactly evaluable terms are verified; otherwise the value comes from
/// `numeric` and the bound is recorded as trusted. With radius 0 only exact
/// values work, and the bounds collapse to the value itself.
Certificate approx_bounds(const KExpr& e, const Rational& radius, const Environment& env, TrustLedger& ledger,
                          const NumericOracle& numeric = nullptr);

}  // namespace casbridge::verify
