#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hermanlab {

/// Failure categories surfaced by the numerical routines. The CLI prints the
/// kind verbatim on stderr, so the names are part of the external interface.
enum class ErrorKind {
  Domain,             // argument outside the documented domain
  RationalResolution, // number indistinguishable from a rational at double precision
  Overflow,           // exact integer arithmetic left the 64-bit range
  Degenerate,         // u == v style degeneracies, poles
  PeriodNotFound,
  ConventionViolation,
  Budget,             // enumeration or pixel budget exceeded
  NoBracket,
  NonMonotone,
  LiftDiscontinuity,
  NewtonDivergence,
  DerivativeUnderflow,
  WrongCombinatorics,
  OrbitEscaped,
  InsufficientOrbit,
  EmptySample,
  Inconclusive,
  Incompatible,
  BranchAmbiguity,
  Io,
};

inline std::string_view kind_name(ErrorKind k) {
  switch (k) {
  case ErrorKind::Domain: return "domain";
  case ErrorKind::RationalResolution: return "rational_within_resolution";
  case ErrorKind::Overflow: return "overflow";
  case ErrorKind::Degenerate: return "degenerate";
  case ErrorKind::PeriodNotFound: return "period_not_found";
  case ErrorKind::ConventionViolation: return "convention_violation";
  case ErrorKind::Budget: return "budget_exceeded";
  case ErrorKind::NoBracket: return "no_bracket";
  case ErrorKind::NonMonotone: return "non_monotone";
  case ErrorKind::LiftDiscontinuity: return "lift_discontinuity";
  case ErrorKind::NewtonDivergence: return "newton_divergence";
  case ErrorKind::DerivativeUnderflow: return "derivative_underflow";
  case ErrorKind::WrongCombinatorics: return "wrong_combinatorics";
  case ErrorKind::OrbitEscaped: return "orbit_escaped";
  case ErrorKind::InsufficientOrbit: return "insufficient_orbit";
  case ErrorKind::EmptySample: return "empty_sample";
  case ErrorKind::Inconclusive: return "inconclusive";
  case ErrorKind::Incompatible: return "incompatible";
  case ErrorKind::BranchAmbiguity: return "branch_ambiguity";
  case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what) {
  throw Error(kind, what);
}

} // namespace hermanlab
