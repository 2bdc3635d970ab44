#pragma once

#include <stdexcept>
#include <string>

namespace parlab {

enum class errc {
  // grid
  empty_interior,
  origin_outside,
  bad_grid,
  bad_window,
  // coefficients / config
  bad_expression,
  ellipticity_violated,
  negative_c,
  drift_too_large,
  asymmetric_a,
  mixed_term_too_large,
  config_error,
  // solvers
  stencil_out_of_domain,
  solve_failed,
  no_convergence,
  sign_failure,
  non_positive_profile,
  seed_sensitivity,
  // verification
  window_too_short,
  not_homogeneous,
  plateau_not_reached,
  horizon_too_short,
  non_positive,
  no_cauchy_decay,
  negative_coefficient,
  // cli
  missing_golden,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::empty_interior: return "EmptyInterior";
    case errc::origin_outside: return "OriginOutside";
    case errc::bad_grid: return "BadGrid";
    case errc::bad_window: return "BadWindow";
    case errc::bad_expression: return "BadExpression";
    case errc::ellipticity_violated: return "EllipticityViolated";
    case errc::negative_c: return "NegativeC";
    case errc::drift_too_large: return "DriftTooLarge";
    case errc::asymmetric_a: return "AsymmetricA";
    case errc::mixed_term_too_large: return "MixedTermTooLarge";
    case errc::config_error: return "ConfigError";
    case errc::stencil_out_of_domain: return "StencilOutOfDomain";
    case errc::solve_failed: return "SolveFailed";
    case errc::no_convergence: return "NoConvergence";
    case errc::sign_failure: return "SignFailure";
    case errc::non_positive_profile: return "NonPositiveProfile";
    case errc::seed_sensitivity: return "SeedSensitivity";
    case errc::window_too_short: return "WindowTooShort";
    case errc::not_homogeneous: return "NotHomogeneous";
    case errc::plateau_not_reached: return "PlateauNotReached";
    case errc::horizon_too_short: return "HorizonTooShort";
    case errc::non_positive: return "NonPositive";
    case errc::no_cauchy_decay: return "NoCauchyDecay";
    case errc::negative_coefficient: return "NegativeCoefficient";
    case errc::missing_golden: return "MissingGolden";
  }
  return "Unknown";
}

/// All library failures surface as Error with a stable code plus a
/// human-readable message naming the violated assumption.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }
  const char* code_name() const { return errc_name(code_); }

 private:
  errc code_;
};

}  // namespace parlab
