#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "parlab/expr.hpp"
#include "parlab/grid.hpp"
#include "parlab/rng.hpp"

namespace parlab {

enum class OperatorForm { nondivergence, divergence };
enum class TimeDependence { autonomous, periodic, general };

/// Coefficient data of L u = u_t - a_ij D_ij u + b_i D_i u + c u together
/// with the declared parabolicity bounds lambda, Lambda. Fields are
/// expression trees in (y1, y2, t).
struct CoefficientSpec {
  std::array<std::array<Expr, 2>, 2> a{{{Expr::constant(1.0), Expr::constant(0.0)},
                                        {Expr::constant(0.0), Expr::constant(1.0)}}};
  std::array<Expr, 2> b{Expr::constant(0.0), Expr::constant(0.0)};
  Expr c = Expr::constant(0.0);
  double lambda = 1.0;
  double Lambda = 1.0;
  OperatorForm form = OperatorForm::nondivergence;
  TimeDependence time_dependence = TimeDependence::autonomous;
  double period = 0.0;  // meaningful for periodic only

  double a_at(int i, int j, const Point& y, double t) const { return a[i][j](y[0], y[1], t); }
  double b_at(int i, const Point& y, double t) const { return b[i](y[0], y[1], t); }
  double c_at(const Point& y, double t) const { return c(y[0], y[1], t); }

  bool coefficients_use_time() const {
    return a[0][0].uses_time() || a[0][1].uses_time() || a[1][0].uses_time() ||
           a[1][1].uses_time() || b[0].uses_time() || b[1].uses_time() || c.uses_time();
  }

  /// The assembled matrix can be reused across times only for genuinely
  /// time-independent coefficients.
  bool effectively_autonomous() const {
    return time_dependence == TimeDependence::autonomous && !coefficients_use_time();
  }

  static CoefficientSpec heat(int dim) {
    CoefficientSpec s;
    s.lambda = 1.0;
    s.Lambda = 1.0;
    (void)dim;
    return s;
  }
};

/// Right-hand side f plus an optionally declared sliding-norm bound.
struct SourceSpec {
  Expr f = Expr::constant(0.0);
  std::optional<double> declared_sliding_bound;
  bool is_zero = true;  // set false when a nontrivial f is attached

  static SourceSpec zero() { return SourceSpec{}; }
  static SourceSpec of(Expr e) {
    SourceSpec s;
    s.f = std::move(e);
    s.is_zero = false;
    return s;
  }
  double at(const Point& y, double t) const { return f(y[0], y[1], t); }
};

struct ValidationItem {
  std::string assumption;
  bool pass = true;
  std::string detail;        // violating sample on failure
  double worst_value = 0.0;  // measured extreme for the assumption
};

struct ValidationReport {
  bool pass = true;
  std::vector<ValidationItem> items;

  const ValidationItem* find(const std::string& name) const {
    for (const auto& it : items)
      if (it.assumption == name) return &it;
    return nullptr;
  }
};

namespace detail {
inline std::string sample_str(const Point& y, double t) {
  return "(y1=" + std::to_string(y[0]) + ", y2=" + std::to_string(y[1]) +
         ", t=" + std::to_string(t) + ")";
}
}  // namespace detail

/// Checks the standing assumptions on sampled (y, t, xi): symmetry of
/// a, the ellipticity bracket, |b| <= Lambda, 0 <= c <= Lambda, plus the
/// artifact's M-matrix restriction |a_ij| <= min(a_ii, a_jj) for i != j.
/// xi runs over the coordinate directions and 16 random unit vectors per
/// sample point.
inline ValidationReport validate(const CoefficientSpec& spec, const Grid& grid,
                                 const std::vector<double>& times,
                                 std::uint64_t seed = 0x5eedULL) {
  if (times.empty()) throw Error(errc::config_error, "validate requires a nonempty sample time list");
  ValidationReport rep;
  const int d = grid.dim();
  const double tol = 1e-9 * std::max(1.0, spec.Lambda);

  ValidationItem sym{"a symmetric", true, "", 0.0};
  ValidationItem ell_lo{"ellipticity lower bound", true, "", std::numeric_limits<double>::infinity()};
  ValidationItem ell_hi{"ellipticity upper bound", true, "", 0.0};
  ValidationItem drift{"|b| <= Lambda", true, "", 0.0};
  ValidationItem c_sign{"c >= 0", true, "", 0.0};
  ValidationItem c_bound{"c <= Lambda", true, "", 0.0};
  ValidationItem mixed{"|a_ij| <= min(a_ii, a_jj)", true, "", 0.0};

  auto rng = named_stream(seed, "validate.xi");
  std::normal_distribution<double> normal(0.0, 1.0);

  for (double t : times) {
    for (const Point& y : grid.nodes()) {
      double a11 = spec.a_at(0, 0, y, t);
      double a12 = spec.a_at(0, 1, y, t);
      double a21 = spec.a_at(1, 0, y, t);
      double a22 = d == 2 ? spec.a_at(1, 1, y, t) : 1.0;

      if (d == 2 && std::abs(a12 - a21) > tol && sym.pass) {
        sym.pass = false;
        sym.detail = "a12 != a21 at " + detail::sample_str(y, t);
        sym.worst_value = a12 - a21;
      }
      if (d == 2) {
        double off = 0.5 * (a12 + a21);
        double lim = std::min(a11, a22);
        if (std::abs(off) > mixed.worst_value) mixed.worst_value = std::abs(off);
        if (std::abs(off) > lim + tol && mixed.pass) {
          mixed.pass = false;
          mixed.detail = "mixed coefficient breaks the M-matrix restriction at " +
                         detail::sample_str(y, t);
        }
      }

      // quadratic form on coordinate directions plus random unit vectors
      std::vector<std::array<double, 2>> xis;
      xis.push_back({1.0, 0.0});
      if (d == 2) xis.push_back({0.0, 1.0});
      for (int k = 0; k < 16; ++k) {
        if (d == 1) {
          xis.push_back({1.0, 0.0});
          break;  // all unit vectors coincide in 1D
        }
        double g1 = normal(rng), g2 = normal(rng);
        double norm = std::hypot(g1, g2);
        if (norm < 1e-12) continue;
        xis.push_back({g1 / norm, g2 / norm});
      }
      for (const auto& xi : xis) {
        double q = a11 * xi[0] * xi[0];
        if (d == 2) q += (a12 + a21) * xi[0] * xi[1] + a22 * xi[1] * xi[1];
        if (q < ell_lo.worst_value) ell_lo.worst_value = q;
        if (q > ell_hi.worst_value) ell_hi.worst_value = q;
        if (q < spec.lambda - tol && ell_lo.pass) {
          ell_lo.pass = false;
          ell_lo.detail = "a xi.xi = " + std::to_string(q) + " < lambda at " +
                          detail::sample_str(y, t);
        }
        if (q > spec.Lambda + tol && ell_hi.pass) {
          ell_hi.pass = false;
          ell_hi.detail = "a xi.xi = " + std::to_string(q) + " > Lambda at " +
                          detail::sample_str(y, t);
        }
      }

      for (int i = 0; i < d; ++i) {
        double bi = spec.b_at(i, y, t);
        if (std::abs(bi) > drift.worst_value) drift.worst_value = std::abs(bi);
        if (std::abs(bi) > spec.Lambda + tol && drift.pass) {
          drift.pass = false;
          drift.detail = "|b" + std::to_string(i + 1) + "| = " + std::to_string(std::abs(bi)) +
                         " > Lambda at " + detail::sample_str(y, t);
        }
      }

      double cv = spec.c_at(y, t);
      if (cv < c_sign.worst_value) c_sign.worst_value = cv;
      if (cv < -tol && c_sign.pass) {
        c_sign.pass = false;
        c_sign.detail = "c = " + std::to_string(cv) + " < 0 at " + detail::sample_str(y, t);
      }
      if (cv > c_bound.worst_value) c_bound.worst_value = cv;
      if (cv > spec.Lambda + tol && c_bound.pass) {
        c_bound.pass = false;
        c_bound.detail = "c = " + std::to_string(cv) + " > Lambda at " + detail::sample_str(y, t);
      }
    }
  }

  rep.items = {sym, ell_lo, ell_hi, drift, c_sign, c_bound};
  if (d == 2) rep.items.push_back(mixed);
  for (const auto& it : rep.items) rep.pass = rep.pass && it.pass;
  return rep;
}

/// Throwing variant used on config ingestion: names the first broken
/// assumption with its typed error.
inline void require_valid(const CoefficientSpec& spec, const Grid& grid,
                          const std::vector<double>& times, std::uint64_t seed = 0x5eedULL) {
  ValidationReport rep = validate(spec, grid, times, seed);
  if (rep.pass) return;
  for (const auto& it : rep.items) {
    if (it.pass) continue;
    if (it.assumption == "c >= 0") throw Error(errc::negative_c, it.detail);
    if (it.assumption == "|b| <= Lambda") throw Error(errc::drift_too_large, it.detail);
    if (it.assumption == "a symmetric") throw Error(errc::asymmetric_a, it.detail);
    if (it.assumption == "|a_ij| <= min(a_ii, a_jj)")
      throw Error(errc::mixed_term_too_large, it.detail);
    throw Error(errc::ellipticity_violated, it.assumption + ": " + it.detail);
  }
}

}  // namespace parlab
