#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

#include "parlab/assemble.hpp"
#include "parlab/linear_solver.hpp"

namespace parlab {

enum class Scheme { implicit_euler, crank_nicolson };

inline const char* scheme_name(Scheme s) {
  return s == Scheme::implicit_euler ? "implicit_euler" : "crank_nicolson";
}

/// One time slice of the solution on interior nodes.
struct FieldSlice {
  double t = 0.0;
  Eigen::VectorXd values;
};

/// Time-ordered slices at uniform dt on a shared grid.
struct EvolutionTrace {
  GridPtr grid;
  double t_start = 0.0;
  double dt = 0.0;
  Scheme scheme = Scheme::implicit_euler;
  bool has_source = false;
  std::vector<Eigen::VectorXd> slices;

  long long steps() const { return static_cast<long long>(slices.size()) - 1; }
  double t_end() const { return time_at(steps()); }
  double time_at(long long k) const { return t_start + static_cast<double>(k) * dt; }

  /// Index of the slice nearest to t; throws when t falls outside the trace
  /// or between samples by more than a rounding slack.
  long long slice_index(double t) const {
    long long k = std::llround((t - t_start) / dt);
    if (k < 0 || k >= static_cast<long long>(slices.size()))
      throw Error(errc::bad_window, "time " + std::to_string(t) + " outside trace window");
    if (std::abs(time_at(k) - t) > 1e-9 * std::max(1.0, std::abs(t)))
      throw Error(errc::bad_window, "time " + std::to_string(t) + " not on the trace lattice");
    return k;
  }

  const Eigen::VectorXd& at_time(double t) const { return slices[static_cast<std::size_t>(slice_index(t))]; }

  double value(int node, double t) const { return at_time(t)[node]; }

  /// Nodewise rescale of the whole trace.
  EvolutionTrace scaled(double s) const {
    EvolutionTrace out = *this;
    for (auto& v : out.slices) v *= s;
    return out;
  }
};

/// u-hat series: per-slice sup of the positive part, with its infimum m(u).
struct SupProfile {
  std::vector<double> times;
  std::vector<double> values;
  double m_u = 0.0;
  double dt = 0.0;
  bool from_source = false;  // trace carried a nonzero f
};

/// Advances slices of the discrete problem; assembly and factorization are
/// cached when the coefficients are genuinely time-independent.
class Stepper {
 public:
  Stepper(const CoefficientSpec& spec, const SourceSpec& f, GridPtr grid, double dt, Scheme scheme)
      : spec_(spec), f_(f), grid_(std::move(grid)), dt_(dt), scheme_(scheme) {
    if (!(dt_ > 0.0)) throw Error(errc::bad_window, "dt must be positive");
    identity_.resize(grid_->size(), grid_->size());
    identity_.setIdentity();
  }

  /// u at time t -> u at time t + dt.
  Eigen::VectorXd advance(const Eigen::VectorXd& u, double t) const {
    ensure_operators(t);
    Eigen::VectorXd rhs;
    if (scheme_ == Scheme::implicit_euler) {
      rhs = u;
      if (!f_.is_zero) rhs += dt_ * sample_source(t + dt_);
    } else {
      rhs = u - (0.5 * dt_) * (A_old_->A * u);
      if (!f_.is_zero) rhs += dt_ * sample_source(t + 0.5 * dt_);
    }
    Eigen::VectorXd out = solver_->solve(rhs);
    if (!out.allFinite()) throw Error(errc::solve_failed, "non-finite slice produced");
    return out;
  }

  bool last_matrix_was_m() const { return A_new_ && A_new_->m_matrix; }

 private:
  Eigen::VectorXd sample_source(double t) const {
    Eigen::VectorXd s(grid_->size());
    for (int k = 0; k < grid_->size(); ++k) s[k] = f_.at(grid_->node(k), t);
    return s;
  }

  void ensure_operators(double t) const {
    bool frozen = spec_.effectively_autonomous();
    if (frozen && solver_) return;
    double t_new = t + dt_;
    if (solver_ && t_assembled_ == t_new) return;

    A_new_ = assemble(spec_, *grid_, t_new);
    Eigen::SparseMatrix<double> M;
    if (scheme_ == Scheme::implicit_euler) {
      M = identity_ + dt_ * A_new_->A;
    } else {
      A_old_ = assemble(spec_, *grid_, t);
      M = identity_ + (0.5 * dt_) * A_new_->A;
    }
    if (frozen && scheme_ == Scheme::crank_nicolson) A_old_ = A_new_;
    solver_ = std::make_unique<LinearSolver>(std::move(M), grid_->dim());
    t_assembled_ = t_new;
  }

  CoefficientSpec spec_;
  SourceSpec f_;
  GridPtr grid_;
  double dt_;
  Scheme scheme_;
  Eigen::SparseMatrix<double> identity_;
  mutable std::optional<DiscreteOperator> A_new_, A_old_;
  mutable std::unique_ptr<LinearSolver> solver_;
  mutable double t_assembled_ = std::numeric_limits<double>::quiet_NaN();
};

/// Single step of the named scheme; assembles fresh every call. evolve() is
/// the cached path for long windows.
inline FieldSlice step(const CoefficientSpec& spec, const SourceSpec& f, GridPtr grid,
                       const FieldSlice& slice, double dt, Scheme scheme) {
  Stepper st(spec, f, grid, dt, scheme);
  FieldSlice out;
  out.t = slice.t + dt;
  out.values = st.advance(slice.values, slice.t);
  return out;
}

/// Evolves initial data across the window with zero lateral data (structural)
/// and the given source; returns steps + 1 slices.
inline EvolutionTrace evolve(const CoefficientSpec& spec, const SourceSpec& f, GridPtr grid,
                             const FieldSlice& initial, const CylinderWindow& window,
                             Scheme scheme) {
  if (std::abs(initial.t - window.t_start) > 1e-9 * std::max(1.0, std::abs(window.t_start)))
    throw Error(errc::bad_window, "initial slice time does not match window start");
  if (initial.values.size() != grid->size())
    throw Error(errc::bad_grid, "initial slice size does not match grid");

  EvolutionTrace trace;
  trace.grid = grid;
  trace.t_start = window.t_start;
  trace.dt = window.dt;
  trace.scheme = scheme;
  trace.has_source = !f.is_zero;
  trace.slices.reserve(static_cast<std::size_t>(window.steps()) + 1);
  trace.slices.push_back(initial.values);

  Stepper st(spec, f, grid, window.dt, scheme);
  Eigen::VectorXd u = initial.values;
  for (long long k = 0; k < window.steps(); ++k) {
    double t = window.time_at(k);
    try {
      u = st.advance(u, t);
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " at step " + std::to_string(k + 1));
    }
    trace.slices.push_back(u);
  }
  return trace;
}

/// u-hat(t) = max over nodes of max(u, 0), plus m(u) = min over the window.
inline SupProfile sup_profile(const EvolutionTrace& trace) {
  if (trace.slices.empty()) throw Error(errc::window_too_short, "empty trace");
  SupProfile p;
  p.dt = trace.dt;
  p.from_source = trace.has_source;
  p.times.reserve(trace.slices.size());
  p.values.reserve(trace.slices.size());
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.slices.size(); ++k) {
    double v = std::max(0.0, trace.slices[k].maxCoeff());
    p.times.push_back(trace.time_at(static_cast<long long>(k)));
    p.values.push_back(v);
    m = std::min(m, v);
  }
  p.m_u = m;
  return p;
}

/// Continuity and monotonicity diagnostics: strict decrease of u-hat (relative
/// tolerance 1e-12 per step), a sampled modulus of continuity, and the
/// m(u) -> 0 tail flag u-hat(t_end) <= eps_tail.
struct ProfileReport {
  bool strictly_decreasing = true;
  long long violations = 0;
  double first_violation_time = 0.0;
  double omega = 0.0;  // max |u-hat(t+dt) - u-hat(t)| over the window
  double m_u = 0.0;
  double eps_tail = 0.0;
  bool tail_ok = false;
};

inline ProfileReport profile_checks(const SupProfile& profile, double eps_tail = 1e-6) {
  if (profile.from_source)
    throw Error(errc::not_homogeneous, "profile checks require a homogeneous (f = 0) trace");
  if (profile.values.size() < 2)
    throw Error(errc::window_too_short, "profile needs at least two samples");
  ProfileReport rep;
  rep.eps_tail = eps_tail;
  const double rel_tol = 1e-12;
  for (std::size_t k = 0; k + 1 < profile.values.size(); ++k) {
    double a = profile.values[k], b = profile.values[k + 1];
    rep.omega = std::max(rep.omega, std::abs(b - a));
    if (a <= 0.0) continue;  // zero-solution step, trivially satisfied
    if (!(b < a * (1.0 - rel_tol))) {
      if (rep.strictly_decreasing) rep.first_violation_time = profile.times[k + 1];
      rep.strictly_decreasing = false;
      ++rep.violations;
    }
  }
  rep.m_u = profile.m_u;
  rep.tail_ok = profile.values.back() <= eps_tail;
  return rep;
}

}  // namespace parlab
