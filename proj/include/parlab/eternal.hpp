#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "parlab/evolution.hpp"

namespace parlab {

enum class EternalRoute { eigenpair, floquet, far_past };

inline const char* route_name(EternalRoute r) {
  switch (r) {
    case EternalRoute::eigenpair: return "eigenpair";
    case EternalRoute::floquet: return "floquet";
    case EternalRoute::far_past: return "far_past";
  }
  return "?";
}

struct Eigenpair {
  double lambda = 0.0;
  Eigen::VectorXd phi;  // positive, value 1 at the reference node
  long long iterations = 0;
  double residual = 0.0;
};

struct FloquetResult {
  double mu = 0.0;         // mean decay rate -ln(rho)/T
  double rho = 0.0;        // per-period multiplier
  double period = 0.0;
  double dt = 0.0;
  std::vector<Eigen::VectorXd> family;  // orbit over one period, phase 0 normalized at ref
  long long sweeps = 0;
};

/// Positive eternal solution w in U, unique up to scale. The exponential
/// extension is scheme-exact: materializing onto a (dt, scheme) lattice uses
/// that scheme's per-step decay factor, so traces from different routes agree
/// to solver tolerance rather than to O(dt).
struct EternalSolution {
  EternalRoute route = EternalRoute::eigenpair;
  double rate = 0.0;  // decay rate per unit time
  GridPtr grid;

  // eigenpair route
  Eigen::VectorXd profile;

  // floquet route
  double period = 0.0;
  double multiplier = 0.0;
  std::vector<Eigen::VectorXd> family;
  double family_dt = 0.0;

  // far_past route
  EvolutionTrace orbit;              // genuine orbit, value 1 at (reference, t = 1)
  std::vector<double> rate_times;    // empirical per-step rate series over the run
  std::vector<double> rate_series;

  static double scheme_step_factor(double lambda, double dt, Scheme scheme) {
    if (scheme == Scheme::implicit_euler) return 1.0 / (1.0 + dt * lambda);
    return (1.0 - 0.5 * dt * lambda) / (1.0 + 0.5 * dt * lambda);
  }

  /// Materializes the eternal solution on a window lattice. far_past refuses
  /// queries outside its stored window.
  EvolutionTrace trace_on(const CylinderWindow& w, Scheme scheme) const {
    EvolutionTrace out;
    out.grid = grid;
    out.t_start = w.t_start;
    out.dt = w.dt;
    out.scheme = scheme;
    out.has_source = false;

    if (route == EternalRoute::eigenpair) {
      double f = scheme_step_factor(rate, w.dt, scheme);
      if (!(f > 0.0))
        throw Error(errc::bad_window, "scheme step factor not positive; reduce dt");
      double lf = std::log(f);
      for (long long k = 0; k <= w.steps(); ++k) {
        double e = (w.time_at(k) - 1.0) / w.dt;  // value 1 at (reference, t = 1)
        out.slices.push_back(profile * std::exp(e * lf));
      }
      return out;
    }

    if (route == EternalRoute::floquet) {
      if (std::abs(w.dt - family_dt) > 1e-12 * std::max(1.0, family_dt))
        throw Error(errc::bad_window, "floquet eternal solution is sampled at dt = " +
                                          std::to_string(family_dt));
      double scale = 1.0 / raw_floquet_value_at_ref(1.0);
      for (long long k = 0; k <= w.steps(); ++k)
        out.slices.push_back(scale * raw_floquet_slice(w.time_at(k)));
      return out;
    }

    // far_past: sub-window of the stored orbit only
    if (std::abs(w.dt - orbit.dt) > 1e-12 * std::max(1.0, orbit.dt))
      throw Error(errc::bad_window, "far_past eternal solution is sampled at dt = " +
                                        std::to_string(orbit.dt));
    for (long long k = 0; k <= w.steps(); ++k)
      out.slices.push_back(orbit.at_time(w.time_at(k)));  // throws outside the window
    return out;
  }

  double value(int node, double t, double dt, Scheme scheme) const {
    if (route == EternalRoute::eigenpair) {
      double f = scheme_step_factor(rate, dt, scheme);
      return profile[node] * std::exp((t - 1.0) / dt * std::log(f));
    }
    if (route == EternalRoute::floquet)
      return raw_floquet_slice(t)[node] / raw_floquet_value_at_ref(1.0);
    return orbit.value(node, t);
  }

 private:
  Eigen::VectorXd raw_floquet_slice(double t) const {
    long long m = static_cast<long long>(family.size());
    long long k = std::llround(t / family_dt);
    if (std::abs(t - static_cast<double>(k) * family_dt) > 1e-9 * std::max(1.0, std::abs(t)))
      throw Error(errc::bad_window, "floquet eternal solution queried off its time lattice");
    long long p = k >= 0 ? k / m : -(((-k) + m - 1) / m);
    long long j = k - p * m;
    return family[static_cast<std::size_t>(j)] * std::pow(multiplier, static_cast<double>(p));
  }

  double raw_floquet_value_at_ref(double t) const {
    return raw_floquet_slice(t)[grid->reference_node()];
  }
};

/// Smallest eigenvalue and positive eigenfunction of the spatial operator with
/// zero Dirichlet data, by inverse power iteration on A + sigma I with
/// sigma = Lambda * dim * 4 / h_min^2 (always positive definite). Stops when
/// the Aitken-extrapolated eigenvalue error and the residual
/// |A phi - lambda phi|_inf are both below tol * |lambda|; the increment test
/// alone is far too optimistic at this shift (convergence ratio ~ 1 - 1e-3).
inline Eigenpair principal_eigenpair(const CoefficientSpec& spec, GridPtr grid, double tol) {
  if (spec.time_dependence != TimeDependence::autonomous || spec.coefficients_use_time())
    throw Error(errc::config_error, "eigenpair route requires autonomous coefficients");
  if (!(tol > 0.0)) throw Error(errc::config_error, "eigenpair tolerance must be positive");

  const int n = grid->size();
  DiscreteOperator op = assemble(spec, *grid, 0.0);
  auto h = grid->spacing();
  double hmin = grid->dim() == 2 ? std::min(h[0], h[1]) : h[0];
  double sigma = spec.Lambda * grid->dim() * 4.0 / (hmin * hmin);

  Eigen::SparseMatrix<double> M = op.A;
  Eigen::SparseMatrix<double> I(n, n);
  I.setIdentity();
  M = op.A + sigma * I;
  LinearSolver solver(std::move(M), grid->dim());

  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  double lambda = 0.0, lambda_prev = 0.0, inc_prev = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  const long long max_iter = 100000;
  long long it = 0;
  for (it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd y = solver.solve(x);
    double scale = y.lpNorm<Eigen::Infinity>();
    if (!(scale > 0.0)) throw Error(errc::solve_failed, "power iterate collapsed to zero");
    x = y / scale;

    Eigen::VectorXd Ax = op.A * x;
    double denom = x.squaredNorm();
    lambda = x.dot(Ax) / denom;
    residual = (Ax - lambda * x).lpNorm<Eigen::Infinity>() / x.lpNorm<Eigen::Infinity>();

    double inc = std::abs(lambda - lambda_prev);
    bool eig_ok = false;
    if (it >= 3 && inc_prev > 0.0) {
      double q = inc / inc_prev;
      if (q < 1.0) eig_ok = inc * q / (1.0 - q) <= 0.5 * tol * std::abs(lambda);
    }
    if (inc == 0.0) eig_ok = true;
    if (eig_ok && residual <= tol * std::abs(lambda)) break;
    lambda_prev = lambda;
    inc_prev = inc;
  }
  if (it > max_iter)
    throw Error(errc::no_convergence,
                "inverse power iteration did not converge in 1e5 iterations");

  double mn = x.minCoeff(), mx = x.maxCoeff();
  if (mn < 0.0 && mx > 0.0 && std::min(-mn, mx) > 1e-8 * std::max(-mn, mx))
    throw Error(errc::sign_failure,
                "converged eigenvector changes sign; M-matrix assumption broken");
  if (mx <= 0.0) x = -x;

  double ref = x[grid->reference_node()];
  if (!(ref > 0.0)) throw Error(errc::sign_failure, "eigenvector vanishes at the reference node");
  Eigenpair ep;
  ep.lambda = lambda;
  ep.phi = x / ref;
  ep.iterations = it;
  ep.residual = residual;
  return ep;
}

/// Dominant multiplier of the one-period evolution map by power iteration;
/// renormalizes at the reference node each sweep, converged when successive
/// normalized profiles differ by at most tol in the infinity norm.
inline FloquetResult floquet_principal(const CoefficientSpec& spec, GridPtr grid, double T,
                                       double dt, double tol,
                                       Scheme scheme = Scheme::implicit_euler) {
  if (!(T > 0.0)) throw Error(errc::config_error, "floquet route requires a positive period");
  long long m = std::llround(T / dt);
  if (m <= 0 || std::abs(T / dt - static_cast<double>(m)) > 1e-9 * std::max(1.0, T / dt))
    throw Error(errc::config_error, "floquet route requires dt dividing the period");
  if (spec.time_dependence == TimeDependence::periodic && spec.period > 0.0 &&
      std::abs(spec.period - T) > 1e-9 * std::max(1.0, T))
    throw Error(errc::config_error, "period argument disagrees with the declared period");

  const int ref = grid->reference_node();
  Stepper st(spec, SourceSpec::zero(), grid, dt, scheme);

  Eigen::VectorXd v = Eigen::VectorXd::Ones(grid->size());
  double rho = 0.0;
  const long long max_sweeps = 10000;
  long long sweep = 0;
  for (sweep = 1; sweep <= max_sweeps; ++sweep) {
    Eigen::VectorXd u = v;
    for (long long j = 0; j < m; ++j) u = st.advance(u, static_cast<double>(j) * dt);
    rho = u[ref];
    if (!(rho > 0.0))
      throw Error(errc::non_positive_profile, "period map lost positivity at the reference node");
    Eigen::VectorXd vn = u / rho;
    double diff = (vn - v).lpNorm<Eigen::Infinity>();
    v = vn;
    if (diff <= tol) break;
  }
  if (sweep > max_sweeps)
    throw Error(errc::no_convergence, "floquet power iteration did not converge");
  if (v.minCoeff() <= 0.0)
    throw Error(errc::non_positive_profile, "converged floquet profile is not strictly positive");

  FloquetResult fr;
  fr.period = T;
  fr.dt = dt;
  fr.rho = rho;
  fr.mu = -std::log(rho) / T;
  fr.sweeps = sweep;
  fr.family.reserve(static_cast<std::size_t>(m));
  Eigen::VectorXd u = v;
  for (long long j = 0; j < m; ++j) {
    fr.family.push_back(u);
    u = st.advance(u, static_cast<double>(j) * dt);
  }
  return fr;
}

inline EternalSolution eternal_from_eigenpair(const Eigenpair& ep, GridPtr grid) {
  EternalSolution w;
  w.route = EternalRoute::eigenpair;
  w.rate = ep.lambda;
  w.grid = std::move(grid);
  w.profile = ep.phi;
  return w;
}

inline EternalSolution eternal_from_floquet(const FloquetResult& fr, GridPtr grid) {
  EternalSolution w;
  w.route = EternalRoute::floquet;
  w.rate = fr.mu;
  w.grid = std::move(grid);
  w.period = fr.period;
  w.multiplier = fr.rho;
  w.family = fr.family;
  w.family_dt = fr.dt;
  return w;
}

/// Far-past construction: evolve a positive seed from t = -T_back with
/// per-step renormalization at the reference node, keeping the windowed part.
/// Projective contraction washes out everything but the eternal solution; a
/// second, independent seed must reproduce the normalized window profiles to
/// seed_tol or the run aborts with SeedSensitivity.
inline EternalSolution far_past(const CoefficientSpec& spec, GridPtr grid, double T_back,
                                const CylinderWindow& window, const Eigen::VectorXd& seed,
                                Scheme scheme = Scheme::implicit_euler,
                                double seed_tol = 1e-6) {
  if (!(T_back >= window.length()))
    throw Error(errc::config_error, "far_past requires T_back >= window length");
  if (!(window.t_start <= 1.0 && 1.0 <= window.t_end))
    throw Error(errc::bad_window, "far_past window must contain the normalization time t = 1");
  if (seed.size() != grid->size())
    throw Error(errc::bad_grid, "seed size does not match the grid");
  if (seed.minCoeff() <= 0.0)
    throw Error(errc::non_positive_profile, "far_past seed must be strictly positive");

  const int ref = grid->reference_node();
  const double dt = window.dt;
  const long long total = std::llround((window.t_end + T_back) / dt);
  const long long first_kept = std::llround((window.t_start + T_back) / dt);

  struct RunOut {
    std::vector<Eigen::VectorXd> normalized;  // slices within the window, ref value 1
    std::vector<double> factors;              // per-step ref factors within the window
    std::vector<double> rate_times, rates;
  };

  auto run = [&](const Eigen::VectorXd& s) {
    RunOut out;
    Stepper st(spec, SourceSpec::zero(), grid, dt, scheme);
    Eigen::VectorXd u = s / s[ref];
    if (first_kept == 0) out.normalized.push_back(u);
    for (long long k = 0; k < total; ++k) {
      double t = -T_back + static_cast<double>(k) * dt;
      u = st.advance(u, t);
      double factor = u[ref];
      if (!(factor > 0.0))
        throw Error(errc::non_positive_profile,
                    "far_past orbit lost positivity at the reference node");
      u /= factor;
      out.rate_times.push_back(t + dt);
      out.rates.push_back(-std::log(factor) / dt);
      if (k + 1 >= first_kept) {
        if (k + 1 > first_kept) out.factors.push_back(factor);
        out.normalized.push_back(u);
      }
    }
    return out;
  };

  RunOut a = run(seed);

  // deterministic second seed, rich in every mode
  Eigen::VectorXd alt(grid->size());
  for (int k = 0; k < grid->size(); ++k)
    alt[k] = 1.0 + 0.5 * std::cos(3.0 * static_cast<double>(k + 1));
  RunOut b = run(alt);

  double worst = 0.0;
  for (std::size_t k = 0; k < a.normalized.size(); ++k) {
    double scale = a.normalized[k].lpNorm<Eigen::Infinity>();
    worst = std::max(worst,
                     (a.normalized[k] - b.normalized[k]).lpNorm<Eigen::Infinity>() /
                         std::max(scale, 1e-300));
  }
  if (worst > seed_tol)
    throw Error(errc::seed_sensitivity,
                "two-seed check failed (relative difference " + std::to_string(worst) +
                    " > " + std::to_string(seed_tol) + "); T_back likely too small, try doubling it");

  // reconstruct the genuine orbit on the window from the recorded factors,
  // then normalize once at (reference, t = 1)
  EvolutionTrace orbit;
  orbit.grid = grid;
  orbit.t_start = window.t_start;
  orbit.dt = dt;
  orbit.scheme = scheme;
  orbit.has_source = false;
  double accum = 1.0;
  orbit.slices.push_back(a.normalized[0]);
  for (std::size_t k = 1; k < a.normalized.size(); ++k) {
    accum *= a.factors[k - 1];
    orbit.slices.push_back(a.normalized[k] * accum);
  }
  double at_one = orbit.value(ref, 1.0);
  for (auto& s : orbit.slices) s /= at_one;

  EternalSolution w;
  w.route = EternalRoute::far_past;
  w.grid = grid;
  w.orbit = std::move(orbit);
  w.rate_times = std::move(a.rate_times);
  w.rate_series = std::move(a.rates);
  // empirical rate: mean of the last quarter of the run
  std::size_t q = w.rate_series.size() / 4;
  double mean = 0.0;
  for (std::size_t k = w.rate_series.size() - q; k < w.rate_series.size(); ++k)
    mean += w.rate_series[k];
  w.rate = mean / static_cast<double>(q);
  return w;
}

/// far_past with the spec'd restart policy: on SeedSensitivity, double T_back
/// (up to T_back_max) and retry.
inline EternalSolution far_past_adaptive(const CoefficientSpec& spec, GridPtr grid, double T_back,
                                         const CylinderWindow& window,
                                         const Eigen::VectorXd& seed,
                                         Scheme scheme = Scheme::implicit_euler,
                                         double seed_tol = 1e-6, double T_back_max = 80.0) {
  for (double tb = T_back; tb <= T_back_max + 1e-9; tb *= 2.0) {
    try {
      return far_past(spec, grid, tb, window, seed, scheme, seed_tol);
    } catch (const Error& e) {
      if (e.code() != errc::seed_sensitivity || tb * 2.0 > T_back_max + 1e-9) throw;
    }
  }
  throw Error(errc::seed_sensitivity, "far_past failed up to T_back_max");
}

}  // namespace parlab
