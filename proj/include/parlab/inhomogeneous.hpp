#pragma once

#include <cmath>
#include <vector>

#include "parlab/eternal.hpp"
#include "parlab/evolution.hpp"
#include "parlab/norms.hpp"

namespace parlab {

/// Truncated Dirichlet problem on Q_(-N, N): zero data on the whole parabolic
/// boundary, so forward evolution from the zero slice at t = -N is exactly
/// the problem the exhaustion argument solves.
inline EvolutionTrace exhaustion_solve(const CoefficientSpec& spec, const SourceSpec& f,
                                       GridPtr grid, double N, double dt,
                                       Scheme scheme = Scheme::implicit_euler) {
  if (!(N >= 2.0)) throw Error(errc::config_error, "exhaustion requires N >= 2");
  CylinderWindow window(-N, N, dt);
  FieldSlice zero{-N, Eigen::VectorXd::Zero(grid->size())};
  return evolve(spec, f, grid, zero, window, scheme);
}

struct ExhaustionResult {
  std::vector<double> N_list;
  std::vector<double> sup_norms;  // |u_N|_inf over the full Q_(-N, N)
  std::vector<double> d_N;        // sup over Q_(-W, W) of |u_N - u_N'| for consecutive N
  double cauchy_ratio = 0.0;      // fitted geometric ratio of d_N (0 when trivial)
  double sliding_f_norm = 0.0;
  double C0_empirical = 0.0;          // max_N |u_N| / |f|_*
  double bound_variation_all = 0.0;   // relative spread of |u_N| across all N
  double bound_variation_top = 0.0;   // across the top half of N_list
  double W = 0.0;
  EvolutionTrace u0;  // largest-N trace restricted to (-W, W)
};

/// Constructive stand-in for the diagonal limit: solve on the
/// expanding truncations, verify the N-uniform bound and the Cauchy property
/// of the window differences, and return the largest-N window as u0.
inline ExhaustionResult exhaustion_limit(const CoefficientSpec& spec, const SourceSpec& f,
                                         GridPtr grid, const std::vector<double>& N_list,
                                         double W, double dt,
                                         Scheme scheme = Scheme::implicit_euler) {
  if (N_list.size() < 2) throw Error(errc::config_error, "exhaustion needs at least two radii");
  for (std::size_t k = 0; k + 1 < N_list.size(); ++k)
    if (!(N_list[k] < N_list[k + 1]))
      throw Error(errc::config_error, "N_list must be strictly increasing");
  if (!(N_list.front() >= 2.0 * W))
    throw Error(errc::config_error, "exhaustion requires min N >= 2 W");

  ExhaustionResult res;
  res.N_list = N_list;
  res.W = W;

  auto restrict_window = [&](const EvolutionTrace& tr) {
    EvolutionTrace out;
    out.grid = tr.grid;
    out.dt = tr.dt;
    out.scheme = tr.scheme;
    out.has_source = tr.has_source;
    out.t_start = -W;
    long long k0 = tr.slice_index(-W), k1 = tr.slice_index(W);
    for (long long k = k0; k <= k1; ++k)
      out.slices.push_back(tr.slices[static_cast<std::size_t>(k)]);
    return out;
  };

  std::vector<EvolutionTrace> windows;
  for (double N : N_list) {
    EvolutionTrace tr = exhaustion_solve(spec, f, grid, N, dt, scheme);
    double sup = 0.0;
    for (const auto& s : tr.slices) sup = std::max(sup, s.lpNorm<Eigen::Infinity>());
    res.sup_norms.push_back(sup);
    windows.push_back(restrict_window(tr));
  }

  for (std::size_t k = 0; k + 1 < windows.size(); ++k) {
    double d = 0.0;
    for (std::size_t s = 0; s < windows[k].slices.size(); ++s)
      d = std::max(d, (windows[k].slices[s] - windows[k + 1].slices[s]).lpNorm<Eigen::Infinity>());
    res.d_N.push_back(d);
  }

  double scale = 0.0;
  for (double s : res.sup_norms) scale = std::max(scale, s);
  bool trivial = scale <= 1e-300;
  if (!trivial) {
    for (std::size_t k = 0; k + 1 < res.d_N.size(); ++k)
      if (!(res.d_N[k + 1] < res.d_N[k]))
        throw Error(errc::no_cauchy_decay,
                    "window differences d_N are not decreasing; f may have unbounded sliding "
                    "norm or dt is too coarse");
    std::vector<double> qs;
    for (std::size_t k = 0; k + 1 < res.d_N.size(); ++k)
      if (res.d_N[k] > 0.0) qs.push_back(res.d_N[k + 1] / res.d_N[k]);
    if (!qs.empty()) {
      double s = 0.0;
      for (double q : qs) s += std::log(q);
      res.cauchy_ratio = std::exp(s / static_cast<double>(qs.size()));
    }
  }

  res.sliding_f_norm =
      f.is_zero ? 0.0 : sliding_norm(f, -N_list.back(), N_list.back(), *grid, dt);
  if (res.sliding_f_norm > 0.0) {
    for (double s : res.sup_norms) res.C0_empirical = std::max(res.C0_empirical, s);
    res.C0_empirical /= res.sliding_f_norm;
  }

  auto variation = [&](std::size_t from) {
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (std::size_t k = from; k < res.sup_norms.size(); ++k) {
      mn = std::min(mn, res.sup_norms[k]);
      mx = std::max(mx, res.sup_norms[k]);
    }
    return mn > 0.0 ? (mx - mn) / mn : 0.0;
  };
  res.bound_variation_all = variation(0);
  res.bound_variation_top = variation(res.sup_norms.size() / 2);

  res.u0 = std::move(windows.back());
  return res;
}

struct DecompositionReport {
  double a = 0.0;              // coefficient of the eternal solution
  double residual = 0.0;       // sup |u - u0 - a w|
  double a_field_spread = 0.0; // constancy diagnostic of (u - u0)/w
};

/// Splits a bounded-below solution as u0 + a w: a = (u - u0)/w at
/// (reference, t = 1); the input must be
/// bounded below by u0 up to tolerance, otherwise it is not in U-tilde.
inline DecompositionReport decompose(const EvolutionTrace& u, const EvolutionTrace& u0,
                                     const EternalSolution& w) {
  if (u.grid->size() != u0.grid->size() ||
      std::abs(u.dt - u0.dt) > 1e-12 * std::max(1.0, u.dt))
    throw Error(errc::bad_grid, "decompose requires traces on a shared lattice");
  double a_start = std::max(u.t_start, u0.t_start);
  double a_end = std::min(u.t_end(), u0.t_end());
  if (!(a_start <= 1.0 && 1.0 <= a_end))
    throw Error(errc::bad_window, "decompose window must contain the reference time t = 1");
  CylinderWindow common(a_start, a_end, u.dt);
  EvolutionTrace wt = w.trace_on(common, u.scheme);

  double u_scale = 0.0;
  for (const auto& s : u.slices) u_scale = std::max(u_scale, s.lpNorm<Eigen::Infinity>());
  const double neg_tol = 1e-10 * std::max(1.0, u_scale);

  const int ref = u.grid->reference_node();
  double a = (u.value(ref, 1.0) - u0.value(ref, 1.0)) / wt.value(ref, 1.0);

  double min_diff = std::numeric_limits<double>::infinity();
  double residual = 0.0;
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  long double rsum = 0.0L;
  long long count = 0;
  for (long long k = 0; k <= common.steps(); ++k) {
    double t = common.time_at(k);
    const auto& su = u.at_time(t);
    const auto& s0 = u0.at_time(t);
    const auto& sw = wt.slices[static_cast<std::size_t>(k)];
    for (int i = 0; i < u.grid->size(); ++i) {
      double diff = su[i] - s0[i];
      min_diff = std::min(min_diff, diff);
      residual = std::max(residual, std::abs(diff - a * sw[i]));
      double r = diff / sw[i];
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      rsum += r;
      ++count;
    }
  }
  if (min_diff < -neg_tol || a < -1e-10)
    throw Error(errc::negative_coefficient,
                "u - u0 dips to " + std::to_string(min_diff) +
                    "; input is not bounded below by u0 (not in U-tilde)");

  DecompositionReport rep;
  rep.a = a;
  rep.residual = residual;
  double rmean = static_cast<double>(rsum / static_cast<long double>(count));
  rep.a_field_spread = std::abs(rmean) > 1e-12 ? (rmax - rmin) / std::abs(rmean) : 0.0;
  return rep;
}

}  // namespace parlab
