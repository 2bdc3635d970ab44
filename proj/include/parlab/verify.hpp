#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "parlab/eternal.hpp"
#include "parlab/evolution.hpp"
#include "parlab/norms.hpp"

namespace parlab {

// ---------------------------------------------------------------------------
// one-step decay of the sup-profile
// ---------------------------------------------------------------------------

struct DecayReport {
  std::vector<double> t0_list;
  std::vector<double> ratios;        // u-hat(t0+1) / u-hat(t0); 0/0 steps excluded
  std::vector<bool> trivial;         // u-hat(t0) = 0, recorded as trivially satisfied
  std::vector<double> slab_f_norms;  // per t0
  double delta = 0.0;                // 1 - max ratio over nontrivial steps
  double affine_p = 0.0;             // fitted one-step bound u-hat(t0+1) <= p u-hat(t0) + q |f|
  double affine_q = 0.0;
  bool homogeneous = true;
};

/// Measures the one-step decay of u-hat at integer t0 across the trace. For
/// f = 0 this yields delta; for f != 0 the affine bound pair (p, q) is fitted
/// so that the bound holds at every sampled step; the source coefficient q
/// is reported as a single opaque number.
inline DecayReport check_decay_step(const EvolutionTrace& trace, const SourceSpec& f) {
  if (trace.t_end() - trace.t_start < 3.0 - 1e-9)
    throw Error(errc::window_too_short, "decay check needs a trace spanning at least 3 time units");
  SupProfile prof = sup_profile(trace);

  DecayReport rep;
  rep.homogeneous = f.is_zero;
  std::vector<double> u0s, u1s;
  double t0 = std::ceil(trace.t_start - 1e-9);
  for (; t0 + 2.0 <= trace.t_end() + 1e-9; t0 += 1.0) {
    double u0 = prof.values[static_cast<std::size_t>(trace.slice_index(t0))];
    double u1 = prof.values[static_cast<std::size_t>(trace.slice_index(t0 + 1.0))];
    double nf = f.is_zero ? 0.0 : slab_norm(f, t0, *trace.grid, trace.dt);
    rep.t0_list.push_back(t0);
    rep.slab_f_norms.push_back(nf);
    u0s.push_back(u0);
    u1s.push_back(u1);
    rep.trivial.push_back(u0 <= 0.0);
    rep.ratios.push_back(u0 > 0.0 ? u1 / u0 : 0.0);
  }

  double max_ratio = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < rep.ratios.size(); ++k) {
    if (rep.trivial[k]) continue;
    max_ratio = std::max(max_ratio, rep.ratios[k]);
    any = true;
  }
  rep.delta = any ? 1.0 - max_ratio : 1.0;

  if (!f.is_zero) {
    // least-squares slope p (clamped to [0, 1)), then the smallest q making
    // the affine bound hold at every step; u-hat(t0) = 0 steps still bind the
    // source term, unlike in the homogeneous case
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < u0s.size(); ++k) {
      sxx += u0s[k] * u0s[k];
      sxy += u0s[k] * u1s[k];
    }
    double p = sxx > 0.0 ? std::clamp(sxy / sxx, 0.0, 1.0 - 1e-12) : 0.0;
    double q = 0.0;
    for (std::size_t k = 0; k < u0s.size(); ++k)
      if (rep.slab_f_norms[k] > 0.0)
        q = std::max(q, (u1s[k] - p * u0s[k]) / rep.slab_f_norms[k]);
    rep.affine_p = p;
    rep.affine_q = std::max(q, 0.0);
  } else {
    rep.affine_p = 1.0 - rep.delta;
    rep.affine_q = 0.0;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// maximum principles on the full and forward cylinders
// ---------------------------------------------------------------------------

enum class MaxPrincipleScope { full_Q, Q_plus };

struct MaxPrincipleReport {
  std::string scope;
  double sup_u_plus = 0.0;
  double boundary_sup_plus = 0.0;  // sup over the stored parabolic boundary data
  double sliding_f_norm = 0.0;
  double empirical_C = 0.0;  // (sup u+ - boundary sup+) / |f|_* when f != 0
  bool pass = true;          // for f = 0: sup u+ <= boundary sup+
};

inline MaxPrincipleReport check_max_principle(const EvolutionTrace& trace, const SourceSpec& f,
                                              MaxPrincipleScope scope) {
  MaxPrincipleReport rep;
  rep.scope = scope == MaxPrincipleScope::full_Q ? "full_Q" : "Q_plus";
  double sup = 0.0;
  for (const auto& s : trace.slices) sup = std::max(sup, std::max(0.0, s.maxCoeff()));
  rep.sup_u_plus = sup;
  rep.boundary_sup_plus =
      scope == MaxPrincipleScope::Q_plus ? std::max(0.0, trace.slices.front().maxCoeff()) : 0.0;
  if (!f.is_zero) {
    rep.sliding_f_norm =
        sliding_norm(f, trace.t_start, std::max(trace.t_end(), trace.t_start + 2.0), *trace.grid,
                     trace.dt);
    rep.empirical_C = rep.sliding_f_norm > 0.0
                          ? std::max(0.0, sup - rep.boundary_sup_plus) / rep.sliding_f_norm
                          : 0.0;
    rep.pass = true;  // quantitative constant is reported, not gated
  } else {
    rep.pass = sup <= rep.boundary_sup_plus * (1.0 + 1e-9) + 1e-12;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// two-term decay envelope on the forward cylinder
// ---------------------------------------------------------------------------

struct QplusDecayReport {
  double C0 = 0.0;
  double alpha = 0.0;
  double C1 = 0.0;       // plateau / |f|_*
  double plateau = 0.0;  // late-time floor of u-hat
  double u_hat0 = 0.0;
  double sliding_f_norm = 0.0;
  long long fit_points = 0;
  double fit_residual = 0.0;  // RMS residual of the log fit
};

/// Fits u-hat(t) <= C0 u-hat(t0) e^{-alpha (t - t0)} + C1 |f|_*: the floor is
/// the late-time plateau, the excess above it is log-fitted. The first unit
/// after the initial slice is excluded from the fit (transient pollution).
inline QplusDecayReport check_decay_qplus(const EvolutionTrace& trace, const SourceSpec& f) {
  SupProfile prof = sup_profile(trace);
  QplusDecayReport rep;
  rep.u_hat0 = prof.values.front();
  const std::size_t n = prof.values.size();
  if (n < 16) throw Error(errc::window_too_short, "trace too short for the envelope fit");

  double prof_max = 0.0;
  for (double v : prof.values) prof_max = std::max(prof_max, v);
  if (prof_max <= 0.0) return rep;  // identically zero solution: every constant is 0

  if (!f.is_zero) {
    // plateau from the last decile; require it to have settled
    std::size_t tail = std::max<std::size_t>(2, n / 10);
    double last = 0.0, prev = 0.0;
    for (std::size_t k = n - tail; k < n; ++k) last += prof.values[k];
    last /= static_cast<double>(tail);
    for (std::size_t k = n - 2 * tail; k < n - tail; ++k) prev += prof.values[k];
    prev /= static_cast<double>(tail);
    double settle_scale = std::max({last, prev, 1e-12 * std::max(1.0, rep.u_hat0)});
    if (std::abs(last - prev) > 0.05 * settle_scale)
      throw Error(errc::plateau_not_reached,
                  "late-time plateau still moving; extend the trace to separate the two terms");
    rep.plateau = last;
    rep.sliding_f_norm = sliding_norm(f, trace.t_start,
                                      std::max(trace.t_end(), trace.t_start + 2.0), *trace.grid,
                                      trace.dt);
    rep.C1 = rep.sliding_f_norm > 0.0 ? rep.plateau / rep.sliding_f_norm : 0.0;
  } else if (rep.u_hat0 > 0.0 && prof.values.back() > 0.1 * rep.u_hat0) {
    throw Error(errc::plateau_not_reached, "homogeneous trace has not decayed enough to fit");
  }

  // log fit of the excess, skipping the first unit of time
  double e0 = std::abs(prof.values.front() - rep.plateau);
  double floor_abs = std::max(1e-3 * e0, rep.plateau > 0.0 ? 0.02 * rep.plateau : 0.0);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < n; ++k) {
    double t = prof.times[k] - trace.t_start;
    if (t < 1.0) continue;
    double e = std::abs(prof.values[k] - rep.plateau);
    if (e < floor_abs || e <= 0.0) continue;
    pts.emplace_back(t, std::log(e));
  }
  if (pts.size() < 4)
    throw Error(errc::plateau_not_reached, "not enough excess samples above the floor to fit");
  for (auto& [x, yv] : pts) {
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  double m = static_cast<double>(pts.size());
  double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  double intercept = (sy - slope * sx) / m;
  rep.alpha = -slope;
  rep.C0 = rep.u_hat0 > 0.0 ? std::exp(intercept) / rep.u_hat0 : 0.0;
  rep.fit_points = static_cast<long long>(pts.size());
  double rss = 0.0;
  for (auto& [x, yv] : pts) {
    double r = yv - (intercept + slope * x);
    rss += r * r;
  }
  rep.fit_residual = std::sqrt(rss / m);
  return rep;
}

// ---------------------------------------------------------------------------
// exponential rate bracket for the sup-profile
// ---------------------------------------------------------------------------

struct RateReport {
  double alpha = 0.0;   // ln(1 + theta)
  double beta = 0.0;    // ln(1 + eta)
  double C = 0.0;       // 1 / (1 + eta)
  double C_prime = 0.0; // 1 + theta
  double theta = 0.0;   // max u-hat(t-1)/u-hat(t) - 1
  double eta = 0.0;     // min u-hat(t)/u-hat(t+1) - 1
  double forward_slope = 0.0;   // -d ln u-hat / dt fitted on t > split
  double backward_slope = 0.0;  // same fitted on t < split
  double forward_residual = 0.0;
  double backward_residual = 0.0;
  double u_hat0 = 0.0;
  long long bracket_violations = 0;
  bool one_sided = false;
};

inline RateReport fit_rates(const SupProfile& profile, double split = 0.0) {
  const std::size_t n = profile.values.size();
  if (n < 2) throw Error(errc::window_too_short, "profile too short");
  for (double v : profile.values)
    if (!(v > 0.0))
      throw Error(errc::non_positive, "rate fit requires a strictly positive profile");

  long long off = std::llround(1.0 / profile.dt);
  if (off <= 0 || std::abs(off * profile.dt - 1.0) > 1e-9)
    throw Error(errc::bad_window, "rate fit requires dt dividing the unit time step");
  if (n <= static_cast<std::size_t>(off))
    throw Error(errc::window_too_short, "profile shorter than one unit of time");

  RateReport rep;
  double rmax = -std::numeric_limits<double>::infinity();
  double rmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + static_cast<std::size_t>(off) < n; ++k) {
    double r = profile.values[k] / profile.values[k + static_cast<std::size_t>(off)];
    rmax = std::max(rmax, r);
    rmin = std::min(rmin, r);
  }
  rep.theta = rmax - 1.0;
  rep.eta = rmin - 1.0;
  rep.alpha = std::log1p(rep.theta);
  rep.beta = std::log1p(rep.eta);
  rep.C = 1.0 / (1.0 + rep.eta);
  rep.C_prime = 1.0 + rep.theta;

  auto logfit = [&](bool forward, double& slope_out, double& resid_out) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long long m = 0;
    for (std::size_t k = 0; k < n; ++k) {
      double t = profile.times[k];
      if (forward ? t < split - 1e-12 : t > split + 1e-12) continue;
      double lv = std::log(profile.values[k]);
      sx += t;
      sy += lv;
      sxx += t * t;
      sxy += t * lv;
      ++m;
    }
    if (m < 2) return false;
    double md = static_cast<double>(m);
    double denom = md * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) return false;
    double slope = (md * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / md;
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double t = profile.times[k];
      if (forward ? t < split - 1e-12 : t > split + 1e-12) continue;
      double r = std::log(profile.values[k]) - (intercept + slope * t);
      rss += r * r;
    }
    slope_out = -slope;
    resid_out = std::sqrt(rss / md);
    return true;
  };

  bool fwd = logfit(true, rep.forward_slope, rep.forward_residual);
  bool bwd = logfit(false, rep.backward_slope, rep.backward_residual);
  rep.one_sided = !(fwd && bwd);

  // pointwise bracket (e1)/(e2) with C, C' from the one-step constants
  double u0 = 0.0;
  {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      double d = std::abs(profile.times[k] - split);
      if (d < best) {
        best = d;
        u0 = profile.values[k];
      }
    }
  }
  rep.u_hat0 = u0;
  const double tol = 1e-9;
  for (std::size_t k = 0; k < n; ++k) {
    double t = profile.times[k] - split;
    double v = profile.values[k];
    bool ok;
    if (t < 0.0) {
      ok = rep.C * u0 * std::exp(rep.beta * std::abs(t)) <= v * (1.0 + tol) &&
           v <= rep.C_prime * u0 * std::exp(rep.alpha * std::abs(t)) * (1.0 + tol);
    } else {
      ok = (1.0 / rep.C_prime) * u0 * std::exp(-rep.alpha * t) <= v * (1.0 + tol) &&
           v <= (1.0 / rep.C) * u0 * std::exp(-rep.beta * t) * (1.0 + tol);
    }
    if (!ok) ++rep.bracket_violations;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// comparison and interior Harnack constants
// ---------------------------------------------------------------------------

struct ComparisonReport {
  double C_star = 1.0;    // max over t >= 0 of max(u/v, v/u) after u(0,1) = v(0,1)
  double harnack_C = 0.0; // max over slabs (t0-2, t0+2) of sup u / u(ref, t0)
  bool harnack_available = false;
  double quotient_min = 0.0;  // normalized ratio over the whole window
  double quotient_max = 0.0;
  bool global_quotient_ok = true;     // 1/C*^2 <= quotient <= C*^2
};

inline ComparisonReport comparison_constant(const EvolutionTrace& u_in,
                                            const EvolutionTrace& v_in) {
  if (u_in.grid->size() != v_in.grid->size() ||
      std::abs(u_in.dt - v_in.dt) > 1e-12 * std::max(1.0, u_in.dt))
    throw Error(errc::bad_grid, "comparison requires traces on a shared grid and lattice");
  for (const auto& s : u_in.slices)
    if (s.minCoeff() <= 0.0) throw Error(errc::non_positive, "u is not strictly positive");
  for (const auto& s : v_in.slices)
    if (s.minCoeff() <= 0.0) throw Error(errc::non_positive, "v is not strictly positive");

  const int ref = u_in.grid->reference_node();
  EvolutionTrace u = u_in.scaled(1.0 / u_in.value(ref, 1.0));
  EvolutionTrace v = v_in.scaled(1.0 / v_in.value(ref, 1.0));

  ComparisonReport rep;
  double cstar = 1.0, qmin = std::numeric_limits<double>::infinity(), qmax = 0.0;
  for (std::size_t k = 0; k < u.slices.size(); ++k) {
    double t = u.time_at(static_cast<long long>(k));
    for (int i = 0; i < u.grid->size(); ++i) {
      double q = u.slices[k][i] / v.slices[k][i];
      qmin = std::min(qmin, q);
      qmax = std::max(qmax, q);
      if (t >= -1e-9) cstar = std::max({cstar, q, 1.0 / q});
    }
  }
  rep.C_star = cstar;
  rep.quotient_min = qmin;
  rep.quotient_max = qmax;
  double c2 = cstar * cstar;
  rep.global_quotient_ok = qmax <= c2 * (1.0 + 1e-9) && qmin >= (1.0 - 1e-9) / c2;

  // interior Harnack constant over slabs (t0 - 2, t0 + 2)
  double harnack = 0.0;
  for (double t0 = std::ceil(u.t_start + 2.0 - 1e-9); t0 + 2.0 <= u.t_end() + 1e-9; t0 += 1.0) {
    double center = u.value(ref, t0);
    if (!(center > 0.0)) continue;
    double sup = 0.0;
    long long k0 = u.slice_index(t0 - 2.0), k1 = u.slice_index(t0 + 2.0);
    for (long long k = k0; k <= k1; ++k)
      sup = std::max(sup, u.slices[static_cast<std::size_t>(k)].maxCoeff());
    harnack = std::max(harnack, sup / center);
    rep.harnack_available = true;
  }
  rep.harnack_C = harnack;
  return rep;
}

// ---------------------------------------------------------------------------
// K_j / L_j tail ratio contraction
// ---------------------------------------------------------------------------

struct ContractionReport {
  std::vector<double> K_j;  // j = 1..j_max, sup of u/w over Q_(j, J)
  std::vector<double> L_j;  // inf over the same
  double K = 0.0;           // (K_jmax + L_jmax) / 2
  double zeta = 0.0;        // fitted gap contraction per unit time
  double envelope_constant = 0.0;  // max over samples of |u - K w| / (e^{-alpha t} w), alpha = -ln zeta
  long long envelope_violations = 0;
  bool monotone_ok = true;  // K_j nonincreasing, L_j nondecreasing, L_j <= K_j
  bool sensitivity_checked = false;
  bool sensitivity_ok = true;
  double J = 0.0;
};

/// Tail ratio bounds of u against the eternal solution w. Q_(j, infinity) is
/// truncated to Q_(j, J); when the trace extends to 2J the tail doubling
/// sensitivity check runs (flagging K_jmax moves above 1%).
inline ContractionReport kl_contraction(const EvolutionTrace& u, const EternalSolution& w,
                                        int j_max, double J) {
  if (j_max < 1) throw Error(errc::horizon_too_short, "j_max must be at least 1");
  if (J < static_cast<double>(j_max) + 2.0)
    throw Error(errc::horizon_too_short, "horizon J must be at least j_max + 2");
  if (u.t_end() + 1e-9 < J)
    throw Error(errc::horizon_too_short, "trace ends before the horizon J");

  CylinderWindow full(u.t_start, u.t_end(), u.dt);
  EvolutionTrace wt = w.trace_on(full, u.scheme);

  const std::size_t n = u.slices.size();
  std::vector<double> slice_max(n), slice_min(n);
  for (std::size_t k = 0; k < n; ++k) {
    double t = u.time_at(static_cast<long long>(k));
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (int i = 0; i < u.grid->size(); ++i) {
      double uu = u.slices[k][i], ww = wt.slices[k][i];
      if (t >= -1e-9 && (!(uu > 0.0) || !(ww > 0.0)))
        throw Error(errc::non_positive, "u and w must be positive on (0, J)");
      double r = uu / ww;
      mx = std::max(mx, r);
      mn = std::min(mn, r);
    }
    slice_max[k] = mx;
    slice_min[k] = mn;
  }

  auto window_extrema = [&](double a, double b) {
    long long k0 = u.slice_index(a), k1 = u.slice_index(b);
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    for (long long k = k0; k <= k1; ++k) {
      mx = std::max(mx, slice_max[static_cast<std::size_t>(k)]);
      mn = std::min(mn, slice_min[static_cast<std::size_t>(k)]);
    }
    return std::pair<double, double>{mx, mn};
  };

  ContractionReport rep;
  rep.J = J;
  for (int j = 1; j <= j_max; ++j) {
    auto [mx, mn] = window_extrema(static_cast<double>(j), J);
    rep.K_j.push_back(mx);
    rep.L_j.push_back(mn);
  }
  for (std::size_t k = 0; k + 1 < rep.K_j.size(); ++k) {
    if (rep.K_j[k + 1] > rep.K_j[k] * (1.0 + 1e-12)) rep.monotone_ok = false;
    if (rep.L_j[k + 1] < rep.L_j[k] * (1.0 - 1e-12)) rep.monotone_ok = false;
  }
  for (std::size_t k = 0; k < rep.K_j.size(); ++k)
    if (rep.L_j[k] > rep.K_j[k]) rep.monotone_ok = false;
  rep.K = 0.5 * (rep.K_j.back() + rep.L_j.back());

  // gap contraction zeta from successive gaps
  std::vector<double> gaps;
  for (std::size_t k = 0; k < rep.K_j.size(); ++k) gaps.push_back(rep.K_j[k] - rep.L_j[k]);
  double gap_floor = 1e-14 * std::max(1.0, std::abs(rep.K));
  std::vector<double> qs;
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k)
    if (gaps[k] > gap_floor && gaps[k + 1] > gap_floor) qs.push_back(gaps[k + 1] / gaps[k]);
  if (qs.empty()) {
    rep.zeta = 0.0;
  } else {
    double s = 0.0;
    for (double q : qs) s += std::log(q);
    rep.zeta = std::exp(s / static_cast<double>(qs.size()));
  }

  // envelope |u - K w| <= (K_[t] - L_[t]) w on t in [1, j_max + 1]
  const double slack = 1e-9;
  double env_scale = 0.0;
  long long k0 = u.slice_index(1.0);
  long long k1 = u.slice_index(std::min(static_cast<double>(j_max) + 1.0, u.t_end()));
  for (long long k = k0; k <= k1; ++k) {
    double t = u.time_at(k);
    int j = std::min(static_cast<int>(std::floor(t + 1e-12)), j_max);
    double gap = rep.K_j[static_cast<std::size_t>(j - 1)] - rep.L_j[static_cast<std::size_t>(j - 1)];
    for (int i = 0; i < u.grid->size(); ++i) {
      double uu = u.slices[static_cast<std::size_t>(k)][i];
      double ww = wt.slices[static_cast<std::size_t>(k)][i];
      double lhs = std::abs(uu - rep.K * ww);
      if (lhs > gap * ww * (1.0 + slack) + 1e-14 * std::abs(uu)) ++rep.envelope_violations;
      if (ww > 0.0) env_scale = std::max(env_scale, lhs / ww);
    }
  }
  rep.envelope_constant = env_scale;

  // tail-doubling sensitivity
  if (u.t_end() + 1e-9 >= 2.0 * J) {
    auto [mx2, mn2] = window_extrema(static_cast<double>(j_max), 2.0 * J);
    double kref = std::max(std::abs(rep.K_j.back()), 1e-12);
    rep.sensitivity_checked = true;
    rep.sensitivity_ok = std::abs(mx2 - rep.K_j.back()) <= 0.01 * kref &&
                         std::abs(mn2 - rep.L_j.back()) <= 0.01 * kref;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// proportionality of positive eternal solutions
// ---------------------------------------------------------------------------

struct ScaleReport {
  double K = 0.0;       // mean of the ratio field u/v
  double spread = 0.0;  // (max - min) / mean
  double r_min = 0.0;
  double r_max = 0.0;
};

inline ScaleReport proportionality_traces(const EvolutionTrace& u, const EvolutionTrace& v) {
  if (u.slices.size() != v.slices.size() || u.grid->size() != v.grid->size())
    throw Error(errc::bad_grid, "proportionality requires traces on a shared lattice");
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = -std::numeric_limits<double>::infinity();
  long double sum = 0.0L;
  long long count = 0;
  for (std::size_t k = 0; k < u.slices.size(); ++k) {
    for (int i = 0; i < u.grid->size(); ++i) {
      double vv = v.slices[k][i];
      double uu = u.slices[k][i];
      if (!(vv > 0.0) || !(uu > 0.0))
        throw Error(errc::non_positive, "proportionality requires positive traces");
      double r = uu / vv;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      sum += r;
      ++count;
    }
  }
  ScaleReport rep;
  rep.K = static_cast<double>(sum / static_cast<long double>(count));
  rep.r_min = rmin;
  rep.r_max = rmax;
  rep.spread = (rmax - rmin) / rep.K;
  return rep;
}

inline ScaleReport proportionality(const EternalSolution& u, const EternalSolution& v,
                                   const CylinderWindow& window, Scheme scheme) {
  return proportionality_traces(u.trace_on(window, scheme), v.trace_on(window, scheme));
}

}  // namespace parlab
