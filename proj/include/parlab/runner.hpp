#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <semaphore>
#include <vector>

#include "parlab/config.hpp"
#include "parlab/csv.hpp"
#include "parlab/inhomogeneous.hpp"
#include "parlab/verify.hpp"

namespace parlab {

struct CheckResult {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct RunResult {
  bool overall_pass = true;
  std::vector<CheckResult> checks;
  json reports = json::object();
  json provenance = json::object();
  double wall_time_sec = 0.0;  // sidecar only; result.json stays byte-stable
};

namespace detail {

struct ExperimentOutput {
  std::vector<CheckResult> checks;
  json reports = json::object();
  // deferred CSV payloads, written by the aggregator
  std::vector<std::pair<std::string, EvolutionTrace>> trace_csvs;
  std::vector<std::pair<std::string, SupProfile>> profile_csvs;
  std::vector<std::pair<std::string, json>> json_files;
  std::vector<std::pair<std::string, std::vector<std::array<double, 3>>>> series_csvs;
};

struct Context {
  const ExperimentConfig& cfg;
  GridPtr grid;
};

inline void add_check(ExperimentOutput& out, const std::string& name, bool pass, double value,
                      double threshold, const std::string& detail = "") {
  out.checks.push_back({name, pass, value, threshold, detail});
}

inline json grid_json(const Grid& g) {
  json j;
  j["dim"] = g.dim();
  j["h"] = g.dim() == 1 ? json(g.spacing()[0]) : json{g.spacing()[0], g.spacing()[1]};
  j["interior_count"] = g.size();
  j["reference_node"] = g.reference_node();
  j["reference_coords"] = {g.node(g.reference_node())[0], g.node(g.reference_node())[1]};
  j["reference_is_origin"] = g.reference_is_origin();
  const auto& d = g.domain();
  if (d.kind == SpatialDomain::Kind::interval)
    j["domain"] = {{"kind", "interval"}, {"lo", d.lo}, {"hi", d.hi}};
  else {
    json verts = json::array();
    for (const auto& v : d.vertices) verts.push_back({v[0], v[1]});
    j["domain"] = {{"kind", "polygon"}, {"vertices", verts}};
  }
  return j;
}

inline Eigen::VectorXd random_positive_slice(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = u(rng);
  return v;
}

inline Eigen::VectorXd expression_slice(const Grid& g, const Expr& e, double t = 0.0) {
  Eigen::VectorXd v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = e(g.node(i)[0], g.node(i)[1], t);
  return v;
}

/// Builds the eternal solution by the route matching the operator's declared
/// time dependence (spectral route), or far_past when nothing else applies.
inline EternalSolution spectral_eternal(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.spec.effectively_autonomous()) {
    auto ep = principal_eigenpair(cfg.spec, ctx.grid, cfg.param("eigen_tol", 1e-11));
    return eternal_from_eigenpair(ep, ctx.grid);
  }
  if (cfg.spec.time_dependence == TimeDependence::periodic) {
    auto fr = floquet_principal(cfg.spec, ctx.grid, cfg.spec.period, cfg.dt,
                                cfg.param("floquet_tol", 1e-12), cfg.scheme);
    return eternal_from_floquet(fr, ctx.grid);
  }
  auto rng = named_stream(cfg.seed, "eternal.spectral_fallback");
  CylinderWindow window(0.0, 12.0, cfg.dt);
  return far_past_adaptive(cfg.spec, ctx.grid, cfg.param("T_back", 20.0), window,
                           random_positive_slice(*ctx.grid, rng), cfg.scheme,
                           cfg.param("seed_tol", 1e-6), cfg.param("T_back_max", 80.0));
}

inline CylinderWindow window_param(const ExperimentConfig& cfg, double lo, double hi) {
  if (cfg.params.contains("window")) {
    const json& w = cfg.params["window"];
    if (!w.is_array() || w.size() != 2)
      throw Error(errc::config_error, "params.window must be [t0, t1]");
    lo = w[0].get<double>();
    hi = w[1].get<double>();
  }
  return CylinderWindow(lo, hi, cfg.dt);
}

inline json scale_report_json(const ScaleReport& r) {
  return json{{"K", r.K}, {"spread", r.spread}, {"r_min", r.r_min}, {"r_max", r.r_max}};
}

// ---------------------------------------------------------------------------
// experiments
// ---------------------------------------------------------------------------

inline ExperimentOutput experiment_eternal(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  CylinderWindow window = window_param(cfg, 0.0, 12.0);

  auto rng = named_stream(cfg.seed, "eternal.far_past_seed");
  EternalSolution w_far = far_past_adaptive(
      cfg.spec, ctx.grid, cfg.param("T_back", 20.0), window, random_positive_slice(*ctx.grid, rng),
      cfg.scheme, cfg.param("seed_tol", 1e-6), cfg.param("T_back_max", 80.0));
  add_check(out, "eternal.two_seed", true, 0.0, cfg.param("seed_tol", 1e-6),
            "independent seeds reproduced the window profiles");

  bool positive = true;
  for (const auto& s : w_far.orbit.slices) positive = positive && s.minCoeff() > 0.0;
  add_check(out, "eternal.positivity", positive, positive ? 1.0 : 0.0, 1.0);

  int ref = ctx.grid->reference_node();
  double at1 = w_far.orbit.value(ref, 1.0);
  add_check(out, "eternal.normalization", std::abs(at1 - 1.0) <= 1e-10, at1, 1e-10);

  auto prof = sup_profile(w_far.orbit);
  auto prep = profile_checks(prof, cfg.param("eps_tail", 1e-6));
  add_check(out, "eternal.monotone_profile", prep.violations == 0,
            static_cast<double>(prep.violations), 0.0);

  json routes = json::array();
  routes.push_back({{"route", "far_past"}, {"rate", w_far.rate}});

  bool have_spectral = cfg.spec.effectively_autonomous() ||
                       cfg.spec.time_dependence == TimeDependence::periodic;
  if (have_spectral) {
    EternalSolution w_spec = spectral_eternal(ctx);
    routes.push_back({{"route", route_name(w_spec.route)}, {"rate", w_spec.rate}});
    auto agree = proportionality(w_spec, w_far, window, cfg.scheme);
    double tol = cfg.param("route_spread_tol", 1e-6);
    add_check(out, "eternal.route_agreement", agree.spread <= tol, agree.spread, tol);
    out.reports["ScaleReport"] = scale_report_json(agree);

    // the far_past empirical rate lives in the discrete dynamics: compare the
    // eigenvalue through the scheme's step factor; the floquet rate already is
    // the scheme's mean rate
    double scheme_rate = w_spec.rate;
    if (w_spec.route == EternalRoute::eigenpair)
      scheme_rate = -std::log(EternalSolution::scheme_step_factor(w_spec.rate, cfg.dt, cfg.scheme)) /
                    cfg.dt;
    double rate_tol = cfg.param("rate_tol", 1e-6);
    add_check(out, "eternal.rate_consistency", std::abs(w_far.rate - scheme_rate) <= rate_tol,
              std::abs(w_far.rate - scheme_rate), rate_tol);
  }

  json meta;
  meta["route"] = route_name(w_far.route);
  meta["rate"] = w_far.rate;
  meta["normalization"] = {{"node", ref}, {"t", 1.0}, {"value", at1}};
  meta["grid"] = grid_json(*ctx.grid);
  meta["scheme"] = scheme_name(cfg.scheme);
  meta["routes"] = routes;
  meta["config_hash"] = config_hash(cfg.raw);
  out.reports["EternalSolution"] = meta;
  out.json_files.emplace_back("eternal_meta.json", meta);
  out.trace_csvs.emplace_back("eternal_trace.csv", w_far.orbit);
  out.profile_csvs.emplace_back("u_hat.csv", prof);
  return out;
}

inline ExperimentOutput experiment_rates(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  // rates need a window straddling t = 0 for the two-sided bracket, so the
  // suite-wide params.window does not apply here
  CylinderWindow window(-6.0, 6.0, cfg.dt);
  if (cfg.params.contains("rates_window")) {
    const json& w = cfg.params["rates_window"];
    if (!w.is_array() || w.size() != 2)
      throw Error(errc::config_error, "params.rates_window must be [t0, t1]");
    window = CylinderWindow(w[0].get<double>(), w[1].get<double>(), cfg.dt);
  }

  auto rng = named_stream(cfg.seed, "rates.far_past_seed");
  EternalSolution w = far_past_adaptive(
      cfg.spec, ctx.grid, std::max(cfg.param("T_back", 20.0), window.length()), window,
      random_positive_slice(*ctx.grid, rng), cfg.scheme, cfg.param("seed_tol", 1e-6),
      cfg.param("T_back_max", 80.0));
  auto prof = sup_profile(w.orbit);
  auto rep = fit_rates(prof, 0.0);

  add_check(out, "rates.bracket", rep.bracket_violations == 0,
            static_cast<double>(rep.bracket_violations), 0.0);
  add_check(out, "rates.order", rep.beta > 0.0 && rep.beta <= rep.alpha + 1e-12, rep.beta,
            rep.alpha, "0 < beta <= alpha");
  bool slopes_ok = !rep.one_sided &&
                   rep.beta <= rep.forward_slope + 1e-9 && rep.forward_slope <= rep.alpha + 1e-9 &&
                   rep.beta <= rep.backward_slope + 1e-9 && rep.backward_slope <= rep.alpha + 1e-9;
  add_check(out, "rates.slopes_in_bracket", slopes_ok, rep.forward_slope, rep.alpha);

  json jr;
  jr["alpha"] = rep.alpha;
  jr["beta"] = rep.beta;
  jr["C"] = rep.C;
  jr["C_prime"] = rep.C_prime;
  jr["theta"] = rep.theta;
  jr["eta"] = rep.eta;
  jr["forward_slope"] = rep.forward_slope;
  jr["backward_slope"] = rep.backward_slope;
  jr["forward_residual"] = rep.forward_residual;
  jr["backward_residual"] = rep.backward_residual;
  jr["bracket_violations"] = rep.bracket_violations;
  jr["one_sided"] = rep.one_sided;
  out.reports["RateReport"] = jr;

  // decay step on the forward part of the profile
  CylinderWindow fwd(0.0, window.t_end, cfg.dt);
  EvolutionTrace fwd_trace = w.trace_on(fwd, cfg.scheme);
  auto dec = check_decay_step(fwd_trace, SourceSpec::zero());
  add_check(out, "decay.delta_in_01", dec.delta > 0.0 && dec.delta < 1.0, dec.delta, 1.0,
            "one-step contraction of u-hat");
  json jd;
  jd["t0_list"] = dec.t0_list;
  jd["ratios"] = dec.ratios;
  jd["trivial"] = dec.trivial;
  jd["slab_f_norms"] = dec.slab_f_norms;
  jd["delta"] = dec.delta;
  jd["affine_p"] = dec.affine_p;
  jd["affine_q"] = dec.affine_q;
  jd["homogeneous"] = dec.homogeneous;
  out.reports["DecayReport"] = jd;

  auto qp = check_decay_qplus(fwd_trace, SourceSpec::zero());
  json jq;
  jq["C0"] = qp.C0;
  jq["alpha"] = qp.alpha;
  jq["C1"] = qp.C1;
  jq["plateau"] = qp.plateau;
  jq["u_hat0"] = qp.u_hat0;
  jq["fit_points"] = qp.fit_points;
  jq["fit_residual"] = qp.fit_residual;
  out.reports["QplusDecayReport"] = jq;
  add_check(out, "decay.qplus_rate_positive", qp.alpha > 0.0, qp.alpha, 0.0);

  out.profile_csvs.emplace_back("u_hat.csv", prof);
  return out;
}

inline ExperimentOutput experiment_comparison(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  CylinderWindow window = window_param(cfg, 0.0, 12.0);

  auto rng_u = named_stream(cfg.seed, "comparison.seed_u");
  auto rng_v = named_stream(cfg.seed, "comparison.seed_v");
  auto u = far_past_adaptive(cfg.spec, ctx.grid, cfg.param("T_back", 20.0), window,
                             random_positive_slice(*ctx.grid, rng_u), cfg.scheme,
                             cfg.param("seed_tol", 1e-6), cfg.param("T_back_max", 80.0));
  auto v = far_past_adaptive(cfg.spec, ctx.grid, cfg.param("T_back", 20.0), window,
                             random_positive_slice(*ctx.grid, rng_v), cfg.scheme,
                             cfg.param("seed_tol", 1e-6), cfg.param("T_back_max", 80.0));

  auto rep = comparison_constant(u.orbit, v.orbit);
  add_check(out, "comparison.cstar_lower", rep.C_star >= 1.0, rep.C_star, 1.0);
  double ctol = cfg.param("cstar_tol", 1e-5);
  add_check(out, "comparison.cstar_converged", rep.C_star <= 1.0 + ctol, rep.C_star - 1.0, ctol,
            "two eternal candidates coincide up to C*");
  add_check(out, "comparison.global_quotient", rep.global_quotient_ok, rep.global_quotient_ok ? 1.0 : 0.0, 1.0);

  auto prop = proportionality_traces(u.orbit, v.orbit);
  double tol = cfg.param("route_spread_tol", 1e-6);
  add_check(out, "comparison.proportionality_spread", prop.spread <= tol, prop.spread, tol);

  json jr;
  jr["C_star"] = rep.C_star;
  jr["harnack_C"] = rep.harnack_C;
  jr["harnack_available"] = rep.harnack_available;
  jr["quotient_min"] = rep.quotient_min;
  jr["quotient_max"] = rep.quotient_max;
  jr["global_quotient_ok"] = rep.global_quotient_ok;
  out.reports["ComparisonReport"] = jr;
  out.reports["ScaleReport"] = scale_report_json(prop);
  return out;
}

inline ExperimentOutput experiment_contraction(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  int j_max = static_cast<int>(cfg.param("j_max", 4.0));
  double J = cfg.param("J", static_cast<double>(j_max) + 6.0);
  CylinderWindow window(0.0, 2.0 * J, cfg.dt);

  Expr init = Expr::parse(cfg.param_str("initial", "sin(y1) + 0.3*sin(2*y1)"));
  Eigen::VectorXd seed = expression_slice(*ctx.grid, init);
  auto u = evolve(cfg.spec, SourceSpec::zero(), ctx.grid, {0.0, seed}, window, cfg.scheme);
  // normalize u at (reference, 1), matching the comparison-constant convention
  double at1 = u.value(ctx.grid->reference_node(), 1.0);
  if (!(at1 > 0.0)) throw Error(errc::non_positive, "contraction input vanishes at (reference, 1)");
  auto u_norm = u.scaled(1.0 / at1);

  EternalSolution w = spectral_eternal(ctx);
  auto rep = kl_contraction(u_norm, w, j_max, J);

  add_check(out, "contraction.monotone", rep.monotone_ok, rep.monotone_ok ? 1.0 : 0.0, 1.0,
            "K_j nonincreasing, L_j nondecreasing, L_j <= K_j");
  add_check(out, "contraction.envelope", rep.envelope_violations == 0,
            static_cast<double>(rep.envelope_violations), 0.0);
  double zeta_max = cfg.param("zeta_max", 0.9);
  add_check(out, "contraction.gap_contracts", rep.zeta < zeta_max, rep.zeta, zeta_max);
  if (rep.sensitivity_checked)
    add_check(out, "contraction.tail_insensitive", rep.sensitivity_ok, rep.sensitivity_ok ? 1.0 : 0.0,
              1.0, "doubling the tail moves K_jmax by <= 1%");
  if (cfg.params.contains("expect_K")) {
    double expect = cfg.param("expect_K", 1.0);
    double tol = cfg.param("K_tol", 1e-3);
    add_check(out, "contraction.K_matches", std::abs(rep.K - expect) <= tol, rep.K, tol,
              "against the two-mode oracle");
  }
  if (cfg.params.contains("expect_zeta")) {
    double expect = cfg.param("expect_zeta", 0.05);
    double rtol = cfg.param("zeta_rtol", 0.10);
    add_check(out, "contraction.zeta_matches", std::abs(rep.zeta - expect) <= rtol * expect,
              rep.zeta, expect, "per-unit gap ratio against the spectral-gap oracle");
  }

  json jr;
  jr["K_j"] = rep.K_j;
  jr["L_j"] = rep.L_j;
  jr["K"] = rep.K;
  jr["zeta"] = rep.zeta;
  jr["envelope_constant"] = rep.envelope_constant;
  jr["envelope_violations"] = rep.envelope_violations;
  jr["monotone_ok"] = rep.monotone_ok;
  jr["sensitivity_checked"] = rep.sensitivity_checked;
  jr["sensitivity_ok"] = rep.sensitivity_ok;
  jr["J"] = rep.J;
  out.reports["ContractionReport"] = jr;

  std::vector<std::array<double, 3>> series;
  for (std::size_t k = 0; k < rep.K_j.size(); ++k)
    series.push_back({static_cast<double>(k + 1), rep.K_j[k], rep.L_j[k]});
  out.series_csvs.emplace_back("kj_series.csv", series);
  return out;
}

inline ExperimentOutput experiment_max_principle(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  double T = cfg.param("forcing_T", 20.0);

  // homogeneous: nonpositive data stays nonpositive
  auto rng = named_stream(cfg.seed, "max_principle.initial");
  std::uniform_real_distribution<double> uu(0.0, 1.0);
  Eigen::VectorXd init(ctx.grid->size());
  for (int i = 0; i < ctx.grid->size(); ++i) init[i] = -uu(rng);
  auto hom = evolve(cfg.spec, SourceSpec::zero(), ctx.grid, {0.0, init},
                    CylinderWindow(0.0, 3.0, cfg.dt), cfg.scheme);
  auto hrep = check_max_principle(hom, SourceSpec::zero(), MaxPrincipleScope::Q_plus);
  add_check(out, "max_principle.homogeneous", hrep.pass && hrep.sup_u_plus == 0.0, hrep.sup_u_plus,
            0.0, "nonpositive data stays nonpositive");

  json jr;
  jr["homogeneous"] = {{"scope", hrep.scope},
                       {"sup_u_plus", hrep.sup_u_plus},
                       {"boundary_sup_plus", hrep.boundary_sup_plus},
                       {"pass", hrep.pass}};

  // forced: empirical maximum-principle constant
  if (!cfg.source.is_zero) {
    auto forced = evolve(cfg.spec, cfg.source, ctx.grid,
                         {0.0, Eigen::VectorXd::Zero(ctx.grid->size())},
                         CylinderWindow(0.0, T, cfg.dt), cfg.scheme);
    auto frep = check_max_principle(forced, cfg.source, MaxPrincipleScope::full_Q);
    add_check(out, "max_principle.forced_finite", std::isfinite(frep.empirical_C),
              frep.empirical_C, 0.0, "empirical C = (sup u+ - bsup+) / |f|_*");
    jr["forced"] = {{"scope", frep.scope},
                    {"sup_u_plus", frep.sup_u_plus},
                    {"boundary_sup_plus", frep.boundary_sup_plus},
                    {"sliding_f_norm", frep.sliding_f_norm},
                    {"empirical_C", frep.empirical_C}};
  }

  // M-matrix predicate across sample times
  bool all_m = true;
  for (double t : {0.0, 0.25, 0.5, 1.0}) all_m = all_m && assemble(cfg.spec, *ctx.grid, t).m_matrix;
  add_check(out, "max_principle.m_matrix", all_m, all_m ? 1.0 : 0.0, 1.0,
            "assembled operators keep the M-matrix sign pattern");

  // comparison property on randomized ordered pairs
  int pairs = static_cast<int>(cfg.param("pairs", 50.0));
  auto prng = named_stream(cfg.seed, "max_principle.pairs");
  long long violations = 0;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd lo(ctx.grid->size()), hi(ctx.grid->size());
    for (int i = 0; i < ctx.grid->size(); ++i) {
      lo[i] = uu(prng) - 0.5;
      hi[i] = lo[i] + uu(prng);
    }
    auto tl = evolve(cfg.spec, SourceSpec::zero(), ctx.grid, {0.0, lo},
                     CylinderWindow(0.0, 0.2, cfg.dt), cfg.scheme);
    auto th = evolve(cfg.spec, SourceSpec::zero(), ctx.grid, {0.0, hi},
                     CylinderWindow(0.0, 0.2, cfg.dt), cfg.scheme);
    for (std::size_t k = 0; k < tl.slices.size(); ++k)
      if ((th.slices[k] - tl.slices[k]).minCoeff() < -1e-12) ++violations;
  }
  add_check(out, "max_principle.comparison_pairs", violations == 0,
            static_cast<double>(violations), 0.0,
            std::to_string(pairs) + " randomized ordered pairs preserved under evolution");
  jr["comparison_pairs"] = {{"pairs", pairs}, {"violations", violations}};
  out.reports["MaxPrincipleReport"] = jr;
  return out;
}

inline ExperimentOutput experiment_exhaustion(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  SourceSpec f = cfg.source;
  if (f.is_zero && cfg.params.contains("exhaustion_source"))
    f = SourceSpec::of(Expr::parse(cfg.param_str("exhaustion_source", "sin(y1)")));

  std::vector<double> N_list{4.0, 8.0, 16.0};
  if (cfg.params.contains("N_list")) {
    N_list.clear();
    for (const auto& n : cfg.params["N_list"]) N_list.push_back(n.get<double>());
  }
  double W = cfg.param("W", 2.0);
  auto res = exhaustion_limit(cfg.spec, f, ctx.grid, N_list, W, cfg.dt, cfg.scheme);

  add_check(out, "exhaustion.uniform_bound", res.bound_variation_top <= 0.05,
            res.bound_variation_top, 0.05, "N-uniform bound |u_N| <= C0 |f|_*");
  bool cauchy_ok = true;
  for (std::size_t k = 0; k + 1 < res.d_N.size(); ++k)
    cauchy_ok = cauchy_ok && res.d_N[k + 1] < res.d_N[k];
  double ratio_max = cfg.param("cauchy_ratio_max", 1.0);
  add_check(out, "exhaustion.cauchy", cauchy_ok && res.cauchy_ratio < ratio_max, res.cauchy_ratio,
            ratio_max, "window differences contract geometrically");
  if (cfg.params.contains("expect_u0")) {
    Expr expect = Expr::parse(cfg.param_str("expect_u0", "0"));
    double tol = cfg.param("u0_tol", 1e-3);
    double sup_err = 0.0;
    for (std::size_t k = 0; k < res.u0.slices.size(); ++k) {
      Eigen::VectorXd e = expression_slice(*ctx.grid, expect,
                                           res.u0.time_at(static_cast<long long>(k)));
      sup_err = std::max(sup_err, (res.u0.slices[k] - e).lpNorm<Eigen::Infinity>());
    }
    add_check(out, "exhaustion.u0_matches", sup_err <= tol, sup_err, tol,
              "largest-N window against the stationary oracle");
  }

  json jr;
  jr["N_list"] = res.N_list;
  jr["sup_norms"] = res.sup_norms;
  jr["d_N"] = res.d_N;
  jr["cauchy_ratio"] = res.cauchy_ratio;
  jr["sliding_f_norm"] = res.sliding_f_norm;
  jr["C0_empirical"] = res.C0_empirical;
  jr["bound_variation_all"] = res.bound_variation_all;
  jr["bound_variation_top"] = res.bound_variation_top;
  jr["W"] = res.W;
  out.reports["ExhaustionResult"] = jr;
  out.trace_csvs.emplace_back("u0_trace.csv", res.u0);
  return out;
}

inline ExperimentOutput experiment_decompose(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  ExperimentOutput out;
  SourceSpec f = cfg.source;
  if (f.is_zero && cfg.params.contains("exhaustion_source"))
    f = SourceSpec::of(Expr::parse(cfg.param_str("exhaustion_source", "sin(y1)")));
  if (f.is_zero)
    throw Error(errc::config_error, "decompose requires a nonzero source (U-tilde is U otherwise)");

  std::vector<double> N_list{4.0, 8.0};
  if (cfg.params.contains("N_list")) {
    N_list.clear();
    for (const auto& n : cfg.params["N_list"]) N_list.push_back(n.get<double>());
  }
  double W = cfg.param("W", 2.0);
  auto res = exhaustion_limit(cfg.spec, f, ctx.grid, N_list, W, cfg.dt, cfg.scheme);
  EternalSolution w = spectral_eternal(ctx);
  CylinderWindow window(-W, W, cfg.dt);
  EvolutionTrace wt = w.trace_on(window, cfg.scheme);

  auto synthesize = [&](double a) {
    EvolutionTrace u = res.u0;
    for (std::size_t k = 0; k < u.slices.size(); ++k) u.slices[k] += a * wt.slices[k];
    return u;
  };

  int draws = static_cast<int>(cfg.param("draws", 100.0));
  double a_max = cfg.param("a_max", 10.0);
  auto rng = named_stream(cfg.seed, "decompose.draws");
  std::uniform_real_distribution<double> ua(0.0, a_max);
  double worst_a = 0.0, worst_res = 0.0;
  DecompositionReport last;
  for (int k = 0; k < draws; ++k) {
    double a = ua(rng);
    last = decompose(synthesize(a), res.u0, w);
    worst_a = std::max(worst_a, std::abs(last.a - a));
    worst_res = std::max(worst_res, last.residual);
  }
  add_check(out, "decompose.roundtrip", worst_a <= 1e-6, worst_a, 1e-6,
            std::to_string(draws) + " random draws of a in (0, " + std::to_string(a_max) + ")");
  add_check(out, "decompose.residual", worst_res <= 1e-8, worst_res, 1e-8);

  bool raised = false;
  try {
    decompose(synthesize(-0.5), res.u0, w);
  } catch (const Error& e) {
    raised = e.code() == errc::negative_coefficient;
  }
  add_check(out, "decompose.negative_raises", raised, raised ? 1.0 : 0.0, 1.0,
            "a = -0.5 violates the bounded-below hypothesis");

  json jr;
  jr["a"] = last.a;
  jr["residual"] = last.residual;
  jr["a_field_spread"] = last.a_field_spread;
  jr["roundtrip_worst_a_error"] = worst_a;
  jr["roundtrip_worst_residual"] = worst_res;
  jr["draws"] = draws;
  out.reports["DecompositionReport"] = jr;
  return out;
}

inline ExperimentOutput run_experiment(const std::string& kind, const Context& ctx) {
  if (kind == "eternal") return experiment_eternal(ctx);
  if (kind == "rates") return experiment_rates(ctx);
  if (kind == "comparison") return experiment_comparison(ctx);
  if (kind == "contraction") return experiment_contraction(ctx);
  if (kind == "max_principle") return experiment_max_principle(ctx);
  if (kind == "exhaustion") return experiment_exhaustion(ctx);
  if (kind == "decompose") return experiment_decompose(ctx);
  throw Error(errc::config_error, "unknown experiment kind '" + kind + "'");
}

inline void write_outputs(const std::string& dir, const ExperimentOutput& out, int csv_stride) {
  namespace fs = std::filesystem;
  for (const auto& [name, trace] : out.trace_csvs) {
    int stride = csv_stride;
    if (stride <= 0)
      stride = static_cast<int>(std::max<std::size_t>(1, trace.slices.size() / 201));
    EvolutionTrace thin;
    thin.grid = trace.grid;
    thin.t_start = trace.t_start;
    thin.dt = trace.dt * stride;
    thin.scheme = trace.scheme;
    thin.has_source = trace.has_source;
    for (std::size_t k = 0; k < trace.slices.size(); k += static_cast<std::size_t>(stride))
      thin.slices.push_back(trace.slices[k]);
    write_trace_csv((fs::path(dir) / name).string(), thin);
  }
  for (const auto& [name, prof] : out.profile_csvs)
    write_profile_csv((fs::path(dir) / name).string(), prof);
  for (const auto& [name, j] : out.json_files) {
    std::ofstream f(fs::path(dir) / name);
    f << j.dump(2) << "\n";
  }
  for (const auto& [name, rows] : out.series_csvs) {
    CsvWriter csv((fs::path(dir) / name).string());
    csv.header({"j", "K_j", "L_j"});
    for (const auto& r : rows) csv.row({r[0], r[1], r[2]});
  }
}

}  // namespace detail

/// Executes the configured experiment (or the whole suite) and writes the
/// deterministic result.json plus CSV series into the output directory.
inline RunResult run(const ExperimentConfig& cfg, const std::string& out_dir_override = "") {
  namespace fs = std::filesystem;
  auto t0 = std::chrono::steady_clock::now();

  GridPtr grid = build_grid(cfg.domain, cfg.h);
  std::vector<double> sample_times{0.0, 0.25, 0.5, 0.75, 1.0};
  require_valid(cfg.spec, *grid, sample_times, splitmix64(cfg.seed ^ 0x76a1));

  detail::Context ctx{cfg, grid};
  std::vector<std::string> kinds;
  if (cfg.kind == "suite") {
    kinds = {"eternal", "rates", "comparison", "contraction", "max_principle"};
    bool has_source = !cfg.source.is_zero || cfg.params.contains("exhaustion_source");
    if (has_source) {
      kinds.push_back("exhaustion");
      kinds.push_back("decompose");
    }
  } else {
    kinds = {cfg.kind};
  }

  // independent experiments may run concurrently up to the worker count
  int workers = std::max(1, cfg.workers);
  std::counting_semaphore<64> slots(std::min(workers, 64));
  std::vector<std::future<detail::ExperimentOutput>> futures;
  for (const auto& kind : kinds) {
    futures.push_back(std::async(std::launch::async, [&, kind] {
      slots.acquire();
      struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
      } rel{slots};
      return detail::run_experiment(kind, ctx);
    }));
  }

  RunResult result;
  result.reports = json::object();
  std::string out_dir = out_dir_override.empty() ? cfg.output_dir : out_dir_override;
  fs::create_directories(out_dir);

  std::vector<detail::ExperimentOutput> outputs;
  std::exception_ptr first_error;
  for (auto& f : futures) {
    try {
      outputs.push_back(f.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  int csv_stride = static_cast<int>(cfg.param("csv_stride", 0.0));
  for (std::size_t e = 0; e < outputs.size(); ++e) {
    const auto& out = outputs[e];
    for (const auto& c : out.checks) {
      result.checks.push_back(c);
      result.overall_pass = result.overall_pass && c.pass;
    }
    for (auto it = out.reports.begin(); it != out.reports.end(); ++it)
      result.reports[it.key()] = it.value();
    detail::write_outputs(out_dir, out, csv_stride);
  }

  result.provenance["config_hash"] = config_hash(cfg.raw);
  result.provenance["grid"] = detail::grid_json(*grid);
  result.provenance["scheme"] = scheme_name(cfg.scheme);
  result.provenance["dt"] = cfg.dt;
  result.provenance["seed"] = cfg.seed;
  result.provenance["kind"] = cfg.kind;

  json jr;
  jr["overall_pass"] = result.overall_pass;
  jr["config_hash"] = config_hash(cfg.raw);
  json jchecks = json::array();
  for (const auto& c : result.checks)
    jchecks.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"value", c.value},
                       {"threshold", c.threshold},
                       {"detail", c.detail}});
  jr["checks"] = jchecks;
  jr["reports"] = result.reports;
  jr["provenance"] = result.provenance;
  {
    std::ofstream f(fs::path(out_dir) / "result.json");
    f << jr.dump(2) << "\n";
  }

  result.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    json meta;
    meta["wall_time_sec"] = result.wall_time_sec;
    auto now = std::chrono::system_clock::now();
    meta["timestamp_unix"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
    std::ofstream f(fs::path(out_dir) / "meta.json");
    f << meta.dump(2) << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// regression diffing
// ---------------------------------------------------------------------------

struct RegressDiff {
  std::string path;
  std::string what;
};

namespace detail {

inline double regress_tol_for(const std::string& path, const json& tolerances, double fallback) {
  double tol = fallback;
  if (tolerances.is_object()) {
    for (auto it = tolerances.begin(); it != tolerances.end(); ++it)
      if (path.find(it.key()) != std::string::npos && it.value().is_number())
        tol = it.value().get<double>();
  }
  return tol;
}

inline void diff_json(const json& golden, const json& fresh, const std::string& path,
                      const json& tolerances, double default_tol,
                      std::vector<RegressDiff>& diffs) {
  if (golden.type() != fresh.type() &&
      !(golden.is_number() && fresh.is_number())) {
    diffs.push_back({path, "type mismatch"});
    return;
  }
  if (golden.is_object()) {
    for (auto it = golden.begin(); it != golden.end(); ++it) {
      if (!fresh.contains(it.key())) {
        diffs.push_back({path + "." + it.key(), "missing in fresh"});
        continue;
      }
      diff_json(it.value(), fresh.at(it.key()), path.empty() ? it.key() : path + "." + it.key(),
                tolerances, default_tol, diffs);
    }
    for (auto it = fresh.begin(); it != fresh.end(); ++it)
      if (!golden.contains(it.key())) diffs.push_back({path + "." + it.key(), "extra in fresh"});
    return;
  }
  if (golden.is_array()) {
    if (golden.size() != fresh.size()) {
      diffs.push_back({path, "array length " + std::to_string(golden.size()) + " vs " +
                                 std::to_string(fresh.size())});
      return;
    }
    for (std::size_t k = 0; k < golden.size(); ++k)
      diff_json(golden[k], fresh[k], path + "[" + std::to_string(k) + "]", tolerances, default_tol,
                diffs);
    return;
  }
  if (golden.is_number() && fresh.is_number()) {
    double a = golden.get<double>(), b = fresh.get<double>();
    double tol = regress_tol_for(path, tolerances, default_tol);
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    if (std::abs(a - b) > tol * scale)
      diffs.push_back({path, "drift " + csv_double(a) + " -> " + csv_double(b)});
    return;
  }
  if (golden != fresh) diffs.push_back({path, "value mismatch"});
}

inline std::size_t csv_row_count(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::size_t rows = 0;
  std::string line;
  while (std::getline(f, line))
    if (!line.empty() && line != "\r") ++rows;
  return rows;
}

}  // namespace detail

/// Field-wise comparison of two run directories with per-field tolerances;
/// CSV companions are compared structurally (row counts).
inline std::vector<RegressDiff> regress(const std::string& golden_dir, const std::string& fresh_dir,
                                        const json& tolerances = json::object(),
                                        double default_tol = 1e-9) {
  namespace fs = std::filesystem;
  fs::path gold = fs::path(golden_dir) / "result.json";
  fs::path fresh = fs::path(fresh_dir) / "result.json";
  if (!fs::exists(gold))
    throw Error(errc::missing_golden, "no result.json under " + golden_dir);
  if (!fs::exists(fresh))
    throw Error(errc::config_error, "no result.json under " + fresh_dir);

  auto load = [](const fs::path& p) {
    std::ifstream f(p);
    json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      throw Error(errc::config_error, p.string() + " is not valid JSON: " + e.what());
    }
    return j;
  };

  std::vector<RegressDiff> diffs;
  detail::diff_json(load(gold), load(fresh), "", tolerances, default_tol, diffs);

  for (const auto& entry : fs::directory_iterator(golden_dir)) {
    if (entry.path().extension() != ".csv") continue;
    fs::path other = fs::path(fresh_dir) / entry.path().filename();
    if (!fs::exists(other)) {
      diffs.push_back({entry.path().filename().string(), "csv missing in fresh"});
      continue;
    }
    std::size_t a = detail::csv_row_count(entry.path().string());
    std::size_t b = detail::csv_row_count(other.string());
    if (a != b)
      diffs.push_back({entry.path().filename().string(),
                       "csv row count " + std::to_string(a) + " vs " + std::to_string(b)});
  }
  return diffs;
}

}  // namespace parlab
