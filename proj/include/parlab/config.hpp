#pragma once

#include <json.hpp>
#include <string>

#include "parlab/coefficients.hpp"
#include "parlab/evolution.hpp"
#include "parlab/grid.hpp"
#include "parlab/rng.hpp"

namespace parlab {

using nlohmann::json;

/// One experiment: a domain/grid/operator plus the named verification kind
/// and its parameters. Parsed from JSON; every parse or shape failure throws
/// Error(config_error) (exit code 2 in the CLI).
struct ExperimentConfig {
  SpatialDomain domain;
  std::array<double, 2> h{0.0, 0.0};
  CoefficientSpec spec;
  SourceSpec source;
  Scheme scheme = Scheme::implicit_euler;
  double dt = 1e-3;
  std::string kind;
  json params = json::object();
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  json raw;

  double param(const std::string& key, double fallback) const {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_number())
      throw Error(errc::config_error, "params." + key + " must be a number");
    return params[key].get<double>();
  }

  std::string param_str(const std::string& key, const std::string& fallback) const {
    if (!params.contains(key)) return fallback;
    if (!params[key].is_string())
      throw Error(errc::config_error, "params." + key + " must be a string");
    return params[key].get<std::string>();
  }
};

namespace detail {

inline Expr parse_field(const json& j, const std::string& what) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (j.is_string()) {
    try {
      return Expr::parse(j.get<std::string>());
    } catch (const Error& e) {
      throw Error(errc::config_error, what + ": " + e.what());
    }
  }
  throw Error(errc::config_error, what + " must be an expression string or number");
}

inline const json& require(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw Error(errc::config_error, ctx + " is missing required key '" + key + "'");
  return j.at(key);
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;

  // domain: {"kind": "interval", lo, hi}, {"kind": "polygon", vertices}, or
  // the shorthands {"interval": [lo, hi]} / {"polygon": [[x, y], ...]}
  const json& jd = detail::require(j, "domain", "config");
  bool origin_interior = jd.value("origin_interior", false);
  auto parse_vertices = [](const json& arr) {
    std::vector<Point> verts;
    for (const auto& v : arr) {
      if (!v.is_array() || v.size() != 2)
        throw Error(errc::config_error, "polygon vertices must be [x, y] pairs");
      verts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return verts;
  };
  try {
    if (jd.contains("interval")) {
      const json& iv = jd["interval"];
      if (!iv.is_array() || iv.size() != 2)
        throw Error(errc::config_error, "domain.interval must be [lo, hi]");
      cfg.domain =
          SpatialDomain::interval(iv[0].get<double>(), iv[1].get<double>(), origin_interior);
    } else if (jd.contains("polygon")) {
      cfg.domain = SpatialDomain::axis_polygon(parse_vertices(jd["polygon"]), origin_interior);
    } else {
      std::string dkind = detail::require(jd, "kind", "domain").get<std::string>();
      if (dkind == "interval") {
        cfg.domain = SpatialDomain::interval(detail::require(jd, "lo", "domain").get<double>(),
                                             detail::require(jd, "hi", "domain").get<double>(),
                                             origin_interior);
      } else if (dkind == "polygon") {
        cfg.domain = SpatialDomain::axis_polygon(
            parse_vertices(detail::require(jd, "vertices", "domain")), origin_interior);
      } else {
        throw Error(errc::config_error, "domain.kind must be 'interval' or 'polygon'");
      }
    }
  } catch (const Error& e) {
    if (e.code() == errc::config_error) throw;
    throw Error(errc::config_error, std::string("domain: ") + e.what());
  }

  // grid spacing
  const json& jh = detail::require(j, "h", "config");
  if (jh.is_number()) {
    cfg.h = {jh.get<double>(), jh.get<double>()};
  } else if (jh.is_array() && jh.size() == 2) {
    cfg.h = {jh[0].get<double>(), jh[1].get<double>()};
  } else {
    throw Error(errc::config_error, "h must be a number or [h1, h2]");
  }

  // coefficients
  const json& jc = detail::require(j, "coefficients", "config");
  const int dim = cfg.domain.dim();
  if (jc.contains("a")) {
    const json& ja = jc["a"];
    if (ja.is_array()) {
      if (static_cast<int>(ja.size()) != dim)
        throw Error(errc::config_error, "coefficients.a must be a " + std::to_string(dim) + "x" +
                                            std::to_string(dim) + " matrix of expressions");
      for (int r = 0; r < dim; ++r) {
        if (!ja[r].is_array() || static_cast<int>(ja[r].size()) != dim)
          throw Error(errc::config_error, "coefficients.a rows must have length " + std::to_string(dim));
        for (int c = 0; c < dim; ++c)
          cfg.spec.a[r][c] = detail::parse_field(ja[r][c], "coefficients.a");
      }
    } else {
      // scalar shorthand: a * identity
      Expr a = detail::parse_field(ja, "coefficients.a");
      cfg.spec.a[0][0] = a;
      cfg.spec.a[1][1] = a;
      cfg.spec.a[0][1] = Expr::constant(0.0);
      cfg.spec.a[1][0] = Expr::constant(0.0);
    }
  }
  if (jc.contains("b")) {
    const json& jb = jc["b"];
    if (!jb.is_array() || static_cast<int>(jb.size()) != dim)
      throw Error(errc::config_error, "coefficients.b must be an array of length " + std::to_string(dim));
    for (int r = 0; r < dim; ++r) cfg.spec.b[r] = detail::parse_field(jb[r], "coefficients.b");
  }
  if (jc.contains("c")) cfg.spec.c = detail::parse_field(jc["c"], "coefficients.c");
  cfg.spec.lambda = jc.value("lambda", 1.0);
  cfg.spec.Lambda = jc.value("Lambda", 1.0);
  if (!(cfg.spec.lambda > 0.0) || !(cfg.spec.Lambda >= cfg.spec.lambda))
    throw Error(errc::config_error, "require 0 < lambda <= Lambda");
  std::string form = jc.value("form", "nondivergence");
  if (form == "nondivergence")
    cfg.spec.form = OperatorForm::nondivergence;
  else if (form == "divergence")
    cfg.spec.form = OperatorForm::divergence;
  else
    throw Error(errc::config_error, "coefficients.form must be 'nondivergence' or 'divergence'");
  if (jc.contains("time_dependence")) {
    const json& jt = jc["time_dependence"];
    if (jt.is_string()) {
      std::string td = jt.get<std::string>();
      if (td == "autonomous")
        cfg.spec.time_dependence = TimeDependence::autonomous;
      else if (td == "general")
        cfg.spec.time_dependence = TimeDependence::general;
      else
        throw Error(errc::config_error,
                    "time_dependence must be 'autonomous', 'general' or {\"periodic\": T}");
    } else if (jt.is_object() && jt.contains("periodic")) {
      cfg.spec.time_dependence = TimeDependence::periodic;
      cfg.spec.period = jt["periodic"].get<double>();
      if (!(cfg.spec.period > 0.0))
        throw Error(errc::config_error, "periodic time dependence needs a positive period");
    } else {
      throw Error(errc::config_error,
                  "time_dependence must be 'autonomous', 'general' or {\"periodic\": T}");
    }
  }
  if (cfg.spec.time_dependence == TimeDependence::autonomous && cfg.spec.coefficients_use_time())
    throw Error(errc::config_error, "coefficients use t but time_dependence is 'autonomous'");

  // source
  if (j.contains("source")) {
    Expr f = detail::parse_field(j["source"], "source");
    std::string text = j["source"].is_string() ? j["source"].get<std::string>() : "";
    bool zero = text == "0" || text == "0.0" || (j["source"].is_number() && j["source"].get<double>() == 0.0);
    cfg.source = zero ? SourceSpec::zero() : SourceSpec::of(std::move(f));
  }

  // scheme, dt
  std::string sch = j.value("scheme", "implicit_euler");
  if (sch == "implicit_euler")
    cfg.scheme = Scheme::implicit_euler;
  else if (sch == "crank_nicolson")
    cfg.scheme = Scheme::crank_nicolson;
  else
    throw Error(errc::config_error, "scheme must be 'implicit_euler' or 'crank_nicolson'");
  cfg.dt = detail::require(j, "dt", "config").get<double>();
  if (!(cfg.dt > 0.0)) throw Error(errc::config_error, "dt must be positive");

  // kind
  cfg.kind = detail::require(j, "kind", "config").get<std::string>();
  static const char* kinds[] = {"eternal",       "rates",      "comparison", "contraction",
                                "max_principle", "exhaustion", "decompose",  "suite"};
  bool known = false;
  for (const char* k : kinds) known = known || cfg.kind == k;
  if (!known) throw Error(errc::config_error, "unknown experiment kind '" + cfg.kind + "'");

  if (j.contains("params")) {
    if (!j["params"].is_object()) throw Error(errc::config_error, "params must be an object");
    cfg.params = j["params"];
    for (auto& [key, val] : cfg.params.items()) {
      if (key.find("tol") != std::string::npos && val.is_number() && !(val.get<double>() > 0.0))
        throw Error(errc::config_error, "params." + key + " must be positive");
    }
  }
  cfg.output_dir = j.value("output_dir", "out");
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.workers = j.value("workers", 1);
  if (cfg.workers < 1) throw Error(errc::config_error, "workers must be at least 1");
  return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw Error(errc::config_error, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline std::string config_hash(const json& raw) {
  std::uint64_t h = fnv1a64(raw.dump());
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Human- and machine-readable description of the config format, printed by
/// the `schema` subcommand.
inline json config_schema() {
  json s;
  s["config"] = {
      {"domain",
       "object; {kind:'interval', lo, hi, origin_interior?} or {kind:'polygon', vertices:[[x,y],...], "
       "origin_interior?}; shorthands {interval:[lo,hi]} and {polygon:[[x,y],...]} are accepted; "
       "polygons are simple and axis-aligned"},
      {"h", "number or [h1, h2]; grid spacing per axis, below half the minimal feature width"},
      {"coefficients",
       "object; a: expression or dim x dim matrix of expressions; b: array of dim expressions; c: "
       "expression; lambda, Lambda: declared parabolicity bounds; form: 'nondivergence' | "
       "'divergence'; time_dependence: 'autonomous' | 'general' | {periodic: T}"},
      {"source", "expression for f; '0' selects the homogeneous problem"},
      {"scheme", "'implicit_euler' (default) or 'crank_nicolson'"},
      {"dt", "time step, > 0"},
      {"kind",
       "'eternal' | 'rates' | 'comparison' | 'contraction' | 'max_principle' | 'exhaustion' | "
       "'decompose' | 'suite'"},
      {"params", "kind-specific knobs; see params section"},
      {"output_dir", "directory for result.json, meta.json and CSV series"},
      {"seed", "master seed; every randomized step derives a named stream from it"},
      {"workers", "max concurrent experiments inside a suite"}};
  s["params"] = {
      {"window", "[t0, t1] verification window (eternal/rates/comparison)"},
      {"T_back", "far-past burn-in length, default 20; doubled up to T_back_max=80 on SeedSensitivity"},
      {"seed_tol", "two-seed agreement tolerance, default 1e-6"},
      {"route_spread_tol", "route-agreement ratio spread bound, default 1e-6"},
      {"eigen_tol", "eigenpair tolerance, default 1e-11"},
      {"floquet_tol", "floquet sweep tolerance, default 1e-12"},
      {"initial", "seed expression in y1[, y2] for the contraction input, default 'sin(y1)+0.3*sin(2*y1)'"},
      {"j_max", "contraction index count, default 4"},
      {"J", "contraction horizon, default j_max + 6"},
      {"expect_K", "optional expected K with K_tol"},
      {"expect_zeta", "optional expected gap ratio with zeta_rtol"},
      {"N_list", "exhaustion radii, default [4, 8, 16]"},
      {"W", "exhaustion report half-window, default 2"},
      {"cauchy_ratio_max", "bound on the fitted d_N ratio, default 1 (must contract)"},
      {"expect_u0", "optional expression the exhaustion limit must match with u0_tol"},
      {"draws", "decomposition round-trip draw count, default 100"},
      {"a_max", "round-trip coefficients drawn uniformly from (0, a_max), default 10"},
      {"pairs", "randomized ordered pairs for the comparison-principle check, default 50"},
      {"forcing_T", "forced max-principle window length, default 20"},
      {"eps_tail", "m(u) tail threshold, default 1e-6"},
      {"monotonicity_tol", "strict-decrease relative tolerance, fixed 1e-12"},
      {"csv_stride", "slice subsampling stride for trace CSV exports; 0 = auto (~200 slices)"}};
  s["expressions"] =
      "symbols y1, y2, t; operators + - * / and unary minus; functions sin, cos, exp; decimal "
      "literals and the constant pi";
  s["exit_codes"] = {{"0", "all checks passed"},
                     {"1", "a verification check failed"},
                     {"2", "config parse or validation error"},
                     {"3", "internal solver error"}};
  s["outputs"] = {
      {"result.json", "deterministic report: config hash, checks, typed reports, provenance"},
      {"meta.json", "sidecar with wall time and timestamp (excluded from determinism)"},
      {"*.csv", "RFC-4180, CRLF, header row, 17 significant digits"}};
  s["env"] = {{"PARLAB_OUT", "overrides output_dir (CLI --out takes precedence)"}};
  return s;
}

}  // namespace parlab
