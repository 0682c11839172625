#include "cartan/scenario.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "cartan/bgg.hpp"
#include "cartan/json_io.hpp"
#include "cartan/model.hpp"
#include "cartan/numerics.hpp"

namespace cartan::scenario {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LogLevel log_level() {
  const char* raw = std::getenv("CARTAN_ORBITS_LOG");
  if (!raw) return LogLevel::Error;
  std::string v = raw;
  if (v == "debug") return LogLevel::Debug;
  if (v == "info") return LogLevel::Info;
  return LogLevel::Error;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::cerr << "[debug] " << msg << "\n";
}

bool RunReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json RunReport::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["config"] = config_echo;
  json cs = json::array();
  for (const auto& c : checks) {
    json cj;
    cj["name"] = c.name;
    cj["measured"] = c.measured;
    cj["expected"] = c.expected;
    cj["tolerance"] = c.tolerance;
    cj["mode"] = c.mode;
    cj["pass"] = c.pass;
    cs.push_back(cj);
  }
  j["checks"] = cs;
  j["wall_seconds"] = wall_seconds;
  j["artifacts"] = artifacts;
  j["pass"] = all_pass();
  return j;
}

namespace {

CheckResult check_lt(const std::string& name, double measured, double tol) {
  return {name, measured, 0.0, tol, "lt", measured < tol};
}

CheckResult check_eq(const std::string& name, double measured,
                     double expected) {
  return {name, measured, expected, 0.0, "eq", measured == expected};
}

CheckResult check_approx(const std::string& name, double measured,
                         double expected, double tol) {
  return {name, measured, expected, tol, "abs",
          std::abs(measured - expected) <= tol};
}

void check_keys(const json& cfg, const std::set<std::string>& allowed,
                const std::set<std::string>& required) {
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key: " + it.key());
  for (const auto& k : required)
    if (!cfg.contains(k))
      throw ConfigError("missing required config key: " + k);
}

std::uint64_t require_seed(const json& cfg, const RunOptions& opts) {
  if (opts.seed_override) return *opts.seed_override;
  if (!cfg.contains("seed"))
    throw ConfigError("seed is mandatory for sampling scenarios");
  return cfg.at("seed").get<std::uint64_t>();
}

std::pair<int, int> signature_of(const json& cfg,
                                 std::pair<int, int> fallback) {
  if (!cfg.contains("signature")) return fallback;
  auto sig = cfg.at("signature");
  if (!sig.is_array() || sig.size() != 2)
    throw ConfigError("signature must be [p, q]");
  return {sig[0].get<int>(), sig[1].get<int>()};
}

void write_artifacts(RunReport& rep, const RunOptions& opts,
                     const report::StrataReport* strata,
                     const json* extra = nullptr) {
  if (opts.out_dir.empty()) return;
  std::filesystem::create_directories(opts.out_dir);
  std::string base = opts.out_dir + "/" + rep.scenario;
  if (strata) {
    std::string csv_path = base + "_samples.csv";
    std::ofstream csv(csv_path);
    report::write_csv(*strata, csv);
    rep.artifacts.push_back(csv_path);
  }
  if (extra) {
    std::string extra_path = base + "_data.json";
    std::ofstream out(extra_path);
    out << extra->dump(2) << "\n";
    rep.artifacts.push_back(extra_path);
  }
  std::string rep_path = base + "_report.json";
  std::ofstream out(rep_path);
  out << rep.to_json().dump(2) << "\n";
  rep.artifacts.push_back(rep_path);
}

// --- model/datum builders ----------------------------------------------------

model::HomogeneousModel make_model(const std::string& name, int p, int q) {
  if (name == "projective")
    return model::HomogeneousModel::projective_sphere(p + q);
  if (name == "conformal")
    return model::HomogeneousModel::conformal_sphere(p, q);
  if (name == "complex-projective")
    return model::HomogeneousModel::complex_projective(p + q);
  if (name == "cr") return model::HomogeneousModel::cr_sphere(p, q);
  throw ConfigError("unknown model: " + name);
}

VectorXd named_conformal_vector(const model::HomogeneousModel& m,
                                const std::string& type) {
  int dim = m.ambient_dim();
  VectorXd v = VectorXd::Zero(dim);
  const MatrixXd& f = m.ambient_form()->matrix();
  if (type == "null") {
    v[0] = 1.0;
    return v;
  }
  if (type == "positive") {
    for (int i = 1; i + 1 < dim; ++i)
      if (f(i, i) > 0.5) {
        v[i] = 1.0;
        return v;
      }
    throw ConfigError("model has no positive middle direction");
  }
  if (type == "negative") {
    for (int i = 1; i + 1 < dim; ++i)
      if (f(i, i) < -0.5) {
        v[i] = 1.0;
        return v;
      }
    v[0] = -0.5;
    v[dim - 1] = 1.0;  // F(v,v) = -1
    return v;
  }
  throw ConfigError("unknown vector datum type: " + type);
}

VectorXd named_cr_vector(const model::HomogeneousModel& m,
                         const std::string& type) {
  int mc = m.ambient_dim() / 2;
  Eigen::VectorXcd z = Eigen::VectorXcd::Zero(mc);
  const MatrixXd& f = m.ambient_form()->matrix();
  if (type != "negative" && type != "positive")
    throw ConfigError("cr datum type must be positive or negative");
  double want = type == "negative" ? -1.0 : 1.0;
  for (int i = 1; i + 1 < mc; ++i)
    if (f(i, i) * want > 0.5) {
      z[i] = 1.0;
      return forms::real_vector(z);
    }
  throw ConfigError("cr model has no middle direction of the requested sign");
}

model::ReductionDatum make_datum(const model::HomogeneousModel& m,
                                 const json& spec) {
  using Kind = model::HomogeneousModel::Kind;
  std::string variant = spec.value("variant", "");
  if (variant.empty()) {
    switch (m.kind()) {
      case Kind::ProjectiveSphere:
        variant = "symmetric-form";
        break;
      case Kind::ConformalSphere:
      case Kind::CRSphere:
        variant = "vector";
        break;
      case Kind::ComplexProjective:
        variant = "hermitian-form";
        break;
    }
  }
  if (variant == "symmetric-form") {
    auto [p, q] = signature_of(spec, {m.ambient_dim() - 1, 1});
    if (p + q != m.ambient_dim())
      throw ConfigError("form datum signature must fill the ambient space");
    return model::SymmetricFormDatum{forms::SymmetricForm::standard(p, q)};
  }
  if (variant == "hermitian-form") {
    auto [p, q] = signature_of(spec, {m.ambient_dim() / 2 - 1, 1});
    if (p + q != m.ambient_dim() / 2)
      throw ConfigError("hermitian datum signature must fill the ambient space");
    return model::HermitianFormDatum{forms::HermitianForm::standard(p, q)};
  }
  if (variant == "vector") {
    if (spec.contains("components"))
      return model::VectorDatum{io::vector_from_json(spec.at("components"))};
    std::string type = spec.value("type", "positive");
    if (m.kind() == Kind::CRSphere)
      return model::VectorDatum{named_cr_vector(m, type)};
    return model::VectorDatum{named_conformal_vector(m, type)};
  }
  if (variant == "complex-structure") {
    return model::ComplexStructureDatum{
        m.standard_orthogonal_complex_structure()};
  }
  if (variant == "three-form") {
    std::string which = spec.value("form", "split-g2");
    return model::ThreeFormDatum{which == "compact-g2"
                                     ? lie::compact_g2_three_form()
                                     : lie::split_g2_three_form()};
  }
  throw ConfigError("unknown datum variant: " + variant);
}

// --- scenarios ---------------------------------------------------------------

RunReport run_model_orbits(const json& cfg, const RunOptions& opts) {
  check_keys(cfg,
             {"scenario", "model", "signature", "datum", "samples", "seed"},
             {"scenario", "model"});
  RunReport rep;
  rep.scenario = "model-orbits";
  auto [p, q] = signature_of(cfg, {2, 1});
  model::HomogeneousModel m = make_model(cfg.at("model"), p, q);
  model::ReductionDatum datum =
      make_datum(m, cfg.value("datum", json::object()));

  model::OrbitGridOptions gopts;
  gopts.n_samples = cfg.value("samples", 2000);
  gopts.seed = require_seed(cfg, opts);
  gopts.threads = opts.threads;
  auto strata = model::orbit_decompose_grid(m, datum, gopts);

  auto expected = model::expected_labels(m, datum);
  bool sets_equal = strata.observed_labels == expected;
  rep.checks.push_back(
      check_eq("label_set_matches_model_orbits", sets_equal ? 1 : 0, 1));
  rep.checks.push_back(
      check_eq("observed_label_count",
               static_cast<double>(strata.observed_labels.size()),
               static_cast<double>(expected.size())));
  rep.checks.push_back(check_eq(
      "ambiguous_labels",
      strata.random_counts.count("AMBIGUOUS")
          ? strata.random_counts.at("AMBIGUOUS")
          : 0,
      0));

  num::Rng rng(gopts.seed + 1);
  int disagreements = 0;
  for (int k = 0; k < 3; ++k) {
    model::ModelPoint x = m.sample_point(rng);
    disagreements +=
        model::h_orbit_invariance_check(m, datum, x, 50, gopts.seed + 10 + k);
  }
  rep.checks.push_back(check_eq("h_orbit_disagreements", disagreements, 0));

  write_artifacts(rep, opts, &strata);
  return rep;
}

RunReport run_flow_identity(const json& cfg, const RunOptions& opts) {
  check_keys(cfg,
             {"scenario", "model", "signature", "datum", "samples", "seed"},
             {"scenario", "model"});
  RunReport rep;
  rep.scenario = "flow-identity";
  auto [p, q] = signature_of(cfg, {2, 1});
  model::HomogeneousModel m = make_model(cfg.at("model"), p, q);
  model::ReductionDatum datum =
      make_datum(m, cfg.value("datum", json::object()));
  int samples = cfg.value("samples", 100);
  num::Rng rng(require_seed(cfg, opts));

  lie::AlgebraBasis stab = model::datum_stabilizer(m, datum);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    lie::GroupElement u = lie::exponential(
        stab.combine(VectorXd(0.5 * rng.gaussian(stab.dim()))));
    VectorXd c = rng.gaussian(m.g_minus().dim());
    c /= std::max(1.0, c.norm());
    worst = std::max(worst, model::flow_identity_check(m, datum, u,
                                                       m.g_minus().combine(c)));
  }
  rep.checks.push_back(check_lt("max_flow_identity_residual", worst, 1e-9));
  write_artifacts(rep, opts, nullptr);
  return rep;
}

RunReport run_stabilizer_dims(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario"}, {"scenario"});
  RunReport rep;
  rep.scenario = "stabilizer-dims";

  {
    // positive conformal tractor: so(p, q+1) inside so(p+1, q+1)
    model::HomogeneousModel m = model::HomogeneousModel::conformal_sphere(2, 1);
    auto stab = model::datum_stabilizer(
        m, model::VectorDatum{named_conformal_vector(m, "positive")});
    rep.checks.push_back(check_eq("dim_so_p_qplus1", stab.dim(), 6));
    rep.checks.push_back(check_lt("closure_so_p_qplus1",
                                  lie::bracket_closure_residual(stab), 1e-8));
  }
  {
    // negative CR tractor: su(p+1, q) inside su(p+1, q+1)
    model::HomogeneousModel m = model::HomogeneousModel::cr_sphere(1, 1);
    auto stab = model::datum_stabilizer(
        m, model::VectorDatum{named_cr_vector(m, "negative")});
    rep.checks.push_back(check_eq("dim_su_pplus1_q", stab.dim(), 8));
    rep.checks.push_back(check_lt("closure_su_pplus1_q",
                                  lie::bracket_closure_residual(stab), 1e-8));
  }
  {
    // null conformal tractor: so(p,q) |x R^{p,q}
    model::HomogeneousModel m = model::HomogeneousModel::conformal_sphere(1, 1);
    auto stab = model::datum_stabilizer(
        m, model::VectorDatum{named_conformal_vector(m, "null")});
    rep.checks.push_back(check_eq("dim_so_pq_semidirect", stab.dim(), 3));
    rep.checks.push_back(check_lt("closure_so_pq_semidirect",
                                  lie::bracket_closure_residual(stab), 1e-8));
  }
  {
    // parallel projective metric: so(p,q) inside sl(n+1)
    model::HomogeneousModel m = model::HomogeneousModel::projective_sphere(3);
    auto stab = model::datum_stabilizer(
        m, model::SymmetricFormDatum{forms::SymmetricForm::standard(3, 1)});
    rep.checks.push_back(check_eq("dim_so_pq_projective", stab.dim(), 6));
    rep.checks.push_back(check_lt("closure_so_pq_projective",
                                  lie::bracket_closure_residual(stab), 1e-8));
  }
  write_artifacts(rep, opts, nullptr);
  return rep;
}

RunReport run_g2_stabilizer(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario", "variant"}, {"scenario"});
  RunReport rep;
  rep.scenario = "g2-stabilizer";
  std::string variant = cfg.value("variant", "split");
  lie::ThreeForm phi = variant == "compact" ? lie::compact_g2_three_form()
                                            : lie::split_g2_three_form();
  MatrixXd b = phi.induced_bilinear_form();
  forms::SymmetricForm bform(MatrixXd(b / 6.0));
  forms::Signature sig = forms::signature(bform);
  if (variant == "compact") {
    rep.checks.push_back(check_eq("induced_form_positive", sig.positive, 7));
  } else {
    rep.checks.push_back(check_eq("induced_form_positive", sig.positive, 3));
    rep.checks.push_back(check_eq("induced_form_negative", sig.negative, 4));
  }

  auto ambient = lie::so_basis(bform);
  rep.checks.push_back(check_eq("ambient_so_dim", ambient.dim(), 21));
  auto stab = lie::stabilizer_algebra(
      ambient, [&](const MatrixXd& a) { return phi.algebra_act(a).flatten(); });
  rep.checks.push_back(check_eq("stabilizer_dim", stab.dim(), 14));
  rep.checks.push_back(
      check_lt("bracket_closure", lie::bracket_closure_residual(stab), 1e-8));

  json extra;
  extra["stabilizer_basis"] = io::to_json(stab);
  write_artifacts(rep, opts, nullptr, &extra);
  return rep;
}

RunReport run_fefferman_transitivity(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario", "signature", "samples", "seed"},
             {"scenario"});
  RunReport rep;
  rep.scenario = "fefferman-transitivity";
  auto [p, q] = signature_of(cfg, {1, 1});
  model::HomogeneousModel m = model::HomogeneousModel::conformal_sphere(p, q);
  model::ReductionDatum datum =
      model::ComplexStructureDatum{m.standard_orthogonal_complex_structure()};
  int samples = cfg.value("samples", 10000);
  num::Rng rng(require_seed(cfg, opts));

  int exceptions = 0;
  for (int k = 0; k < samples; ++k)
    if (model::p_type(m, datum, m.sample_point(rng)) !=
        model::PTypeLabel::Single)
      ++exceptions;
  rep.checks.push_back(check_eq("non_single_labels", exceptions, 0));

  auto stab = model::datum_stabilizer(m, datum);
  int u_dim = (p + q + 2) * (p + q + 2) / 4;  // u((p+q+2)/2) real dimension
  rep.checks.push_back(check_eq("unitary_stabilizer_dim", stab.dim(), u_dim));

  int model_dim = p + q;
  int mismatches = 0;
  for (int k = 0; k < 5; ++k) {
    auto [h, hp] = model::stabilizer_pair(m, datum, m.sample_point(rng));
    if (h.dim() - hp.dim() != model_dim) ++mismatches;
  }
  rep.checks.push_back(check_eq("orbit_dimension_accounting", mismatches, 0));
  write_artifacts(rep, opts, nullptr);
  return rep;
}

struct FlatScaleCase {
  std::string name;
  chart::QuadraticScale sigma;
  double h_expected;
  double lambda;
  bgg::Grid einstein_grid;
  double margin;
  std::string zero_label;  // expected zero-stratum label ("" when empty)
  std::string zero_geometry;
};

FlatScaleCase named_scale_case(const std::string& name, int n) {
  MatrixXd g = MatrixXd::Identity(n, n);
  VectorXd zero = VectorXd::Zero(n);
  bgg::Grid inner{VectorXd::Constant(n, -0.45), VectorXd::Constant(n, 0.45), 3};
  bgg::Grid wide{VectorXd::Constant(n, -1.0), VectorXd::Constant(n, 1.0), 3};
  bgg::Grid outer{VectorXd::Constant(n, 0.75), VectorXd::Constant(n, 1.9), 3};
  bgg::Grid offplane{VectorXd::Constant(n, -0.9), VectorXd::Constant(n, 0.9),
                     3};
  offplane.lo[0] = 0.4;
  offplane.hi[0] = 1.8;

  if (name == "poincare")
    return {name,  {0.5, zero, -1.0, g}, +1.0, -2.0, inner, 0.1,
            "ZERO", "hypersurface"};
  if (name == "round")
    return {name, {0.5, zero, 1.0, g}, -1.0, +2.0, wide, 0.4, "", ""};
  if (name == "linear") {
    VectorXd e1 = VectorXd::Zero(n);
    e1[0] = 1.0;
    return {name,  {0.0, e1, 0.0, g}, +1.0, -2.0, offplane, 0.15,
            "ZERO", "hypersurface"};
  }
  if (name == "cone")
    return {name,        {0.0, zero, 1.0, g}, 0.0, 0.0, outer, 0.2,
            "DEEP_ZERO", "isolated"};
  throw ConfigError("unknown sigma: " + name);
}

RunReport run_almost_einstein_flat(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario", "sigma", "dim", "seed"}, {"scenario", "sigma"});
  RunReport rep;
  rep.scenario = "almost-einstein-flat";
  int n = cfg.value("dim", 3);
  FlatScaleCase cs = named_scale_case(cfg.at("sigma"), n);

  chart::ChartGeometry c =
      chart::flat_chart(n, 0, chart::StructureKind::Conformal);
  MatrixXd g = MatrixXd::Identity(n, n);
  auto conn = std::make_shared<tractor::TractorConnection>(c);
  bgg::ParallelSection s(
      conn, VectorXd::Zero(n),
      bgg::flat_section_value(cs.sigma, g, VectorXd::Zero(n)));

  rep.checks.push_back(
      check_approx("h_s_s", *s.g_type_norm(), cs.h_expected, 1e-8));

  bgg::EinsteinCheck echk;
  echk.lambda = cs.lambda;
  echk.margin = cs.margin;
  double res = bgg::einstein_verify(c, cs.sigma, cs.einstein_grid, echk);
  rep.checks.push_back(check_lt("einstein_residual", res, 1e-6));
  if (cs.h_expected != 0.0)
    rep.checks.push_back(check_eq("sign_law_lambda_vs_h",
                                  cs.lambda * cs.h_expected < 0 ? 1 : 0, 1));

  bgg::StrataOptions sopts;
  sopts.threads = opts.threads;
  bgg::Grid strata_grid{VectorXd::Constant(n, -2.0),
                        VectorXd::Constant(n, 2.0), 5};
  auto strata = bgg::zero_strata(s, strata_grid, sopts);
  if (cs.zero_label.empty()) {
    rep.checks.push_back(
        check_eq("zero_set_empty",
                 strata.observed_labels.count("ZERO") +
                     strata.observed_labels.count("DEEP_ZERO"),
                 0));
  } else {
    rep.checks.push_back(check_eq(
        "zero_label_seen", strata.observed_labels.count(cs.zero_label), 1));
    bool geo_ok =
        strata.stratum_geometry.count(cs.zero_label) &&
        strata.stratum_geometry.at(cs.zero_label) == cs.zero_geometry;
    rep.checks.push_back(
        check_eq("zero_geometry_" + cs.zero_geometry, geo_ok ? 1 : 0, 1));
  }
  rep.checks.push_back(check_eq("zu_monotone", strata.zu_monotone ? 1 : 0, 1));

  auto orbits = bgg::curved_orbit_decompose(s, strata_grid, sopts);
  rep.checks.push_back(check_eq("labels_subset_of_model",
                                orbits.metrics.at("labels_subset_of_model"),
                                1));

  bgg::FlatModelDictionary dict{g};
  VectorXd v = dict.model_vector(s.base_value());
  MatrixXd f = MatrixXd::Zero(n + 2, n + 2);
  f(0, n + 1) = f(n + 1, 0) = 1.0;
  f.block(1, 1, n, n) = g;
  double cross = 0.0;
  num::Rng rng(2024);
  for (int k = 0; k < 8; ++k) {
    VectorXd x =
        VectorXd::NullaryExpr(n, [&](int) { return rng.uniform(-2, 2); });
    cross = std::max(
        cross, std::abs(bgg::bgg_project(s, x) - v.dot(f * dict.lift(x))));
  }
  rep.checks.push_back(check_lt("model_pairing_crosscheck", cross, 1e-8));
  rep.checks.push_back(
      check_lt("path_independence", s.path_independence_residual(4, 7), 1e-9));

  write_artifacts(rep, opts, &orbits);
  return rep;
}

RunReport run_almost_einstein_null(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario", "dim", "seed"}, {"scenario"});
  RunReport rep;
  rep.scenario = "almost-einstein-null";
  int n = cfg.value("dim", 3);

  {
    FlatScaleCase cs = named_scale_case("cone", n);
    chart::ChartGeometry c =
        chart::flat_chart(n, 0, chart::StructureKind::Conformal);
    MatrixXd g = MatrixXd::Identity(n, n);
    auto conn = std::make_shared<tractor::TractorConnection>(c);
    bgg::ParallelSection s(
        conn, VectorXd::Zero(n),
        bgg::flat_section_value(cs.sigma, g, VectorXd::Zero(n)));
    rep.checks.push_back(
        check_approx("cone_h_s_s", *s.g_type_norm(), 0.0, 1e-8));
    bgg::EinsteinCheck echk;
    echk.lambda = 0.0;
    echk.margin = cs.margin;
    rep.checks.push_back(check_lt(
        "cone_ricci_flat_residual",
        bgg::einstein_verify(c, cs.sigma, cs.einstein_grid, echk), 1e-6));

    bgg::Grid grid{VectorXd::Constant(n, -2.0), VectorXd::Constant(n, 2.0), 5};
    auto strata = bgg::zero_strata(s, grid, {});
    rep.checks.push_back(check_eq(
        "cone_isolated_zero",
        strata.stratum_geometry.count("DEEP_ZERO") &&
                strata.stratum_geometry.at("DEEP_ZERO") == "isolated"
            ? 1
            : 0,
        1));
  }

  {
    chart::ChartGeometry c =
        chart::flat_chart(1, 1, chart::StructureKind::Conformal);
    MatrixXd g = c.flat_diag().asDiagonal();
    chart::QuadraticScale sigma{0.0, VectorXd::Zero(2), 1.0, g};
    auto conn = std::make_shared<tractor::TractorConnection>(c);
    bgg::ParallelSection s(
        conn, VectorXd::Zero(2),
        bgg::flat_section_value(sigma, g, VectorXd::Zero(2)));
    rep.checks.push_back(
        check_approx("saddle_h_s_s", *s.g_type_norm(), 0.0, 1e-8));

    bgg::Grid grid{VectorXd::Constant(2, -2.0), VectorXd::Constant(2, 2.0), 5};
    bgg::StrataOptions sopts;
    sopts.threads = opts.threads;
    auto orbits = bgg::curved_orbit_decompose(s, grid, sopts);
    bool has_m2 = orbits.observed_labels.count("HYPERSURFACE") == 1;
    bool has_m3 = orbits.observed_labels.count("ISOLATED_PLUS") +
                      orbits.observed_labels.count("ISOLATED_MINUS") >
                  0;
    rep.checks.push_back(check_eq("saddle_m2_present", has_m2 ? 1 : 0, 1));
    rep.checks.push_back(check_eq("saddle_m3_present", has_m3 ? 1 : 0, 1));
    rep.checks.push_back(
        check_eq("saddle_m3_implies_m2", (!has_m3 || has_m2) ? 1 : 0, 1));
    rep.checks.push_back(check_eq("saddle_labels_subset",
                                  orbits.metrics.at("labels_subset_of_model"),
                                  1));
    auto strata = bgg::zero_strata(s, grid, {});
    rep.checks.push_back(
        check_eq("saddle_zu_monotone", strata.zu_monotone ? 1 : 0, 1));
    write_artifacts(rep, opts, &orbits);
  }
  return rep;
}

RunReport run_projective_metric(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario", "chart", "dim", "seed"}, {"scenario", "chart"});
  RunReport rep;
  rep.scenario = "projective-metric";
  int n = cfg.value("dim", 3);
  std::string chart_name = cfg.at("chart");

  chart::ChartGeometry c =
      chart_name == "round"
          ? chart::round_sphere_chart(n, chart::StructureKind::Projective)
      : chart_name == "hyperbolic"
          ? chart::poincare_ball_chart(n, chart::StructureKind::Projective)
          : chart::flat_chart(n, 0, chart::StructureKind::Projective);
  if (chart_name != "round" && chart_name != "hyperbolic" &&
      chart_name != "flat")
    throw ConfigError("unknown chart: " + chart_name);

  bgg::ProjectiveMetricOptions popts;
  if (chart_name == "flat") {
    MatrixXd h0 = MatrixXd::Identity(n + 1, n + 1);
    h0(n, n) = -1.0;
    popts.prescribed_base_metric = h0;
    popts.grid_halfwidth = 2.0;
    popts.grid_resolution = 5;
  }
  auto r = bgg::projective_metric_scenario(c, popts);

  rep.checks.push_back(
      check_lt("chart_einstein_residual", r.chart_einstein_residual, 1e-5));
  double expected_lambda = chart_name == "round"
                               ? n - 1.0
                               : (chart_name == "hyperbolic" ? 1.0 - n : 0.0);
  rep.checks.push_back(check_approx("einstein_constant", r.einstein_constant,
                                    expected_lambda, 1e-5));
  rep.checks.push_back(check_eq("holonomy_dim", r.holonomy_dim, 0));
  rep.checks.push_back(
      check_eq("kernel_dim", r.kernel_dim, (n + 1) * (n + 2) / 2));
  if (chart_name == "round") {
    bool definite = r.tractor_metric_signature.null == 0 &&
                    (r.tractor_metric_signature.positive == n + 1 ||
                     r.tractor_metric_signature.negative == n + 1);
    rep.checks.push_back(
        check_eq("tractor_metric_definite", definite ? 1 : 0, 1));
    rep.checks.push_back(
        check_lt("canonical_scale_residual", r.canonical_scale_residual, 1e-6));
    rep.checks.push_back(
        check_eq("single_open_label", r.labels.size() == 1 ? 1 : 0, 1));
  } else if (chart_name == "hyperbolic") {
    bool lorentzian = r.tractor_metric_signature.null == 0 &&
                      (r.tractor_metric_signature.positive == 1 ||
                       r.tractor_metric_signature.negative == 1);
    rep.checks.push_back(
        check_eq("tractor_metric_lorentzian", lorentzian ? 1 : 0, 1));
    rep.checks.push_back(
        check_lt("canonical_scale_residual", r.canonical_scale_residual, 1e-6));
    rep.checks.push_back(
        check_eq("single_open_label", r.labels.size() == 1 ? 1 : 0, 1));
  } else {
    rep.checks.push_back(check_eq("three_labels", r.labels.size(), 3));
  }
  write_artifacts(rep, opts, nullptr);
  return rep;
}

RunReport run_cr_codim2(const json& cfg, const RunOptions& opts) {
  check_keys(cfg, {"scenario", "signature", "samples", "seed"},
             {"scenario"});
  RunReport rep;
  rep.scenario = "cr-codim2";
  auto [p, q] = signature_of(cfg, {1, 1});
  model::HomogeneousModel m = model::HomogeneousModel::cr_sphere(p, q);
  model::ReductionDatum datum =
      model::VectorDatum{named_cr_vector(m, "negative")};

  model::OrbitGridOptions gopts;
  gopts.n_samples = cfg.value("samples", 2000);
  gopts.seed = require_seed(cfg, opts);
  gopts.threads = opts.threads;
  auto strata = model::orbit_decompose_grid(m, datum, gopts);

  auto expected = model::expected_labels(m, datum);
  rep.checks.push_back(check_eq(
      "label_set_matches", strata.observed_labels == expected ? 1 : 0, 1));
  rep.checks.push_back(
      check_eq("two_labels", strata.observed_labels.size(), 2));
  bool codim2 = strata.stratum_geometry.count("ZERO") &&
                strata.stratum_geometry.at("ZERO") == "codim2";
  rep.checks.push_back(check_eq("zero_codim2", codim2 ? 1 : 0, 1));
  double rank = 0;
  for (const auto& row : strata.samples)
    if (row.label == "ZERO" && row.diagnostics.count("jac_rank"))
      rank = std::max(rank, row.diagnostics.at("jac_rank"));
  rep.checks.push_back(check_eq("zero_constraint_rank", rank, 2));
  write_artifacts(rep, opts, &strata);
  return rep;
}

RunReport run_holonomy_perturbed(const json& cfg, const RunOptions& opts) {
  check_keys(
      cfg, {"scenario", "chart", "dim", "signature", "eps", "seed", "loops"},
      {"scenario"});
  RunReport rep;
  rep.scenario = "holonomy-perturbed";
  std::string chart_name = cfg.value("chart", "bump");
  auto [p, q] = signature_of(cfg, {3, 0});
  std::uint64_t seed = require_seed(cfg, opts);

  chart::ChartGeometry c =
      chart_name == "bump"
          ? chart::bump_chart(p, q, chart::StructureKind::Conformal,
                              cfg.value("eps", 0.4), seed)
      : chart_name == "round"
          ? chart::round_sphere_chart(p + q, chart::StructureKind::Conformal)
          : chart::flat_chart(p, q, chart::StructureKind::Conformal);
  if (chart_name != "bump" && chart_name != "round" && chart_name != "flat")
    throw ConfigError("unknown chart: " + chart_name);

  tractor::TractorConnection conn(c);
  VectorXd base = VectorXd::Zero(c.dim);
  std::vector<tractor::Path> loops;
  if (cfg.contains("loops")) {
    for (const auto& lj : cfg.at("loops"))
      loops.push_back(io::path_from_json(lj));
  } else {
    loops = tractor::default_loop_family(c, base, seed + 1);
  }
  auto hol = tractor::holonomy_algebra(conn, base, loops);

  int full_dim = (c.dim + 2) * (c.dim + 1) / 2;
  int expected_dim = chart_name == "bump" ? full_dim : 0;
  rep.checks.push_back(
      check_eq("holonomy_dim", hol.algebra.dim(), expected_dim));
  if (chart_name == "bump") {
    rep.checks.push_back(check_lt(
        "bracket_closure", lie::bracket_closure_residual(hol.algebra), 1e-6));
  } else {
    double max_log = 0.0;
    for (const auto& s : hol.samples)
      max_log = std::max(max_log, s.log.norm());
    rep.checks.push_back(check_lt("max_loop_log_norm", max_log, 1e-6));
  }
  double max_metric_residual = 0.0;
  for (const auto& s : hol.samples)
    max_metric_residual = std::max(max_metric_residual, s.metric_residual);
  rep.checks.push_back(
      check_lt("transport_metric_residual", max_metric_residual, 1e-7));

  VectorXd probe = VectorXd::Constant(c.dim, 0.15);
  rep.checks.push_back(check_lt(
      "normality_residual", tractor::normality_residual(conn, probe), 1e-4));

  json extra;
  extra["holonomy_basis"] = io::to_json(hol.algebra);
  json transports = json::array();
  for (size_t i = 0; i < std::min<size_t>(hol.samples.size(), 6); ++i) {
    json t;
    t["loop"] = io::to_json(hol.samples[i].loop);
    t["transport"] = io::to_json(hol.samples[i].transport);
    transports.push_back(t);
  }
  extra["sample_transports"] = transports;
  write_artifacts(rep, opts, nullptr, &extra);
  return rep;
}

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
  return {
      {"almost-einstein-flat",
       "flat-chart parallel scale: Einstein rescaling, sign law, zero strata"},
      {"almost-einstein-null",
       "null parallel scale: Ricci-flat rescaling, isolated and cone strata"},
      {"cr-codim2",
       "CR sphere with negative tractor: open orbit plus codimension-two "
       "zero set"},
      {"fefferman-transitivity",
       "orthogonal complex structure on the conformal sphere: single P-type"},
      {"flow-identity",
       "normal-coordinate flow identity on the homogeneous models"},
      {"g2-stabilizer",
       "generic three-form in seven dimensions: 14-dimensional stabilizer"},
      {"holonomy-perturbed",
       "tractor holonomy: flat/round charts reduce, generic bumps saturate"},
      {"model-orbits",
       "orbit decomposition of a homogeneous model under a reduction datum"},
      {"projective-metric",
       "Einstein charts: parallel projective tractor metric and its "
       "signature"},
      {"stabilizer-dims",
       "stabilizer algebra dimensions for the scenario reduction data"},
  };
}

RunReport run_scenario(const json& config, const RunOptions& opts) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  if (!config.contains("scenario"))
    throw ConfigError("config needs a \"scenario\" key");
  std::string name = config.at("scenario");
  log_info("running scenario " + name);

  auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  if (name == "model-orbits")
    rep = run_model_orbits(config, opts);
  else if (name == "flow-identity")
    rep = run_flow_identity(config, opts);
  else if (name == "stabilizer-dims")
    rep = run_stabilizer_dims(config, opts);
  else if (name == "g2-stabilizer")
    rep = run_g2_stabilizer(config, opts);
  else if (name == "fefferman-transitivity")
    rep = run_fefferman_transitivity(config, opts);
  else if (name == "almost-einstein-flat")
    rep = run_almost_einstein_flat(config, opts);
  else if (name == "almost-einstein-null")
    rep = run_almost_einstein_null(config, opts);
  else if (name == "projective-metric")
    rep = run_projective_metric(config, opts);
  else if (name == "cr-codim2")
    rep = run_cr_codim2(config, opts);
  else if (name == "holonomy-perturbed")
    rep = run_holonomy_perturbed(config, opts);
  else
    throw ConfigError("unknown scenario: " + name);

  rep.config_echo = config;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  for (const auto& c : rep.checks)
    log_debug("check " + c.name + (c.pass ? " pass" : " FAIL"));
  return rep;
}

RunReport verify_stabilizer(const json& descriptor, const RunOptions& opts) {
  check_keys(descriptor, {"algebra", "datum", "expected_dim"},
             {"algebra", "datum"});
  RunReport rep;
  rep.scenario = "verify-stabilizer";
  rep.config_echo = descriptor;

  const json& alg = descriptor.at("algebra");
  std::string kind = alg.at("kind");
  lie::AlgebraBasis ambient;
  if (kind == "so") {
    auto [p, q] = signature_of(alg, {3, 1});
    ambient = lie::so_basis(forms::SymmetricForm::standard(p, q));
  } else if (kind == "su") {
    auto [p, q] = signature_of(alg, {1, 1});
    ambient = lie::su_basis(forms::HermitianForm::standard(p, q));
  } else if (kind == "sl") {
    ambient = lie::sl_basis(alg.at("n").get<int>());
  } else if (kind == "sl-complex") {
    ambient = lie::sl_complex_basis(alg.at("n").get<int>());
  } else {
    throw ConfigError("unknown algebra kind: " + kind);
  }

  const json& dj = descriptor.at("datum");
  std::string variant = dj.at("variant");
  lie::AlgebraAction action;
  if (variant == "vector") {
    VectorXd v = io::vector_from_json(dj.at("components"));
    action = [v](const MatrixXd& a) { return VectorXd(a * v); };
  } else if (variant == "form") {
    auto f = io::form_from_json(dj.at("form"));
    MatrixXd m = std::holds_alternative<forms::SymmetricForm>(f)
                     ? std::get<forms::SymmetricForm>(f).matrix()
                     : std::get<forms::HermitianForm>(f).matrix();
    action = [m](const MatrixXd& a) {
      MatrixXd r = lie::act_on_form(a, m);
      return VectorXd(Eigen::Map<VectorXd>(r.data(), r.size()));
    };
  } else if (variant == "three-form") {
    lie::ThreeForm phi =
        dj.value("form", "split-g2") == std::string("compact-g2")
            ? lie::compact_g2_three_form()
            : lie::split_g2_three_form();
    action = [phi](const MatrixXd& a) { return phi.algebra_act(a).flatten(); };
  } else {
    throw ConfigError("unknown datum variant: " + variant);
  }

  auto stab = lie::stabilizer_algebra(ambient, action);
  if (descriptor.contains("expected_dim")) {
    rep.checks.push_back(check_eq("stabilizer_dim", stab.dim(),
                                  descriptor.at("expected_dim").get<int>()));
  } else {
    rep.checks.push_back(
        CheckResult{"stabilizer_dim", static_cast<double>(stab.dim()),
                    static_cast<double>(stab.dim()), 0.0, "report", true});
  }
  rep.checks.push_back(
      check_lt("bracket_closure", lie::bracket_closure_residual(stab), 1e-8));

  json extra;
  extra["stabilizer_basis"] = io::to_json(stab);
  write_artifacts(rep, opts, nullptr, &extra);
  return rep;
}

}  // namespace cartan::scenario
