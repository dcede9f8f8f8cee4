#include "bicon/checks.hpp"

#include <cmath>

namespace bicon {

using nlohmann::json;

namespace {

json point_json(const Point& x) {
  json j = json::array();
  for (double v : x) j.push_back(v);
  return j;
}

CheckResult from_residual(const std::string& name, double residual, int points,
                          const Tolerances& tol, const Point& worst) {
  CheckResult r;
  r.name = name;
  r.verdict = classify(residual, tol);
  r.max_residual = residual;
  r.points = points;
  r.details["worst_point"] = point_json(worst);
  return r;
}

}  // namespace

std::vector<CheckResult> check_metric(const Manifest& m) {
  MetricField g = m.metric_field();
  auto pts = m.sample_points();
  // nondegeneracy: evaluation throws on |det| below threshold
  double min_det = std::numeric_limits<double>::infinity();
  std::vector<int> sig;
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 0);
    min_det = std::min(min_det, std::abs(ms.det.value()));
    sig = ms.eig_signs;
  }
  CheckResult nd;
  nd.name = "metric-nondegenerate";
  nd.verdict = Verdict::Pass;
  nd.max_residual = 0.0;
  nd.points = static_cast<int>(pts.size());
  nd.details["min_abs_det"] = min_det;
  nd.details["signature"] = sig;
  // identity suite with the first declared field, else a seeded polynomial
  VectorField xi = m.fields.empty()
                       ? random_vector_field(m.chart(), static_cast<unsigned>(m.seed))
                       : m.field(m.fields.begin()->first);
  CheckResult ids;
  ids.name = "identity-suite";
  ids.points = static_cast<int>(pts.size());
  double worst = 0.0;
  Point worst_pt = pts.front();
  json per = json::object();
  for (const auto& x : pts) {
    auto res = identity_suite(g, xi, x);
    for (const auto& [k, v] : res) {
      if (!per.contains(k) || v > per[k].get<double>()) per[k] = v;
      if (v >= worst) {
        worst = v;
        worst_pt = x;
      }
    }
  }
  ids.max_residual = worst;
  ids.verdict = classify(worst, m.tol);
  ids.details["identities"] = per;
  ids.details["field"] = m.fields.empty() ? "(seeded polynomial)" : m.fields.begin()->first;
  ids.details["worst_point"] = point_json(worst_pt);
  return {nd, ids};
}

std::vector<CheckResult> check_root(const Manifest& m) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  auto pts = m.sample_points();
  RootCheckReport rep = check_square_root(g, *root, pts, m.tol.pass);
  CheckResult r = from_residual("check-root", rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  // projector content at the base point
  MetricStructure ms = g.at(m.base, 0);
  RootStructure rs = root->at(ms);
  auto ranks = projector_ranks(rs);
  r.details["p"] = rs.p;
  r.details["rank_P"] = ranks.rank_P;
  r.details["rank_Pi"] = ranks.rank_Pi;
  r.details["sign"] = rs.sign;
  return {r};
}

std::vector<CheckResult> check_bcvf(const Manifest& m, const std::string& field) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  VectorField xi = m.field(field);
  auto pts = m.sample_points();
  DetectReport rep = detect_bcvf(g, *root, xi, pts, m.tol);
  CheckResult r = from_residual("check-bcvf:" + field, rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  r.verdict = rep.verdict;
  double amin = 0, amax = 0, bmin = 0, bmax = 0;
  bool first = true;
  for (const auto& dp : rep.points) {
    if (first) {
      amin = amax = dp.gauge.alpha;
      bmin = bmax = dp.gauge.beta;
      first = false;
    }
    amin = std::min(amin, dp.gauge.alpha);
    amax = std::max(amax, dp.gauge.alpha);
    bmin = std::min(bmin, dp.gauge.beta);
    bmax = std::max(bmax, dp.gauge.beta);
  }
  r.details["p"] = rep.p;
  r.details["alpha_range"] = {amin, amax};
  r.details["beta_range"] = {bmin, bmax};
  r.details["alpha_base"] = rep.points.front().gauge.alpha;
  r.details["beta_base"] = rep.points.front().gauge.beta;
  return {r};
}

std::vector<CheckResult> check_gauge_free(const Manifest& m, const std::string& field) {
  MetricField g = m.metric_field();
  VectorField xi = m.field(field);
  auto pts = m.sample_points();
  WedgeReport rep = gauge_free_test(g, xi, pts, m.tol);
  CheckResult r = from_residual("gauge-free:" + field, rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  r.verdict = rep.verdict;
  r.details["first_wedge"] = rep.max_first;
  r.details["second_wedge"] = rep.max_second;
  return {r};
}

std::vector<CheckResult> check_kerr_schild(const Manifest& m, const std::string& field,
                                           const std::string& k_name) {
  MetricField g = m.metric_field();
  VectorField xi = m.field(field);
  auto k = m.one_form(k_name);
  auto pts = m.sample_points();
  KerrSchildReport rep = detect_kerr_schild(g, xi, k, pts, m.tol);
  CheckResult r = from_residual("kerr-schild:" + field, rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  r.verdict = rep.verdict;
  r.details["alpha_base"] = rep.points.front().alpha;
  r.details["beta_base"] = rep.points.front().beta;
  r.details["gamma_base"] = rep.points.front().gamma;
  return {r};
}

std::vector<CheckResult> check_split(const Manifest& m) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  auto pts = m.sample_points();
  SplitReport rep = split_test(g, *root, pts);
  CheckResult r;
  r.name = "split-test";
  r.verdict = rep.verdict;
  r.max_residual = rep.max_residual;
  r.points = static_cast<int>(pts.size());
  r.details["worst_point"] = point_json(rep.worst_point);
  r.details["interpretation"] = rep.verdict == Verdict::Pass
                                    ? "consistent with double-twisted"
                                    : (rep.verdict == Verdict::Fail
                                           ? "not double-twisted in this splitting"
                                           : "flagged");
  return {r};
}

std::vector<CheckResult> check_structure(const Manifest& m) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  auto pts = m.sample_points();
  double worst = 0.0;
  Point worst_pt = pts.front();
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 2);
    RootStructure rs = root->at(ms);
    StructureTensors st = compute_structure(ms, rs, 0);
    if (st.invariant_residual >= worst) {
      worst = st.invariant_residual;
      worst_pt = x;
    }
  }
  CheckResult r = from_residual("structure", worst, static_cast<int>(pts.size()),
                                {1e-9, 1e-4, m.tol.fd_step}, worst_pt);
  // dump at the base point
  MetricStructure ms = g.at(m.base, 2);
  RootStructure rs = root->at(ms);
  StructureTensors st = compute_structure(ms, rs, 1);
  json ev = json::array(), wv = json::array();
  for (int a = 0; a < st.n; ++a) {
    ev.push_back(st.E.a[a].value());
    wv.push_back(st.W.a[a].value());
  }
  r.details["p"] = st.p;
  r.details["E_base"] = ev;
  r.details["W_base"] = wv;
  r.details["R0_base"] = st.R0.value();
  r.details["W0_base"] = st.W0.value();
  r.details["max_M"] = value_of(st.M_low).max_abs();
  r.details["max_T"] = value_of(st.T).max_abs();
  return {r};
}

std::vector<CheckResult> check_constraints(const Manifest& m, const std::string& field) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  VectorField xi = m.field(field);
  auto pts = m.sample_points();
  ConstraintReport rep = constraint_residuals(g, *root, xi, m.gauge_fields(field), pts, m.tol);
  CheckResult r = from_residual("constraints:" + field, rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  r.verdict = rep.verdict;
  r.details["c1"] = rep.c1;
  r.details["c2"] = rep.c2;
  r.details["c3"] = rep.c3;
  r.details["gauges"] = m.gauge_fields(field) ? "manifest" : "trace-extracted";
  return {r};
}

std::vector<CheckResult> check_normal_system(const Manifest& m, const std::string& field) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  VectorField xi = m.field(field);
  auto gf = m.gauge_fields(field);
  if (!gf)
    throw ValidationError(
        "normal-system requires gauge expressions for field \"" + field +
        "\" in the manifest (gauges." + field + ".alpha / .beta)");
  auto pts = m.sample_points();
  NormalSystemReport rep =
      normal_system_residuals(g, *root, xi, *gf, pts, m.jet_order, m.tol);
  CheckResult r = from_residual("normal-system:" + field, rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  r.verdict = rep.verdict;
  for (const auto& [k, v] : rep.residuals) r.details["equations"][k] = v;
  return {r};
}

std::vector<CheckResult> check_integrability(const Manifest& m, const std::string& field) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  VectorField xi = m.field(field);
  auto pts = m.sample_points();
  IntegrabilityReport rep =
      integrability_residuals(g, *root, xi, m.gauge_fields(field), pts, m.tol);
  CheckResult r = from_residual("integrability:" + field, rep.max_residual,
                                static_cast<int>(pts.size()), m.tol, rep.worst_point);
  r.verdict = rep.verdict;
  for (const auto& [k, v] : rep.residuals) r.details["equations"][k] = v;
  return {r};
}

std::vector<CheckResult> check_rank_appendix(const Manifest& m) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  auto pts = m.sample_points();
  CheckResult r;
  r.name = "rank-appendix";
  r.points = static_cast<int>(pts.size());
  bool ok = true;
  int expected = -1, got_m = -1, got_c = -1;
  Point worst = pts.front();
  for (const auto& x : pts) {
    MetricStructure ms = g.at(x, 1);
    RootStructure rs = root->at(ms);
    AppendixRank ar = appendix_rank(ms, rs);
    expected = rs.p * (ms.n - rs.p);
    got_m = ar.m_rank;
    got_c = ar.combined_rank;
    if (ar.m_rank != expected || ar.combined_rank != ar.m_rank) {
      ok = false;
      worst = x;
      break;
    }
  }
  r.verdict = ok ? Verdict::Pass : Verdict::Fail;
  r.max_residual = ok ? 0.0 : 1.0;
  r.details["expected_rank"] = expected;
  r.details["m_rank"] = got_m;
  r.details["combined_rank"] = got_c;
  r.details["worst_point"] = point_json(worst);
  return {r};
}

std::vector<CheckResult> check_bound(int n, int p) {
  DimensionBound b = dimension_bound(n, p);
  CheckResult r;
  r.name = "bound";
  r.verdict = Verdict::Pass;
  r.points = 0;
  if (b.infinite_possible) {
    r.details["flag"] = "infinite-possible";
    r.details["reason"] = "p or n-p lies in {1, 2}: the algebra may be infinite dimensional";
  } else {
    r.details["bound"] = b.bound;
  }
  r.details["n"] = n;
  r.details["p"] = p;
  return {r};
}

std::vector<CheckResult> check_maximal_demo(int n, int p) {
  Manifest m = maximal_demo_manifest(n, p);
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  auto pts = m.sample_points();
  CheckResult r;
  r.name = "maximal-demo";
  r.points = static_cast<int>(pts.size());
  long expected = static_cast<long>((p + 1) * (p + 2) / 2 +
                                    (n - p + 1) * (n - p + 2) / 2);
  double worst = 0.0;
  Point worst_pt = pts.front();
  std::vector<VectorField> vfs;
  for (const auto& [fname, comps] : m.fields) {
    VectorField xi = m.field(fname);
    vfs.push_back(xi);
    DetectReport rep = detect_bcvf(g, *root, xi, pts, m.tol);
    if (rep.max_residual >= worst) {
      worst = rep.max_residual;
      worst_pt = rep.worst_point;
    }
  }
  int rank = independence_rank(vfs, pts);
  DimensionBound b = dimension_bound(n, p);
  r.max_residual = worst;
  bool counts_ok = static_cast<long>(vfs.size()) == expected && rank == expected &&
                   (b.infinite_possible || b.bound == expected);
  r.verdict = (classify(worst, m.tol) == Verdict::Pass && counts_ok)
                  ? Verdict::Pass
                  : (counts_ok ? classify(worst, m.tol) : Verdict::Fail);
  r.details["fields"] = vfs.size();
  r.details["independence_rank"] = rank;
  r.details["expected"] = expected;
  r.details["bound"] = b.infinite_possible ? json("infinite-possible") : json(b.bound);
  r.details["worst_point"] = point_json(worst_pt);
  return {r};
}

std::vector<CheckResult> check_flow(const Manifest& m, const std::string& field, double s,
                                    int steps_per_unit) {
  MetricField g = m.metric_field();
  RootFieldPtr root = m.root_field();
  VectorField xi = m.field(field);
  FlowDomain box{m.base, m.half_widths};
  Tolerances flow_tol = m.tol;
  // fixed-step RK4 against the exponential integral: accuracy is set by the
  // integrator, not by the AD path
  flow_tol.pass = std::max(flow_tol.pass, 1e-4);
  flow_tol.fail = std::max(flow_tol.fail, 1e-2);
  FlowReport rep = flow_pullback_check(g, *root, xi, m.gauge_fields(field), m.base, s,
                                       steps_per_unit, box, flow_tol);
  CheckResult r;
  r.name = "flow:" + field;
  r.verdict = rep.verdict;
  r.max_residual = rep.max_residual;
  r.points = 1;
  r.details["s"] = s;
  r.details["endpoint"] = point_json(rep.endpoint);
  r.details["int_alpha"] = rep.int_alpha;
  r.details["int_beta"] = rep.int_beta;
  r.details["residual_plus"] = rep.residual_plus;
  r.details["residual_minus"] = rep.residual_minus;
  return {r};
}

json make_report(const Manifest* m, const std::vector<CheckResult>& results) {
  json rep;
  rep["tool"]["name"] = "bicon";
  rep["tool"]["version"] = "1.0.0";
  if (m) {
    rep["manifest"]["name"] = m->name;
    rep["manifest"]["dim"] = m->dim();
    rep["manifest"]["coordinates"] = m->coordinates;
    rep["manifest"]["sampling"]["count"] = m->sample_count;
    rep["manifest"]["sampling"]["seed"] = m->seed;
    rep["manifest"]["jet_order"] = m->jet_order;
    rep["manifest"]["tolerances"]["pass"] = m->tol.pass;
    rep["manifest"]["tolerances"]["fail"] = m->tol.fail;
  }
  json checks = json::array();
  for (const auto& r : results) {
    json c;
    c["check"] = r.name;
    c["status"] = verdict_name(r.verdict);
    c["max_residual"] = r.max_residual;
    c["points"] = r.points;
    c["details"] = r.details;
    checks.push_back(c);
  }
  rep["checks"] = checks;
  return rep;
}

int exit_code_for(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (r.verdict == Verdict::Fail) return 1;
  return 0;
}

}  // namespace bicon
