// Command-line front end: manifest-driven checks with JSON reports.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "bicon/checks.hpp"

using namespace bicon;

namespace {

Manifest load_manifest(const std::string& path, const std::string& scenario_name) {
  if (!scenario_name.empty()) return scenario(scenario_name);
  if (path.rfind("builtin:", 0) == 0) return scenario(path.substr(8));
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest file \"" + path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("manifest JSON parse error: ") + e.what());
  }
  Manifest m = Manifest::from_json(j);
  m.validate();
  return m;
}

void emit(const Manifest* m, const std::vector<CheckResult>& results,
          const std::string& json_out) {
  nlohmann::json rep = make_report(m, results);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << rep.dump(2) << "\n";
    for (const auto& r : results)
      std::cout << r.name << ": " << verdict_name(r.verdict)
                << " (max residual " << r.max_residual << ", " << r.points
                << " points)\n";
  } else {
    std::cout << rep.dump(2) << "\n";
  }
  for (const auto& r : results)
    if (r.verdict == Verdict::Flagged)
      std::cerr << "warning: " << r.name
                << " is in the flagged band (residual " << r.max_residual << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chart-level checks for bi-conformal symmetry structures"};
  app.require_subcommand(1);

  std::string manifest_path, scenario_name, json_out, field_name, k_name = "k";
  double flow_s = 0.3;
  int flow_steps = 200;
  int opt_n = 0, opt_p = 0;

  auto add_manifest_opts = [&](CLI::App* cmd, bool need_field) {
    if (need_field) cmd->add_option("field", field_name, "vector field name")->required();
    cmd->add_option("manifest", manifest_path,
                    "manifest path (or builtin:<scenario>)");
    cmd->add_option("--scenario", scenario_name, "built-in scenario name");
    cmd->add_option("--json-out", json_out, "write the JSON report to this file");
  };

  auto* c_metric = app.add_subcommand("check-metric", "nondegeneracy and identity suite");
  add_manifest_opts(c_metric, false);
  auto* c_root = app.add_subcommand("check-root", "square-root verification");
  add_manifest_opts(c_root, false);
  auto* c_bcvf = app.add_subcommand("check-bcvf", "bi-conformal detection with gauges");
  add_manifest_opts(c_bcvf, true);
  auto* c_wedge = app.add_subcommand("gauge-free", "gauge-free wedge conditions");
  add_manifest_opts(c_wedge, true);
  auto* c_ks = app.add_subcommand("kerr-schild", "generalized Kerr-Schild detection");
  add_manifest_opts(c_ks, true);
  c_ks->add_option("--k", k_name, "null 1-form name (default k)");
  auto* c_split = app.add_subcommand("split-test", "double-twisted criterion");
  add_manifest_opts(c_split, false);
  auto* c_struct = app.add_subcommand("structure", "structure tensors and invariants");
  add_manifest_opts(c_struct, false);
  auto* c_con = app.add_subcommand("constraints", "normal-system constraints");
  add_manifest_opts(c_con, true);
  auto* c_ns = app.add_subcommand("normal-system", "normal-system residuals");
  add_manifest_opts(c_ns, true);
  auto* c_int = app.add_subcommand("integrability", "transport identities");
  add_manifest_opts(c_int, true);
  auto* c_rank = app.add_subcommand("rank-appendix", "constraint-matrix rank");
  add_manifest_opts(c_rank, false);
  auto* c_bound = app.add_subcommand("bound", "dimension bound for (n, p)");
  c_bound->add_option("--n", opt_n, "manifold dimension")->required();
  c_bound->add_option("--p", opt_p, "projector trace")->required();
  c_bound->add_option("--json-out", json_out, "write the JSON report to this file");
  auto* c_max = app.add_subcommand("maximal-demo", "flat-leaf maximal space demo");
  c_max->add_option("--n", opt_n, "manifold dimension")->required();
  c_max->add_option("--p", opt_p, "first leaf dimension")->required();
  c_max->add_option("--json-out", json_out, "write the JSON report to this file");
  auto* c_flow = app.add_subcommand("flow", "finite transformation along the flow");
  add_manifest_opts(c_flow, true);
  c_flow->add_option("--s", flow_s, "flow time (default 0.3)");
  c_flow->add_option("--steps", flow_steps, "RK4 steps per unit flow time");
  auto* c_scen = app.add_subcommand("scenarios", "list or dump built-in scenarios");
  std::string dump_name;
  c_scen->add_option("--dump", dump_name, "print the manifest of one scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    std::vector<CheckResult> results;
    const bool wants_manifest = !(c_bound->parsed() || c_max->parsed() || c_scen->parsed());
    Manifest m;
    if (wants_manifest) {
      if (manifest_path.empty() && scenario_name.empty())
        throw ValidationError("a manifest path or --scenario is required");
      m = load_manifest(manifest_path, scenario_name);
    }
    if (c_metric->parsed()) results = check_metric(m);
    else if (c_root->parsed()) results = check_root(m);
    else if (c_bcvf->parsed()) results = check_bcvf(m, field_name);
    else if (c_wedge->parsed()) results = check_gauge_free(m, field_name);
    else if (c_ks->parsed()) results = check_kerr_schild(m, field_name, k_name);
    else if (c_split->parsed()) results = check_split(m);
    else if (c_struct->parsed()) results = check_structure(m);
    else if (c_con->parsed()) results = check_constraints(m, field_name);
    else if (c_ns->parsed()) results = check_normal_system(m, field_name);
    else if (c_int->parsed()) results = check_integrability(m, field_name);
    else if (c_rank->parsed()) results = check_rank_appendix(m);
    else if (c_bound->parsed()) {
      results = check_bound(opt_n, opt_p);
      emit(nullptr, results, json_out);
      return exit_code_for(results);
    } else if (c_max->parsed()) {
      results = check_maximal_demo(opt_n, opt_p);
      emit(nullptr, results, json_out);
      return exit_code_for(results);
    } else if (c_flow->parsed()) {
      results = check_flow(m, field_name, flow_s, flow_steps);
    } else if (c_scen->parsed()) {
      if (dump_name.empty()) {
        for (const auto& s : scenario_names()) std::cout << s << "\n";
      } else {
        std::cout << scenario(dump_name).to_json().dump(2) << "\n";
      }
      return 0;
    }
    emit(wants_manifest ? &m : nullptr, results, json_out);
    return exit_code_for(results);
  } catch (const ValidationError& e) {
    std::cerr << "manifest error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
