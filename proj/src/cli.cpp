#include "nlbvp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "nlbvp/verify.hpp"

namespace nlbvp::cli {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_validation("cannot open output file", json{{"path", path.string()}});
  out << content;
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

const json& need(const json& j, const char* key, const char* ctx) {
  if (!j.contains(key))
    fail_validation(std::string("config missing required key '") + key + "'",
                    json{{"context", ctx}});
  return j.at(key);
}

AnalyticFunction fn_from(const json& j, int dim) {
  const std::string name = need(j, "name", "function").get<std::string>();
  const double scale = j.value("scale", 1.0);
  return analytic_function(name, dim, scale);
}

struct Setup {
  Domain domain = Domain::interval(0.0, 1.0);
  KernelProfile profile = KernelProfile::poly_bump(1, 0.9, 2);
  double kappa0 = 0.25;
  EtaMode mode = EtaMode::quadratic;
  std::vector<double> deltas;
  MeshPolicy policy;
  json tolerances;
};

Setup parse_setup(const json& cfg) {
  Setup s;
  s.domain = Domain::from_json(need(cfg, "domain", "config"));
  const json& jk = need(cfg, "kernel", "config");
  const std::string fam = jk.value("family", std::string("poly_bump"));
  if (fam != "poly_bump") fail_validation("CLI kernel family must be poly_bump");
  s.profile = KernelProfile::poly_bump(s.domain.dim(), jk.value("R0", 0.9), jk.value("p", 2));
  const json& jl = need(cfg, "localization", "config");
  s.kappa0 = jl.value("kappa0", 0.25);
  s.mode = eta_mode_from_string(jl.value("mode", std::string("quadratic")));
  for (const auto& d : need(cfg, "deltas", "config")) s.deltas.push_back(d.get<double>());
  if (s.deltas.empty()) fail_validation("deltas must be non-empty");
  for (std::size_t i = 0; i + 1 < s.deltas.size(); ++i)
    if (!(s.deltas[i + 1] < s.deltas[i]))
      fail_validation("deltas must be strictly decreasing");
  s.policy = MeshPolicy::for_dim(s.domain.dim());
  if (cfg.contains("mesh")) {
    const json& jm = cfg.at("mesh");
    s.policy.h_max_div = jm.value("h_max_div", s.policy.h_max_div);
    s.policy.h_min_div = jm.value("h_min_div", s.policy.h_min_div);
    s.policy.h_min_from_h_max = jm.value("h_min_from_h_max", s.policy.h_min_from_h_max);
    s.policy.h_min_ratio = jm.value("h_min_ratio", s.policy.h_min_ratio);
    s.policy.c_grade = jm.value("c_grade", s.policy.c_grade);
    s.policy.coupling_exponent = jm.value("coupling_exponent", s.policy.coupling_exponent);
    s.policy.delta_ref = jm.value("delta_ref", s.policy.delta_ref);
  }
  s.tolerances = cfg.value("tolerances", json::object());
  if (cfg.contains("threads")) set_thread_count(cfg.at("threads").get<int>());
  return s;
}

int cmd_check(const Setup& s, const json& cfg, const fs::path& out) {
  (void)cfg;
  json report;
  report["kernel"] = {{"profile", s.profile.to_json()},
                      {"moment2", s.profile.moment2()},
                      {"moment2_target", s.domain.dim()},
                      {"rho_bar", s.profile.rho_bar()}};
  bool all_pass = std::abs(s.profile.moment2() - s.domain.dim()) <= 1e-8;
  json per_delta = json::array();
  for (double delta : s.deltas) {
    const auto eta = LocalizationField::build(s.domain, delta, s.kappa0, s.mode);
    const Mesh mesh = build_mesh(s.domain, s.policy.h_max(delta),
                                 s.policy.h_min(delta, s.kappa0), s.policy.c_grade, eta);
    const auto rep = check_localization_assumptions(eta, mesh, s.profile.R0());
    all_pass = all_pass && rep.all_pass();
    per_delta.push_back(json{{"delta", delta},
                             {"kappa1", eta.kappa1()},
                             {"kappa2", eta.kappa2()},
                             {"kappa_bar0", eta.kappa_bar0()},
                             {"delta0", eta.delta0()},
                             {"assumptions", rep.to_json()},
                             {"nodes", mesh.n_nodes()}});
  }
  report["localization"] = per_delta;
  report["all_pass"] = all_pass;
  write_json(out / "check_report.json", report);
  return 0;
}

int cmd_solve(const Setup& s, const json& cfg, const fs::path& out) {
  const json& jp = need(cfg, "problem", "solve");
  const std::string bc = need(jp, "bc", "problem").get<std::string>();
  const double delta = s.deltas.front();
  const auto eta = LocalizationField::build(s.domain, delta, s.kappa0, s.mode);
  const Mesh mesh = build_mesh(s.domain, s.policy.h_max(delta),
                               s.policy.h_min(delta, s.kappa0), s.policy.c_grade, eta);
  const TwoPointKernel k2(s.profile, eta, 2.0);
  const Workspace ws = make_workspace(mesh, k2);
  const OperatorAssembly asm_ = assemble(ws);
  const double tol = s.tolerances.value("solver", 1e-10);

  const AnalyticFunction f = fn_from(need(jp, "f", "problem"), s.domain.dim());
  const GridFunction f_nodal = GridFunction::sample(mesh, f.value);
  Eigen::VectorXd f_load;
  const bool mollify = jp.value("mollify", true);
  const double alpha = jp.value("mollify_alpha", 2.0);
  std::unique_ptr<TwoPointKernel> ka;
  std::unique_ptr<Workspace> wsa;
  if (mollify) {
    ka = std::make_unique<TwoPointKernel>(s.profile, eta, alpha);
    wsa = std::make_unique<Workspace>(make_workspace(mesh, *ka, false));
    const Eigen::VectorXd phia = phi_vector(*wsa);
    RoughData rough;
    rough.f0 = f_nodal;
    rough.f1 = VectorGridFunction(mesh);
    f_load = load_hminus1_mollified(*wsa, rough, phia, grad_phi_vector(*wsa));
  } else {
    f_load = load_l2(f_nodal);
  }

  Solution sol;
  if (bc == "dirichlet") {
    const AnalyticFunction g = fn_from(jp.value("g", json{{"name", "zero"}}), s.domain.dim());
    const std::string method = jp.value("method", std::string("cg"));
    if (method == "fixed_point")
      sol = solve_fixed_point(ws, GridFunction(mesh, f_load.cwiseQuotient(mesh.weights.cwiseMax(1e-300))),
                              g.value, s.tolerances.value("fixed_point", 1e-9),
                              jp.value("max_iter", 200000));
    else
      sol = solve_dirichlet(asm_, ws, f_load, g.value, tol);
  } else if (bc == "neumann") {
    const AnalyticFunction g = fn_from(jp.value("g", json{{"name", "zero"}}), s.domain.dim());
    Eigen::VectorXd g_load = neumann_boundary_load(mesh, g.value);
    const double defect = f_load.sum() + g_load.sum();
    for (int i = 0; i < mesh.n_nodes(); ++i)
      f_load[i] -= defect * mesh.weights[i] / mesh.domain.volume();
    sol = solve_neumann(asm_, ws, f_load, g_load, tol, 50000,
                        s.tolerances.value("tol_compat", 1e-8));
  } else {
    fail_validation("problem.bc must be dirichlet or neumann", json{{"bc", bc}});
  }
  write_file(out / "solution.csv", sol.to_csv());
  write_json(out / "solution.json", sol.metadata());
  return 0;
}

int cmd_study(const Setup& s, const json& cfg, const fs::path& out) {
  if (s.deltas.size() < 3)
    fail_validation("studies require at least 3 deltas", json{{"count", s.deltas.size()}});
  const json& js = cfg.value("study", json{{"kind", "convergence"}});
  const std::string kind = js.value("kind", std::string("convergence"));
  StudyReport rep;
  if (kind == "convergence") {
    const json& jp = need(cfg, "problem", "study");
    ConvergenceConfig cc;
    cc.domain = s.domain;
    cc.profile = s.profile;
    cc.kappa0 = s.kappa0;
    cc.bc = need(jp, "bc", "problem").get<std::string>();
    cc.u_star = fn_from(need(jp, "u_star", "problem"), s.domain.dim());
    cc.f = fn_from(need(jp, "f", "problem"), s.domain.dim());
    cc.policy = s.policy;
    cc.mollify = jp.value("mollify", true);
    cc.mollify_alpha = jp.value("mollify_alpha", 2.0);
    cc.solver_tol = s.tolerances.value("solver", 1e-10);
    rep = convergence_study(cc, s.deltas);
  } else if (kind == "localization") {
    const AnalyticFunction u = fn_from(need(js, "u", "study"), s.domain.dim());
    const AnalyticFunction v = fn_from(js.value("v", json{{"name", "bump"}}), s.domain.dim());
    rep = localization_study(s.domain, s.profile, s.kappa0, s.mode, u, v, s.deltas, s.policy);
  } else if (kind == "linear_demo") {
    const AnalyticFunction u = fn_from(js.value("u", json{{"name", "sin_pi"}}), s.domain.dim());
    const AnalyticFunction v = fn_from(js.value("v", json{{"name", "affine"}}), s.domain.dim());
    rep = linear_localization_demo(s.domain, s.profile, s.kappa0, u, v, s.deltas, s.policy);
  } else {
    fail_validation("unknown study kind", json{{"kind", kind}});
  }
  write_file(out / "study.csv", rep.to_csv());
  write_json(out / "study.json", rep.to_json());
  return 0;
}

int cmd_greens(const Setup& s, const json& cfg, const fs::path& out) {
  const json& jg = cfg.value("greens", json::object());
  const double delta = jg.value("delta", s.deltas.front());
  const int levels = jg.value("levels", 3);
  const AnalyticFunction u = fn_from(jg.value("u", json{{"name", "sin_pi"}}), s.domain.dim());
  const AnalyticFunction v = fn_from(jg.value("v", json{{"name", "cos_pi"}}), s.domain.dim());

  std::string csv = "level,h_max,h_min,residual,boundary_scale,bilinear,operator,boundary\n";
  json jrows = json::array();
  const auto eta = LocalizationField::build(s.domain, delta, s.kappa0, s.mode);
  const TwoPointKernel k2(s.profile, eta, 2.0);
  for (int lvl = 0; lvl < levels; ++lvl) {
    const double f = std::pow(0.5, lvl);
    const double h_max = s.policy.h_max(delta) * f;
    const double h_min = s.policy.h_min(delta, s.kappa0) * f;
    const Mesh mesh = build_mesh(s.domain, h_max, h_min, s.policy.c_grade, eta);
    const GreensResult gr = greens_residual(k2, mesh, u, v);
    csv += std::to_string(lvl) + "," + fmt17(h_max) + "," + fmt17(h_min) + "," +
           fmt17(gr.residual) + "," + fmt17(gr.boundary_scale) + "," + fmt17(gr.bilinear) +
           "," + fmt17(gr.operator_term) + "," + fmt17(gr.boundary_term) + "\n";
    jrows.push_back(json{{"level", lvl},
                         {"h_max", h_max},
                         {"h_min", h_min},
                         {"residual", gr.residual},
                         {"boundary_scale", gr.boundary_scale}});
  }
  write_file(out / "greens.csv", csv);
  write_json(out / "greens.json", json{{"delta", delta}, {"rows", jrows}});
  return 0;
}

int cmd_constants(const Setup& s, const json& cfg, const fs::path& out) {
  (void)cfg;
  const double delta = s.deltas.front();
  const auto eta = LocalizationField::build(s.domain, delta, s.kappa0, s.mode);
  const Mesh mesh = build_mesh(s.domain, s.policy.h_max(delta),
                               s.policy.h_min(delta, s.kappa0), s.policy.c_grade, eta);
  const TwoPointKernel k2(s.profile, eta, 2.0);
  const Workspace ws = make_workspace(mesh, k2);
  const Eigen::VectorXd phi2 = phi_vector(ws);
  double mu_lo = std::numeric_limits<double>::infinity(), mu_hi = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    if (!ws.trusted[i]) continue;
    const double v = std::pow(ws.eta[i], 2.0) * phi2[i];
    mu_lo = std::min(mu_lo, v);
    mu_hi = std::max(mu_hi, v);
  }
  json j{{"rho_bar", s.profile.rho_bar()},
         {"rho_underbar_d", s.profile.rho_underbar_d()},
         {"C_rho", s.profile.linear_mode_constant()},
         {"mu_lower", mu_lo},
         {"mu_upper", mu_hi},
         {"kappa1", eta.kappa1()},
         {"kappa2", eta.kappa2()},
         {"kappa_bar0", eta.kappa_bar0()},
         {"delta0", eta.delta0()}};
  write_json(out / "constants.json", j);
  return 0;
}

void apply_override(json& cfg, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) fail_validation("--set expects key=value", json{{"arg", kv}});
  const std::string path = kv.substr(0, eq);
  const std::string raw = kv.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (...) {
    value = raw;  // plain string
  }
  json* node = &cfg;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    pos = dot + 1;
  }
}

}  // namespace

int run_command(const std::string& command, json config, const std::string& out_dir) {
  const fs::path out = out_dir.empty()
                           ? fs::path(config.value("output_dir", std::string("out")))
                           : fs::path(out_dir);
  const Setup s = parse_setup(config);
  if (command == "check") return cmd_check(s, config, out);
  if (command == "solve") return cmd_solve(s, config, out);
  if (command == "study") return cmd_study(s, config, out);
  if (command == "greens") return cmd_greens(s, config, out);
  if (command == "constants") return cmd_constants(s, config, out);
  fail_validation("unknown command", json{{"command", command}});
}

int run(const std::vector<std::string>& args) {
  try {
    if (args.size() < 2)
      fail_validation(
          "usage: nlbvp <check|solve|study|greens|constants> <config.json> [--set k=v ...] "
          "[--out dir]");
    const std::string command = args[0];
    const std::string config_path = args[1];
    std::ifstream in(config_path);
    if (!in) fail_validation("cannot read config file", json{{"path", config_path}});
    json config;
    try {
      config = json::parse(in);
    } catch (const std::exception& e) {
      fail_validation(std::string("config is not valid JSON: ") + e.what());
    }
    std::string out_dir;
    for (std::size_t i = 2; i < args.size(); ++i) {
      if (args[i] == "--set" && i + 1 < args.size()) {
        apply_override(config, args[++i]);
      } else if (args[i] == "--out" && i + 1 < args.size()) {
        out_dir = args[++i];
      } else {
        fail_validation("unknown argument", json{{"arg", args[i]}});
      }
    }
    return run_command(command, std::move(config), out_dir);
  } catch (const Error& e) {
    std::cerr << e.to_json().dump() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"exit_code", 1}}.dump() << "\n";
    return 1;
  }
}

}  // namespace nlbvp::cli
