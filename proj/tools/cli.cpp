#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>

#include "chwfr/camassa_holm.hpp"
#include "chwfr/cone_geometry.hpp"
#include "chwfr/euler_map.hpp"
#include "chwfr/io.hpp"
#include "chwfr/spectral.hpp"
#include "chwfr/submersion.hpp"
#include "chwfr/wfr_dynamic.hpp"

namespace chwfr::cli {
namespace {

using io::Json;

struct Failure {
  int code;
  Json error;
};

std::string output_path(const std::string& path) {
  const char* dir = std::getenv("CHWFR_OUTPUT_DIR");
  if (!dir || !*dir || std::filesystem::path(path).is_absolute()) return path;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / path).string();
}

Json params_json(const ConeParams& p) { return Json{{"a", p.a}, {"b", p.b}}; }

Json invariants_json(const CHInvariants& inv) {
  return Json{{"momentum_mean", inv.momentum_mean}, {"energy", inv.energy}};
}

double relative_drift(double a, double b) {
  return std::abs(b - a) / std::max(std::abs(a), 1e-300);
}

void positive(CLI::Option* opt) { opt->check(CLI::PositiveNumber); }

struct Common {
  double a = 1.0;
  double b = 0.5;
  ConeParams params() const {
    ConeParams p{a, b};
    p.validate();
    return p;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out) {
  CLI::App app{"Cone geometry, Camassa-Holm and Wasserstein-Fisher-Rao toolkit", "chwfr"};
  app.set_config("--config", "", "TOML/INI configuration file (flags take precedence)");
  app.require_subcommand(1);
  Common common;
  app.add_option("--a", common.a, "cone coefficient a")->capture_default_str();
  app.add_option("--b", common.b, "cone coefficient b")->capture_default_str();

  std::function<Json()> action;

  // cone -------------------------------------------------------------------
  auto* cone = app.add_subcommand("cone", "cone distance and geodesics");
  cone->require_subcommand(1);
  struct {
    double x1 = 0, m1 = 1, x2 = 0, m2 = 1;
  } cd;
  auto* cone_dist = cone->add_subcommand("dist", "distance between two cone points");
  cone_dist->add_option("--x1", cd.x1)->capture_default_str();
  cone_dist->add_option("--m1", cd.m1)->capture_default_str()->check(CLI::NonNegativeNumber);
  cone_dist->add_option("--x2", cd.x2)->capture_default_str();
  cone_dist->add_option("--m2", cd.m2)->capture_default_str()->check(CLI::NonNegativeNumber);
  cone_dist->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      return Json{{"command", "cone dist"},
                  {"params", params_json(p)},
                  {"distance", cone_distance({cd.x1, cd.m1}, {cd.x2, cd.m2}, p)}};
    };
  });

  struct {
    double x = 0, m = 1, dx = 0, dm = 0, t_final = 1, dt = 1e-3;
    std::string out;
  } cg;
  auto* cone_geo = cone->add_subcommand("geodesic", "integrate a cone geodesic");
  cone_geo->add_option("--x", cg.x)->capture_default_str();
  positive(cone_geo->add_option("--m", cg.m)->capture_default_str());
  cone_geo->add_option("--dx", cg.dx)->capture_default_str();
  cone_geo->add_option("--dm", cg.dm)->capture_default_str();
  positive(cone_geo->add_option("--t-final", cg.t_final)->capture_default_str());
  positive(cone_geo->add_option("--dt", cg.dt)->capture_default_str());
  cone_geo->add_option("--out", cg.out, "CSV t,x,m");
  cone_geo->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      const ConeTangent v0{{cg.x, cg.m}, cg.dx, cg.dm};
      const auto samples = cone_geodesic(v0, cg.t_final, cg.dt, p);
      const GeodesicSample& end = samples.back();
      const GeodesicSample exact = cone_geodesic_exact(v0, end.t, p);
      Json j{{"command", "cone geodesic"},
             {"params", params_json(p)},
             {"t_final", end.t},
             {"endpoint", {{"x", end.point().x}, {"m", end.m}}},
             {"closed_form_endpoint", {{"x", exact.point().x}, {"m", exact.m}}},
             {"length", cone_speed(v0, p) * end.t},
             {"endpoint_distance", cone_distance(v0.base, end.point(), p)},
             {"closed_form_error", cone_distance(end.point(), exact.point(), p)}};
      if (!cg.out.empty()) {
        const std::string path = output_path(cg.out);
        std::ofstream f(path);
        if (!f) throw InvalidInput("cannot open '" + path + "' for writing");
        f << "t,x,m\n";
        for (const auto& s : samples)
          f << io::format_double(s.t) << ',' << io::format_double(s.point().x) << ','
            << io::format_double(s.m) << '\n';
        j["output"] = path;
      }
      return j;
    };
  });

  // ch ---------------------------------------------------------------------
  auto* ch = app.add_subcommand("ch", "Camassa-Holm solver");
  ch->require_subcommand(1);
  struct {
    std::string init = "sin:0.2", out, flow_out;
    int n = 256, output_every = 1;
    double t_final = 1.0, dt = 1e-3;
  } cs;
  auto* ch_solve_cmd = ch->add_subcommand("solve", "solve from an initial condition");
  ch_solve_cmd->add_option("--init", cs.init, "const:c | sin:amp | bump:c,w,m | file:path")
      ->capture_default_str();
  positive(ch_solve_cmd->add_option("--n", cs.n)->capture_default_str());
  positive(ch_solve_cmd->add_option("--t-final", cs.t_final)->capture_default_str());
  positive(ch_solve_cmd->add_option("--dt", cs.dt)->capture_default_str());
  positive(ch_solve_cmd->add_option("--output-every", cs.output_every)->capture_default_str());
  ch_solve_cmd->add_option("--out", cs.out, "trajectory CSV t,x,u");
  ch_solve_cmd->add_option("--flow-out", cs.flow_out, "flow CSV t,x,phi,lam");
  ch_solve_cmd->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      const Field u0 = io::parse_init(cs.init, cs.n);
      CHOptions opts;
      opts.output_every = cs.output_every;
      const CHTrajectory traj = ch_solve(u0, cs.t_final, cs.dt, p, opts);
      const CHInvariants i0 = ch_invariants(traj.state(0), p);
      const CHInvariants i1 = ch_invariants(traj.state(traj.size() - 1), p);
      Json j{{"command", "ch solve"},
             {"params", params_json(p)},
             {"n", cs.n},
             {"dt", cs.dt},
             {"t_final", traj.times.back()},
             {"samples", traj.size()},
             {"initial", invariants_json(i0)},
             {"final", invariants_json(i1)},
             {"energy_drift", relative_drift(i0.energy, i1.energy)},
             {"momentum_drift", std::abs(i1.momentum_mean - i0.momentum_mean)},
             {"max_abs_u", max_abs(traj.u.back())}};
      if (!cs.out.empty()) {
        j["output"] = output_path(cs.out);
        io::write_trajectory_csv(j["output"].get<std::string>(), traj);
      }
      if (!cs.flow_out.empty()) {
        const FlowPath flow = flow_map(traj);
        j["flow_output"] = output_path(cs.flow_out);
        io::write_flow_csv(j["flow_output"].get<std::string>(), flow);
      }
      return j;
    };
  });

  struct {
    std::string init = "sin:0.2";
    int n = 256;
  } ci;
  auto* ch_inv = ch->add_subcommand("invariants", "energy and momentum of a state");
  ch_inv->add_option("--init", ci.init)->capture_default_str();
  positive(ch_inv->add_option("--n", ci.n)->capture_default_str());
  ch_inv->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      const Field u = io::parse_init(ci.init, ci.n);
      Json j{{"command", "ch invariants"}, {"params", params_json(p)}, {"n", ci.n}};
      j.update(invariants_json(ch_invariants({u, 0.0}, p)));
      return j;
    };
  });

  // euler ------------------------------------------------------------------
  auto* euler = app.add_subcommand("euler", "CH-to-Euler checks");
  euler->require_subcommand(1);
  struct {
    std::string traj, init = "sin:0.2";
    int n = 256;
    double t_final = 1.0, dt = 1e-3;
    std::vector<double> radii{0.5, 1.0, 2.0};
  } ec;
  auto* euler_check = euler->add_subcommand("check", "weighted divergence and momentum residuals");
  euler_check->add_option("--traj", ec.traj, "trajectory CSV t,x,u (otherwise solve from --init)");
  euler_check->add_option("--init", ec.init)->capture_default_str();
  positive(euler_check->add_option("--n", ec.n)->capture_default_str());
  positive(euler_check->add_option("--t-final", ec.t_final)->capture_default_str());
  positive(euler_check->add_option("--dt", ec.dt)->capture_default_str());
  euler_check->add_option("--radii", ec.radii)->delimiter(',')->capture_default_str();
  euler_check->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      const CHTrajectory traj = ec.traj.empty()
                                    ? ch_solve(io::parse_init(ec.init, ec.n), ec.t_final, ec.dt, p)
                                    : io::read_trajectory_csv(ec.traj, p);
      const AnnulusGrid grid(PeriodicGrid(traj.n), ec.radii);
      const EulerReport rep = euler_residual(traj, grid);
      const FlowPath flow = flow_map(traj, {Interpolation::Trigonometric});
      const MeasureReport meas = lagrangian_measure_check(flow);
      const GeodesicFormsReport forms = geodesic_forms_consistency(traj, flow);
      return Json{{"command", "euler check"},
                  {"params", params_json(p)},
                  {"samples", rep.samples},
                  {"max_div", rep.max_div},
                  {"max_momentum_residual", rep.max_momentum_residual},
                  {"max_radial_residual", rep.max_radial_residual},
                  {"max_angular_residual", rep.max_angular_residual},
                  {"per_radius", rep.per_radius},
                  {"jac_det_residual", meas.jac_det_residual},
                  {"measure_residual", meas.measure_residual},
                  {"lebesgue_measure_residual", meas.lebesgue_residual},
                  {"lagrangian_eulerian_difference", forms.max_difference}};
    };
  });

  // wfr --------------------------------------------------------------------
  auto* wfr = app.add_subcommand("wfr", "Wasserstein-Fisher-Rao distance");
  wfr->require_subcommand(1);
  struct {
    std::string rho0 = "const:1", rho1 = "const:1", out;
    int n = 64;
    WFROptions opts;
    std::string algorithm = "primal-dual";
    bool fixed_steps = false;
  } ws;
  auto* wfr_solve_cmd = wfr->add_subcommand("solve", "dynamic WFR / Benamou-Brenier solve");
  wfr_solve_cmd->add_option("--rho0", ws.rho0)->capture_default_str();
  wfr_solve_cmd->add_option("--rho1", ws.rho1)->capture_default_str();
  positive(wfr_solve_cmd->add_option("--n", ws.n, "space nodes")->capture_default_str());
  positive(wfr_solve_cmd->add_option("--nt", ws.opts.nt)->capture_default_str());
  positive(wfr_solve_cmd->add_option("--max-iters", ws.opts.max_iters)->capture_default_str());
  positive(wfr_solve_cmd->add_option("--tol", ws.opts.tol)->capture_default_str());
  wfr_solve_cmd->add_flag("--balanced", ws.opts.balanced, "drop the source term");
  wfr_solve_cmd->add_flag("--fixed-steps", ws.fixed_steps, "no primal-dual step adaptation");
  wfr_solve_cmd->add_option("--algorithm", ws.algorithm)
      ->check(CLI::IsMember({"primal-dual", "douglas-rachford"}))
      ->capture_default_str();
  wfr_solve_cmd->add_option("--out", ws.out, "cell-centred CSV t,x,rho,m,mu");
  wfr_solve_cmd->callback([&] {
    action = [&]() -> Json {
      const ConeParams p = common.params();
      const Field r0 = io::parse_init(ws.rho0, ws.n), r1 = io::parse_init(ws.rho1, ws.n);
      ws.opts.algorithm = ws.algorithm == "primal-dual" ? WFRAlgorithm::PrimalDual
                                                        : WFRAlgorithm::DouglasRachford;
      ws.opts.adaptive = !ws.fixed_steps;
      const WFRResult r = solve_wfr(r0, r1, p, ws.opts);
      Json diag{{"iterations", r.iterations},
                {"primal_residual", r.primal_residual},
                {"constraint_residual", r.constraint_residual}};
      if (!r.converged) {
        Json err{{"kind", "non_convergence"},
                 {"message", "wfr solve: no convergence within max_iters"},
                 {"distance", r.distance}};
        err.update(diag);
        throw Failure{2, err};
      }
      Json j{{"command", "wfr solve"}, {"distance", r.distance}, {"action", r.action}};
      j.update(diag);
      j["params"] = params_json(p);
      j["nt"] = ws.opts.nt;
      j["nx"] = ws.n;
      j["balanced"] = ws.opts.balanced;
      j["tol"] = ws.opts.tol;
      j["hellinger"] = hellinger_distance(r0, r1, p);
      if (!ws.out.empty()) {
        j["output"] = output_path(ws.out);
        io::write_wfr_csv(j["output"].get<std::string>(), r.variables);
      }
      return j;
    };
  });

  struct {
    std::string rho0 = "const:1", rho1 = "const:1";
    int n = 64;
  } wh;
  auto* wfr_hell = wfr->add_subcommand("hellinger", "zero-transport upper bound");
  wfr_hell->add_option("--rho0", wh.rho0)->capture_default_str();
  wfr_hell->add_option("--rho1", wh.rho1)->capture_default_str();
  positive(wfr_hell->add_option("--n", wh.n)->capture_default_str());
  wfr_hell->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      return Json{{"command", "wfr hellinger"},
                  {"params", params_json(p)},
                  {"distance", hellinger_distance(io::parse_init(wh.rho0, wh.n),
                                                  io::parse_init(wh.rho1, wh.n), p)}};
    };
  });

  // flow -------------------------------------------------------------------
  auto* flow = app.add_subcommand("flow", "geodesic shooting on densities");
  flow->require_subcommand(1);
  struct {
    std::string rho0 = "const:1", phi0 = "sin:0.2", out;
    int n = 64;
    double t_final = 1.0, dt = 1e-3;
  } fh;
  auto* flow_h = flow->add_subcommand("horizontal", "horizontal geodesic from a lift potential");
  flow_h->add_option("--rho0", fh.rho0)->capture_default_str();
  flow_h->add_option("--phi0", fh.phi0, "lift potential Phi0")->capture_default_str();
  positive(flow_h->add_option("--n", fh.n)->capture_default_str());
  positive(flow_h->add_option("--t-final", fh.t_final)->capture_default_str());
  positive(flow_h->add_option("--dt", fh.dt)->capture_default_str());
  flow_h->add_option("--out", fh.out, "density CSV of rho(t_final)");
  flow_h->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      if (p.a != 1.0 || p.b != 0.5) throw InvalidInput("flow horizontal requires a = 1, b = 1/2");
      HorizontalFlowOptions opts;
      opts.output_every = std::max(1, static_cast<int>(std::lround(0.1 / fh.dt)));
      const HorizontalFlow hf = horizontal_flow(io::parse_init(fh.rho0, fh.n),
                                                io::parse_init(fh.phi0, fh.n), fh.t_final, fh.dt, opts);
      Json j{{"command", "flow horizontal"},
             {"params", params_json(p)},
             {"convention", convention_name(PotentialConvention::Lift)},
             {"t_final", hf.times.back()},
             {"action", hf.action},
             {"max_defect", hf.max_defect},
             {"max_gradient_defect", hf.max_gradient_defect},
             {"initial_mass", density_mass(hf.rho.front())},
             {"final_mass", density_mass(hf.rho.back())}};
      if (!fh.out.empty()) {
        j["output"] = output_path(fh.out);
        io::write_density_csv(j["output"].get<std::string>(), hf.rho.back());
      }
      return j;
    };
  });

  // lift -------------------------------------------------------------------
  struct {
    std::string rho = "const:1", x = "sin:1", out;
    int n = 64;
  } lf;
  auto* lift = app.add_subcommand("lift", "horizontal lift of a density variation");
  lift->add_option("--rho", lf.rho)->capture_default_str();
  lift->add_option("--x", lf.x, "density variation X")->capture_default_str();
  positive(lift->add_option("--n", lf.n)->capture_default_str());
  lift->add_option("--out", lf.out, "CSV x,value of the potential");
  lift->callback([&] {
    action = [&] {
      const DensityField rho = io::parse_init(lf.rho, lf.n);
      const LiftResult r = horizontal_lift(rho, io::parse_init(lf.x, lf.n));
      Json j{{"command", "lift"},
             {"convention", convention_name(PotentialConvention::Lift)},
             {"residual", r.residual},
             {"norm2", rho_inner(r.pair, r.pair, rho)},
             {"max_abs_Phi", max_abs(r.Phi)}};
      if (!lf.out.empty()) {
        j["output"] = output_path(lf.out);
        io::write_density_csv(j["output"].get<std::string>(), r.Phi);
      }
      return j;
    };
  });

  // curvature --------------------------------------------------------------
  struct {
    std::string v1 = "sin:1", v2 = "const:1", rho = "const:1";
    int n = 128;
  } cv;
  auto* curv = app.add_subcommand("curvature", "Gauss-Codazzi and O'Neill curvature");
  curv->add_option("--v1", cv.v1, "vector field v1; the pair is (v1, v1'/2)")->capture_default_str();
  curv->add_option("--v2", cv.v2, "vector field v2")->capture_default_str();
  curv->add_option("--rho", cv.rho, "base density for O'Neill")->capture_default_str();
  positive(curv->add_option("--n", cv.n)->capture_default_str());
  curv->callback([&] {
    action = [&] {
      auto pair = [&](const std::string& spec) {
        Field v = io::parse_init(spec, cv.n);
        Field dv = spectral::derivative(v);
        for (double& d : dv) d *= 0.5;
        return VelocityPair{std::move(v), std::move(dv)};
      };
      const VelocityPair x1 = pair(cv.v1), x2 = pair(cv.v2);
      const GaussCodazziResult gc = gauss_codazzi_sectional(x1, x2);
      const SecondFundamentalForm ii = second_fundamental_form(x1, x2);
      const DensityField rho = io::parse_init(cv.rho, cv.n);
      const OneillResult on = oneill_curvature(vertical_horizontal_split(x1, rho).horizontal,
                                               vertical_horizontal_split(x2, rho).horizontal, rho);
      return Json{{"command", "curvature"},
                  {"gauss_codazzi", {{"curvature_form", gc.curvature_form},
                                     {"plane_area", gc.plane_area},
                                     {"sectional", gc.sectional}}},
                  {"second_fundamental_form", {{"raw_asymmetry", ii.raw_asymmetry},
                                               {"tangency_defect", ii.tangency_defect},
                                               {"max_abs_p", max_abs(ii.p)}}},
                  {"oneill", {{"curvature", on.curvature},
                              {"bracket_vertical_norm2", on.bracket_vertical_norm2},
                              {"formal", on.formal}}}};
    };
  });

  // minimality -------------------------------------------------------------
  struct {
    std::string init = "sin:0.2";
    int n = 128;
    double t_final = 0.5, dt = 1e-3;
    std::uint64_t seed = 0;
    PerturbationFamily family;
  } mn;
  auto* mini = app.add_subcommand("minimality", "short-time minimality harness");
  mini->add_option("--init", mn.init)->capture_default_str();
  positive(mini->add_option("--n", mn.n)->capture_default_str());
  positive(mini->add_option("--t-final", mn.t_final)->capture_default_str());
  positive(mini->add_option("--dt", mn.dt)->capture_default_str());
  mini->add_option("--seed", mn.seed, "perturbation seed")->required();
  positive(mini->add_option("--count", mn.family.count)->capture_default_str());
  mini->add_option("--amplitudes", mn.family.amplitudes)->delimiter(',')->capture_default_str();
  mini->callback([&] {
    action = [&] {
      const ConeParams p = common.params();
      if (p.a != 1.0 || p.b != 0.5) throw InvalidInput("minimality requires a = 1, b = 1/2");
      mn.family.seed = mn.seed;
      const CHTrajectory traj = ch_solve(io::parse_init(mn.init, mn.n), mn.t_final, mn.dt, p);
      const FlowPath path = flow_map(traj);
      const MinimalityReport rep = minimality_test(traj, path, mn.family);
      return Json{{"command", "minimality"},
                  {"seed", mn.seed},
                  {"geodesic_action", rep.geodesic_action},
                  {"min_competitor_action", rep.min_competitor_action},
                  {"min_relative_excess", rep.min_relative_excess},
                  {"hessian_bound", rep.hessian.C},
                  {"hessian_block", rep.hessian.block},
                  {"hessian_covariant", rep.hessian.covariant},
                  {"certified_window", rep.hessian.window},
                  {"time_window", rep.time_window},
                  {"window_violated", rep.window_violated},
                  {"competitors", rep.competitors},
                  {"violations", rep.violations}};
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    out << io::dump_json(Json{{"error", {{"kind", "invalid_input"}, {"message", e.what()}}}}) << '\n';
    return 1;
  }

  try {
    if (!action) throw InvalidInput("no command selected");
    out << io::dump_json(action()) << '\n';
    return 0;
  } catch (const Failure& f) {
    out << io::dump_json(Json{{"error", f.error}}) << '\n';
    return f.code;
  } catch (const InvalidInput& e) {
    out << io::dump_json(Json{{"error", {{"kind", "invalid_input"}, {"message", e.what()}}}}) << '\n';
    return 1;
  } catch (const SolverFailure& e) {
    out << io::dump_json(Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}) << '\n';
    return 2;
  }
}

}  // namespace chwfr::cli
