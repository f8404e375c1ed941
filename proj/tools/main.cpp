// Command-line front end: solve / sb-bench / qhd-demo / hydrogen / make-tables.

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "qhdalm/benchmarks.hpp"
#include "qhdalm/driver.hpp"
#include "qhdalm/hydrogen.hpp"
#include "qhdalm/problem_json.hpp"

namespace {

using namespace qhdalm;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 2;
constexpr int kExitInputError = 3;
constexpr int kExitInternalError = 4;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int status_to_exit(SolveStatus s) {
  return s == SolveStatus::Converged ? kExitOk : kExitNotConverged;
}

Sampler parse_sampler(const std::string& s) {
  if (s == "qhd-dense") return Sampler::QhdDense;
  if (s == "sb") return Sampler::Sb;
  if (s == "none") return Sampler::None;
  fail(ErrorCode::InvalidInput, "unknown sampler '" + s + "'");
}

// Solver options shared by the subcommands that run the pipeline.
struct SolverFlags {
  std::string config_path;
  std::string sampler = "sb";
  std::uint64_t seed = 0;
  int levels = 0;
  int candidates = 0;
  double rho0 = 0, gamma = 0, rho_max = 0, eta = 0;
  double tol_feas = 0, tol_stat = 0;
  int max_outer = 0;
  double time_budget = 0;
  bool project_mu = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "solver config JSON file");
    cmd->add_option("--sampler", sampler, "qhd-dense | sb | none");
    cmd->add_option("--seed", seed, "master RNG seed");
    cmd->add_option("--levels", levels, "encoding levels per variable");
    cmd->add_option("--candidates", candidates, "refine starts per iteration");
    cmd->add_option("--rho0", rho0, "initial penalty");
    cmd->add_option("--gamma", gamma, "penalty growth factor");
    cmd->add_option("--rho-max", rho_max, "penalty cap");
    cmd->add_option("--eta", eta, "violation shrink factor gating growth");
    cmd->add_option("--tol-feas", tol_feas, "feasibility tolerance");
    cmd->add_option("--tol-stat", tol_stat, "stationarity tolerance");
    cmd->add_option("--max-outer", max_outer, "outer iteration cap");
    cmd->add_option("--time-budget", time_budget, "wall-clock budget in seconds");
    cmd->add_flag("--project-mu", project_mu,
                  "clip inequality multipliers at zero after each update");
  }

  SolverConfig build() const {
    SolverConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) fail(ErrorCode::Io, "cannot open config file: " + config_path);
      json doc = json::parse(in, nullptr, false);
      if (doc.is_discarded()) fail(ErrorCode::Io, "malformed config JSON");
      if (doc.contains("sampler")) cfg.sampler = parse_sampler(doc["sampler"]);
      cfg.levels = doc.value("levels", cfg.levels);
      cfg.candidates = doc.value("candidates", cfg.candidates);
      cfg.sampler_candidates = doc.value("sampler_candidates", cfg.sampler_candidates);
      cfg.qhd_grid_points = doc.value("qhd_grid_points", cfg.qhd_grid_points);
      cfg.qhd_samples = doc.value("qhd_samples", cfg.qhd_samples);
      cfg.seed = doc.value("seed", cfg.seed);
      cfg.alm.rho0 = doc.value("rho0", cfg.alm.rho0);
      cfg.alm.gamma = doc.value("gamma", cfg.alm.gamma);
      cfg.alm.rho_max = doc.value("rho_max", cfg.alm.rho_max);
      cfg.alm.eta = doc.value("eta", cfg.alm.eta);
      cfg.alm.tol_feas = doc.value("tol_feas", cfg.alm.tol_feas);
      cfg.alm.tol_stat = doc.value("tol_stat", cfg.alm.tol_stat);
      cfg.alm.tol_obj = doc.value("tol_obj", cfg.alm.tol_obj);
      cfg.alm.max_outer = doc.value("max_outer", cfg.alm.max_outer);
      cfg.alm.project_mu = doc.value("project_mu", cfg.alm.project_mu);
      if (doc.contains("qhd_schedule")) {
        const auto& s = doc["qhd_schedule"];
        cfg.qhd_schedule.kinetic_rate =
            s.value("kinetic_rate", cfg.qhd_schedule.kinetic_rate);
        cfg.qhd_schedule.potential_rate =
            s.value("potential_rate", cfg.qhd_schedule.potential_rate);
        cfg.qhd_schedule.total_time = s.value("total_time", cfg.qhd_schedule.total_time);
        cfg.qhd_schedule.dt = s.value("dt", cfg.qhd_schedule.dt);
      }
      if (doc.contains("sb")) {
        const auto& s = doc["sb"];
        SbParams sb;
        sb.kerr = s.value("kerr", sb.kerr);
        sb.detuning = s.value("detuning", sb.detuning);
        sb.coupling = s.value("coupling", sb.coupling);
        sb.pump_start = s.value("pump_start", sb.pump_start);
        sb.pump_end = s.value("pump_end", sb.pump_end);
        sb.dt = s.value("dt", sb.dt);
        sb.steps = s.value("steps", sb.steps);
        sb.replicas = s.value("replicas", sb.replicas);
        sb.init_amplitude = s.value("init_amplitude", sb.init_amplitude);
        cfg.sb = sb;
      }
      cfg.time_budget_s = doc.value("time_budget_s", cfg.time_budget_s);
    }
    cfg.sampler = parse_sampler(sampler);
    if (seed != 0 || config_path.empty()) cfg.seed = seed;
    if (levels > 0) cfg.levels = levels;
    if (candidates > 0) cfg.candidates = candidates;
    if (rho0 > 0) cfg.alm.rho0 = rho0;
    if (gamma > 0) cfg.alm.gamma = gamma;
    if (rho_max > 0) cfg.alm.rho_max = rho_max;
    if (eta > 0) cfg.alm.eta = eta;
    if (tol_feas > 0) cfg.alm.tol_feas = tol_feas;
    if (tol_stat > 0) {
      cfg.alm.tol_stat = tol_stat;
      cfg.refine.tol_stat = tol_stat;
    }
    if (max_outer > 0) cfg.alm.max_outer = max_outer;
    if (time_budget > 0) cfg.time_budget_s = time_budget;
    if (project_mu) cfg.alm.project_mu = true;
    return cfg;
  }
};

SolveReport dispatch_method(const NlpProblem& problem, const std::string& method,
                            int starts, const SolverConfig& cfg) {
  if (method == "qhd-alm") return solve(problem, cfg);
  if (method == "alm") return baseline_alm(problem, cfg);
  if (method == "multistart") return multistart_refine(problem, starts, cfg);
  fail(ErrorCode::InvalidInput, "unknown method '" + method + "'");
}

int cmd_solve(const std::string& problem_path, const std::string& method, int starts,
              const SolverFlags& flags, const std::string& out_path,
              bool no_metadata) {
  const NlpProblem problem = load_problem(problem_path);
  const auto diags = validate(problem);
  if (!diags.empty()) {
    for (const auto& d : diags)
      std::cerr << "error: " << d.field << ": " << d.message << "\n";
    return kExitInputError;
  }
  const SolveReport report = dispatch_method(problem, method, starts, flags.build());
  if (!out_path.empty()) save_report(out_path, report, !no_metadata);
  std::cout << "status: " << to_string(report.status)
            << "  objective: " << fmt(report.objective)
            << "  infeasibility: " << fmt(report.true_infeasibility) << "\n";
  return status_to_exit(report.status);
}

int cmd_sb_bench(const std::string& ising_path, SbParams flags, bool has_replicas,
                 bool has_steps, bool has_dt, bool has_coupling, bool has_pump,
                 const std::string& out_path, const std::string& trajectory_path) {
  const IsingModel ising = load_edge_list(ising_path);
  SbParams prm = auto_params(ising);
  prm.seed = flags.seed;
  if (has_replicas) prm.replicas = flags.replicas;
  if (has_steps) prm.steps = flags.steps;
  if (has_dt) prm.dt = flags.dt;
  if (has_coupling) prm.coupling = flags.coupling;
  if (has_pump) prm.pump_end = flags.pump_end;
  prm.record_trajectory = !trajectory_path.empty();

  const SbResult res = run(ising, prm);
  json j;
  j["format_version"] = 1;
  j["n_spins"] = ising.n;
  j["best_energy"] = res.best_energy;
  j["best_replica"] = res.best_replica;
  j["best_spins"] = res.best_spins;
  j["replica_energies"] = res.replica_energies;
  j["diverged_replicas"] = res.diverged_replicas;
  j["params"] = {{"kerr", prm.kerr},           {"detuning", prm.detuning},
                 {"coupling", prm.coupling},   {"pump_start", prm.pump_start},
                 {"pump_end", prm.pump_end},   {"dt", prm.dt},
                 {"steps", prm.steps},         {"replicas", prm.replicas},
                 {"seed", prm.seed},           {"init_amplitude", prm.init_amplitude}};
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) fail(ErrorCode::Io, "cannot write " + out_path);
    out << text;
    std::cout << "best_energy: " << fmt(res.best_energy) << "\n";
  }
  if (!trajectory_path.empty()) {
    std::ofstream tr(trajectory_path);
    if (!tr) fail(ErrorCode::Io, "cannot write " + trajectory_path);
    tr << "step";
    for (int i = 0; i < ising.n; ++i) tr << ",x" << i;
    tr << "\n";
    for (std::size_t s = 0; s < res.trajectory.size(); ++s) {
      tr << s * static_cast<std::size_t>(prm.trajectory_stride);
      for (const double v : res.trajectory[s]) tr << "," << fmt(v);
      tr << "\n";
    }
  }
  return kExitOk;
}

int cmd_qhd_demo(int grid_points, double total_time, double dt, double decades,
                 double target, int samples, std::uint64_t seed,
                 const std::string& observables_path,
                 const std::string& distribution_path) {
  const Grid grid = make_grid(grid_points, {{0.0, 1.0}});
  const ExprPtr f = pow(var(0) - target, 2);
  const auto pot = discretize_potential(f, grid);
  const QhdSchedule sched = default_schedule(total_time, dt, decades);

  std::vector<EvolveRecord> trace;
  const WaveState psi = evolve(uniform_state(grid), pot, grid, sched, &trace);

  if (!observables_path.empty()) {
    std::ofstream os(observables_path);
    if (!os) fail(ErrorCode::Io, "cannot write " + observables_path);
    os << "t,norm_sq,f_expectation,x_expectation\n";
    for (const auto& r : trace)
      os << fmt(r.t) << "," << fmt(r.norm_sq) << "," << fmt(r.f_expectation) << ","
         << fmt(r.x_expectation[0]) << "\n";
  }
  if (!distribution_path.empty()) {
    std::ofstream os(distribution_path);
    if (!os) fail(ErrorCode::Io, "cannot write " + distribution_path);
    os << "x,probability\n";
    for (std::size_t i = 0; i < psi.amp.size(); ++i)
      os << fmt(grid.coord(0, static_cast<int>(i))) << ","
         << fmt(std::norm(psi.amp[i])) << "\n";
  }

  double mass_near = 0;
  for (std::size_t i = 0; i < psi.amp.size(); ++i)
    if (std::abs(grid.coord(0, static_cast<int>(i)) - target) <= 0.1)
      mass_near += std::norm(psi.amp[i]);
  std::cout << "final norm_sq: " << fmt(psi.norm_sq())
            << "  mass within 0.1 of target: " << fmt(mass_near) << "\n";

  const auto pts = sample(psi, grid, samples, seed);
  double best = pts.empty() ? target : pts[0][0];
  for (const auto& pt : pts)
    if (std::abs(pt[0] - target) < std::abs(best - target)) best = pt[0];
  std::cout << "best of " << samples << " samples: " << fmt(best) << "\n";
  return kExitOk;
}

int cmd_hydrogen(const std::string& params_path, int horizon,
                 const std::string& method, int starts, const SolverFlags& flags,
                 const std::string& out_path, const std::string& schedule_path,
                 bool no_metadata) {
  HydrogenParams prm =
      params_path.empty() ? default_hydrogen_params() : load_params(params_path);
  if (horizon > 0 && horizon != prm.horizon) prm = with_horizon(prm, horizon);
  const NlpProblem problem = build(prm);
  const SolveReport report = dispatch_method(problem, method, starts, flags.build());
  if (!out_path.empty()) save_report(out_path, report, !no_metadata);
  const HydrogenSolution sol = extract_solution(prm, report.solution, report.slacks);
  if (!schedule_path.empty()) {
    std::ofstream os(schedule_path);
    if (!os) fail(ErrorCode::Io, "cannot write " + schedule_path);
    write_schedule_csv(os, sol);
  }
  std::cout << "status: " << to_string(report.status)
            << "  cost: " << fmt(report.objective) << "  profit: " << fmt(sol.profit)
            << "  infeasibility: " << fmt(report.true_infeasibility) << "\n";
  return status_to_exit(report.status);
}

int cmd_make_tables(const std::string& suite, const std::string& out_path,
                    std::uint64_t seed, int seeds) {
  if (suite != "small")
    fail(ErrorCode::InvalidInput, "unknown suite '" + suite + "' (try: small)");
  const NlpProblem problem = styblinski_tang_circle();

  std::ostringstream csv;
  csv << "seed,qhd_alm_objective,qhd_alm_infeasibility,alm_objective,"
         "alm_infeasibility\n";
  std::vector<double> qhd_obj, alm_obj;
  for (int s = 0; s < seeds; ++s) {
    SolverConfig cfg;
    cfg.seed = seed + static_cast<std::uint64_t>(s);
    const SolveReport a = solve(problem, cfg);
    const SolveReport b = baseline_alm(problem, cfg);
    qhd_obj.push_back(a.objective);
    alm_obj.push_back(b.objective);
    csv << s << "," << fmt(a.objective) << "," << fmt(a.true_infeasibility) << ","
        << fmt(b.objective) << "," << fmt(b.true_infeasibility) << "\n";
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path);
    if (!out) fail(ErrorCode::Io, "cannot write " + out_path);
    out << csv.str();
  }
  std::cout << "median qhd-alm objective: " << fmt(median(qhd_obj))
            << "\nmedian alm objective:     " << fmt(median(alm_obj)) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QHD-ALM constrained nonlinear optimizer"};
  app.require_subcommand(1);

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "solve a problem JSON file");
  std::string problem_path, method = "qhd-alm", out_path;
  int starts = 100;
  bool no_metadata = false;
  SolverFlags flags;
  solve_cmd->add_option("--problem", problem_path, "problem JSON file")->required();
  solve_cmd->add_option("--method", method, "qhd-alm | alm | multistart");
  solve_cmd->add_option("--starts", starts, "multistart count");
  solve_cmd->add_option("--out", out_path, "report JSON output path");
  solve_cmd->add_flag("--no-metadata", no_metadata, "omit timing metadata");
  flags.attach(solve_cmd);

  // sb-bench
  auto* sb_cmd = app.add_subcommand("sb-bench", "run SB on an Ising edge list");
  std::string ising_path, sb_out, trajectory_path;
  SbParams sb_flags;
  sb_cmd->add_option("--ising", ising_path, "edge-list file")->required();
  auto* opt_replicas = sb_cmd->add_option("--replicas", sb_flags.replicas);
  auto* opt_steps = sb_cmd->add_option("--steps", sb_flags.steps);
  auto* opt_dt = sb_cmd->add_option("--dt", sb_flags.dt);
  auto* opt_coupling = sb_cmd->add_option("--coupling", sb_flags.coupling);
  auto* opt_pump = sb_cmd->add_option("--pump-end", sb_flags.pump_end);
  sb_cmd->add_option("--seed", sb_flags.seed);
  sb_cmd->add_option("--out", sb_out, "result JSON path (stdout otherwise)");
  sb_cmd->add_option("--trajectory", trajectory_path, "CSV of position snapshots");

  // qhd-demo
  auto* demo_cmd = app.add_subcommand("qhd-demo", "dense simulator demo");
  int grid_points = 64, demo_samples = 64;
  double total_time = 10.0, demo_dt = 1e-3, decades = 2.0, target = 0.7;
  std::uint64_t demo_seed = 0;
  std::string observables_path, distribution_path;
  demo_cmd->add_option("--grid-points", grid_points);
  demo_cmd->add_option("--total-time", total_time);
  demo_cmd->add_option("--dt", demo_dt);
  demo_cmd->add_option("--decades", decades, "energy-ratio sweep decades");
  demo_cmd->add_option("--target", target, "minimum of the demo objective");
  demo_cmd->add_option("--samples", demo_samples);
  demo_cmd->add_option("--seed", demo_seed);
  demo_cmd->add_option("--observables", observables_path, "per-step CSV");
  demo_cmd->add_option("--distribution", distribution_path, "final |psi|^2 CSV");

  // hydrogen
  auto* hy_cmd = app.add_subcommand("hydrogen", "power-to-hydrogen scheduling");
  std::string params_path, hy_method = "qhd-alm", hy_out, schedule_path;
  int horizon = 0, hy_starts = 100;
  bool hy_no_metadata = false;
  SolverFlags hy_flags;
  hy_cmd->add_option("--params", params_path, "parameter JSON (built-in default otherwise)");
  hy_cmd->add_option("--horizon", horizon, "override the horizon (tiles data)");
  hy_cmd->add_option("--method", hy_method, "qhd-alm | alm | multistart");
  hy_cmd->add_option("--starts", hy_starts, "multistart count");
  hy_cmd->add_option("--out", hy_out, "report JSON output path");
  hy_cmd->add_option("--schedule-csv", schedule_path, "per-slot schedule CSV");
  hy_cmd->add_flag("--no-metadata", hy_no_metadata, "omit timing metadata");
  hy_flags.attach(hy_cmd);

  // make-tables
  auto* tables_cmd = app.add_subcommand("make-tables", "benchmark comparison tables");
  std::string suite = "small", tables_out;
  std::uint64_t tables_seed = 0;
  int table_seeds = 20;
  tables_cmd->add_option("--suite", suite, "benchmark suite name");
  tables_cmd->add_option("--out", tables_out, "CSV output path (stdout otherwise)");
  tables_cmd->add_option("--seed", tables_seed, "base seed");
  tables_cmd->add_option("--seeds", table_seeds, "number of seeds");

  // emit-params (utility: write the built-in hydrogen defaults)
  auto* emit_cmd = app.add_subcommand("emit-params", "write built-in hydrogen defaults");
  std::string emit_path;
  emit_cmd->add_option("--out", emit_path, "output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (solve_cmd->parsed())
      return cmd_solve(problem_path, method, starts, flags, out_path, no_metadata);
    if (sb_cmd->parsed())
      return cmd_sb_bench(ising_path, sb_flags, opt_replicas->count() > 0,
                          opt_steps->count() > 0, opt_dt->count() > 0,
                          opt_coupling->count() > 0, opt_pump->count() > 0, sb_out,
                          trajectory_path);
    if (demo_cmd->parsed())
      return cmd_qhd_demo(grid_points, total_time, demo_dt, decades, target,
                          demo_samples, demo_seed, observables_path,
                          distribution_path);
    if (hy_cmd->parsed())
      return cmd_hydrogen(params_path, horizon, hy_method, hy_starts, hy_flags,
                          hy_out, schedule_path, hy_no_metadata);
    if (tables_cmd->parsed())
      return cmd_make_tables(suite, tables_out, tables_seed, table_seeds);
    if (emit_cmd->parsed()) {
      save_params(emit_path, default_hydrogen_params());
      std::cout << "wrote " << emit_path << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return (e.code() == ErrorCode::InvalidInput || e.code() == ErrorCode::Io)
               ? kExitInputError
               : kExitInternalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return kExitInputError;
}
