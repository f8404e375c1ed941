#include "qhdalm/driver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>

#include "qhdalm/util.hpp"

namespace qhdalm {

const char* to_string(Sampler s) {
  switch (s) {
    case Sampler::QhdDense: return "qhd-dense";
    case Sampler::Sb: return "sb";
    case Sampler::None: return "none";
  }
  return "?";
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iter";
    case SolveStatus::Stalled: return "stalled";
  }
  return "?";
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Trust-region box per variable: the original box shrunk geometrically
// around the incumbent, floored at trust_floor times the original width.
std::vector<std::pair<double, double>> trust_boxes(const NlpProblem& p,
                                                   const Point& center, int k,
                                                   const SolverConfig& cfg) {
  std::vector<std::pair<double, double>> out(p.num_vars());
  const double shrink =
      std::max(std::pow(cfg.trust_shrink, static_cast<double>(k)), cfg.trust_floor);
  for (std::size_t i = 0; i < p.num_vars(); ++i) {
    const double lb = p.variables[i].lb, ub = p.variables[i].ub;
    const double w = (ub - lb) * shrink;
    double lo = std::clamp(center[i] - w / 2, lb, ub - w);
    if (!(w > 0)) lo = lb;  // degenerate box; keep the full (zero-width) range
    out[i] = {lo, lo + w};
  }
  return out;
}

Point random_in_box(const NlpProblem& p, Rng& rng) {
  Point x(p.num_vars());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = rng.uniform(p.variables[i].lb, p.variables[i].ub);
  return x;
}

void dedupe_points(std::vector<Point>& pts) {
  std::vector<Point> out;
  for (auto& c : pts) {
    bool dup = false;
    for (const auto& seen : out) {
      double dist = 0;
      for (std::size_t i = 0; i < c.size(); ++i)
        dist = std::max(dist, std::abs(c[i] - seen[i]));
      if (dist <= 1e-12) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(c));
  }
  pts = std::move(out);
}

// Candidate points from the configured sampler, best first by AL value.
std::vector<Point> sampler_candidates(const NlpProblem& aug, const Point& incumbent,
                                      int k, Sampler sampler, const SolverConfig& cfg,
                                      double* best_al) {
  *best_al = kNan;
  std::vector<Point> cands;
  if (sampler == Sampler::None) return cands;

  const auto boxes = trust_boxes(aug, incumbent, k, cfg);
  if (sampler == Sampler::QhdDense) {
    const Grid grid = make_grid(cfg.qhd_grid_points, boxes);
    const auto pot = discretize_potential(aug.objective, grid);
    WaveState psi = evolve(uniform_state(grid), pot, grid, cfg.qhd_schedule);
    cands = sample(psi, grid, cfg.qhd_samples,
                   mix_seed(cfg.seed, static_cast<std::uint64_t>(k), 0x9d));
  } else {
    auto form = to_separable(aug.objective);
    if (!form) form = separable_form(quadratic_model(aug, incumbent));
    std::vector<VariableLevels> grids(aug.num_vars());
    for (std::size_t i = 0; i < aug.num_vars(); ++i) {
      auto& vals = grids[i].values;
      vals.resize(static_cast<std::size_t>(std::max(2, cfg.levels)));
      const auto [lo, hi] = boxes[i];
      for (std::size_t l = 0; l < vals.size(); ++l)
        vals[l] = lo + (hi - lo) * static_cast<double>(l) /
                           static_cast<double>(vals.size() - 1);
    }
    const auto [ising, enc] = encode(form, grids);
    SbParams sbp = cfg.sb ? *cfg.sb : auto_params(ising);
    sbp.seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(k), 0x5b);
    const SbResult res = run(ising, sbp);
    std::vector<int> order(res.replica_spins.size());
    for (std::size_t r = 0; r < order.size(); ++r) order[r] = static_cast<int>(r);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return res.replica_energies[static_cast<std::size_t>(a)] <
             res.replica_energies[static_cast<std::size_t>(b)];
    });
    for (const int r : order)
      cands.push_back(decode(res.replica_spins[static_cast<std::size_t>(r)], enc));
  }

  dedupe_points(cands);
  std::vector<std::pair<double, Point>> scored;
  scored.reserve(cands.size());
  for (auto& c : cands) scored.emplace_back(evaluate(aug.objective, c), std::move(c));
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  cands.clear();
  for (auto& [val, pt] : scored) {
    if (static_cast<int>(cands.size()) >= cfg.sampler_candidates) break;
    if (cands.empty()) *best_al = val;
    cands.push_back(std::move(pt));
  }
  return cands;
}

SolveReport run_alm_loop(const NlpProblem& problem, const SolverConfig& cfg,
                         Sampler requested_sampler, const char* method) {
  require_valid(problem);
  const NlpProblem p = normalized_to_min(problem);
  const double sense_sign = problem.sense == Sense::Max ? -1.0 : 1.0;

  SolveReport report;
  report.problem_name = problem.name;
  report.method = method;
  report.config = cfg;
  report.config.sampler = requested_sampler;

  AlmState state;
  state.multipliers = zero_multipliers(p);
  state.penalties = initial_penalties(p, cfg.alm);

  Stopwatch total;
  std::map<std::string, double> timings{
      {"build", 0}, {"sample", 0}, {"refine", 0}, {"update", 0}};

  double violation_prev = std::numeric_limits<double>::infinity();
  double prev_objective = kNan;
  bool last_refine_stalled = false;

  for (int k = 0; k < cfg.alm.max_outer; ++k) {
    Stopwatch stage;
    const AugmentedProblem aug =
        build_augmented(p, state.multipliers, state.penalties);
    if (k == 0) state.incumbent = box_midpoint(aug.problem);
    reset_slacks(p, state.multipliers, state.penalties, aug.slack_cap,
                 state.incumbent);
    timings["build"] += stage.elapsed_ms();

    // dense QHD is capped at 3 dimensions; larger subproblems go to SB
    Sampler sampler = requested_sampler;
    if (sampler == Sampler::QhdDense && aug.problem.num_vars() > 3) {
      sampler = Sampler::Sb;
      report.sampler_downgraded = true;
    }

    stage.restart();
    double sampler_best_al = kNan;
    std::vector<Point> candidates;
    try {
      candidates = sampler_candidates(aug.problem, state.incumbent, k, sampler,
                                      cfg, &sampler_best_al);
    } catch (const Error&) {
      ++report.sampler_failures;  // degrade to random candidates
      candidates.clear();
    }
    candidates.push_back(state.incumbent);
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(k), 0x7a));
    while (static_cast<int>(candidates.size()) < cfg.candidates)
      candidates.push_back(random_in_box(aug.problem, rng));
    timings["sample"] += stage.elapsed_ms();

    stage.restart();
    std::vector<RefineResult> refined(candidates.size());
    parallel_for(candidates.size(), [&](std::size_t i) {
      refined[i] = minimize(aug.problem, candidates[i], cfg.refine);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < refined.size(); ++i)
      if (refined[i].objective < refined[best].objective) best = i;
    state.incumbent = refined[best].x;
    last_refine_stalled = refined[best].stalled;
    timings["refine"] += stage.elapsed_ms();

    stage.restart();
    const Residuals res = residuals(p, state.incumbent);
    const Point x_only(state.incumbent.begin(),
                       state.incumbent.begin() + static_cast<long>(p.num_vars()));
    const double f_internal = evaluate(p.objective, x_only);

    IterationRecord rec;
    rec.k = k;
    rec.objective = sense_sign * f_internal;
    rec.al_objective = refined[best].objective;
    rec.true_infeasibility = res.true_infeasibility;
    rec.max_al_violation = res.max_al_violation;
    rec.stationarity = refined[best].stationarity;
    const auto [rho_lo, rho_hi] = [&] {
      double lo = std::numeric_limits<double>::infinity(), hi = 0;
      for (const auto& r : state.penalties.rho_eq) { lo = std::min(lo, r); hi = std::max(hi, r); }
      for (const auto& r : state.penalties.rho_ineq) { lo = std::min(lo, r); hi = std::max(hi, r); }
      if (!std::isfinite(lo)) lo = 0;
      return std::pair<double, double>(lo, hi);
    }();
    rec.rho_min = rho_lo;
    rec.rho_max = rho_hi;
    rec.sampler_best_al = sampler_best_al;
    rec.refined_best_al = refined[best].objective;
    rec.candidates_refined = static_cast<int>(candidates.size());
    report.iterations.push_back(rec);
    state.history.push_back({f_internal, res.max_al_violation, rec.stationarity});
    state.k = k + 1;
    report.outer_iterations = k + 1;

    const bool feas_ok = res.true_infeasibility <= cfg.alm.tol_feas;
    const bool stat_ok = rec.stationarity <= cfg.alm.tol_stat;
    const bool delta_ok =
        k == 0 || std::abs(f_internal - prev_objective) <= cfg.alm.tol_obj;
    prev_objective = f_internal;
    if (feas_ok && stat_ok && delta_ok) {
      report.status = SolveStatus::Converged;
      timings["update"] += stage.elapsed_ms();
      break;
    }

    state.multipliers = update_multipliers(state.multipliers, state.penalties, p,
                                           state.incumbent, cfg.alm.project_mu);
    if (res.max_al_violation > cfg.alm.tol_feas)  // growth is pointless below tolerance
      state.penalties = grow_penalty(state.penalties, violation_prev,
                                     res.max_al_violation, cfg.alm.eta);
    violation_prev = res.max_al_violation;
    timings["update"] += stage.elapsed_ms();

    if (cfg.time_budget_s > 0 && total.elapsed_ms() > 1e3 * cfg.time_budget_s) break;
  }

  if (report.status != SolveStatus::Converged && last_refine_stalled)
    report.status = SolveStatus::Stalled;

  report.solution.assign(state.incumbent.begin(),
                         state.incumbent.begin() + static_cast<long>(p.num_vars()));
  report.slacks.assign(state.incumbent.begin() + static_cast<long>(p.num_vars()),
                       state.incumbent.end());
  report.objective = sense_sign * evaluate(p.objective, report.solution);
  report.true_infeasibility = residuals(p, state.incumbent).true_infeasibility;
  report.multipliers = state.multipliers;

  timings["total"] = total.elapsed_ms();
  report.timings_ms = std::move(timings);
  return report;
}

}  // namespace

SolveReport solve(const NlpProblem& problem, const SolverConfig& cfg) {
  return run_alm_loop(problem, cfg, cfg.sampler, "qhd-alm");
}

SolveReport baseline_alm(const NlpProblem& problem, const SolverConfig& cfg) {
  return run_alm_loop(problem, cfg, Sampler::None, "alm");
}

SolveReport multistart_refine(const NlpProblem& problem, int n_starts,
                              const SolverConfig& cfg) {
  if (n_starts < 1) fail(ErrorCode::InvalidInput, "n_starts must be >= 1");
  require_valid(problem);
  const NlpProblem p = normalized_to_min(problem);
  const double sense_sign = problem.sense == Sense::Max ? -1.0 : 1.0;

  SolveReport report;
  report.problem_name = problem.name;
  report.method = "multistart";
  report.config = cfg;

  Stopwatch total;
  Stopwatch stage;
  const AugmentedProblem aug =
      build_augmented(p, zero_multipliers(p), initial_penalties(p, cfg.alm));
  std::map<std::string, double> timings{{"build", stage.elapsed_ms()},
                                        {"sample", 0.0}};

  stage.restart();
  std::vector<Point> starts(static_cast<std::size_t>(n_starts));
  for (std::size_t i = 0; i < starts.size(); ++i) {
    Rng rng(mix_seed(cfg.seed, i, 0x1157));
    starts[i] = random_in_box(aug.problem, rng);
  }
  timings["sample"] += stage.elapsed_ms();

  stage.restart();
  std::vector<RefineResult> refined(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    refined[i] = minimize(aug.problem, starts[i], cfg.refine);
  });
  std::size_t best = 0;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    const Point x_only(refined[i].x.begin(),
                       refined[i].x.begin() + static_cast<long>(p.num_vars()));
    report.starts.push_back(
        {refined[i].objective, sense_sign * evaluate(p.objective, x_only)});
    if (refined[i].objective < refined[best].objective) best = i;
  }
  timings["refine"] = stage.elapsed_ms();

  stage.restart();
  report.status = refined[best].stationarity <= cfg.refine.tol_stat
                      ? SolveStatus::Converged
                      : (refined[best].stalled ? SolveStatus::Stalled
                                               : SolveStatus::MaxIterations);
  report.solution.assign(refined[best].x.begin(),
                         refined[best].x.begin() + static_cast<long>(p.num_vars()));
  report.slacks.assign(refined[best].x.begin() + static_cast<long>(p.num_vars()),
                       refined[best].x.end());
  report.objective = sense_sign * evaluate(p.objective, report.solution);
  report.true_infeasibility = residuals(p, refined[best].x).true_infeasibility;
  report.multipliers = zero_multipliers(p);
  timings["update"] = stage.elapsed_ms();
  timings["total"] = total.elapsed_ms();
  report.timings_ms = std::move(timings);
  return report;
}

namespace {

using nlohmann::json;

json config_to_json(const SolverConfig& cfg) {
  json j;
  j["sampler"] = to_string(cfg.sampler);
  j["levels"] = cfg.levels;
  j["candidates"] = cfg.candidates;
  j["sampler_candidates"] = cfg.sampler_candidates;
  j["trust_shrink"] = cfg.trust_shrink;
  j["trust_floor"] = cfg.trust_floor;
  j["qhd_grid_points"] = cfg.qhd_grid_points;
  j["qhd_samples"] = cfg.qhd_samples;
  j["qhd_schedule"] = {{"kinetic_rate", cfg.qhd_schedule.kinetic_rate},
                       {"potential_rate", cfg.qhd_schedule.potential_rate},
                       {"total_time", cfg.qhd_schedule.total_time},
                       {"dt", cfg.qhd_schedule.dt}};
  j["alm"] = {{"rho0", cfg.alm.rho0},         {"gamma", cfg.alm.gamma},
              {"rho_max", cfg.alm.rho_max},   {"eta", cfg.alm.eta},
              {"tol_feas", cfg.alm.tol_feas}, {"tol_stat", cfg.alm.tol_stat},
              {"tol_obj", cfg.alm.tol_obj},   {"max_outer", cfg.alm.max_outer},
              {"project_mu", cfg.alm.project_mu}};
  j["refine"] = {{"max_iters", cfg.refine.max_iters},
                 {"armijo_c1", cfg.refine.armijo_c1},
                 {"backtrack", cfg.refine.backtrack},
                 {"initial_step", cfg.refine.initial_step},
                 {"tol_stat", cfg.refine.tol_stat}};
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace

std::string report_to_json_string(const SolveReport& report, bool include_metadata,
                                  int indent) {
  json j;
  j["format_version"] = 1;
  j["method"] = report.method;
  j["problem"] = report.problem_name;
  j["status"] = to_string(report.status);
  j["outer_iterations"] = report.outer_iterations;
  j["config"] = config_to_json(report.config);
  j["iterations"] = json::array();
  for (const auto& it : report.iterations) {
    j["iterations"].push_back({{"k", it.k},
                               {"objective", it.objective},
                               {"al_objective", it.al_objective},
                               {"true_infeasibility", it.true_infeasibility},
                               {"max_al_violation", it.max_al_violation},
                               {"stationarity", it.stationarity},
                               {"rho_min", it.rho_min},
                               {"rho_max", it.rho_max},
                               {"sampler_best_al", it.sampler_best_al},
                               {"refined_best_al", it.refined_best_al},
                               {"candidates_refined", it.candidates_refined}});
  }
  j["final"] = {{"objective", report.objective},
                {"true_infeasibility", report.true_infeasibility},
                {"solution", report.solution},
                {"slacks", report.slacks},
                {"multipliers_eq", report.multipliers.eq},
                {"multipliers_ineq", report.multipliers.ineq}};
  if (!report.starts.empty()) {
    j["starts"] = json::array();
    for (const auto& s : report.starts)
      j["starts"].push_back({{"al_value", s.al_value}, {"objective", s.objective}});
  }
  j["sampler_failures"] = report.sampler_failures;
  j["sampler_downgraded"] = report.sampler_downgraded;
  if (include_metadata) j["metadata"] = {{"timings_ms", report.timings_ms}};
  return j.dump(indent) + "\n";
}

void save_report(const std::string& path, const SolveReport& report,
                 bool include_metadata) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write report file: " + path);
  out << report_to_json_string(report, include_metadata);
}

}  // namespace qhdalm
