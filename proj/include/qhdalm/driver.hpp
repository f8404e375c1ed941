#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "qhdalm/alm.hpp"
#include "qhdalm/embedding.hpp"
#include "qhdalm/qhd.hpp"
#include "qhdalm/refine.hpp"
#include "qhdalm/sb.hpp"

namespace qhdalm {

enum class Sampler { QhdDense, Sb, None };
enum class SolveStatus { Converged, MaxIterations, Stalled };

const char* to_string(Sampler s);
const char* to_string(SolveStatus s);

struct SolverConfig {
  Sampler sampler = Sampler::Sb;
  int levels = 8;               // domain-wall levels per variable
  int candidates = 8;           // refine starts per outer iteration
  int sampler_candidates = 4;   // of which come from the sampler
  double trust_shrink = 0.5;    // grid shrink per outer iteration
  double trust_floor = 1e-3;    // times the original box width

  int qhd_grid_points = 64;
  QhdSchedule qhd_schedule = default_schedule();
  int qhd_samples = 128;

  std::optional<SbParams> sb;   // defaults to auto_params per instance

  AlmOptions alm;
  RefineParams refine;

  std::uint64_t seed = 0;
  double time_budget_s = 0;     // 0 = unlimited
};

struct IterationRecord {
  int k = 0;
  double objective = 0;            // original sense, f at the incumbent
  double al_objective = 0;         // augmented objective at the incumbent
  double true_infeasibility = 0;
  double max_al_violation = 0;
  double stationarity = 0;
  double rho_min = 0, rho_max = 0;
  double sampler_best_al = 0;      // NaN when the sampler produced nothing
  double refined_best_al = 0;
  int candidates_refined = 0;
};

struct StartRecord {
  double al_value = 0;
  double objective = 0;  // original sense
};

struct SolveReport {
  std::string problem_name;
  std::string method;
  SolveStatus status = SolveStatus::MaxIterations;
  int outer_iterations = 0;
  std::vector<IterationRecord> iterations;

  Point solution;  // original variables
  Point slacks;
  double objective = 0;  // original sense
  double true_infeasibility = 0;
  Multipliers multipliers;

  std::vector<StartRecord> starts;  // multistart only
  int sampler_failures = 0;
  bool sampler_downgraded = false;  // dense path refused, rerouted to SB

  SolverConfig config;
  // Wall-clock metadata; excluded from the deterministic report body.
  std::map<std::string, double> timings_ms;
};

// Full pipeline: build the augmented Lagrangian, sample candidates with the
// configured global sampler, refine, then update multipliers and penalties
// until the convergence test passes.
SolveReport solve(const NlpProblem& problem, const SolverConfig& cfg);

// Identical loop with the sampler disabled (random candidates only).
SolveReport baseline_alm(const NlpProblem& problem, const SolverConfig& cfg);

// Uniform random starts refined on a fixed-penalty augmented Lagrangian.
SolveReport multistart_refine(const NlpProblem& problem, int n_starts,
                              const SolverConfig& cfg);

std::string report_to_json_string(const SolveReport& report,
                                  bool include_metadata = true, int indent = 2);
void save_report(const std::string& path, const SolveReport& report,
                 bool include_metadata = true);

}  // namespace qhdalm
