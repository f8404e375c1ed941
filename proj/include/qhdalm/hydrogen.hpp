#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qhdalm/problem.hpp"

namespace qhdalm {

// Fitted electrolyzer cell curves over input power p in [0, P_max].
struct CurrentFit {
  double i1 = 0, i2 = 0, i3 = 0, i4 = 0;
  double value(double p) const;  // i1 - i2 exp(i3 p) + i4 p
};

struct VoltageFit {
  double u1 = 0, u2 = 0, u3 = 0, u4 = 0, u5 = 0;
  double value(double p) const;  // u1 + u2 p - u3 p^2 + u4 p^3 - u5 p^4
};

struct PowerCapFit {
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
};

struct ThermalCapFit {
  double n1 = 0, n2 = 0, n3 = 0, n4 = 0, n5 = 0;
};

struct HydrogenParams {
  int horizon = 1;           // N time slots
  double slot_hours = 1.0;   // Delta t
  std::vector<double> power_price;  // $/kWh, length N
  std::vector<double> renewable;    // kW, length N
  std::vector<double> demand;       // storage units per slot, length N
  double hydrogen_value = 0;        // $ per storage unit
  double ac_slope = 1.0;            // m_AC
  double ac_intercept = 0.0;        // k_AC
  double storage_min = 0;
  double storage_max = 0;
  double storage_initial = 0;
  double electrolyzer_max_power = 0;  // P_max, kW
  double hhv = 39.4;                  // kWh per storage unit
  double temperature = 60;            // cell temperature, degrees C
  CurrentFit current_fit;
  VoltageFit voltage_fit;
  PowerCapFit power_cap;
  ThermalCapFit thermal_cap;
};

std::vector<Diagnostic> validate(const HydrogenParams& params);
void require_valid(const HydrogenParams& params);

// Variable layout of the built problems.
struct HydrogenLayout {
  int horizon = 0;
  bool has_lambda = true;

  int p_el(int t) const { return t; }
  int p_buy(int t) const { return horizon + t; }
  int storage(int t) const { return 2 * horizon + (t - 1); }  // t in 1..N
  int lambda(int t) const { return 3 * horizon + t; }
  int num_vars() const { return has_lambda ? 4 * horizon : 3 * horizon; }
};

// Scheduling problem with the dynamic efficiency model: minimize
// -value*(s_N - s_0) + sum price_t p_buy_t subject to storage recursion and
// power balance equalities plus the two efficiency cap inequalities per
// slot. The thermal cap's inner 1/I_cell ratio is replaced by a fitted
// polynomial reciprocal and the outer ratio is cleared by multiplying
// through with U_cell (positive on the sweep), keeping the expression tree
// division-free.
NlpProblem build(const HydrogenParams& params);

// (power-curve cap, thermal cap) evaluated directly, division included.
std::pair<double, double> efficiency_caps(double p_el, const HydrogenParams& params);

// Drops the efficiency variables and caps; production is a fixed fraction of
// input power. The result is a linear program.
NlpProblem fixed_efficiency_variant(const HydrogenParams& params, double lambda_fixed);

HydrogenParams load_params(const std::string& path);
HydrogenParams params_from_json(const std::string& text);
std::string params_to_json(const HydrogenParams& params, int indent = 2);
void save_params(const std::string& path, const HydrogenParams& params);

// Retiles the per-slot data vectors cyclically to a new horizon.
HydrogenParams with_horizon(const HydrogenParams& params, int horizon);

struct HydrogenSolution {
  std::vector<double> p_el, p_buy, storage, lambda;  // storage is s_1..s_N
  std::vector<double> cap_power, cap_thermal;
  std::vector<double> slack_thermal, slack_power;
  std::vector<double> storage_residual, balance_residual;
  double objective = 0;        // min sense: cost
  double profit = 0;           // value*(s_N - s_0) - power cost
  double max_violation = 0;
};

HydrogenSolution extract_solution(const HydrogenParams& params, const Point& x,
                                  const Point& slacks);

void write_schedule_csv(std::ostream& os, const HydrogenSolution& sol);

}  // namespace qhdalm
