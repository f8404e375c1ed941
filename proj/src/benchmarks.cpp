#include "qhdalm/benchmarks.hpp"

namespace qhdalm {

NlpProblem styblinski_tang_box(int dims) {
  if (dims < 1) fail(ErrorCode::InvalidInput, "dims must be >= 1");
  NlpProblem p;
  p.name = "styblinski_tang_" + std::to_string(dims) + "d";
  p.sense = Sense::Min;
  std::vector<ExprPtr> terms;
  for (int i = 0; i < dims; ++i) {
    p.variables.push_back({"x" + std::to_string(i), -5.0, 5.0});
    const ExprPtr x = var(i);
    terms.push_back(0.5 * sum({pow(x, 4), -16.0 * pow(x, 2), 5.0 * x}));
  }
  p.objective = sum(std::move(terms));
  return p;
}

NlpProblem styblinski_tang_circle() {
  NlpProblem p = styblinski_tang_box(2);
  p.name = "styblinski_tang_circle";
  p.equalities.push_back(sum({pow(var(0), 2), pow(var(1), 2), constant(-25.0)}));
  return p;
}

HydrogenParams default_hydrogen_params() {
  HydrogenParams prm;
  prm.horizon = 6;
  prm.slot_hours = 1.0;
  prm.power_price = {0.08, 0.05, 0.03, 0.04, 0.09, 0.12};
  prm.renewable = {10.0, 20.0, 35.0, 30.0, 15.0, 5.0};
  prm.demand = {1.0, 1.0, 2.0, 2.0, 1.0, 1.0};
  prm.hydrogen_value = 6.0;
  prm.ac_slope = 1.05;
  prm.ac_intercept = 2.0;
  prm.storage_min = 0.0;
  prm.storage_max = 100.0;
  prm.storage_initial = 10.0;
  prm.electrolyzer_max_power = 100.0;
  prm.hhv = 39.4;
  prm.temperature = 60.0;
  prm.current_fit = {120.0, 40.0, -0.02, 6.0};
  prm.voltage_fit = {1.45, 0.009, 2e-05, 2e-08, 1e-11};
  prm.power_cap = {30.0, 0.45, -20.0, -0.08};
  prm.thermal_cap = {100.0, 20.0, 1.4, 0.02, -0.0001};
  return prm;
}

}  // namespace qhdalm
