#include "qhdalm/hydrogen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <sstream>

#include "qhdalm/util.hpp"

namespace qhdalm {

double CurrentFit::value(double p) const {
  return i1 - i2 * std::exp(i3 * p) + i4 * p;
}

double VoltageFit::value(double p) const {
  return u1 + u2 * p - u3 * p * p + u4 * p * p * p - u5 * p * p * p * p;
}

namespace {

constexpr int kSweepPoints = 256;
constexpr double kVoltageFloor = 1e-6;   // epsilon_U
constexpr double kCurrentFloor = 1e-9;
constexpr double kPi = 3.14159265358979323846;

double thermal_exponent(const ThermalCapFit& n, double temperature) {
  return n.n3 + n.n4 * temperature + n.n5 * temperature * temperature;
}

// Chebyshev interpolation of 1/I_cell(p) on [0, P_max], returned as monomial
// coefficients in the scaled variable u = 2 p / P_max - 1. The monomial basis
// is well conditioned on [-1, 1] for the degrees used here.
struct ReciprocalFit {
  std::vector<double> coeff;  // a_0 + a_1 u + ... in u
  double max_error = 0;
};

std::vector<double> cheb_to_monomial(const std::vector<double>& c) {
  // T_0 = 1, T_1 = u, T_{k+1} = 2u T_k - T_{k-1}
  std::vector<std::vector<double>> t{{1.0}, {0.0, 1.0}};
  const std::size_t deg = c.size() - 1;
  for (std::size_t k = 2; k <= deg; ++k) {
    std::vector<double> next(k + 1, 0.0);
    for (std::size_t i = 0; i < t[k - 1].size(); ++i) next[i + 1] += 2.0 * t[k - 1][i];
    for (std::size_t i = 0; i < t[k - 2].size(); ++i) next[i] -= t[k - 2][i];
    t.push_back(std::move(next));
  }
  std::vector<double> mono(deg + 1, 0.0);
  for (std::size_t k = 0; k <= deg; ++k)
    for (std::size_t i = 0; i < t[k].size(); ++i) mono[i] += c[k] * t[k][i];
  return mono;
}

double eval_monomial(const std::vector<double>& a, double u) {
  double acc = 0;
  for (std::size_t i = a.size(); i-- > 0;) acc = acc * u + a[i];
  return acc;
}

ReciprocalFit fit_reciprocal_current(const CurrentFit& fit, double p_max) {
  auto target = [&](double p) { return 1.0 / fit.value(p); };
  double scale = 1.0;
  for (int k = 0; k <= kSweepPoints; ++k) {
    const double p = p_max * static_cast<double>(k) / kSweepPoints;
    scale = std::max(scale, std::abs(target(p)));
  }
  ReciprocalFit best;
  best.max_error = std::numeric_limits<double>::infinity();
  for (int deg = 8; deg <= 32; deg += 4) {
    const int m = deg + 1;  // node count
    std::vector<double> fv(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
      const double u = std::cos(kPi * (k + 0.5) / m);
      fv[static_cast<std::size_t>(k)] = target(p_max * (u + 1.0) / 2.0);
    }
    std::vector<double> cheb(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
      double s = 0;
      for (int k = 0; k < m; ++k)
        s += fv[static_cast<std::size_t>(k)] * std::cos(kPi * j * (k + 0.5) / m);
      cheb[static_cast<std::size_t>(j)] = 2.0 * s / m;
    }
    cheb[0] /= 2.0;
    ReciprocalFit cand;
    cand.coeff = cheb_to_monomial(cheb);
    cand.max_error = 0;
    for (int k = 0; k <= kSweepPoints; ++k) {
      const double p = p_max * static_cast<double>(k) / kSweepPoints;
      const double u = 2.0 * p / p_max - 1.0;
      cand.max_error = std::max(cand.max_error,
                                std::abs(eval_monomial(cand.coeff, u) - target(p)));
    }
    if (cand.max_error < best.max_error) best = std::move(cand);
    if (best.max_error < 1e-12 * scale) break;
  }
  if (best.max_error > 1e-6 * scale)
    fail(ErrorCode::Singularity,
         "could not fit the reciprocal of the current curve; it varies too "
         "sharply over [0, P_max]");
  return best;
}

// Horner evaluation of the u-monomial as an expression in p_el.
ExprPtr monomial_expr(const std::vector<double>& a, double p_max, int p_el_var) {
  const ExprPtr u = affine(2.0 / p_max, -1.0, var(p_el_var));
  ExprPtr acc = constant(a.back());
  for (std::size_t i = a.size() - 1; i-- > 0;) acc = acc * u + a[i];
  return acc;
}

ExprPtr voltage_expr(const VoltageFit& f, int p_el_var) {
  const ExprPtr p = var(p_el_var);
  return sum({constant(f.u1), f.u2 * p, -f.u3 * pow(p, 2), f.u4 * pow(p, 3),
              -f.u5 * pow(p, 4)});
}

}  // namespace

std::vector<Diagnostic> validate(const HydrogenParams& prm) {
  std::vector<Diagnostic> d;
  if (prm.horizon < 1) d.push_back({"horizon", "must be >= 1"});
  if (!(prm.slot_hours > 0)) d.push_back({"slot_hours", "must be > 0"});
  auto check_len = [&](const std::vector<double>& v, const char* field) {
    if (static_cast<int>(v.size()) != prm.horizon)
      d.push_back({field, "length must equal horizon"});
  };
  check_len(prm.power_price, "power_price");
  check_len(prm.renewable, "renewable");
  check_len(prm.demand, "demand");
  if (!(prm.electrolyzer_max_power > 0))
    d.push_back({"electrolyzer_max_power", "must be > 0"});
  if (!(prm.hhv > 0)) d.push_back({"hhv", "must be > 0"});
  if (prm.storage_min > prm.storage_max)
    d.push_back({"storage_min", "exceeds storage_max"});
  if (prm.storage_initial < prm.storage_min || prm.storage_initial > prm.storage_max)
    d.push_back({"storage_initial", "outside [storage_min, storage_max]"});
  if (!(prm.ac_slope > 0)) d.push_back({"ac_slope", "must be > 0"});

  if (prm.electrolyzer_max_power > 0) {
    for (int k = 0; k <= kSweepPoints; ++k) {
      const double p =
          prm.electrolyzer_max_power * static_cast<double>(k) / kSweepPoints;
      if (prm.voltage_fit.value(p) <= kVoltageFloor) {
        d.push_back({"voltage_fit", "U_cell must stay positive on [0, P_max]"});
        break;
      }
    }
    for (int k = 0; k <= kSweepPoints; ++k) {
      const double p =
          prm.electrolyzer_max_power * static_cast<double>(k) / kSweepPoints;
      if (prm.current_fit.value(p) <= kCurrentFloor) {
        d.push_back({"current_fit", "I_cell must stay positive on [0, P_max]"});
        break;
      }
    }
  }
  return d;
}

void require_valid(const HydrogenParams& prm) {
  const auto diags = validate(prm);
  if (diags.empty()) return;
  std::ostringstream os;
  os << "invalid hydrogen parameters:";
  for (const auto& x : diags) os << "\n  " << x.field << ": " << x.message;
  fail(ErrorCode::InvalidInput, os.str());
}

NlpProblem build(const HydrogenParams& prm) {
  require_valid(prm);
  const int n = prm.horizon;
  const HydrogenLayout lay{n, true};
  const double p_buy_cap =
      std::max(1.0, prm.ac_slope * prm.electrolyzer_max_power + prm.ac_intercept);

  NlpProblem p;
  p.name = "hydrogen_n" + std::to_string(n);
  p.sense = Sense::Min;
  p.variables.resize(static_cast<std::size_t>(lay.num_vars()));
  for (int t = 0; t < n; ++t) {
    p.variables[static_cast<std::size_t>(lay.p_el(t))] =
        {"p_el_" + std::to_string(t), 0.0, prm.electrolyzer_max_power};
    p.variables[static_cast<std::size_t>(lay.p_buy(t))] =
        {"p_buy_" + std::to_string(t), 0.0, p_buy_cap};
    p.variables[static_cast<std::size_t>(lay.storage(t + 1))] =
        {"s_" + std::to_string(t + 1), prm.storage_min, prm.storage_max};
    p.variables[static_cast<std::size_t>(lay.lambda(t))] =
        {"lambda_" + std::to_string(t), 0.0, 100.0};
  }

  // objective: -value * (s_N - s_0) + sum price_t * p_buy_t
  std::vector<ExprPtr> obj;
  obj.push_back(affine(-prm.hydrogen_value, prm.hydrogen_value * prm.storage_initial,
                       var(lay.storage(n))));
  for (int t = 0; t < n; ++t)
    if (prm.power_price[static_cast<std::size_t>(t)] != 0)
      obj.push_back(prm.power_price[static_cast<std::size_t>(t)] * var(lay.p_buy(t)));
  p.objective = sum(std::move(obj));

  // storage recursion: s_{t+1} - s_t - (dt / (100 HHV)) p_el_t lambda_t + d_t = 0
  const double prod_coef = prm.slot_hours / (100.0 * prm.hhv);
  for (int t = 0; t < n; ++t) {
    std::vector<ExprPtr> terms;
    terms.push_back(var(lay.storage(t + 1)));
    if (t == 0)
      terms.push_back(constant(-prm.storage_initial));
    else
      terms.push_back(-var(lay.storage(t)));
    terms.push_back(affine(-prod_coef, 0.0,
                           product({var(lay.p_el(t)), var(lay.lambda(t))})));
    terms.push_back(constant(prm.demand[static_cast<std::size_t>(t)]));
    p.equalities.push_back(sum(std::move(terms)));
  }
  // power balance: p_buy_t + renewable_t - m_AC p_el_t - k_AC = 0
  for (int t = 0; t < n; ++t)
    p.equalities.push_back(
        sum({var(lay.p_buy(t)),
             affine(-prm.ac_slope,
                    prm.renewable[static_cast<std::size_t>(t)] - prm.ac_intercept,
                    var(lay.p_el(t)))}));

  // thermal cap, multiplied through by U_cell > 0:
  //   lambda_t U(p) - n1 - n2 exp(cT * recip(p)) <= 0
  const ReciprocalFit recip =
      fit_reciprocal_current(prm.current_fit, prm.electrolyzer_max_power);
  const double ct = thermal_exponent(prm.thermal_cap, prm.temperature);
  for (int t = 0; t < n; ++t) {
    std::vector<ExprPtr> terms;
    terms.push_back(product({var(lay.lambda(t)),
                             voltage_expr(prm.voltage_fit, lay.p_el(t))}));
    terms.push_back(constant(-prm.thermal_cap.n1));
    if (prm.thermal_cap.n2 != 0)
      terms.push_back(affine(
          -prm.thermal_cap.n2, 0.0,
          exp(ct * monomial_expr(recip.coeff, prm.electrolyzer_max_power,
                                 lay.p_el(t)))));
    p.inequalities.push_back(sum(std::move(terms)));
  }
  // power-curve cap: lambda_t - m1 - m2 P_max - m3 exp(m4 * 100 p / P_max) <= 0
  for (int t = 0; t < n; ++t) {
    std::vector<ExprPtr> terms;
    terms.push_back(var(lay.lambda(t)));
    terms.push_back(constant(-prm.power_cap.m1 -
                             prm.power_cap.m2 * prm.electrolyzer_max_power));
    if (prm.power_cap.m3 != 0)
      terms.push_back(affine(
          -prm.power_cap.m3, 0.0,
          exp(affine(prm.power_cap.m4 * 100.0 / prm.electrolyzer_max_power, 0.0,
                     var(lay.p_el(t))))));
    p.inequalities.push_back(sum(std::move(terms)));
  }
  return p;
}

std::pair<double, double> efficiency_caps(double p_el, const HydrogenParams& prm) {
  if (p_el < 0 || p_el > prm.electrolyzer_max_power)
    fail(ErrorCode::InvalidInput, "p_el outside [0, P_max]");
  const double cap1 =
      prm.power_cap.m1 + prm.power_cap.m2 * prm.electrolyzer_max_power +
      prm.power_cap.m3 *
          std::exp(prm.power_cap.m4 * (100.0 * p_el / prm.electrolyzer_max_power));
  const double i_cell = prm.current_fit.value(p_el);
  if (std::abs(i_cell) < kCurrentFloor)
    fail(ErrorCode::Singularity,
         "I_cell vanishes at p_el = " + std::to_string(p_el));
  const double u_cell = prm.voltage_fit.value(p_el);
  if (u_cell <= kVoltageFloor)
    fail(ErrorCode::InvalidInput,
         "U_cell not positive at p_el = " + std::to_string(p_el));
  const double cap2 =
      (prm.thermal_cap.n1 +
       prm.thermal_cap.n2 *
           std::exp(thermal_exponent(prm.thermal_cap, prm.temperature) / i_cell)) /
      u_cell;
  return {cap1, cap2};
}

NlpProblem fixed_efficiency_variant(const HydrogenParams& prm, double lambda_fixed) {
  require_valid(prm);
  if (!(lambda_fixed > 0) || lambda_fixed > 100)
    fail(ErrorCode::InvalidInput, "lambda_fixed must lie in (0, 100]");
  const int n = prm.horizon;
  const HydrogenLayout lay{n, false};
  const double p_buy_cap =
      std::max(1.0, prm.ac_slope * prm.electrolyzer_max_power + prm.ac_intercept);

  NlpProblem p;
  p.name = "hydrogen_fixed_n" + std::to_string(n);
  p.sense = Sense::Min;
  p.variables.resize(static_cast<std::size_t>(lay.num_vars()));
  for (int t = 0; t < n; ++t) {
    p.variables[static_cast<std::size_t>(lay.p_el(t))] =
        {"p_el_" + std::to_string(t), 0.0, prm.electrolyzer_max_power};
    p.variables[static_cast<std::size_t>(lay.p_buy(t))] =
        {"p_buy_" + std::to_string(t), 0.0, p_buy_cap};
    p.variables[static_cast<std::size_t>(lay.storage(t + 1))] =
        {"s_" + std::to_string(t + 1), prm.storage_min, prm.storage_max};
  }

  std::vector<ExprPtr> obj;
  obj.push_back(affine(-prm.hydrogen_value, prm.hydrogen_value * prm.storage_initial,
                       var(lay.storage(n))));
  for (int t = 0; t < n; ++t)
    if (prm.power_price[static_cast<std::size_t>(t)] != 0)
      obj.push_back(prm.power_price[static_cast<std::size_t>(t)] * var(lay.p_buy(t)));
  p.objective = sum(std::move(obj));

  const double prod_coef = prm.slot_hours * lambda_fixed / (100.0 * prm.hhv);
  for (int t = 0; t < n; ++t) {
    std::vector<ExprPtr> terms;
    terms.push_back(var(lay.storage(t + 1)));
    if (t == 0)
      terms.push_back(constant(-prm.storage_initial));
    else
      terms.push_back(-var(lay.storage(t)));
    terms.push_back(affine(-prod_coef, 0.0, var(lay.p_el(t))));
    terms.push_back(constant(prm.demand[static_cast<std::size_t>(t)]));
    p.equalities.push_back(sum(std::move(terms)));
  }
  for (int t = 0; t < n; ++t)
    p.equalities.push_back(
        sum({var(lay.p_buy(t)),
             affine(-prm.ac_slope,
                    prm.renewable[static_cast<std::size_t>(t)] - prm.ac_intercept,
                    var(lay.p_el(t)))}));
  return p;
}

namespace {

using nlohmann::json;

std::vector<double> get_vector(const json& doc, const char* field, std::size_t len,
                               std::vector<Diagnostic>& diags) {
  std::vector<double> out;
  if (!doc.contains(field)) {
    diags.push_back({field, "missing"});
    return out;
  }
  const auto& arr = doc.at(field);
  if (!arr.is_array()) {
    diags.push_back({field, "must be an array"});
    return out;
  }
  for (const auto& v : arr) {
    if (!v.is_number()) {
      diags.push_back({field, "must contain numbers"});
      return out;
    }
    out.push_back(v.get<double>());
  }
  if (len != 0 && out.size() != len) diags.push_back({field, "wrong length"});
  return out;
}

double get_number(const json& doc, const char* field, std::vector<Diagnostic>& diags,
                  double fallback = 0) {
  if (!doc.contains(field)) {
    diags.push_back({field, "missing"});
    return fallback;
  }
  if (!doc.at(field).is_number()) {
    diags.push_back({field, "must be a number"});
    return fallback;
  }
  return doc.at(field).get<double>();
}

}  // namespace

HydrogenParams params_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::Io, "malformed hydrogen parameter JSON");
  std::vector<Diagnostic> diags;
  HydrogenParams prm;
  if (doc.value("format_version", 1) != 1)
    diags.push_back({"format_version", "unsupported"});
  prm.horizon = static_cast<int>(get_number(doc, "horizon", diags, 1));
  prm.slot_hours = get_number(doc, "slot_hours", diags, 1);
  prm.power_price = get_vector(doc, "power_price", 0, diags);
  prm.renewable = get_vector(doc, "renewable", 0, diags);
  prm.demand = get_vector(doc, "demand", 0, diags);
  prm.hydrogen_value = get_number(doc, "hydrogen_value", diags);
  prm.ac_slope = get_number(doc, "ac_slope", diags, 1);
  prm.ac_intercept = get_number(doc, "ac_intercept", diags);
  prm.storage_min = get_number(doc, "storage_min", diags);
  prm.storage_max = get_number(doc, "storage_max", diags);
  prm.storage_initial = get_number(doc, "storage_initial", diags);
  prm.electrolyzer_max_power = get_number(doc, "electrolyzer_max_power", diags);
  prm.hhv = get_number(doc, "hhv", diags, 39.4);
  prm.temperature = get_number(doc, "temperature", diags, 60);
  const auto cf = get_vector(doc, "current_fit", 4, diags);
  if (cf.size() == 4) prm.current_fit = {cf[0], cf[1], cf[2], cf[3]};
  const auto vf = get_vector(doc, "voltage_fit", 5, diags);
  if (vf.size() == 5) prm.voltage_fit = {vf[0], vf[1], vf[2], vf[3], vf[4]};
  const auto pc = get_vector(doc, "power_cap_fit", 4, diags);
  if (pc.size() == 4) prm.power_cap = {pc[0], pc[1], pc[2], pc[3]};
  const auto tc = get_vector(doc, "thermal_cap_fit", 5, diags);
  if (tc.size() == 5) prm.thermal_cap = {tc[0], tc[1], tc[2], tc[3], tc[4]};

  const auto extra = validate(prm);
  diags.insert(diags.end(), extra.begin(), extra.end());
  if (!diags.empty()) {
    std::ostringstream os;
    os << "hydrogen parameter document rejected:";
    for (const auto& d : diags) os << "\n  " << d.field << ": " << d.message;
    fail(ErrorCode::InvalidInput, os.str());
  }
  return prm;
}

HydrogenParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open hydrogen parameter file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str());
}

std::string params_to_json(const HydrogenParams& prm, int indent) {
  json doc;
  doc["format_version"] = 1;
  doc["horizon"] = prm.horizon;
  doc["slot_hours"] = prm.slot_hours;
  doc["power_price"] = prm.power_price;
  doc["renewable"] = prm.renewable;
  doc["demand"] = prm.demand;
  doc["hydrogen_value"] = prm.hydrogen_value;
  doc["ac_slope"] = prm.ac_slope;
  doc["ac_intercept"] = prm.ac_intercept;
  doc["storage_min"] = prm.storage_min;
  doc["storage_max"] = prm.storage_max;
  doc["storage_initial"] = prm.storage_initial;
  doc["electrolyzer_max_power"] = prm.electrolyzer_max_power;
  doc["hhv"] = prm.hhv;
  doc["temperature"] = prm.temperature;
  doc["current_fit"] = {prm.current_fit.i1, prm.current_fit.i2, prm.current_fit.i3,
                        prm.current_fit.i4};
  doc["voltage_fit"] = {prm.voltage_fit.u1, prm.voltage_fit.u2, prm.voltage_fit.u3,
                        prm.voltage_fit.u4, prm.voltage_fit.u5};
  doc["power_cap_fit"] = {prm.power_cap.m1, prm.power_cap.m2, prm.power_cap.m3,
                          prm.power_cap.m4};
  doc["thermal_cap_fit"] = {prm.thermal_cap.n1, prm.thermal_cap.n2,
                            prm.thermal_cap.n3, prm.thermal_cap.n4,
                            prm.thermal_cap.n5};
  return doc.dump(indent) + "\n";
}

void save_params(const std::string& path, const HydrogenParams& prm) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write hydrogen parameter file: " + path);
  out << params_to_json(prm);
}

HydrogenParams with_horizon(const HydrogenParams& prm, int horizon) {
  if (horizon < 1) fail(ErrorCode::InvalidInput, "horizon must be >= 1");
  HydrogenParams out = prm;
  out.horizon = horizon;
  auto tile = [&](const std::vector<double>& src) {
    std::vector<double> v(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t)
      v[static_cast<std::size_t>(t)] =
          src.empty() ? 0.0 : src[static_cast<std::size_t>(t) % src.size()];
    return v;
  };
  out.power_price = tile(prm.power_price);
  out.renewable = tile(prm.renewable);
  out.demand = tile(prm.demand);
  return out;
}

HydrogenSolution extract_solution(const HydrogenParams& prm, const Point& x,
                                  const Point& slacks) {
  const int n = prm.horizon;
  const HydrogenLayout lay{n, true};
  if (x.size() != static_cast<std::size_t>(lay.num_vars()))
    fail(ErrorCode::DimensionMismatch, "solution size mismatch");
  HydrogenSolution sol;
  const double prod_coef = prm.slot_hours / (100.0 * prm.hhv);
  double prev_s = prm.storage_initial;
  double power_cost = 0;
  for (int t = 0; t < n; ++t) {
    const double pel = x[static_cast<std::size_t>(lay.p_el(t))];
    const double pbuy = x[static_cast<std::size_t>(lay.p_buy(t))];
    const double st = x[static_cast<std::size_t>(lay.storage(t + 1))];
    const double lam = x[static_cast<std::size_t>(lay.lambda(t))];
    sol.p_el.push_back(pel);
    sol.p_buy.push_back(pbuy);
    sol.storage.push_back(st);
    sol.lambda.push_back(lam);
    const auto caps = efficiency_caps(pel, prm);
    sol.cap_power.push_back(caps.first);
    sol.cap_thermal.push_back(caps.second);
    sol.storage_residual.push_back(st - prev_s - prod_coef * pel * lam +
                                   prm.demand[static_cast<std::size_t>(t)]);
    sol.balance_residual.push_back(pbuy + prm.renewable[static_cast<std::size_t>(t)] -
                                   prm.ac_slope * pel - prm.ac_intercept);
    power_cost += prm.power_price[static_cast<std::size_t>(t)] * pbuy;
    prev_s = st;
  }
  if (slacks.size() == static_cast<std::size_t>(2 * n)) {
    sol.slack_thermal.assign(slacks.begin(), slacks.begin() + n);
    sol.slack_power.assign(slacks.begin() + n, slacks.end());
  }
  sol.profit = prm.hydrogen_value * (prev_s - prm.storage_initial) - power_cost;
  sol.objective = -sol.profit;
  double viol = 0;
  for (int t = 0; t < n; ++t) {
    viol = std::max(viol, std::abs(sol.storage_residual[static_cast<std::size_t>(t)]));
    viol = std::max(viol, std::abs(sol.balance_residual[static_cast<std::size_t>(t)]));
    viol = std::max(viol, sol.lambda[static_cast<std::size_t>(t)] -
                              std::min(sol.cap_power[static_cast<std::size_t>(t)],
                                       sol.cap_thermal[static_cast<std::size_t>(t)]));
  }
  sol.max_violation = std::max(0.0, viol);
  return sol;
}

void write_schedule_csv(std::ostream& os, const HydrogenSolution& sol) {
  os << "slot,p_el,p_buy,storage,lambda,cap_power,cap_thermal,storage_residual,"
        "balance_residual\n";
  for (std::size_t t = 0; t < sol.p_el.size(); ++t) {
    os << t << "," << sol.p_el[t] << "," << sol.p_buy[t] << "," << sol.storage[t]
       << "," << sol.lambda[t] << "," << sol.cap_power[t] << ","
       << sol.cap_thermal[t] << "," << sol.storage_residual[t] << ","
       << sol.balance_residual[t] << "\n";
  }
}

}  // namespace qhdalm
