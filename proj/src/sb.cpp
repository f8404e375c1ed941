#include "qhdalm/sb.hpp"

#include <algorithm>
#include <cmath>

#include "qhdalm/util.hpp"

namespace qhdalm {

double energy(const IsingModel& ising, const SpinConfig& s) {
  if (static_cast<int>(s.size()) != ising.n)
    fail(ErrorCode::DimensionMismatch, "spin configuration size mismatch");
  double coupling_sum = 0, field_sum = 0;
  for (int i = 0; i < ising.n; ++i) {
    const double si = static_cast<double>(s[static_cast<std::size_t>(i)]);
    double row = 0;
    for (int j = 0; j < ising.n; ++j)
      row += ising.j(i, j) * static_cast<double>(s[static_cast<std::size_t>(j)]);
    coupling_sum += si * row;
    field_sum += ising.field[static_cast<std::size_t>(i)] * si;
  }
  return -0.5 * coupling_sum - field_sum + ising.offset;
}

SbParams auto_params(const IsingModel& ising) {
  if (ising.n < 1) fail(ErrorCode::InvalidInput, "empty Ising model");
  SbParams p;
  // population std dev over the off-diagonal entries
  double mean = 0, mean_sq = 0;
  const std::size_t n = static_cast<std::size_t>(ising.n);
  const std::size_t count = n * n - n;
  if (count > 0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double v = ising.coupling[i * n + j];
        mean += v;
        mean_sq += v * v;
      }
    mean /= static_cast<double>(count);
    mean_sq /= static_cast<double>(count);
  }
  const double sigma = std::sqrt(std::max(0.0, mean_sq - mean * mean));
  p.coupling = sigma > 0 ? 0.5 * p.detuning / (sigma * std::sqrt(static_cast<double>(ising.n)))
                         : 0.5;
  p.pump_start = 0.0;
  p.pump_end = 2.0 * p.detuning;
  return p;
}

namespace {

struct ReplicaOutcome {
  SpinConfig spins;
  double energy = 0;
  bool diverged = false;
  std::vector<std::vector<double>> trajectory;
};

ReplicaOutcome run_replica(const IsingModel& ising, const SbParams& prm,
                           std::uint64_t replica_seed, bool record) {
  const int n = ising.n;
  Rng rng(replica_seed);
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  std::vector<char> clamped(static_cast<std::size_t>(n), 0);
  for (auto& v : x) v = rng.uniform(-prm.init_amplitude, prm.init_amplitude);
  for (auto& v : y) v = rng.uniform(-prm.init_amplitude, prm.init_amplitude);

  ReplicaOutcome out;
  constexpr double kClamp = 10.0;
  const double ramp = prm.steps > 1
                          ? (prm.pump_end - prm.pump_start) / static_cast<double>(prm.steps - 1)
                          : 0.0;
  std::vector<double> force(static_cast<std::size_t>(n));
  for (int k = 0; k < prm.steps; ++k) {
    const double pump = prm.steps > 1 ? prm.pump_start + ramp * static_cast<double>(k)
                                      : prm.pump_end;
    for (int i = 0; i < n; ++i) {
      double jx = 0;
      const double* row = &ising.coupling[static_cast<std::size_t>(i) * n];
      for (int j = 0; j < n; ++j) jx += row[j] * x[static_cast<std::size_t>(j)];
      const double xi = x[static_cast<std::size_t>(i)];
      force[static_cast<std::size_t>(i)] =
          -prm.kerr * xi * xi * xi + (pump - prm.detuning) * xi +
          prm.coupling * (jx + ising.field[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] += prm.dt * force[static_cast<std::size_t>(i)];
      x[static_cast<std::size_t>(i)] += prm.dt * prm.detuning * y[static_cast<std::size_t>(i)];
      if (std::abs(x[static_cast<std::size_t>(i)]) > kClamp) {
        x[static_cast<std::size_t>(i)] = std::copysign(kClamp, x[static_cast<std::size_t>(i)]);
        y[static_cast<std::size_t>(i)] = 0;
        clamped[static_cast<std::size_t>(i)] = 1;
      }
    }
    if (record && (k % prm.trajectory_stride == 0 || k + 1 == prm.steps))
      out.trajectory.push_back(x);
  }

  out.spins.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.spins[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] < 0 ? -1 : 1;
  out.energy = energy(ising, out.spins);
  out.diverged = std::all_of(clamped.begin(), clamped.end(), [](char c) { return c != 0; });
  return out;
}

}  // namespace

SbResult run(const IsingModel& ising, const SbParams& params) {
  if (ising.n < 1) fail(ErrorCode::InvalidInput, "empty Ising model");
  if (params.kerr <= 0 || params.detuning <= 0 || params.dt <= 0 ||
      params.steps < 1 || params.replicas < 1)
    fail(ErrorCode::InvalidInput, "SB parameters out of range");
  if (params.pump_end < params.detuning)
    fail(ErrorCode::InvalidInput, "pump must reach the detuning to bifurcate");

  std::vector<ReplicaOutcome> outcomes(static_cast<std::size_t>(params.replicas));
  parallel_for(static_cast<std::size_t>(params.replicas), [&](std::size_t r) {
    outcomes[r] = run_replica(ising, params, mix_seed(params.seed, r),
                              params.record_trajectory && r == 0);
  });

  SbResult res;
  res.replica_energies.reserve(outcomes.size());
  res.replica_spins.reserve(outcomes.size());
  int best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    res.replica_energies.push_back(outcomes[r].energy);
    res.replica_spins.push_back(outcomes[r].spins);
    if (outcomes[r].diverged) ++res.diverged_replicas;
    if (outcomes[r].energy < outcomes[static_cast<std::size_t>(best)].energy)
      best = static_cast<int>(r);
  }
  if (res.diverged_replicas == params.replicas)
    fail(ErrorCode::Instability,
         "all SB replicas diverged; reduce dt or the coupling strength");
  res.best_replica = best;
  res.best_spins = outcomes[static_cast<std::size_t>(best)].spins;
  res.best_energy = outcomes[static_cast<std::size_t>(best)].energy;
  res.trajectory = std::move(outcomes[0].trajectory);
  return res;
}

}  // namespace qhdalm
