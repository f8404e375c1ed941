#pragma once

#include <cstdint>
#include <vector>

#include "qhdalm/embedding.hpp"

namespace qhdalm {

struct SbParams {
  double kerr = 1.0;          // K > 0
  double detuning = 1.0;      // shared Delta > 0
  double coupling = 0.5;      // xi0
  double pump_start = 0.0;
  double pump_end = 2.0;      // must reach at least the detuning
  double dt = 0.01;
  int steps = 2000;
  int replicas = 32;
  std::uint64_t seed = 0;
  double init_amplitude = 0.1;  // x, y ~ uniform(-a0, a0)
  bool record_trajectory = false;
  int trajectory_stride = 8;
};

struct SbResult {
  SpinConfig best_spins;
  double best_energy = 0;
  int best_replica = 0;
  std::vector<double> replica_energies;
  std::vector<SpinConfig> replica_spins;
  // Downsampled position snapshots of replica 0 when recording is on.
  std::vector<std::vector<double>> trajectory;
  int diverged_replicas = 0;
};

// E = -1/2 s^T J s - h^T s + offset
double energy(const IsingModel& ising, const SpinConfig& s);

// Heuristic settings scaled to the instance; coupling strength is normalized
// by the coupling-matrix spread so the bifurcation competes with the
// interaction term at any size.
SbParams auto_params(const IsingModel& ising);

// Adiabatic SB: per replica, symplectic Euler on
//   y += dt * (-K x^3 + (p(t) - Delta) x + xi0 (J x + h))
//   x += dt * Delta * y
// with a linear pump ramp and sign readout at the final step.
SbResult run(const IsingModel& ising, const SbParams& params);

}  // namespace qhdalm
