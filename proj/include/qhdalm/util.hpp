#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace qhdalm {

enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  EvaluationOverflow,
  GradientSingularity,
  Routing,
  Surrogate,
  StepSize,
  Instability,
  Singularity,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives independent sub-stream seeds (per replica, per outer iteration, ...)
// from one master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a,
                              std::uint64_t b = 0) {
  return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) +
                    splitmix64(a + 0x510e527fade682d1ULL) + b);
}

// mt19937_64 with hand-rolled variate mappings. The standard distributions
// are implementation-defined, which would break byte-identical reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(bits() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::size_t index(std::size_t n) {
    if (n == 0) fail(ErrorCode::InvalidInput, "Rng::index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = bits();
    while (v >= limit) v = bits();
    return static_cast<std::size_t>(v % n);
  }

  // Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

// Thread count for the slot-parallel regions (SB replicas, candidate
// refinement). Overridable via QHDALM_THREADS.
unsigned thread_count();

// Runs fn(i) for i in [0, n). Results must be written to disjoint
// preallocated slots; the schedule is then irrelevant to the output.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

class Stopwatch {
 public:
  Stopwatch();
  double elapsed_ms() const;
  void restart();

 private:
  std::uint64_t t0_ns_;
};

}  // namespace qhdalm
