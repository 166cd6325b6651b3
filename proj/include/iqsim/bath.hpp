// bath.hpp: a single collective-spin bath in the Holstein-Primakoff (Fock) picture.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace iqsim {

struct BathSpec {
  int N{1};          // bath qubits; Fock levels run over 0..N
  double s{0.0};     // intra-bath coupling
  double f{0.0};     // system-bath coupling
  double beta{0.0};  // inverse temperature; +infinity means zero temperature

  // T = 0 maps onto the zero-temperature flag.
  static BathSpec at_temperature(int N, double s, double f, double T) {
    if (T < 0.0) throw std::invalid_argument("BathSpec: temperature must be nonnegative");
    const double beta = T == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / T;
    return BathSpec{N, s, f, beta};
  }

  bool zero_temperature() const noexcept { return std::isinf(beta); }

  void validate() const {
    if (N < 1) throw std::invalid_argument("BathSpec: N must be >= 1");
    if (!(beta >= 0.0)) throw std::invalid_argument("BathSpec: beta must be >= 0");
  }

  bool same_dynamics(const BathSpec& o) const noexcept { return N == o.N && s == o.s && f == o.f; }
};

namespace detail {
// ε(n) without range checks; sector builders evaluate it on fictitious edge states whose
// couplings vanish.
inline double level_energy_raw(int n, int N, double s) {
  const double nn = n;
  return s * (nn * (1.0 - (nn - 1.0) / N) - 0.5);
}
}  // namespace detail

inline double level_energy(int n, const BathSpec& bath) {
  if (n < 0 || n > bath.N) throw std::domain_error("level_energy: Fock label out of range");
  return detail::level_energy_raw(n, bath.N, bath.s);
}

inline double thermal_weight(int n, const BathSpec& bath) {
  if (n < 0 || n > bath.N) throw std::domain_error("thermal_weight: Fock label out of range");
  if (bath.zero_temperature()) return n == 0 ? 1.0 : 0.0;
  if (bath.beta == 0.0) return 1.0;
  return std::exp(-bath.beta * level_energy(n, bath));
}

inline double partition_function(const BathSpec& bath) {
  double z = 0.0;
  for (int n = 0; n <= bath.N; ++n) z += thermal_weight(n, bath);
  return z;
}

// Normalized occupation probabilities p(n), n = 0..N, evaluated in log space.
inline std::vector<double> thermal_distribution(const BathSpec& bath) {
  bath.validate();
  std::vector<double> p(bath.N + 1, 0.0);
  if (bath.zero_temperature()) {
    p[0] = 1.0;
    return p;
  }
  double emin = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= bath.N; ++n) emin = std::min(emin, level_energy(n, bath));
  double z = 0.0;
  for (int n = 0; n <= bath.N; ++n) {
    p[n] = std::exp(-bath.beta * (level_energy(n, bath) - emin));
    z += p[n];
  }
  for (double& v : p) v /= z;
  return p;
}

}  // namespace iqsim
