// verify.hpp: oracle-backed self checks shared by `iqsim verify` and the acceptance run.

#pragma once

#include "iqsim/assembly.hpp"
#include "iqsim/oracle.hpp"
#include "iqsim/sector.hpp"

#include <chrono>
#include <random>
#include <string>
#include <vector>

namespace iqsim::verify {

struct CheckResult {
  std::string name;
  bool passed{false};
  double value{0.0};      // worst observed error
  double threshold{0.0};
  double seconds{0.0};
  std::string detail;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_{std::chrono::steady_clock::now()};
};

inline Matrix random_state(std::mt19937& rng, int d) {
  std::normal_distribution<double> g;
  Matrix A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = cd(g(rng), g(rng));
  Matrix rho = A * A.adjoint();
  return rho / rho.trace();
}

inline TwoQubitParams random_params(std::mt19937& rng, int N) {
  std::uniform_real_distribution<double> u(-1.5, 1.5), pos(0.2, 2.0), temp(0.1, 1.0);
  return {u(rng), u(rng), u(rng), {N, u(rng), pos(rng), 1.0 / temp(rng)}, {N, u(rng), pos(rng), 1.0 / temp(rng)}};
}

inline CheckResult finish(std::string name, double worst, double threshold, const Stopwatch& clock,
                          std::string detail = {}) {
  return {std::move(name), worst <= threshold, worst, threshold, clock.seconds(), std::move(detail)};
}

}  // namespace detail

// Case A/B/mirror/C blocks and the teleportation state against direct evolution.
inline CheckResult oracle_blocks(int draws, int N, unsigned seed = 2024) {
  detail::Stopwatch clock;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 2.0), sgn(-1.0, 1.0), temp(0.1, 1.0), ut(0.0, 5.0);
  double worst = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double w1 = u(rng), w2 = u(rng), s = sgn(rng), f = u(rng), t = ut(rng);
    std::array<double, 4> beta{};
    for (auto& b : beta) b = 1.0 / temp(rng);
    std::array<double, 4> J{};
    for (auto& j : J) j = sgn(rng);
    auto params = [&](double Jv, double b1, double b2) {
      return TwoQubitParams{w1, w2, Jv, {N, s, f, b1}, {N, s, f, b2}};
    };
    const auto pij = params(J[0], beta[0], beta[2]), pijp = params(J[1], beta[0], beta[3]);
    const auto pipj = params(J[2], beta[1], beta[2]), pipjp = params(J[3], beta[1], beta[3]);
    const auto Tij = compute_amplitude_table(pij, t), Tijp = compute_amplitude_table(pijp, t);
    const auto Tipj = compute_amplitude_table(pipj, t), Tipjp = compute_amplitude_table(pipjp, t);
    const Matrix rho = detail::random_state(rng, 4);
    auto err = [&](const Matrix& a, const Matrix& b) { worst = std::max(worst, max_abs_diff(a, b)); };
    err(case_a_map(Tij).apply(rho), oracle::two_qubit_block(rho, pij, 0, 2, pij, 0, 2, t));
    err(case_b_map(Tij, Tijp).apply(rho), oracle::two_qubit_block(rho, pij, 0, 2, pijp, 0, 3, t));
    err(case_b_mirror_map(Tij, Tipj).apply(rho), oracle::two_qubit_block(rho, pij, 0, 2, pipj, 1, 2, t));
    err(case_c_map(Tij, Tipjp).apply(rho), oracle::two_qubit_block(rho, pij, 0, 2, pipjp, 1, 3, t));

    const SingleQubitParams E0{w1, {N, s, f, beta[0]}}, E1{w1, {N, s, f, beta[1]}};
    const double th = std::acos(sgn(rng)), ph = 2.0 * M_PI * u(rng);
    const cd c0 = std::polar(std::sin(th / 2), ph), c1 = std::cos(th / 2);
    err(assemble_teleport_state(c0, c1, compute_amplitude_table(E0, t), compute_amplitude_table(E1, t)),
        oracle::teleport_state(c0, c1, E0, E1, t));
  }
  return detail::finish("oracle blocks (N=" + std::to_string(N) + ", " + std::to_string(draws) + " draws)", worst,
                        1e-9, clock);
}

// Weighted-norm laws of all two-qubit and single-qubit families.
inline CheckResult conservation(int sectors, unsigned seed = 7) {
  detail::Stopwatch clock;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, 20.0);
  double worst = 0.0;
  for (int k = 0; k < sectors; ++k) {
    const int N = 1 + static_cast<int>(rng() % 100);
    const auto p = detail::random_params(rng, N);
    const SectorIndex s{static_cast<int>(rng() % (N + 1)), static_cast<int>(rng() % (N + 1))};
    const SingleQubitParams q{p.omega1, p.bath1};
    for (int rep = 0; rep < 5; ++rep) {
      const double t = rep == 0 ? 20.0 : ut(rng);
      for (int f = 0; f < 4; ++f) {
        const auto g = build_generator(static_cast<Family>(f), s, p);
        const auto v = propagate_sector(g, t);
        double norm = 0.0;
        for (int c = 0; c < 4; ++c) norm += g.weight(c) * std::norm(v(c));
        worst = std::max(worst, std::abs(norm - 1.0));
      }
      for (int f = 0; f < 2; ++f) {
        const auto g = build_single_qubit_generator(static_cast<SingleFamily>(f), s.n1, q);
        const auto v = propagate_sector(g, t);
        double norm = 0.0;
        for (int c = 0; c < 2; ++c) norm += g.weight(c) * std::norm(v(c));
        worst = std::max(worst, std::abs(norm - 1.0));
      }
    }
  }
  return detail::finish("weighted-norm conservation (" + std::to_string(sectors) + " sectors)", worst, 1e-12, clock);
}

// Sector generators coincide with the collective-spin Hamiltonian and nothing leaks out.
inline CheckResult hp_exactness(int Nmax, unsigned seed = 23) {
  detail::Stopwatch clock;
  std::mt19937 rng(seed);
  double worst = 0.0;
  for (int N = 1; N <= Nmax; ++N) {
    const auto p = detail::random_params(rng, N);
    for (int f = 0; f < 4; ++f)
      for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = 0; n2 <= N; ++n2) {
          const auto fam = static_cast<Family>(f);
          const auto [sub, comps] = oracle::sector_submatrix(p, fam, {n1, n2});
          const auto g = build_generator(fam, {n1, n2}, p);
          for (std::size_t a = 0; a < comps.size(); ++a)
            for (std::size_t b = 0; b < comps.size(); ++b)
              worst = std::max(worst, std::abs(sub(a, b) - g.S(comps[a], comps[b])));
          worst = std::max(worst, oracle::sector_leakage(p, fam, {n1, n2}));
        }
  }
  return detail::finish("Holstein-Primakoff sectors exact (N<=" + std::to_string(Nmax) + ")", worst, 1e-10, clock);
}

// Sector amplitudes against the dense propagator.
inline CheckResult sector_amplitudes(int N, unsigned seed = 17) {
  detail::Stopwatch clock;
  std::mt19937 rng(seed);
  const auto p = detail::random_params(rng, N);
  const double t = 2.3;
  const Matrix U = oracle::DenseUnitary(oracle::dicke_hamiltonian(p)).at(t);
  const auto table = compute_amplitude_table(p, t);
  const int d = N + 1;
  double worst = 0.0;
  for (int f = 0; f < 4; ++f)
    for (int n1 = 0; n1 <= N; ++n1)
      for (int n2 = 0; n2 <= N; ++n2) {
        const auto fam = static_cast<Family>(f);
        const auto st0 = component_state(fam, 0, {n1, n2});
        const int col = (two_qubit_index(st0.q1, st0.q2) * d + n1) * d + n2;
        for (int c = 0; c < 4; ++c) {
          const auto st = component_state(fam, c, {n1, n2});
          if (st.n1 < 0 || st.n1 > N || st.n2 < 0 || st.n2 > N) continue;
          const cd ref = U((two_qubit_index(st.q1, st.q2) * d + st.n1) * d + st.n2, col);
          worst = std::max(worst, std::abs(ref - table.physical(fam, n1, n2)[c]));
        }
      }
  return detail::finish("sector amplitudes vs dense propagator (N=" + std::to_string(N) + ")", worst, 1e-10, clock);
}

// Adaptive Dormand-Prince integration of random sectors.
inline CheckResult ode_agreement(int trials, unsigned seed = 29) {
  detail::Stopwatch clock;
  std::mt19937 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const int N = 2 + static_cast<int>(rng() % 60);
    const auto p = detail::random_params(rng, N);
    const SectorIndex s{static_cast<int>(rng() % (N + 1)), static_cast<int>(rng() % (N + 1))};
    const auto g = build_generator(static_cast<Family>(k % 4), s, p);
    const auto v = propagate_sector(g, 20.0);
    const auto w = oracle::ode_cross_check<4>(g.K, 20.0, 1e-12);
    worst = std::max(worst, (v - w).cwiseAbs().maxCoeff());
  }
  return detail::finish("adaptive ODE cross-check (t=20)", worst, 1e-8, clock);
}

inline CheckResult thermal_state(int Nmax) {
  detail::Stopwatch clock;
  double worst = 0.0;
  for (int N = 1; N <= Nmax; ++N)
    for (double T : {0.1, 0.3, 0.8, 5.0}) {
      const BathSpec b = BathSpec::at_temperature(N, 0.5, 1.0, T);
      const auto orc = oracle::thermal_populations(b);
      const auto mine = thermal_distribution(b);
      for (int n = 0; n <= N; ++n) worst = std::max(worst, std::abs(orc[n] - mine[n]));
    }
  return detail::finish("thermal populations vs oracle", worst, 1e-14, clock);
}

inline std::vector<CheckResult> suite(bool full) {
  std::vector<CheckResult> out;
  out.push_back(thermal_state(full ? 8 : 4));
  out.push_back(hp_exactness(full ? 8 : 4));
  out.push_back(sector_amplitudes(full ? 6 : 3));
  out.push_back(ode_agreement(full ? 20 : 4));
  out.push_back(conservation(full ? 1000 : 100));
  out.push_back(oracle_blocks(full ? 20 : 3, full ? 4 : 3));
  return out;
}

}  // namespace iqsim::verify
