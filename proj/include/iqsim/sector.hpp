// sector.hpp: dressed-sector generators and exact propagation of the c-number amplitudes.
//
// After the Holstein-Primakoff mapping each qubit exchanges excitations only with its own
// bath, so (qubit excitation + bath Fock number) is conserved per qubit and the dynamics
// closes on small invariant sectors. A two-qubit sector started from |q1 q2; n1, n2⟩ holds
// four physical states, labeled by which qubits have exchanged an excitation:
//
//   component   |11⟩ start          |10⟩ start          |01⟩ start          |00⟩ start
//   0 stay      A1  |11;n1,n2⟩      J1  |10;n1,n2⟩      G1  |01;n1,n2⟩      D1  |00;n1,n2⟩
//   1 qubit 2   B1  |10;n1,n2+1⟩    K1  |11;n1,n2−1⟩    H1  |00;n1,n2+1⟩    E1  |01;n1,n2−1⟩
//   2 qubit 1   C1  |01;n1+1,n2⟩    L1  |00;n1+1,n2⟩    I1  |11;n1−1,n2⟩    F1  |10;n1−1,n2⟩
//   3 both      X1  |00;n1+1,n2+1⟩  |01;n1+1,n2−1⟩      |10;n1−1,n2+1⟩      |11;n1−1,n2−1⟩
//
// The c-number amplitude of a component is its physical amplitude divided by the square
// root of its ladder weight (n+1 for a raised bath, n for a lowered one), e.g. B = a2†B1.
// Component 3 is reached by two successive exchanges; SectorModel::ThreeState drops it.

#pragma once

#include "iqsim/bath.hpp"
#include "iqsim/core.hpp"
#include "iqsim/parallel.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

namespace iqsim {

enum class SectorModel { Exact, ThreeState };

struct TwoQubitParams {
  double omega1{0.0};
  double omega2{0.0};
  double J{0.0};
  BathSpec bath1;
  BathSpec bath2;
  SectorModel model{SectorModel::Exact};

  void validate() const {
    bath1.validate();
    bath2.validate();
    if (bath1.N != bath2.N) throw std::invalid_argument("TwoQubitParams: baths must share N");
  }
};

struct SingleQubitParams {
  double omega{0.0};
  BathSpec bath;
};

struct SectorIndex {
  int n1{0};
  int n2{0};
};

// Amplitude families, indexed by the two-qubit basis index of their start state.
enum class Family : int { UpUp = 0, UpDown = 1, DownUp = 2, DownDown = 3 };
// Single-qubit families: start |1⟩ → (A1, B1), start |0⟩ → (C1, D1).
enum class SingleFamily : int { Up = 0, Down = 1 };

inline constexpr int kTwoQubitComponents = 4;
inline constexpr int kSingleQubitComponents = 2;

template <int D>
struct SectorGenerator {
  Eigen::Matrix<double, D, D> K;       // c-number generator: dv/dt = −iK v
  Eigen::Matrix<double, D, D> S;       // the same generator on physical amplitudes (symmetric)
  Eigen::Matrix<double, D, 1> weight;  // ladder weights of the c-number components
};

// Physical state of one sector component.
struct ComponentState {
  int q1{0}, q2{0};  // qubit values
  int n1{0}, n2{0};  // bath Fock labels (may leave 0..N on closed edges)
  double weight{1.0};
};

namespace detail {

inline double exchange_coupling(double f, int m, int N) {
  // ⟨up, m| H_I |down, m+1⟩ with m the bath label of the qubit-up state.
  const double a = std::max(0.0, static_cast<double>(m + 1));
  const double b = std::max(0.0, 1.0 - static_cast<double>(m) / N);
  return f * std::sqrt(a) * std::sqrt(b);
}

inline int flip_shift(int q) { return q == 1 ? +1 : -1; }
inline double flip_weight(int q, int n) { return q == 1 ? n + 1.0 : static_cast<double>(n); }

// Exact propagation data for one sector: physical amplitude of component c at time t is
// Σ_k coef[c][k] exp(−iλ_k t). Only components reachable from the start state enter the
// eigendecomposition, so closed channels stay exactly zero.
template <int D>
struct SectorSpectrum {
  std::array<double, D> lambda{};
  std::array<std::array<double, D>, D> coef{};

  std::array<cd, D> physical(double t) const {
    std::array<cd, D> phase;
    for (int k = 0; k < D; ++k) phase[k] = std::polar(1.0, -lambda[k] * t);
    std::array<cd, D> out{};
    for (int c = 0; c < D; ++c) {
      cd acc = 0.0;
      for (int k = 0; k < D; ++k) acc += coef[c][k] * phase[k];
      out[c] = acc;
    }
    return out;
  }
};

template <int D>
SectorSpectrum<D> sector_spectrum(const Eigen::Matrix<double, D, D>& S) {
  std::array<int, D> reach{};
  std::array<bool, D> seen{};
  int m = 0;
  reach[m++] = 0;
  seen[0] = true;
  for (int head = 0; head < m; ++head)
    for (int c = 0; c < D; ++c)
      if (!seen[c] && S(reach[head], c) != 0.0) {
        seen[c] = true;
        reach[m++] = c;
      }

  using Sub = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, D, D>;
  Sub sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) sub(a, b) = S(reach[a], reach[b]);
  Eigen::SelfAdjointEigenSolver<Sub> es(sub);

  SectorSpectrum<D> out;
  for (int k = 0; k < m; ++k) {
    out.lambda[k] = es.eigenvalues()(k);
    for (int a = 0; a < m; ++a)
      out.coef[reach[a]][k] = es.eigenvectors()(a, k) * es.eigenvectors()(0, k);
  }
  return out;
}

}  // namespace detail

inline ComponentState component_state(Family family, int component, SectorIndex sector) {
  const int start = static_cast<int>(family);
  ComponentState st{1 - (start >> 1), 1 - (start & 1), sector.n1, sector.n2, 1.0};
  if (component & 1) {
    st.weight *= detail::flip_weight(st.q2, st.n2);
    st.n2 += detail::flip_shift(st.q2);
    st.q2 = 1 - st.q2;
  }
  if (component & 2) {
    st.weight *= detail::flip_weight(st.q1, st.n1);
    st.n1 += detail::flip_shift(st.q1);
    st.q1 = 1 - st.q1;
  }
  return st;
}

inline SectorGenerator<4> build_generator(Family family, SectorIndex sector, const TwoQubitParams& p) {
  const int N = p.bath1.N;
  if (sector.n1 < 0 || sector.n1 > N || sector.n2 < 0 || sector.n2 > N)
    throw std::domain_error("build_generator: sector label out of range");

  std::array<ComponentState, 4> st;
  for (int c = 0; c < 4; ++c) st[c] = component_state(family, c, sector);

  SectorGenerator<4> g;
  g.S.setZero();
  for (int c = 0; c < 4; ++c) {
    const double z1 = st[c].q1 == 1 ? 1.0 : -1.0;
    const double z2 = st[c].q2 == 1 ? 1.0 : -1.0;
    g.S(c, c) = -p.J * z1 * z2 + p.omega1 * z1 + p.omega2 * z2 +
                detail::level_energy_raw(st[c].n1, N, p.bath1.s) +
                detail::level_energy_raw(st[c].n2, N, p.bath2.s);
    g.weight(c) = st[c].weight;
  }
  // Single exchanges connect components whose labels differ in one bit.
  for (int c = 0; c < 4; ++c)
    for (int d = c + 1; d < 4; ++d) {
      const int diff = c ^ d;
      if (diff != 1 && diff != 2) continue;
      if (p.model == SectorModel::ThreeState && (c == 3 || d == 3)) continue;
      double coupling;
      if (diff == 1) {
        const auto& up = st[c].q2 == 1 ? st[c] : st[d];
        coupling = detail::exchange_coupling(p.bath2.f, up.n2, N);
      } else {
        const auto& up = st[c].q1 == 1 ? st[c] : st[d];
        coupling = detail::exchange_coupling(p.bath1.f, up.n1, N);
      }
      g.S(c, d) = g.S(d, c) = coupling;
    }
  // K = W^{-1/2} S W^{1/2}; rows of closed (zero-weight) channels vanish.
  for (int c = 0; c < 4; ++c)
    for (int d = 0; d < 4; ++d)
      g.K(c, d) = g.weight(c) > 0.0 ? g.S(c, d) * std::sqrt(g.weight(d) / g.weight(c)) : 0.0;
  return g;
}

inline SectorGenerator<4> build_generator_abc(SectorIndex sector, const TwoQubitParams& p) {
  return build_generator(Family::UpUp, sector, p);
}

inline ComponentState single_component_state(SingleFamily family, int component, int n) {
  const int q = family == SingleFamily::Up ? 1 : 0;
  if (component == 0) return {q, 0, n, 0, 1.0};
  return {1 - q, 0, n + detail::flip_shift(q), 0, detail::flip_weight(q, n)};
}

inline SectorGenerator<2> build_single_qubit_generator(SingleFamily family, int n, const SingleQubitParams& p) {
  const int N = p.bath.N;
  if (n < 0 || n > N) throw std::domain_error("build_single_qubit_generator: Fock label out of range");
  SectorGenerator<2> g;
  g.S.setZero();
  std::array<ComponentState, 2> st{single_component_state(family, 0, n), single_component_state(family, 1, n)};
  for (int c = 0; c < 2; ++c) {
    const double z = st[c].q1 == 1 ? 1.0 : -1.0;
    g.S(c, c) = p.omega * z + detail::level_energy_raw(st[c].n1, N, p.bath.s);
    g.weight(c) = st[c].weight;
  }
  const auto& up = st[0].q1 == 1 ? st[0] : st[1];
  g.S(0, 1) = g.S(1, 0) = detail::exchange_coupling(p.bath.f, up.n1, N);
  for (int c = 0; c < 2; ++c)
    for (int d = 0; d < 2; ++d)
      g.K(c, d) = g.weight(c) > 0.0 ? g.S(c, d) * std::sqrt(g.weight(d) / g.weight(c)) : 0.0;
  return g;
}

// Excited-sector and ground-sector generators for bath level n.
inline std::pair<SectorGenerator<2>, SectorGenerator<2>> build_single_qubit_generators(int n, const SingleQubitParams& p) {
  return {build_single_qubit_generator(SingleFamily::Up, n, p), build_single_qubit_generator(SingleFamily::Down, n, p)};
}

// c-number amplitudes exp(−iKt)·e0 via the symmetric form S = W^{1/2} K W^{-1/2}.
template <int D>
Eigen::Matrix<cd, D, 1> propagate_sector(const SectorGenerator<D>& g, double t) {
  if (t < 0.0) throw std::domain_error("propagate_sector: t must be >= 0");
  const auto phys = detail::sector_spectrum<D>(g.S).physical(t);
  Eigen::Matrix<cd, D, 1> v;
  for (int c = 0; c < D; ++c) v(c) = g.weight(c) > 0.0 ? phys[c] / std::sqrt(g.weight(c)) : cd{0.0};
  return v;
}

// Amplitudes of every sector and family at one time. Stores physical amplitudes.
class TwoQubitAmplitudeTable {
 public:
  TwoQubitAmplitudeTable(TwoQubitParams params, double t)
      : params_(std::move(params)), t_(t), side_(params_.bath1.N + 1), data_(4 * side_ * side_) {}

  const TwoQubitParams& params() const noexcept { return params_; }
  int N() const noexcept { return params_.bath1.N; }
  double t() const noexcept { return t_; }

  const std::array<cd, 4>& physical(Family f, int n1, int n2) const {
    return data_[offset(static_cast<int>(f), n1, n2)];
  }
  std::array<cd, 4>& physical_mut(int family, int n1, int n2) { return data_[offset(family, n1, n2)]; }

  cd cnumber(Family f, int n1, int n2, int component) const {
    const double w = component_state(f, component, {n1, n2}).weight;
    return w > 0.0 ? physical(f, n1, n2)[component] / std::sqrt(w) : cd{0.0};
  }

 private:
  std::size_t offset(int f, int n1, int n2) const {
    return (static_cast<std::size_t>(f) * side_ + n1) * side_ + n2;
  }

  TwoQubitParams params_;
  double t_;
  std::size_t side_;
  std::vector<std::array<cd, 4>> data_;
};

class SingleQubitAmplitudeTable {
 public:
  SingleQubitAmplitudeTable(SingleQubitParams params, double t)
      : params_(std::move(params)), t_(t), side_(params_.bath.N + 1), data_(2 * side_) {}

  const SingleQubitParams& params() const noexcept { return params_; }
  int N() const noexcept { return params_.bath.N; }
  double t() const noexcept { return t_; }

  const std::array<cd, 2>& physical(SingleFamily f, int n) const {
    return data_[static_cast<std::size_t>(f) * side_ + n];
  }
  std::array<cd, 2>& physical_mut(int family, int n) { return data_[family * side_ + n]; }

  cd cnumber(SingleFamily f, int n, int component) const {
    const double w = single_component_state(f, component, n).weight;
    return w > 0.0 ? physical(f, n)[component] / std::sqrt(w) : cd{0.0};
  }

 private:
  SingleQubitParams params_;
  double t_;
  std::size_t side_;
  std::vector<std::array<cd, 2>> data_;
};

// Time-independent part of the solution: one eigendecomposition per sector, reused for
// every time point.
class TwoQubitSpectra {
 public:
  explicit TwoQubitSpectra(TwoQubitParams params) : params_(std::move(params)) {
    params_.validate();
    const int side = params_.bath1.N + 1;
    spectra_.resize(4 * static_cast<std::size_t>(side) * side);
    parallel_for(spectra_.size(), [&](std::size_t idx) {
      const int f = static_cast<int>(idx / (side * side));
      const int n1 = static_cast<int>((idx / side) % side);
      const int n2 = static_cast<int>(idx % side);
      spectra_[idx] = detail::sector_spectrum<4>(build_generator(static_cast<Family>(f), {n1, n2}, params_).S);
    });
  }

  const TwoQubitParams& params() const noexcept { return params_; }

  TwoQubitAmplitudeTable table(double t) const {
    if (t < 0.0) throw std::domain_error("amplitude table: t must be >= 0");
    TwoQubitAmplitudeTable out(params_, t);
    const int side = params_.bath1.N + 1;
    parallel_for(spectra_.size(), [&](std::size_t idx) {
      const int f = static_cast<int>(idx / (side * side));
      const int n1 = static_cast<int>((idx / side) % side);
      const int n2 = static_cast<int>(idx % side);
      out.physical_mut(f, n1, n2) = spectra_[idx].physical(t);
    });
    return out;
  }

 private:
  TwoQubitParams params_;
  std::vector<detail::SectorSpectrum<4>> spectra_;
};

class SingleQubitSpectra {
 public:
  explicit SingleQubitSpectra(SingleQubitParams params) : params_(std::move(params)) {
    params_.bath.validate();
    const int side = params_.bath.N + 1;
    spectra_.resize(2 * static_cast<std::size_t>(side));
    for (int f = 0; f < 2; ++f)
      for (int n = 0; n < side; ++n)
        spectra_[f * side + n] =
            detail::sector_spectrum<2>(build_single_qubit_generator(static_cast<SingleFamily>(f), n, params_).S);
  }

  const SingleQubitParams& params() const noexcept { return params_; }

  SingleQubitAmplitudeTable table(double t) const {
    if (t < 0.0) throw std::domain_error("amplitude table: t must be >= 0");
    SingleQubitAmplitudeTable out(params_, t);
    const int side = params_.bath.N + 1;
    for (int f = 0; f < 2; ++f)
      for (int n = 0; n < side; ++n) out.physical_mut(f, n) = spectra_[f * side + n].physical(t);
    return out;
  }

 private:
  SingleQubitParams params_;
  std::vector<detail::SectorSpectrum<2>> spectra_;
};

inline TwoQubitAmplitudeTable compute_amplitude_table(const TwoQubitParams& p, double t) {
  return TwoQubitSpectra(p).table(t);
}

inline SingleQubitAmplitudeTable compute_amplitude_table(const SingleQubitParams& p, double t) {
  return SingleQubitSpectra(p).table(t);
}

}  // namespace iqsim
