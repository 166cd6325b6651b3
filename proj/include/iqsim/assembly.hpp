// assembly.hpp: thermal summation of sector amplitudes into reduced system blocks.
//
// A block is Tr_E[U_L (ρ0 ⊗ ρ_E) U_R†] where U_L and U_R may couple a qubit to different
// baths. A bath touched by both sides must be left in the same Fock state by both; a bath
// touched by one side only must return to its initial level, which leaves only the
// components that did not exchange with it. Every block is linear in ρ0 and is stored as
// a transfer map T with out(x,y) = Σ T[(x,y),(a,b)] ρ0(a,b).

#pragma once

#include "iqsim/bath.hpp"
#include "iqsim/core.hpp"
#include "iqsim/sector.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace iqsim {

class TransferMap {
 public:
  TransferMap() = default;
  explicit TransferMap(int dim) : dim_(dim), T_(Matrix::Zero(dim * dim, dim * dim)) {}
  TransferMap(int dim, Matrix T) : dim_(dim), T_(std::move(T)) {
    if (T_.rows() != dim * dim || T_.cols() != dim * dim)
      throw std::invalid_argument("TransferMap: matrix shape mismatch");
  }

  static TransferMap identity(int dim) { return TransferMap(dim, Matrix::Identity(dim * dim, dim * dim)); }

  int dim() const noexcept { return dim_; }
  const Matrix& matrix() const noexcept { return T_; }
  cd& at(int x, int y, int a, int b) { return T_(x * dim_ + y, a * dim_ + b); }
  cd at(int x, int y, int a, int b) const { return T_(x * dim_ + y, a * dim_ + b); }

  Matrix apply(const Matrix& rho0) const {
    if (rho0.rows() != dim_ || rho0.cols() != dim_) throw std::invalid_argument("TransferMap: input dimension");
    Vector v(dim_ * dim_);
    for (int a = 0; a < dim_; ++a)
      for (int b = 0; b < dim_; ++b) v(a * dim_ + b) = rho0(a, b);
    const Vector w = T_ * v;
    Matrix out(dim_, dim_);
    for (int x = 0; x < dim_; ++x)
      for (int y = 0; y < dim_; ++y) out(x, y) = w(x * dim_ + y);
    return out;
  }

  TransferMap& operator+=(const TransferMap& o) {
    T_ += o.T_;
    return *this;
  }
  TransferMap operator*(cd s) const { return TransferMap(dim_, T_ * s); }
  friend TransferMap operator+(TransferMap a, const TransferMap& b) { return a += b; }

  // Map for the swapped-index block: block(i',i,j',j) = block(i,i',j,j')†.
  TransferMap adjoint_block() const {
    TransferMap out(dim_);
    for (int x = 0; x < dim_; ++x)
      for (int y = 0; y < dim_; ++y)
        for (int a = 0; a < dim_; ++a)
          for (int b = 0; b < dim_; ++b) out.at(x, y, a, b) = std::conj(at(y, x, b, a));
    return out;
  }

 private:
  int dim_{0};
  Matrix T_;
};

namespace detail {

struct ComponentMeta {
  int x;    // basis index reached
  int dn1;  // Fock shift of bath 1
  int dn2;  // Fock shift of bath 2
};

inline const std::array<std::array<ComponentMeta, 4>, 4>& two_qubit_meta() {
  static const auto meta = [] {
    std::array<std::array<ComponentMeta, 4>, 4> m{};
    for (int f = 0; f < 4; ++f)
      for (int c = 0; c < 4; ++c) {
        const auto st = component_state(static_cast<Family>(f), c, {1, 1});
        m[f][c] = {two_qubit_index(st.q1, st.q2), st.n1 - 1, st.n2 - 1};
      }
    return m;
  }();
  return meta;
}

inline const std::array<std::array<ComponentMeta, 2>, 2>& single_qubit_meta() {
  static const auto meta = [] {
    std::array<std::array<ComponentMeta, 2>, 2> m{};
    for (int f = 0; f < 2; ++f)
      for (int c = 0; c < 2; ++c) {
        const auto st = single_component_state(static_cast<SingleFamily>(f), c, 1);
        m[f][c] = {qubit_index(st.q1), st.n1 - 1, 0};
      }
    return m;
  }();
  return meta;
}

inline bool same_bath(const BathSpec& a, const BathSpec& b) { return a.same_dynamics(b) && a.beta == b.beta; }

inline void require_same_time(double a, double b) {
  if (a != b) throw std::invalid_argument("block assembly: tables evaluated at different times");
}

inline void require_shared(const BathSpec& a, const BathSpec& b, const char* what) {
  if (!same_bath(a, b)) throw std::invalid_argument(std::string("block assembly: shared bath mismatch (") + what + ")");
}

inline void require_compatible(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R) {
  require_same_time(L.t(), R.t());
  if (L.N() != R.N()) throw std::invalid_argument("block assembly: bath sizes differ");
}

}  // namespace detail

// Both baths shared (i = i', j = j'). L and R normally come from the same table; passing
// two tables allows left/right dynamics that differ only in J.
inline TransferMap case_a_map(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R) {
  detail::require_compatible(L, R);
  detail::require_shared(L.params().bath1, R.params().bath1, "qubit-1 bath");
  detail::require_shared(L.params().bath2, R.params().bath2, "qubit-2 bath");
  const auto& meta = detail::two_qubit_meta();
  const auto p1 = thermal_distribution(L.params().bath1);
  const auto p2 = thermal_distribution(L.params().bath2);
  const int N = L.N();
  TransferMap T(4);
  for (int n1 = 0; n1 <= N; ++n1)
    for (int n2 = 0; n2 <= N; ++n2) {
      const double w = p1[n1] * p2[n2];
      if (w == 0.0) continue;
      for (int a = 0; a < 4; ++a) {
        const auto& la = L.physical(static_cast<Family>(a), n1, n2);
        for (int b = 0; b < 4; ++b) {
          const auto& rb = R.physical(static_cast<Family>(b), n1, n2);
          for (int c = 0; c < 4; ++c) {
            if (la[c] == 0.0) continue;
            const auto& mc = meta[a][c];
            for (int d = 0; d < 4; ++d) {
              const auto& md = meta[b][d];
              if (mc.dn1 != md.dn1 || mc.dn2 != md.dn2) continue;
              T.at(mc.x, md.x, a, b) += w * la[c] * std::conj(rb[d]);
            }
          }
        }
      }
    }
  return T;
}

inline TransferMap case_a_map(const TwoQubitAmplitudeTable& table) { return case_a_map(table, table); }

namespace detail {

// One shared bath, the other bath returning on each side. `shared` is 1 or 2.
inline TransferMap case_b_factorized(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R, int shared) {
  require_compatible(L, R);
  if (shared == 1)
    require_shared(L.params().bath1, R.params().bath1, "qubit-1 bath");
  else
    require_shared(L.params().bath2, R.params().bath2, "qubit-2 bath");
  const auto& meta = two_qubit_meta();
  const int N = L.N();
  const auto ps = thermal_distribution(shared == 1 ? L.params().bath1 : L.params().bath2);
  const auto pl = thermal_distribution(shared == 1 ? L.params().bath2 : L.params().bath1);
  const auto pr = thermal_distribution(shared == 1 ? R.params().bath2 : R.params().bath1);
  // Components that leave the returning bath untouched: stay and the shared-side exchange.
  const std::array<int, 2> comps = shared == 1 ? std::array<int, 2>{0, 2} : std::array<int, 2>{0, 1};

  TransferMap T(4);
  for (int ns = 0; ns <= N; ++ns) {
    if (ps[ns] == 0.0) continue;
    std::array<std::array<cd, 2>, 4> SL{}, SR{};
    for (int m = 0; m <= N; ++m) {
      const int n1 = shared == 1 ? ns : m;
      const int n2 = shared == 1 ? m : ns;
      for (int a = 0; a < 4; ++a)
        for (int k = 0; k < 2; ++k) {
          if (pl[m] != 0.0) SL[a][k] += pl[m] * L.physical(static_cast<Family>(a), n1, n2)[comps[k]];
          if (pr[m] != 0.0) SR[a][k] += pr[m] * R.physical(static_cast<Family>(a), n1, n2)[comps[k]];
        }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) {
            const auto& mc = meta[a][comps[k]];
            const auto& md = meta[b][comps[l]];
            const int sc = shared == 1 ? mc.dn1 : mc.dn2;
            const int sd = shared == 1 ? md.dn1 : md.dn2;
            if (sc != sd) continue;
            T.at(mc.x, md.x, a, b) += ps[ns] * SL[a][k] * std::conj(SR[b][l]);
          }
  }
  return T;
}

}  // namespace detail

// Qubit-1 bath shared (i = i'), qubit-2 baths distinct (j ≠ j').
inline TransferMap case_b_map(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R) {
  return detail::case_b_factorized(L, R, 1);
}

// Qubit-2 bath shared (j = j'), qubit-1 baths distinct (i ≠ i').
inline TransferMap case_b_mirror_map(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R) {
  return detail::case_b_factorized(L, R, 2);
}

// No shared bath: only the stay component survives on either side and the sums factor
// into one double sum per side.
inline TransferMap case_c_map(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R) {
  detail::require_compatible(L, R);
  const int N = L.N();
  auto side = [N](const TwoQubitAmplitudeTable& tab) {
    const auto p1 = thermal_distribution(tab.params().bath1);
    const auto p2 = thermal_distribution(tab.params().bath2);
    std::array<cd, 4> s{};
    for (int n1 = 0; n1 <= N; ++n1)
      for (int n2 = 0; n2 <= N; ++n2) {
        const double w = p1[n1] * p2[n2];
        if (w == 0.0) continue;
        for (int a = 0; a < 4; ++a) s[a] += w * tab.physical(static_cast<Family>(a), n1, n2)[0];
      }
    return s;
  };
  const auto SL = side(L);
  const auto SR = side(R);
  TransferMap T(4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) T.at(a, b, a, b) = SL[a] * std::conj(SR[b]);
  return T;
}

// Reference sums over every bath label separately; O(N³) and O(N⁴). Testing only.
namespace naive {

inline TransferMap case_b_map(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R, int shared = 1) {
  detail::require_compatible(L, R);
  const auto& meta = detail::two_qubit_meta();
  const int N = L.N();
  const auto ps = thermal_distribution(shared == 1 ? L.params().bath1 : L.params().bath2);
  const auto pl = thermal_distribution(shared == 1 ? L.params().bath2 : L.params().bath1);
  const auto pr = thermal_distribution(shared == 1 ? R.params().bath2 : R.params().bath1);
  TransferMap T(4);
  for (int ns = 0; ns <= N; ++ns)
    for (int ml = 0; ml <= N; ++ml)
      for (int mr = 0; mr <= N; ++mr) {
        const double w = ps[ns] * pl[ml] * pr[mr];
        const int l1 = shared == 1 ? ns : ml, l2 = shared == 1 ? ml : ns;
        const int r1 = shared == 1 ? ns : mr, r2 = shared == 1 ? mr : ns;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
              for (int d = 0; d < 4; ++d) {
                const auto& mc = meta[a][c];
                const auto& md = meta[b][d];
                // Final shared level must agree; returning baths must be back at their start.
                const bool ok = shared == 1 ? (mc.dn1 == md.dn1 && mc.dn2 == 0 && md.dn2 == 0)
                                            : (mc.dn2 == md.dn2 && mc.dn1 == 0 && md.dn1 == 0);
                if (!ok) continue;
                T.at(mc.x, md.x, a, b) += w * L.physical(static_cast<Family>(a), l1, l2)[c] *
                                          std::conj(R.physical(static_cast<Family>(b), r1, r2)[d]);
              }
      }
  return T;
}

inline TransferMap case_c_map(const TwoQubitAmplitudeTable& L, const TwoQubitAmplitudeTable& R) {
  detail::require_compatible(L, R);
  const int N = L.N();
  const auto p1 = thermal_distribution(L.params().bath1);
  const auto p2 = thermal_distribution(L.params().bath2);
  const auto q1 = thermal_distribution(R.params().bath1);
  const auto q2 = thermal_distribution(R.params().bath2);
  TransferMap T(4);
  for (int n1 = 0; n1 <= N; ++n1)
    for (int n2 = 0; n2 <= N; ++n2)
      for (int m1 = 0; m1 <= N; ++m1)
        for (int m2 = 0; m2 <= N; ++m2) {
          const double w = p1[n1] * p2[n2] * q1[m1] * q2[m2];
          for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
              T.at(a, b, a, b) += w * L.physical(static_cast<Family>(a), n1, n2)[0] *
                                  std::conj(R.physical(static_cast<Family>(b), m1, m2)[0]);
        }
  return T;
}

}  // namespace naive

// Single qubit with its bath shared by both sides (diagonal path block).
inline TransferMap single_qubit_shared_map(const SingleQubitAmplitudeTable& L, const SingleQubitAmplitudeTable& R) {
  detail::require_same_time(L.t(), R.t());
  detail::require_shared(L.params().bath, R.params().bath, "single-qubit bath");
  const auto& meta = detail::single_qubit_meta();
  const auto p = thermal_distribution(L.params().bath);
  TransferMap T(2);
  for (int n = 0; n <= L.N(); ++n) {
    if (p[n] == 0.0) continue;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) {
            const auto& mc = meta[a][c];
            const auto& md = meta[b][d];
            if (mc.dn1 != md.dn1) continue;
            T.at(mc.x, md.x, a, b) += p[n] * L.physical(static_cast<SingleFamily>(a), n)[c] *
                                      std::conj(R.physical(static_cast<SingleFamily>(b), n)[d]);
          }
  }
  return T;
}

inline TransferMap single_qubit_shared_map(const SingleQubitAmplitudeTable& table) {
  return single_qubit_shared_map(table, table);
}

// Single qubit meeting different baths on the two sides (off-diagonal path block).
inline TransferMap single_qubit_returning_map(const SingleQubitAmplitudeTable& L, const SingleQubitAmplitudeTable& R) {
  detail::require_same_time(L.t(), R.t());
  if (L.N() != R.N()) throw std::invalid_argument("block assembly: bath sizes differ");
  auto side = [](const SingleQubitAmplitudeTable& tab) {
    const auto p = thermal_distribution(tab.params().bath);
    std::array<cd, 2> s{};
    for (int n = 0; n <= tab.N(); ++n)
      for (int a = 0; a < 2; ++a) s[a] += p[n] * tab.physical(static_cast<SingleFamily>(a), n)[0];
    return s;
  };
  const auto SL = side(L);
  const auto SR = side(R);
  TransferMap T(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) T.at(a, b, a, b) = SL[a] * std::conj(SR[b]);
  return T;
}

// ---- teleportation -----------------------------------------------------------------
//
// Control value 0 sends A through E0 and B through E1; value 1 swaps the baths. A and B
// do not interact, so every control block is built from the shared single-qubit maps
// T_e of the two baths. In the cross blocks each bath meets A on one side and B on the
// other, which ties A's left index to B's right index through the same map.

struct TeleportBlocks {
  // rho[c][c'] is the AB operator multiplying |c⟩⟨c'| of the control.
  std::array<std::array<Matrix, 2>, 2> rho;
};

inline Matrix product_map_apply(const TransferMap& TA, const TransferMap& TB, const Matrix& rho) {
  Matrix out = Matrix::Zero(4, 4);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int y1 = 0; y1 < 2; ++y1)
        for (int y2 = 0; y2 < 2; ++y2) {
          cd acc = 0.0;
          for (int a1 = 0; a1 < 2; ++a1)
            for (int a2 = 0; a2 < 2; ++a2)
              for (int b1 = 0; b1 < 2; ++b1)
                for (int b2 = 0; b2 < 2; ++b2)
                  acc += rho(2 * a1 + a2, 2 * b1 + b2) * TA.at(x1, y1, a1, b1) * TB.at(x2, y2, a2, b2);
          out(2 * x1 + x2, 2 * y1 + y2) = acc;
        }
  return out;
}

// Left side: A with bath `first`, B with `second`; right side swapped.
inline Matrix cross_map_apply(const TransferMap& T_first, const TransferMap& T_second, const Matrix& rho) {
  Matrix out = Matrix::Zero(4, 4);
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int y1 = 0; y1 < 2; ++y1)
        for (int y2 = 0; y2 < 2; ++y2) {
          cd acc = 0.0;
          for (int a1 = 0; a1 < 2; ++a1)
            for (int a2 = 0; a2 < 2; ++a2)
              for (int b1 = 0; b1 < 2; ++b1)
                for (int b2 = 0; b2 < 2; ++b2)
                  acc += rho(2 * a1 + a2, 2 * b1 + b2) * T_first.at(x1, y2, a1, b2) * T_second.at(x2, y1, a2, b1);
          out(2 * x1 + x2, 2 * y1 + y2) = acc;
        }
  return out;
}

inline Vector bell_phi_plus() {
  Vector v = Vector::Zero(4);
  v(two_qubit_index(1, 1)) = v(two_qubit_index(0, 0)) = 1.0 / std::sqrt(2.0);
  return v;
}

inline TeleportBlocks teleport_blocks(const SingleQubitAmplitudeTable& E0, const SingleQubitAmplitudeTable& E1,
                                      const Matrix& rhoAB0) {
  detail::require_same_time(E0.t(), E1.t());
  const TransferMap T0 = single_qubit_shared_map(E0);
  const TransferMap T1 = single_qubit_shared_map(E1);
  TeleportBlocks out;
  out.rho[0][0] = product_map_apply(T0, T1, rhoAB0);
  out.rho[1][1] = product_map_apply(T1, T0, rhoAB0);
  out.rho[0][1] = cross_map_apply(T0, T1, rhoAB0);
  out.rho[1][0] = cross_map_apply(T1, T0, rhoAB0);
  return out;
}

// ρ_ABC over A ⊗ B ⊗ C (control last) for control state c1|1⟩ + c0|0⟩ and a Bell pair.
inline Matrix assemble_teleport_state(cd c0, cd c1, const SingleQubitAmplitudeTable& E0,
                                      const SingleQubitAmplitudeTable& E1) {
  if (std::abs(std::norm(c0) + std::norm(c1) - 1.0) > 1e-12)
    throw std::invalid_argument("assemble_teleport_state: control amplitudes not normalized");
  const Vector phi = bell_phi_plus();
  const auto blocks = teleport_blocks(E0, E1, projector(phi));
  const std::array<cd, 2> amp{c0, c1};  // by control value
  Matrix rho = Matrix::Zero(8, 8);
  for (int c = 0; c < 2; ++c)
    for (int cp = 0; cp < 2; ++cp) {
      const cd k = amp[c] * std::conj(amp[cp]);
      for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
          rho(2 * x + qubit_index(c), 2 * y + qubit_index(cp)) += k * blocks.rho[c][cp](x, y);
    }
  return rho;
}

// ---- control ⊗ system (WPEI) ---------------------------------------------------------

// cos(α/2)|00⟩ + cos(θ/2)sin(α/2)|10⟩ + sin(θ/2)sin(α/2)|11⟩, control first.
inline Vector wpei_initial_state(double alpha, double theta) {
  Vector v = Vector::Zero(4);
  v(two_qubit_index(0, 0)) = std::cos(alpha / 2);
  v(two_qubit_index(1, 0)) = std::cos(theta / 2) * std::sin(alpha / 2);
  v(two_qubit_index(1, 1)) = std::sin(theta / 2) * std::sin(alpha / 2);
  return v;
}

// Control value c couples the system qubit to bath E_c.
inline Matrix assemble_control_system_state(const Vector& psi0, const SingleQubitAmplitudeTable& E0,
                                            const SingleQubitAmplitudeTable& E1) {
  if (psi0.size() != 4) throw std::invalid_argument("assemble_control_system_state: need a two-qubit state");
  if (std::abs(psi0.squaredNorm() - 1.0) > 1e-12)
    throw std::invalid_argument("assemble_control_system_state: state not normalized");
  detail::require_same_time(E0.t(), E1.t());
  const std::array<const SingleQubitAmplitudeTable*, 2> tab{&E0, &E1};
  const Matrix rho0 = projector(psi0);
  Matrix rho = Matrix::Zero(4, 4);
  for (int c = 0; c < 2; ++c)
    for (int cp = 0; cp < 2; ++cp) {
      const int ic = qubit_index(c), icp = qubit_index(cp);
      const Matrix sub = rho0.block(2 * ic, 2 * icp, 2, 2);
      const TransferMap T = c == cp ? single_qubit_shared_map(*tab[c]) : single_qubit_returning_map(*tab[c], *tab[cp]);
      rho.block(2 * ic, 2 * icp, 2, 2) = T.apply(sub);
    }
  return rho;
}

}  // namespace iqsim
