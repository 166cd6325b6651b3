// teleport.hpp: standard and participatory teleportation over ρ_ABC (control C last).
//
// Bell basis order on a qubit pair: Φ+ = (|11⟩+|00⟩)/√2, Φ− = (|11⟩−|00⟩)/√2,
// Ψ+ = (|01⟩+|10⟩)/√2, Ψ− = (|01⟩−|10⟩)/√2.

#pragma once

#include "iqsim/assembly.hpp"
#include "iqsim/core.hpp"
#include "iqsim/measures.hpp"

#include <array>
#include <numbers>
#include <string>
#include <vector>

namespace iqsim {

struct ProtocolOutcome {
  std::string label;
  double probability{0.0};
  Matrix state;
  double fidelity{0.0};
};

inline constexpr std::array<const char*, 4> kBellLabels{"Phi+", "Phi-", "Psi+", "Psi-"};

inline Vector bell_state(int k) {
  const double r = 1.0 / std::sqrt(2.0);
  Vector v = Vector::Zero(4);
  switch (k) {
    case 0: v(two_qubit_index(1, 1)) = r; v(two_qubit_index(0, 0)) = r; break;
    case 1: v(two_qubit_index(1, 1)) = r; v(two_qubit_index(0, 0)) = -r; break;
    case 2: v(two_qubit_index(0, 1)) = r; v(two_qubit_index(1, 0)) = r; break;
    case 3: v(two_qubit_index(0, 1)) = r; v(two_qubit_index(1, 0)) = -r; break;
    default: throw std::out_of_range("bell_state: k must be 0..3");
  }
  return v;
}

namespace detail {
inline void require_abc(const Matrix& rho) {
  if (rho.rows() != 8 || rho.cols() != 8) throw std::invalid_argument("teleport: need an 8x8 A⊗B⊗C state");
}
}  // namespace detail

// Unnormalized ⟨±|_C ρ_ABC |±⟩_C with |±⟩ = (|0⟩ ± |1⟩)/√2.
inline Matrix control_projection(const Matrix& rhoABC, int sign) {
  detail::require_abc(rhoABC);
  Vector c(2);
  c(qubit_index(0)) = 1.0 / std::sqrt(2.0);
  c(qubit_index(1)) = (sign >= 0 ? 1.0 : -1.0) / std::sqrt(2.0);
  Matrix out = Matrix::Zero(4, 4);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(x, y) += std::conj(c(k)) * rhoABC(2 * x + k, 2 * y + l) * c(l);
  return out;
}

inline ProtocolOutcome standard_protocol(const Matrix& rhoABC, int sign) {
  const Matrix un = control_projection(rhoABC, sign);
  ProtocolOutcome o;
  o.label = sign >= 0 ? "+" : "-";
  o.probability = un.trace().real();
  if (!(o.probability > tol::kErased)) throw ErasedStateError(o.probability);
  o.state = un / o.probability;
  o.fidelity = teleport_fidelity_max(o.state);
  return o;
}

// Projects (A, C) onto Bell state k; returns B's state and the branch probability.
inline std::pair<Matrix, double> bell_project(const Matrix& rhoABC, int k) {
  detail::require_abc(rhoABC);
  const Vector phi = bell_state(k);  // over (A, C)
  Matrix un = Matrix::Zero(2, 2);
  for (int yb = 0; yb < 2; ++yb)
    for (int zb = 0; zb < 2; ++zb) {
      cd acc = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
          for (int ap = 0; ap < 2; ++ap)
            for (int cp = 0; cp < 2; ++cp)
              acc += std::conj(phi(2 * a + c)) * rhoABC(4 * a + 2 * yb + c, 4 * ap + 2 * zb + cp) * phi(2 * ap + cp);
      un(yb, zb) = acc;
    }
  const double p = un.trace().real();
  if (!(p > tol::kErased)) throw ErasedStateError(p);
  return {un / p, p};
}

struct Rotation {
  Mat3 O;
  double fidelity;
};

// Rotation taking n_k onto the direction of n_C, with F_k = ½(1 + O n_k · n_C).
inline Rotation rodrigues_optimal_rotation(const Vec3& nk, const Vec3& nC) {
  const double a = nk.norm(), c = nC.norm();
  if (a == 0.0 && c == 0.0) throw std::invalid_argument("rodrigues: both vectors vanish");
  Rotation out{Mat3::Identity(), 0.5};
  if (a == 0.0 || c == 0.0) return out;
  const Vec3 u = nk / a, v = nC / c;
  const double cosang = std::clamp(u.dot(v), -1.0, 1.0);
  Vec3 axis = u.cross(v);
  const double sinang = axis.norm();
  if (sinang < 1e-14) {
    if (cosang > 0.0) {
      out.O = Mat3::Identity();
    } else {
      // π about any axis perpendicular to n_C.
      Vec3 ref = std::abs(v(0)) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
      Vec3 perp = v.cross(ref).normalized();
      out.O = 2.0 * perp * perp.transpose() - Mat3::Identity();
    }
  } else {
    axis /= sinang;
    Mat3 K;
    K << 0, -axis(2), axis(1), axis(2), 0, -axis(0), -axis(1), axis(0), 0;
    out.O = Mat3::Identity() + sinang * K + (1.0 - cosang) * K * K;
  }
  out.fidelity = 0.5 * (1.0 + (out.O * nk).dot(nC));
  return out;
}

// Control amplitudes (c0, c1) of the pure state with Bloch vector n (north pole = |1⟩).
inline std::pair<cd, cd> control_amplitudes(const Vec3& n) {
  if (std::abs(n.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("participatory protocol: the control must be prepared in a pure state");
  const double theta = std::acos(std::clamp(n(2), -1.0, 1.0));
  const double phi = std::atan2(n(1), n(0));
  return {std::polar(std::sin(theta / 2), phi), cd(std::cos(theta / 2), 0.0)};
}

struct ParticipatoryResult {
  double fidelity{0.0};
  std::array<ProtocolOutcome, 4> branches;
};

inline ParticipatoryResult participatory_protocol(const Matrix& rhoABC, const Vec3& nC) {
  ParticipatoryResult r;
  for (int k = 0; k < 4; ++k) {
    auto& b = r.branches[k];
    b.label = kBellLabels[k];
    try {
      auto [state, p] = bell_project(rhoABC, k);
      b.state = std::move(state);
      b.probability = p;
      b.fidelity = rodrigues_optimal_rotation(bloch_vector(b.state), nC).fidelity;
    } catch (const ErasedStateError& e) {
      b.probability = e.probability();
      b.fidelity = 0.5;
      b.state = Matrix::Identity(2, 2) / 2.0;
    }
    r.fidelity += b.probability * b.fidelity;
  }
  return r;
}

inline ParticipatoryResult participatory_protocol(const SingleQubitAmplitudeTable& E0,
                                                  const SingleQubitAmplitudeTable& E1, const Vec3& nC) {
  const auto [c0, c1] = control_amplitudes(nC);
  return participatory_protocol(assemble_teleport_state(c0, c1, E0, E1), nC);
}

// Fibonacci lattice on the unit sphere. Used for the input-averaged fidelity, which is an
// extension beyond the |+⟩ input.
inline std::vector<Vec3> sphere_points(int n) {
  std::vector<Vec3> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.emplace_back(rho * std::cos(golden * i), rho * std::sin(golden * i), z);
  }
  return pts;
}

inline double participatory_sphere_average(const SingleQubitAmplitudeTable& E0, const SingleQubitAmplitudeTable& E1,
                                           int points = 240) {
  double acc = 0.0;
  for (const auto& n : sphere_points(points)) acc += participatory_protocol(E0, E1, n).fidelity;
  return acc / points;
}

}  // namespace iqsim
