// measures.hpp: coherence, entanglement, discord, teleportation fidelity, QFI and WPEI.

#pragma once

#include "iqsim/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace iqsim {

inline double l1_coherence(const Matrix& rho) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i)
    for (Eigen::Index j = 0; j < rho.cols(); ++j)
      if (i != j) s += std::abs(rho(i, j));
  return s;
}

namespace detail {

inline void require_two_qubit(const Matrix& rho, const char* who) {
  if (rho.rows() != 4 || rho.cols() != 4) throw std::invalid_argument(std::string(who) + ": need a 4x4 state");
}

// Hermitian square root with eigenvalues clamped at zero.
inline Matrix psd_sqrt(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

inline double concurrence(const Matrix& rho) {
  detail::require_two_qubit(rho, "concurrence");
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> check(herm, Eigen::EigenvaluesOnly);
  if (check.eigenvalues().minCoeff() < tol::kPsd) throw std::invalid_argument("concurrence: state is not PSD");
  const Matrix yy = kron(pauli(2), pauli(2));
  const Matrix tilde = yy * herm.conjugate() * yy;
  const Matrix sq = detail::psd_sqrt(herm);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sq * tilde * sq, Eigen::EigenvaluesOnly);
  std::array<double, 4> lam{};
  for (int k = 0; k < 4; ++k) {
    const double e = es.eigenvalues()(k);
    lam[k] = e > tol::kEigenClamp ? std::sqrt(e) : 0.0;
  }
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

struct BlochDecomposition {
  Vec3 a;
  Vec3 b;
  Mat3 C;
};

inline BlochDecomposition bloch_decomposition(const Matrix& rho) {
  detail::require_two_qubit(rho, "bloch_decomposition");
  BlochDecomposition d;
  const Matrix I2 = pauli(0);
  for (int i = 0; i < 3; ++i) {
    d.a(i) = (rho * kron(pauli(i + 1), I2)).trace().real();
    d.b(i) = (rho * kron(I2, pauli(i + 1))).trace().real();
    for (int j = 0; j < 3; ++j) d.C(i, j) = (rho * kron(pauli(i + 1), pauli(j + 1))).trace().real();
  }
  return d;
}

inline Matrix reconstruct(const BlochDecomposition& d) {
  const Matrix I2 = pauli(0);
  Matrix rho = kron(I2, I2);
  for (int i = 0; i < 3; ++i) {
    rho += d.a(i) * kron(pauli(i + 1), I2) + d.b(i) * kron(I2, pauli(i + 1));
    for (int j = 0; j < 3; ++j) rho += d.C(i, j) * kron(pauli(i + 1), pauli(j + 1));
  }
  return rho / 4.0;
}

inline Vec3 bloch_vector(const Matrix& rho) {
  if (rho.rows() != 2 || rho.cols() != 2) throw std::invalid_argument("bloch_vector: need a 2x2 state");
  return {(rho * pauli(1)).trace().real(), (rho * pauli(2)).trace().real(), (rho * pauli(3)).trace().real()};
}

inline Matrix from_bloch(const Vec3& r) {
  return 0.5 * (pauli(0) + r(0) * pauli(1) + r(1) * pauli(2) + r(2) * pauli(3));
}

// Eigenvalues of a real symmetric 3×3 matrix by the trigonometric method, descending.
inline std::array<double, 3> symmetric_eigenvalues3(const Mat3& A) {
  const double p1 = A(0, 1) * A(0, 1) + A(0, 2) * A(0, 2) + A(1, 2) * A(1, 2);
  const double q = A.trace() / 3.0;
  if (p1 == 0.0) {
    std::array<double, 3> e{A(0, 0), A(1, 1), A(2, 2)};
    std::sort(e.begin(), e.end(), std::greater<>());
    return e;
  }
  const double p2 = (A(0, 0) - q) * (A(0, 0) - q) + (A(1, 1) - q) * (A(1, 1) - q) + (A(2, 2) - q) * (A(2, 2) - q) + 2 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Mat3 B = (A - q * Mat3::Identity()) / p;
  const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2 * p * std::cos(phi);
  const double e3 = q + 2 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {e1, 3 * q - e1 - e3, e3};
}

inline double geometric_discord(const Matrix& rho) {
  const auto d = bloch_decomposition(rho);
  const Mat3 K = d.a * d.a.transpose() + d.C * d.C.transpose();
  const double kmax = symmetric_eigenvalues3(K)[0];
  return std::max(0.0, 0.25 * (d.a.squaredNorm() + d.C.squaredNorm() - kmax));
}

inline double teleport_fidelity_max(const Matrix& rho) {
  const auto d = bloch_decomposition(rho);
  Eigen::JacobiSVD<Mat3> svd(d.C);
  return 0.5 * (1.0 + svd.singularValues().sum() / 3.0);
}

// Σ_{λi+λj > cutoff} 2|⟨i|∂ρ|j⟩|² / (λi + λj)
inline double qfi_general(const Matrix& rho, const Matrix& drho) {
  if (rho.rows() != drho.rows() || rho.cols() != drho.cols()) throw std::invalid_argument("qfi: shape mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Matrix D = es.eigenvectors().adjoint() * (0.5 * (drho + drho.adjoint())) * es.eigenvectors();
  const auto& lam = es.eigenvalues();
  double F = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    for (Eigen::Index j = 0; j < lam.size(); ++j) {
      const double s = std::max(lam(i), 0.0) + std::max(lam(j), 0.0);
      if (s > tol::kEigenClamp) F += 2.0 * std::norm(D(i, j)) / s;
    }
  return F;
}

// Central difference of the family around θ.
inline double qfi_general(const std::function<Matrix(double)>& family, double theta, double step = 1e-5) {
  const Matrix drho = (family(theta + step) - family(theta - step)) / (2.0 * step);
  return qfi_general(family(theta), drho);
}

inline double qfi_bloch(const Vec3& r, const Vec3& dr) {
  const double r2 = r.squaredNorm();
  if (std::sqrt(r2) > 1.0 + 1e-10) throw std::invalid_argument("qfi_bloch: |r| > 1");
  const double gap = 1.0 - r2;
  if (gap < tol::kEigenClamp) return dr.squaredNorm();
  const double rd = r.dot(dr);
  return dr.squaredNorm() + rd * rd / gap;
}

struct WpeiReport {
  double P1, P2, V1, V2, C, eta, I;
};

// Slot 1 (first tensor factor) is the control.
inline WpeiReport wpei(const Matrix& rho) {
  detail::require_two_qubit(rho, "wpei");
  const std::array<int, 2> dims{2, 2};
  const std::array<int, 1> first{0}, second{1};
  const Matrix r1 = partial_trace(rho, dims, first);
  const Matrix r2 = partial_trace(rho, dims, second);
  WpeiReport w;
  w.P1 = std::abs(r1(0, 0) - r1(1, 1));
  w.P2 = std::abs(r2(0, 0) - r2(1, 1));
  w.V1 = 2.0 * std::abs(r1(0, 1));
  w.V2 = 2.0 * std::abs(r2(0, 1));
  w.C = concurrence(rho);
  w.eta = 1.0 - (0.5 * (w.P1 * w.P1 + w.P2 * w.P2 + w.V1 * w.V1 + w.V2 * w.V2) + w.C * w.C);
  w.I = 1.0 - w.P1 * w.P1;
  return w;
}

}  // namespace iqsim
