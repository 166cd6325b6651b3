// core.hpp: shared types, basis conventions, tolerances and small linear-algebra helpers.
//
// Basis convention used throughout the library: a qubit value v ∈ {0, 1} lives at
// basis index 1 − v, so the excited state |1⟩ comes first and σz = diag(+1, −1).
// Multi-qubit indices follow the Kronecker order, which gives for two qubits
//   0 = |11⟩, 1 = |10⟩, 2 = |01⟩, 3 = |00⟩.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iqsim {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr cd kI{0.0, 1.0};

namespace tol {
// Cutoff applied to eigenvalues before square roots and in QFI denominators.
inline constexpr double kEigenClamp = 1e-12;
// Below this probability a post-selected state is treated as erased.
inline constexpr double kErased = 1e-14;
inline constexpr double kTrace = 1e-12;
inline constexpr double kHermitian = 1e-12;
inline constexpr double kPsd = -1e-10;
}  // namespace tol

// Destructive interference removed the whole post-selected state.
class ErasedStateError : public std::runtime_error {
 public:
  explicit ErasedStateError(double probability)
      : std::runtime_error("state erased by destructive interference (p = " +
                           std::to_string(probability) + ")"),
        probability_(probability) {}
  double probability() const noexcept { return probability_; }

 private:
  double probability_;
};

// Dense oracle asked for a problem larger than its budget.
class BudgetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

constexpr int qubit_index(int value) noexcept { return 1 - value; }

// Two-qubit basis index of |q1 q2⟩.
constexpr int two_qubit_index(int q1, int q2) noexcept {
  return 2 * qubit_index(q1) + qubit_index(q2);
}

// Basis index of a multi-qubit product state given qubit values (first = most significant).
inline int basis_index(std::span<const int> values) {
  int idx = 0;
  for (int v : values) idx = 2 * idx + qubit_index(v);
  return idx;
}

inline Matrix pauli(int k) {
  Matrix m = Matrix::Zero(2, 2);
  switch (k) {
    case 0:
      m(0, 0) = m(1, 1) = 1.0;
      break;
    case 1:
      m(0, 1) = m(1, 0) = 1.0;
      break;
    case 2:
      m(0, 1) = -kI;
      m(1, 0) = kI;
      break;
    case 3:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw std::out_of_range("pauli index must be 0..3");
  }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Matrix projector(const Vector& psi) { return psi * psi.adjoint(); }

// Partial trace over a tensor product with subsystem dimensions `dims`; `keep` lists the
// retained subsystems in increasing order.
inline Matrix partial_trace(const Matrix& rho, std::span<const int> dims, std::span<const int> keep) {
  const int parts = static_cast<int>(dims.size());
  std::vector<bool> kept(parts, false);
  for (int k : keep) kept.at(k) = true;

  int dim_keep = 1;
  for (int p = 0; p < parts; ++p)
    if (kept[p]) dim_keep *= dims[p];
  int total = 1;
  for (int d : dims) total *= d;
  if (rho.rows() != total || rho.cols() != total)
    throw std::invalid_argument("partial_trace: dimension mismatch");

  // Split a global index into (kept index, traced index).
  auto split = [&](int idx, int& ik, int& it) {
    ik = 0;
    it = 0;
    int mul_k = 1, mul_t = 1;
    for (int p = parts - 1; p >= 0; --p) {
      const int digit = idx % dims[p];
      idx /= dims[p];
      if (kept[p]) {
        ik += digit * mul_k;
        mul_k *= dims[p];
      } else {
        it += digit * mul_t;
        mul_t *= dims[p];
      }
    }
  };

  Matrix out = Matrix::Zero(dim_keep, dim_keep);
  std::vector<int> k_of(total), t_of(total);
  for (int i = 0; i < total; ++i) split(i, k_of[i], t_of[i]);
  for (int i = 0; i < total; ++i)
    for (int j = 0; j < total; ++j)
      if (t_of[i] == t_of[j]) out(k_of[i], k_of[j]) += rho(i, j);
  return out;
}

struct Physicality {
  double trace_error{0.0};
  double hermiticity_error{0.0};
  double min_eigenvalue{0.0};

  bool ok(double trace_tol = tol::kTrace, double herm_tol = tol::kHermitian,
          double psd_tol = tol::kPsd) const {
    return trace_error <= trace_tol && hermiticity_error <= herm_tol && min_eigenvalue >= psd_tol;
  }
};

inline Physicality check_physical(const Matrix& rho) {
  Physicality p;
  p.trace_error = std::abs(rho.trace() - cd{1.0, 0.0});
  p.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  p.min_eigenvalue = es.eigenvalues().minCoeff();
  return p;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace iqsim
