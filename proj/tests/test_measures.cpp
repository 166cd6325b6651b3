#include <catch_amalgamated.hpp>

#include "iqsim/measures.hpp"
#include "iqsim/oracle.hpp"

#include <random>

using namespace iqsim;

namespace {

Matrix bell() {
  Vector v = Vector::Zero(4);
  v(two_qubit_index(1, 1)) = v(two_qubit_index(0, 0)) = 1.0 / std::sqrt(2.0);
  return projector(v);
}

Matrix werner(double p) { return p * bell() + (1.0 - p) * Matrix::Identity(4, 4) / 4.0; }

Matrix random_state(std::mt19937& rng, int d, int rank = -1) {
  std::normal_distribution<double> g;
  const int r = rank < 0 ? d : rank;
  Matrix A(d, r);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < r; ++j) A(i, j) = cd(g(rng), g(rng));
  Matrix rho = A * A.adjoint();
  return rho / rho.trace();
}

Matrix random_unitary2(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
  Matrix U(2, 2);
  U << std::polar(std::cos(a), b), std::polar(std::sin(a), c), -std::polar(std::sin(a), d - c),
      std::polar(std::cos(a), d - b);
  return U;
}

}  // namespace

TEST_CASE("l1 coherence", "[measures]") {
  CHECK(std::abs(l1_coherence(bell()) - 1.0) < 1e-15);
  CHECK(l1_coherence(Matrix::Identity(4, 4) / 4.0) == 0.0);
  std::mt19937 rng(1);
  const Matrix r = random_state(rng, 4);
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += i == j ? 0.0 : std::abs(r(i, j));
  CHECK(std::abs(l1_coherence(r) - s) < 1e-15);
}

TEST_CASE("Werner closed forms", "[measures]") {
  CHECK(std::abs(concurrence(bell()) - 1.0) < 1e-12);
  CHECK(concurrence(Matrix::Identity(4, 4) / 4.0) < 1e-12);
  CHECK(std::abs(concurrence(werner(0.8)) - 0.7) < 1e-12);
  for (double p : {0.2, 1.0 / 3.0, 0.5, 0.9}) {
    CHECK(std::abs(concurrence(werner(p)) - std::max(0.0, (3 * p - 1) / 2)) < 1e-12);
    CHECK(std::abs(teleport_fidelity_max(werner(p)) - 0.5 * (1 + p)) < 1e-12);
  }
  CHECK(std::abs(teleport_fidelity_max(bell()) - 1.0) < 1e-12);
  CHECK(std::abs(teleport_fidelity_max(Matrix::Identity(4, 4) / 4.0) - 0.5) < 1e-15);
  CHECK(std::abs(teleport_fidelity_max(werner(0.5)) - 0.75) < 1e-12);
  Matrix bad = bell();
  bad(0, 0) = -0.2;
  bad(3, 3) = 1.2;
  CHECK_THROWS_AS(concurrence(bad), std::invalid_argument);
}

TEST_CASE("Bloch decomposition round trip", "[measures]") {
  std::mt19937 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Matrix r = random_state(rng, 4);
    const auto d = bloch_decomposition(r);
    CHECK(max_abs_diff(reconstruct(d), r) < 1e-13);
    CHECK(d.a.norm() <= 1.0 + 1e-12);
    CHECK(d.b.norm() <= 1.0 + 1e-12);
  }
}

TEST_CASE("trigonometric 3x3 eigenvalues", "[measures]") {
  std::mt19937 rng(4);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Mat3 A;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = g(rng);
    const Mat3 S = A * A.transpose();
    Eigen::SelfAdjointEigenSolver<Mat3> es(S);
    const auto e = symmetric_eigenvalues3(S);
    CHECK(std::abs(e[0] - es.eigenvalues()(2)) < 1e-12 * (1 + std::abs(e[0])));
    CHECK(std::abs(e[2] - es.eigenvalues()(0)) < 1e-10 * (1 + std::abs(e[0])));
  }
}

TEST_CASE("geometric discord", "[measures]") {
  CHECK(std::abs(geometric_discord(bell()) - 0.5) < 1e-12);
  std::mt19937 rng(5);
  const Matrix prod = kron(random_state(rng, 2), random_state(rng, 2));
  CHECK(geometric_discord(prod) < 1e-12);
  for (int k = 0; k < 6; ++k) {
    const Matrix r = random_state(rng, 4, 1 + k % 4);
    CHECK(std::abs(geometric_discord(r) - oracle::discord_by_minimization(r)) < 1e-4);
  }
}

TEST_CASE("local-unitary invariance", "[measures]") {
  std::mt19937 rng(6);
  for (int k = 0; k < 10; ++k) {
    const Matrix r = random_state(rng, 4);
    const Matrix U = kron(random_unitary2(rng), random_unitary2(rng));
    const Matrix s = U * r * U.adjoint();
    CHECK(std::abs(concurrence(r) - concurrence(s)) < 1e-10);
    CHECK(std::abs(geometric_discord(r) - geometric_discord(s)) < 1e-10);
    CHECK(std::abs(teleport_fidelity_max(r) - teleport_fidelity_max(s)) < 1e-10);
  }
}

TEST_CASE("quantum Fisher information", "[measures]") {
  auto pure = [](double phi) {
    Vector v(2);
    v << 1.0 / std::sqrt(2.0), std::polar(1.0 / std::sqrt(2.0), phi);
    return projector(v);
  };
  CHECK(std::abs(qfi_general(pure, 0.7) - 1.0) < 1e-8);
  CHECK(qfi_general([](double) { return Matrix(Matrix::Identity(2, 2) / 2.0); }, 0.3) == 0.0);

  CHECK(std::abs(qfi_bloch({1, 0, 0}, {0, 1, 0}) - 1.0) < 1e-15);
  CHECK(qfi_bloch({0.3, 0, 0}, {0, 0, 0}) == 0.0);
  CHECK(std::abs(qfi_bloch({0.3, 0, 0}, {0.1, 0.2, 0}) - (0.05 + 0.03 * 0.03 / 0.91)) < 1e-15);
  CHECK_THROWS_AS(qfi_bloch({1.1, 0, 0}, {0, 0, 0}), std::invalid_argument);

  // Mixed single-qubit family: r(θ) shrunk and rotated.
  auto r = [](double th) { return Vec3(0.7 * std::cos(th), 0.7 * std::sin(th), 0.2 + 0.1 * th); };
  auto dr = [](double th) { return Vec3(-0.7 * std::sin(th), 0.7 * std::cos(th), 0.1); };
  for (double th : {0.1, 0.9, 2.3}) {
    const double bloch = qfi_bloch(r(th), dr(th));
    const double analytic = qfi_general(from_bloch(r(th)), from_bloch(dr(th)) - 0.5 * pauli(0));
    const double fd = qfi_general([&](double x) { return from_bloch(r(x)); }, th);
    CHECK(std::abs(analytic - bloch) < 1e-8);
    CHECK(std::abs(fd - analytic) <= 1e-5 * analytic);
  }
}

TEST_CASE("WPEI report", "[measures]") {
  const auto b = wpei(bell());
  CHECK(b.P1 < 1e-15);
  CHECK(b.V1 < 1e-15);
  CHECK(std::abs(b.C - 1.0) < 1e-12);
  CHECK(std::abs(b.eta) < 1e-10);
  CHECK(std::abs(b.I - 1.0) < 1e-15);

  Vector one = Vector::Zero(2);
  one(qubit_index(1)) = 1.0;
  Vector psi(2);
  psi << cd(0.6, 0.0), cd(0.0, 0.8);
  const auto p = wpei(kron(projector(one), projector(psi)));
  CHECK(std::abs(p.P1 - 1.0) < 1e-15);
  CHECK(std::abs(p.I) < 1e-15);
  CHECK(p.C < 1e-6);
  CHECK(std::abs(p.eta) < 1e-10);
  CHECK(std::abs(p.P2 * p.P2 + p.V2 * p.V2 - 1.0) < 1e-12);

  std::mt19937 rng(9);
  for (int k = 0; k < 20; ++k) {
    const Matrix r = random_state(rng, 4, 1 + k % 4);
    const auto w = wpei(r);
    CHECK(w.eta >= -1e-10);
    if (k % 4 == 0) CHECK(std::abs(w.eta) < 1e-10);
    CHECK(std::abs(0.5 * (w.P1 * w.P1 + w.P2 * w.P2 + w.V1 * w.V1 + w.V2 * w.V2) + w.C * w.C + w.eta - 1.0) < 1e-15);
  }
}
