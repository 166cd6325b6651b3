// oracle.hpp: independent reference dynamics by dense exact diagonalization.
//
// Baths are represented directly by collective-spin ladder matrices in the symmetric
// (Dicke) sector, n = m + N/2, without the bosonic mapping. Blocks are formed literally:
// evolve |a⟩ ⊗ |bath configuration⟩ on each side, pair up final configurations, and
// weight by the thermal state read off the oracle's own bath Hamiltonian.

#pragma once

#include "iqsim/bath.hpp"
#include "iqsim/core.hpp"
#include "iqsim/measures.hpp"
#include "iqsim/sector.hpp"

#include <boost/numeric/odeint.hpp>

#include <map>
#include <memory>
#include <set>
#include <vector>

namespace iqsim::oracle {

inline constexpr int kHamiltonianBudget = 8;
inline constexpr int kBlockBudget = 6;

namespace detail {

inline RealMatrix ladder_up(int N) {
  RealMatrix Jp = RealMatrix::Zero(N + 1, N + 1);
  for (int n = 0; n < N; ++n) Jp(n + 1, n) = std::sqrt(static_cast<double>((N - n) * (n + 1)));
  return Jp;
}

inline RealMatrix rkron(const RealMatrix& a, const RealMatrix& b) {
  RealMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline RealMatrix rid(int d) { return RealMatrix::Identity(d, d); }

inline RealMatrix sz() {
  RealMatrix m = RealMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

// σ+ = |1⟩⟨0| with |1⟩ at index 0.
inline RealMatrix sp() {
  RealMatrix m = RealMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

inline RealMatrix bath_hamiltonian(const BathSpec& b) {
  const RealMatrix Jp = ladder_up(b.N);
  return b.s * (Jp * Jp.transpose() / b.N - 0.5 * rid(b.N + 1));
}

inline void check_budget(int N, int budget) {
  if (N > budget) throw BudgetError("oracle: N = " + std::to_string(N) + " exceeds budget " + std::to_string(budget));
}

}  // namespace detail

// Ordering: qubit 1 ⊗ qubit 2 ⊗ bath 1 ⊗ bath 2.
inline RealMatrix dicke_hamiltonian(const TwoQubitParams& p) {
  p.validate();
  const int N = p.bath1.N;
  detail::check_budget(N, kHamiltonianBudget);
  using namespace detail;
  const int d = N + 1;
  const RealMatrix I2 = rid(2), Id = rid(d);
  const RealMatrix Jp = ladder_up(N);
  const RealMatrix Jm = Jp.transpose();
  const RealMatrix Sp = sp(), Sm = sp().transpose(), Z = sz();
  const double rn = std::sqrt(static_cast<double>(N));

  RealMatrix Hs = p.omega1 * rkron(Z, I2) + p.omega2 * rkron(I2, Z) - p.J * rkron(Z, Z);
  RealMatrix H = rkron(Hs, rkron(Id, Id));
  H += (p.bath1.f / rn) * (rkron(rkron(Sp, I2), rkron(Jm, Id)) + rkron(rkron(Sm, I2), rkron(Jp, Id)));
  H += (p.bath2.f / rn) * (rkron(rkron(I2, Sp), rkron(Id, Jm)) + rkron(rkron(I2, Sm), rkron(Id, Jp)));
  H += rkron(rid(4), rkron(bath_hamiltonian(p.bath1), Id));
  H += rkron(rid(4), rkron(Id, bath_hamiltonian(p.bath2)));
  return H;
}

// Ordering: qubit ⊗ bath.
inline RealMatrix dicke_hamiltonian(const SingleQubitParams& p) {
  p.bath.validate();
  const int N = p.bath.N;
  detail::check_budget(N, kHamiltonianBudget);
  using namespace detail;
  const RealMatrix Jp = ladder_up(N);
  const double rn = std::sqrt(static_cast<double>(N));
  RealMatrix H = p.omega * rkron(sz(), rid(N + 1));
  H += (p.bath.f / rn) * (rkron(sp(), Jp.transpose()) + rkron(sp().transpose(), Jp));
  H += rkron(rid(2), bath_hamiltonian(p.bath));
  return H;
}

// Thermal occupations from the diagonal of the oracle bath Hamiltonian.
inline std::vector<double> thermal_populations(const BathSpec& b) {
  const RealMatrix HE = detail::bath_hamiltonian(b);
  std::vector<double> p(b.N + 1, 0.0);
  if (b.zero_temperature()) {
    p[0] = 1.0;
    return p;
  }
  const double e0 = HE.diagonal().minCoeff();
  double z = 0.0;
  for (int n = 0; n <= b.N; ++n) z += p[n] = std::exp(-b.beta * (HE(n, n) - e0));
  for (double& v : p) v /= z;
  return p;
}

class DenseUnitary {
 public:
  explicit DenseUnitary(const RealMatrix& H) : es_(H) {}
  Matrix at(double t) const {
    const auto& V = es_.eigenvectors();
    Vector ph(V.cols());
    for (Eigen::Index k = 0; k < V.cols(); ++k) ph(k) = std::polar(1.0, -es_.eigenvalues()(k) * t);
    const Matrix Vc = V.cast<cd>();
    return Vc * ph.asDiagonal() * Vc.transpose();
  }
  const Eigen::VectorXd& eigenvalues() const { return es_.eigenvalues(); }

 private:
  Eigen::SelfAdjointEigenSolver<RealMatrix> es_;
};

// One interacting unit of an evolution: either the coupled qubit pair with its two baths
// or a lone qubit with one bath. `qubits` are positions in the system register (first =
// most significant); `labels` name global baths.
struct Unit {
  std::vector<int> qubits;
  std::vector<int> labels;
  std::vector<BathSpec> baths;  // per label, carries β for the initial thermal state
  std::shared_ptr<const Matrix> U;

  static Unit pair(const TwoQubitParams& p, int label1, int label2, double t, int q1 = 0, int q2 = 1) {
    detail::check_budget(p.bath1.N, kBlockBudget);
    return {{q1, q2}, {label1, label2}, {p.bath1, p.bath2},
            std::make_shared<const Matrix>(DenseUnitary(dicke_hamiltonian(p)).at(t))};
  }
  static Unit single(const SingleQubitParams& p, int label, double t, int q = 0) {
    detail::check_budget(p.bath.N, kBlockBudget);
    return {{q}, {label}, {p.bath}, std::make_shared<const Matrix>(DenseUnitary(dicke_hamiltonian(p)).at(t))};
  }
};

using Evolution = std::vector<Unit>;

namespace detail {

struct Branch {
  int x;
  std::vector<int> config;
  cd amp;
};

inline constexpr double kDrop = 1e-15;

// U applied to |a⟩ ⊗ |config⟩ as a sparse list of branches.
inline std::vector<Branch> evolve(const Evolution& ev, int nqubits, int a, const std::vector<int>& config,
                                  const std::map<int, int>& slot, int N) {
  const int d = N + 1;
  std::vector<int> digits(nqubits);
  for (int q = nqubits - 1, v = a; q >= 0; --q, v /= 2) digits[q] = v % 2;

  // Tensor the units one at a time; qubit digits are placed into x at the end.
  struct Partial {
    std::vector<int> xd;
    std::vector<int> config;
    cd amp;
  };
  std::vector<Partial> cur{{digits, config, 1.0}};
  for (const auto& u : ev) {
    int in = 0;
    for (int q : u.qubits) in = 2 * in + digits[q];
    for (int l : u.labels) in = in * d + config[slot.at(l)];
    std::vector<Partial> next;
    const Matrix& U = *u.U;
    for (Eigen::Index r = 0; r < U.rows(); ++r) {
      const cd amp = U(r, in);
      if (std::abs(amp) < kDrop) continue;
      int rest = static_cast<int>(r);
      std::vector<int> lv(u.labels.size());
      for (int k = static_cast<int>(u.labels.size()) - 1; k >= 0; --k, rest /= d) lv[k] = rest % d;
      std::vector<int> qv(u.qubits.size());
      for (int k = static_cast<int>(u.qubits.size()) - 1; k >= 0; --k, rest /= 2) qv[k] = rest % 2;
      for (const auto& pc : cur) {
        Partial np = pc;
        for (std::size_t k = 0; k < u.qubits.size(); ++k) np.xd[u.qubits[k]] = qv[k];
        for (std::size_t k = 0; k < u.labels.size(); ++k) np.config[slot.at(u.labels[k])] = lv[k];
        np.amp *= amp;
        next.push_back(std::move(np));
      }
    }
    cur = std::move(next);
  }
  std::vector<Branch> out;
  for (auto& pc : cur) {
    int x = 0;
    for (int v : pc.xd) x = 2 * x + v;
    out.push_back({x, std::move(pc.config), pc.amp});
  }
  return out;
}

}  // namespace detail

// Tr_E[U_L (ρ0 ⊗ ρ_E) U_R†] over every bath label that appears on either side.
inline Matrix exact_block(const Matrix& rho0, const Evolution& L, const Evolution& R) {
  const int dim = static_cast<int>(rho0.rows());
  const int nq = dim == 2 ? 1 : dim == 4 ? 2 : throw std::invalid_argument("exact_block: 1 or 2 system qubits");
  std::map<int, BathSpec> baths;
  for (const auto* ev : {&L, &R})
    for (const auto& u : *ev)
      for (std::size_t k = 0; k < u.labels.size(); ++k) {
        auto [it, fresh] = baths.emplace(u.labels[k], u.baths[k]);
        if (!fresh && (it->second.N != u.baths[k].N || it->second.beta != u.baths[k].beta))
          throw std::invalid_argument("exact_block: inconsistent bath label " + std::to_string(u.labels[k]));
      }
  const int N = baths.begin()->second.N;
  std::map<int, int> slot;
  std::vector<std::vector<double>> pops;
  for (const auto& [label, b] : baths) {
    if (b.N != N) throw std::invalid_argument("exact_block: baths must share N");
    slot[label] = static_cast<int>(pops.size());
    pops.push_back(thermal_populations(b));
  }
  const int nl = static_cast<int>(pops.size());

  Matrix out = Matrix::Zero(dim, dim);
  std::vector<int> config(nl, 0);
  while (true) {
    double w = 1.0;
    for (int k = 0; k < nl; ++k) w *= pops[k][config[k]];
    if (w != 0.0) {
      std::vector<std::vector<detail::Branch>> left(dim), right(dim);
      for (int a = 0; a < dim; ++a) {
        left[a] = detail::evolve(L, nq, a, config, slot, N);
        right[a] = detail::evolve(R, nq, a, config, slot, N);
      }
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) {
          if (rho0(a, b) == 0.0) continue;
          for (const auto& l : left[a])
            for (const auto& r : right[b])
              if (l.config == r.config) out(l.x, r.x) += w * rho0(a, b) * l.amp * std::conj(r.amp);
        }
    }
    int k = nl - 1;
    while (k >= 0 && ++config[k] > N) config[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

// Two-qubit block with qubit 1 on bath label lA and qubit 2 on lB, per side.
inline Matrix two_qubit_block(const Matrix& rho0, const TwoQubitParams& pL, int lA, int lB, const TwoQubitParams& pR,
                              int rA, int rB, double t) {
  return exact_block(rho0, {Unit::pair(pL, lA, lB, t)}, {Unit::pair(pR, rA, rB, t)});
}

inline Matrix single_qubit_block(const Matrix& rho0, const SingleQubitParams& pL, int lL, const SingleQubitParams& pR,
                                 int lR, double t) {
  return exact_block(rho0, {Unit::single(pL, lL, t)}, {Unit::single(pR, lR, t)});
}

// ρ_ABC (control last) assembled from the four control-conditioned evolutions.
inline Matrix teleport_state(cd c0, cd c1, const SingleQubitParams& E0, const SingleQubitParams& E1, double t) {
  Vector phi = Vector::Zero(4);
  phi(two_qubit_index(1, 1)) = phi(two_qubit_index(0, 0)) = 1.0 / std::sqrt(2.0);
  const Matrix rho0 = projector(phi);
  // Bath label 0 is E0, label 1 is E1. Control value 0: A↔E0, B↔E1.
  auto pick = [&](int e) { return e == 0 ? E0 : E1; };
  auto evolution = [&](int c) {
    const int eA = c, eB = 1 - c;
    return Evolution{Unit::single(pick(eA), eA, t, 0), Unit::single(pick(eB), eB, t, 1)};
  };
  const std::array<cd, 2> amp{c0, c1};
  Matrix rho = Matrix::Zero(8, 8);
  for (int c = 0; c < 2; ++c)
    for (int cp = 0; cp < 2; ++cp) {
      const Matrix blk = exact_block(rho0, evolution(c), evolution(cp));
      for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y)
          rho(2 * x + qubit_index(c), 2 * y + qubit_index(cp)) += amp[c] * std::conj(amp[cp]) * blk(x, y);
    }
  return rho;
}

// Control ⊗ system state; control value c couples the system to bath label c.
inline Matrix control_system_state(const Vector& psi0, const SingleQubitParams& E0, const SingleQubitParams& E1,
                                   double t) {
  const Matrix rho0 = projector(psi0);
  const std::array<SingleQubitParams, 2> E{E0, E1};
  Matrix rho = Matrix::Zero(4, 4);
  for (int c = 0; c < 2; ++c)
    for (int cp = 0; cp < 2; ++cp) {
      const int ic = qubit_index(c), icp = qubit_index(cp);
      const Matrix sub = rho0.block(2 * ic, 2 * icp, 2, 2);
      rho.block(2 * ic, 2 * icp, 2, 2) =
          exact_block(sub, {Unit::single(E[c], c, t)}, {Unit::single(E[cp], cp, t)});
    }
  return rho;
}

// Oracle Hamiltonian restricted to the valid physical states of one sector, in component
// order. Returns the component indices kept (edge states outside 0..N are dropped).
inline std::pair<RealMatrix, std::vector<int>> sector_submatrix(const TwoQubitParams& p, Family f, SectorIndex s) {
  const RealMatrix H = dicke_hamiltonian(p);
  const int d = p.bath1.N + 1;
  std::vector<int> comps, rows;
  for (int c = 0; c < 4; ++c) {
    if (p.model == SectorModel::ThreeState && c == 3) continue;
    const auto st = component_state(f, c, s);
    if (st.n1 < 0 || st.n1 > p.bath1.N || st.n2 < 0 || st.n2 > p.bath1.N) continue;
    comps.push_back(c);
    rows.push_back((two_qubit_index(st.q1, st.q2) * d + st.n1) * d + st.n2);
  }
  RealMatrix sub(comps.size(), comps.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) sub(i, j) = H(rows[i], rows[j]);
  return {sub, comps};
}

// Norm of H applied to the sector's states that leaks outside the sector.
inline double sector_leakage(const TwoQubitParams& p, Family f, SectorIndex s) {
  const RealMatrix H = dicke_hamiltonian(p);
  const int d = p.bath1.N + 1;
  std::set<int> rows;
  for (int c = 0; c < 4; ++c) {
    const auto st = component_state(f, c, s);
    if (st.n1 < 0 || st.n1 > p.bath1.N || st.n2 < 0 || st.n2 > p.bath1.N) continue;
    rows.insert((two_qubit_index(st.q1, st.q2) * d + st.n1) * d + st.n2);
  }
  double leak = 0.0;
  for (int r : rows)
    for (Eigen::Index k = 0; k < H.rows(); ++k)
      if (!rows.count(static_cast<int>(k))) leak = std::max(leak, std::abs(H(k, r)));
  return leak;
}

// Adaptive Dormand-Prince integration of dv/dt = −iKv from the family's initial condition.
template <int D>
Eigen::Matrix<cd, D, 1> ode_cross_check(const Eigen::Matrix<double, D, D>& K, double t, double tol) {
  if (tol < 1e-12) throw std::invalid_argument("ode_cross_check: tol must be >= 1e-12");
  using State = std::vector<cd>;
  State v(D, 0.0);
  v[0] = 1.0;
  auto rhs = [&K](const State& x, State& dx, double) {
    for (int i = 0; i < D; ++i) {
      cd acc = 0.0;
      for (int j = 0; j < D; ++j) acc += K(i, j) * x[j];
      dx[i] = -kI * acc;
    }
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
  if (t > 0.0) ode::integrate_adaptive(stepper, rhs, v, 0.0, t, std::min(0.01, t));
  Eigen::Matrix<cd, D, 1> out;
  for (int i = 0; i < D; ++i) out(i) = v[i];
  return out;
}

// min over projective measurements on qubit A of ‖ρ − Σ_k Π_k ⊗ Tr_A[(Π_k⊗I)ρ]‖²; coarse grid
// followed by local refinement.
inline double discord_by_minimization(const Matrix& rho) {
  auto objective = [&](double th, double ph) {
    const Vec3 e(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
    Matrix best = Matrix::Zero(4, 4);
    for (int s : {1, -1}) {
      const Matrix P = from_bloch(s * e);
      Matrix sigma = Matrix::Zero(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int ap = 0; ap < 2; ++ap)
          for (int b = 0; b < 2; ++b)
            for (int bp = 0; bp < 2; ++bp) sigma(b, bp) += P(ap, a) * rho(2 * a + b, 2 * ap + bp);
      best += kron(P, sigma);
    }
    return (rho - best).squaredNorm();
  };
  double bt = 0, bp = 0, bv = 1e9;
  const int G = 120;
  for (int i = 0; i <= G; ++i)
    for (int j = 0; j < 2 * G; ++j) {
      const double th = M_PI * i / G, ph = M_PI * j / G;
      const double v = objective(th, ph);
      if (v < bv) bv = v, bt = th, bp = ph;
    }
  for (double h = M_PI / G; h > 1e-9; h *= 0.5)
    for (bool moved = true; moved;) {
      moved = false;
      for (auto [dt, dp] : {std::pair{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}}) {
        const double v = objective(bt + dt, bp + dp);
        if (v < bv) bv = v, bt += dt, bp += dp, moved = true;
      }
    }
  return bv;
}


}  // namespace iqsim::oracle
