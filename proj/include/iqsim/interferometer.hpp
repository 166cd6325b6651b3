// interferometer.hpp: path registers, selective measurements and path decoherence.
//
// Register A (qubit 1) and register B (qubit 2) each run over M paths. Path i of a register
// carries its own bath at inverse temperature β_i; the inter-qubit coupling depends on the
// pair of paths. A block (i,i',j,j') evolves the left side on paths (i,j) and the right
// side on (i',j'); its case follows from which registers agree across the two sides.

#pragma once

#include "iqsim/assembly.hpp"
#include "iqsim/core.hpp"
#include "iqsim/sector.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace iqsim {

struct CouplingRule {
  enum class Kind { Constant, InverseSquare };
  Kind kind{Kind::Constant};
  double J{0.0};      // Constant
  double gamma{0.0};  // InverseSquare: J_ij = 1 / (γ (i − j)² + d)
  double d{1.0};

  static CouplingRule constant(double J) { return {Kind::Constant, J, 0.0, 1.0}; }
  static CouplingRule inverse_square(double gamma, double d) {
    if (!(d > 0.0)) throw std::invalid_argument("CouplingRule: d must be > 0");
    return {Kind::InverseSquare, 0.0, gamma, d};
  }

  double at(int i, int j) const {
    if (kind == Kind::Constant) return J;
    const double diff = i - j;
    return 1.0 / (gamma * diff * diff + d);
  }
};

// Phase pattern: flips[i] = 1 means φ_i = π.
struct PhasePattern {
  std::vector<int> flips;

  static PhasePattern leading(int M, int n) {
    if (n < 0 || n > M) throw std::invalid_argument("PhasePattern: flip count out of range");
    PhasePattern p;
    p.flips.assign(M, 0);
    for (int i = 0; i < n; ++i) p.flips[i] = 1;
    return p;
  }
  static PhasePattern parse(const std::string& s) {
    PhasePattern p;
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("PhasePattern: expected a string of 0/1, got '" + s + "'");
      p.flips.push_back(c - '0');
    }
    return p;
  }
  int M() const { return static_cast<int>(flips.size()); }
  int count() const {
    int n = 0;
    for (int f : flips) n += f;
    return n;
  }
  std::string str() const {
    std::string s;
    for (int f : flips) s += static_cast<char>('0' + f);
    return s;
  }
  // ⟨ψ_φ|i⟩·√M
  double sign(int i) const { return flips.at(i) ? -1.0 : 1.0; }
};

struct PathEnsemble {
  int M{2};
  std::vector<double> betas;  // per path, shared by both registers
  CouplingRule coupling;

  void validate() const {
    if (M < 1) throw std::invalid_argument("PathEnsemble: M must be >= 1");
    if (static_cast<int>(betas.size()) != M) throw std::invalid_argument("PathEnsemble: need one β per path");
    for (double b : betas)
      if (!(b >= 0.0)) throw std::invalid_argument("PathEnsemble: β must be >= 0");
  }
  bool uniform() const {
    for (double b : betas)
      if (b != betas.front()) return false;
    return coupling.kind == CouplingRule::Kind::Constant;
  }
  static PathEnsemble uniform_ensemble(int M, double beta, double J) {
    return {M, std::vector<double>(M, beta), CouplingRule::constant(J)};
  }
};

struct Measurement {
  Matrix unnormalized;
  double probability{0.0};
  Matrix state;
};

inline Measurement normalize_measurement(Matrix unnormalized) {
  Measurement m;
  m.probability = unnormalized.trace().real();
  if (!(m.probability > tol::kErased)) throw ErasedStateError(m.probability);
  m.state = unnormalized / m.probability;
  m.unnormalized = std::move(unnormalized);
  return m;
}

struct UniformWeights {
  double diag;    // Case A
  double single;  // Case B, split evenly between the two registers
  double doubled; // Case C
};

inline UniformWeights uniform_weights(int M, int n) {
  if (M < 1 || n < 0 || n > M) throw std::invalid_argument("uniform_weights: need 0 <= n <= M");
  const double m = M;
  const double k = (m - 2.0 * n) * (m - 2.0 * n) - m;  // Σ_{i≠i'} e^{i(φ_i − φ_i')}
  return {1.0 / (m * m), 2.0 * k / (m * m * m), k * k / (m * m * m * m)};
}

// ---- two-qubit path blocks ------------------------------------------------------------

class TwoQubitPaths {
 public:
  TwoQubitPaths(double omega1, double omega2, BathSpec bath, PathEnsemble ensemble,
                SectorModel model = SectorModel::Exact)
      : ensemble_(std::move(ensemble)) {
    ensemble_.validate();
    bath.validate();
    const int M = ensemble_.M;
    key_.assign(M, std::vector<int>(M, -1));
    std::map<std::tuple<double, double, double>, int> seen;
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const auto sig = std::make_tuple(ensemble_.coupling.at(i, j), ensemble_.betas[i], ensemble_.betas[j]);
        auto it = seen.find(sig);
        if (it == seen.end()) {
          TwoQubitParams p{omega1, omega2, std::get<0>(sig), bath, bath, model};
          p.bath1.beta = std::get<1>(sig);
          p.bath2.beta = std::get<2>(sig);
          it = seen.emplace(sig, static_cast<int>(spectra_.size())).first;
          spectra_.emplace_back(p);
        }
        key_[i][j] = it->second;
      }
  }

  const PathEnsemble& ensemble() const noexcept { return ensemble_; }
  int M() const noexcept { return ensemble_.M; }
  std::size_t distinct_tables() const noexcept { return spectra_.size(); }

  // All blocks at one time. Blocks are evaluated lazily and memoized by signature.
  class Snapshot {
   public:
    Snapshot(const TwoQubitPaths& owner, double t) : owner_(&owner), t_(t) {
      tables_.reserve(owner.spectra_.size());
      for (const auto& s : owner.spectra_) tables_.push_back(s.table(t));
    }

    double t() const noexcept { return t_; }
    int M() const noexcept { return owner_->M(); }

    TransferMap block(int i, int ip, int j, int jp) const {
      const int kl = owner_->key_.at(i).at(j);
      const int kr = owner_->key_.at(ip).at(jp);
      const int kind = (i == ip ? 1 : 0) | (j == jp ? 2 : 0);
      const auto sig = std::make_tuple(kl, kr, kind);
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = memo_.find(sig); it != memo_.end()) return it->second;
      }
      TransferMap T;
      switch (kind) {
        case 3: T = case_a_map(tables_[kl], tables_[kr]); break;
        case 1: T = case_b_map(tables_[kl], tables_[kr]); break;
        case 2: T = case_b_mirror_map(tables_[kl], tables_[kr]); break;
        default: T = case_c_map(tables_[kl], tables_[kr]); break;
      }
      std::lock_guard<std::mutex> lock(mutex_);
      return memo_.emplace(sig, std::move(T)).first->second;
    }

    // Σ_{ii'jj'} cA(i,i') cB(j,j') block(i,i',j,j')
    TransferMap combine(const Matrix& cA, const Matrix& cB) const {
      const int M = this->M();
      TransferMap out(4);
      for (int i = 0; i < M; ++i)
        for (int ip = 0; ip < M; ++ip) {
          if (cA(i, ip) == 0.0) continue;
          for (int j = 0; j < M; ++j)
            for (int jp = 0; jp < M; ++jp) {
              const cd c = cA(i, ip) * cB(j, jp);
              if (c == 0.0) continue;
              out += block(i, ip, j, jp) * c;
            }
        }
      return out;
    }

    // Representative blocks of a uniform ensemble.
    struct Representatives {
      TransferMap A, B, Bmirror, C;
    };
    Representatives representatives() const {
      if (M() < 2) throw std::invalid_argument("representatives: need M >= 2");
      return {block(0, 0, 0, 0), block(0, 0, 0, 1), block(0, 1, 0, 0), block(0, 1, 0, 1)};
    }

   private:
    const TwoQubitPaths* owner_;
    double t_;
    std::vector<TwoQubitAmplitudeTable> tables_;
    mutable std::mutex mutex_;
    mutable std::map<std::tuple<int, int, int>, TransferMap> memo_;
  };

  Snapshot at(double t) const { return Snapshot(*this, t); }

 private:
  PathEnsemble ensemble_;
  std::vector<TwoQubitSpectra> spectra_;
  std::vector<std::vector<int>> key_;
};

// Coefficient matrix ⟨ψ_φ|i⟩ ρ_p(i,i') ⟨i'|ψ_φ⟩ for one register.
inline Matrix measurement_coefficients(const PhasePattern& phases, const Matrix& path_state) {
  const int M = phases.M();
  if (path_state.rows() != M) throw std::invalid_argument("measurement: path state dimension");
  Matrix c(M, M);
  for (int i = 0; i < M; ++i)
    for (int ip = 0; ip < M; ++ip) c(i, ip) = phases.sign(i) * path_state(i, ip) * phases.sign(ip) / double(M);
  return c;
}

// Uniform superposition (1/M)Σ|i⟩⟨j| of one path register.
inline Matrix uniform_path_state(int M) { return Matrix::Constant(M, M, 1.0 / M); }

inline TransferMap selective_map(const TwoQubitPaths::Snapshot& snap, const PhasePattern& phases) {
  if (phases.M() != snap.M()) throw std::invalid_argument("selective_measure: pattern length != M");
  const Matrix c = measurement_coefficients(phases, uniform_path_state(snap.M()));
  return snap.combine(c, c);
}

inline Measurement selective_measure(const TwoQubitPaths::Snapshot& snap, const PhasePattern& phases,
                                     const Matrix& rho0) {
  return normalize_measurement(selective_map(snap, phases).apply(rho0));
}

// Uniform ensembles only: the three-weight shortcut for n flipped phases.
inline TransferMap uniform_map(const TwoQubitPaths::Snapshot& snap, int n) {
  const auto w = uniform_weights(snap.M(), n);
  const auto r = snap.representatives();
  return r.A * w.diag + (r.B + r.Bmirror) * (0.5 * w.single) + r.C * w.doubled;
}

inline TransferMap trace_paths_map(const TwoQubitPaths::Snapshot& snap) {
  const Matrix c = Matrix::Identity(snap.M(), snap.M()) / double(snap.M());
  return snap.combine(c, c);
}

inline Matrix trace_paths(const TwoQubitPaths::Snapshot& snap, const Matrix& rho0) {
  return trace_paths_map(snap).apply(rho0);
}

// ---- path decoherence ----------------------------------------------------------------

// Cyclic dissipator with L0 = |0⟩⟨1|, L1 = |1⟩⟨2|, L2 = |2⟩⟨0| and no Hamiltonian. The jump
// operators sum to L†L = I, so coherences decay as e^{−Γt} while populations relax
// through the circulant generator Γ(P − I).
inline Matrix evolve_path_lindblad(const Matrix& rho0, double Gamma, double t) {
  if (rho0.rows() != 3 || rho0.cols() != 3) throw std::invalid_argument("path Lindblad: only M = 3 is supported");
  if (Gamma < 0.0 || t < 0.0) throw std::invalid_argument("path Lindblad: Γ and t must be >= 0");
  const double x = Gamma * t;
  // exp(x P) with P³ = I: coefficients of I, P, P² from the cube roots of unity.
  std::array<double, 3> c{};
  for (int r = 0; r < 3; ++r) {
    cd acc = 0.0;
    for (int k = 0; k < 3; ++k) {
      const cd w = std::polar(1.0, 2.0 * M_PI * k / 3.0);
      acc += std::pow(w, -r) * std::exp(w * x);
    }
    c[r] = (acc / 3.0).real() * std::exp(-x);
  }
  Matrix out = rho0 * std::exp(-x);
  for (int i = 0; i < 3; ++i) {
    double p = 0.0;
    for (int r = 0; r < 3; ++r) p += c[r] * rho0((i + r) % 3, (i + r) % 3).real();
    out(i, i) = p;
  }
  return out;
}

inline Matrix evolve_path_lindblad(int M, double Gamma, double t) {
  if (M != 3) throw std::invalid_argument("path Lindblad: only M = 3 is supported");
  return evolve_path_lindblad(uniform_path_state(3), Gamma, t);
}

// Path registers decohered independently; their matrix elements replace the static
// coefficients of the selective measurement. Γ = 0 reproduces selective_measure.
inline TransferMap decohered_selective_map(const TwoQubitPaths::Snapshot& snap, const PhasePattern& phases,
                                           const Matrix& pathA, const Matrix& pathB) {
  return snap.combine(measurement_coefficients(phases, pathA), measurement_coefficients(phases, pathB));
}

inline Measurement decohered_selective_measure(const TwoQubitPaths::Snapshot& snap, const PhasePattern& phases,
                                               const Matrix& pathA, const Matrix& pathB, const Matrix& rho0) {
  return normalize_measurement(decohered_selective_map(snap, phases, pathA, pathB).apply(rho0));
}

// ---- single-qubit path blocks ---------------------------------------------------------

class SingleQubitPaths {
 public:
  SingleQubitPaths(double omega, BathSpec bath, std::vector<double> betas) : betas_(std::move(betas)) {
    bath.validate();
    if (betas_.empty()) throw std::invalid_argument("SingleQubitPaths: need at least one path");
    std::map<double, int> seen;
    for (double b : betas_) {
      auto it = seen.find(b);
      if (it == seen.end()) {
        SingleQubitParams p{omega, bath};
        p.bath.beta = b;
        it = seen.emplace(b, static_cast<int>(spectra_.size())).first;
        spectra_.emplace_back(p);
      }
      key_.push_back(it->second);
    }
  }

  int M() const noexcept { return static_cast<int>(betas_.size()); }
  bool uniform() const {
    for (double b : betas_)
      if (b != betas_.front()) return false;
    return true;
  }

  class Snapshot {
   public:
    Snapshot(const SingleQubitPaths& owner, double t) : owner_(&owner) {
      for (const auto& s : owner.spectra_) tables_.push_back(s.table(t));
    }
    int M() const noexcept { return owner_->M(); }

    TransferMap block(int i, int ip) const {
      const int kl = owner_->key_.at(i), kr = owner_->key_.at(ip);
      return i == ip ? single_qubit_shared_map(tables_[kl], tables_[kr])
                     : single_qubit_returning_map(tables_[kl], tables_[kr]);
    }

    TransferMap combine(const Matrix& c) const {
      TransferMap out(2);
      for (int i = 0; i < M(); ++i)
        for (int ip = 0; ip < M(); ++ip)
          if (c(i, ip) != 0.0) out += block(i, ip) * c(i, ip);
      return out;
    }

   private:
    const SingleQubitPaths* owner_;
    std::vector<SingleQubitAmplitudeTable> tables_;
  };

  Snapshot at(double t) const { return Snapshot(*this, t); }

 private:
  std::vector<double> betas_;
  std::vector<SingleQubitSpectra> spectra_;
  std::vector<int> key_;
};

inline TransferMap selective_map(const SingleQubitPaths::Snapshot& snap, const PhasePattern& phases) {
  if (phases.M() != snap.M()) throw std::invalid_argument("selective_measure: pattern length != M");
  return snap.combine(measurement_coefficients(phases, uniform_path_state(snap.M())));
}

// Single register, uniform baths: (1/M)·diag + ((M−2n)² − M)/M²·cross.
inline TransferMap uniform_map(const SingleQubitPaths::Snapshot& snap, int n) {
  const int M = snap.M();
  if (n < 0 || n > M) throw std::invalid_argument("uniform_map: need 0 <= n <= M");
  const double m = M;
  const double k = (m - 2.0 * n) * (m - 2.0 * n) - m;
  TransferMap out = snap.block(0, 0) * (1.0 / m);
  if (M > 1) out += snap.block(0, 1) * (k / (m * m));
  return out;
}

inline TransferMap trace_paths_map(const SingleQubitPaths::Snapshot& snap) {
  return snap.combine(Matrix::Identity(snap.M(), snap.M()) / double(snap.M()));
}

}  // namespace iqsim
