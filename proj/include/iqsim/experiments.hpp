// experiments.hpp: experiment runners driven by a Config and emitted as a Table.
//
// Each experiment reads its parameters first (so unknown keys are rejected before any
// work), then evaluates every time-grid point independently.

#pragma once

#include "iqsim/config.hpp"
#include "iqsim/csv.hpp"
#include "iqsim/interferometer.hpp"
#include "iqsim/measures.hpp"
#include "iqsim/parallel.hpp"
#include "iqsim/teleport.hpp"

#include <charconv>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

namespace iqsim::experiments {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TimeGrid {
  double t_max{20.0};
  int steps{400};
  int size() const { return steps + 1; }
  double at(int k) const { return t_max * k / steps; }
};

// Worst physicality figures over every normalized state an experiment produced.
struct PhysicalityStats {
  long long states{0};
  long long flagged{0};
  double trace_error{0.0};
  double hermiticity_error{0.0};
  double min_eigenvalue{1.0};

  void add(const Physicality& p, bool ok) {
    ++states;
    if (!ok) ++flagged;
    trace_error = std::max(trace_error, p.trace_error);
    hermiticity_error = std::max(hermiticity_error, p.hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, p.min_eigenvalue);
  }
  void merge(const PhysicalityStats& o) {
    states += o.states;
    flagged += o.flagged;
    trace_error = std::max(trace_error, o.trace_error);
    hermiticity_error = std::max(hermiticity_error, o.hermiticity_error);
    min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
  }
};

// A post-selected or evolved state together with its status flag.
struct Outcome {
  std::string flag{"ok"};
  double probability{kNaN};
  Matrix state;
  bool ok() const { return flag == "ok"; }
};

inline Outcome checked(const Matrix& unnormalized, PhysicalityStats& stats) {
  Outcome o;
  o.probability = unnormalized.trace().real();
  if (!(o.probability > tol::kErased)) {
    o.flag = "erased";
    return o;
  }
  o.state = unnormalized / o.probability;
  const auto phys = check_physical(o.state);
  stats.add(phys, phys.ok());
  if (!phys.ok()) o.flag = "unphysical";
  return o;
}

// ---- config readers ------------------------------------------------------------------

inline TimeGrid read_time(const Config& c) {
  TimeGrid g{c.get_double("time.t_max", 20.0), c.get_int("time.steps", 400)};
  if (!(g.t_max > 0.0)) c.fail("time.t_max", "must be > 0");
  if (g.steps < 1) c.fail("time.steps", "must be >= 1");
  return g;
}

inline BathSpec read_bath(const Config& c) {
  BathSpec b{c.get_int("bath.N"), c.get_double("bath.s"), c.get_double("bath.f"), 0.0};
  if (b.N < 1) c.fail("bath.N", "must be >= 1");
  return b;
}

inline double beta_of(const Config& c, const std::string& key, double T) {
  if (T < 0.0) c.fail(key, "temperatures must be >= 0");
  return T == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / T;
}

// One temperature applies to every path; otherwise exactly M are required.
inline std::vector<double> read_betas(const Config& c, const std::string& key, int M) {
  const auto T = c.get_doubles(key);
  if (T.size() != 1 && static_cast<int>(T.size()) != M)
    c.fail(key, "expected 1 or " + std::to_string(M) + " temperatures, got " + std::to_string(T.size()));
  std::vector<double> betas;
  for (int i = 0; i < M; ++i) betas.push_back(beta_of(c, key, T.size() == 1 ? T[0] : T[i]));
  return betas;
}

// Accepts plain numbers and multiples of pi such as `pi`, `pi/2`, `3pi/4`, `-pi`.
inline double parse_angle(const Config& c, const std::string& key, const std::string& s) {
  auto number = [&](const std::string& text, double& out) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
  };
  double v = 0.0;
  const auto p = s.find("pi");
  if (p == std::string::npos) {
    if (!number(s, v)) c.fail(key, "expected an angle, got '" + s + "'");
    return v;
  }
  double num = 1.0, den = 1.0;
  const std::string head = s.substr(0, p), tail = s.substr(p + 2);
  bool ok = true;
  if (head == "-") num = -1.0;
  else if (!head.empty()) ok = number(head, num);
  if (!tail.empty()) ok = ok && tail[0] == '/' && number(tail.substr(1), den) && den != 0.0;
  if (!ok) c.fail(key, "expected an angle, got '" + s + "'");
  return num * M_PI / den;
}

inline CouplingRule read_coupling(const Config& c) {
  const std::string rule = c.get_string("coupling.rule", "constant");
  if (rule == "constant") return CouplingRule::constant(c.get_double("coupling.J"));
  if (rule == "inverse-square") {
    const double d = c.get_double("coupling.d");
    if (!(d > 0.0)) c.fail("coupling.d", "must be > 0");
    return CouplingRule::inverse_square(c.get_double("coupling.gamma"), d);
  }
  c.fail("coupling.rule", "expected 'constant' or 'inverse-square', got '" + rule + "'");
}

inline int bell_index(const Config& c, const std::string& key, const std::string& name) {
  for (int k = 0; k < 4; ++k) {
    std::string label = kBellLabels[k];
    for (auto& ch : label) ch = static_cast<char>(std::tolower(ch));
    if (name == label) return k;
  }
  c.fail(key, "expected one of phi+, phi-, psi+, psi-, got '" + name + "'");
}

// Phase patterns per path count: `paths.flips` lists flip counts (leading paths flipped),
// `paths.patterns` lists explicit 0/1 strings.
inline std::vector<PhasePattern> read_patterns(const Config& c, int M) {
  std::vector<PhasePattern> out;
  if (c.has("paths.flips") && c.has("paths.patterns")) c.fail("paths.patterns", "give either flips or patterns");
  if (c.has("paths.patterns")) {
    for (const auto& s : c.get_strings("paths.patterns")) {
      PhasePattern p;
      try {
        p = PhasePattern::parse(s);
      } catch (const std::invalid_argument& e) {
        c.fail("paths.patterns", e.what());
      }
      if (p.M() != M) c.fail("paths.patterns", "pattern '" + s + "' has length != M = " + std::to_string(M));
      out.push_back(p);
    }
    return out;
  }
  const auto flips = c.has("paths.flips") ? c.get_ints("paths.flips") : std::vector<int>{0};
  for (int n : flips) {
    if (n < 0 || n > M) c.fail("paths.flips", "flip count " + std::to_string(n) + " outside 0..M = " + std::to_string(M));
    out.push_back(PhasePattern::leading(M, n));
  }
  return out;
}

inline std::vector<int> read_path_counts(const Config& c) {
  const auto Ms = c.get_ints("paths.M");
  if (Ms.empty()) c.fail("paths.M", "needs at least one value");
  for (int M : Ms)
    if (M < 1) c.fail("paths.M", "path counts must be >= 1");
  return Ms;
}

// ---- two-qubit interference ------------------------------------------------

struct TwoQubitRun {
  double omega1{0.0}, omega2{0.0};
  BathSpec bath;
  CouplingRule coupling;
  Matrix rho0;
  struct Register {
    PathEnsemble ensemble;
    std::vector<PhasePattern> patterns;
  };
  std::vector<Register> registers;  // one per path count
  TimeGrid grid;
  bool decoherence{false};
  double Gamma{0.0};
};

inline TwoQubitRun read_two_qubit(const Config& c, bool decoherence) {
  TwoQubitRun r;
  r.omega1 = c.get_double("system.omega1");
  r.omega2 = c.get_double("system.omega2");
  r.bath = read_bath(c);
  r.coupling = read_coupling(c);
  r.rho0 = projector(bell_state(bell_index(c, "state.input", c.get_string("state.input", "phi+"))));
  const auto Ms = read_path_counts(c);
  for (int M : Ms) {
    PathEnsemble e{M, read_betas(c, "paths.temperatures", M), r.coupling};
    if (!e.uniform() && M > 12) c.fail("paths.M", "non-uniform ensembles are limited to M <= 12");
    r.registers.push_back({e, read_patterns(c, M)});
  }
  r.grid = read_time(c);
  r.decoherence = decoherence;
  if (decoherence) {
    r.Gamma = c.get_double("decoherence.Gamma");
    if (r.Gamma < 0.0) c.fail("decoherence.Gamma", "must be >= 0");
    if (Ms.size() != 1 || Ms[0] != 3) c.fail("paths.M", "path decoherence is defined for M = 3 only");
  }
  return r;
}

inline Table run_two_qubit(const TwoQubitRun& r, PhysicalityStats* stats = nullptr) {
  Table table{{"t", "series", "M", "n", "pattern", "probability", "coherence", "concurrence", "discord", "flag"}, {}};
  PhysicalityStats total;
  std::mutex merge;
  for (const auto& reg : r.registers) {
    const TwoQubitPaths paths(r.omega1, r.omega2, r.bath, reg.ensemble);
    const int M = reg.ensemble.M;
    const bool fast = reg.ensemble.uniform() && M >= 2;
    // series layout: traced, then each pattern (selective, plus decohered when enabled)
    const int per_pattern = r.decoherence ? 2 : 1;
    const std::size_t nseries = 1 + reg.patterns.size() * per_pattern;
    std::vector<std::vector<Row>> rows(nseries, std::vector<Row>(r.grid.size()));
    parallel_for(
        r.grid.size(),
        [&](std::size_t k) {
          PhysicalityStats local;
          const double t = r.grid.at(static_cast<int>(k));
          const auto snap = paths.at(t);
          auto emit = [&](std::size_t series, const std::string& name, const PhasePattern* p, const Matrix& un) {
            const auto o = checked(un, local);
            const bool ok = o.ok();
            rows[series][k] = Row{t,
                                  name,
                                  static_cast<long long>(M),
                                  static_cast<long long>(p ? p->count() : 0),
                                  p ? p->str() : std::string("-"),
                                  o.probability,
                                  ok ? l1_coherence(o.state) : kNaN,
                                  ok ? concurrence(o.state) : kNaN,
                                  ok ? geometric_discord(o.state) : kNaN,
                                  o.flag};
          };
          const TransferMap traced = fast || M == 1 ? snap.block(0, 0, 0, 0) : trace_paths_map(snap);
          emit(0, "traced", nullptr, traced.apply(r.rho0));
          Matrix pathState;
          if (r.decoherence) pathState = evolve_path_lindblad(3, r.Gamma, t);
          for (std::size_t i = 0; i < reg.patterns.size(); ++i) {
            const auto& p = reg.patterns[i];
            // Uniform ensembles depend on the flip count only.
            const TransferMap sel = fast ? uniform_map(snap, p.count()) : selective_map(snap, p);
            emit(1 + i * per_pattern, "selective", &p, sel.apply(r.rho0));
            if (r.decoherence)
              emit(2 + i * per_pattern, "decohered", &p,
                   decohered_selective_map(snap, p, pathState, pathState).apply(r.rho0));
          }
          std::lock_guard<std::mutex> lock(merge);
          total.merge(local);
        },
        1);
    for (auto& series : rows)
      for (auto& row : series) table.rows.push_back(std::move(row));
  }
  if (stats) stats->merge(total);
  return table;
}

// ---- single-qubit metrology -------------------------------------------------

struct QfiRun {
  double omega{0.0};
  BathSpec bath;
  double phi{0.0};
  struct Register {
    std::vector<double> betas;
    std::vector<PhasePattern> patterns;
  };
  std::vector<Register> registers;
  TimeGrid grid;
};

inline QfiRun read_qfi(const Config& c) {
  QfiRun r;
  r.omega = c.get_double("system.omega");
  r.bath = read_bath(c);
  r.phi = c.has("qfi.phi") ? parse_angle(c, "qfi.phi", c.get_string("qfi.phi")) : 0.0;
  for (int M : read_path_counts(c)) r.registers.push_back({read_betas(c, "paths.temperatures", M), read_patterns(c, M)});
  r.grid = read_time(c);
  return r;
}

// Phase-encoded probe (|0⟩ + e^{iφ}|1⟩)/√2 and its φ-derivative.
inline std::pair<Matrix, Matrix> phase_probe(double phi) {
  Vector psi(2), dpsi(2);
  psi(qubit_index(0)) = 1.0 / std::sqrt(2.0);
  psi(qubit_index(1)) = std::polar(1.0 / std::sqrt(2.0), phi);
  dpsi(qubit_index(0)) = 0.0;
  dpsi(qubit_index(1)) = kI * psi(qubit_index(1));
  return {psi * psi.adjoint(), dpsi * psi.adjoint() + psi * dpsi.adjoint()};
}

// QFI of the normalized output of a linear map: ρ = T(ρ0)/p, ∂ρ = (T(∂ρ0) − ρ Tr T(∂ρ0))/p.
inline double qfi_through(const TransferMap& T, const Matrix& drho0, const Outcome& o) {
  if (!o.ok()) return kNaN;
  const Matrix dn = T.apply(drho0);
  const Matrix drho = (dn - o.state * dn.trace()) / o.probability;
  return qfi_general(o.state, drho);
}

inline Table run_qfi(const QfiRun& r, PhysicalityStats* stats = nullptr) {
  Table table{{"t", "series", "M", "n", "pattern", "probability", "qfi", "flag"}, {}};
  const auto [rho0, drho0] = phase_probe(r.phi);
  PhysicalityStats total;
  std::mutex merge;
  for (const auto& reg : r.registers) {
    const SingleQubitPaths paths(r.omega, r.bath, reg.betas);
    const int M = paths.M();
    const bool fast = paths.uniform();
    std::vector<std::vector<Row>> rows(1 + reg.patterns.size(), std::vector<Row>(r.grid.size()));
    parallel_for(
        r.grid.size(),
        [&](std::size_t k) {
          PhysicalityStats local;
          const double t = r.grid.at(static_cast<int>(k));
          const auto snap = paths.at(t);
          auto emit = [&](std::size_t series, const std::string& name, const PhasePattern* p, const TransferMap& T) {
            auto o = checked(T.apply(rho0), local);
            rows[series][k] = Row{t,
                                  name,
                                  static_cast<long long>(M),
                                  static_cast<long long>(p ? p->count() : 0),
                                  p ? p->str() : std::string("-"),
                                  o.probability,
                                  qfi_through(T, drho0, o),
                                  o.flag};
          };
          emit(0, "traced", nullptr, fast ? snap.block(0, 0) : trace_paths_map(snap));
          for (std::size_t i = 0; i < reg.patterns.size(); ++i) {
            const auto& p = reg.patterns[i];
            emit(1 + i, "selective", &p, fast ? uniform_map(snap, p.count()) : selective_map(snap, p));
          }
          std::lock_guard<std::mutex> lock(merge);
          total.merge(local);
        },
        1);
    for (auto& series : rows)
      for (auto& row : series) table.rows.push_back(std::move(row));
  }
  if (stats) stats->merge(total);
  return table;
}

// ---- teleportation ------------------------------------------------------------

struct TeleportRun {
  double omega{0.0};
  BathSpec bath;
  std::array<double, 2> betas{};
  Vec3 input{1.0, 0.0, 0.0};
  bool sphere_average{false};
  TimeGrid grid;
};

inline TeleportRun read_teleport(const Config& c) {
  TeleportRun r;
  r.omega = c.get_double("system.omega");
  r.bath = read_bath(c);
  const auto b = read_betas(c, "paths.temperatures", 2);
  r.betas = {b[0], b[1]};
  if (c.has("teleport.input")) {
    const auto v = c.get_doubles("teleport.input");
    if (v.size() != 3) c.fail("teleport.input", "expected a Bloch vector x, y, z");
    r.input = Vec3(v[0], v[1], v[2]);
    if (std::abs(r.input.norm() - 1.0) > 1e-10) c.fail("teleport.input", "the input must be a pure state (|n| = 1)");
  }
  const int sphere = c.get_int("teleport.sphere_average", 0);
  if (sphere != 0 && sphere != 1) c.fail("teleport.sphere_average", "expected 0 or 1");
  r.sphere_average = sphere == 1;
  r.grid = read_time(c);
  return r;
}

inline Table run_teleport(const TeleportRun& r, PhysicalityStats* stats = nullptr) {
  Table table{{"t", "P_plus", "F_plus", "P_minus", "F_minus", "F_standard", "F_definite", "F_participatory",
               "F_sphere", "flag"},
              std::vector<Row>(r.grid.size())};
  SingleQubitParams p0{r.omega, r.bath}, p1{r.omega, r.bath};
  p0.bath.beta = r.betas[0];
  p1.bath.beta = r.betas[1];
  const SingleQubitSpectra S0(p0), S1(p1);
  const double h = 1.0 / std::sqrt(2.0);
  PhysicalityStats total;
  std::mutex merge;
  parallel_for(
      r.grid.size(),
      [&](std::size_t k) {
        PhysicalityStats local;
        const double t = r.grid.at(static_cast<int>(k));
        const auto T0 = S0.table(t), T1 = S1.table(t);
        std::string flag = "ok";
        auto note = [&](const Outcome& o) {
          if (o.flag == "unphysical" || (o.flag == "erased" && flag == "ok")) flag = o.flag;
        };

        const Matrix rho = assemble_teleport_state(h, h, T0, T1);
        std::array<double, 2> P{kNaN, kNaN}, F{kNaN, kNaN};
        double Fstd = 0.0;
        for (int b = 0; b < 2; ++b) {
          const auto o = checked(control_projection(rho, b == 0 ? +1 : -1), local);
          note(o);
          P[b] = o.probability;
          if (o.ok()) {
            F[b] = teleport_fidelity_max(o.state);
            Fstd += o.probability * F[b];
          }
        }

        const Matrix def = assemble_teleport_state(1.0, 0.0, T0, T1);
        const std::array<int, 3> dims{2, 2, 2};
        const std::array<int, 2> ab{0, 1};
        const auto od = checked(partial_trace(def, dims, ab), local);
        note(od);
        const double Fdef = od.ok() ? teleport_fidelity_max(od.state) : kNaN;

        const auto part = participatory_protocol(T0, T1, r.input);
        for (const auto& br : part.branches)
          if (br.probability > tol::kErased) {
            const auto ph = check_physical(br.state);
            local.add(ph, ph.ok());
            if (!ph.ok()) flag = "unphysical";
          }
        const double Fsphere = r.sphere_average ? participatory_sphere_average(T0, T1) : kNaN;
        table.rows[k] = Row{t, P[0], F[0], P[1], F[1], Fstd, Fdef, part.fidelity, Fsphere, flag};
        std::lock_guard<std::mutex> lock(merge);
        total.merge(local);
      },
      1);
  if (stats) stats->merge(total);
  return table;
}

// ---- WPEI ---------------------------------------------------------------------

struct WpeiRun {
  double omega{0.0};
  BathSpec bath;
  std::array<double, 2> betas{};
  std::vector<std::pair<double, double>> cases;  // (α, θ)
  std::vector<std::pair<std::string, std::string>> labels;
  TimeGrid grid;
};

inline WpeiRun read_wpei(const Config& c) {
  WpeiRun r;
  r.omega = c.get_double("system.omega");
  r.bath = read_bath(c);
  const auto b = read_betas(c, "paths.temperatures", 2);
  r.betas = {b[0], b[1]};
  const auto alphas = c.get_strings("state.alpha"), thetas = c.get_strings("state.theta");
  if (alphas.size() != thetas.size()) c.fail("state.theta", "needs as many entries as state.alpha");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    r.cases.emplace_back(parse_angle(c, "state.alpha", alphas[i]), parse_angle(c, "state.theta", thetas[i]));
    r.labels.emplace_back(alphas[i], thetas[i]);
  }
  r.grid = read_time(c);
  return r;
}

inline Table run_wpei(const WpeiRun& r, PhysicalityStats* stats = nullptr) {
  Table table{{"t", "case", "alpha", "theta", "P1", "P2", "V1", "V2", "C", "eta", "I", "flag"}, {}};
  SingleQubitParams p0{r.omega, r.bath}, p1{r.omega, r.bath};
  p0.bath.beta = r.betas[0];
  p1.bath.beta = r.betas[1];
  const SingleQubitSpectra S0(p0), S1(p1);
  std::vector<std::vector<Row>> rows(r.cases.size(), std::vector<Row>(r.grid.size()));
  PhysicalityStats total;
  std::mutex merge;
  parallel_for(
      r.grid.size(),
      [&](std::size_t k) {
        PhysicalityStats local;
        const double t = r.grid.at(static_cast<int>(k));
        const auto T0 = S0.table(t), T1 = S1.table(t);
        for (std::size_t i = 0; i < r.cases.size(); ++i) {
          const auto [alpha, theta] = r.cases[i];
          const auto o = checked(assemble_control_system_state(wpei_initial_state(alpha, theta), T0, T1), local);
          const std::string label = r.labels[i].first + "/" + r.labels[i].second;
          if (o.ok()) {
            const auto w = wpei(o.state);
            rows[i][k] = Row{t, label, alpha, theta, w.P1, w.P2, w.V1, w.V2, w.C, w.eta, w.I, o.flag};
          } else {
            rows[i][k] = Row{t, label, alpha, theta, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, o.flag};
          }
        }
        std::lock_guard<std::mutex> lock(merge);
        total.merge(local);
      },
      1);
  for (auto& series : rows)
    for (auto& row : series) table.rows.push_back(std::move(row));
  if (stats) stats->merge(total);
  return table;
}

// ---- dispatch --------------------------------------------------------------------------

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"two-qubit", "decoherence", "teleport", "qfi", "wpei"};
  return n;
}

// Reads, validates (including unknown keys) and runs one experiment.
inline Table run(const std::string& name, const Config& c, PhysicalityStats* stats = nullptr) {
  if (c.has("experiment") && c.get_string("experiment") != name)
    c.fail("experiment", "config is for '" + c.get_string("experiment") + "', not '" + name + "'");
  if (name == "two-qubit" || name == "decoherence") {
    const auto r = read_two_qubit(c, name == "decoherence");
    c.reject_unknown_keys();
    return run_two_qubit(r, stats);
  }
  if (name == "qfi") {
    const auto r = read_qfi(c);
    c.reject_unknown_keys();
    return run_qfi(r, stats);
  }
  if (name == "teleport") {
    const auto r = read_teleport(c);
    c.reject_unknown_keys();
    return run_teleport(r, stats);
  }
  if (name == "wpei") {
    const auto r = read_wpei(c);
    c.reject_unknown_keys();
    return run_wpei(r, stats);
  }
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

}  // namespace iqsim::experiments
