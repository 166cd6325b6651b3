// acceptance: one [PASS]/[FAIL] line per acceptance criterion; exit status 1 if any line fails.
//
//   acceptance [output-dir]
//
// Experiment CSVs are written to output-dir (default: acceptance_out).

#include "iqsim/config.hpp"
#include "iqsim/csv.hpp"
#include "iqsim/experiments.hpp"
#include "iqsim/oracle.hpp"
#include "iqsim/verify.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#ifndef IQSIM_CONFIG_DIR
#define IQSIM_CONFIG_DIR "configs"
#endif

using namespace iqsim;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& text) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), text.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// Runs `fn` and turns an escaped exception into a failing line.
void guarded(const std::string& name, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

Matrix bell() { return projector(bell_state(0)); }

Matrix random_state(std::mt19937& rng, int d, int rank) {
  std::normal_distribution<double> g;
  Matrix A(d, rank);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < rank; ++j) A(i, j) = cd(g(rng), g(rng));
  Matrix rho = A * A.adjoint();
  return rho / rho.trace();
}

Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> g;
  Mat3 A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = g(rng);
  Eigen::HouseholderQR<Mat3> qr(A);
  Mat3 Q = qr.householderQ();
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

std::string experiment_of(const fs::path& cfg) { return Config::parse_file(cfg.string()).get_string("experiment"); }

void write(const fs::path& path, const std::string& name, const Config& c, const Table& t) {
  std::ofstream f(path, std::ios::binary);
  write_csv(f, name, c.echo(), t);
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criteria ------------------------------------------------------------------------

void oracle_equivalence() {
  const auto r = verify::oracle_blocks(20, 4);
  report("oracle equivalence", r.passed && r.seconds < 60.0,
         fmt("N=4, 20 draws, Case A/B/mirror/C and teleportation state, max error %.2e (limit 1e-9), %.2f s (limit 60 s)",
             r.value, r.seconds));
}

void conservation() {
  const auto r = verify::conservation(1000);
  report("conservation", r.passed && r.seconds < 10.0,
         fmt("1000 sectors, N in 1..100, t in [0,20], 4 two-qubit + 2 single-qubit laws, max |norm-1| %.2e "
             "(limit 1e-12), %.2f s (limit 10 s)",
             r.value, r.seconds));
}

void physicality(const fs::path& out) {
  experiments::PhysicalityStats total;
  std::string detail;
  std::vector<fs::path> configs;
  for (const auto& e : fs::directory_iterator(IQSIM_CONFIG_DIR))
    if (e.path().extension() == ".cfg") configs.push_back(e.path());
  std::sort(configs.begin(), configs.end());
  if (configs.empty()) throw std::runtime_error("no configs found in " IQSIM_CONFIG_DIR);
  for (const auto& cfg : configs) {
    const auto c = Config::parse_file(cfg.string());
    const auto name = experiment_of(cfg);
    experiments::PhysicalityStats s;
    const auto t0 = std::chrono::steady_clock::now();
    const auto table = experiments::run(name, c, &s);
    write(out / (cfg.stem().string() + ".csv"), name, c, table);
    detail += fmt(" %s:%lld/%lld(%.0fs)", cfg.stem().c_str(), s.flagged, s.states, seconds_since(t0));
    total.merge(s);
  }
  const bool pass = total.flagged == 0 && total.trace_error <= 1e-12 && total.hermiticity_error <= 1e-12 &&
                    total.min_eigenvalue >= -1e-10;
  report("physicality", pass,
         fmt("%zu configs, %lld states, %lld violating; worst trace %.2e, Hermiticity %.2e, min eigenvalue %.2e; "
             "violating/states per config:",
             configs.size(), total.states, total.flagged, total.trace_error, total.hermiticity_error,
             total.min_eigenvalue) +
             detail);
}

void interference_identities() {
  const BathSpec bath{100, 0.5, 1.0, 1.0 / 0.3};
  const Matrix rho0 = bell();
  double erasure = 0.0, symmetry = 0.0, weights = 0.0;
  for (int M = 2; M <= 12; ++M) {
    const TwoQubitPaths paths(1.2, 0.8, bath, PathEnsemble::uniform_ensemble(M, 1.0 / 0.3, 0.5));
    if (M % 2 == 0) erasure = std::max(erasure, uniform_map(paths.at(0.0), M / 2).apply(rho0).norm());
    for (int k = 0; k < 50; ++k) {
      const auto snap = paths.at(20.0 * k / 49);
      for (int n = 0; n <= M; ++n) {
        const Matrix un = uniform_map(snap, n).apply(rho0);
        weights = std::max(weights, max_abs_diff(un, selective_map(snap, PhasePattern::leading(M, n)).apply(rho0)));
        const Matrix mirror = uniform_map(snap, M - n).apply(rho0);
        const double p = un.trace().real();
        symmetry = std::max(symmetry, p > tol::kErased ? max_abs_diff(un / p, mirror / mirror.trace().real())
                                                       : max_abs_diff(un, mirror));
      }
    }
  }
  report("interference identities", erasure <= 1e-12 && symmetry <= 1e-12 && weights <= 1e-12,
         fmt("M=2..12, N=100, 50 times in [0,20]: erasure norm %.2e, n<->M-n symmetry %.2e, weights vs phase sum "
             "%.2e (limits 1e-12)",
             erasure, symmetry, weights));
}

void factorization() {
  std::mt19937 rng(404);
  double worst = 0.0;
  for (int N = 1; N <= 6; ++N)
    for (int draw = 0; draw < 3; ++draw) {
      const double t = std::uniform_real_distribution<double>(0.0, 20.0)(rng);
      // Qubit-1 baths carry labels 0,1 and qubit-2 baths 2,3; J differs per pair.
      std::uniform_real_distribution<double> u(0.2, 2.0), sgn(-1.0, 1.0), temp(0.1, 1.0);
      const double w1 = u(rng), w2 = u(rng), sv = sgn(rng), f = u(rng);
      std::array<double, 4> beta{};
      for (auto& b : beta) b = 1.0 / temp(rng);
      auto params = [&](double b1, double b2) { return TwoQubitParams{w1, w2, sgn(rng), {N, sv, f, b1}, {N, sv, f, b2}}; };
      const std::array<TwoQubitParams, 4> p{params(beta[0], beta[2]), params(beta[0], beta[3]), params(beta[1], beta[2]),
                                            params(beta[1], beta[3])};
      std::array<TwoQubitAmplitudeTable, 4> T{compute_amplitude_table(p[0], t), compute_amplitude_table(p[1], t),
                                              compute_amplitude_table(p[2], t), compute_amplitude_table(p[3], t)};
      worst = std::max(worst, max_abs_diff(case_b_map(T[0], T[1]).matrix(), naive::case_b_map(T[0], T[1], 1).matrix()));
      worst = std::max(worst,
                       max_abs_diff(case_b_mirror_map(T[0], T[2]).matrix(), naive::case_b_map(T[0], T[2], 2).matrix()));
      worst = std::max(worst, max_abs_diff(case_c_map(T[0], T[3]).matrix(), naive::case_c_map(T[0], T[3]).matrix()));
    }

  const auto t0 = std::chrono::steady_clock::now();
  const BathSpec b0{100, 0.8, 1.2, 1.0 / 0.1}, b1{100, 0.8, 1.2, 1.0 / 0.3};
  const TwoQubitParams pij{2.0, 1.5, 0.7, b0, b0}, pijp{2.0, 1.5, 0.4, b0, b1}, pipj{2.0, 1.5, 0.4, b1, b0},
      pipjp{2.0, 1.5, 0.9, b1, b1};
  const double t = 7.3;
  const auto Tij = compute_amplitude_table(pij, t), Tijp = compute_amplitude_table(pijp, t);
  const auto Tipj = compute_amplitude_table(pipj, t), Tipjp = compute_amplitude_table(pipjp, t);
  const Matrix rho0 = bell();
  const Matrix out = case_a_map(Tij).apply(rho0) + case_b_map(Tij, Tijp).apply(rho0) +
                     case_b_mirror_map(Tij, Tipj).apply(rho0) + case_c_map(Tij, Tipjp).apply(rho0);
  const double secs = seconds_since(t0);
  report("factorization", worst <= 1e-12 && secs < 5.0 && std::isfinite(out.norm()),
         fmt("factorized vs naive sums at N=1..6 (18 draws) %.2e (limit 1e-12); N=100 assembly of all cases at one "
             "time %.3f s (limit 5 s)",
             worst, secs));
}

void decoherence_limit(const fs::path& out) {
  auto c = Config::parse_file(IQSIM_CONFIG_DIR "/fig4.cfg");
  c.set("bath.N", "30");
  const auto run = experiments::read_two_qubit(c, true);
  const auto& reg = run.registers.at(0);
  const TwoQubitPaths paths(run.omega1, run.omega2, run.bath, reg.ensemble);
  double worst = 0.0, worst_t = 0.0;
  std::string worst_pattern;
  std::vector<double> settle(reg.patterns.size(), 0.0);  // last grid time violating the bound
  for (int k = 0; k < run.grid.size(); ++k) {
    const double t = run.grid.at(k);
    const auto snap = paths.at(t);
    const Matrix traced = normalize_measurement(trace_paths(snap, run.rho0)).state;
    const Matrix ps = evolve_path_lindblad(3, run.Gamma, t);
    for (std::size_t i = 0; i < reg.patterns.size(); ++i) {
      const auto m = decohered_selective_measure(snap, reg.patterns[i], ps, ps, run.rho0);
      const double d = (m.state - traced).norm();
      if (d > 1e-3) settle[i] = t;
      if (t >= 10.0 && d > worst) worst = d, worst_t = t, worst_pattern = reg.patterns[i].str();
    }
  }
  std::string settled;
  for (std::size_t i = 0; i < reg.patterns.size(); ++i)
    settled += fmt(" %s:t>%.2f", reg.patterns[i].str().c_str(), settle[i]);
  const auto table = experiments::run_two_qubit(run);
  write(out / "decoherence_N30.csv", "decoherence", c, table);
  report("decoherence limit", worst <= 1e-3,
         fmt("N=30, Gamma=0.5, max Frobenius distance to the traced state over t>=10 is %.2e at t=%.2f pattern %s "
             "(limit 1e-3); distance stays <=1e-3 for",
             worst, worst_t, worst_pattern.c_str()) +
             settled);
}

void measures_cross_checks() {
  double werner = 0.0;
  for (int k = 0; k <= 100; ++k) {
    const double p = k / 100.0;
    const Matrix w = p * bell() + (1.0 - p) * Matrix::Identity(4, 4) / 4.0;
    werner = std::max(werner, std::abs(concurrence(w) - std::max(0.0, (3.0 * p - 1.0) / 2.0)));
    werner = std::max(werner, std::abs(teleport_fidelity_max(w) - 0.5 * (1.0 + p)));
  }

  std::mt19937 rng(808);
  double discord = 0.0;
  for (int k = 0; k < 12; ++k) {
    const Matrix r = random_state(rng, 4, 1 + k % 4);
    discord = std::max(discord, std::abs(geometric_discord(r) - oracle::discord_by_minimization(r)));
  }

  double bloch = 0.0, fd = 0.0;
  std::normal_distribution<double> g;
  for (int k = 0; k < 200; ++k) {
    // r(θ) = R_z(θ) r0 + θ v, kept inside the ball.
    const Vec3 r0 = Vec3(g(rng), g(rng), g(rng)).normalized() * 0.8 * std::abs(std::tanh(g(rng)));
    const Vec3 v = Vec3(g(rng), g(rng), g(rng)) * 0.02;
    auto r = [&](double th) -> Vec3 {
      return Vec3(r0(0) * std::cos(th) - r0(1) * std::sin(th), r0(0) * std::sin(th) + r0(1) * std::cos(th), r0(2)) +
             th * v;
    };
    auto dr = [&](double th) -> Vec3 {
      return Vec3(-r0(0) * std::sin(th) - r0(1) * std::cos(th), r0(0) * std::cos(th) - r0(1) * std::sin(th), 0.0) + v;
    };
    const double th = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    if (r(th).norm() >= 0.95) continue;
    const double analytic = qfi_general(from_bloch(r(th)), from_bloch(dr(th)) - 0.5 * Matrix::Identity(2, 2));
    bloch = std::max(bloch, std::abs(analytic - qfi_bloch(r(th), dr(th))));
    const double numeric = qfi_general([&](double x) { return from_bloch(r(x)); }, th);
    fd = std::max(fd, std::abs(numeric - analytic) / analytic);
  }
  report("measures cross-checks", werner <= 1e-12 && discord <= 1e-4 && bloch <= 1e-8 && fd <= 1e-5,
         fmt("Werner concurrence/fidelity %.2e (limit 1e-12); discord vs minimization %.2e (limit 1e-4); "
             "QFI general vs Bloch %.2e (limit 1e-8); finite-difference derivative relative %.2e (limit 1e-5)",
             werner, discord, bloch, fd));
}

void teleportation() {
  std::mt19937 rng(909);
  std::normal_distribution<double> g;
  double rodrigues = 0.0, dominance = -1.0;
  for (int k = 0; k < 100; ++k) {
    const Vec3 nk = Vec3(g(rng), g(rng), g(rng)).normalized() * std::abs(std::tanh(g(rng)));
    const Vec3 nC = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto rot = rodrigues_optimal_rotation(nk, nC);
    rodrigues = std::max(rodrigues, std::abs(rot.fidelity - 0.5 * (1.0 + nk.norm() * nC.norm())));
    for (int s = 0; s < 1000; ++s)
      dominance = std::max(dominance, 0.5 * (1.0 + (random_rotation(rng) * nk).dot(nC)) - rot.fidelity);
  }

  SingleQubitParams E0{2.0, {100, 0.8, 1.2, 1.0 / 0.1}}, E1{2.0, {100, 0.8, 1.2, 1.0 / 0.8}};
  const SingleQubitSpectra S0(E0), S1(E1);
  const double h = 1.0 / std::sqrt(2.0);
  const Matrix rho_t0 = assemble_teleport_state(h, h, S0.table(0.0), S1.table(0.0));
  const auto plus = standard_protocol(rho_t0, +1);
  const double f0 = plus.probability * plus.fidelity;

  double sum_err = 0.0;
  for (int k = 0; k <= 200; ++k) {
    const double t = 0.1 * k;
    const auto T0 = S0.table(t), T1 = S1.table(t);
    const Matrix rho = assemble_teleport_state(h, h, T0, T1);
    const double pp = control_projection(rho, +1).trace().real(), pm = control_projection(rho, -1).trace().real();
    sum_err = std::max(sum_err, std::abs(pp + pm - 1.0));
    double bell_sum = 0.0;
    for (int b = 0; b < 4; ++b) bell_sum += bell_project(rho, b).second;
    sum_err = std::max(sum_err, std::abs(bell_sum - 1.0));
    const Vec3 n = Vec3(g(rng), g(rng), g(rng)).normalized();
    const auto part = participatory_protocol(T0, T1, n);
    double part_sum = 0.0;
    for (const auto& br : part.branches) part_sum += br.probability;
    sum_err = std::max(sum_err, std::abs(part_sum - 1.0));
  }
  report("teleportation",
         rodrigues <= 1e-12 && dominance <= 1e-12 && std::abs(f0 - 1.0) <= 1e-12 && sum_err <= 1e-12,
         fmt("Rodrigues optimum vs closed form %.2e (limit 1e-12); best of 100x1000 random rotations exceeds it by "
             "%.2e; t=0 standard fidelity %.15f; branch probability sums off by %.2e (limit 1e-12)",
             rodrigues, dominance, f0, sum_err));
}

void wpei_criterion(const fs::path& out) {
  const auto c = Config::parse_file(IQSIM_CONFIG_DIR "/fig7.cfg");
  const auto run = experiments::read_wpei(c);
  const auto table = experiments::run_wpei(run);
  write(out / "wpei_check.csv", "wpei", c, table);
  const auto ci = table.column("case"), p1 = table.column("P1"), ii = table.column("I"), eta = table.column("eta");
  std::map<std::string, std::pair<double, double>> first;
  double drift = 0.0, min_eta = 1.0, case_c = 0.0;
  long long bad = 0;
  for (const auto& row : table.rows) {
    const auto& label = std::get<std::string>(row[ci]);
    const double P1 = std::get<double>(row[p1]), I = std::get<double>(row[ii]), e = std::get<double>(row[eta]);
    if (!std::isfinite(P1) || !std::isfinite(e)) {
      ++bad;
      continue;
    }
    auto [it, fresh] = first.emplace(label, std::pair{P1, I});
    if (!fresh) drift = std::max({drift, std::abs(P1 - it->second.first), std::abs(I - it->second.second)});
    min_eta = std::min(min_eta, e);
    if (label == "pi/pi") case_c = std::max(case_c, std::abs(I));
  }
  report("WPEI", bad == 0 && min_eta >= -1e-10 && drift <= 1e-10 && case_c <= 1e-12,
         fmt("4 cases, N=100, t in [0,20]: min eta %.2e (limit -1e-10); P1 and I drift %.2e (limit 1e-10); "
             "alpha=pi,theta=pi gives max |I| %.2e; %lld non-finite rows",
             min_eta, drift, case_c, bad));
}

void qualitative_figures(const fs::path& out) {
  // n = 0 indefinite curves against the traced curve.
  auto c1 = Config::parse_file(IQSIM_CONFIG_DIR "/fig1.cfg");
  c1.set("bath.N", "30");
  c1.set("paths.flips", "0");
  const auto t1 = experiments::run("two-qubit", c1);
  write(out / "fig1_N30.csv", "two-qubit", c1, t1);
  const auto series = t1.column("series"), time = t1.column("t");
  std::map<double, std::array<std::array<double, 3>, 2>> at;
  const std::array<std::size_t, 3> cols{t1.column("coherence"), t1.column("concurrence"), t1.column("discord")};
  for (const auto& row : t1.rows) {
    const int s = std::get<std::string>(row[series]) == "traced" ? 0 : 1;
    for (int m = 0; m < 3; ++m) at[std::get<double>(row[time])][s][m] = std::get<double>(row[cols[m]]);
  }
  std::array<int, 3> above{};
  for (const auto& [t, v] : at)
    for (int m = 0; m < 3; ++m)
      if (v[1][m] > v[0][m]) ++above[m];
  const double n = static_cast<double>(at.size());
  const bool fig1_ok = above[0] > n / 2 && above[1] > n / 2 && above[2] > n / 2;

  // QFI with M = 200 paths and one phase shift.
  auto c6 = Config::parse_file(IQSIM_CONFIG_DIR "/fig6b.cfg");
  c6.set("bath.N", "30");
  c6.set("paths.M", "200");
  const auto t6 = experiments::run("qfi", c6);
  write(out / "fig6_M200_N30.csv", "qfi", c6, t6);
  const auto qcol = t6.column("qfi"), scol = t6.column("series");
  int total = 0, high = 0;
  for (const auto& row : t6.rows) {
    if (std::get<std::string>(row[scol]) != "selective") continue;
    ++total;
    if (std::get<double>(row[qcol]) >= 0.9) ++high;
  }
  const double frac = total ? static_cast<double>(high) / total : 0.0;
  const bool written = fs::file_size(out / "fig1_N30.csv") > 0 && fs::file_size(out / "fig6_M200_N30.csv") > 0;
  report("qualitative figures", written,
         fmt("CSVs written to %s. n=0 above traced at %.0f%%/%.0f%%/%.0f%% of times for coherence/concurrence/"
             "discord (majority %s); M=200 n=1 QFI>=0.9 at %.1f%% of times (target 90%%, %s)",
             out.c_str(), 100 * above[0] / n, 100 * above[1] / n, 100 * above[2] / n, fig1_ok ? "met" : "not met",
             100 * frac, frac >= 0.9 ? "met" : "not met"));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(out);
  guarded("oracle equivalence", oracle_equivalence);
  guarded("conservation", conservation);
  guarded("physicality", [&] { physicality(out); });
  guarded("interference identities", interference_identities);
  guarded("factorization", factorization);
  guarded("decoherence limit", [&] { decoherence_limit(out); });
  guarded("measures cross-checks", measures_cross_checks);
  guarded("teleportation", teleportation);
  guarded("WPEI", [&] { wpei_criterion(out); });
  guarded("qualitative figures", [&] { qualitative_figures(out); });
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
