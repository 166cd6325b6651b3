// iqsim: experiment runner and self-verification.
//
//   iqsim two-qubit --config configs/fig1.cfg --out fig1.csv
//   iqsim qfi --config configs/fig6.cfg --paths 10 --pi-shifts 1
//   iqsim verify --level full
//
// Exit codes: 0 ok, 1 configuration error, 2 numerical failure, 3 verification failure.

#include "iqsim/config.hpp"
#include "iqsim/csv.hpp"
#include "iqsim/experiments.hpp"
#include "iqsim/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kVerification = 3 };

struct Overrides {
  std::string config, out;
  std::string paths, flips, patterns, gamma, alpha, theta, N, steps, t_max;
  std::vector<std::string> sets;
};

void add_run_options(CLI::App* cmd, Overrides& o, const std::string& name) {
  cmd->add_option("--config,-c", o.config, "configuration file");
  cmd->add_option("--out,-o", o.out, "output CSV (default: stdout)");
  cmd->add_option("--N", o.N, "bath size (bath.N)");
  cmd->add_option("--steps", o.steps, "time steps (time.steps)");
  cmd->add_option("--t-max", o.t_max, "final time (time.t_max)");
  cmd->add_option("--set", o.sets, "override any key: section.key=value")->take_all();
  if (name != "teleport" && name != "wpei") {
    cmd->add_option("--paths", o.paths, "path counts (paths.M)");
    cmd->add_option("--pi-shifts", o.flips, "flip counts (paths.flips)");
    cmd->add_option("--patterns", o.patterns, "explicit 0/1 phase patterns (paths.patterns)");
  }
  if (name == "decoherence") cmd->add_option("--gamma", o.gamma, "path dephasing rate (decoherence.Gamma)");
  if (name == "wpei") {
    cmd->add_option("--alpha", o.alpha, "control amplitudes (state.alpha)");
    cmd->add_option("--theta", o.theta, "relative phases (state.theta)");
  }
}

iqsim::Config build_config(const Overrides& o) {
  iqsim::Config c = o.config.empty() ? iqsim::Config::parse_string("", "<command line>")
                                     : iqsim::Config::parse_file(o.config);
  auto put = [&](const std::string& key, const std::string& v) {
    if (!v.empty()) c.set(key, v);
  };
  put("paths.M", o.paths);
  put("paths.flips", o.flips);
  put("paths.patterns", o.patterns);
  put("decoherence.Gamma", o.gamma);
  put("state.alpha", o.alpha);
  put("state.theta", o.theta);
  put("bath.N", o.N);
  put("time.steps", o.steps);
  put("time.t_max", o.t_max);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw iqsim::ConfigError("<command line>", 0, "--set expects key=value, got '" + s + "'");
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  return c;
}

int run_experiment(const std::string& name, const Overrides& o) {
  iqsim::experiments::PhysicalityStats stats;
  iqsim::Table table;
  iqsim::Config config;
  try {
    config = build_config(o);
    table = iqsim::experiments::run(name, config, &stats);
  } catch (const iqsim::ConfigError& e) {
    std::cerr << "iqsim: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "iqsim: configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "iqsim: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }

  if (o.out.empty()) {
    iqsim::write_csv(std::cout, name, config.echo(), table);
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      std::cerr << "iqsim: cannot write '" << o.out << "'\n";
      return kConfig;
    }
    iqsim::write_csv(f, name, config.echo(), table);
    if (!f) {
      std::cerr << "iqsim: write to '" << o.out << "' failed\n";
      return kNumerical;
    }
  }
  std::fprintf(stderr, "iqsim: %zu rows, %lld states checked, %lld unphysical, min eigenvalue %.3g\n",
               table.rows.size(), stats.states, stats.flagged, stats.min_eigenvalue);
  return stats.flagged > 0 ? kNumerical : kOk;
}

int run_verify(const std::string& level) {
  const auto results = iqsim::verify::suite(level == "full");
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %s: worst %.3g (limit %.1g), %.2f s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.value,
                r.threshold, r.seconds, r.detail.empty() ? "" : " ", r.detail.c_str());
    all = all && r.passed;
  }
  return all ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iqsim: qubits in superposed collective-spin environments"};
  app.require_subcommand(1);

  std::map<std::string, Overrides> opts;
  for (const auto& name : iqsim::experiments::names()) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " experiment");
    add_run_options(cmd, opts[name], name);
  }
  std::string level = "quick";
  auto* verify = app.add_subcommand("verify", "run the oracle self-check suite");
  verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (verify->parsed()) return run_verify(level);
  for (const auto& name : iqsim::experiments::names())
    if (app.got_subcommand(name)) return run_experiment(name, opts[name]);
  return kConfig;
}
