/* Copyright 2026 The QPHE-NMR Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// qphe: command-line front end.
//
//   qphe circuit  [--particles N] [--probe 12|13|23|none] [--post BITS]
//   qphe spectrum [--system FILE] [--stage all|thermal|...] [--linewidth HZ]
//   qphe table    [--particles N]
//   qphe grape    --target NAME [--duration 600u] [--segments 150] ...
//   qphe sequence-verify [--control K] [--sequence FILE --target NAME]
//
// Exit status: 0 success, 1 configuration or input error, 2 numerical
// non-convergence.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qphe/circuit.h"
#include "qphe/control.h"
#include "qphe/nmr.h"
#include "qphe/pigeonhole.h"

namespace {

namespace fs = std::filesystem;
using namespace qphe;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNotConverged = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string system_path;
  std::string out_dir = ".";
  bool quiet = false;
};

nmr::SpinSystem load_system(const Common& c) {
  if (c.system_path.empty()) return nmr::placeholder_spin_system();
  return nmr::load_spin_system(c.system_path);
}

void write_file(const Common& c, const std::string& name, const std::string& body) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + c.out_dir + "': " + ec.message());
  const fs::path path = fs::path(c.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << body;
  if (!c.quiet) std::cerr << "wrote " << path.string() << '\n';
}

std::string g12(double v) { return fmt::format("{:.12g}", v); }

std::string complex_text(Complex z) { return fmt::format("{:.12g}{:+.12g}i", z.real(), z.imag()); }

// "600u" -> 6e-4 s. Accepts s, m, u, n suffixes and plain seconds.
double parse_duration(const std::string& text) {
  if (text.empty()) throw ConfigError("empty duration");
  double scale = 1.0;
  std::string body = text;
  if (body.size() > 1 && body.back() == 's') body.pop_back();
  switch (body.back()) {
    case 'm': scale = 1e-3; body.pop_back(); break;
    case 'u': scale = 1e-6; body.pop_back(); break;
    case 'n': scale = 1e-9; body.pop_back(); break;
    default: break;
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(body, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != body.size() || !(value > 0.0)) {
    throw ConfigError("bad duration '" + text + "' (examples: 600u, 0.6m, 6e-4)");
  }
  return value * scale;
}

// ------------------------------------------------------------------ circuit

struct CircuitArgs {
  int particles = 3;
  std::string probe = "none";
  std::string post;
};

int cmd_circuit(const Common& c, const CircuitArgs& a) {
  if (a.particles < 1 || a.particles > 8) throw ConfigError("--particles must be in 1..8");
  std::optional<Pair> probe;
  if (a.probe != "none") {
    try {
      probe = Pair::parse(a.probe);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (probe->second >= a.particles) throw ConfigError("--probe " + a.probe + " exceeds --particles");
  }
  const std::string post = a.post.empty() ? std::string(static_cast<std::size_t>(a.particles), '0') : a.post;
  if (static_cast<int>(post.size()) != a.particles || post.find_first_not_of("01") != std::string::npos) {
    throw ConfigError("--post must be a bitstring of length " + std::to_string(a.particles));
  }

  const Circuit circuit = build_mzi(a.particles, probe);
  const StateVector out = run(circuit, StateVector::basis(circuit.n_qubits, 0));
  std::vector<int> all(static_cast<std::size_t>(circuit.n_qubits));
  for (int k = 0; k < circuit.n_qubits; ++k) all[static_cast<std::size_t>(k)] = k;
  const auto joint = measure_distribution(out, all);

  std::string csv = probe ? "particles,ancilla,probability\n" : "particles,probability\n";
  for (std::size_t b = 0; b < joint.probabilities.size(); ++b) {
    const auto bits = bits_of_index(b, circuit.n_qubits);
    if (probe) {
      csv += fmt::format("{},{},{}\n", bits.substr(0, bits.size() - 1), bits.back(), g12(joint.probabilities[b]));
    } else {
      csv += fmt::format("{},{}\n", bits, g12(joint.probabilities[b]));
    }
  }

  std::string report = fmt::format("particles: {}\nprobe: {}\npostselection: {}\n", a.particles,
                                   probe ? "U" + probe->label() : std::string("none"), post);
  if (probe) {
    if (a.particles < 3) throw ConfigError("probe analysis needs at least three particles");
    const ProbeReport r = generalized_qphe(a.particles, *probe, post);
    report += fmt::format("overlap_same: {}\n", complex_text(r.overlap_same));
    report += fmt::format("overlap_all_plus_i: {}\n", complex_text(r.overlap_all_plus_i));
    report += fmt::format("overlap_all_minus_i: {}\n", complex_text(r.overlap_all_minus_i));
    report += fmt::format("p_same_before: {}\n", g12(r.p_same_before));
    report += fmt::format("p_post: {}\n", g12(r.p_post));
    report += fmt::format("p_post_and_flip: {}\n", g12(r.p_post_and_flip));
    report += fmt::format("p_ancilla_flip_given_post: {}\n", g12(r.p_ancilla_flip_given_post));
  } else {
    double p_post = 0.0;
    for (std::size_t b = 0; b < joint.probabilities.size(); ++b) {
      if (bits_of_index(b, circuit.n_qubits) == post) p_post = joint.probabilities[b];
    }
    report += fmt::format("p_post: {}\n", g12(p_post));
  }

  write_file(c, "circuit.txt", to_text(circuit));
  write_file(c, "joint_probabilities.csv", csv);
  write_file(c, "probe_report.txt", report);
  std::cout << report;
  return kExitOk;
}

// ----------------------------------------------------------------- spectrum

struct SpectrumArgs {
  std::string stage = "all";
  double linewidth = 20.0;
  double epsilon = 1e-5;
  int points = 4001;
};

int cmd_spectrum(const Common& c, const SpectrumArgs& a) {
  const auto sys = load_system(c);
  if (!(a.linewidth > 0.0)) throw ConfigError("--linewidth must be positive");
  if (!(a.epsilon > 0.0)) throw ConfigError("--epsilon must be positive");
  if (a.points < 2) throw ConfigError("--points must be at least 2");
  std::vector<nmr::Stage> stages;
  if (a.stage == "all") {
    stages = nmr::all_stages();
  } else {
    try {
      stages.push_back(nmr::parse_stage(a.stage));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const nmr::PrepSpec prep{.epsilon = a.epsilon, .weights = {}};
  for (auto stage : stages) {
    const auto spec = nmr::stage_spectrum(sys, prep, stage);
    const auto name = nmr::stage_name(stage);
    const auto grid = nmr::default_grid(spec, 10.0 * a.linewidth, a.points);
    write_file(c, "spectrum_" + name + ".csv", nmr::spectrum_csv(spec));
    write_file(c, "spectrum_" + name + "_rendered.csv", nmr::rendered_csv(grid, nmr::render(spec, a.linewidth, grid)));
    std::cout << "stage " << name << '\n';
    for (const auto& l : spec.lines) {
      const char* sign = l.amplitude > 0.0 ? "+" : l.amplitude < 0.0 ? "-" : "0";
      std::cout << fmt::format("  {}  {:>14.6f} Hz  {:>+15.6e}  {}\n", l.label, l.frequency_hz, l.amplitude, sign);
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------------- table

int cmd_table(const Common& c, int particles) {
  if (particles < 2 || particles > 6) throw ConfigError("--particles must be in 2..6");
  const auto table = build_table(particles);
  const auto text = to_text(table);
  write_file(c, "table.txt", text);
  write_file(c, "table.csv", to_csv(table));
  std::cout << text;
  return kExitOk;
}

// -------------------------------------------------------------------- grape

struct GrapeArgs {
  std::string target;
  std::string duration = "600u";
  int segments = 150;
  std::vector<double> scales{0.95, 1.0, 1.05};
  double max_amplitude_hz = 10e3;
  double stop_fidelity = 0.99;
  int max_iterations = 2000;
  std::uint64_t seed = 1;
  std::string init = "random";
};

int cmd_grape(const Common& c, const GrapeArgs& a) {
  const auto sys = load_system(c);
  control::ControlProblem p{.target = Operator::identity(1)};
  try {
    p.target = control::target_gate(a.target, sys);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (a.segments < 1) throw ConfigError("--segments must be positive");
  if (a.scales.empty()) throw ConfigError("--scales needs at least one value");
  if (!(a.max_amplitude_hz > 0.0)) throw ConfigError("--max-amplitude must be positive");
  if (a.max_iterations < 0) throw ConfigError("--max-iterations must be non-negative");
  if (a.init != "random" && a.init != "zero") throw ConfigError("--init must be random or zero");
  p.n_segments = a.segments;
  p.dt = parse_duration(a.duration) / a.segments;
  p.max_amplitude = 2.0 * std::numbers::pi * a.max_amplitude_hz;
  p.rf_scales = a.scales;
  p.stop_fidelity = a.stop_fidelity;
  p.max_iterations = a.max_iterations;
  p.seed = a.seed;

  const auto start = a.init == "zero" ? control::zero_field(p, sys) : control::random_field(p, sys);
  std::string log = "iteration,average_fidelity\n";
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = control::grape_optimize(p, sys, &start, [&](int it, double f) {
    if (!c.quiet && it % 100 == 0) std::cerr << fmt::format("iteration {:5d}  average {:.6f}\n", it, f);
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (std::size_t k = 0; k < r.history.size(); ++k) log += fmt::format("{},{}\n", k, g12(r.history[k]));

  std::string report = fmt::format("target: {}\nsegments: {}\nduration_s: {}\nmax_amplitude_hz: {}\n", a.target,
                                   p.n_segments, g12(p.dt * p.n_segments), g12(a.max_amplitude_hz));
  for (std::size_t k = 0; k < p.rf_scales.size(); ++k) {
    report += fmt::format("fidelity_scale_{}: {}\n", g12(p.rf_scales[k]), g12(r.fidelity_per_scale[k]));
  }
  report += fmt::format("average_fidelity: {}\nworst_fidelity: {}\niterations: {}\nconverged: {}\n",
                        g12(r.average), g12(r.worst), r.iterations, r.converged ? "yes" : "no");

  write_file(c, "controls.csv", control::controls_csv(r.field));
  write_file(c, "grape_log.csv", log);
  write_file(c, "grape_report.txt", report);
  write_file(c, "sequence.txt", control::to_text(control::to_sequence(r.field, sys)));
  std::cout << report;
  if (!c.quiet) std::cerr << fmt::format("elapsed {:.1f} s\n", seconds);
  if (!r.converged) {
    std::cerr << fmt::format("not converged: best average fidelity {:.6f} < {}\n", r.average, g12(p.stop_fidelity));
    return kExitNotConverged;
  }
  return kExitOk;
}

// ---------------------------------------------------------- sequence-verify

struct VerifyArgs {
  std::vector<int> controls;
  std::string sequence_path;
  std::string target;
  std::optional<double> threshold;
  std::uint64_t seed = 1;
  int trials = 10;
};

int cmd_verify(const Common& c, const VerifyArgs& a) {
  const auto sys = load_system(c);
  bool ok = true;

  if (!a.sequence_path.empty()) {
    if (a.target.empty()) throw ConfigError("--sequence needs --target");
    std::ifstream in(a.sequence_path);
    if (!in) throw ConfigError("cannot open '" + a.sequence_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    control::PulseSequence seq;
    Operator target = Operator::identity(1);
    try {
      seq = control::parse_sequence(buf.str(), sys);
      target = control::target_gate(a.target, sys);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    const auto u = control::simulate_sequence(seq);
    const double f = control::fidelity_gate(target, u);
    const double fz = control::local_z_invariant_fidelity(u, target);
    const double need = a.threshold.value_or(0.99);
    ok = fz >= need;
    std::cout << fmt::format("sequence: {}\ntarget: {}\nduration_s: {}\nfidelity: {}\nlocal_z_fidelity: {}\n",
                             a.sequence_path, a.target, g12(seq.total_duration()), g12(f), g12(fz));
  } else {
    const double need = a.threshold.value_or(1.0 - 1e-9);
    const auto observed = sys.observed_spins();
    std::vector<int> controls = a.controls;
    if (controls.empty()) {
      for (std::size_t k = 0; k < observed.size(); ++k) controls.push_back(static_cast<int>(k) + 1);
    }
    std::mt19937_64 rng(a.seed);
    std::uniform_real_distribution<double> coupling(-2000.0, 2000.0);
    for (int k : controls) {
      if (k < 1 || k > static_cast<int>(observed.size())) throw ConfigError("--control out of range");
      const int spin = observed[static_cast<std::size_t>(k - 1)];
      control::PulseSequence seq;
      try {
        seq = control::cnot_reference_sequence(spin, sys);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const Operator ideal = embed(gates::cnot(), {spin, sys.ancilla_index}, sys.n_spins());
      const double fz = control::local_z_invariant_fidelity(control::simulate_sequence(seq), ideal);
      double drift = 0.0;
      for (int t = 0; t < a.trials; ++t) {
        auto other = sys;
        for (int s : observed) {
          if (s == spin) continue;
          const double v = coupling(rng);
          other.jp[static_cast<std::size_t>(s)][static_cast<std::size_t>(sys.ancilla_index)] = v;
          other.jp[static_cast<std::size_t>(sys.ancilla_index)][static_cast<std::size_t>(s)] = v;
        }
        const auto u = control::simulate_sequence(control::cnot_reference_sequence(spin, other));
        drift = std::max(drift, std::abs(control::local_z_invariant_fidelity(u, ideal) - fz));
      }
      const bool pass = fz >= need && drift < 1e-8;
      ok = ok && pass;
      write_file(c, fmt::format("cnot{}_sequence.txt", k), control::to_text(seq));
      std::cout << fmt::format("cnot{}: tau_s {}  local_z_fidelity {}  spectator_drift {:.3e}  {}\n", k,
                               g12(seq.free_evolution_time() / 4.0), g12(fz), drift, pass ? "ok" : "FAIL");
    }
  }
  return ok ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum pigeonhole interferometer and NMR register simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file of option values (flags override it)");

  Common common;
  const auto add_common = [&](CLI::App* sub, bool system) {
    sub->add_option("--out-dir", common.out_dir, "Directory for output files")->capture_default_str();
    sub->add_flag("--quiet", common.quiet, "Suppress progress messages on stderr");
    if (system) sub->add_option("--system", common.system_path, "Spin-system JSON (default: built-in placeholder)");
  };

  CircuitArgs circuit_args;
  auto* circuit = app.add_subcommand("circuit", "Run the interferometer with an optional pair probe");
  add_common(circuit, false);
  circuit->add_option("--particles", circuit_args.particles, "Number of particles")->capture_default_str();
  circuit->add_option("--probe", circuit_args.probe, "Probed pair, e.g. 12, or none")->capture_default_str();
  circuit->add_option("--post", circuit_args.post, "Post-selected particle outcome (default all zeros)");

  SpectrumArgs spectrum_args;
  auto* spectrum = app.add_subcommand("spectrum", "Ancilla spectra at each experiment stage");
  add_common(spectrum, true);
  spectrum->add_option("--stage", spectrum_args.stage, "all, thermal, pseudopure, mzi, U12, U13 or U23")
      ->capture_default_str();
  spectrum->add_option("--linewidth", spectrum_args.linewidth, "Full width at half maximum, Hz")->capture_default_str();
  spectrum->add_option("--epsilon", spectrum_args.epsilon, "Purity factor")->capture_default_str();
  spectrum->add_option("--points", spectrum_args.points, "Rendered grid points")->capture_default_str();

  int table_particles = 3;
  auto* table = app.add_subcommand("table", "Classical versus quantum arrangement table");
  add_common(table, false);
  table->add_option("--particles", table_particles, "Number of particles (2..6)")->capture_default_str();

  GrapeArgs grape_args;
  auto* grape = app.add_subcommand("grape", "Optimize a piecewise-constant RF field for a target gate");
  add_common(grape, true);
  grape->add_option("--target", grape_args.target, "identity, cnot1..3, u12, u13 or u23")->required();
  grape->add_option("--duration", grape_args.duration, "Total duration, e.g. 600u")->capture_default_str();
  grape->add_option("--segments", grape_args.segments, "Number of segments")->capture_default_str();
  grape->add_option("--scales", grape_args.scales, "RF amplitude scales")->delimiter(',')->capture_default_str();
  grape->add_option("--max-amplitude", grape_args.max_amplitude_hz, "Per-quadrature amplitude cap, Hz")
      ->capture_default_str();
  grape->add_option("--stop-fidelity", grape_args.stop_fidelity, "Stop once the average reaches this")
      ->capture_default_str();
  grape->add_option("--max-iterations", grape_args.max_iterations, "Iteration limit")->capture_default_str();
  grape->add_option("--seed", grape_args.seed, "Seed of the random initial field")->capture_default_str();
  grape->add_option("--init", grape_args.init, "Initial field: random or zero")->capture_default_str();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("sequence-verify", "Check delay/pulse CNOT sequences or a sequence file");
  add_common(verify, true);
  verify->add_option("--control", verify_args.controls, "Control particle(s), 1-based (default all)")
      ->delimiter(',');
  verify->add_option("--sequence", verify_args.sequence_path, "Sequence file to verify instead");
  verify->add_option("--target", verify_args.target, "Target gate for --sequence");
  verify->add_option("--threshold", verify_args.threshold, "Minimum local-z fidelity");
  verify->add_option("--seed", verify_args.seed, "Seed for spectator randomization")->capture_default_str();
  verify->add_option("--trials", verify_args.trials, "Spectator randomizations per control")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*circuit) return cmd_circuit(common, circuit_args);
    if (*spectrum) return cmd_spectrum(common, spectrum_args);
    if (*table) return cmd_table(common, table_particles);
    if (*grape) return cmd_grape(common, grape_args);
    if (*verify) return cmd_verify(common, verify_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
