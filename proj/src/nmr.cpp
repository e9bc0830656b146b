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

#include "qphe/nmr.h"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qphe::nmr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Iz eigenvalue of `spin` in basis state b.
double m_of(std::size_t b, int spin, int n) {
  return ((b >> (n - 1 - spin)) & 1u) ? -0.5 : 0.5;
}

// Basis index of the register with the ancilla bit inserted into a label of the others.
std::size_t with_ancilla(std::size_t others, int ancilla_bit, int ancilla, int n) {
  const int low = n - 1 - ancilla;  // bit position of the ancilla
  const std::size_t low_mask = (std::size_t{1} << low) - 1;
  const std::size_t high = (others & ~low_mask) << 1;
  return high | (static_cast<std::size_t>(ancilla_bit) << low) | (others & low_mask);
}

std::size_t label_index(const SpinSystem& sys, std::string_view label) {
  if (static_cast<int>(label.size()) != sys.n_spins() - 1) {
    throw std::invalid_argument("label '" + std::string(label) + "' must have " +
                                std::to_string(sys.n_spins() - 1) + " bits");
  }
  return index_of_bits(label);
}

}  // namespace

// ---------------------------------------------------------------- SpinSystem

void SpinSystem::validate() const {
  const auto n = nu.size();
  if (n < 2) throw std::invalid_argument("spin system needs at least two spins");
  if (n > 10) throw std::invalid_argument("spin system too large for dense simulation");
  if (labels.size() != n) throw std::invalid_argument("labels and nu differ in length");
  if (jp.size() != n) throw std::invalid_argument("coupling matrix has wrong row count");
  for (std::size_t i = 0; i < n; ++i) {
    if (jp[i].size() != n) throw std::invalid_argument("coupling matrix is not square");
    if (jp[i][i] != 0.0) throw std::invalid_argument("coupling matrix diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(jp[i][j] - jp[j][i]) > 1e-12 * std::max(1.0, std::abs(jp[i][j]))) {
        throw std::invalid_argument(fmt::format("coupling matrix not symmetric at ({}, {})", i, j));
      }
    }
  }
  if (ancilla_index < 0 || ancilla_index >= static_cast<int>(n)) {
    throw std::invalid_argument("ancilla_index out of range");
  }
}

std::vector<int> SpinSystem::observed_spins() const {
  std::vector<int> out;
  for (int k = 0; k < n_spins(); ++k) {
    if (k != ancilla_index) out.push_back(k);
  }
  return out;
}

SpinSystem parse_spin_system(std::string_view json_text) {
  SpinSystem sys;
  try {
    const auto j = nlohmann::json::parse(json_text);
    sys.labels = j.at("labels").get<std::vector<std::string>>();
    sys.nu = j.at("nu_hz").get<std::vector<double>>();
    sys.jp = j.at("jp_hz").get<std::vector<std::vector<double>>>();
    sys.ancilla_index = j.at("ancilla_index").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("spin-system config: ") + e.what());
  }
  sys.validate();
  return sys;
}

SpinSystem load_spin_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spin-system file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_spin_system(buf.str());
}

std::string to_json(const SpinSystem& sys) {
  nlohmann::json j;
  j["labels"] = sys.labels;
  j["nu_hz"] = sys.nu;
  j["jp_hz"] = sys.jp;
  j["ancilla_index"] = sys.ancilla_index;
  return j.dump(2) + "\n";
}

SpinSystem placeholder_spin_system() {
  SpinSystem sys;
  sys.labels = {"F1", "F2", "F3", "H4"};
  sys.nu = {-5230.0, 1870.0, 6440.0, 0.0};
  sys.jp = {{0.0, 48.0, 17.0, 1850.0},
            {48.0, 0.0, 62.0, 1440.0},
            {17.0, 62.0, 0.0, 1120.0},
            {1850.0, 1440.0, 1120.0, 0.0}};
  sys.ancilla_index = 3;
  return sys;
}

double PrepSpec::weight(int spin) const {
  if (weights.empty()) return 1.0;
  return weights.at(static_cast<std::size_t>(spin));
}

// ----------------------------------------------------------- spin operators

Operator spin_operator(Axis axis, int spin, int n_spins) {
  CMatrix m(2, 2);
  switch (axis) {
    case Axis::kX: m << 0.0, 0.5, 0.5, 0.0; break;
    case Axis::kY: m << 0.0, -0.5 * kI, 0.5 * kI, 0.0; break;
    case Axis::kZ: m << 0.5, 0.0, 0.0, -0.5; break;
  }
  return embed(Operator(m, OperatorKind::kHermitian), {spin}, n_spins);
}

Operator rotation(double angle, double phase) {
  // exp(-i a n.sigma/2) = cos(a/2) - i sin(a/2) n.sigma
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const Complex axis = std::polar(1.0, phase);  // cos(phase) + i sin(phase)
  CMatrix m(2, 2);
  // n.sigma = [[0, e^{-i phase}], [e^{i phase}, 0]]
  m << c, -kI * s * std::conj(axis), -kI * s * axis, c;
  return Operator(m, OperatorKind::kUnitary);
}

// ---------------------------------------------------------------- Hamiltonian

std::vector<double> energy_levels(const SpinSystem& sys) {
  sys.validate();
  const int n = sys.n_spins();
  const std::size_t d = std::size_t{1} << n;
  std::vector<double> e(d, 0.0);
  for (std::size_t b = 0; b < d; ++b) {
    double value = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mi = m_of(b, i, n);
      value -= kTwoPi * sys.nu[static_cast<std::size_t>(i)] * mi;
      for (int j = i + 1; j < n; ++j) value += kTwoPi * sys.coupling(i, j) * mi * m_of(b, j, n);
    }
    e[b] = value;
  }
  return e;
}

Operator internal_hamiltonian(const SpinSystem& sys) {
  const auto e = energy_levels(sys);
  CVector diag(static_cast<Eigen::Index>(e.size()));
  for (std::size_t b = 0; b < e.size(); ++b) diag(static_cast<Eigen::Index>(b)) = e[b];
  return Operator(CMatrix(diag.asDiagonal()), OperatorKind::kHermitian);
}

// -------------------------------------------------------------- preparation

DensityMatrix thermal_state(const SpinSystem& sys, const PrepSpec& prep) {
  sys.validate();
  if (!(prep.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!prep.weights.empty() && static_cast<int>(prep.weights.size()) != sys.n_spins()) {
    throw std::invalid_argument("one weight per spin required");
  }
  const int n = sys.n_spins();
  const auto d = Eigen::Index{1} << n;
  CMatrix rho = CMatrix::Zero(d, d);
  for (Eigen::Index b = 0; b < d; ++b) {
    double value = 0.0;
    for (int i = 0; i < n; ++i) value += prep.weight(i) * m_of(static_cast<std::size_t>(b), i, n);
    rho(b, b) = prep.epsilon * value;
  }
  return {n, std::move(rho), true};
}

DensityMatrix invert_populations(const DensityMatrix& state, std::string_view level_a,
                                 std::string_view level_b) {
  const auto n = static_cast<std::size_t>(state.n_qubits());
  if (level_a.size() != n || level_b.size() != n) {
    throw std::invalid_argument("level labels must have one bit per spin");
  }
  const auto a = static_cast<Eigen::Index>(index_of_bits(level_a));
  const auto b = static_cast<Eigen::Index>(index_of_bits(level_b));
  if (a == b) throw std::invalid_argument("cannot invert a level with itself");
  CMatrix rho = state.matrix();
  std::swap(rho(a, a), rho(b, b));
  return {state.n_qubits(), std::move(rho), state.is_deviation()};
}

DensityMatrix pseudopure_prepare(const SpinSystem& sys, const PrepSpec& prep) {
  sys.validate();
  const int n = sys.n_spins();
  if (sys.ancilla_index != n - 1) {
    throw std::invalid_argument("pseudopure preparation expects the ancilla as the last spin");
  }
  const DensityMatrix eq = thermal_state(sys, prep);
  const std::string ground(static_cast<std::size_t>(n), '0');
  const std::string flipped = ground.substr(0, static_cast<std::size_t>(n - 1)) + "1";
  const DensityMatrix in = invert_populations(eq, ground, flipped);
  const double norm = 2.0 * prep.weight(sys.ancilla_index);
  if (norm <= 0.0) throw std::invalid_argument("ancilla weight must be positive");
  return {n, (eq.matrix() - in.matrix()) / norm, true};
}

// ------------------------------------------------------------------ spectra

const SpectrumLine& Spectrum::line(std::string_view label) const {
  for (const auto& l : lines) {
    if (l.label == label) return l;
  }
  throw std::out_of_range("no line labelled '" + std::string(label) + "'");
}

double line_frequency(const SpinSystem& sys, std::string_view label) {
  sys.validate();
  const std::size_t s = label_index(sys, label);
  const auto observed = sys.observed_spins();
  const int width = static_cast<int>(observed.size());
  double f = sys.nu[static_cast<std::size_t>(sys.ancilla_index)];
  for (int k = 0; k < width; ++k) {
    const double m = ((s >> (width - 1 - k)) & 1u) ? -0.5 : 0.5;
    f -= sys.coupling(observed[static_cast<std::size_t>(k)], sys.ancilla_index) * m;
  }
  return f;
}

Spectrum detect(const DensityMatrix& state, const SpinSystem& sys) {
  sys.validate();
  const int n = sys.n_spins();
  if (state.n_qubits() != n) {
    throw std::invalid_argument(fmt::format("state has {} spins, system has {}", state.n_qubits(), n));
  }
  const DensityMatrix read =
      apply(rotation(std::numbers::pi / 2.0, std::numbers::pi / 2.0), {sys.ancilla_index}, state);
  Spectrum spec;
  const std::size_t n_lines = std::size_t{1} << (n - 1);
  for (std::size_t s = 0; s < n_lines; ++s) {
    const std::size_t up = with_ancilla(s, 0, sys.ancilla_index, n);
    const std::size_t down = with_ancilla(s, 1, sys.ancilla_index, n);
    const std::string label = bits_of_index(s, n - 1);
    spec.lines.push_back({line_frequency(sys, label), read(up, down).real(), label});
  }
  return spec;
}

std::vector<double> render(const Spectrum& spectrum, double linewidth_hz,
                           const std::vector<double>& grid_hz) {
  if (!(linewidth_hz > 0.0)) throw std::invalid_argument("linewidth must be positive");
  if (grid_hz.empty()) throw std::invalid_argument("empty frequency grid");
  const double half = linewidth_hz / 2.0;
  const double half2 = half * half;
  std::vector<double> out(grid_hz.size(), 0.0);
  for (std::size_t g = 0; g < grid_hz.size(); ++g) {
    for (const auto& l : spectrum.lines) {
      const double x = grid_hz[g] - l.frequency_hz;
      out[g] += l.amplitude * half2 / (x * x + half2);
    }
  }
  return out;
}

std::vector<double> default_grid(const Spectrum& spectrum, double margin_hz, int points) {
  if (spectrum.lines.empty()) throw std::invalid_argument("spectrum has no lines");
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  auto [lo, hi] = std::minmax_element(
      spectrum.lines.begin(), spectrum.lines.end(),
      [](const auto& a, const auto& b) { return a.frequency_hz < b.frequency_hz; });
  const double start = lo->frequency_hz - margin_hz;
  const double stop = hi->frequency_hz + margin_hz;
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    grid[static_cast<std::size_t>(k)] = start + (stop - start) * k / (points - 1);
  }
  return grid;
}

std::string spectrum_csv(const Spectrum& spectrum) {
  std::string out = "label,frequency_hz,amplitude\n";
  for (const auto& l : spectrum.lines) {
    out += fmt::format("{},{:.12g},{:.12g}\n", l.label, l.frequency_hz, l.amplitude);
  }
  return out;
}

std::string rendered_csv(const std::vector<double>& grid_hz, const std::vector<double>& intensity) {
  if (grid_hz.size() != intensity.size()) throw std::invalid_argument("grid/intensity mismatch");
  std::string out = "frequency_hz,intensity\n";
  for (std::size_t k = 0; k < grid_hz.size(); ++k) {
    out += fmt::format("{:.12g},{:.12g}\n", grid_hz[k], intensity[k]);
  }
  return out;
}

// ------------------------------------------------------------------- stages

std::string stage_name(Stage stage) {
  switch (stage) {
    case Stage::kThermal: return "thermal";
    case Stage::kPseudopure: return "pseudopure";
    case Stage::kMzi: return "mzi";
    case Stage::kU12: return "U12";
    case Stage::kU13: return "U13";
    case Stage::kU23: return "U23";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "thermal") return Stage::kThermal;
  if (lower == "pseudopure") return Stage::kPseudopure;
  if (lower == "mzi" || lower == "mzi-only") return Stage::kMzi;
  if (lower == "u12") return Stage::kU12;
  if (lower == "u13") return Stage::kU13;
  if (lower == "u23") return Stage::kU23;
  throw std::invalid_argument("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> all_stages() {
  return {Stage::kThermal, Stage::kPseudopure, Stage::kMzi, Stage::kU12, Stage::kU13, Stage::kU23};
}

DensityMatrix stage_state(const SpinSystem& sys, const PrepSpec& prep, Stage stage) {
  if (stage == Stage::kThermal) return thermal_state(sys, prep);
  const DensityMatrix rho0 = pseudopure_prepare(sys, prep);
  if (stage == Stage::kPseudopure) return rho0;

  const int n_particles = sys.n_spins() - 1;
  Operator u = Operator::identity(sys.n_spins());
  if (stage == Stage::kMzi) {
    u = tensor(unitary(build_mzi(n_particles)), Operator::identity(1));
  } else {
    if (n_particles < 3) throw std::invalid_argument("probe stages need three particle spins");
    const Pair pair = stage == Stage::kU12 ? Pair{0, 1} : stage == Stage::kU13 ? Pair{0, 2} : Pair{1, 2};
    u = unitary(build_mzi(n_particles, pair));
  }
  CMatrix rho = u.matrix() * rho0.matrix() * u.matrix().adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return {sys.n_spins(), std::move(rho), true};
}

Spectrum stage_spectrum(const SpinSystem& sys, const PrepSpec& prep, Stage stage) {
  return detect(stage_state(sys, prep, stage), sys);
}

}  // namespace qphe::nmr
