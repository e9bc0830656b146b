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

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qphe/control.h"

namespace qphe::control {

namespace {

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::string token;
  std::istringstream in{std::string(text)};
  while (std::getline(in, token, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) throw std::invalid_argument("bad number '" + token + "'");
    out.push_back(v);
  }
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += fmt::format("{:.17g}", values[k]);
  }
  return out;
}

CMatrix exp_diagonal(const std::vector<double>& energies, double t) {
  const auto d = static_cast<Eigen::Index>(energies.size());
  CVector phases(d);
  for (Eigen::Index b = 0; b < d; ++b) phases(b) = std::polar(1.0, -energies[static_cast<std::size_t>(b)] * t);
  return phases.asDiagonal();
}

void check_sizes(const PulseSegment& seg, int n_spins) {
  const auto n = static_cast<std::size_t>(n_spins);
  if (seg.duration < 0.0) throw std::invalid_argument("negative segment duration");
  if (seg.kind == SegmentKind::kHardPulse && seg.angles.size() != n) {
    throw std::invalid_argument("hard pulse needs one angle per spin");
  }
  if (seg.kind == SegmentKind::kRfSlice && (seg.ux.size() != n || seg.uy.size() != n)) {
    throw std::invalid_argument("rf slice needs one amplitude pair per spin");
  }
}

}  // namespace

PulseSegment PulseSegment::delay(double seconds) {
  PulseSegment s;
  s.kind = SegmentKind::kDelay;
  s.duration = seconds;
  return s;
}

PulseSegment PulseSegment::hard_pulse(std::vector<double> angles, double phase) {
  PulseSegment s;
  s.kind = SegmentKind::kHardPulse;
  s.angles = std::move(angles);
  s.phase = phase;
  return s;
}

PulseSegment PulseSegment::rf_slice(double seconds, std::vector<double> ux, std::vector<double> uy) {
  PulseSegment s;
  s.kind = SegmentKind::kRfSlice;
  s.duration = seconds;
  s.ux = std::move(ux);
  s.uy = std::move(uy);
  return s;
}

double PulseSequence::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

double PulseSequence::free_evolution_time() const {
  double t = 0.0;
  for (const auto& s : segments) {
    if (s.kind != SegmentKind::kHardPulse) t += s.duration;
  }
  return t;
}

Operator simulate_sequence(const PulseSequence& seq) {
  seq.sys.validate();
  const int n = seq.sys.n_spins();
  const auto d = Eigen::Index{1} << n;
  const auto energies = nmr::energy_levels(seq.sys);

  std::vector<CMatrix> ix, iy;
  CMatrix u = CMatrix::Identity(d, d);
  for (const auto& seg : seq.segments) {
    check_sizes(seg, n);
    switch (seg.kind) {
      case SegmentKind::kDelay:
        u = exp_diagonal(energies, seg.duration) * u;
        break;
      case SegmentKind::kHardPulse: {
        std::vector<Operator> factors;
        for (int k = 0; k < n; ++k) {
          factors.push_back(nmr::rotation(seg.angles[static_cast<std::size_t>(k)], seg.phase));
        }
        u = tensor(factors).matrix() * u;
        break;
      }
      case SegmentKind::kRfSlice: {
        if (ix.empty()) {
          for (int k = 0; k < n; ++k) {
            ix.push_back(nmr::spin_operator(nmr::Axis::kX, k, n).matrix());
            iy.push_back(nmr::spin_operator(nmr::Axis::kY, k, n).matrix());
          }
        }
        CMatrix h = CMatrix::Zero(d, d);
        for (Eigen::Index b = 0; b < d; ++b) h(b, b) = energies[static_cast<std::size_t>(b)];
        for (int k = 0; k < n; ++k) {
          h += seg.ux[static_cast<std::size_t>(k)] * ix[static_cast<std::size_t>(k)] +
               seg.uy[static_cast<std::size_t>(k)] * iy[static_cast<std::size_t>(k)];
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
        const CVector phases =
            (eig.eigenvalues().cast<Complex>() * Complex(0.0, -seg.duration)).array().exp();
        u = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint() * u;
        break;
      }
    }
  }
  return Operator(std::move(u), OperatorKind::kGeneral);
}

PulseSequence cnot_reference_sequence(int control_spin, const nmr::SpinSystem& sys) {
  sys.validate();
  const int a = sys.ancilla_index;
  const auto observed = sys.observed_spins();
  if (observed.size() != 3) {
    throw std::invalid_argument("reference CNOT sequence is defined for three particle spins");
  }
  if (control_spin == a || control_spin < 0 || control_spin >= sys.n_spins()) {
    throw std::invalid_argument("control spin must be a non-ancilla spin");
  }
  const double j = sys.coupling(control_spin, a);
  if (j == 0.0) {
    throw std::invalid_argument(fmt::format("no coupling between {} and the ancilla",
                                            sys.labels[static_cast<std::size_t>(control_spin)]));
  }
  std::vector<int> spectators;
  for (int k : observed) {
    if (k != control_spin) spectators.push_back(k);
  }
  // Toggling-frame signs over the four delays (Walsh patterns):
  //   control, ancilla: + + - -   keeps J'_ca, cancels the ancilla offset
  //   spectators[0]:    + + + +   no pulses; its offset is a local z-rotation
  //   spectators[1]:    + - + -
  // Every pair other than (control, ancilla) integrates to zero.
  const int busy = spectators[1];
  const double tau = 1.0 / (8.0 * std::abs(j));
  const double pi = std::numbers::pi;
  const double y = pi / 2.0;
  const auto n = static_cast<std::size_t>(sys.n_spins());
  const auto pulse_on = [&](std::initializer_list<int> spins, double angle) {
    std::vector<double> angles(n, 0.0);
    for (int s : spins) angles[static_cast<std::size_t>(s)] = angle;
    return angles;
  };

  PulseSequence seq{sys, {}};
  auto& s = seq.segments;
  s.push_back(PulseSegment::hard_pulse(pulse_on({a}, pi / 2.0), kCnotEntryPhase));
  s.push_back(PulseSegment::delay(tau));
  s.push_back(PulseSegment::hard_pulse(pulse_on({busy}, pi), y));
  s.push_back(PulseSegment::delay(tau));
  s.push_back(PulseSegment::hard_pulse(pulse_on({control_spin, a, busy}, pi), y));
  s.push_back(PulseSegment::delay(tau));
  s.push_back(PulseSegment::hard_pulse(pulse_on({busy}, pi), y));
  s.push_back(PulseSegment::delay(tau));
  s.push_back(PulseSegment::hard_pulse(pulse_on({control_spin, a, busy}, pi), y));
  s.push_back(PulseSegment::hard_pulse(pulse_on({a}, pi / 2.0),
                                       j > 0.0 ? kCnotExitPhase : kCnotExitPhaseNegativeJ));
  return seq;
}

PulseSequence to_sequence(const ControlField& field, const nmr::SpinSystem& sys) {
  sys.validate();
  const auto n = static_cast<std::size_t>(sys.n_spins());
  PulseSequence seq{sys, {}};
  for (int k = 0; k < field.n_segments(); ++k) {
    std::vector<double> ux(n, 0.0), uy(n, 0.0);
    for (int c = 0; c < field.n_channels(); ++c) {
      for (int spin : field.channels[static_cast<std::size_t>(c)].spins) {
        ux[static_cast<std::size_t>(spin)] += field.at(k, c, Quadrature::kX);
        uy[static_cast<std::size_t>(spin)] += field.at(k, c, Quadrature::kY);
      }
    }
    seq.segments.push_back(
        PulseSegment::rf_slice(field.durations[static_cast<std::size_t>(k)], ux, uy));
  }
  return seq;
}

std::string to_text(const PulseSequence& seq) {
  std::string out = fmt::format("# spins {}\n", seq.sys.n_spins());
  for (const auto& seg : seq.segments) {
    switch (seg.kind) {
      case SegmentKind::kDelay:
        out += fmt::format("delay {:.17g}\n", seg.duration);
        break;
      case SegmentKind::kHardPulse:
        out += fmt::format("pulse phase={:.17g} angles={}\n", seg.phase, join(seg.angles));
        break;
      case SegmentKind::kRfSlice:
        out += fmt::format("rf dt={:.17g} ux={} uy={}\n", seg.duration, join(seg.ux), join(seg.uy));
        break;
    }
  }
  return out;
}

PulseSequence parse_sequence(std::string_view text, const nmr::SpinSystem& sys) {
  sys.validate();
  PulseSequence seq{sys, {}};
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word) || word.front() == '#') continue;
    const auto fail = [&](const std::string& why) {
      return std::invalid_argument(fmt::format("sequence line {}: {}", number, why));
    };
    std::vector<std::pair<std::string, std::string>> kv;
    std::string rest;
    double plain = 0.0;
    bool has_plain = false;
    while (fields >> rest) {
      const auto eq = rest.find('=');
      if (eq == std::string::npos) {
        const auto v = parse_list(rest);
        if (v.size() != 1 || has_plain) throw fail("unexpected token '" + rest + "'");
        plain = v[0];
        has_plain = true;
      } else {
        kv.emplace_back(rest.substr(0, eq), rest.substr(eq + 1));
      }
    }
    const auto value = [&](const std::string& key) -> const std::string& {
      for (const auto& [k, v] : kv) {
        if (k == key) return v;
      }
      throw fail("missing " + key + "=");
    };
    PulseSegment seg;
    if (word == "delay") {
      if (!has_plain) throw fail("delay needs a duration");
      seg = PulseSegment::delay(plain);
    } else if (word == "pulse") {
      const auto phase = parse_list(value("phase"));
      if (phase.size() != 1) throw fail("phase takes one value");
      seg = PulseSegment::hard_pulse(parse_list(value("angles")), phase[0]);
    } else if (word == "rf") {
      const auto dt = parse_list(value("dt"));
      if (dt.size() != 1) throw fail("dt takes one value");
      seg = PulseSegment::rf_slice(dt[0], parse_list(value("ux")), parse_list(value("uy")));
    } else {
      throw fail("unknown segment '" + word + "'");
    }
    try {
      check_sizes(seg, sys.n_spins());
    } catch (const std::invalid_argument& e) {
      throw fail(e.what());
    }
    seq.segments.push_back(std::move(seg));
  }
  return seq;
}

}  // namespace qphe::control
