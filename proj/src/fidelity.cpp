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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "qphe/circuit.h"
#include "qphe/control.h"

namespace qphe::control {

namespace {

void check_same_dim(const Operator& u, const Operator& v) {
  if (u.dim() != v.dim()) throw std::invalid_argument("gate fidelity: dimension mismatch");
}

// |sum_b w_b exp(i sum_k phi_k bit_k(b))| by coordinate ascent from `phi`.
double ascend_phases(const std::vector<Complex>& w, int n_qubits, std::vector<double> phi) {
  const std::size_t d = w.size();
  const auto bit = [n_qubits](std::size_t b, int k) { return (b >> (n_qubits - 1 - k)) & 1u; };
  const auto value = [&]() {
    Complex s = 0.0;
    for (std::size_t b = 0; b < d; ++b) {
      double angle = 0.0;
      for (int k = 0; k < n_qubits; ++k) angle += bit(b, k) ? phi[static_cast<std::size_t>(k)] : 0.0;
      s += w[b] * std::polar(1.0, angle);
    }
    return std::abs(s);
  };

  double best = value();
  for (int sweep = 0; sweep < 500; ++sweep) {
    for (int k = 0; k < n_qubits; ++k) {
      Complex a = 0.0, c = 0.0;
      for (std::size_t b = 0; b < d; ++b) {
        double angle = 0.0;
        for (int m = 0; m < n_qubits; ++m) {
          if (m != k && bit(b, m)) angle += phi[static_cast<std::size_t>(m)];
        }
        (bit(b, k) ? c : a) += w[b] * std::polar(1.0, angle);
      }
      if (std::abs(c) > 0.0) phi[static_cast<std::size_t>(k)] = std::arg(a) - std::arg(c);
    }
    const double now = value();
    if (now <= best + 1e-15) {
      best = std::max(best, now);
      break;
    }
    best = now;
  }
  return best;
}

}  // namespace

double fidelity_gate(const Operator& u, const Operator& v) {
  check_same_dim(u, v);
  const double d = static_cast<double>(u.dim());
  return std::norm((u.matrix().adjoint() * v.matrix()).trace()) / (d * d);
}

double local_z_invariant_fidelity(const Operator& u, const Operator& v) {
  check_same_dim(u, v);
  const CMatrix vu = v.matrix() * u.matrix().adjoint();
  std::vector<Complex> w(u.dim());
  for (std::size_t b = 0; b < w.size(); ++b) w[b] = vu(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
  const int n = u.n_qubits();
  const double d = static_cast<double>(u.dim());

  double best = ascend_phases(w, n, std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int start = 0; start < 16; ++start) {
    std::vector<double> phi(static_cast<std::size_t>(n));
    for (auto& p : phi) p = angle(rng);
    best = std::max(best, ascend_phases(w, n, std::move(phi)));
  }
  return std::min(1.0, best * best / (d * d));
}

Operator target_gate(std::string_view name, const nmr::SpinSystem& sys) {
  sys.validate();
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const int n = sys.n_spins();
  const int a = sys.ancilla_index;
  const auto observed = sys.observed_spins();
  const auto particle = [&](char digit) {
    const int k = digit - '1';
    if (k < 0 || k >= static_cast<int>(observed.size())) {
      throw std::invalid_argument("no particle " + std::string(1, digit) + " in this system");
    }
    return observed[static_cast<std::size_t>(k)];
  };
  if (key == "identity") return Operator::identity(n);
  if (key.size() == 5 && key.starts_with("cnot")) {
    return embed(gates::cnot(), {particle(key[4]), a}, n);
  }
  if (key.size() == 3 && key.front() == 'u' && key[1] != key[2]) {
    return controlled_parity(particle(key[1]), particle(key[2]), a, n);
  }
  throw std::invalid_argument("unknown target gate '" + std::string(name) + "'");
}

std::vector<ControlChannel> species_channels(const nmr::SpinSystem& sys) {
  sys.validate();
  std::vector<ControlChannel> channels;
  for (int k = 0; k < sys.n_spins(); ++k) {
    std::string species;
    for (char c : sys.labels[static_cast<std::size_t>(k)]) {
      if (std::isdigit(static_cast<unsigned char>(c))) break;
      species.push_back(c);
    }
    if (species.empty()) species = sys.labels[static_cast<std::size_t>(k)];
    auto it = std::find_if(channels.begin(), channels.end(),
                           [&](const ControlChannel& ch) { return ch.name == species; });
    if (it == channels.end()) {
      channels.push_back({species, {k}});
    } else {
      it->spins.push_back(k);
    }
  }
  return channels;
}

}  // namespace qphe::control
