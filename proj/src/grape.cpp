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

// GRAPE: gradient ascent of the scale-averaged gate fidelity
//   Phi = (1/S) sum_s |Tr(T^dagger U_s)|^2 / d^2
// over piecewise-constant channel amplitudes. Segment propagators and their
// derivatives come from the eigendecomposition of each segment Hamiltonian.

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qphe/control.h"

namespace qphe::control {

namespace {

struct Drift {
  CMatrix h0;
  std::vector<CMatrix> x_ops;  // per channel: sum of I_x over its spins
  std::vector<CMatrix> y_ops;
};

Drift make_drift(const std::vector<ControlChannel>& channels, const nmr::SpinSystem& sys) {
  const int n = sys.n_spins();
  const auto d = Eigen::Index{1} << n;
  Drift drift;
  drift.h0 = nmr::internal_hamiltonian(sys).matrix();
  for (const auto& ch : channels) {
    CMatrix x = CMatrix::Zero(d, d), y = CMatrix::Zero(d, d);
    for (int spin : ch.spins) {
      if (spin < 0 || spin >= n) throw std::invalid_argument("channel " + ch.name + " addresses a missing spin");
      x += nmr::spin_operator(nmr::Axis::kX, spin, n).matrix();
      y += nmr::spin_operator(nmr::Axis::kY, spin, n).matrix();
    }
    drift.x_ops.push_back(std::move(x));
    drift.y_ops.push_back(std::move(y));
  }
  return drift;
}

std::vector<ControlChannel> channels_for(const ControlProblem& problem, const nmr::SpinSystem& sys) {
  return problem.channels.empty() ? species_channels(sys) : problem.channels;
}

void check_problem(const ControlProblem& problem, const nmr::SpinSystem& sys) {
  sys.validate();
  if (problem.n_segments <= 0) throw std::invalid_argument("control problem needs segments");
  if (!(problem.dt >= 0.0)) throw std::invalid_argument("segment duration must be non-negative");
  if (problem.rf_scales.empty()) throw std::invalid_argument("at least one RF scale required");
  if (problem.target.dim() != (std::size_t{1} << sys.n_spins())) {
    throw std::invalid_argument("target dimension does not match the spin system");
  }
  if (!problem.target.is_unitary(1e-8)) throw std::invalid_argument("target gate is not unitary");
}

void check_field(const ControlField& field) {
  const auto k = static_cast<std::size_t>(field.n_segments());
  if (field.ux.size() != k || field.uy.size() != k) throw std::invalid_argument("malformed control field");
  for (std::size_t s = 0; s < k; ++s) {
    if (field.ux[s].size() != field.channels.size() || field.uy[s].size() != field.channels.size()) {
      throw std::invalid_argument("malformed control field");
    }
    if (field.durations[s] < 0.0) throw std::invalid_argument("negative segment duration");
  }
}

// -i dt e^{-i mu dt} sinc(delta dt / 2): the divided difference of exp(-i lambda dt).
Complex divided_difference(double la, double lb, double dt) {
  const double half = 0.5 * (la - lb) * dt;
  const double sinc = std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
  return Complex(0.0, -dt) * std::polar(1.0, -0.5 * (la + lb) * dt) * sinc;
}

struct SegmentPropagator {
  CMatrix vectors;
  Eigen::VectorXd values;
  CMatrix u;
};

SegmentPropagator propagate(const Drift& drift, const ControlField& field, int k, double scale) {
  CMatrix h = drift.h0;
  for (int c = 0; c < field.n_channels(); ++c) {
    h += (scale * field.at(k, c, Quadrature::kX)) * drift.x_ops[static_cast<std::size_t>(c)] +
         (scale * field.at(k, c, Quadrature::kY)) * drift.y_ops[static_cast<std::size_t>(c)];
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  SegmentPropagator p{eig.eigenvectors(), eig.eigenvalues(), {}};
  const double dt = field.durations[static_cast<std::size_t>(k)];
  CVector phases(p.values.size());
  for (Eigen::Index a = 0; a < p.values.size(); ++a) phases(a) = std::polar(1.0, -p.values(a) * dt);
  p.u = p.vectors * phases.asDiagonal() * p.vectors.adjoint();
  return p;
}

std::size_t n_params(const ControlField& f) {
  return 2 * static_cast<std::size_t>(f.n_segments()) * static_cast<std::size_t>(f.n_channels());
}

std::vector<double> flatten(const ControlField& f) {
  std::vector<double> x;
  x.reserve(n_params(f));
  for (int k = 0; k < f.n_segments(); ++k) {
    for (int c = 0; c < f.n_channels(); ++c) {
      x.push_back(f.at(k, c, Quadrature::kX));
      x.push_back(f.at(k, c, Quadrature::kY));
    }
  }
  return x;
}

void unflatten(const std::vector<double>& x, ControlField& f) {
  std::size_t i = 0;
  for (int k = 0; k < f.n_segments(); ++k) {
    for (int c = 0; c < f.n_channels(); ++c) {
      f.at(k, c, Quadrature::kX) = x[i++];
      f.at(k, c, Quadrature::kY) = x[i++];
    }
  }
}

std::vector<double> flatten_gradient(const Evaluation& e) {
  std::vector<double> g;
  for (std::size_t k = 0; k < e.grad_x.size(); ++k) {
    for (std::size_t c = 0; c < e.grad_x[k].size(); ++c) {
      g.push_back(e.grad_x[k][c]);
      g.push_back(e.grad_y[k][c]);
    }
  }
  return g;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

double& ControlField::at(int segment, int channel, Quadrature q) {
  auto& row = (q == Quadrature::kX ? ux : uy).at(static_cast<std::size_t>(segment));
  return row.at(static_cast<std::size_t>(channel));
}

double ControlField::at(int segment, int channel, Quadrature q) const {
  const auto& row = (q == Quadrature::kX ? ux : uy).at(static_cast<std::size_t>(segment));
  return row.at(static_cast<std::size_t>(channel));
}

ControlField zero_field(const ControlProblem& problem, const nmr::SpinSystem& sys) {
  ControlField f;
  f.channels = channels_for(problem, sys);
  const auto k = static_cast<std::size_t>(std::max(problem.n_segments, 0));
  f.durations.assign(k, problem.dt);
  f.ux.assign(k, std::vector<double>(f.channels.size(), 0.0));
  f.uy = f.ux;
  return f;
}

ControlField random_field(const ControlProblem& problem, const nmr::SpinSystem& sys) {
  ControlField f = zero_field(problem, sys);
  std::mt19937_64 rng(problem.seed);
  const double span = problem.initial_fraction * problem.max_amplitude;
  std::uniform_real_distribution<double> uniform(-span, span);
  for (int k = 0; k < f.n_segments(); ++k) {
    for (int c = 0; c < f.n_channels(); ++c) {
      f.at(k, c, Quadrature::kX) = uniform(rng);
      f.at(k, c, Quadrature::kY) = uniform(rng);
    }
  }
  return f;
}

Evaluation evaluate(const ControlProblem& problem, const nmr::SpinSystem& sys,
                    const ControlField& field, bool with_gradient) {
  check_problem(problem, sys);
  check_field(field);
  const Drift drift = make_drift(field.channels, sys);
  const CMatrix target_dag = problem.target.matrix().adjoint();
  const auto d = drift.h0.rows();
  const double d2 = static_cast<double>(d * d);
  const int n_seg = field.n_segments();
  const int n_ch = field.n_channels();
  const double n_scales = static_cast<double>(problem.rf_scales.size());

  Evaluation out;
  if (with_gradient) {
    out.grad_x.assign(static_cast<std::size_t>(n_seg), std::vector<double>(static_cast<std::size_t>(n_ch), 0.0));
    out.grad_y = out.grad_x;
  }

  std::vector<SegmentPropagator> props(static_cast<std::size_t>(n_seg));
  std::vector<CMatrix> forward(static_cast<std::size_t>(n_seg) + 1);
  for (double scale : problem.rf_scales) {
    forward[0] = CMatrix::Identity(d, d);
    for (int k = 0; k < n_seg; ++k) {
      props[static_cast<std::size_t>(k)] = propagate(drift, field, k, scale);
      forward[static_cast<std::size_t>(k) + 1] =
          props[static_cast<std::size_t>(k)].u * forward[static_cast<std::size_t>(k)];
    }
    const Complex overlap = (target_dag * forward.back()).trace();
    out.fidelity_per_scale.push_back(std::norm(overlap) / d2);
    if (!with_gradient) continue;

    // back = T^dagger U_N ... U_{k+1}; Tr(T^dagger U) = Tr(back U_k X_{k-1}).
    CMatrix back = target_dag;
    for (int k = n_seg - 1; k >= 0; --k) {
      const auto& p = props[static_cast<std::size_t>(k)];
      const double dt = field.durations[static_cast<std::size_t>(k)];
      const CMatrix b = p.vectors.adjoint() * (forward[static_cast<std::size_t>(k)] * back) * p.vectors;
      CMatrix gamma(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) gamma(r, c) = divided_difference(p.values(r), p.values(c), dt);
      }
      // d Tr / du = sum_{ab} B_ab Gamma_ba A_ba, A = V^dagger (scale * Op) V.
      const CMatrix weighted = b.transpose().cwiseProduct(gamma);
      for (int c = 0; c < n_ch; ++c) {
        for (Quadrature q : {Quadrature::kX, Quadrature::kY}) {
          const CMatrix& op = (q == Quadrature::kX ? drift.x_ops : drift.y_ops)[static_cast<std::size_t>(c)];
          const CMatrix a = p.vectors.adjoint() * op * p.vectors;
          const Complex g = scale * weighted.cwiseProduct(a).sum();
          const double dphi = 2.0 * (std::conj(overlap) * g).real() / d2 / n_scales;
          auto& grad = q == Quadrature::kX ? out.grad_x : out.grad_y;
          grad[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)] += dphi;
        }
      }
      back = back * p.u;
    }
  }
  out.average = std::accumulate(out.fidelity_per_scale.begin(), out.fidelity_per_scale.end(), 0.0) / n_scales;
  out.worst = *std::min_element(out.fidelity_per_scale.begin(), out.fidelity_per_scale.end());
  return out;
}

GrapeResult grape_optimize(const ControlProblem& problem, const nmr::SpinSystem& sys,
                           const ControlField* initial, const IterationCallback& on_iteration) {
  check_problem(problem, sys);
  ControlField field = initial ? *initial : random_field(problem, sys);
  check_field(field);
  const double cap = problem.max_amplitude;
  const auto clip = [cap](std::vector<double>& x) {
    for (auto& v : x) v = std::clamp(v, -cap, cap);
  };

  std::vector<double> x = flatten(field);
  clip(x);
  unflatten(x, field);
  Evaluation current = evaluate(problem, sys, field, true);
  std::vector<double> grad = flatten_gradient(current);

  GrapeResult result;
  result.history.push_back(current.average);

  // Limited-memory quasi-Newton direction on -Phi; steepest ascent whenever
  // the curvature history is empty or yields a non-ascent direction.
  constexpr std::size_t kMemory = 20;
  constexpr double kArmijo = 1e-4;
  std::deque<std::pair<std::vector<double>, std::vector<double>>> history;
  double steepest_step = 0.0;
  {
    double gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    steepest_step = gmax > 0.0 ? 0.05 * cap / gmax : 1.0;
  }

  int iteration = 0;
  while (current.average < problem.stop_fidelity && iteration < problem.max_iterations) {
    std::vector<double> dir = grad;
    if (!history.empty()) {
      std::vector<double> alpha(history.size());
      for (std::size_t i = history.size(); i-- > 0;) {
        const auto& [s, y] = history[i];
        alpha[i] = dot(s, dir) / dot(y, s);
        for (std::size_t j = 0; j < dir.size(); ++j) dir[j] -= alpha[i] * y[j];
      }
      const auto& [s_last, y_last] = history.back();
      const double gamma = dot(s_last, y_last) / dot(y_last, y_last);
      for (auto& v : dir) v *= gamma;
      for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& [s, y] = history[i];
        const double beta = dot(y, dir) / dot(y, s);
        for (std::size_t j = 0; j < dir.size(); ++j) dir[j] += (alpha[i] - beta) * s[j];
      }
      if (dot(dir, grad) <= 0.0) {
        history.clear();
        dir = grad;
      }
    }
    double step = history.empty() ? steepest_step : 1.0;

    bool accepted = false;
    std::vector<double> trial;
    Evaluation next;
    for (int tries = 0; tries < 40; ++tries) {
      trial = x;
      for (std::size_t j = 0; j < trial.size(); ++j) trial[j] += step * dir[j];
      clip(trial);
      std::vector<double> moved(trial.size());
      for (std::size_t j = 0; j < trial.size(); ++j) moved[j] = trial[j] - x[j];
      ControlField candidate = field;
      unflatten(trial, candidate);
      next = evaluate(problem, sys, candidate, false);
      if (next.average > current.average + kArmijo * dot(grad, moved)) {
        accepted = true;
        field = std::move(candidate);
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (history.empty()) break;  // no ascent even along the gradient: stalled
      history.clear();
      continue;
    }
    if (history.empty()) steepest_step = step * 2.0;

    next = evaluate(problem, sys, field, true);
    std::vector<double> next_grad = flatten_gradient(next);
    std::vector<double> s(x.size()), y(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      s[j] = trial[j] - x[j];
      y[j] = grad[j] - next_grad[j];  // gradient change of -Phi
    }
    if (dot(s, y) > 1e-16 * std::sqrt(dot(s, s) * dot(y, y))) {
      history.emplace_back(std::move(s), std::move(y));
      if (history.size() > kMemory) history.pop_front();
    }
    x = std::move(trial);
    grad = std::move(next_grad);
    current = std::move(next);
    ++iteration;
    result.history.push_back(current.average);
    if (on_iteration) on_iteration(iteration, current.average);
  }

  result.field = std::move(field);
  result.fidelity_per_scale = current.fidelity_per_scale;
  result.average = current.average;
  result.worst = current.worst;
  result.iterations = iteration;
  result.converged = current.average >= problem.stop_fidelity;
  return result;
}

GradientCheck gradient_check(const ControlProblem& problem, const nmr::SpinSystem& sys,
                             const ControlField& field, int segment, int channel, Quadrature q,
                             double relative_step) {
  if (segment < 0 || segment >= field.n_segments() || channel < 0 || channel >= field.n_channels()) {
    throw std::out_of_range("gradient_check: segment or channel out of range");
  }
  const Evaluation e = evaluate(problem, sys, field, true);
  GradientCheck out;
  out.analytic = (q == Quadrature::kX ? e.grad_x : e.grad_y)[static_cast<std::size_t>(segment)]
                                                              [static_cast<std::size_t>(channel)];
  const double h = relative_step * problem.max_amplitude;
  ControlField plus = field, minus = field;
  plus.at(segment, channel, q) += h;
  minus.at(segment, channel, q) -= h;
  out.numeric = (evaluate(problem, sys, plus, false).average -
                 evaluate(problem, sys, minus, false).average) / (2.0 * h);
  const double scale = std::max(std::abs(out.analytic), std::abs(out.numeric));
  out.relative_error = scale > 0.0 ? std::abs(out.analytic - out.numeric) / scale : 0.0;
  return out;
}

std::string controls_csv(const ControlField& field) {
  std::string out = "segment_index,duration_s,channel,u_x,u_y\n";
  for (int k = 0; k < field.n_segments(); ++k) {
    for (int c = 0; c < field.n_channels(); ++c) {
      out += fmt::format("{},{:.12g},{},{:.12g},{:.12g}\n", k, field.durations[static_cast<std::size_t>(k)],
                         field.channels[static_cast<std::size_t>(c)].name,
                         field.at(k, c, Quadrature::kX), field.at(k, c, Quadrature::kY));
    }
  }
  return out;
}

}  // namespace qphe::control
