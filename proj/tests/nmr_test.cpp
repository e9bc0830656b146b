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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "qphe/nmr.h"
#include "qphe/pigeonhole.h"
#include "test_util.h"

namespace qphe::nmr {
namespace {

using testing::permutation_matrix;
using testing::permuted;
using testing::random_deviation;
using testing::random_system;
using testing::zero_system;


constexpr double kTwoPi = 2.0 * std::numbers::pi;
TEST(Hamiltonian, ZeroSystemIsZero) {
  EXPECT_EQ(internal_hamiltonian(zero_system(4)).matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, TwoCoupledSpins) {
  SpinSystem sys = zero_system(2);
  sys.jp = {{0.0, 8.0}, {8.0, 0.0}};
  const auto h = internal_hamiltonian(sys);
  const double q = kTwoPi * 2.0;
  EXPECT_NEAR(h(0, 0).real(), q, 1e-12);
  EXPECT_NEAR(h(1, 1).real(), -q, 1e-12);
  EXPECT_NEAR(h(2, 2).real(), -q, 1e-12);
  EXPECT_NEAR(h(3, 3).real(), q, 1e-12);
}

TEST(Hamiltonian, DiagonalMatchesScalarFormula) {
  const auto sys = placeholder_spin_system();
  const auto h = internal_hamiltonian(sys);
  const CMatrix off = h.matrix() - CMatrix(h.matrix().diagonal().asDiagonal());
  EXPECT_EQ(off.cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t b = 0; b < 16; ++b) {
    const auto bits = bits_of_index(b, 4);
    double e = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double mi = bits[static_cast<std::size_t>(i)] == '0' ? 0.5 : -0.5;
      e += -kTwoPi * sys.nu[static_cast<std::size_t>(i)] * mi;
      for (int j = i + 1; j < 4; ++j) {
        const double mj = bits[static_cast<std::size_t>(j)] == '0' ? 0.5 : -0.5;
        e += kTwoPi * sys.coupling(i, j) * mi * mj;
      }
    }
    EXPECT_NEAR(h(b, b).real(), e, 1e-9 * std::abs(e) + 1e-9) << bits;
  }
}

TEST(Thermal, SingleSpinInATwoSpinSystem) {
  const auto rho = thermal_state(zero_system(2), PrepSpec{.epsilon = 1.0, .weights = {0.0, 1.0}});
  const CVector diag = rho.matrix().diagonal();
  EXPECT_NEAR(diag(0).real(), 0.5, 1e-15);
  EXPECT_NEAR(diag(1).real(), -0.5, 1e-15);
  EXPECT_THROW(thermal_state(zero_system(2), PrepSpec{.epsilon = 0.0, .weights = {}}), std::invalid_argument);
  EXPECT_THROW(thermal_state(zero_system(2), PrepSpec{.epsilon = 1.0, .weights = {1.0}}), std::invalid_argument);
}

TEST(Thermal, TracelessWithEqualPositiveLines) {
  const auto sys = placeholder_spin_system();
  const PrepSpec prep{.epsilon = 1e-5, .weights = {}};
  const auto rho = thermal_state(sys, prep);
  EXPECT_TRUE(rho.is_deviation());
  EXPECT_NEAR(std::abs(rho.trace()), 0.0, 1e-18);
  const auto spec = detect(rho, sys);
  ASSERT_EQ(spec.lines.size(), 8u);
  for (const auto& l : spec.lines) EXPECT_NEAR(l.amplitude, prep.epsilon / 2.0, 1e-17) << l.label;
}

TEST(Thermal, AncillaWeightScalesLines) {
  const auto sys = placeholder_spin_system();
  const PrepSpec prep{.epsilon = 1.0, .weights = {1.0, 1.0, 1.0, 0.25}};
  for (const auto& l : detect(thermal_state(sys, prep), sys).lines) EXPECT_NEAR(l.amplitude, 0.125, 1e-12);
}

TEST(Inversion, PreparesInputState) {
  const auto sys = placeholder_spin_system();
  const auto eq = thermal_state(sys, PrepSpec{});
  const auto in = invert_populations(eq, "0000", "0001");
  EXPECT_EQ(in(0, 0), eq(1, 1));
  EXPECT_EQ(in(1, 1), eq(0, 0));
  for (std::size_t b = 2; b < 16; ++b) EXPECT_EQ(in(b, b), eq(b, b));
}

TEST(Inversion, InvolutionAndCoherencesUntouched) {
  std::mt19937_64 rng(31);
  const auto rho = random_deviation(4, rng);
  const auto once = invert_populations(rho, "0110", "1010");
  const auto twice = invert_populations(once, "0110", "1010");
  EXPECT_EQ((twice.matrix() - rho.matrix()).cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      if (r != c) EXPECT_EQ(once(r, c), rho(r, c));
    }
  }
  EXPECT_THROW(invert_populations(rho, "0000", "0000"), std::invalid_argument);
  EXPECT_THROW(invert_populations(rho, "000", "001"), std::invalid_argument);
}

TEST(Pseudopure, TwoPopulations) {
  const auto sys = placeholder_spin_system();
  const PrepSpec prep{.epsilon = 1e-5, .weights = {}};
  const auto rho = pseudopure_prepare(sys, prep);
  EXPECT_NEAR(rho(0, 0).real(), prep.epsilon / 2.0, 1e-20);
  EXPECT_NEAR(rho(1, 1).real(), -prep.epsilon / 2.0, 1e-20);
  int nonzero = 0;
  for (std::size_t r = 0; r < 16; ++r) {
    for (std::size_t c = 0; c < 16; ++c) {
      if (std::abs(rho(r, c)) > 1e-20) ++nonzero;
    }
  }
  EXPECT_EQ(nonzero, 2);
  EXPECT_NEAR(std::abs(rho.trace()), 0.0, 1e-20);
}

TEST(Pseudopure, SinglePositiveLine) {
  const auto sys = placeholder_spin_system();
  const PrepSpec prep{.epsilon = 1e-5, .weights = {}};
  const auto spec = detect(pseudopure_prepare(sys, prep), sys);
  for (const auto& l : spec.lines) {
    if (l.label == "000") {
      EXPECT_NEAR(l.amplitude, prep.epsilon / 2.0, 1e-18);
    } else {
      EXPECT_NEAR(l.amplitude, 0.0, 1e-18) << l.label;
    }
  }
}

TEST(Pseudopure, IndependentOfParticleWeights) {
  const auto sys = placeholder_spin_system();
  const auto a = pseudopure_prepare(sys, PrepSpec{.epsilon = 1.0, .weights = {}});
  const auto b = pseudopure_prepare(sys, PrepSpec{.epsilon = 1.0, .weights = {4.0, 4.0, 4.0, 1.0}});
  EXPECT_LT((a.matrix() - b.matrix()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Detect, ProbeStagesHaveNegativeOuterLines) {
  const auto sys = placeholder_spin_system();
  for (auto stage : {Stage::kU12, Stage::kU13, Stage::kU23}) {
    const auto spec = stage_spectrum(sys, PrepSpec{}, stage);
    EXPECT_LT(spec.line("000").amplitude, 0.0) << stage_name(stage);
    EXPECT_LT(spec.line("111").amplitude, 0.0) << stage_name(stage);
  }
  const auto mzi = stage_spectrum(sys, PrepSpec{}, Stage::kMzi);
  for (const auto& l : mzi.lines) EXPECT_GT(l.amplitude, 0.0) << l.label;
}

TEST(Detect, WrongSpinCount) {
  EXPECT_THROW(detect(thermal_state(zero_system(3), PrepSpec{}), placeholder_spin_system()),
               std::invalid_argument);
}

TEST(Detect, LabelsFollowNonAncillaSpins) {
  SpinSystem sys = zero_system(3);
  sys.ancilla_index = 0;
  sys.jp = {{0.0, 10.0, 30.0}, {10.0, 0.0, 0.0}, {30.0, 0.0, 0.0}};
  const auto spec = detect(thermal_state(sys, PrepSpec{}), sys);
  ASSERT_EQ(spec.lines.size(), 4u);
  EXPECT_NEAR(spec.line("01").frequency_hz, -5.0 + 15.0, 1e-12);
  for (const auto& l : spec.lines) EXPECT_GT(l.amplitude, 0.0);
}

TEST(LineFrequency, NoCouplings) {
  SpinSystem sys = zero_system(4);
  sys.nu = {100.0, 200.0, 300.0, 42.0};
  for (std::size_t s = 0; s < 8; ++s) EXPECT_EQ(line_frequency(sys, bits_of_index(s, 3)), 42.0);
}

TEST(LineFrequency, OuterLinesSpanSumOfCouplings) {
  const auto sys = placeholder_spin_system();
  const double sum = sys.coupling(0, 3) + sys.coupling(1, 3) + sys.coupling(2, 3);
  EXPECT_NEAR(std::abs(line_frequency(sys, "000") - line_frequency(sys, "111")), sum, 1e-9);
  EXPECT_THROW(line_frequency(sys, "00"), std::invalid_argument);
  EXPECT_THROW(line_frequency(sys, "0a0"), std::invalid_argument);
}

TEST(LineFrequency, MatchesEigenvalueDifferences) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = random_system(rng);
    const auto h = internal_hamiltonian(sys);
    for (std::size_t s = 0; s < 8; ++s) {
      const double diff = (h(2 * s + 1, 2 * s + 1).real() - h(2 * s, 2 * s).real()) / kTwoPi;
      EXPECT_NEAR(line_frequency(sys, bits_of_index(s, 3)), diff, 1e-9);
    }
  }
}

TEST(Render, UnitLinePeak) {
  Spectrum spec{{{10.0, 1.0, "0"}}, 0.0};
  EXPECT_NEAR(render(spec, 2.0, {10.0})[0], 1.0, 1e-15);
  EXPECT_NEAR(render(spec, 2.0, {11.0})[0], 0.5, 1e-15);
}

TEST(Render, SeparatedLines) {
  Spectrum spec{{{-500.0, 1.0, "0"}, {500.0, -2.0, "1"}}, 0.0};
  const auto v = render(spec, 1.0, {-500.0, 500.0, 0.0});
  EXPECT_NEAR(v[0], 1.0, 1e-5);
  EXPECT_NEAR(v[1], -2.0, 1e-5);
  EXPECT_NEAR(v[2], 0.0, 1e-5);
}

TEST(Render, Integral) {
  Spectrum spec{{{-40.0, 1.0, "0"}, {35.0, 0.5, "1"}}, 0.0};
  const double lw = 4.0;
  const auto grid = default_grid(spec, 5000.0, 200001);
  const auto v = render(spec, lw, grid);
  const double step = grid[1] - grid[0];
  const double integral = std::accumulate(v.begin(), v.end(), 0.0) * step;
  const double expect = 1.5 * std::numbers::pi * lw / 2.0;
  EXPECT_NEAR(integral / expect, 1.0, 0.02);
}

TEST(Render, Errors) {
  Spectrum spec{{{0.0, 1.0, "0"}}, 0.0};
  EXPECT_THROW(render(spec, 0.0, {0.0}), std::invalid_argument);
  EXPECT_THROW(render(spec, 1.0, {}), std::invalid_argument);
  EXPECT_THROW(default_grid(Spectrum{}, 1.0, 10), std::invalid_argument);
}

TEST(Csv, Formats) {
  Spectrum spec{{{1.0 / 3.0, -0.25, "01"}}, 0.0};
  EXPECT_EQ(spectrum_csv(spec), "label,frequency_hz,amplitude\n01,0.333333333333,-0.25\n");
  EXPECT_EQ(rendered_csv({1.5}, {2.0}), "frequency_hz,intensity\n1.5,2\n");
  EXPECT_THROW(rendered_csv({1.0}, {}), std::invalid_argument);
}

TEST(Stages, Names) {
  for (auto s : all_stages()) EXPECT_EQ(parse_stage(stage_name(s)), s);
  EXPECT_EQ(parse_stage("mzi-only"), Stage::kMzi);
  EXPECT_EQ(parse_stage("u13"), Stage::kU13);
  EXPECT_THROW(parse_stage("u14"), std::invalid_argument);
}

TEST(Config, RoundTripAndErrors) {
  const auto sys = placeholder_spin_system();
  const auto back = parse_spin_system(to_json(sys));
  EXPECT_EQ(back.labels, sys.labels);
  EXPECT_EQ(back.nu, sys.nu);
  EXPECT_EQ(back.jp, sys.jp);
  EXPECT_EQ(back.ancilla_index, sys.ancilla_index);
  EXPECT_THROW(parse_spin_system("{"), std::invalid_argument);
  EXPECT_THROW(parse_spin_system(R"({"labels":["A","B"],"nu_hz":[0,0],"ancilla_index":1})"),
               std::invalid_argument);
  EXPECT_THROW(parse_spin_system(
                   R"({"labels":["A","B"],"nu_hz":[0,0],"jp_hz":[[0,1],[2,0]],"ancilla_index":1})"),
               std::invalid_argument);
  EXPECT_THROW(parse_spin_system(
                   R"({"labels":["A","B"],"nu_hz":[0,0],"jp_hz":[[0,1],[1,0]],"ancilla_index":2})"),
               std::invalid_argument);
  EXPECT_THROW(load_spin_system("/nonexistent/spin.json"), std::invalid_argument);
}

TEST(Config, ShippedFileMatchesBuiltIn) {
  const auto file = load_spin_system(QPHE_SOURCE_DIR "/data/spin_system.json");
  const auto sys = placeholder_spin_system();
  EXPECT_EQ(file.labels, sys.labels);
  EXPECT_EQ(file.nu, sys.nu);
  EXPECT_EQ(file.jp, sys.jp);
  EXPECT_EQ(file.ancilla_index, sys.ancilla_index);
}

// ---------------------------------------------------------------- properties

TEST(Property, DetectIsLinear) {
  std::mt19937_64 rng(51);
  const auto sys = random_system(rng);
  for (int trial = 0; trial < 10; ++trial) {
    const auto r1 = random_deviation(4, rng);
    const auto r2 = random_deviation(4, rng);
    const double a = 0.7 * trial - 2.0, b = 1.3;
    const DensityMatrix mix{4, CMatrix(a * r1.matrix() + b * r2.matrix()), true};
    const auto s1 = detect(r1, sys), s2 = detect(r2, sys), s = detect(mix, sys);
    for (std::size_t k = 0; k < 8; ++k) {
      EXPECT_NEAR(s.lines[k].amplitude, a * s1.lines[k].amplitude + b * s2.lines[k].amplitude, 1e-10);
    }
  }
}

TEST(Property, RelabelingPreservesTotalIntensity) {
  std::mt19937_64 rng(52);
  for (const std::vector<int> perm : {std::vector<int>{1, 0, 2, 3}, {2, 0, 1, 3}, {2, 1, 0, 3}}) {
    const auto sys = random_system(rng);
    const auto sys_p = permuted(sys, perm);
    const CMatrix p = permutation_matrix(perm);
    const auto rho = random_deviation(4, rng);
    const DensityMatrix rho_p{4, CMatrix(p * rho.matrix() * p.adjoint()), true};
    const auto total = [](const Spectrum& s) {
      double t = 0.0;
      for (const auto& l : s.lines) t += std::abs(l.amplitude);
      return t;
    };
    const auto a = detect(rho, sys), b = detect(rho_p, sys_p);
    EXPECT_NEAR(total(a), total(b), 1e-10);
    std::vector<double> fa, fb;
    for (const auto& l : a.lines) fa.push_back(l.frequency_hz);
    for (const auto& l : b.lines) fb.push_back(l.frequency_hz);
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(fa[k], fb[k], 1e-9);
  }
}

TEST(Property, LineSignsMatchConditionalAncillaState) {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = random_system(rng);
    for (auto [stage, pair] : {std::pair{Stage::kU12, Pair{0, 1}}, std::pair{Stage::kU13, Pair{0, 2}},
                               std::pair{Stage::kU23, Pair{1, 2}}}) {
      const auto spec = stage_spectrum(sys, PrepSpec{}, stage);
      for (std::size_t s = 0; s < 8; ++s) {
        const auto label = bits_of_index(s, 3);
        const auto r = qphe_analysis(pair, label);
        const double sigma_z = 1.0 - 2.0 * r.p_ancilla_flip_given_post;
        const double amp = spec.line(label).amplitude;
        ASSERT_GT(std::abs(amp), 0.0);
        EXPECT_EQ(amp > 0.0, sigma_z > 0.0) << stage_name(stage) << " " << label;
      }
    }
  }
}

}  // namespace
}  // namespace qphe::nmr
