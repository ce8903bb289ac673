// Copyright 2026 The qread Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qread/qte_effective.hpp"

using namespace qread;
using qread::testing::Gen;

namespace {

ReadoutConfig unit_config(double dt = 1e-3) {
  ReadoutConfig cfg = longitudinal_preset(1.0);
  cfg.dt = dt;
  return cfg;
}

}  // namespace

TEST(qte_effective, excited_state_is_a_fixed_point) {
  const ReadoutConfig cfg = unit_config();
  const Rates r = Rates::from_values(0.7, 0.4, 0.3);
  for (StepScheme s : {StepScheme::Kraus, StepScheme::EulerMaruyama, StepScheme::Linear}) {
    for (double w : {-3.0, 0.0, 2.5}) {
      const QubitState out = step_effective(QubitState::excited(), r, cfg, w, s);
      EXPECT_EQ(out.rho_ee, 1.0);
      EXPECT_EQ(out.rho_gg, 0.0);
      EXPECT_EQ(out.rho_eg, cplx(0));
    }
  }
}

// Itô increment d rho_ee = -4 amp_ci rho_ee rho_gg dW; with rho_ee = 1/2, Gamma_ci = 1, dW = 0.01 it is -0.01.
TEST(qte_effective, euler_increment_example) {
  ReadoutConfig cfg = unit_config(1e-4);
  const Rates r = Rates::from_values(1.0, 1.0, 0.0);
  const double w = 0.01 / std::sqrt(cfg.dt);
  const QubitState out = step_effective(QubitState::plus(), r, cfg, w, StepScheme::EulerMaruyama);
  EXPECT_NEAR(out.rho_ee - 0.5, -0.01, 1e-15);
  // The Kraus form agrees to first order in dW.
  const QubitState k = step_effective(QubitState::plus(), r, cfg, w, StepScheme::Kraus);
  EXPECT_NEAR(k.rho_ee - 0.5, -0.01, 2e-4);
}

TEST(qte_effective, pure_dephasing_limit) {
  const ReadoutConfig cfg = unit_config();
  const double gd = 0.8;
  const Rates r = Rates::from_values(gd, 0.0, 0.0);
  for (StepScheme s : {StepScheme::Kraus, StepScheme::EulerMaruyama, StepScheme::Linear}) {
    QubitState rho = QubitState::plus();
    Gen gen(3);
    for (int k = 0; k < 2000; ++k) rho = step_effective(rho, r, cfg, gen.normal(), s);
    EXPECT_NEAR(rho.rho_eg.real(), 0.5 * std::exp(-2 * gd * 2.0), 1e-3) << to_string(s);
    EXPECT_NEAR(rho.rho_ee, 0.5, 1e-15);
  }
}

TEST(qte_effective, current_examples) {
  const Rates r = Rates::from_values(1.0, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(effective_current(QubitState::excited(), r, 0.0, 1e-3), -2.0);
  EXPECT_DOUBLE_EQ(effective_current(QubitState::ground(), r, 0.0, 1e-3), 2.0);
  EXPECT_DOUBLE_EQ(effective_current(QubitState::plus(), r, 0.3, 1e-2), 3.0);
}

TEST(qte_effective, steps_preserve_state_invariants) {
  Gen gen(21);
  for (int trial = 0; trial < 2000; ++trial) {
    ReadoutConfig cfg = unit_config(gen.uniform(1e-4, 2e-3));
    cfg.gamma1 = gen.coin() ? gen.uniform(0, 0.5) : 0.0;
    cfg.gamma2 = gen.coin() ? gen.uniform(0, 0.5) : 0.0;
    const double gci = gen.uniform(0, 2);
    const double gba = gen.uniform(0, 2);
    const Rates r = Rates::from_values(gci + gba + gen.uniform(0, 1), gci, gba);
    const QubitState out = step_effective(gen.qubit_state(), r, cfg, gen.normal(), StepScheme::Kraus);
    EXPECT_NO_THROW(validate(out, 1e-12));
  }
}

TEST(qte_effective, gross_violations_abort) {
  ReadoutConfig cfg = unit_config(0.5);
  cfg.t_final = 1.0;
  const Rates r = Rates::from_values(50.0, 50.0, 0.0);
  EXPECT_THROW(step_effective(QubitState::plus(), r, cfg, 3.0, StepScheme::EulerMaruyama), NumericalError);
}

TEST(qte_effective, record_reproduces_noise_and_signal) {
  ReadoutConfig cfg = unit_config();
  cfg.phi_lo = std::numbers::pi / 4;
  cfg.t_final = 2.0;
  const EffectiveTrajectory tr = run_effective_trajectory(cfg);
  ASSERT_EQ(tr.states.size(), 2001u);
  ASSERT_EQ(tr.record.size(), 2000u);
  for (std::size_t k = 0; k < tr.record.size(); ++k) {
    const Rates r = rates_at(tr.record.midpoint(k), cfg);
    const double signal = -2 * r.amp_ci * tr.states[k].sigma_z();
    EXPECT_NEAR(tr.record.current[k] - signal, tr.record.xi[k], 1e-12 * (1 + std::abs(tr.record.xi[k])));
  }
}

TEST(qte_effective, noise_statistics) {
  ReadoutConfig cfg = unit_config();
  cfg.t_final = 50.0;
  const EffectiveTrajectory tr = run_effective_trajectory(cfg);
  const auto n = static_cast<double>(tr.record.size());
  double mean = 0, var = 0;
  for (double x : tr.record.xi) mean += x * std::sqrt(cfg.dt);
  mean /= n;
  for (double x : tr.record.xi) var += std::pow(x * std::sqrt(cfg.dt) - mean, 2);
  var /= n - 1;
  EXPECT_LT(std::abs(mean), 4 / std::sqrt(n));
  EXPECT_LT(std::abs(var - 1), 4 * std::sqrt(2.0 / n));
}

TEST(qte_effective, seeded_runs_are_bit_identical) {
  const ReadoutConfig cfg = unit_config();
  const EffectiveTrajectory a = run_effective_trajectory(cfg);
  const EffectiveTrajectory b = run_effective_trajectory(cfg);
  EXPECT_EQ(a.record.current, b.record.current);
  EXPECT_EQ(a.states.back().rho_eg, b.states.back().rho_eg);
  EffectiveOptions other;
  other.stream = 1;
  EXPECT_NE(run_effective_trajectory(cfg, other).record.xi, a.record.xi);
}

TEST(qte_effective, shared_noise_record_drives_identical_run) {
  const ReadoutConfig cfg = unit_config();
  const EffectiveTrajectory a = run_effective_trajectory(cfg);
  EffectiveOptions opt;
  opt.noise = &a.record;
  const EffectiveTrajectory b = run_effective_trajectory(cfg, opt);
  EXPECT_EQ(a.record.xi, b.record.xi);
  EXPECT_NEAR(trace_distance(a.states.back(), b.states.back()), 0, 1e-12);
}

TEST(qte_effective, filter_of_own_record_recovers_trajectory) {
  ReadoutConfig cfg = unit_config();
  cfg.phi_lo = 0.3;
  const EffectiveTrajectory a = run_effective_trajectory(cfg);
  const std::vector<QubitState> f = filter_effective(QubitState::plus(), a.record, cfg);
  ASSERT_EQ(f.size(), a.states.size());
  for (std::size_t k = 0; k < f.size(); k += 100) EXPECT_NEAR(trace_distance(f[k], a.states[k]), 0, 1e-10);
}

TEST(qte_effective, grid_mismatch_is_rejected) {
  const ReadoutConfig cfg = unit_config();
  const EffectiveTrajectory a = run_effective_trajectory(cfg);
  ReadoutConfig other = cfg;
  other.dt = 2e-3;
  EffectiveOptions opt;
  opt.noise = &a.record;
  EXPECT_THROW(run_effective_trajectory(other, opt), ConfigError);
  other = cfg;
  other.phi_lo = 0.1;
  EXPECT_THROW(run_effective_trajectory(other, opt), ConfigError);
}

TEST(qte_effective, qnd_populations_are_frozen) {
  ReadoutConfig cfg = unit_config();
  cfg.phi_lo = 0.7;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EffectiveOptions opt;
    opt.initial = seed % 2 ? QubitState::excited() : QubitState::ground();
    opt.stream = seed;
    const EffectiveTrajectory tr = run_effective_trajectory(cfg, opt);
    for (const QubitState& q : tr.states) EXPECT_EQ(q.rho_ee, opt.initial.rho_ee);
  }
}

TEST(qte_effective, zero_length_run) {
  ReadoutConfig cfg = unit_config();
  cfg.t_final = 0;
  const EffectiveTrajectory tr = run_effective_trajectory(cfg);
  EXPECT_TRUE(tr.record.empty());
  ASSERT_EQ(tr.states.size(), 1u);
  EXPECT_EQ(tr.states[0].rho_eg, QubitState::plus().rho_eg);
}

TEST(qte_effective, unconditional_limits) {
  ReadoutConfig cfg = unit_config();
  cfg.drive = 0;  // Gamma_d = 0
  cfg.gamma1 = 0.3;
  const auto relax = unconditional_evolve(QubitState::excited(), cfg, 4.0);
  ASSERT_EQ(relax.size(), 4001u);
  EXPECT_NEAR(relax.back().rho_ee, std::exp(-1.2), 1e-12);

  cfg.gamma1 = 0;
  const auto none = unconditional_evolve(QubitState::plus(), cfg, 0.0);
  ASSERT_EQ(none.size(), 1u);

  // Gamma_d(t) = 1 - e^{-t/2} for g = kappa = 1: int_0^T = T - 2(1 - e^{-T/2}).
  ReadoutConfig lon = unit_config();
  const auto deph = unconditional_evolve(QubitState::plus(), lon, 5.0);
  const double integral = 5.0 - 2 * (1 - std::exp(-2.5));
  EXPECT_NEAR(deph.back().rho_eg.real(), 0.5 * std::exp(-2 * integral), 1e-12);
  EXPECT_NEAR(deph.back().rho_ee, 0.5, 1e-15);
}

// The linear and normalized forms describe the same state; they differ at O(dt).
TEST(qte_effective, schemes_converge_together) {
  ReadoutConfig cfg = unit_config(2e-4);
  cfg.phi_lo = std::numbers::pi / 4;
  cfg.t_final = 3.0;
  const EffectiveTrajectory ref = run_effective_trajectory(cfg);
  for (StepScheme s : {StepScheme::EulerMaruyama, StepScheme::Linear}) {
    const auto f = filter_effective(QubitState::plus(), ref.record, cfg, s);
    EXPECT_LT(trace_distance(f.back(), ref.states.back()), 2e-2) << to_string(s);
  }
}

// Strong error against a half-step reference on the same Brownian path shrinks with dt.
TEST(qte_effective, error_decreases_with_step) {
  auto error_at = [](double dt) {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      ReadoutConfig fine = unit_config(dt / 2);
      fine.t_final = 2.0;
      fine.phi_lo = std::numbers::pi / 4;
      EffectiveOptions fo;
      fo.stream = seed;
      const EffectiveTrajectory f = run_effective_trajectory(fine, fo);
      HomodyneRecord coarse_noise;
      coarse_noise.dt = dt;
      coarse_noise.phi_lo = fine.phi_lo;
      for (std::size_t k = 0; k + 1 < f.record.size(); k += 2) {
        coarse_noise.xi.push_back((f.record.xi[k] + f.record.xi[k + 1]) / 2);
        coarse_noise.current.push_back(0);
      }
      ReadoutConfig coarse = fine;
      coarse.dt = dt;
      EffectiveOptions co;
      co.noise = &coarse_noise;
      const EffectiveTrajectory c = run_effective_trajectory(coarse, co);
      total += trace_distance(c.states.back(), f.states.back());
    }
    return total / 20;
  };
  const double e1 = error_at(4e-3);
  const double e2 = error_at(1e-3);
  EXPECT_LT(e2, e1);
}
