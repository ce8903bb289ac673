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

// Entangled qubit-cavity pure state c1 |e>|alpha_e> + c2 e^{i Phi} |g>|alpha_g> and the cavity reset.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <complex>

#include "qread/bayes.hpp"
#include "qread/cavity.hpp"
#include "qread/config.hpp"
#include "qread/qubit.hpp"
#include "qread/record.hpp"
#include "qread/sme_full.hpp"

namespace qread {

struct JointPureState {
  cplx c1{1.0};
  cplx c2{0.0};
  /// Accumulated random phase Phi.
  double phi = 0.0;
  CavityPair cavity{};
  /// Cavity clock: time since the cavity was last in vacuum with the drive switched on.
  double t = 0.0;

  /// (c_e |e> + c_g |g>) (x) vacuum, normalized.
  static JointPureState product(cplx c_e, cplx c_g) {
    const double n = std::sqrt(std::norm(c_e) + std::norm(c_g));
    if (!(n > 0)) throw ConfigError("JointPureState::product: zero amplitudes");
    JointPureState s;
    s.c1 = c_e / n;
    s.c2 = c_g / n;
    return s;
  }
};

/// <alpha_g|alpha_e> = exp(-(|alpha_e|^2 + |alpha_g|^2)/2 + conj(alpha_g) alpha_e).
inline cplx coherent_overlap(cplx alpha_e, cplx alpha_g) {
  return std::exp(-(std::norm(alpha_e) + std::norm(alpha_g)) / 2 + std::conj(alpha_g) * alpha_e);
}

/// rho_ee = |c1|^2, rho_eg = c1 conj(c2) e^{-i Phi} <alpha_g|alpha_e>.
inline QubitState qubit_reduced_from_joint(const JointPureState& psi) {
  QubitState q;
  q.rho_ee = std::norm(psi.c1);
  q.rho_gg = std::norm(psi.c2);
  q.rho_eg = psi.c1 * std::conj(psi.c2) * std::polar(1.0, -psi.phi) *
             coherent_overlap(psi.cavity.alpha_e, psi.cavity.alpha_g);
  return q;
}

/// Conditions the joint state on `rec`, which must start at the state's cavity clock.
inline JointPureState propagate_joint(const JointPureState& psi0, const HomodyneRecord& rec, const ReadoutConfig& cfg) {
  if (cfg.gamma1 != 0 || cfg.gamma2 != 0) {
    throw ConfigError("joint-state propagation is defined only for gamma1 = gamma2 = 0");
  }
  if (std::abs(std::norm(psi0.c1) + std::norm(psi0.c2) - 1.0) > 1e-10) {
    throw ConfigError("joint state amplitudes are not normalized");
  }
  if (rec.empty()) return psi0;
  if (std::abs(rec.t0 - psi0.t) > 1e-9 * std::max(1.0, psi0.t)) {
    throw ConfigError("record start time does not match the joint state's cavity clock");
  }
  const QubitState prior{std::norm(psi0.c1), std::norm(psi0.c2), {}};
  const BayesUpdate u = bayes_factors(prior, rec, cfg);
  JointPureState out = psi0;
  out.c1 = psi0.c1 * std::sqrt(u.p_e / u.norm);
  out.c2 = psi0.c2 * std::sqrt(u.p_g / u.norm);
  out.phi = psi0.phi + u.phi_random;
  out.t = psi0.t + rec.duration();
  out.cavity = cavity_pair(out.t, cfg);
  return out;
}

struct ResetResult {
  QubitState qubit;
  double residual_cavity_occupation = 0.0;
  /// Post-reset joint state: same amplitudes and phase, cavity in vacuum, clock restarted.
  JointPureState state;
};

/// Instantaneous conditional displacement mapping alpha_{e,g} = -+ i a to vacuum.
inline ResetResult reset(const JointPureState& psi, const ReadoutConfig& cfg) {
  if (cfg.scheme != Scheme::Longitudinal) throw ConfigError("reset is defined for the longitudinal scheme only");
  const cplx ae = psi.cavity.alpha_e;
  const cplx ag = psi.cavity.alpha_g;
  const double tol = 1e-8 * std::max(1.0, std::abs(ae));
  if (std::abs(ae + ag) > tol || std::abs(ae.real()) > tol || std::abs(ag.real()) > tol) {
    throw ConfigError("reset requires cavity branches of the form alpha_{e,g} = -+ i a");
  }
  ResetResult r;
  r.state = psi;
  r.state.cavity = CavityPair::from_amplitudes(0.0, 0.0);
  r.state.t = 0.0;
  r.qubit = qubit_reduced_from_joint(r.state);
  r.residual_cavity_occupation = 0.0;
  return r;
}

/// Joint pure state expanded on n_max + 1 Fock levels per branch.
inline Eigen::VectorXcd joint_state_vector(const JointPureState& psi, int n_max) {
  const int m = n_max + 1;
  Eigen::VectorXcd v(2 * m);
  v.head(m) = psi.c1 * coherent_state(psi.cavity.alpha_e, n_max);
  v.tail(m) = psi.c2 * std::polar(1.0, psi.phi) * coherent_state(psi.cavity.alpha_g, n_max);
  return v;
}

/// Applies U = exp(i a_amp sz (x) (a + a^dag)) on the truncated space, displacing |-+ i a_amp> to vacuum.
inline FockJointState reset_full_sme(const FockJointState& state, double a_amp, const ReadoutConfig& cfg,
                                     double top_occupancy_limit = 1e-6) {
  if (!std::isfinite(a_amp)) throw ConfigError("reset amplitude must be finite");
  (void)cfg;
  const int m = state.levels();
  const Eigen::MatrixXcd a1 = annihilation_matrix(state.n_max);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(a1 + a1.adjoint());
  const Eigen::MatrixXcd& v = eig.eigenvectors();
  const Eigen::VectorXd& x = eig.eigenvalues();
  auto conditional = [&](double sign) {
    Eigen::VectorXcd phases(m);
    for (int i = 0; i < m; ++i) phases(i) = std::polar(1.0, sign * a_amp * x(i));
    return Eigen::MatrixXcd(v * phases.asDiagonal() * v.adjoint());
  };
  const std::array<Eigen::MatrixXcd, 2> u{conditional(+1.0), conditional(-1.0)};
  FockJointState out = state;
  for (int q = 0; q < 2; ++q)
    for (int p = 0; p < 2; ++p) out.block(q, p) = u[q] * state.block(q, p) * u[p].adjoint();
  if (top_fock_occupancy(out) > top_occupancy_limit) {
    throw NumericalError("reset pushed population into the highest Fock level (increase n_max)");
  }
  return out;
}

}  // namespace qread
