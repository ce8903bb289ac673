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

// Qubit plus truncated cavity under homodyne monitoring of the cavity output:
//
//   d rho = -i[H, rho] dt + kappa D[a] rho dt + gamma1 D[s-] rho dt + (gamma2/2) D[sz] rho dt
//           + sqrt(kappa) H[a e^{-i phi}] rho dW,
//
// with H = (g_z/2) sz (a + a^dag) (longitudinal) or chi sz a^dag a + eps (a + a^dag) (dispersive).
// Every term is block diagonal in the qubit basis and tridiagonal in the Fock basis, so a step costs
// O(n_max^2) instead of a dense O(n_max^3) product.

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "qread/cavity.hpp"
#include "qread/config.hpp"
#include "qread/qubit.hpp"
#include "qread/random.hpp"
#include "qread/record.hpp"

namespace qread {

/// Joint qubit-cavity density matrix. Basis order |e,0>..|e,n_max>, |g,0>..|g,n_max>.
struct FockJointState {
  int n_max = 0;
  Eigen::MatrixXcd rho;

  int levels() const { return n_max + 1; }
  auto block(int q, int p) { return rho.block(q * levels(), p * levels(), levels(), levels()); }
  auto block(int q, int p) const { return rho.block(q * levels(), p * levels(), levels(), levels()); }

  /// rho_qubit (x) |psi><psi| for a normalized cavity vector psi.
  static FockJointState product(const QubitState& qubit, const Eigen::VectorXcd& cavity) {
    FockJointState s;
    s.n_max = static_cast<int>(cavity.size()) - 1;
    const Eigen::MatrixXcd c = cavity * cavity.adjoint();
    const int m = s.levels();
    s.rho = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
    s.rho.block(0, 0, m, m) = qubit.rho_ee * c;
    s.rho.block(m, m, m, m) = qubit.rho_gg * c;
    s.rho.block(0, m, m, m) = qubit.rho_eg * c;
    s.rho.block(m, 0, m, m) = std::conj(qubit.rho_eg) * c;
    return s;
  }

  /// |psi><psi| for a joint pure state psi in the basis order above.
  static FockJointState from_pure(const Eigen::VectorXcd& psi) {
    if (psi.size() < 4 || psi.size() % 2 != 0) throw ConfigError("joint state vector must have even length >= 4");
    FockJointState s;
    s.n_max = static_cast<int>(psi.size() / 2) - 1;
    s.rho = psi * psi.adjoint();
    return s;
  }

  double purity() const { return rho.squaredNorm(); }
  double trace() const { return rho.trace().real(); }
};

/// Coherent state |alpha> truncated to n_max photons (not renormalized).
inline Eigen::VectorXcd coherent_state(cplx alpha, int n_max) {
  if (n_max < 0) throw ConfigError("coherent_state: n_max must be >= 0");
  Eigen::VectorXcd v(n_max + 1);
  v(0) = std::exp(-std::norm(alpha) / 2);
  for (int n = 1; n <= n_max; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

inline Eigen::VectorXcd fock_vacuum(int n_max) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n_max + 1);
  v(0) = 1.0;
  return v;
}

/// Qubit state obtained by tracing out the cavity.
inline QubitState reduce_qubit(const FockJointState& s) {
  return {s.block(0, 0).trace().real(), s.block(1, 1).trace().real(), s.block(0, 1).trace()};
}

/// <a> = sum_n sqrt(n + 1) rho_{n+1, n}, summed over both qubit blocks.
inline cplx mean_annihilation(const FockJointState& s) {
  cplx acc = 0.0;
  for (int q = 0; q < 2; ++q) {
    const auto b = s.block(q, q);
    for (int n = 0; n < s.n_max; ++n) acc += std::sqrt(static_cast<double>(n + 1)) * b(n + 1, n);
  }
  return acc;
}

/// Population of the highest Fock level, used to detect truncation.
inline double top_fock_occupancy(const FockJointState& s) {
  return s.block(0, 0)(s.n_max, s.n_max).real() + s.block(1, 1)(s.n_max, s.n_max).real();
}

/// Square matrix with diagonal `d`, superdiagonal `up` ((i, i+1) entries) and subdiagonal `lo`.
struct Tridiagonal {
  Eigen::VectorXcd d, up, lo;

  /// T X.
  Eigen::MatrixXcd left(const Eigen::MatrixXcd& x) const {
    const Eigen::Index m = d.size();
    Eigen::MatrixXcd r(m, x.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
      r.row(i) = d(i) * x.row(i);
      if (i + 1 < m) r.row(i) += up(i) * x.row(i + 1);
      if (i > 0) r.row(i) += lo(i - 1) * x.row(i - 1);
    }
    return r;
  }

  /// X T^dag.
  Eigen::MatrixXcd right_adjoint(const Eigen::MatrixXcd& x) const {
    const Eigen::Index m = d.size();
    Eigen::MatrixXcd r(x.rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
      r.col(j) = std::conj(d(j)) * x.col(j);
      if (j + 1 < m) r.col(j) += std::conj(up(j)) * x.col(j + 1);
      if (j > 0) r.col(j) += std::conj(lo(j - 1)) * x.col(j - 1);
    }
    return r;
  }

  Eigen::MatrixXcd dense() const {
    const Eigen::Index m = d.size();
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m, m);
    r.diagonal() = d;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      r(i, i + 1) = up(i);
      r(i + 1, i) = lo(i);
    }
    return r;
  }
};

/// Fock-space pieces of the generator for one configuration.
struct OperatorSet {
  int n_max = 0;
  /// Cavity Hamiltonian conditioned on the qubit being in |e> (index 0) or |g> (index 1).
  std::array<Tridiagonal, 2> h;
  /// sqrt(n + 1), the superdiagonal of a.
  Eigen::VectorXd sqrt_n;
  /// sz eigenvalue of each qubit block.
  static constexpr std::array<double, 2> kSign{+1.0, -1.0};

  explicit OperatorSet(const ReadoutConfig& cfg) : n_max(cfg.n_max) {
    cfg.validate();
    const int m = n_max + 1;
    sqrt_n.resize(m - 1);
    for (int i = 0; i + 1 < m; ++i) sqrt_n(i) = std::sqrt(static_cast<double>(i + 1));
    for (int q = 0; q < 2; ++q) {
      const double s = kSign[static_cast<std::size_t>(q)];
      Tridiagonal& t = h[static_cast<std::size_t>(q)];
      t.d = Eigen::VectorXcd::Zero(m);
      double hop;
      if (cfg.scheme == Scheme::Longitudinal) {
        hop = s * cfg.drive / 2;
      } else {
        hop = cfg.drive;
        for (int i = 0; i < m; ++i) t.d(i) = s * cfg.chi * i;
      }
      t.up = (hop * sqrt_n).cast<cplx>();
      t.lo = t.up;
    }
  }
};

/// Dense single-mode operators on n_max + 1 levels (for checks and small problems).
inline Eigen::MatrixXcd annihilation_matrix(int n_max) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// Dense joint operators in the FockJointState basis. The integrator uses the banded OperatorSet instead;
/// these are for checks, small problems and the reset unitary.
struct DenseOperators {
  Eigen::MatrixXcd a, a_dag, number, sigma_z, sigma_minus, h_z;
  /// Quadratures (a e^{-i phi} + h.c.)/2 and (a e^{-i phi} - h.c.)/(2i).
  Eigen::MatrixXcd i_phi, q_phi;
};

inline DenseOperators build_operators(int n_max, const ReadoutConfig& cfg) {
  if (n_max < 1) throw ConfigError("n_max must be >= 1");
  if (n_max > kMaxFockCutoff) throw ConfigError("n_max exceeds the supported cutoff of 4096");
  const int m = n_max + 1;
  const Eigen::MatrixXcd a1 = annihilation_matrix(n_max);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m, m);
  const Eigen::MatrixXcd x = a1 + a1.adjoint();
  const Eigen::MatrixXcd n = a1.adjoint() * a1;
  auto kron2 = [m](const Eigen::Matrix2cd& q, const Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd r(2 * m, 2 * m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r.block(i * m, j * m, m, m) = q(i, j) * c;
    return r;
  };
  Eigen::Matrix2cd sz, sm, i2;
  sz << 1, 0, 0, -1;
  sm << 0, 0, 1, 0;  // |g><e|
  i2.setIdentity();
  DenseOperators ops;
  ops.a = kron2(i2, a1);
  ops.a_dag = ops.a.adjoint();
  ops.number = kron2(i2, n);
  const cplx phase = std::polar(1.0, -cfg.phi_lo);
  ops.i_phi = 0.5 * (phase * ops.a + std::conj(phase) * ops.a_dag);
  ops.q_phi = cplx(0, -0.5) * (phase * ops.a - std::conj(phase) * ops.a_dag);
  ops.sigma_z = kron2(sz, id);
  ops.sigma_minus = kron2(sm, id);
  if (cfg.scheme == Scheme::Longitudinal) {
    ops.h_z = kron2(sz, cfg.drive / 2 * x);
  } else {
    ops.h_z = kron2(sz, cfg.chi * n) + kron2(i2, cfg.drive * x);
  }
  return ops;
}

/// Deterministic branch-average field (alpha_e + alpha_g)/2 at cavity time t. Zero for the longitudinal
/// scheme; for the dispersive scheme it adds a qubit-independent offset to the raw homodyne signal.
inline cplx mean_field_offset(double t, const ReadoutConfig& cfg) {
  if (cfg.scheme == Scheme::Longitudinal) return 0.0;
  const CavityPair p = cavity_pair(t, cfg);
  return 0.5 * (p.alpha_e + p.alpha_g);
}

/// Copy of a full-SME record with the mean-field offset sqrt(kappa) 2 Re(alpha_bar e^{-i phi}) removed,
/// so that it can be filtered by the qubit-only equations. Identity for the longitudinal scheme.
inline HomodyneRecord centered_record(const HomodyneRecord& rec, const ReadoutConfig& cfg) {
  HomodyneRecord out = rec;
  if (cfg.scheme == Scheme::Longitudinal) return out;
  const cplx phase = std::polar(1.0, -rec.phi_lo);
  for (std::size_t k = 0; k < rec.size(); ++k) {
    out.current[k] -= 2 * std::sqrt(cfg.kappa) * (phase * mean_field_offset(rec.time(k), cfg)).real();
  }
  return out;
}

namespace detail {

// Applies one step in place. `dy` is the raw record increment (including the mean-field part),
// `dw` the Wiener increment.
inline void sme_increment(FockJointState& state, const OperatorSet& ops, const ReadoutConfig& cfg, double dy,
                          double dw, StepScheme scheme) {
  const int m = state.levels();
  const double dt = cfg.dt;
  const cplx lo_phase = std::polar(1.0, -cfg.phi_lo);
  const double sk = std::sqrt(cfg.kappa);

  // A_q = -(i H_q + kappa n / 2 + qubit loss terms / 2), tridiagonal per qubit block.
  std::array<Tridiagonal, 2> a_gen;
  for (int q = 0; q < 2; ++q) {
    const Tridiagonal& h = ops.h[static_cast<std::size_t>(q)];
    Tridiagonal& t = a_gen[static_cast<std::size_t>(q)];
    const double qubit_loss = cfg.gamma2 / 2 + (q == 0 ? cfg.gamma1 : 0.0);
    t.d.resize(m);
    for (int i = 0; i < m; ++i) t.d(i) = cplx(0, -1) * h.d(i) - 0.5 * (cfg.kappa * i + qubit_loss);
    t.up = cplx(0, -1) * h.up;
    t.lo = cplx(0, -1) * h.lo;
  }
  // c = sqrt(kappa) e^{-i phi} a.
  Tridiagonal c;
  c.d = Eigen::VectorXcd::Zero(m);
  c.up = (sk * lo_phase) * ops.sqrt_n.cast<cplx>();
  c.lo = Eigen::VectorXcd::Zero(m - 1);

  const double deph = cfg.gamma2 / 2;
  std::array<std::array<Eigen::MatrixXcd, 2>, 2> out;
  const std::array<std::pair<int, int>, 3> blocks{{{0, 0}, {1, 1}, {0, 1}}};

  if (scheme == StepScheme::Kraus) {
    std::array<Tridiagonal, 2> kraus;
    for (int q = 0; q < 2; ++q) {
      Tridiagonal& k = kraus[static_cast<std::size_t>(q)];
      const Tridiagonal& g = a_gen[static_cast<std::size_t>(q)];
      k.d = Eigen::VectorXcd::Ones(m) + dt * g.d;
      k.up = dt * g.up + dy * c.up;
      k.lo = dt * g.lo;
    }
    for (auto [q, p] : blocks) {
      const Eigen::MatrixXcd x = state.block(q, p);
      // M_q X M_p^dag.
      out[q][p] = kraus[p].right_adjoint(kraus[q].left(x));
      out[q][p] += (deph * dt * OperatorSet::kSign[q] * OperatorSet::kSign[p]) * x;
    }
    out[1][1] += (cfg.gamma1 * dt) * Eigen::MatrixXcd(state.block(0, 0));
  } else {
    // Deterministic generator L(rho) plus the noise term.
    double mean_c = 0.0;
    if (scheme == StepScheme::EulerMaruyama) mean_c = 2 * (lo_phase * sk * mean_annihilation(state)).real();
    for (auto [q, p] : blocks) {
      const Eigen::MatrixXcd x = state.block(q, p);
      Eigen::MatrixXcd drift = a_gen[q].left(x) + a_gen[p].right_adjoint(x);
      drift += c.right_adjoint(c.left(x));
      drift += (deph * OperatorSet::kSign[q] * OperatorSet::kSign[p]) * x;
      if (q == 1 && p == 1) drift += cfg.gamma1 * Eigen::MatrixXcd(state.block(0, 0));
      Eigen::MatrixXcd noise = c.left(x) + c.right_adjoint(x);
      if (scheme == StepScheme::EulerMaruyama) {
        noise -= mean_c * x;
        out[q][p] = x + dt * drift + dw * noise;
      } else {
        out[q][p] = x + dt * drift + dy * noise;
      }
    }
  }

  state.block(0, 0) = 0.5 * (out[0][0] + out[0][0].adjoint());
  state.block(1, 1) = 0.5 * (out[1][1] + out[1][1].adjoint());
  state.block(0, 1) = out[0][1];
  state.block(1, 0) = out[0][1].adjoint();
  const double tr = state.trace();
  if (!(tr > 0) || !std::isfinite(tr)) throw NumericalError("joint state lost its trace");
  state.rho /= tr;
}

}  // namespace detail

/// Advances the joint state by cfg.dt with standard-normal draw w.
/// Returns the homodyne current sample sqrt(kappa) <a e^{-i phi} + a^dag e^{i phi}> + w / sqrt(dt).
inline double step_sme(FockJointState& state, const OperatorSet& ops, const ReadoutConfig& cfg, double w,
                       StepScheme scheme = StepScheme::Kraus) {
  const cplx phase = std::polar(1.0, -cfg.phi_lo);
  const double signal = 2 * std::sqrt(cfg.kappa) * (phase * mean_annihilation(state)).real();
  const double dw = w * std::sqrt(cfg.dt);
  detail::sme_increment(state, ops, cfg, signal * cfg.dt + dw, dw, scheme);
  return signal + w / std::sqrt(cfg.dt);
}

/// Smallest eigenvalue the positivity check tolerates.
inline constexpr double kPositivityTolerance = 1e-6;

/// Throws NumericalError unless rho + tol * 1 admits a Cholesky factorization.
inline void check_positive(const FockJointState& s, std::int64_t step = -1, double tol = kPositivityTolerance) {
  const Eigen::Index n = s.rho.rows();
  Eigen::LLT<Eigen::MatrixXcd> llt(s.rho + tol * Eigen::MatrixXcd::Identity(n, n));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("joint state lost positivity beyond " + std::to_string(tol) + " (reduce dt)", step);
  }
}

struct FullSmeOptions {
  /// Starting state; defaults to `initial_qubit` (x) cavity vacuum.
  std::optional<FockJointState> initial;
  QubitState initial_qubit = QubitState::plus();
  StepScheme scheme = StepScheme::Kraus;
  std::uint64_t stream = 0;
  /// Shared noise: when set, its xi drives the run and fixes the number of steps and t0.
  const HomodyneRecord* noise = nullptr;
  double t0 = 0.0;
  /// Store the full joint state every `keep_stride` steps (0 keeps only the final state).
  int keep_stride = 0;
  /// Run the Cholesky positivity check every `positivity_stride` steps (0 disables it).
  int positivity_stride = 1;
  double top_occupancy_limit = 1e-6;
};

struct FullTrajectory {
  /// Reduced qubit state, <a> and Tr rho^2 at every grid time t0 + k dt, k = 0..n.
  std::vector<QubitState> qubit;
  std::vector<cplx> mean_a;
  std::vector<double> joint_purity;
  std::vector<std::int64_t> kept_steps;
  std::vector<FockJointState> kept;
  FockJointState final_state;
  HomodyneRecord record;
};

inline FullTrajectory run_trajectory_full(const ReadoutConfig& cfg, const FullSmeOptions& opt = {}) {
  cfg.validate();
  const OperatorSet ops(cfg);
  FockJointState state = opt.initial ? *opt.initial : FockJointState::product(opt.initial_qubit, fock_vacuum(cfg.n_max));
  if (state.n_max != cfg.n_max) throw ConfigError("initial joint state has a different Fock cutoff than n_max");
  if (std::abs(state.trace() - 1.0) > 1e-10) throw ConfigError("initial joint state must have unit trace");

  std::int64_t n = cfg.steps();
  double t0 = opt.t0;
  if (opt.noise != nullptr) {
    if (std::abs(opt.noise->dt - cfg.dt) > 1e-12 * cfg.dt) {
      throw ConfigError("record dt does not match the configuration");
    }
    if (std::abs(std::remainder(opt.noise->phi_lo - cfg.phi_lo, 2 * std::numbers::pi)) > 1e-12) {
      throw ConfigError("record local-oscillator phase does not match the configuration");
    }
    n = static_cast<std::int64_t>(opt.noise->size());
    t0 = opt.noise->t0;
  }

  FullTrajectory out;
  out.record.dt = cfg.dt;
  out.record.phi_lo = cfg.phi_lo;
  out.record.t0 = t0;
  out.qubit.reserve(static_cast<std::size_t>(n + 1));
  out.mean_a.reserve(static_cast<std::size_t>(n + 1));
  out.joint_purity.reserve(static_cast<std::size_t>(n + 1));
  auto observe = [&](std::int64_t k) {
    out.qubit.push_back(reduce_qubit(state));
    out.mean_a.push_back(mean_annihilation(state));
    out.joint_purity.push_back(state.purity());
    if (opt.keep_stride > 0 && k % opt.keep_stride == 0) {
      out.kept_steps.push_back(k);
      out.kept.push_back(state);
    }
  };

  NoiseStream noise(cfg.seed, opt.stream);
  const double sqrt_dt = std::sqrt(cfg.dt);
  observe(0);
  for (std::int64_t k = 0; k < n; ++k) {
    double w, xi;
    if (opt.noise != nullptr) {
      xi = opt.noise->xi[static_cast<std::size_t>(k)];
      w = xi * sqrt_dt;
    } else {
      w = noise();
      xi = w / sqrt_dt;
    }
    double current;
    try {
      current = step_sme(state, ops, cfg, w, opt.scheme);
    } catch (const NumericalError& e) {
      throw NumericalError(e.what(), k);
    }
    out.record.xi.push_back(xi);
    out.record.current.push_back(current);

    if (top_fock_occupancy(state) > opt.top_occupancy_limit) {
      throw NumericalError("highest Fock level is populated above " + std::to_string(opt.top_occupancy_limit) +
                               " (increase n_max)",
                           k);
    }
    if (opt.positivity_stride > 0 && (k + 1) % opt.positivity_stride == 0) check_positive(state, k);
    observe(k + 1);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace qread
