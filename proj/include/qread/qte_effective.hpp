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

// Qubit-only trajectory equation after the cavity has been eliminated:
//
//   d rho = [gamma1 D[s-] + (gamma2/2 + Gamma_d) D[sz]] rho dt
//           - 2 amp_ci M[sz] rho dW - i amp_ba [sz, rho] dW,
//   I dt  = -2 amp_ci <sz> dt + dW.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qread/cavity.hpp"
#include "qread/config.hpp"
#include "qread/qubit.hpp"
#include "qread/random.hpp"
#include "qread/record.hpp"

namespace qread {

/// Trajectory states beyond this distance from a density matrix abort the run.
inline constexpr double kQubitInvariantTolerance = 1e-6;

namespace detail {

// Clips roundoff-level excursions back onto the set of density matrices; anything larger is an error.
inline QubitState settle_qubit(QubitState s, std::int64_t step) {
  if (!std::isfinite(s.rho_ee) || !std::isfinite(s.rho_gg) || !std::isfinite(std::norm(s.rho_eg))) {
    throw NumericalError("effective trajectory produced a non-finite state", step);
  }
  const double tol = kQubitInvariantTolerance;
  if (s.rho_ee < -tol || s.rho_gg < -tol || coherence_excess(s) > tol) {
    throw NumericalError("effective trajectory left the physical qubit states (dt too large?)", step);
  }
  s.rho_ee = std::clamp(s.rho_ee, 0.0, 1.0);
  s.rho_gg = 1.0 - s.rho_ee;
  const double bound = s.rho_ee * s.rho_gg;
  const double c2 = std::norm(s.rho_eg);
  if (c2 > bound) s.rho_eg *= c2 > 0 ? std::sqrt(bound / c2) : 0.0;
  return s;
}

inline QubitState normalized(double ee, double gg, cplx eg, std::int64_t step) {
  const double tr = ee + gg;
  if (!(tr > 0)) throw NumericalError("effective trajectory lost its trace", step);
  return settle_qubit({ee / tr, gg / tr, eg / tr}, step);
}

// One step given both the Wiener increment dw and the record increment dy = I dt.
inline QubitState effective_increment(const QubitState& rho, const Rates& r, const ReadoutConfig& cfg, double dw,
                                      double dy, StepScheme scheme, std::int64_t step) {
  const double dt = cfg.dt;
  const double g1 = cfg.gamma1;
  const double g2 = cfg.gamma2;
  const double coherence_decay = 2 * r.gamma_d + g2 + g1 / 2;

  switch (scheme) {
    case StepScheme::Kraus: {
      const cplx z(r.amp_ci, r.amp_ba);
      const double monitored = std::norm(z);
      // Dephasing not accounted for by the record; negative in the dispersive eta > 1 transient.
      const double unmonitored = r.gamma_d - monitored + g2 / 2;
      const double base = r.gamma_d + g2 / 2;
      const cplx m_e = 1.0 - 0.5 * (base + g1) * dt - z * dy;
      const cplx m_g = 1.0 - 0.5 * base * dt + z * dy;
      const double ee = (std::norm(m_e) + unmonitored * dt) * rho.rho_ee;
      const double gg = (std::norm(m_g) + unmonitored * dt) * rho.rho_gg + g1 * dt * rho.rho_ee;
      const cplx eg = (m_e * std::conj(m_g) - unmonitored * dt) * rho.rho_eg;
      return normalized(ee, gg, eg, step);
    }
    case StepScheme::EulerMaruyama: {
      const double sz = rho.sigma_z();
      const double dee = -g1 * rho.rho_ee * dt - 4 * r.amp_ci * rho.rho_ee * rho.rho_gg * dw;
      const cplx deg = (-coherence_decay * dt + 2 * r.amp_ci * sz * dw - cplx(0, 2 * r.amp_ba * dw)) * rho.rho_eg;
      return normalized(rho.rho_ee + dee, rho.rho_gg - dee, rho.rho_eg + deg, step);
    }
    case StepScheme::Linear: {
      const double ee = rho.rho_ee * (1 - g1 * dt - 2 * r.amp_ci * dy);
      const double gg = rho.rho_gg * (1 + 2 * r.amp_ci * dy) + g1 * dt * rho.rho_ee;
      const cplx eg = rho.rho_eg * (1 - coherence_decay * dt - cplx(0, 2 * r.amp_ba * dy));
      return normalized(ee, gg, eg, step);
    }
  }
  return rho;
}

}  // namespace detail

/// Output current -2 amp_ci <sz> + w / sqrt(dt) for one sample.
inline double effective_current(const QubitState& rho, const Rates& rates, double w, double dt) {
  return -2 * rates.amp_ci * rho.sigma_z() + w / std::sqrt(dt);
}

/// Advances the qubit state by cfg.dt given a standard-normal draw w (Wiener increment w sqrt(dt)).
inline QubitState step_effective(const QubitState& rho, const Rates& rates, const ReadoutConfig& cfg, double w,
                                 StepScheme scheme = StepScheme::Kraus, std::int64_t step = -1) {
  const double dw = w * std::sqrt(cfg.dt);
  const double dy = -2 * rates.amp_ci * rho.sigma_z() * cfg.dt + dw;
  return detail::effective_increment(rho, rates, cfg, dw, dy, scheme, step);
}

/// Advances the qubit state by cfg.dt from a measured current sample (filtering an external record).
inline QubitState filter_step(const QubitState& rho, const Rates& rates, const ReadoutConfig& cfg, double current,
                              StepScheme scheme = StepScheme::Kraus, std::int64_t step = -1) {
  const double dy = current * cfg.dt;
  const double dw = dy + 2 * rates.amp_ci * rho.sigma_z() * cfg.dt;
  return detail::effective_increment(rho, rates, cfg, dw, dy, scheme, step);
}

struct EffectiveOptions {
  QubitState initial = QubitState::plus();
  StepScheme scheme = StepScheme::Kraus;
  /// Trajectory index; the noise stream is stream_seed(cfg.seed, stream).
  std::uint64_t stream = 0;
  /// Shared noise: when set, its xi drives the run and its dt / phi_lo / t0 must match.
  const HomodyneRecord* noise = nullptr;
  /// Cavity clock at the first step when no noise record is given.
  double t0 = 0.0;
  /// Use steady-state rates at every step (bad-cavity limit).
  bool steady_rates = false;
  /// Precomputed rates at t0 + k dt (shared across an ensemble); must cover every step.
  const std::vector<Rates>* rate_table = nullptr;
  /// Diagnostic: drive the equation with w = 0 instead of noise.
  bool zero_noise = false;
};

namespace detail {

inline void check_record_matches(const HomodyneRecord& rec, const ReadoutConfig& cfg) {
  if (std::abs(rec.dt - cfg.dt) > 1e-12 * cfg.dt) throw ConfigError("record dt does not match the configuration");
  if (std::abs(std::remainder(rec.phi_lo - cfg.phi_lo, 2 * std::numbers::pi)) > 1e-12) {
    throw ConfigError("record local-oscillator phase does not match the configuration");
  }
  if (rec.xi.size() != rec.current.size()) throw ConfigError("record xi and current lengths differ");
}

}  // namespace detail

/// Rates at the cell centres t0 + (k + 1/2) dt for k = 0..n-1.
inline std::vector<Rates> rate_table(const ReadoutConfig& cfg, std::int64_t n, double t0 = 0.0) {
  std::vector<Rates> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  for (std::int64_t k = 0; k < n; ++k) out.push_back(rates_at(t0 + cfg.dt * (static_cast<double>(k) + 0.5), cfg));
  return out;
}

/// Runs one effective trajectory, calling obs(k, state_before_step, current_k, xi_k) for every step.
/// Returns the final state.
template <class Observer>
QubitState simulate_effective(const ReadoutConfig& cfg, const EffectiveOptions& opt, Observer&& obs) {
  cfg.validate();
  validate(opt.initial, 1e-10);
  std::int64_t n = cfg.steps();
  double t0 = opt.t0;
  if (opt.noise != nullptr) {
    detail::check_record_matches(*opt.noise, cfg);
    n = static_cast<std::int64_t>(opt.noise->size());
    t0 = opt.noise->t0;
  }
  NoiseStream noise(cfg.seed, opt.stream);
  const double sqrt_dt = std::sqrt(cfg.dt);
  const Rates steady = opt.steady_rates ? steady_rates(cfg) : Rates{};
  if (opt.rate_table != nullptr && opt.rate_table->size() < static_cast<std::size_t>(n)) {
    throw ConfigError("rate table is shorter than the trajectory");
  }

  QubitState rho = opt.initial;
  for (std::int64_t k = 0; k < n; ++k) {
    const Rates r = opt.steady_rates           ? steady
                    : opt.rate_table != nullptr ? (*opt.rate_table)[static_cast<std::size_t>(k)]
                                                : rates_at(t0 + cfg.dt * (static_cast<double>(k) + 0.5), cfg);
    double xi, w;
    if (opt.noise != nullptr) {
      xi = opt.noise->xi[static_cast<std::size_t>(k)];
      w = xi * sqrt_dt;
    } else {
      w = opt.zero_noise ? 0.0 : noise();
      xi = w / sqrt_dt;
    }
    const double current = -2 * r.amp_ci * rho.sigma_z() + xi;
    obs(k, rho, current, xi);
    rho = step_effective(rho, r, cfg, w, opt.scheme, k);
  }
  return rho;
}

struct EffectiveTrajectory {
  /// States at t0 + k dt, k = 0..n.
  std::vector<QubitState> states;
  HomodyneRecord record;
};

inline EffectiveTrajectory run_effective_trajectory(const ReadoutConfig& cfg, const EffectiveOptions& opt = {}) {
  EffectiveTrajectory out;
  out.record.dt = cfg.dt;
  out.record.phi_lo = cfg.phi_lo;
  out.record.t0 = opt.noise != nullptr ? opt.noise->t0 : opt.t0;
  const std::size_t n = opt.noise != nullptr ? opt.noise->size() : static_cast<std::size_t>(cfg.steps());
  out.states.reserve(n + 1);
  out.record.xi.reserve(n);
  out.record.current.reserve(n);
  const QubitState last = simulate_effective(cfg, opt, [&](std::int64_t, const QubitState& rho, double i, double xi) {
    out.states.push_back(rho);
    out.record.current.push_back(i);
    out.record.xi.push_back(xi);
  });
  out.states.push_back(last);
  return out;
}

/// Integrates the trajectory equation driven by the measured currents of `record`
/// (the filter a experimenter would run). Returns size + 1 states.
inline std::vector<QubitState> filter_effective(const QubitState& rho0, const HomodyneRecord& record,
                                                const ReadoutConfig& cfg, StepScheme scheme = StepScheme::Kraus) {
  cfg.validate();
  detail::check_record_matches(record, cfg);
  std::vector<QubitState> out;
  out.reserve(record.size() + 1);
  QubitState rho = rho0;
  out.push_back(rho);
  for (std::size_t k = 0; k < record.size(); ++k) {
    rho = filter_step(rho, rates_at(record.midpoint(k), cfg), cfg, record.current[k], scheme,
                      static_cast<std::int64_t>(k));
    out.push_back(rho);
  }
  return out;
}

/// Ensemble-averaged (unconditional) evolution
///   d rho / dt = gamma1 D[s-] rho + (gamma2/2 + Gamma_d(t)) D[sz] rho,
/// integrated with RK4 on the cfg.dt grid starting at cavity clock t0. Returns round(t_final/dt) + 1 states.
inline std::vector<QubitState> unconditional_evolve(const QubitState& rho0, const ReadoutConfig& cfg, double t_final,
                                                    double t0 = 0.0) {
  cfg.validate();
  detail::require_time(t_final);
  const auto n = static_cast<std::int64_t>(std::llround(t_final / cfg.dt));
  const double h = cfg.dt;
  // rho_ee decouples from rho_eg; both are linear.
  auto coherence_rate = [&](double t) { return cfg.gamma1 / 2 + cfg.gamma2 + 2 * rates_at(t, cfg).gamma_d; };

  std::vector<QubitState> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  QubitState rho = rho0;
  out.push_back(rho);
  for (std::int64_t k = 0; k < n; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    const double ra = coherence_rate(t);
    const double rb = coherence_rate(t + h / 2);
    const double rc = coherence_rate(t + h);

    const double g = cfg.gamma1;
    const double e = rho.rho_ee;
    const double e1 = -g * e;
    const double e2 = -g * (e + h / 2 * e1);
    const double e3 = -g * (e + h / 2 * e2);
    const double e4 = -g * (e + h * e3);
    const double ee = e + h / 6 * (e1 + 2 * e2 + 2 * e3 + e4);

    const cplx c = rho.rho_eg;
    const cplx c1 = -ra * c;
    const cplx c2 = -rb * (c + h / 2 * c1);
    const cplx c3 = -rb * (c + h / 2 * c2);
    const cplx c4 = -rc * (c + h * c3);
    const cplx eg = c + h / 6 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);

    rho = {ee, 1.0 - ee, eg};
    out.push_back(rho);
  }
  return out;
}

}  // namespace qread
