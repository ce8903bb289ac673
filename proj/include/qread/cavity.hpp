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

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "qread/config.hpp"

namespace qread {

/// Qubit-conditioned coherent amplitudes of the cavity field and their difference.
struct CavityPair {
  cplx alpha_e{};
  cplx alpha_g{};
  cplx beta{};
  double beta_mag = 0.0;
  /// arg(beta), defined as 0 when beta vanishes.
  double theta_beta = 0.0;

  static CavityPair from_amplitudes(cplx alpha_e, cplx alpha_g) {
    CavityPair p;
    p.alpha_e = alpha_e;
    p.alpha_g = alpha_g;
    p.beta = alpha_e - alpha_g;
    p.beta_mag = std::abs(p.beta);
    p.theta_beta = p.beta_mag > 0 ? std::arg(p.beta) : 0.0;
    return p;
  }
};

/// Time-dependent rates of the qubit-only trajectory equation.
///
/// `amp_ci` and `amp_ba` are the signed square roots that multiply the noise:
/// amp_ci = -(sqrt(kappa)/2)|beta| cos(theta_beta - phi), amp_ba = -(sqrt(kappa)/2)|beta| sin(theta_beta - phi).
/// They coincide with +sqrt(gamma_ci), +sqrt(gamma_ba) for the optimal local-oscillator phases.
struct Rates {
  double gamma_d = 0.0;
  double gamma_ci = 0.0;
  double gamma_ba = 0.0;
  double gamma_m = 0.0;
  double amp_ci = 0.0;
  double amp_ba = 0.0;
  /// Set when a roundoff-level negative dispersive gamma_d was clamped to zero.
  bool gamma_d_clamped = false;

  /// Rates given directly by value, with non-negative noise amplitudes.
  static Rates from_values(double gamma_d, double gamma_ci, double gamma_ba) {
    Rates r;
    r.gamma_d = gamma_d;
    r.gamma_ci = gamma_ci;
    r.gamma_ba = gamma_ba;
    r.gamma_m = gamma_ci + gamma_ba;
    r.amp_ci = std::sqrt(gamma_ci);
    r.amp_ba = std::sqrt(gamma_ba);
    return r;
  }
};

namespace detail {

inline void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("time must be finite and >= 0");
}

// Steady-state dispersive amplitudes -i eps / (+-i chi + kappa/2).
inline cplx dispersive_steady(const ReadoutConfig& cfg, double sign) {
  return cplx(0, -cfg.drive) / cplx(cfg.kappa / 2, sign * cfg.chi);
}

}  // namespace detail

/// alpha_{e,g}(t) = -+ i (g_z / kappa)(1 - exp(-kappa t / 2)), driven from vacuum at t = 0.
inline CavityPair alpha_longitudinal(double t, const ReadoutConfig& cfg) {
  if (cfg.scheme != Scheme::Longitudinal) throw ConfigError("alpha_longitudinal requires the longitudinal scheme");
  detail::require_time(t);
  const double mag = cfg.drive / cfg.kappa * -std::expm1(-cfg.kappa * t / 2);
  return CavityPair::from_amplitudes(cplx(0, -mag), cplx(0, mag));
}

/// alpha_{e(g)}(t) = abar_{e(g)} (1 - exp(-+ i chi t - kappa t / 2)).
inline CavityPair alpha_dispersive(double t, const ReadoutConfig& cfg) {
  if (cfg.scheme != Scheme::Dispersive) throw ConfigError("alpha_dispersive requires the dispersive scheme");
  detail::require_time(t);
  const cplx ae_bar = detail::dispersive_steady(cfg, +1);
  const cplx ag_bar = detail::dispersive_steady(cfg, -1);
  const cplx ae = ae_bar * (1.0 - std::exp(cplx(-cfg.kappa * t / 2, -cfg.chi * t)));
  const cplx ag = ag_bar * (1.0 - std::exp(cplx(-cfg.kappa * t / 2, cfg.chi * t)));
  return CavityPair::from_amplitudes(ae, ag);
}

inline CavityPair cavity_pair(double t, const ReadoutConfig& cfg) {
  return cfg.scheme == Scheme::Longitudinal ? alpha_longitudinal(t, cfg) : alpha_dispersive(t, cfg);
}

/// Cavity amplitudes once the drive has run forever.
inline CavityPair steady_cavity_pair(const ReadoutConfig& cfg) {
  if (cfg.scheme == Scheme::Longitudinal) {
    const double mag = cfg.drive / cfg.kappa;
    return CavityPair::from_amplitudes(cplx(0, -mag), cplx(0, mag));
  }
  return CavityPair::from_amplitudes(detail::dispersive_steady(cfg, +1), detail::dispersive_steady(cfg, -1));
}

/// Rates for a given pair of cavity amplitudes.
inline Rates rates_from_pair(const CavityPair& p, const ReadoutConfig& cfg) {
  Rates r;
  const double b2 = p.beta_mag * p.beta_mag;
  const double angle = p.theta_beta - cfg.phi_lo;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  r.gamma_ci = cfg.kappa / 4 * b2 * c * c;
  r.gamma_ba = cfg.kappa / 4 * b2 * s * s;
  r.gamma_m = r.gamma_ci + r.gamma_ba;
  r.amp_ci = -std::sqrt(cfg.kappa) / 2 * p.beta_mag * c;
  r.amp_ba = -std::sqrt(cfg.kappa) / 2 * p.beta_mag * s;
  if (cfg.scheme == Scheme::Longitudinal) {
    r.gamma_d = cfg.drive / 2 * p.beta_mag;
  } else {
    double gd = cfg.chi * std::imag(p.alpha_g * std::conj(p.alpha_e));
    if (gd < 0) {
      if (gd < -1e-12 * cfg.kappa) {
        throw NumericalError("dispersive gamma_d is negative beyond roundoff: " + std::to_string(gd));
      }
      gd = 0.0;
      r.gamma_d_clamped = true;
    }
    r.gamma_d = gd;
  }
  return r;
}

/// Measurement rates at time t after the drive was switched on from vacuum. rates_at(0) is all-zero.
inline Rates rates_at(double t, const ReadoutConfig& cfg) {
  detail::require_time(t);
  return rates_from_pair(cavity_pair(t, cfg), cfg);
}

/// Steady-state rates (bad-cavity shortcut).
inline Rates steady_rates(const ReadoutConfig& cfg) { return rates_from_pair(steady_cavity_pair(cfg), cfg); }

/// Integrates the cavity equations of motion with classic RK4 on the cfg.dt grid, from an arbitrary
/// initial pair (e.g. a state left over after a reset). Returns round(t_final / dt) + 1 samples.
inline std::vector<CavityPair> integrate_alpha_ode(cplx alpha_e0, cplx alpha_g0, const ReadoutConfig& cfg,
                                                  double t_final) {
  cfg.validate();
  detail::require_time(t_final);
  if (cfg.dt * cfg.kappa > 0.1) throw ConfigError("integrate_alpha_ode: dt * kappa must be <= 0.1");

  // d alpha / dt = drive_term - rate * alpha, per branch.
  cplx drive_e, drive_g, rate_e, rate_g;
  if (cfg.scheme == Scheme::Longitudinal) {
    drive_e = cplx(0, -cfg.drive / 2);
    drive_g = cplx(0, cfg.drive / 2);
    rate_e = rate_g = cplx(cfg.kappa / 2, 0);
  } else {
    drive_e = drive_g = cplx(0, -cfg.drive);
    rate_e = cplx(cfg.kappa / 2, cfg.chi);
    rate_g = cplx(cfg.kappa / 2, -cfg.chi);
  }
  auto rk4 = [h = cfg.dt](cplx a, cplx drive, cplx rate) {
    auto f = [&](cplx x) { return drive - rate * x; };
    const cplx k1 = f(a);
    const cplx k2 = f(a + h / 2 * k1);
    const cplx k3 = f(a + h / 2 * k2);
    const cplx k4 = f(a + h * k3);
    return a + h / 6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };

  const auto n = static_cast<std::int64_t>(std::llround(t_final / cfg.dt));
  std::vector<CavityPair> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  cplx ae = alpha_e0, ag = alpha_g0;
  out.push_back(CavityPair::from_amplitudes(ae, ag));
  for (std::int64_t k = 0; k < n; ++k) {
    ae = rk4(ae, drive_e, rate_e);
    ag = rk4(ag, drive_g, rate_g);
    out.push_back(CavityPair::from_amplitudes(ae, ag));
  }
  return out;
}

/// Largest |alpha| reached by either branch when driving from vacuum (includes the dispersive overshoot).
inline double max_alpha_magnitude(const ReadoutConfig& cfg) {
  if (cfg.scheme == Scheme::Longitudinal) return cfg.drive / cfg.kappa;
  double best = 0.0;
  const double horizon = 40.0 / cfg.kappa;
  const int samples = 4000;
  for (int i = 0; i <= samples; ++i) {
    const CavityPair p = alpha_dispersive(horizon * i / samples, cfg);
    best = std::max({best, std::abs(p.alpha_e), std::abs(p.alpha_g)});
  }
  return best;
}

/// Fock cutoff ceil(|alpha_max|^2 + 6 |alpha_max| + 10), enough to keep the top level of a coherent state
/// below 1e-6.
inline int recommended_n_max(const ReadoutConfig& cfg) {
  const double a = max_alpha_magnitude(cfg);
  return static_cast<int>(std::ceil(a * a + 6 * a + 10));
}

}  // namespace qread
