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

// Coarse-grained Bayesian update of the qubit state from an accumulated homodyne record.

#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <vector>

#include "qread/cavity.hpp"
#include "qread/config.hpp"
#include "qread/qubit.hpp"
#include "qread/record.hpp"

namespace qread {

enum class Branch { Excited, Ground };

struct BayesOptions {
  /// Use steady-state rates and mean currents instead of the transient ones (bad-cavity limit).
  bool steady_state_rates = false;
};

/// Factors of one update. `p_e` and `p_g` share a common scale that cancels against `norm`;
/// the unscaled likelihoods are exp(log_p_e) and exp(log_p_g).
struct BayesUpdate {
  double p_e = 1.0;
  double p_g = 1.0;
  double d_factor = 1.0;
  double phi_random = 0.0;
  double norm = 1.0;
  double log_p_e = 0.0;
  double log_p_g = 0.0;
};

namespace detail {

inline Rates record_rates(const HomodyneRecord& rec, std::size_t k, const ReadoutConfig& cfg, const BayesOptions& o) {
  return o.steady_state_rates ? steady_rates(cfg) : rates_at(rec.midpoint(k), cfg);
}

inline void require_record(const HomodyneRecord& rec, const ReadoutConfig& cfg) {
  if (rec.empty()) throw ConfigError("empty homodyne record");
  if (std::abs(rec.dt - cfg.dt) > 1e-12 * cfg.dt) throw ConfigError("record dt does not match the configuration");
  if (std::abs(std::remainder(rec.phi_lo - cfg.phi_lo, 2 * std::numbers::pi)) > 1e-12) {
    throw ConfigError("record local-oscillator phase does not match the configuration");
  }
}

}  // namespace detail

/// Mean current of branch i, Ibar_{e(g)} = -+ 2 amp_ci.
inline double mean_current(const Rates& r, Branch which) {
  return which == Branch::Excited ? -2 * r.amp_ci : 2 * r.amp_ci;
}

/// log P_i = -(1/2) sum_k (I_k - Ibar_i)^2 dt over the record cells, rates taken at each cell centre.
inline double log_gaussian_functional(const HomodyneRecord& rec, Branch which, const ReadoutConfig& cfg,
                                      const BayesOptions& opt = {}) {
  detail::require_record(rec, cfg);
  double acc = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double r = rec.current[k] - mean_current(detail::record_rates(rec, k, cfg, opt), which);
    acc += r * r;
  }
  return -0.5 * acc * rec.dt;
}

/// exp(log_gaussian_functional). Underflows to 0 for long records; use bayes_factors for updates.
inline double gaussian_functional(const HomodyneRecord& rec, Branch which, const ReadoutConfig& cfg,
                                  const BayesOptions& opt = {}) {
  return std::exp(log_gaussian_functional(rec, which, cfg, opt));
}

/// Phi = 2 sum_k amp_ba I_k dt, amp_ba at each cell centre.
inline double random_phase(const HomodyneRecord& rec, const ReadoutConfig& cfg, const BayesOptions& opt = {}) {
  if (rec.empty()) return 0.0;
  detail::require_record(rec, cfg);
  double acc = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) acc += detail::record_rates(rec, k, cfg, opt).amp_ba * rec.current[k];
  return 2 * acc * rec.dt;
}

/// D = exp(-2 int_{t0}^{t0+tau} (Gamma_d - Gamma_m) dt) by adaptive Gauss-Kronrod quadrature.
inline double purity_factor(const ReadoutConfig& cfg, double tau, double t0 = 0.0, const BayesOptions& opt = {}) {
  detail::require_time(tau);
  detail::require_time(t0);
  if (tau == 0) return 1.0;
  if (opt.steady_state_rates) {
    const Rates r = steady_rates(cfg);
    return std::exp(-2 * (r.gamma_d - r.gamma_m) * tau);
  }
  auto f = [&](double t) {
    const Rates r = rates_at(t, cfg);
    return r.gamma_d - r.gamma_m;
  };
  // The rates vary on the scale 1/kappa (and 1/chi); split long intervals so each panel stays smooth.
  const double fastest = cfg.scheme == Scheme::Dispersive ? std::max(cfg.kappa, std::abs(cfg.chi)) : cfg.kappa;
  const double panel = 1.0 / fastest;
  const auto panels = static_cast<int>(std::ceil(tau / panel));
  double integral = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double a = t0 + tau * i / panels;
    const double b = t0 + tau * (i + 1) / panels;
    integral += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-11);
  }
  return std::exp(-2 * integral);
}

/// Overlap form |<alpha_g|alpha_e>|(t0 + tau) / |<alpha_g|alpha_e>|(t0) = exp(-(|beta_1|^2 - |beta_0|^2)/2).
/// Equal to purity_factor for both schemes because d(|beta|^2/2)/dt = 2 (Gamma_d - Gamma_m).
inline double purity_factor_overlap(const ReadoutConfig& cfg, double tau, double t0 = 0.0) {
  detail::require_time(tau);
  const double b1 = cavity_pair(t0 + tau, cfg).beta_mag;
  const double b0 = cavity_pair(t0, cfg).beta_mag;
  return std::exp(-0.5 * (b1 * b1 - b0 * b0));
}

/// All factors of the update of prior `rho0` on `rec`.
inline BayesUpdate bayes_factors(const QubitState& rho0, const HomodyneRecord& rec, const ReadoutConfig& cfg,
                                 const BayesOptions& opt = {}) {
  BayesUpdate u;
  if (rec.empty()) return u;
  u.log_p_e = log_gaussian_functional(rec, Branch::Excited, cfg, opt);
  u.log_p_g = log_gaussian_functional(rec, Branch::Ground, cfg, opt);
  const double common = std::max(u.log_p_e, u.log_p_g);
  u.p_e = std::exp(u.log_p_e - common);
  u.p_g = std::exp(u.log_p_g - common);
  u.norm = rho0.rho_ee * u.p_e + rho0.rho_gg * u.p_g;
  u.d_factor = purity_factor(cfg, rec.duration(), rec.t0, opt);
  u.phi_random = random_phase(rec, cfg, opt);
  return u;
}

/// rho_ii = rho_ii(0) P_i / N,  rho_eg = rho_eg(0) sqrt(P_e P_g) / N D exp(-i Phi).
inline QubitState bayes_update(const QubitState& rho0, const HomodyneRecord& rec, const ReadoutConfig& cfg,
                               const BayesOptions& opt = {}) {
  if (cfg.gamma1 != 0 || cfg.gamma2 != 0) {
    throw ConfigError("the Bayesian update is defined only for gamma1 = gamma2 = 0");
  }
  validate(rho0, 1e-10);
  if (rec.empty()) return rho0;
  const BayesUpdate u = bayes_factors(rho0, rec, cfg, opt);
  if (!(u.norm > 0)) throw NumericalError("Bayesian normalization vanished");
  QubitState out;
  out.rho_ee = rho0.rho_ee * u.p_e / u.norm;
  out.rho_gg = rho0.rho_gg * u.p_g / u.norm;
  out.rho_eg = rho0.rho_eg * (std::sqrt(u.p_e * u.p_g) / u.norm * u.d_factor) * std::polar(1.0, -u.phi_random);
  return out;
}

}  // namespace qread
