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

// Figures of merit: signal-to-noise ratio, quantum efficiency, purity factor and ensemble statistics.

#pragma once

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "qread/bayes.hpp"
#include "qread/cavity.hpp"
#include "qread/config.hpp"
#include "qread/parallel.hpp"
#include "qread/qte_effective.hpp"
#include "qread/qubit.hpp"

namespace qread {

namespace detail {

inline void require_positive_tau(double tau) {
  if (!(tau > 0) || !std::isfinite(tau)) throw ConfigError("tau must be finite and > 0");
}

// 1 - (2 / x) (1 - c e^{-x/2}).
inline double snr_bracket(double x, double c) { return 1.0 - 2.0 / x * (1.0 - c * std::exp(-x / 2)); }

}  // namespace detail

/// g_z sqrt(8 tau / kappa) [1 - (2 / kappa tau)(1 - exp(-kappa tau / 2))].
inline double snr_longitudinal_analytic(const ReadoutConfig& cfg, double tau) {
  detail::require_positive_tau(tau);
  const double x = cfg.kappa * tau;
  // Series 1 - (2/x)(1 - e^{-x/2}) = x/4 - x^2/24 + ... avoids cancellation for small x.
  const double bracket = x < 1e-4 ? x / 4 - x * x / 24 : 1.0 + 2.0 / x * std::expm1(-x / 2);
  return cfg.drive * std::sqrt(8 * tau / cfg.kappa) * bracket;
}

/// eps_m sqrt(8 tau / kappa) [1 - (2 / kappa tau)(1 - cos(kappa tau / 2) exp(-kappa tau / 2))], valid for chi = kappa/2.
inline double snr_dispersive_analytic(const ReadoutConfig& cfg, double tau) {
  detail::require_positive_tau(tau);
  if (std::abs(cfg.chi - cfg.kappa / 2) > 1e-12 * cfg.kappa) {
    throw ConfigError("the closed-form dispersive SNR requires chi = kappa / 2");
  }
  const double x = cfg.kappa * tau;
  // The closed form cancels like eps / x^2; below 0.1 the series is exact to roundoff.
  const double x2 = x * x;
  const double bracket = x < 0.1 ? x2 * (1.0 / 12 - x / 48 + x2 / 480 - x2 * x2 / 40320 + x2 * x2 * x / 322560)
                                 : detail::snr_bracket(x, std::cos(x / 2));
  return cfg.drive * std::sqrt(8 * tau / cfg.kappa) * bracket;
}

/// 4 |int_0^tau amp_ci dt| / sqrt(2 tau) by quadrature of the transient rates; any scheme, any chi.
/// Coincides with the closed forms above where they apply.
inline double snr_from_rates(const ReadoutConfig& cfg, double tau) {
  detail::require_positive_tau(tau);
  auto f = [&](double t) { return rates_at(t, cfg).amp_ci; };
  const double fastest = cfg.scheme == Scheme::Dispersive ? std::max(cfg.kappa, std::abs(cfg.chi)) : cfg.kappa;
  const auto panels = static_cast<int>(std::ceil(tau * fastest));
  double integral = 0.0;
  for (int i = 0; i < panels; ++i) {
    integral += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, tau * i / panels,
                                                                               tau * (i + 1) / panels, 8, 1e-11);
  }
  return 4 * std::abs(integral) / std::sqrt(2 * tau);
}

/// Monte-Carlo SNR from accumulated currents Q = int_0^tau I dt of eigenstate trajectories.
struct SnrEstimate {
  double tau = 0.0;
  int n_traj = 0;
  double mean_e = 0.0;
  double mean_g = 0.0;
  double std_e = 0.0;
  double std_g = 0.0;
  /// |mean_e - mean_g| / sqrt(std_e^2 + std_g^2): the normalization under which the closed forms hold.
  double snr = 0.0;
  /// |mean_e - mean_g| / (std_e + std_g): the half-width definition, smaller by sqrt(2) for equal widths.
  double snr_halfwidth = 0.0;
};

struct AccumulatedCurrents {
  std::vector<double> taus;
  /// q_e[j][i]: trajectory i started in |e>, integrated to taus[j].
  std::vector<std::vector<double>> q_e;
  std::vector<std::vector<double>> q_g;
};

/// Runs n_traj effective trajectories from |e> and from |g> up to max(taus) and records Q at each tau.
/// Trajectory i of branch e uses stream 2i, of branch g stream 2i + 1.
inline AccumulatedCurrents accumulated_currents(const ReadoutConfig& cfg, int n_traj, const std::vector<double>& taus,
                                                unsigned threads = 0, StepScheme scheme = StepScheme::Kraus) {
  cfg.validate();
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (taus.empty()) throw ConfigError("at least one integration time is required");
  std::vector<std::int64_t> marks;
  for (double tau : taus) {
    detail::require_positive_tau(tau);
    marks.push_back(static_cast<std::int64_t>(std::llround(tau / cfg.dt)));
  }
  const std::int64_t n = *std::max_element(marks.begin(), marks.end());
  ReadoutConfig run = cfg;
  run.t_final = static_cast<double>(n) * cfg.dt;
  const std::vector<Rates> table = rate_table(cfg, n);

  AccumulatedCurrents out;
  out.taus = taus;
  out.q_e.assign(taus.size(), std::vector<double>(static_cast<std::size_t>(n_traj)));
  out.q_g = out.q_e;
  parallel_for(2 * static_cast<std::size_t>(n_traj), threads, [&](std::size_t job) {
    const bool excited = job % 2 == 0;
    const std::size_t i = job / 2;
    EffectiveOptions opt;
    opt.initial = excited ? QubitState::excited() : QubitState::ground();
    opt.scheme = scheme;
    opt.stream = job;
    opt.rate_table = &table;
    double q = 0.0;
    std::vector<double> at(marks.size());
    simulate_effective(run, opt, [&](std::int64_t k, const QubitState&, double current, double) {
      q += current * cfg.dt;
      for (std::size_t j = 0; j < marks.size(); ++j)
        if (k + 1 == marks[j]) at[j] = q;
    });
    auto& dst = excited ? out.q_e : out.q_g;
    for (std::size_t j = 0; j < marks.size(); ++j) dst[j][i] = at[j];
  });
  return out;
}

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double var = v.size() > 1 ? ss / static_cast<double>(v.size() - 1) : 0.0;
  return {mean, std::sqrt(var)};
}

}  // namespace detail

inline SnrEstimate snr_from_samples(double tau, const std::vector<double>& q_e, const std::vector<double>& q_g) {
  SnrEstimate s;
  s.tau = tau;
  s.n_traj = static_cast<int>(q_e.size());
  std::tie(s.mean_e, s.std_e) = detail::mean_std(q_e);
  std::tie(s.mean_g, s.std_g) = detail::mean_std(q_g);
  const double gap = std::abs(s.mean_e - s.mean_g);
  const double rss = std::hypot(s.std_e, s.std_g);
  s.snr = rss > 0 ? gap / rss : 0.0;
  s.snr_halfwidth = s.std_e + s.std_g > 0 ? gap / (s.std_e + s.std_g) : 0.0;
  return s;
}

inline std::vector<SnrEstimate> snr_empirical(const ReadoutConfig& cfg, int n_traj, const std::vector<double>& taus,
                                              unsigned threads = 0) {
  if (n_traj < 100) throw ConfigError("snr_empirical needs n_traj >= 100");
  const AccumulatedCurrents q = accumulated_currents(cfg, n_traj, taus, threads);
  std::vector<SnrEstimate> out;
  for (std::size_t j = 0; j < taus.size(); ++j) out.push_back(snr_from_samples(taus[j], q.q_e[j], q.q_g[j]));
  return out;
}

inline SnrEstimate snr_empirical(const ReadoutConfig& cfg, int n_traj, double tau, unsigned threads = 0) {
  return snr_empirical(cfg, n_traj, std::vector<double>{tau}, threads).front();
}

/// eta(t) = Gamma_m / Gamma_d; empty where Gamma_d = 0.
inline std::vector<std::optional<double>> efficiency_curve(const ReadoutConfig& cfg, const std::vector<double>& t_grid) {
  std::vector<std::optional<double>> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    if (!(t > 0)) throw ConfigError("efficiency_curve needs t > 0");
    const Rates r = rates_at(t, cfg);
    out.push_back(r.gamma_d > 0 ? std::optional<double>(r.gamma_m / r.gamma_d) : std::nullopt);
  }
  return out;
}

/// D(t) in overlap form, checked against the integral form to `tol`.
inline std::vector<double> purity_curve(const ReadoutConfig& cfg, const std::vector<double>& t_grid,
                                        double tol = 1e-8) {
  std::vector<double> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const double overlap = purity_factor_overlap(cfg, t);
    const double integral = purity_factor(cfg, t);
    if (std::abs(overlap - integral) > tol) {
      throw NumericalError("purity factor: integral and overlap forms disagree at t = " + std::to_string(t));
    }
    out.push_back(overlap);
  }
  return out;
}

/// n uniformly spaced points on (0, t_max].
inline std::vector<double> uniform_grid(double t_max, int n) {
  if (n < 1 || !(t_max > 0)) throw ConfigError("uniform_grid needs n >= 1 and t_max > 0");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = t_max * (i + 1) / n;
  return g;
}

struct EnsembleOptions {
  unsigned threads = 0;
  /// Compare every `report_stride` steps (plus the final step).
  int report_stride = 250;
  bool zero_noise = false;
  QubitState initial = QubitState::plus();
  StepScheme scheme = StepScheme::Kraus;
};

/// Ensemble mean of effective trajectories against unconditional_evolve on the report grid.
struct EnsembleComparison {
  int n_traj = 0;
  bool skipped = false;
  std::vector<double> t_grid;
  std::vector<QubitState> mean;
  std::vector<QubitState> reference;
  /// Standard errors of rho_ee, Re rho_eg, Im rho_eg at each report point.
  std::vector<std::array<double, 3>> standard_error;
  double max_deviation = 0.0;
  /// Largest deviation measured in standard errors (components with zero spread and zero deviation skipped).
  double max_z = 0.0;
  bool within_band = true;
};

namespace detail {

inline EnsembleComparison ensemble_statistics(const ReadoutConfig& cfg, int n_traj, const EnsembleOptions& opt) {
  cfg.validate();
  if (n_traj < 2) throw ConfigError("ensemble statistics need n_traj >= 2");
  EnsembleComparison res;
  res.n_traj = n_traj;
  if (opt.report_stride < 1) throw ConfigError("report_stride must be >= 1");
  const std::int64_t n = cfg.steps();
  std::vector<std::int64_t> marks;
  for (std::int64_t k = 0; k <= n; k += opt.report_stride) marks.push_back(k);
  if (marks.back() != n) marks.push_back(n);
  const std::size_t m = marks.size();

  const std::vector<Rates> table = rate_table(cfg, n);
  // samples[i][j] = trajectory i's state at mark j.
  std::vector<std::vector<QubitState>> samples(static_cast<std::size_t>(n_traj), std::vector<QubitState>(m));
  parallel_for(static_cast<std::size_t>(n_traj), opt.threads, [&](std::size_t i) {
    EffectiveOptions eo;
    eo.initial = opt.initial;
    eo.scheme = opt.scheme;
    eo.stream = i;
    eo.rate_table = &table;
    eo.zero_noise = opt.zero_noise;
    std::size_t j = 0;
    auto& dst = samples[i];
    const QubitState last = simulate_effective(cfg, eo, [&](std::int64_t k, const QubitState& rho, double, double) {
      if (j < m && marks[j] == k) dst[j++] = rho;
    });
    if (j < m) dst[j] = last;
  });

  const std::vector<QubitState> reference = unconditional_evolve(opt.initial, cfg, cfg.t_final);
  const double count = n_traj;
  for (std::size_t j = 0; j < m; ++j) {
    std::array<double, 3> sum{}, sq{};
    for (const auto& traj : samples) {
      const std::array<double, 3> v{traj[j].rho_ee, traj[j].rho_eg.real(), traj[j].rho_eg.imag()};
      for (int c = 0; c < 3; ++c) sum[c] += v[c];
    }
    std::array<double, 3> mean{};
    for (int c = 0; c < 3; ++c) mean[c] = sum[c] / count;
    for (const auto& traj : samples) {
      const std::array<double, 3> v{traj[j].rho_ee, traj[j].rho_eg.real(), traj[j].rho_eg.imag()};
      for (int c = 0; c < 3; ++c) sq[c] += (v[c] - mean[c]) * (v[c] - mean[c]);
    }
    const QubitState ref = reference[static_cast<std::size_t>(marks[j])];
    const std::array<double, 3> r{ref.rho_ee, ref.rho_eg.real(), ref.rho_eg.imag()};
    std::array<double, 3> se{};
    for (int c = 0; c < 3; ++c) {
      se[c] = std::sqrt(sq[c] / (count - 1) / count);
      const double dev = std::abs(mean[c] - r[c]);
      res.max_deviation = std::max(res.max_deviation, dev);
      if (dev > 3 * se[c]) res.within_band = false;
      if (se[c] > 0) res.max_z = std::max(res.max_z, dev / se[c]);
      else if (dev > 0) res.max_z = INFINITY;
    }
    res.t_grid.push_back(cfg.dt * static_cast<double>(marks[j]));
    res.mean.push_back({mean[0], 1.0 - mean[0], cplx(mean[1], mean[2])});
    res.reference.push_back(ref);
    res.standard_error.push_back(se);
  }
  return res;
}

}  // namespace detail

/// Skipped (no trajectories run) below 1000 trajectories, where the 3-standard-error band is too loose to test.
inline EnsembleComparison ensemble_vs_unconditional(const ReadoutConfig& cfg, int n_traj,
                                                    const EnsembleOptions& opt = {}) {
  if (n_traj < 1000) {
    EnsembleComparison res;
    res.n_traj = n_traj;
    res.skipped = true;
    return res;
  }
  return detail::ensemble_statistics(cfg, n_traj, opt);
}

/// Everything the ensemble command reports.
struct EnsembleSummary {
  int n_traj = 0;
  std::vector<double> t_grid;
  std::vector<QubitState> mean_state;
  std::vector<double> q_e;
  std::vector<double> q_g;
  SnrEstimate snr{};
  double snr_empirical = 0.0;
  std::vector<double> eta;
  std::vector<double> d_curve;
  EnsembleComparison comparison;
};

/// Runs the ensemble for cfg (initial state `opt.initial`) plus eigenstate runs to cfg.t_final for the SNR.
/// The 3-standard-error verdict is marked skipped below 1000 trajectories.
inline EnsembleSummary summarize_ensemble(const ReadoutConfig& cfg, int n_traj, const EnsembleOptions& opt = {}) {
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (!(cfg.t_final > 0)) throw ConfigError("the ensemble command needs t_final > 0");
  EnsembleSummary s;
  s.n_traj = n_traj;
  s.comparison = detail::ensemble_statistics(cfg, std::max(n_traj, 2), opt);
  s.comparison.skipped = n_traj < 1000;
  for (std::size_t j = 0; j < s.comparison.t_grid.size(); ++j) {
    if (s.comparison.t_grid[j] <= 0) continue;
    s.t_grid.push_back(s.comparison.t_grid[j]);
    s.mean_state.push_back(s.comparison.mean[j]);
  }
  const AccumulatedCurrents q = accumulated_currents(cfg, n_traj, {cfg.t_final}, opt.threads);
  s.q_e = q.q_e.front();
  s.q_g = q.q_g.front();
  s.snr = snr_from_samples(cfg.t_final, s.q_e, s.q_g);
  s.snr_empirical = s.snr.snr;
  for (const auto& e : efficiency_curve(cfg, s.t_grid)) s.eta.push_back(e.value_or(0.0));
  s.d_curve = purity_curve(cfg, s.t_grid);
  return s;
}

}  // namespace qread
