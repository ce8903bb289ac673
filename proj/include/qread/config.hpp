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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qread {

using cplx = std::complex<double>;

/// Bad input: an invalid configuration, argument or file. The CLI maps it to exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical invariant was violated during integration (dt too large, Fock space too small, ...).
/// Carries the integrator step index when one is known. The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::int64_t step = -1)
      : std::runtime_error(step >= 0 ? what + " (at step " + std::to_string(step) + ")" : what), step_(step) {}

  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

enum class Scheme { Longitudinal, Dispersive };

inline std::string_view to_string(Scheme s) {
  return s == Scheme::Longitudinal ? "longitudinal" : "dispersive";
}

inline Scheme parse_scheme(std::string_view text) {
  if (text == "longitudinal" || text == "Longitudinal") return Scheme::Longitudinal;
  if (text == "dispersive" || text == "Dispersive") return Scheme::Dispersive;
  throw ConfigError("unknown readout scheme '" + std::string(text) + "' (expected longitudinal|dispersive)");
}

/// Discretization of the trajectory equations over one step dt.
enum class StepScheme {
  /// rho -> M rho M^dag + sum_k L_k rho L_k^dag dt over the unmonitored channels, then normalized, with
  /// M = 1 - (iH + sum_all L^dag L / 2) dt + c dy. First order and completely positive. Default.
  Kraus,
  /// Plain Itô Euler–Maruyama increment followed by renormalization.
  EulerMaruyama,
  /// Linear (unnormalized) equation driven by the measured current dy = I dt, normalized afterwards.
  Linear,
};

inline std::string_view to_string(StepScheme s) {
  switch (s) {
    case StepScheme::Kraus: return "kraus";
    case StepScheme::EulerMaruyama: return "euler";
    case StepScheme::Linear: return "linear";
  }
  return "?";
}

inline StepScheme parse_step_scheme(std::string_view text) {
  if (text == "kraus") return StepScheme::Kraus;
  if (text == "euler" || text == "euler-maruyama") return StepScheme::EulerMaruyama;
  if (text == "linear") return StepScheme::Linear;
  throw ConfigError("unknown step scheme '" + std::string(text) + "' (expected kraus|euler|linear)");
}

/// Local-oscillator phases that put all of the measurement rate into qubit-state information.
inline constexpr double kOptimalPhiLongitudinal = std::numbers::pi / 2;
inline constexpr double kOptimalPhiDispersive = 0.0;

/// Largest supported Fock cutoff for the full joint-state engine.
inline constexpr int kMaxFockCutoff = 4096;

/// Physical and numerical parameters of one readout experiment.
///
/// Rates are angular frequencies and times are in seconds; with the defaults every quantity is
/// expressed in units of the cavity decay rate (kappa = 1).
struct ReadoutConfig {
  Scheme scheme = Scheme::Longitudinal;
  /// Modulation amplitude g_z (longitudinal) or measurement drive eps_m (dispersive).
  double drive = 1.0;
  /// Dispersive shift; ignored for the longitudinal scheme.
  double chi = 0.5;
  double kappa = 1.0;
  double phi_lo = kOptimalPhiLongitudinal;
  /// Extrinsic relaxation and dephasing (not caused by the measurement).
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double dt = 1e-3;
  double t_final = 5.0;
  std::uint64_t seed = 1;
  int n_max = 30;

  /// Number of integrator steps covering [0, t_final].
  std::int64_t steps() const { return static_cast<std::int64_t>(std::llround(t_final / dt)); }

  void validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(drive) || drive < 0) throw ConfigError("drive must be finite and >= 0");
    if (!finite(chi)) throw ConfigError("chi must be finite");
    if (!finite(kappa) || kappa <= 0) throw ConfigError("kappa must be > 0");
    if (!finite(phi_lo)) throw ConfigError("phi_lo must be finite");
    if (!finite(gamma1) || gamma1 < 0) throw ConfigError("gamma1 must be >= 0");
    if (!finite(gamma2) || gamma2 < 0) throw ConfigError("gamma2 must be >= 0");
    if (!finite(dt) || dt <= 0) throw ConfigError("dt must be > 0");
    if (!finite(t_final) || t_final < 0) throw ConfigError("t_final must be >= 0");
    if (t_final > 0 && dt > t_final) throw ConfigError("dt must not exceed t_final");
    if (n_max < 1) throw ConfigError("n_max must be >= 1");
    if (n_max > kMaxFockCutoff) throw ConfigError("n_max exceeds the supported cutoff of 4096");
  }
};

inline ReadoutConfig longitudinal_preset(double drive, double kappa = 1.0) {
  ReadoutConfig cfg;
  cfg.scheme = Scheme::Longitudinal;
  cfg.drive = drive;
  cfg.kappa = kappa;
  cfg.phi_lo = kOptimalPhiLongitudinal;
  return cfg;
}

inline ReadoutConfig dispersive_preset(double drive, double chi, double kappa = 1.0) {
  ReadoutConfig cfg;
  cfg.scheme = Scheme::Dispersive;
  cfg.drive = drive;
  cfg.chi = chi;
  cfg.kappa = kappa;
  cfg.phi_lo = kOptimalPhiDispersive;
  return cfg;
}

}  // namespace qread
