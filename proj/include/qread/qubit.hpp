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
#include <string>

#include "qread/config.hpp"

namespace qread {

/// Qubit density matrix in the {|e>, |g>} basis.
struct QubitState {
  double rho_ee = 1.0;
  double rho_gg = 0.0;
  cplx rho_eg{};

  static QubitState excited() { return {1.0, 0.0, {}}; }
  static QubitState ground() { return {0.0, 1.0, {}}; }
  /// Pure state c_e |e> + c_g |g>; the amplitudes are normalized here.
  static QubitState pure(cplx c_e, cplx c_g) {
    const double n = std::norm(c_e) + std::norm(c_g);
    if (!(n > 0)) throw ConfigError("QubitState::pure: zero amplitudes");
    return {std::norm(c_e) / n, std::norm(c_g) / n, c_e * std::conj(c_g) / n};
  }
  /// (|e> + |g>) / sqrt(2).
  static QubitState plus() { return pure(1.0, 1.0); }

  double sigma_z() const { return rho_ee - rho_gg; }
  double purity() const { return rho_ee * rho_ee + rho_gg * rho_gg + 2 * std::norm(rho_eg); }
  double trace() const { return rho_ee + rho_gg; }
};

/// Distance 1/2 ||a - b||_1 between two unit-trace qubit states.
inline double trace_distance(const QubitState& a, const QubitState& b) {
  const double dz = 0.5 * ((a.rho_ee - b.rho_ee) - (a.rho_gg - b.rho_gg));
  return std::sqrt(dz * dz + std::norm(a.rho_eg - b.rho_eg));
}

/// Amount by which |rho_eg|^2 exceeds rho_ee rho_gg (<= 0 for physical states).
inline double coherence_excess(const QubitState& s) { return std::norm(s.rho_eg) - s.rho_ee * s.rho_gg; }

/// Throws NumericalError unless the state is a density matrix to within `tol`.
inline void validate(const QubitState& s, double tol = 1e-10) {
  if (!std::isfinite(s.rho_ee) || !std::isfinite(s.rho_gg) || !std::isfinite(s.rho_eg.real()) ||
      !std::isfinite(s.rho_eg.imag())) {
    throw NumericalError("qubit state has non-finite entries");
  }
  if (std::abs(s.trace() - 1.0) > tol) throw NumericalError("qubit state trace deviates from 1");
  if (s.rho_ee < -tol || s.rho_gg < -tol) throw NumericalError("qubit state has a negative population");
  if (coherence_excess(s) > tol) throw NumericalError("qubit coherence exceeds sqrt(rho_ee rho_gg)");
}

}  // namespace qread
