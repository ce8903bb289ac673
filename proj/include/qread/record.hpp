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

#include <cstddef>
#include <vector>

namespace qread {

/// Sampled homodyne current on a uniform grid.
///
/// Sample k covers the cell [t0 + k dt, t0 + (k + 1) dt). `xi` holds the white-noise part
/// (xi_k = w_k / sqrt(dt), w_k standard normal) and `current` the full measured signal.
/// `t0` is the cavity clock at the first sample, i.e. time since the drive was switched on from vacuum.
struct HomodyneRecord {
  double dt = 0.0;
  double phi_lo = 0.0;
  double t0 = 0.0;
  std::vector<double> xi;
  std::vector<double> current;

  std::size_t size() const { return current.size(); }
  bool empty() const { return current.empty(); }
  double duration() const { return dt * static_cast<double>(current.size()); }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  /// Centre of cell k, where the deterministic rates of that step are evaluated.
  double midpoint(std::size_t k) const { return t0 + dt * (static_cast<double>(k) + 0.5); }
};

}  // namespace qread
