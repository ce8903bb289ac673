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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "qread/qread.hpp"

using namespace qread;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double qubit_purity(const QubitState& q) {
  return q.rho_ee * q.rho_ee + q.rho_gg * q.rho_gg + 2 * std::norm(q.rho_eg);
}

Verdict efficiency_endpoints() {
  const ReadoutConfig lon = longitudinal_preset(1.0);
  const double eta_l = *efficiency_curve(lon, {20.0}).front();
  const ReadoutConfig dis = dispersive_preset(1.0, 0.8);
  const auto grid = uniform_grid(10.0, 20000);
  double eta_max = 0.0;
  for (const auto& e : efficiency_curve(dis, grid)) {
    if (e) eta_max = std::max(eta_max, *e);
  }
  const bool ok = std::abs(eta_l - 1.0) <= 1e-3 && eta_max > 1.0;
  return {ok, fmt("eta_L(20) = %.9f, max eta_D(chi=0.8) on (0,10) = %.6f", eta_l, eta_max)};
}

Verdict purity_identity() {
  const ReadoutConfig cfg = longitudinal_preset(1.0);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 10.0 * i / 1000;
    worst = std::max(worst, std::abs(purity_factor(cfg, t) - purity_factor_overlap(cfg, t)));
  }
  const double d_inf = purity_factor(cfg, 80.0);
  const double err = std::abs(d_inf - std::exp(-2.0));
  const bool ok = worst <= 1e-8 && err <= 1e-6;
  return {ok, fmt("max |D_int - D_overlap| on [0,10] = %.3e, |D(inf) - e^-2| = %.3e", worst, err)};
}

Verdict purity_ordering() {
  const ReadoutConfig lon = longitudinal_preset(1.0);
  const ReadoutConfig dis = dispersive_preset(1.0, 0.5);
  auto first_violation = [&](double lo, double hi) {
    const int n = 4000;
    for (int i = 1; i < n; ++i) {
      const double t = lo + (hi - lo) * i / n;
      if (!(purity_factor(lon, t) < purity_factor(dis, t))) return t;
    }
    return std::nan("");
  };
  const double bad = first_violation(0.1, 5.0);
  const double bad_short = first_violation(0.1, std::numbers::pi - 1e-3);
  const bool ok = std::isnan(bad);
  std::string detail = ok ? "D_L < D_D everywhere on (0.1, 5)"
                          : fmt("D_L >= D_D first at kappa t = %.4f (D_L = %.6f, D_D = %.6f)", bad,
                                purity_factor(lon, bad), purity_factor(dis, bad));
  detail += std::isnan(bad_short) ? "; ordering holds on (0.1, pi)" : "; ordering also fails before pi";
  return {ok, detail};
}

Verdict snr_agreement() {
  const ReadoutConfig lon = longitudinal_preset(1.0);
  const ReadoutConfig dis = dispersive_preset(1.0, 0.5);
  const double sl = snr_longitudinal_analytic(lon, 100.0);
  const double sd = snr_dispersive_analytic(dis, 100.0);
  const double rel = std::abs(sl - sd) / sl;
  bool ok = rel <= 0.01;
  std::string detail = fmt("analytic rel. diff at 100 = %.4f%%", 100 * rel);
  const std::vector<double> taus{1.0, 5.0, 10.0};
  ReadoutConfig mc = lon;
  mc.t_final = 10.0;
  mc.seed = 20261015;
  const auto est = snr_empirical(mc, 10000, taus, 0);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double ref = snr_longitudinal_analytic(lon, taus[i]);
    const double e = std::abs(est[i].snr - ref) / ref;
    ok = ok && e <= 0.05;
    detail += fmt("; tau=%g: MC %.4f vs %.4f (%.2f%%)", taus[i], est[i].snr, ref, 100 * e);
  }
  return {ok, detail};
}

// The dt/2 run and the dt run share one Brownian path: each coarse increment is the sum of two fine ones.
Verdict bayes_equivalence() {
  bool ok = true;
  std::string detail;
  for (const double phi : {std::numbers::pi / 2, std::numbers::pi / 4}) {
    std::vector<double> coarse, fine;
    for (int s = 0; s < 50; ++s) {
      ReadoutConfig cfg = longitudinal_preset(1.0);
      cfg.phi_lo = phi;
      cfg.t_final = 2.0;
      cfg.seed = 1000 + static_cast<std::uint64_t>(s);
      ReadoutConfig half = cfg;
      half.dt = cfg.dt / 2;

      const EffectiveTrajectory tf = run_effective_trajectory(half);
      fine.push_back(trace_distance(bayes_update(QubitState::plus(), tf.record, half), tf.states.back()));

      HomodyneRecord noise;
      noise.dt = cfg.dt;
      noise.phi_lo = cfg.phi_lo;
      for (std::size_t k = 0; k + 1 < tf.record.size(); k += 2) {
        noise.xi.push_back(0.5 * (tf.record.xi[k] + tf.record.xi[k + 1]));
        noise.current.push_back(0.0);
      }
      EffectiveOptions eo;
      eo.noise = &noise;
      const EffectiveTrajectory tc = run_effective_trajectory(cfg, eo);
      coarse.push_back(trace_distance(bayes_update(QubitState::plus(), tc.record, cfg), tc.states.back()));
    }
    const double worst = *std::max_element(coarse.begin(), coarse.end());
    const double mc = median(coarse), mf = median(fine);
    ok = ok && worst <= 1e-2 && mf < mc;
    detail += fmt("%sphi=%.4f: max %.2e, median %.2e -> %.2e at dt/2", detail.empty() ? "" : "; ", phi, worst, mc, mf);
  }
  return {ok, detail};
}

Verdict polaron_equivalence() {
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    ReadoutConfig cfg = longitudinal_preset(1.0);
    cfg.n_max = 30;
    cfg.t_final = 5.0;
    cfg.seed = 500 + static_cast<std::uint64_t>(s);
    FullSmeOptions fo;
    fo.positivity_stride = 10;
    const FullTrajectory full = run_trajectory_full(cfg, fo);
    EffectiveOptions eo;
    eo.noise = &full.record;
    const EffectiveTrajectory eff = run_effective_trajectory(cfg, eo);
    for (std::size_t k = 0; k < full.qubit.size(); ++k) {
      worst = std::max(worst, trace_distance(full.qubit[k], eff.states[k]));
    }
  }
  return {worst <= 5e-2, fmt("max trace distance over 10 seeds on [0,5] = %.3e", worst)};
}

Verdict qnd_invariance() {
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    for (const QubitState& q0 : {QubitState::excited(), QubitState::ground()}) {
      ReadoutConfig cfg = longitudinal_preset(1.0);
      cfg.seed = 7000 + static_cast<std::uint64_t>(s);
      cfg.t_final = 5.0;
      EffectiveOptions eo;
      eo.initial = q0;
      for (const auto& q : run_effective_trajectory(cfg, eo).states) {
        worst = std::max(worst, std::abs(q.rho_ee - q0.rho_ee));
      }
      cfg.n_max = 20;
      cfg.t_final = 2.0;
      FullSmeOptions fo;
      fo.initial_qubit = q0;
      fo.positivity_stride = 0;
      for (const auto& q : run_trajectory_full(cfg, fo).qubit) {
        worst = std::max(worst, std::abs(q.rho_ee - q0.rho_ee));
      }
    }
  }
  return {worst <= 1e-10, fmt("max population drift over 100 seeds, both engines = %.3e", worst)};
}

Verdict reset_restoration() {
  ReadoutConfig cfg = longitudinal_preset(1.0);
  cfg.n_max = 30;
  cfg.t_final = 2.0;
  cfg.seed = 42;
  FullSmeOptions fo;
  fo.positivity_stride = 10;
  const FullTrajectory full = run_trajectory_full(cfg, fo);

  JointPureState psi = JointPureState::product(1.0, 1.0);
  psi = propagate_joint(psi, full.record, cfg);
  const double pre_joint = qubit_purity(qubit_reduced_from_joint(psi));
  const double post_joint = qubit_purity(reset(psi, cfg).qubit);

  const double a_amp = std::abs(cavity_pair(2.0, cfg).alpha_e);
  const double pre_full = qubit_purity(reduce_qubit(full.final_state));
  const double post_full = qubit_purity(reduce_qubit(reset_full_sme(full.final_state, a_amp, cfg)));

  const bool ok = pre_joint < 1.0 && pre_full < 1.0 && std::abs(post_joint - 1.0) <= 1e-10 && post_full >= 1.0 - 1e-6;
  return {ok, fmt("joint purity %.6f -> 1 - %.2e, full %.6f -> 1 - %.2e", pre_joint, 1.0 - post_joint, pre_full,
                  1.0 - post_full)};
}

Verdict ensemble_consistency() {
  bool ok = true;
  std::string detail;
  for (const double g1 : {0.0, 0.1}) {
    ReadoutConfig cfg = longitudinal_preset(1.0);
    cfg.gamma1 = g1;
    cfg.t_final = 5.0;
    cfg.seed = 99;
    EnsembleOptions opt;
    opt.report_stride = 100;
    const EnsembleComparison c = ensemble_vs_unconditional(cfg, 5000, opt);
    ok = ok && !c.skipped && c.within_band;
    detail += fmt("%sgamma1=%g: max |dev| %.2e, max z %.2f over %zu points", detail.empty() ? "" : "; ", g1,
                  c.max_deviation, c.max_z, c.t_grid.size());
  }
  return {ok, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string text = slurp(e.path());
    if (e.path().filename() == "run_metadata.json") {
      auto j = nlohmann::json::parse(text);
      j.erase("wall_time_s");
      text = j.dump();
    }
    files[e.path().filename().string()] = text;
  }
  return files;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "qread_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "ensemble.ini";
  std::ofstream(cfg) << "n_traj = 300\nt_final = 2\n";
  const fs::path full_cfg = root / "full.ini";
  std::ofstream(full_cfg) << "engine = full\nn_max = 20\nt_final = 1\n";
  const std::vector<std::pair<std::string, std::string>> commands{
      {"trajectory", "trajectory --seed 5"},
      {"trajectory_full", "trajectory --seed 5 --config " + full_cfg.string()},
      {"ensemble", "ensemble --seed 5 --threads 4 --config " + cfg.string()},
      {"figure1", "figure1 --seed 5"},
      {"bayes_verify", "bayes-verify --seed 5"},
      {"reset_demo", "reset-demo --seed 5 --config " + full_cfg.string()},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, args] : commands) {
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
      const fs::path out = root / (name + "_" + std::to_string(r));
      const std::string cmd = std::string(QREAD_CLI_PATH) + " " + args + " --out " + out.string() + " > /dev/null 2>&1";
      const int status = std::system(cmd.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        ok = false;
        detail += name + " failed to run; ";
      }
      runs[r] = snapshot(out);
    }
    if (runs[0] != runs[1] || runs[0].size() < 2) {
      ok = false;
      detail += name + " differs; ";
    }
  }
  if (ok) detail = fmt("%zu commands byte-identical across two runs", commands.size());
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> checks{
      efficiency_endpoints, purity_identity, purity_ordering,      snr_agreement,        bayes_equivalence,
      polaron_equivalence,  qnd_invariance,  reset_restoration,    ensemble_consistency, determinism,
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = checks[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("criterion %zu: %s  %s  [%.1f s]\n", i + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
