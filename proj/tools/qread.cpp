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

// Command-line front end: trajectory, ensemble, figure1, bayes-verify, reset-demo.

#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qread/qread.hpp"

namespace {

using namespace qread;
using nlohmann::json;

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitInternal = 3;

struct CommonFlags {
  std::string config;
  std::string out = "qread_out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<double> dt;
  std::optional<std::string> scheme;
  std::string record;
};

struct Context {
  std::string command;
  RunSettings settings;
  std::filesystem::path out;
  std::vector<std::string> warnings;
  json results = json::object();

  std::string path(const std::string& name) const { return (out / name).string(); }
};

RunSettings resolve_settings(const CommonFlags& f) {
  RunSettings s = f.config.empty() ? RunSettings{} : load_settings(f.config);
  if (f.scheme) s.set_scheme(parse_scheme(*f.scheme));
  if (f.seed) s.cfg.seed = *f.seed;
  if (f.dt) s.cfg.dt = *f.dt;
  s.validate();
  return s;
}

void write_qubit_series(const std::string& path, const std::vector<QubitState>& states, const HomodyneRecord& rec) {
  CsvWriter w(path, {"t", "rho_ee", "rho_eg_re", "rho_eg_im", "purity", "current", "xi"});
  for (std::size_t k = 0; k < states.size(); ++k) {
    const QubitState& q = states[k];
    // The record has one sample per step; the last state has no current of its own.
    const double i = k < rec.size() ? rec.current[k] : 0.0;
    const double xi = k < rec.size() ? rec.xi[k] : 0.0;
    w.row({rec.time(k), q.rho_ee, q.rho_eg.real(), q.rho_eg.imag(), q.purity(), i, xi});
  }
  w.close();
}

void cmd_trajectory(Context& ctx) {
  const RunSettings& s = ctx.settings;
  const QubitState initial = RunSettings::initial_state(s.initial);
  if (s.engine == "full") {
    if (s.cfg.n_max < recommended_n_max(s.cfg)) {
      ctx.warnings.push_back("n_max is below the recommended cutoff " + std::to_string(recommended_n_max(s.cfg)));
    }
    FullSmeOptions opt;
    opt.initial_qubit = initial;
    opt.scheme = s.step;
    const FullTrajectory tr = run_trajectory_full(s.cfg, opt);
    CsvWriter w(ctx.path("trajectory.csv"), {"t", "rho_ee", "rho_eg_re", "rho_eg_im", "purity", "joint_purity",
                                             "mean_a_re", "mean_a_im", "current", "xi"});
    for (std::size_t k = 0; k < tr.qubit.size(); ++k) {
      const QubitState& q = tr.qubit[k];
      const double i = k < tr.record.size() ? tr.record.current[k] : 0.0;
      const double xi = k < tr.record.size() ? tr.record.xi[k] : 0.0;
      w.row({tr.record.time(k), q.rho_ee, q.rho_eg.real(), q.rho_eg.imag(), q.purity(), tr.joint_purity[k],
             tr.mean_a[k].real(), tr.mean_a[k].imag(), i, xi});
    }
    w.close();
    write_record_csv(ctx.path("record.csv"), tr.record);
    ctx.results["final_state"] = to_json(tr.qubit.back());
  } else {
    EffectiveOptions opt;
    opt.initial = initial;
    opt.scheme = s.step;
    const EffectiveTrajectory tr = run_effective_trajectory(s.cfg, opt);
    write_qubit_series(ctx.path("trajectory.csv"), tr.states, tr.record);
    write_record_csv(ctx.path("record.csv"), tr.record);
    ctx.results["final_state"] = to_json(tr.states.back());
  }
  ctx.results["steps"] = s.cfg.steps();
}

void cmd_ensemble(Context& ctx, unsigned threads) {
  const RunSettings& s = ctx.settings;
  EnsembleOptions opt;
  opt.threads = threads;
  opt.initial = RunSettings::initial_state(s.initial);
  opt.scheme = s.step;
  const EnsembleSummary sum = summarize_ensemble(s.cfg, s.n_traj, opt);
  const EnsembleComparison& c = sum.comparison;

  CsvWriter w(ctx.path("ensemble.csv"),
              {"t", "mean_rho_ee", "mean_rho_eg_re", "mean_rho_eg_im", "se_rho_ee", "se_rho_eg_re", "se_rho_eg_im",
               "unconditional_rho_ee", "unconditional_rho_eg_re", "unconditional_rho_eg_im"});
  for (std::size_t j = 0; j < c.t_grid.size(); ++j) {
    const auto& m = c.mean[j];
    const auto& r = c.reference[j];
    const auto& se = c.standard_error[j];
    w.row({c.t_grid[j], m.rho_ee, m.rho_eg.real(), m.rho_eg.imag(), se[0], se[1], se[2], r.rho_ee, r.rho_eg.real(),
           r.rho_eg.imag()});
  }
  w.close();

  CsvWriter f(ctx.path("figures_of_merit.csv"), {"t", "eta", "purity_factor"});
  for (std::size_t j = 0; j < sum.t_grid.size(); ++j) f.row({sum.t_grid[j], sum.eta[j], sum.d_curve[j]});
  f.close();

  CsvWriter q(ctx.path("accumulated_current.csv"), {"trajectory", "q_e", "q_g"});
  for (std::size_t i = 0; i < sum.q_e.size(); ++i) q.row({static_cast<double>(i), sum.q_e[i], sum.q_g[i]});
  q.close();

  ctx.results["n_traj"] = sum.n_traj;
  ctx.results["snr"] = {{"tau", sum.snr.tau},
                        {"snr", sum.snr.snr},
                        {"snr_halfwidth", sum.snr.snr_halfwidth},
                        {"mean_e", sum.snr.mean_e},
                        {"mean_g", sum.snr.mean_g},
                        {"std_e", sum.snr.std_e},
                        {"std_g", sum.snr.std_g}};
  if (s.cfg.scheme == Scheme::Longitudinal) {
    ctx.results["snr"]["analytic"] = snr_longitudinal_analytic(s.cfg, sum.snr.tau);
  } else if (std::abs(s.cfg.chi - s.cfg.kappa / 2) <= 1e-12 * s.cfg.kappa) {
    ctx.results["snr"]["analytic"] = snr_dispersive_analytic(s.cfg, sum.snr.tau);
  }
  ctx.results["snr"]["from_rates"] = snr_from_rates(s.cfg, sum.snr.tau);
  ctx.results["unconditional_check"] = {{"skipped", c.skipped},
                                        {"within_3_standard_errors", c.within_band},
                                        {"max_deviation", c.max_deviation},
                                        {"max_z", std::isfinite(c.max_z) ? json(c.max_z) : json("inf")}};
  if (c.skipped) ctx.warnings.push_back("fewer than 1000 trajectories: the 3-standard-error check is not meaningful");
  write_json_file(ctx.path("ensemble.json"), ctx.results);
}

void cmd_figure1(Context& ctx) {
  const RunSettings& s = ctx.settings;
  const double drive = s.cfg.drive;
  const double kappa = s.cfg.kappa;
  const std::vector<double> grid = uniform_grid(s.figure_t_max / kappa, s.figure_points);
  const ReadoutConfig lon = longitudinal_preset(drive, kappa);
  const ReadoutConfig d05 = dispersive_preset(drive, 0.5 * kappa, kappa);
  const ReadoutConfig d08 = dispersive_preset(drive, 0.8 * kappa, kappa);
  const std::vector<std::pair<std::string, ReadoutConfig>> curves{
      {"longitudinal", lon}, {"dispersive_chi_0.5", d05}, {"dispersive_chi_0.8", d08}};

  std::vector<std::vector<std::optional<double>>> eta;
  std::vector<std::vector<double>> purity;
  for (const auto& [name, cfg] : curves) {
    eta.push_back(efficiency_curve(cfg, grid));
    purity.push_back(purity_curve(cfg, grid));
    for (double t : grid)
      if (rates_at(t, cfg).gamma_d_clamped) {
        ctx.warnings.push_back(name + ": roundoff-level negative Gamma_d clamped to 0");
        break;
      }
  }
  std::vector<std::string> header{"kappa_t"};
  for (const auto& c : curves) header.push_back("eta_" + c.first);
  CsvWriter we(ctx.path("fig1a_efficiency.csv"), header);
  double eta_max_d08 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{kappa * grid[i]};
    for (std::size_t c = 0; c < curves.size(); ++c) {
      if (!eta[c][i]) throw NumericalError("efficiency undefined (Gamma_d = 0) at t = " + std::to_string(grid[i]));
      row.push_back(*eta[c][i]);
    }
    eta_max_d08 = std::max(eta_max_d08, row[3]);
    we.row(row);
  }
  we.close();

  header = {"kappa_t"};
  for (const auto& c : curves) header.push_back("D_" + c.first);
  CsvWriter wd(ctx.path("fig1b_purity.csv"), header);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{kappa * grid[i]};
    for (std::size_t c = 0; c < curves.size(); ++c) row.push_back(purity[c][i]);
    wd.row(row);
  }
  wd.close();

  CsvWriter wl(ctx.path("fig1c_snr_longitudinal.csv"), {"kappa_tau", "snr_analytic", "snr_quadrature"});
  CsvWriter wdsp(ctx.path("fig1d_snr_dispersive.csv"),
                 {"kappa_tau", "snr_longitudinal", "snr_dispersive_chi_0.5_analytic", "snr_dispersive_chi_0.5",
                  "snr_dispersive_chi_0.8"});
  for (double t : grid) {
    const double l = snr_longitudinal_analytic(lon, t);
    wl.row({kappa * t, l, snr_from_rates(lon, t)});
    wdsp.row({kappa * t, l, snr_dispersive_analytic(d05, t), snr_from_rates(d05, t), snr_from_rates(d08, t)});
  }
  wl.close();
  wdsp.close();

  ctx.results["points"] = s.figure_points;
  ctx.results["eta_longitudinal_final"] = *eta[0].back();
  ctx.results["eta_max_dispersive_chi_0.8"] = eta_max_d08;
  ctx.results["D_longitudinal_final"] = purity[0].back();
}

void cmd_bayes_verify(Context& ctx, const std::string& record_path) {
  const RunSettings& s = ctx.settings;
  const QubitState initial = RunSettings::initial_state(s.initial);
  HomodyneRecord rec;
  if (record_path.empty()) {
    EffectiveOptions opt;
    opt.initial = initial;
    opt.scheme = s.step;
    rec = run_effective_trajectory(s.cfg, opt).record;
    write_record_csv(ctx.path("record.csv"), rec);
  } else {
    rec = read_record_csv(record_path, s.cfg);
  }
  const QubitState bayes = bayes_update(initial, rec, s.cfg);
  const QubitState filtered = filter_effective(initial, rec, s.cfg, s.step).back();
  ctx.results["samples"] = rec.size();
  ctx.results["tau"] = rec.duration();
  ctx.results["bayes_state"] = to_json(bayes);
  ctx.results["qte_state"] = to_json(filtered);
  ctx.results["trace_distance"] = trace_distance(bayes, filtered);
  write_json_file(ctx.path("bayes_verify.json"), ctx.results);
}

void cmd_reset_demo(Context& ctx) {
  RunSettings s = ctx.settings;
  ReadoutConfig cfg = s.cfg;
  if (cfg.scheme != Scheme::Longitudinal) throw ConfigError("reset-demo needs the longitudinal scheme");
  if (cfg.gamma1 != 0 || cfg.gamma2 != 0) throw ConfigError("reset-demo needs gamma1 = gamma2 = 0");
  cfg.t_final = s.reset_time;
  cfg.validate();
  const QubitState initial = RunSettings::initial_state(s.initial);
  const OperatorSet ops(cfg);

  CsvWriter w(ctx.path("reset_demo.csv"), {"t", "segment", "purity_full", "purity_joint", "joint_purity_full"});
  FockJointState full = FockJointState::product(initial, fock_vacuum(cfg.n_max));
  JointPureState joint = JointPureState::product(std::sqrt(initial.rho_ee),
                                                 initial.rho_ee > 0 ? initial.rho_eg / std::sqrt(initial.rho_ee)
                                                                    : cplx(std::sqrt(initial.rho_gg)));
  double t_lab = 0.0;
  auto emit = [&](int segment) {
    w.row({t_lab, static_cast<double>(segment), reduce_qubit(full).purity(), qubit_reduced_from_joint(joint).purity(),
           full.purity()});
  };

  double pre_full = 0, pre_joint = 0, post_full = 0, post_joint = 0;
  for (int segment = 0; segment < 2; ++segment) {
    NoiseStream noise(cfg.seed, static_cast<std::uint64_t>(segment));
    emit(segment);
    for (std::int64_t k = 0; k < cfg.steps(); ++k) {
      HomodyneRecord one;
      one.dt = cfg.dt;
      one.phi_lo = cfg.phi_lo;
      one.t0 = joint.t;
      const double wdraw = noise();
      double current;
      try {
        current = step_sme(full, ops, cfg, wdraw, s.step);
      } catch (const NumericalError& e) {
        throw NumericalError(e.what(), k);
      }
      if (top_fock_occupancy(full) > 1e-6) throw NumericalError("highest Fock level populated (increase n_max)", k);
      one.current.push_back(current);
      one.xi.push_back(wdraw / std::sqrt(cfg.dt));
      joint = propagate_joint(joint, one, cfg);
      t_lab += cfg.dt;
      emit(segment);
    }
    if (segment == 0) {
      pre_full = reduce_qubit(full).purity();
      pre_joint = qubit_reduced_from_joint(joint).purity();
      const double a_amp = -joint.cavity.alpha_e.imag();
      full = reset_full_sme(full, a_amp, cfg);
      const ResetResult r = reset(joint, cfg);
      joint = r.state;
      post_full = reduce_qubit(full).purity();
      post_joint = r.qubit.purity();
      ctx.results["reset_amplitude"] = a_amp;
      ctx.results["residual_cavity_occupation"] = r.residual_cavity_occupation;
    }
  }
  w.close();
  ctx.results["pre_reset_purity_full"] = pre_full;
  ctx.results["pre_reset_purity_joint"] = pre_joint;
  ctx.results["post_reset_purity_full"] = post_full;
  ctx.results["post_reset_purity_joint"] = post_joint;
  write_json_file(ctx.path("reset_demo.json"), ctx.results);
}

json metadata(const Context& ctx, double wall, int exit_code, const std::string& error) {
  json j;
  j["command"] = ctx.command;
  j["config"] = to_json(ctx.settings);
  j["seed"] = ctx.settings.cfg.seed;
  j["versions"] = {{"qread", QREAD_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"boost", BOOST_LIB_VERSION},
                   {"cli11", CLI11_VERSION}};
  j["exit_code"] = exit_code;
  if (!error.empty()) j["error"] = error;
  j["warnings"] = ctx.warnings;
  j["results"] = ctx.results;
  j["wall_time_s"] = wall;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous qubit readout simulator (longitudinal and dispersive coupling)"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "INI or JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "root seed (overrides the configuration)");
    sub->add_option("--threads", flags.threads, "worker threads (0 = available parallelism)");
    sub->add_option("--dt", flags.dt, "integration step (overrides the configuration)");
    sub->add_option("--scheme", flags.scheme, "longitudinal|dispersive")
        ->check(CLI::IsMember({"longitudinal", "dispersive"}));
  };
  const std::vector<std::pair<std::string, std::string>> commands{
      {"trajectory", "one conditioned trajectory: state series and homodyne record"},
      {"ensemble", "trajectory ensemble: mean state vs unconditional evolution, accumulated currents, SNR"},
      {"figure1", "efficiency, purity factor and SNR curves for both readout schemes"},
      {"bayes-verify", "Bayesian update vs trajectory filter on one record"},
      {"reset-demo", "measure, reset the cavity, measure again; qubit purity vs time"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (name == "bayes-verify") sub->add_option("--record", flags.record, "record CSV (t,current[,xi,phi_lo])");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.out = flags.out;
  const auto start = std::chrono::steady_clock::now();
  int code = 0;
  std::string error;
  try {
    std::filesystem::create_directories(ctx.out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: cannot create output directory '%s': %s\n", flags.out.c_str(), e.what());
    return kExitConfig;
  }
  try {
    ctx.settings = resolve_settings(flags);
    if (ctx.command == "trajectory") cmd_trajectory(ctx);
    else if (ctx.command == "ensemble") cmd_ensemble(ctx, flags.threads);
    else if (ctx.command == "figure1") cmd_figure1(ctx);
    else if (ctx.command == "bayes-verify") cmd_bayes_verify(ctx, flags.record);
    else cmd_reset_demo(ctx);
  } catch (const ConfigError& e) {
    code = kExitConfig;
    error = e.what();
  } catch (const NumericalError& e) {
    code = kExitNumerical;
    error = e.what();
  } catch (const std::exception& e) {
    code = kExitInternal;
    error = e.what();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    write_json_file(ctx.path("run_metadata.json"), metadata(ctx, wall, code, error));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    if (code == 0) code = kExitConfig;
  }
  if (!error.empty()) std::fprintf(stderr, "error: %s\n", error.c_str());
  return code;
}
