// blowup-lab: reproduces the blow-up experiments and writes CSV + manifest.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "blowup/asymptotics.hpp"
#include "blowup/error.hpp"
#include "blowup/experiments.hpp"
#include "blowup/manifest.hpp"
#include "blowup/reduced.hpp"

namespace fs = std::filesystem;
using namespace blowup;
using namespace blowup::experiments;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int cmd_table1(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  auto rows = run_table1(c);
  m.set_timing("table1", tm.seconds());
  m.write_csv(out, "table1.csv", [&](std::ostream& os) { write_table1_csv(os, rows); });
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      std::cerr << "cell alpha=" << r.alpha << " eps=" << r.epsilon << " failed: " << r.error << '\n';
    }
  }
  m.set_result("failed_cells", failed);
  std::cout.precision(7);
  for (const auto& r : rows)
    if (r.error.empty())
      std::cout << r.alpha << '\t' << r.epsilon << '\t' << std::fixed << r.t_c << std::scientific << '\t'
                << r.d_prime << '\t' << r.d_hat << '\t' << r.d_tilde << std::defaultfloat << '\n';
  if (failed == static_cast<int>(rows.size())) return 1;
  return failed ? 2 : 0;
}

int cmd_solve(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  pde::ModelParams p = c.model();
  p.integrator.store_steps = false;
  p.integrator.sample_times = c.times;
  auto sol = pde::solve_to_blowup(p);
  m.set_timing("solve", tm.seconds());
  nlohmann::json rep = sol.report;
  m.set_result("report", rep);
  m.write_json(out, "report.json", {{"report", rep}, {"state_at_tc", sol.report.state_at_tc}});
  std::vector<double> ts(sol.trajectory.times.begin(), sol.trajectory.times.end());
  m.write_csv(out, "snapshots.csv",
              [&](std::ostream& os) { write_snapshot_csv(os, sol.trajectory, p.n_modes, ts); });
  std::cout << rep.dump(2) << '\n';
  return 0;
}

int cmd_errors(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  auto e = run_error_curves(c.model());
  m.set_timing("errors", tm.seconds());
  m.set_result("t_c", e.t_c);
  m.set_result("err_outer_at_half_alpha", e.plateau_err_outer);
  m.write_csv(out, "error_curves.csv", [&](std::ostream& os) { write_error_curves_csv(os, e); });
  return 0;
}

int cmd_profile(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  auto r = run_blowup_profile(c.model());
  m.set_timing("profile", tm.seconds());
  m.set_result("t_c", r.t_c);
  m.set_result("coefficient_slope_10_60", r.slope);
  m.write_csv(out, "profile.csv", [&](std::ostream& os) {
    os << "# caveat: for x below ~1e-4 the solver value is at the roundoff level of the coefficient sum\n";
    write_profile_csv(os, r);
  });
  m.write_csv(out, "coefficients.csv", [&](std::ostream& os) { write_coeff_csv(os, r); });
  return 0;
}

int cmd_singularity(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  auto r = run_singularity(c.model(), c.stride);
  m.set_timing("singularity", tm.seconds());
  m.set_result("t_c", r.t_c);
  if (r.y0) m.set_result("y0", *r.y0);
  if (r.t_max) m.set_result("t_of_max_y", *r.t_max);
  m.set_result("impingement_slope", std::isnan(r.impingement_slope) ? nlohmann::json(nullptr)
                                                                     : nlohmann::json(r.impingement_slope));
  m.set_result("common_samples", r.common_samples);
  m.set_result("max_rel_fit_root_disagreement", r.max_rel_disagreement);
  m.set_result("max_fit_root_tolerance_ratio", r.max_tolerance_ratio);
  m.write_csv(out, "track.csv", [&](std::ostream& os) { singularity::write_track_csv(os, r.track); });
  m.write_csv(out, "overlays.csv", [&](std::ostream& os) { write_overlay_csv(os, r); });
  return 0;
}

int cmd_continue(const RunConfig& c, RunManifest& m, const fs::path& out, bool no_path) {
  Timer tm;
  const double t_end = c.t_end.value_or(20.0);
  auto run = run_continue(c.model(), t_end, c.seed, c.times, true, !no_path, c.radius);
  m.set_timing("continue", tm.seconds());
  auto summary = to_json(run.summary);
  m.set_result("summary", summary);
  m.write_json(out, "continue_summary.json", summary);
  m.write_csv(out, "continue_snapshots.csv", [&](std::ostream& os) {
    write_snapshot_csv(os, run.noise.trajectory, c.n_modes, run.snapshot_times);
  });
  if (run.negated)
    m.write_csv(out, "continue_snapshots_negated.csv", [&](std::ostream& os) {
      write_snapshot_csv(os, run.negated->trajectory, c.n_modes, run.snapshot_times);
    });
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_snapshots(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  auto r = run_fourier_snapshots(c.model(), c.times, c.seed);
  m.set_timing("snapshots", tm.seconds());
  m.set_result("t_c", r.t_c);
  m.set_result("slope_at_tc", r.slope_at_tc);
  m.set_result("exp_fit_residual_before", r.residual_before);
  m.set_result("exp_fit_residual_after", r.residual_after);
  m.write_csv(out, "fourier_snapshots.csv", [&](std::ostream& os) { write_snapshots_csv(os, r); });
  return 0;
}

int cmd_flatness(const RunConfig& c, RunManifest& m, const fs::path& out) {
  Timer tm;
  auto r = run_flatness(c.model());
  m.set_timing("flatness", tm.seconds());
  m.set_result("t_c", r.t_c);
  m.set_result("max_rel_err_t_le_0.9tc", r.max_rel_err_early);
  m.set_result("t_min", r.t_min);
  m.set_result("f_min", r.f_min);
  m.write_csv(out, "flatness.csv", [&](std::ostream& os) { write_flatness_csv(os, r); });
  return 0;
}

int cmd_tabulate(const RunConfig& c, RunManifest& m, const fs::path& out, const std::string& formula) {
  const auto k = asymptotics::constants(c.alpha);
  const double a = c.alpha, e = c.epsilon;
  std::optional<double> tc;
  if (c.t_end) tc = *c.t_end;  // reuse --t-end as the t_c input of the inner solution
  m.write_csv(out, "tabulate_" + formula + ".csv", [&](std::ostream& os) {
    os << "arg," << formula << '\n';
    os.precision(17);
    for (double z : c.times) {
      double v = std::nan("");
      try {
        if (formula == "perturbation_v") v = asymptotics::perturbation_v(z, tc.value_or(0.0), a, e);
        else if (formula == "profile_global") v = asymptotics::blowup_profile_global(z, k, e);
        else if (formula == "profile_local") v = asymptotics::blowup_profile_local(z, a, e);
        else if (formula == "flatness") v = asymptotics::flatness_approx(z, a, e);
        else if (formula == "coeff_global") v = asymptotics::coeff_decay_global(int(z), a, e);
        else if (formula == "coeff_local") v = asymptotics::coeff_decay_local(int(z));
        else if (formula == "timescale2") v = asymptotics::v_timescale2(z, 0.0, k, e, tc.value_or(asymptotics::t_tilde(k, e)));
        else v = asymptotics::singularity_y(asymptotics::regime_from_string(formula), z, a, e);
      } catch (const DomainError&) {
      }
      os << z << ',' << v << '\n';
    }
  });
  return 0;
}

int cmd_phase(const RunConfig& c, RunManifest& m, const fs::path& out, const std::string& kind) {
  const auto kd = reduced::kind_from_string(kind);
  m.write_csv(out, "phase_" + kind + ".csv", [&](std::ostream& os) {
    reduced::write_phase_plane_csv(os, kd, 0.0, c.alpha, 41, 0.0, c.alpha, 41);
  });
  auto sol = reduced::solve_two_mode(kd, c.alpha, c.epsilon);
  m.set_result("t_c_prime", sol.t_c_prime);
  m.set_result("t_ab", sol.t_ab);
  m.write_csv(out, "two_mode_" + kind + ".csv",
              [&](std::ostream& os) { ode::write_trajectory_csv(os, sol.trajectory); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"blowup-lab: spectral blow-up experiments for u_t = u_xx + u^2"};
  app.require_subcommand(0, 1);

  RunConfig c;
  std::string config_file, out_dir, formula = "naive", kind = "fourier";
  std::optional<double> alpha, epsilon, rtol, atol, t_end, radius;
  std::optional<int> n_modes, jobs, stride;
  std::optional<std::uint64_t> seed;
  std::vector<double> times;
  bool verify = false, no_path = false;

  auto common = [&](CLI::App* s) {
    s->add_option("--alpha", alpha, "mean level alpha of v(x,0)");
    s->add_option("--epsilon", epsilon, "perturbation amplitude epsilon");
    s->add_option("--n-modes", n_modes, "Fourier truncation N");
    s->add_option("--rtol", rtol);
    s->add_option("--atol", atol);
    s->add_option("--seed", seed, "noise seed");
    s->add_option("--jobs", jobs, "worker threads");
    s->add_option("--out", out_dir, "output directory");
    s->add_option("--config", config_file, "JSON config; flags override it");
    s->add_option("--times", times, "extra snapshot times / tabulation lattice");
    s->add_option("--t-end", t_end);
    s->add_option("--stride", stride);
    s->add_option("--radius", radius, "semicircle radius for complex-path continuation");
  };

  std::vector<CLI::App*> subs;
  for (const char* name : {"table1", "solve", "errors", "profile", "singularity", "continue",
                           "snapshots", "flatness", "tabulate", "phase"}) {
    auto* s = app.add_subcommand(name);
    common(s);
    subs.push_back(s);
  }
  app.get_subcommand("tabulate")->add_option("--formula", formula, "formula or singularity regime");
  app.get_subcommand("phase")->add_option("--kind", kind, "fourier or taylor");
  app.get_subcommand("continue")->add_flag("--no-path", no_path, "skip the complex-time path run");
  app.add_flag("--verify", verify, "recompute hashes of <out>/manifest.json");
  app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (verify) {
      const fs::path mp = fs::path(out_dir.empty() ? "out" : out_dir) / "manifest.json";
      return RunManifest::verify(mp, std::cout) ? 0 : 1;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 1;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw Error("cannot open config " + config_file);
      c = RunConfig::from_json(nlohmann::json::parse(in), c);
    }
    if (alpha) c.alpha = *alpha;
    if (epsilon) c.epsilon = *epsilon;
    if (n_modes) c.n_modes = *n_modes;
    if (rtol) c.rtol = *rtol;
    if (atol) c.atol = *atol;
    if (seed) c.seed = *seed;
    if (jobs) c.jobs = *jobs;
    if (!out_dir.empty()) c.out = out_dir;
    if (!times.empty()) c.times = times;
    if (t_end) c.t_end = *t_end;
    if (stride) c.stride = *stride;
    if (radius) c.radius = *radius;

    const fs::path out = c.out;
    fs::create_directories(out);
    nlohmann::json params = c.to_json();
    if (cmd == "tabulate") params["formula"] = formula;
    if (cmd == "phase") params["kind"] = kind;
    if (cmd == "continue") params["path"] = !no_path;
    RunManifest m(cmd, params, c.seed);

    int rc = 1;
    if (cmd == "table1") rc = cmd_table1(c, m, out);
    else if (cmd == "solve") rc = cmd_solve(c, m, out);
    else if (cmd == "errors") rc = cmd_errors(c, m, out);
    else if (cmd == "profile") rc = cmd_profile(c, m, out);
    else if (cmd == "singularity") rc = cmd_singularity(c, m, out);
    else if (cmd == "continue") rc = cmd_continue(c, m, out, no_path);
    else if (cmd == "snapshots") rc = cmd_snapshots(c, m, out);
    else if (cmd == "flatness") rc = cmd_flatness(c, m, out);
    else if (cmd == "tabulate") rc = cmd_tabulate(c, m, out, formula);
    else if (cmd == "phase") rc = cmd_phase(c, m, out, kind);
    m.save(out);
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "blowup-lab: " << e.what() << '\n';
    return 1;
  }
}
