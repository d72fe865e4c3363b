#include "blowup/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "blowup/asymptotics.hpp"
#include "blowup/error.hpp"
#include "blowup/reduced.hpp"

namespace blowup::experiments {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
double or_nan(F f) {
  try {
    return f();
  } catch (const Error&) {
    return kNaN;
  }
}

void put(std::ostream& os, double v) {
  if (std::isnan(v)) os << "nan";
  else os << v;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double solve_tc(const pde::ModelParams& p) {
  pde::ModelParams q = p;
  q.integrator.store_steps = false;
  q.integrator.sample_times.clear();
  return pde::solve_to_blowup(q, {false}).report.t_c;
}

// Conjugate of the function v(x): coefficients conj(c_{-k}).
ode::State conj_field(const ode::State& y) { return y.reverse().conjugate(); }

}  // namespace

// ---- config -----------------------------------------------------------------

pde::ModelParams RunConfig::model() const {
  pde::ModelParams p;
  p.alpha = alpha;
  p.epsilon = epsilon;
  p.n_modes = n_modes;
  p.integrator.rtol = rtol;
  p.integrator.atol = atol;
  return p;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j{{"alpha", alpha}, {"epsilon", epsilon}, {"n_modes", n_modes}, {"rtol", rtol},
                   {"atol", atol},   {"seed", seed},       {"stride", stride},   {"times", times}};
  if (t_end) j["t_end"] = *t_end;
  if (radius) j["radius"] = *radius;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, RunConfig c) {
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<double>();
  if (j.contains("n_modes")) c.n_modes = j["n_modes"].get<int>();
  if (j.contains("rtol")) c.rtol = j["rtol"].get<double>();
  if (j.contains("atol")) c.atol = j["atol"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  if (j.contains("t_end")) c.t_end = j["t_end"].get<double>();
  if (j.contains("times")) c.times = j["times"].get<std::vector<double>>();
  if (j.contains("stride")) c.stride = j["stride"].get<int>();
  if (j.contains("radius")) c.radius = j["radius"].get<double>();
  return c;
}

// ---- blow-up time table -----------------------------------------------------------

std::vector<Table1Row> run_table1(const RunConfig& cfg) {
  std::vector<Table1Row> rows;
  for (double a : {0.25, 1.0, 4.0})
    for (double e : {0.1, 0.01, 0.001}) rows.push_back({a, e, 0, 0, 0, 0, ""});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      Table1Row& r = rows[i];
      try {
        RunConfig c = cfg;
        c.alpha = r.alpha;
        c.epsilon = r.epsilon;
        pde::ModelParams p = c.model();
        p.integrator.store_steps = false;
        auto rep = pde::solve_to_blowup(p).report;
        r.t_c = rep.t_c;
        r.d_prime = rep.delta_prime;
        r.d_hat = rep.delta_hat;
        r.d_tilde = rep.delta_tilde;
      } catch (const std::exception& ex) {
        r.error = ex.what();
      }
    }
  };
  const int jobs = std::clamp(cfg.jobs, 1, static_cast<int>(rows.size()));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_table1_csv(std::ostream& os, const std::vector<Table1Row>& rows) {
  os << "alpha,epsilon,t_c,tc_prime_minus_tc,t_hat_minus_tc,t_tilde_minus_tc,error\n";
  os.precision(12);
  for (const auto& r : rows) {
    os << r.alpha << ',' << r.epsilon << ',';
    if (r.error.empty())
      os << r.t_c << ',' << r.d_prime << ',' << r.d_hat << ',' << r.d_tilde << ",\n";
    else
      os << "nan,nan,nan,nan,\"" << r.error << "\"\n";
  }
}

// ---- error curves -----------------------------------------------------------

ErrorCurveRow step_errors(double t, long k, const pde::FourierField& v, double alpha, double epsilon,
                          double t_c) {
  const auto c = asymptotics::constants(alpha);
  const auto g = spectral::synthesize(v, spectral::padded_size(v.n_modes()));
  ErrorCurveRow row{t, k, 0, 0};
  for (int j = 0; j < g.size(); ++j) {
    const double x = g.points[j], vj = g.values[j].real();
    const double e13 = std::abs(asymptotics::perturbation_v(x, t, alpha, epsilon) - vj) / std::abs(vj);
    const double e19 = or_nan([&] {
      return std::abs(asymptotics::v_timescale2(x, t, c, epsilon, t_c) - vj) / std::abs(vj);
    });
    row.err_outer = std::max(row.err_outer, e13);
    row.err_inner = std::isnan(e19) ? kNaN : std::max(row.err_inner, e19);
  }
  return row;
}

ErrorCurves run_error_curves(const pde::ModelParams& p_in) {
  pde::ModelParams p = p_in;
  p.integrator.store_steps = true;
  p.integrator.sample_times = {p.alpha / 2};
  auto sol = pde::solve_to_blowup(p, {false});
  ErrorCurves out;
  out.t_c = sol.report.t_c;
  const auto& tr = sol.trajectory;
  long k = 0;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {  // last node is the event state
    const pde::FourierField v = pde::from_state(tr.states[i], p.n_modes);
    if (tr.times[i] == p.alpha / 2) {
      out.plateau_err_outer = step_errors(tr.times[i], -1, v, p.alpha, p.epsilon, out.t_c).err_outer;
      continue;
    }
    out.rows.push_back(step_errors(tr.times[i], k++, v, p.alpha, p.epsilon, out.t_c));
  }
  return out;
}

void write_error_curves_csv(std::ostream& os, const ErrorCurves& e) {
  os << "t_k,k,err_outer,err_inner\n";
  os.precision(17);
  for (const auto& r : e.rows) {
    os << r.t << ',' << r.k << ',';
    put(os, r.err_outer);
    os << ',';
    put(os, r.err_inner);
    os << '\n';
  }
}

// ---- profile ----------------------------------------------------------------

double loglog_slope(const pde::FourierField& c, int k_lo, int k_hi) {
  std::vector<double> h, e;
  for (int k = k_lo; k <= k_hi; ++k) {
    h.push_back(double(k));
    e.push_back(std::abs(c[k]));
  }
  return ode::fitted_order(h, e);
}

ProfileResult profile_at(const pde::FourierField& state, double t_c, double alpha, double epsilon) {
  ProfileResult r;
  r.t_c = t_c;
  r.state = state;
  const auto c = asymptotics::constants(alpha);
  std::vector<double> xs;
  for (int j = -70; j <= -10; ++j) xs.push_back(std::pow(10.0, j / 10.0));  // 1e-7 .. 1e-1
  const int m = spectral::padded_size(state.n_modes());
  for (double x : spectral::GridValues::nodes(m))
    if (x > 0) xs.push_back(x);
  xs.push_back(std::numbers::pi);
  xs = sorted_unique(xs);
  for (double x : xs) {
    const double v = spectral::eval_at(state, x).real();
    r.profile.push_back({x, v, or_nan([&] { return asymptotics::blowup_profile_global(x, c, epsilon); }),
                         or_nan([&] { return asymptotics::blowup_profile_local(x, alpha, epsilon); })});
  }
  for (int k = 0; k <= state.n_modes(); ++k) {
    r.coeffs.push_back({k, std::abs(state[k]),
                        or_nan([&] { return asymptotics::coeff_decay_global(k, alpha, epsilon); }),
                        or_nan([&] { return asymptotics::coeff_decay_local(k); })});
  }
  r.slope = loglog_slope(state, 10, std::min(60, state.n_modes()));
  return r;
}

ProfileResult run_blowup_profile(const pde::ModelParams& p_in) {
  pde::ModelParams p = p_in;
  p.integrator.store_steps = false;
  auto sol = pde::solve_to_blowup(p, {false});
  return profile_at(sol.report.state_at_tc, sol.report.t_c, p.alpha, p.epsilon);
}

void write_profile_csv(std::ostream& os, const ProfileResult& r) {
  os << "x,v_solver,global,local\n";
  os.precision(17);
  for (const auto& row : r.profile) {
    os << row.x << ',' << row.v << ',';
    put(os, row.global);
    os << ',';
    put(os, row.local);
    os << '\n';
  }
}

void write_coeff_csv(std::ostream& os, const ProfileResult& r) {
  os << "k,abs_c,global_law,local_law\n";
  os.precision(17);
  for (const auto& row : r.coeffs) {
    os << row.k << ',' << row.abs_c << ',';
    put(os, row.global_law);
    os << ',';
    put(os, row.local_law);
    os << '\n';
  }
}

// ---- singularity ------------------------------------------------------------

std::vector<double> near_tc_times(double t_c, double epsilon) {
  std::vector<double> ts;
  for (int j = 0; j <= 16; ++j) ts.push_back(t_c - epsilon * std::pow(10.0, 1.0 - j / 8.0));
  for (int j = 0; j <= 12; ++j) ts.push_back(t_c - 1e-4 * std::pow(10.0, -j / 4.0));
  std::erase_if(ts, [](double t) { return !(t > 0); });
  return sorted_unique(ts);
}

SingularityResult run_singularity(const pde::ModelParams& p_in, int stride) {
  SingularityResult out;
  pde::ModelParams p = p_in;
  p.integrator.store_steps = true;
  p.integrator.sample_times.clear();
  auto sol = pde::solve_to_blowup(p, {false});
  out.t_c = sol.report.t_c;
  ode::Trajectory& tr = sol.trajectory;
  // the event state sits on the axis; nothing to estimate there
  tr.times.pop_back();
  tr.states.pop_back();
  out.track = singularity::build_track(tr, p.n_modes, singularity::Method::both, stride);
  tr = {};

  if (p.epsilon > 0) {
    pde::ModelParams q = p;
    q.integrator.store_steps = false;
    q.integrator.sample_times = near_tc_times(out.t_c, p.epsilon);
    auto near = pde::solve_to_blowup(q, {false}).trajectory;
    for (std::size_t i = 0; i < near.size(); ++i) {
      if (near.times[i] <= 0 || near.times[i] >= out.t_c) continue;
      auto v = pde::from_state(near.states[i], p.n_modes);
      v.project_even_real();
      out.track.samples.push_back(singularity::estimate(near.times[i], v, singularity::Method::both));
    }
    std::sort(out.track.samples.begin(), out.track.samples.end(),
              [](const auto& a, const auto& b) { return a.t < b.t; });
  }

  using asymptotics::Regime;
  for (const auto& s : out.track.samples) {
    const double T = (s.t - out.t_c) / p.epsilon;
    auto y = [&](Regime r, double arg) {
      return or_nan([&] { return asymptotics::singularity_y(r, arg, p.alpha, p.epsilon); });
    };
    out.overlays.push_back({s.t, y(Regime::naive, s.t), y(Regime::early, s.t), y(Regime::late_one, s.t),
                            y(Regime::scale_two, T), y(Regime::scale_three, T),
                            y(Regime::impingement, out.t_c - s.t)});
  }

  double ybest = -1;
  for (const auto& s : out.track.samples) {
    if (!s.usable) continue;
    const double y = s.y_root ? *s.y_root : *s.y_fit;
    if (!out.y0) out.y0 = y;
    if (y > ybest) {
      ybest = y;
      out.t_max = s.t;
    }
    if (s.y_root && s.y_fit) {
      ++out.common_samples;
      const double d = std::abs(*s.y_fit - *s.y_root);
      out.max_abs_disagreement = std::max(out.max_abs_disagreement, d);
      out.max_rel_disagreement = std::max(out.max_rel_disagreement, d / *s.y_root);
      const double allowed = std::max(0.05 * *s.y_root, 2 * std::numbers::pi / p.n_modes);
      out.max_tolerance_ratio = std::max(out.max_tolerance_ratio, d / allowed);
    }
  }
  out.impingement_slope = singularity::impingement_slope(out.track, out.t_c, out.t_c - 10 * p.epsilon,
                                                         out.t_c - p.epsilon / 10);
  return out;
}

void write_overlay_csv(std::ostream& os, const SingularityResult& r) {
  os << "t,naive,early,late_one,scale_two,scale_three,impingement\n";
  os.precision(17);
  for (const auto& o : r.overlays) {
    os << o.t;
    for (double v : {o.naive, o.early, o.late_one, o.scale_two, o.scale_three, o.impingement}) {
      os << ',';
      put(os, v);
    }
    os << '\n';
  }
}

// ---- continuation -----------------------------------------------------------

double default_path_radius(double epsilon, double t_c) { return std::min(10 * epsilon, 0.2 * t_c); }

ContinueRun run_continue(const pde::ModelParams& p_in, double t_end, std::uint64_t seed,
                         const std::vector<double>& user_times, bool with_negated, bool with_path,
                         std::optional<double> path_radius) {
  ContinueRun run;
  ContinueSummary& s = run.summary;
  s.t_c = solve_tc(p_in);
  s.t_end = t_end;
  const double tc = s.t_c;

  std::vector<double> snaps = user_times;
  for (double f : {0.5, 1.0, 1.25, 1.5, 2.0, 3.0}) snaps.push_back(f * tc);
  std::erase_if(snaps, [&](double t) { return !(t > 0 && t < t_end); });
  run.snapshot_times = sorted_unique(snaps);
  run.snapshot_times.insert(run.snapshot_times.begin(), 0.0);
  std::vector<double> samples = run.snapshot_times;
  for (int j = 1; j < 20; ++j) samples.push_back(tc * j / 20.0);
  for (int j = 0; j <= 100; ++j) samples.push_back(tc * (1.5 + j / 100.0));
  std::erase_if(samples, [&](double t) { return !(t > 0 && t < t_end); });

  pde::ModelParams p = p_in;
  p.integrator.store_steps = false;
  p.integrator.sample_times = sorted_unique(samples);

  run.noise = pde::continue_past_blowup(p, t_end, seed);
  s.branch_sign = run.noise.branch_sign;
  const auto& tr = run.noise.trajectory;
  const int n = p.n_modes;

  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    if (t < tc - 1e-6) s.max_imag_before = std::max(s.max_imag_before, tr.states[i].imag().cwiseAbs().maxCoeff());
    if (t >= 1.5 * tc - 1e-12 && t <= 2.5 * tc + 1e-12) {
      const double u = std::abs(1.0 / pde::value_at_pi(tr.states[i], n));
      if (u > s.u_pi_local_max) {
        s.u_pi_local_max = u;
        s.t_u_pi_max = t;
      }
    }
  }
  if (1.25 * tc < t_end) s.max_imag_after = pde::state_at(tr, 1.25 * tc).imag().cwiseAbs().maxCoeff();
  if (1.5 * tc < t_end) {
    const auto& y = pde::state_at(tr, 1.5 * tc);
    s.u_pi_at_1p5 = std::abs(1.0 / pde::value_at_pi(y, n));
    const auto g = spectral::synthesize(pde::from_state(y, n), spectral::padded_size(n));
    s.min_v_pi_ratio = g.values.cwiseAbs().minCoeff() / std::abs(pde::value_at_pi(y, n));
  }
  {
    const auto u = pde::u_from_v(pde::from_state(tr.back(), n)).grid;
    double dev = 0;
    for (int j = 0; j < u.size(); ++j) dev = std::max(dev, std::abs(u.values[j] + 1.0 / t_end) * t_end);
    s.minus_one_over_t = dev;
  }

  if (with_negated) {
    run.negated = pde::continue_past_blowup(p, t_end, seed, {1e-16, true});
    if (2 * tc < t_end)
      s.conjugacy_at_2tc = (pde::state_at(tr, 2 * tc) - conj_field(pde::state_at(run.negated->trajectory, 2 * tc)))
                               .cwiseAbs()
                               .maxCoeff();
  }
  if (with_path && 3 * tc < t_end) {
    pde::ModelParams q = p;
    q.integrator.sample_times = {3 * tc};
    run.path = pde::continue_complex_path(q, path_radius.value_or(default_path_radius(p.epsilon, tc)),
                                          std::min(t_end, 3.2 * tc),
                                          {true, tc});
    const auto& yp = pde::state_at(run.path->trajectory, 3 * tc);
    double dplus = (yp - pde::state_at(tr, 3 * tc)).cwiseAbs().maxCoeff();
    double dminus = std::numeric_limits<double>::infinity();
    if (run.negated) dminus = (yp - pde::state_at(run.negated->trajectory, 3 * tc)).cwiseAbs().maxCoeff();
    s.path_match_at_3tc = std::min(dplus, dminus);
    s.path_branch = dplus <= dminus ? 1 : -1;
  }
  return run;
}

nlohmann::json to_json(const ContinueSummary& s) {
  nlohmann::json j{{"t_c", s.t_c},
                   {"branch_sign", s.branch_sign},
                   {"max_imag_before_tc", s.max_imag_before},
                   {"max_imag_at_1.25tc", s.max_imag_after},
                   {"abs_u_pi_at_1.5tc", s.u_pi_at_1p5},
                   {"abs_u_pi_local_max", s.u_pi_local_max},
                   {"t_abs_u_pi_max", s.t_u_pi_max},
                   {"min_abs_v_over_abs_v_pi_at_1.5tc", s.min_v_pi_ratio},
                   {"t_end", s.t_end},
                   {"max_abs_u_plus_inv_t_times_t", s.minus_one_over_t}};
  if (s.conjugacy_at_2tc) j["conjugacy_residual_at_2tc"] = *s.conjugacy_at_2tc;
  if (s.path_match_at_3tc) j["path_match_at_3tc"] = *s.path_match_at_3tc;
  if (s.path_branch) j["path_branch"] = *s.path_branch;
  return j;
}

void write_snapshot_csv(std::ostream& os, const ode::Trajectory& tr, int n_modes,
                        const std::vector<double>& times) {
  os << "t,k,re_c,im_c\n";
  os.precision(17);
  for (double t : times) {
    const ode::State* y = nullptr;
    try {
      y = &pde::state_at(tr, t);
    } catch (const DomainError&) {
      continue;
    }
    for (int k = -n_modes; k <= n_modes; ++k)
      os << t << ',' << k << ',' << (*y)[k + n_modes].real() << ',' << (*y)[k + n_modes].imag() << '\n';
  }
}

// ---- snapshots --------------------------------------------------------------

std::pair<double, double> exponential_fit(const pde::FourierField& c) {
  const int kk = singularity::resolved_modes(c);
  const int lo = std::max(1, (kk + 1) / 2);  // the low modes carry the O(1) shape, not the tail
  const int m = kk - lo + 1;
  if (m < 3) return {kNaN, kNaN};
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (int k = lo; k <= kk; ++k) {
    A(k - lo, 0) = 1;
    A(k - lo, 1) = -double(k);
    b[k - lo] = std::log(std::abs(c[k]));
  }
  Eigen::Vector2d x = A.colPivHouseholderQr().solve(b);
  return {std::sqrt((A * x - b).squaredNorm() / m), x[1]};
}

SnapshotsResult run_fourier_snapshots(const pde::ModelParams& p_in, std::vector<double> times,
                                      std::uint64_t seed) {
  SnapshotsResult r;
  r.t_c = solve_tc(p_in);
  const double tc = r.t_c;
  const double before = tc - 0.05 * tc, after = tc + 0.05 * tc;
  times.insert(times.end(), {before, tc, after});
  r.times = sorted_unique(times);
  pde::ModelParams p = p_in;
  p.integrator.store_steps = false;
  p.integrator.sample_times = r.times;
  std::erase_if(p.integrator.sample_times, [](double t) { return !(t > 0); });
  const double t_end = r.times.back() + 0.01 * tc;
  auto run = pde::continue_past_blowup(p, t_end, seed);
  for (double t : r.times) r.fields.push_back(pde::from_state(pde::state_at(run.trajectory, t), p.n_modes));
  auto field_at = [&](double t) {
    return r.fields[std::find(r.times.begin(), r.times.end(), t) - r.times.begin()];
  };
  r.slope_at_tc = loglog_slope(field_at(tc), 10, std::min(60, p.n_modes));
  std::tie(r.residual_before, r.rate_before) = exponential_fit(field_at(before));
  std::tie(r.residual_after, r.rate_after) = exponential_fit(field_at(after));
  return r;
}

void write_snapshots_csv(std::ostream& os, const SnapshotsResult& r) {
  os << "t,k,abs_c,local_law\n";
  os.precision(17);
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const bool at_tc = r.times[i] == r.t_c;
    for (int k = 0; k <= r.fields[i].n_modes(); ++k) {
      os << r.times[i] << ',' << k << ',' << std::abs(r.fields[i][k]) << ',';
      put(os, at_tc ? or_nan([&] { return asymptotics::coeff_decay_local(k); }) : kNaN);
      os << '\n';
    }
  }
}

// ---- flatness ---------------------------------------------------------------

FlatnessResult run_flatness(const pde::ModelParams& p_in) {
  pde::ModelParams p = p_in;
  p.integrator.store_steps = true;
  p.integrator.sample_times.clear();
  auto sol = pde::solve_to_blowup(p, {false});
  FlatnessResult r;
  r.t_c = sol.report.t_c;
  r.f_min = std::numeric_limits<double>::infinity();
  const auto& tr = sol.trajectory;
  for (std::size_t i = 0; i + 1 < tr.size(); ++i) {
    const double t = tr.times[i];
    auto v = pde::from_state(tr.states[i], p.n_modes);
    v.project_even_real();
    const auto f = pde::flatness(v);
    const double fa = asymptotics::flatness_approx(t, p.alpha, p.epsilon);
    const double rel = std::abs(fa - f.pointwise) / std::abs(f.pointwise);
    r.rows.push_back({t, f.pointwise, f.from_coeffs, fa, rel});
    if (t <= 0.9 * r.t_c) r.max_rel_err_early = std::max(r.max_rel_err_early, rel);
    if (f.pointwise < r.f_min) {
      r.f_min = f.pointwise;
      r.t_min = t;
    }
  }
  return r;
}

void write_flatness_csv(std::ostream& os, const FlatnessResult& r) {
  os << "t,f_solver,f_coeffs,f_approx,rel_err\n";
  os.precision(17);
  for (const auto& row : r.rows)
    os << row.t << ',' << row.f_solver << ',' << row.f_coeffs << ',' << row.f_approx << ','
       << row.rel_err << '\n';
}

}  // namespace blowup::experiments
