#include "blowup/pde.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "blowup/asymptotics.hpp"
#include "blowup/error.hpp"
#include "blowup/reduced.hpp"

namespace blowup::pde {

using spectral::cplx;
using spectral::Parity;

void ModelParams::validate() const {
  if (!(alpha > 0)) throw DomainError("alpha must be positive");
  if (!(epsilon >= 0) || !(epsilon < alpha)) throw DomainError("need 0 <= epsilon < alpha");
  if (n_modes < 8) throw DomainError("n_modes must be at least 8");
  if (!(division_floor > 0)) throw DomainError("division floor must be positive");
  integrator.validate();
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"alpha", p.alpha},
                     {"epsilon", p.epsilon},
                     {"n_modes", p.n_modes},
                     {"division_floor", p.division_floor},
                     {"integrator", p.integrator}};
}

FourierField initial_field(const ModelParams& p) {
  p.validate();
  FourierField f(p.n_modes, Parity::even_real);
  f[0] = p.alpha;
  f[1] = f[-1] = -0.5 * p.epsilon;
  return f;
}

FourierField initial_field(const ModelParams& p, const std::function<double(double)>& V, int grid) {
  p.validate();
  const int m = grid > 0 ? grid : spectral::padded_size(p.n_modes);
  GridValues g{GridValues::nodes(m), Eigen::VectorXcd(m)};
  for (int j = 0; j < m; ++j) g.values[j] = p.alpha + p.epsilon * V(g.points[j]);
  FourierField f = spectral::analyze(g, p.n_modes);
  if (f.satisfies_even_real(1e-13)) f.project_even_real();
  return f;
}

FourierField v_rhs(const FourierField& v, double floor) {
  FourierField vx = spectral::differentiate(v, 1);
  FourierField q = spectral::divide(spectral::convolve(vx, vx), v, floor);
  FourierField r = spectral::differentiate(v, 2);
  r.coeffs() -= 2.0 * q.coeffs();
  r[0] -= 1.0;
  if (v.parity() == Parity::even_real) r.project_even_real();
  return r;
}

ode::State to_state(const FourierField& f) { return f.coeffs(); }

FourierField from_state(const ode::State& y, int n_modes, Parity parity) {
  return FourierField(n_modes, y, parity);
}

cplx value_at_zero(const ode::State& y) { return y.sum(); }

cplx value_at_pi(const ode::State& y, int n_modes) {
  cplx s = 0;
  for (int k = -n_modes; k <= n_modes; ++k) s += ((k & 1) ? -1.0 : 1.0) * y[k + n_modes];
  return s;
}

void to_json(nlohmann::json& j, const BlowupReport& r) {
  j = nlohmann::json{{"t_c", r.t_c},
                     {"t_hat", r.t_hat},
                     {"t_tilde", r.t_tilde},
                     {"t_c_prime", r.t_c_prime},
                     {"delta_hat", r.delta_hat},
                     {"delta_tilde", r.delta_tilde},
                     {"delta_prime", r.delta_prime}};
}

namespace {

ode::Rhs make_rhs(const ModelParams& p) {
  const int n = p.n_modes;
  const double floor = p.division_floor;
  return [n, floor](cplx, const ode::State& y) {
    return to_state(v_rhs(from_state(y, n), floor));
  };
}

// (f(y) + conj f(conj y)) / 2: equal to f up to roundoff, but exactly
// conjugation-equivariant, so FFT roundoff cannot pick a branch and the
// +eta / -eta runs stay exact conjugates.
ode::Rhs make_symmetric_rhs(const ModelParams& p) {
  const int n = p.n_modes;
  const double floor = p.division_floor;
  return [n, floor](cplx, const ode::State& y) {
    ode::State a = to_state(v_rhs(from_state(y, n), floor));
    ode::State b = to_state(v_rhs(from_state(y.conjugate(), n), floor));
    return ode::State(0.5 * (a + b.conjugate()));
  };
}

ode::EventSpec core_event(bool terminal) {
  ode::EventSpec ev;
  ev.observable = [](double, const ode::State& y) { return value_at_zero(y).real(); };
  ev.direction = ode::Direction::decreasing;
  ev.terminal = terminal;
  return ev;
}

int branch_sign_after(const std::vector<double>& times, const std::vector<ode::State>& states,
                      double t_c) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] <= t_c) continue;
    const double im = value_at_zero(states[i]).imag();
    if (std::abs(im) >= 1e-10) return im > 0 ? 1 : -1;
  }
  return 0;
}

}  // namespace

BlowupSolution solve_to_blowup(const ModelParams& p, const SolveOptions& opt) {
  p.validate();
  auto res = ode::integrate(make_rhs(p), to_state(initial_field(p)), 0.0, 2 * p.alpha, p.integrator,
                            {core_event(true)});
  if (!res.event) throw Error("no blow-up detected before t = 2 alpha");
  BlowupSolution sol{std::move(res.trajectory), {}};
  BlowupReport& r = sol.report;
  r.t_c = res.event->t;
  r.state_at_tc = from_state(res.event->state, p.n_modes);
  if (opt.with_estimates) {
    r.t_hat = asymptotics::t_hat(p.alpha, p.epsilon);
    r.t_tilde = asymptotics::t_tilde(p.alpha, p.epsilon);
    r.t_c_prime = reduced::solve_two_mode(reduced::TwoModeKind::fourier, p.alpha, p.epsilon).t_c_prime;
    r.delta_hat = r.t_hat - r.t_c;
    r.delta_tilde = r.t_tilde - r.t_c;
    r.delta_prime = r.t_c_prime - r.t_c;
  }
  return sol;
}

UField u_from_v(const FourierField& v, double floor) {
  const int m = spectral::padded_size(v.n_modes());
  GridValues g = spectral::synthesize(v, m);
  Eigen::Index jmin;
  const double vmin = g.values.cwiseAbs().minCoeff(&jmin);
  if (!(vmin >= floor)) throw DivisorTooSmall(vmin, g.points[jmin]);
  g.values = g.values.cwiseInverse();
  FourierField a = spectral::analyze(g, v.n_modes());
  if (v.parity() == Parity::even_real) a.project_even_real();
  return {std::move(g), std::move(a)};
}

Flatness flatness(const FourierField& v) {
  const double v0 = value_at_zero(v.coeffs()).real();
  const double vpi = value_at_pi(v.coeffs(), v.n_modes()).real();
  if (v0 == 0 || vpi == 0) throw DivisorTooSmall(0.0, v0 == 0 ? 0.0 : std::numbers::pi);
  const FourierField a = u_from_v(v).coeffs;
  double odd = 0;
  for (int k = 1; k <= a.n_modes(); k += 2) odd += a[k].real() + a[-k].real();
  return {1 / v0 - 1 / vpi, 2 * odd};
}

FourierField seed_imaginary_noise(const FourierField& f, double amplitude, std::uint64_t seed,
                                  bool negate) {
  if (!(amplitude >= 0)) throw DomainError("noise amplitude must be non-negative");
  if (amplitude == 0) return f;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  FourierField g = f;
  const double sign = negate ? -1.0 : 1.0;
  for (int k = 0; k <= f.n_modes(); ++k) {
    const cplx r(0, sign * u(rng));
    g[k] += r;
    if (k > 0) g[-k] += r;
  }
  g.set_parity(Parity::general_complex);
  return g;
}

ContinuationResult continue_past_blowup(const ModelParams& p, double t_end, std::uint64_t seed,
                                        const ContinueOptions& opt) {
  p.validate();
  if (!(t_end > 0)) throw DomainError("t_end must be positive");
  FourierField v0 = seed_imaginary_noise(initial_field(p), opt.amplitude, seed, opt.negate);
  auto res = ode::integrate(make_symmetric_rhs(p), to_state(v0), 0.0, t_end, p.integrator, {core_event(false)});
  ContinuationResult out;
  out.method = ContinuationMethod::noise_seeded;
  out.rng_seed = seed;
  out.t_c = res.crossings.empty() ? std::numeric_limits<double>::quiet_NaN() : res.crossings.front().t;
  out.trajectory = std::move(res.trajectory);
  if (!res.crossings.empty())
    out.branch_sign = branch_sign_after(out.trajectory.times, out.trajectory.states, out.t_c);
  return out;
}

ContinuationResult continue_complex_path(const ModelParams& p, double radius, double t_end,
                                         const PathOptions& opt) {
  p.validate();
  if (!(radius > 0)) throw DomainError("radius must be positive");
  double c = 0;
  if (opt.center) c = *opt.center;
  else if (p.epsilon == 0) c = p.alpha;
  else {
    ModelParams q = p;
    q.integrator.store_steps = false;
    q.integrator.sample_times.clear();
    c = solve_to_blowup(q, {false}).report.t_c;
  }
  const double a = c - radius, b = c + radius;
  if (!(a > 0)) throw DomainError("radius reaches back past t = 0");

  ode::ComplexPath path = ode::ComplexPath::line(0.0, t_end <= a ? t_end : a);
  const bool around = t_end > a;
  if (around) {
    if (!(t_end > b)) throw DomainError("t_end falls inside the semicircle");
    path.then_arc(c, radius, opt.upper ? std::numbers::pi : -std::numbers::pi, 0.0);
    path.then_line(t_end);
  }

  ode::IntegratorConfig cfg = p.integrator;
  cfg.sample_times.clear();
  for (double t : p.integrator.sample_times) {
    if (t > 0 && t < std::min(a, t_end)) cfg.sample_times.push_back(t / std::min(a, t_end));
    else if (around && t > b && t < t_end) cfg.sample_times.push_back(2 + (t - b) / (t_end - b));
  }
  ContinuationResult out;
  out.method = ContinuationMethod::complex_path;
  out.t_c = c;
  out.trajectory = ode::integrate_path(make_symmetric_rhs(p), to_state(initial_field(p)), path, cfg);
  if (around) {
    std::vector<double> treal;
    for (auto z : out.trajectory.path_times) treal.push_back(z.imag() == 0 ? z.real() : c);
    out.branch_sign = branch_sign_after(treal, out.trajectory.states, c);
  }
  return out;
}

const ode::State& state_at(const ode::Trajectory& tr, double t, double tol) {
  const double scale = tol * std::max(1.0, std::abs(t));
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const bool hit = tr.path_times.empty() ? std::abs(tr.times[i] - t) <= scale
                                           : std::abs(tr.path_times[i] - cplx(t, 0)) <= scale;
    if (hit) return tr.states[i];
  }
  throw DomainError("no stored state at t = " + std::to_string(t));
}

}  // namespace blowup::pde
