#include "blowup/reduced.hpp"

#include <cmath>
#include <limits>

#include "blowup/error.hpp"

namespace blowup::reduced {

namespace {

ode::State pack(TwoModeState s) {
  ode::State y(2);
  y << s.a, s.b;
  return y;
}

TwoModeState unpack(const ode::State& y) { return {y[0].real(), y[1].real()}; }

double observable(TwoModeKind kind, TwoModeState s) {
  return kind == TwoModeKind::fourier ? s.a - s.b : s.a;
}

}  // namespace

TwoModeKind kind_from_string(const std::string& s) {
  if (s == "fourier") return TwoModeKind::fourier;
  if (s == "taylor") return TwoModeKind::taylor;
  throw DomainError("unknown two-mode kind '" + s + "'");
}

TwoModeState fourier_two_mode_rhs(TwoModeState s) {
  const double a = s.a, b = s.b;
  const double den = b * b - 2 * a * a;
  if (std::abs(den) < 1e-14) throw DomainError("two-mode denominator b^2 - 2a^2 vanishes");
  return {(2 * a * b * b + 2 * a * a - b * b) / den, b * (2 * a * a - 3 * b * b) / den};
}

TwoModeState taylor_two_mode_rhs(TwoModeState s) {
  if (!(s.a > 0)) throw DomainError("Taylor two-mode system needs a > 0");
  return {2 * s.b - 1, -8 * s.b * s.b / s.a};
}

TwoModeState TwoModeSolution::at(std::size_t i) const { return unpack(trajectory.states.at(i)); }

TwoModeSolution solve_two_mode(TwoModeKind kind, double alpha, double epsilon,
                               const ode::IntegratorConfig& cfg_in) {
  if (!(alpha > 0) || !(epsilon >= 0) || !(epsilon < alpha))
    throw DomainError("two-mode system needs 0 <= epsilon < alpha");
  ode::Rhs rhs = [kind](ode::cplx, const ode::State& y) -> ode::State {
    TwoModeState s = unpack(y);
    // Fourier: for small eps the singular layer near a = 0 is only O(eps) wide
    // and a large step can jump it; states past b^2 = 2a^2 are rejected outright.
    if (kind == TwoModeKind::fourier && !(s.a > 0 && s.b * s.b < 2 * s.a * s.a))
      return ode::State::Constant(2, std::numeric_limits<double>::quiet_NaN());
    TwoModeState d;
    try {
      // Taylor: trial stages may overshoot a = 0 slightly; the formula is fine there
      d = kind == TwoModeKind::fourier ? fourier_two_mode_rhs(s)
          : s.a != 0                   ? TwoModeState{2 * s.b - 1, -8 * s.b * s.b / s.a}
                                       : throw DomainError("a = 0");
    } catch (const DomainError&) {
      // outside the model's region: let the integrator reject the step
      return ode::State::Constant(2, std::numeric_limits<double>::quiet_NaN());
    }
    return pack(d);
  };
  ode::EventSpec ev;
  ev.observable = [kind](double, const ode::State& y) { return observable(kind, unpack(y)); };
  ev.direction = ode::Direction::decreasing;
  // Fourier: a = b is passed on the way; the system itself only breaks down
  // where b^2 = 2a^2, which is where a step-size underflow stops us.
  ev.terminal = kind == TwoModeKind::taylor;

  ode::IntegratorConfig cfg = cfg_in;
  cfg.store_dense = true;
  cfg.stop_on_underflow = true;
  const double t_end = kind == TwoModeKind::fourier ? 2 * alpha : 2 * alpha * (1 + 2 * epsilon) + 1;
  auto res = ode::integrate(rhs, pack({alpha, epsilon}), 0.0, t_end, cfg, {ev});

  double t_ab, t_stop;
  if (kind == TwoModeKind::fourier) {
    if (res.crossings.empty() || !res.underflow)
      throw Error("Fourier two-mode system did not reach b^2 = 2a^2 before t = " + std::to_string(t_end));
    t_ab = res.crossings.front().t;
    t_stop = res.trajectory.times.back();
  } else {
    if (res.event)
      t_stop = res.event->t;
    else if (res.underflow)
      t_stop = res.trajectory.times.back();
    else
      throw Error("Taylor two-mode system did not reach a = 0 before t = " + std::to_string(t_end));
    t_ab = t_stop;
  }
  return TwoModeSolution{kind, alpha, epsilon, std::move(res.trajectory), t_stop, t_ab};
}

double taylor_conserved_quantity(TwoModeState s) {
  if (!(s.a > 0) || !(s.b > 0)) throw DomainError("first integral needs a, b > 0");
  return 2 * std::log(s.b) + 1 / s.b + 8 * std::log(s.a);
}

TwoModeState NearBlowupFit::predict(double t) const {
  const double s = t_c - t;
  if (kind == TwoModeKind::fourier) return {constant + (1 + 2 * constant) * s, constant - constant * s};
  return {s, 1.0 / (8 * (-std::log(s) + constant))};
}

NearBlowupFit near_blowup_forms(const TwoModeSolution& sol, double match_level) {
  if (!(match_level >= 1e-4 && match_level <= 1e-3))
    throw FitError("match level must lie in [1e-4, 1e-3]");
  const auto& tr = sol.trajectory;
  if (tr.dense_segments.empty()) throw FitError("two-mode solution has no dense output");
  auto obs = [&](double t) { return observable(sol.kind, unpack(tr.evaluate(t))); };

  // First step that brings the observable below the match level.
  std::size_t i = 1;
  while (i < tr.size() && !(observable(sol.kind, sol.at(i)) < match_level)) ++i;
  if (i == tr.size() || tr.times[i] > sol.t_ab)
    throw FitError("trajectory never comes within the fit window of its event");
  double lo = tr.times[i - 1], hi = tr.times[i];
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (obs(mid) > match_level ? lo : hi) = mid;
  }
  const double t_fit = 0.5 * (lo + hi);
  const TwoModeState s = unpack(tr.evaluate(t_fit));
  const double dt = sol.t_ab - t_fit;

  NearBlowupFit fit{sol.kind, sol.t_ab, 0, t_fit, observable(sol.kind, s)};
  if (sol.kind == TwoModeKind::fourier)
    fit.constant = s.b / (1 - dt);
  else
    fit.constant = 1 / (8 * s.b) + std::log(dt);
  return fit;
}

void write_phase_plane_csv(std::ostream& os, TwoModeKind kind, double a_lo, double a_hi, int na,
                           double b_lo, double b_hi, int nb) {
  if (na < 2 || nb < 2) throw DomainError("lattice needs at least 2 points per axis");
  os << "a,b,da_dt,db_dt\n";
  os.precision(17);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      TwoModeState s{a_lo + (a_hi - a_lo) * i / (na - 1), b_lo + (b_hi - b_lo) * j / (nb - 1)};
      os << s.a << ',' << s.b << ',';
      try {
        auto d = kind == TwoModeKind::fourier ? fourier_two_mode_rhs(s) : taylor_two_mode_rhs(s);
        os << d.a << ',' << d.b << '\n';
      } catch (const DomainError&) {
        os << "nan,nan\n";
      }
    }
  }
}

}  // namespace blowup::reduced
