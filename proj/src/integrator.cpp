#include "blowup/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "blowup/error.hpp"

namespace blowup::ode {

namespace {

// Dormand–Prince 5(4).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output (Hairer, Nørsett & Wanner)
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Stages {
  State k[7];
  State y5;
};

// k[0] must be f(t, y) on entry.
template <class F>
void stages(const F& f, double t, const State& y, double h, Stages& s) {
  const State* k = s.k;
  s.k[1] = f(t + c2 * h, y + h * a21 * k[0]);
  s.k[2] = f(t + c3 * h, y + h * (a31 * k[0] + a32 * k[1]));
  s.k[3] = f(t + c4 * h, y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
  s.k[4] = f(t + c5 * h, y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
  s.k[5] = f(t + h, y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]));
  s.y5 = y + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] + a75 * k[4] + a76 * k[5]);
  s.k[6] = f(t + h, s.y5);
}

DenseSegment make_segment(double t, const State& y, double h, const Stages& s) {
  DenseSegment seg;
  seg.t0 = t;
  seg.h = h;
  seg.r1 = y;
  seg.r2 = s.y5 - y;
  seg.r3 = h * s.k[0] - seg.r2;
  seg.r4 = seg.r2 - h * s.k[6] - seg.r3;
  seg.r5 = h * (d1 * s.k[0] + d3 * s.k[2] + d4 * s.k[3] + d5 * s.k[4] + d6 * s.k[5] + d7 * s.k[6]);
  return seg;
}

bool crosses(double g0, double g1, Direction d) {
  switch (d) {
    case Direction::decreasing: return g0 > 0 && g1 <= 0;
    case Direction::increasing: return g0 < 0 && g1 >= 0;
    case Direction::any: return (g0 > 0 && g1 <= 0) || (g0 < 0 && g1 >= 0);
  }
  return false;
}

// Bracketed root of g on [a, b]: a few bisections, then Illinois-modified
// secant until the bracket collapses to roundoff. Returns the endpoint with
// the smaller residual.
double refine_root(const std::function<double(double)>& g, double a, double ga, double b, double gb,
                   double root_tol) {
  if (gb == 0) return b;
  for (int i = 0; i < 4; ++i) {
    double m = 0.5 * (a + b), gm = g(m);
    if (gm == 0) return m;
    if ((gm > 0) == (ga > 0)) { a = m; ga = gm; } else { b = m; gb = gm; }
  }
  double fa = ga, fb = gb;  // weighted values for Illinois
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double width_goal = std::max(1e-3 * root_tol, 4 * 2.2e-16 * std::max(std::abs(a), std::abs(b)));
    if (b - a <= width_goal) break;
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    double gc = g(c);
    if (gc == 0) return c;
    if ((gc > 0) == (gb > 0)) {
      b = c; gb = gc; fb = gc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c; ga = gc; fa = gc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
  }
  return std::abs(ga) < std::abs(gb) ? a : b;
}

double error_norm(const State& y, const State& ynew, const State& err, double atol, double rtol) {
  double e = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
    e = std::max(e, std::abs(err[i]) / sc);
  }
  return e;
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0) || !(atol > 0)) throw DomainError("rtol and atol must be positive");
  if (!(h_min > 0) || !(h_min <= h_init) || !(h_init <= h_max))
    throw DomainError("need 0 < h_min <= h_init <= h_max");
  if (max_steps <= 0) throw DomainError("max_steps must be positive");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()))
    throw DomainError("sample_times must be sorted");
}

void to_json(nlohmann::json& j, const IntegratorConfig& c) {
  j = nlohmann::json{{"rtol", c.rtol}, {"atol", c.atol}, {"h_init", c.h_init},
                     {"h_min", c.h_min}, {"max_steps", c.max_steps}};
  if (std::isfinite(c.h_max)) j["h_max"] = c.h_max;
  else j["h_max"] = "inf";
}

State DenseSegment::eval(double t) const {
  const double th = (t - t0) / h, th1 = 1.0 - th;
  return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

State Trajectory::evaluate(double t) const {
  if (dense_segments.empty()) throw DomainError("trajectory has no dense output");
  auto it = std::upper_bound(dense_segments.begin(), dense_segments.end(), t,
                             [](double v, const DenseSegment& s) { return v < s.t0; });
  if (it == dense_segments.begin()) {
    if (t < dense_segments.front().t0 - 1e-14) throw DomainError("time before trajectory start");
    return dense_segments.front().eval(t);
  }
  --it;
  if (t > it->t0 + it->h * (1 + 1e-12) && std::next(it) == dense_segments.end())
    throw DomainError("time after trajectory end");
  return it->eval(t);
}

DenseSegment single_step(const Rhs& rhs, double t0, const State& y0, double h) {
  auto f = [&](double t, const State& y) { return rhs(cplx(t, 0), y); };
  Stages s;
  s.k[0] = f(t0, y0);
  stages(f, t0, y0, h, s);
  return make_segment(t0, y0, h, s);
}

IntegrationResult integrate(const Rhs& rhs, const State& y0, double t0, double t1,
                            const IntegratorConfig& cfg, const std::vector<EventSpec>& events) {
  cfg.validate();
  if (!(t1 >= t0)) throw DomainError("integrate requires t1 >= t0");
  auto f = [&](double t, const State& y) { return rhs(cplx(t, 0), y); };

  IntegrationResult res;
  Trajectory& tr = res.trajectory;
  double t = t0;
  State y = y0;
  Stages s;
  s.k[0] = f(t, y);
  if (!s.k[0].allFinite()) throw NonFiniteRhs(t);

  auto record = [&](double tt, const State& yy) {
    tr.times.push_back(tt);
    tr.states.push_back(yy);
  };
  record(t, y);

  std::vector<double> g(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    g[i] = events[i].observable(t, y);
    if (g[i] == 0 && events[i].terminal) {
      res.event = EventHit{t, y, i};
      return res;
    }
  }

  auto sample = cfg.sample_times.begin();
  while (sample != cfg.sample_times.end() && *sample <= t0) ++sample;

  double h = std::min({cfg.h_init, cfg.h_max, t1 - t0});
  double err_old = 1e-4;
  bool last_rejected = false;
  constexpr double beta = 0.04, alpha_pi = 0.2 - 0.75 * beta;

  while (t < t1) {
    if (tr.accepted_steps + tr.rejected_steps >= cfg.max_steps) throw MaxStepsExceeded(t, y);
    if (t + 1.01 * h >= t1) h = t1 - t;

    bool bad = false, nonfinite = false;
    try {
      stages(f, t, y, h, s);
      for (int i = 1; i < 7 && !bad; ++i)
        if (!s.k[i].allFinite()) bad = nonfinite = true;
    } catch (const DivisorTooSmall&) {
      bad = true;
    }
    double err = 0;
    if (!bad) {
      State e = h * (e1 * s.k[0] + e3 * s.k[2] + e4 * s.k[3] + e5 * s.k[4] + e6 * s.k[5] + e7 * s.k[6]);
      err = error_norm(y, s.y5, e, cfg.atol, cfg.rtol);
      if (!std::isfinite(err)) bad = nonfinite = true;
    }
    if (bad || err > 1.0) {
      ++tr.rejected_steps;
      h *= bad ? 0.25 : std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
      if (h < cfg.h_min) {
        if (cfg.stop_on_underflow) {
          res.underflow = true;
          return res;
        }
        if (nonfinite) throw NonFiniteRhs(t);
        throw StiffnessOrSingularity(t, y);
      }
      continue;
    }

    // accepted
    ++tr.accepted_steps;
    const double tnew = t + h;
    DenseSegment seg = make_segment(t, y, h, s);
    auto on_seg = [&](double tt) { return seg.eval(tt); };

    // events
    double t_stop = tnew;
    std::optional<std::size_t> fired;
    std::vector<double> gnew(events.size());
    std::vector<EventHit> pending;
    for (std::size_t i = 0; i < events.size(); ++i) {
      gnew[i] = events[i].observable(tnew, s.y5);
      if (!crosses(g[i], gnew[i], events[i].direction)) continue;
      auto gi = [&](double tt) { return events[i].observable(tt, on_seg(tt)); };
      double root = refine_root(gi, t, g[i], tnew, gnew[i], events[i].root_tol);
      if (events[i].terminal) {
        if (root <= t_stop) { t_stop = root; fired = i; }
      } else {
        pending.push_back(EventHit{root, on_seg(root), i});
      }
    }
    std::sort(pending.begin(), pending.end(), [](auto& a, auto& b) { return a.t < b.t; });
    for (auto& p : pending)
      if (!fired || p.t <= t_stop) res.crossings.push_back(std::move(p));

    // samples strictly inside the step, before any stop
    while (sample != cfg.sample_times.end() && *sample < t_stop) {
      if (*sample > t) record(*sample, on_seg(*sample));
      ++sample;
    }
    if (cfg.store_dense) tr.dense_segments.push_back(seg);

    if (fired) {
      State ys = on_seg(t_stop);
      record(t_stop, ys);
      res.event = EventHit{t_stop, std::move(ys), *fired};
      return res;
    }

    const bool hit_sample = sample != cfg.sample_times.end() && *sample == tnew;
    if (hit_sample) ++sample;
    if (cfg.store_steps || hit_sample || tnew >= t1) record(tnew, s.y5);

    t = tnew;
    y = s.y5;
    s.k[0] = s.k[6];
    g = gnew;

    double fac = std::pow(std::max(err, 1e-10), -alpha_pi) * std::pow(err_old, beta);
    fac = std::clamp(0.9 * fac, 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    err_old = std::max(err, 1e-4);
    last_rejected = false;
    h = std::min(h * fac, cfg.h_max);
  }
  return res;
}

cplx ComplexPath::Piece::point(double s) const {
  if (!arc) return a + s * (b - a);
  const double th = theta0 + s * (theta1 - theta0);
  return center + radius * std::polar(1.0, th);
}

cplx ComplexPath::Piece::derivative(double s) const {
  if (!arc) return b - a;
  const double th = theta0 + s * (theta1 - theta0);
  return radius * (theta1 - theta0) * cplx(0, 1) * std::polar(1.0, th);
}

ComplexPath ComplexPath::line(cplx a, cplx b) {
  ComplexPath p;
  Piece pc;
  pc.a = a;
  pc.b = b;
  p.pieces_.push_back(pc);
  return p;
}

ComplexPath& ComplexPath::then_line(cplx b) {
  Piece pc;
  pc.a = end();
  pc.b = b;
  pieces_.push_back(pc);
  return *this;
}

ComplexPath& ComplexPath::then_arc(cplx center, double radius, double theta0, double theta1) {
  Piece pc;
  pc.arc = true;
  pc.center = center;
  pc.radius = radius;
  pc.theta0 = theta0;
  pc.theta1 = theta1;
  if (!pieces_.empty() && std::abs(pc.point(0) - end()) > 1e-12 * (1 + std::abs(end())))
    throw DomainError("arc does not start where the path ends");
  pieces_.push_back(pc);
  return *this;
}

cplx ComplexPath::start() const {
  if (pieces_.empty()) throw DomainError("empty path");
  return pieces_.front().point(0);
}

cplx ComplexPath::end() const {
  if (pieces_.empty()) throw DomainError("empty path");
  return pieces_.back().point(1);
}

Trajectory integrate_path(const Rhs& rhs, const State& y0, const ComplexPath& path,
                          const IntegratorConfig& cfg) {
  Trajectory out;
  State y = y0;
  const auto& pieces = path.pieces();
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& pc = pieces[i];
    Rhs g = [&](cplx s, const State& yy) -> State {
      return rhs(pc.point(s.real()), yy) * pc.derivative(s.real());
    };
    IntegratorConfig c = cfg;
    c.sample_times.clear();
    for (double sp : cfg.sample_times)
      if (sp > double(i) && sp < double(i + 1)) c.sample_times.push_back(sp - double(i));
    c.h_init = std::min(cfg.h_init, 1.0);
    c.h_max = std::min(cfg.h_max, 1.0);
    if (c.h_min > c.h_init) c.h_min = c.h_init;
    Trajectory part = integrate(g, y, 0.0, 1.0, c).trajectory;
    for (std::size_t j = (i == 0 ? 0 : 1); j < part.size(); ++j) {
      out.times.push_back(double(i) + part.times[j]);
      out.path_times.push_back(pc.point(part.times[j]));
      out.states.push_back(part.states[j]);
    }
    for (auto seg : part.dense_segments) {
      seg.t0 += double(i);
      out.dense_segments.push_back(std::move(seg));
    }
    out.accepted_steps += part.accepted_steps;
    out.rejected_steps += part.rejected_steps;
    y = part.states.back();
  }
  return out;
}

State integrate_fixed(const Rhs& rhs, const State& y0, double t0, double t1, int n_steps) {
  if (n_steps <= 0) throw DomainError("n_steps must be positive");
  const double h = (t1 - t0) / n_steps;
  State y = y0;
  for (int i = 0; i < n_steps; ++i) {
    DenseSegment seg = single_step(rhs, t0 + i * h, y, h);
    y = seg.r1 + seg.r2;
  }
  return y;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw DomainError("need at least two (h, err) pairs");
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::log(h[i]), yv = std::log(err[i]);
    sx += x; sy += yv; sxx += x * x; sxy += x * yv;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

OrderReport order_check(const Rhs& rhs, const State& y0, double t0, double t1,
                        const std::function<State(double)>& exact, const std::vector<double>& hs) {
  OrderReport rep;
  const State ref = exact(t1);
  for (double h : hs) {
    int n = static_cast<int>(std::lround((t1 - t0) / h));
    State y = integrate_fixed(rhs, y0, t0, t1, n);
    rep.h.push_back((t1 - t0) / n);
    rep.err.push_back((y - ref).cwiseAbs().maxCoeff());
  }
  rep.order = fitted_order(rep.h, rep.err);
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const bool path = !traj.path_times.empty();
  os << (path ? "s,t_re,t_im" : "t");
  const Eigen::Index dim = traj.states.empty() ? 0 : traj.states.front().size();
  for (Eigen::Index i = 0; i < dim; ++i) os << ",re" << i << ",im" << i;
  os << '\n';
  os.precision(17);
  for (std::size_t r = 0; r < traj.size(); ++r) {
    os << traj.times[r];
    if (path) os << ',' << traj.path_times[r].real() << ',' << traj.path_times[r].imag();
    for (Eigen::Index i = 0; i < dim; ++i)
      os << ',' << traj.states[r][i].real() << ',' << traj.states[r][i].imag();
    os << '\n';
  }
}

}  // namespace blowup::ode
