#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "blowup/error.hpp"
#include "blowup/integrator.hpp"

using namespace blowup;
using namespace blowup::ode;
using Catch::Approx;

namespace {

State scalar(cplx v) {
  State s(1);
  s[0] = v;
  return s;
}

const Rhs decay = [](cplx, const State& y) -> State { return -y; };
const Rhs growth = [](cplx, const State& y) -> State { return y; };

}  // namespace

TEST_CASE("exponential decay", "[integrator]") {
  auto r = integrate(decay, scalar(1.0), 0.0, 1.0, {});
  CHECK(r.trajectory.times.back() == 1.0);
  CHECK(std::abs(r.trajectory.back()[0] - std::exp(-1.0)) < 1e-11);
  CHECK(r.trajectory.back()[0].imag() == 0.0);
  CHECK_FALSE(r.event);
  CHECK_FALSE(r.underflow);
}

TEST_CASE("tighter tolerance never increases the error", "[integrator]") {
  double prev = 1.0;
  for (double tol : {1e-6, 1e-8, 1e-10, 1e-12}) {
    IntegratorConfig c;
    c.rtol = c.atol = tol;
    auto r = integrate(decay, scalar(1.0), 0.0, 2.0, c);
    double e = std::abs(r.trajectory.back()[0] - std::exp(-2.0));
    CHECK(e <= prev);
    CHECK(e < 50 * tol);
    prev = e;
  }
}

TEST_CASE("events", "[integrator]") {
  SECTION("already on the event surface") {
    Rhs zero = [](cplx, const State& y) -> State { return State::Zero(y.size()); };
    EventSpec ev{[](double, const State& y) { return y[0].real() - 1.0; }};
    auto r = integrate(zero, scalar(1.0), 0.0, 1.0, {}, {ev});
    REQUIRE(r.event);
    CHECK(r.event->t == 0.0);
    CHECK(r.trajectory.size() == 1);
  }
  SECTION("linear decay hits zero at alpha") {
    Rhs lin = [](cplx, const State& y) -> State { return State::Constant(y.size(), -1.0); };
    EventSpec ev{[](double, const State& y) { return y[0].real(); }, Direction::decreasing};
    auto r = integrate(lin, scalar(0.25), 0.0, 1.0, {}, {ev});
    REQUIRE(r.event);
    CHECK(std::abs(r.event->t - 0.25) < 1e-13);
    CHECK(r.trajectory.times.back() == r.event->t);
    CHECK(std::abs(ev.observable(r.event->t, r.event->state)) <= 10 * ev.root_tol);
  }
  SECTION("non-terminal crossings with a direction filter") {
    // y' = cos t: y = sin t crosses zero at pi (down) and 2 pi (up)
    Rhs c = [](cplx t, const State& y) -> State { return State::Constant(y.size(), std::cos(t)); };
    EventSpec down{[](double, const State& y) { return y[0].real(); }, Direction::decreasing};
    down.terminal = false;
    EventSpec any = down;
    any.direction = Direction::any;
    auto r = integrate(c, scalar(0.0), 0.0, 7.0, {}, {down, any});
    CHECK_FALSE(r.event);
    REQUIRE(r.crossings.size() == 3);
    CHECK(r.crossings[0].t == Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(r.crossings[1].t == Approx(std::numbers::pi).epsilon(1e-12));
    CHECK(r.crossings[2].t == Approx(2 * std::numbers::pi).epsilon(1e-12));
    CHECK(r.crossings[2].index == 1);
    CHECK(r.trajectory.times.back() == 7.0);
  }
}

TEST_CASE("sample times and dense output", "[integrator]") {
  Rhs c = [](cplx t, const State& y) -> State { return State::Constant(y.size(), std::cos(t)); };
  IntegratorConfig cfg;
  cfg.store_steps = false;
  cfg.store_dense = true;
  cfg.sample_times = {0.1, 0.5, 1.234, 2.0};
  auto r = integrate(c, scalar(0.0), 0.0, 2.0, cfg);
  const auto& tr = r.trajectory;
  REQUIRE(tr.size() == 5);  // t0 plus four samples (2.0 is also t1)
  for (std::size_t i = 1; i < tr.size(); ++i) {
    CHECK(tr.times[i] == cfg.sample_times[i - 1]);
    CHECK(std::abs(tr.states[i][0] - std::sin(tr.times[i])) < 1e-11);
  }
  for (double t : {0.05, 0.77, 1.5, 1.999}) CHECK(std::abs(tr.evaluate(t)[0] - std::sin(t)) < 1e-11);
  CHECK_THROWS_AS(tr.evaluate(2.5), DomainError);

  // Interpolant reproduces both step ends.
  for (const auto& seg : tr.dense_segments) {
    CHECK(std::abs(seg.eval(seg.t0 + seg.h)[0] - std::sin(seg.t0 + seg.h)) < 1e-11);
  }
}

TEST_CASE("dense output is at least fourth order", "[integrator]") {
  // y' = y cos t, y = exp(sin t); interpolant error at mid-step
  Rhs f = [](cplx t, const State& y) -> State { return y * std::cos(t); };
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025}, err;
  for (double h : hs) {
    auto seg = single_step(f, 0.3, scalar(std::exp(std::sin(0.3))), h);
    double tm = 0.3 + 0.5 * h;
    err.push_back(std::abs(seg.eval(tm)[0] - std::exp(std::sin(tm))));
  }
  // local error O(h^5) means a global order of at least 4
  CHECK(fitted_order(hs, err) >= 4.5);
}

TEST_CASE("fixed-step convergence order", "[integrator]") {
  auto rep = order_check(decay, scalar(1.0), 0.0, 1.0,
                         [](double t) { return scalar(std::exp(-t)); }, {0.1, 0.05, 0.025});
  CHECK(rep.order == Approx(5.0).margin(0.3));

  Rhs f = [](cplx t, const State& y) -> State { return y * std::cos(t); };
  rep = order_check(f, scalar(1.0), 0.0, 2.0, [](double t) { return scalar(std::exp(std::sin(t))); },
                    {0.2, 0.1, 0.05});
  CHECK(rep.order == Approx(5.0).margin(0.3));

  CHECK(fitted_order({1.0, 0.5}, {1.0, 1.0 / 32}) == Approx(5.0));
  CHECK_THROWS_AS(fitted_order({1.0}, {1.0}), DomainError);
}

TEST_CASE("real data stays real", "[integrator]") {
  Rhs f = [](cplx, const State& y) -> State { return y.cwiseProduct(y) - y; };
  State y0(3);
  y0 << 0.5, 0.25, -0.1;
  auto r = integrate(f, y0, 0.0, 3.0, {});
  for (const auto& s : r.trajectory.states) CHECK(s.imag().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("failure modes", "[integrator]") {
  // y' = y^2 from y(0) = 1 blows up at t = 1
  Rhs sq = [](cplx, const State& y) -> State { return y.cwiseProduct(y); };
  // near the pole trial stages may overflow, so either failure is acceptable
  double t_fail = -1;
  try {
    integrate(sq, scalar(1.0), 0.0, 2.0, {});
  } catch (const StiffnessOrSingularity& e) {
    t_fail = e.t;
  } catch (const NonFiniteRhs& e) {
    t_fail = e.t;
  }
  CHECK(t_fail == Approx(1.0).margin(1e-4));

  IntegratorConfig stop;
  stop.stop_on_underflow = true;
  auto r = integrate(sq, scalar(1.0), 0.0, 2.0, stop);
  CHECK(r.underflow);
  CHECK(r.trajectory.times.back() == Approx(1.0).margin(1e-4));

  Rhs nan = [](cplx, const State& y) -> State { return State::Constant(y.size(), NAN); };
  CHECK_THROWS_AS(integrate(nan, scalar(1.0), 0.0, 1.0, {}), NonFiniteRhs);

  IntegratorConfig few;
  few.max_steps = 5;
  CHECK_THROWS_AS(integrate(decay, scalar(1.0), 0.0, 100.0, few), MaxStepsExceeded);

  IntegratorConfig bad;
  bad.rtol = 0;
  CHECK_THROWS_AS(integrate(decay, scalar(1.0), 0.0, 1.0, bad), DomainError);
  bad = {};
  bad.sample_times = {0.5, 0.2};
  CHECK_THROWS_AS(integrate(decay, scalar(1.0), 0.0, 1.0, bad), DomainError);
  CHECK_THROWS_AS(integrate(decay, scalar(1.0), 1.0, 0.0, {}), DomainError);
}

TEST_CASE("complex paths", "[integrator]") {
  SECTION("straight segment on the real axis") {
    auto tr = integrate_path(decay, scalar(1.0), ComplexPath::line(0.0, 1.0), {});
    CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-10);
    CHECK(tr.path_times.front() == cplx(0.0));
    CHECK(tr.path_times.back() == cplx(1.0));
  }
  SECTION("upper semicircle around t = 1") {
    auto p = ComplexPath::line(0.0, 0.5);
    p.then_arc(1.0, 0.5, std::numbers::pi, 0.0).then_line(2.0);
    CHECK(p.pieces().size() == 3);
    CHECK(std::abs(p.end() - cplx(2.0)) < 1e-15);
    auto tr = integrate_path(growth, scalar(1.0), p, {});
    CHECK(std::abs(tr.back()[0] - std::exp(2.0)) < 1e-10 * std::exp(2.0));
    CHECK(tr.times.back() == Approx(3.0));
    // the arc leaves the real axis
    double max_im = 0;
    for (auto t : tr.path_times) max_im = std::max(max_im, t.imag());
    CHECK(max_im == Approx(0.5).epsilon(1e-3));
  }
  SECTION("quarter circle from 1 to i") {
    Rhs rot = [](cplx, const State& y) -> State { return cplx(0, 1) * y; };
    auto p = ComplexPath::line(0.0, 1.0);
    p.then_arc(0.0, 1.0, 0.0, std::numbers::pi / 2);
    auto tr = integrate_path(rot, scalar(1.0), p, {});
    // y = e^{i t}, so y(i) = e^{-1}
    CHECK(std::abs(tr.back()[0] - std::exp(-1.0)) < 1e-10);
    CHECK(std::abs(tr.states[tr.size() / 2][0]) <= 1.0 + 1e-12);
  }
  SECTION("y' = y^2 goes around its pole") {
    Rhs sq = [](cplx, const State& y) -> State { return y.cwiseProduct(y); };
    auto p = ComplexPath::line(0.0, 0.5);
    p.then_arc(1.0, 0.5, std::numbers::pi, 0.0).then_line(2.0);
    auto tr = integrate_path(sq, scalar(1.0), p, {});
    // y = 1/(1 - t) is single valued
    CHECK(std::abs(tr.back()[0] + 1.0) < 1e-10);
  }
  CHECK_THROWS_AS(ComplexPath::line(0.0, 1.0).then_arc(3.0, 1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("trajectory csv", "[integrator]") {
  auto r = integrate(decay, scalar(1.0), 0.0, 0.1, {});
  std::ostringstream os;
  write_trajectory_csv(os, r.trajectory);
  std::string s = os.str();
  CHECK(s.rfind("t,re0,im0\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == static_cast<long>(r.trajectory.size()) + 1);

  auto tr = integrate_path(decay, scalar(1.0), ComplexPath::line(0.0, cplx(0, 1)), {});
  std::ostringstream ps;
  write_trajectory_csv(ps, tr);
  CHECK(ps.str().rfind("s,t_re,t_im,re0,im0\n", 0) == 0);
}
