#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace blowup::ode {

using cplx = std::complex<double>;
using State = Eigen::VectorXcd;
// Time is complex so that the same rhs can be driven along a complex path.
using Rhs = std::function<State(cplx t, const State& y)>;

struct IntegratorConfig {
  double rtol = 1e-12;
  double atol = 1e-12;
  double h_init = 1e-4;
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 5'000'000;

  bool store_steps = true;    // keep every accepted step
  bool store_dense = false;   // keep interpolants (memory heavy for large N)
  std::vector<double> sample_times;  // extra outputs via dense output, sorted
  // Return normally (underflow = true) instead of throwing when h < h_min;
  // for systems whose integration is meant to end at a singularity.
  bool stop_on_underflow = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const IntegratorConfig& c);

// Hairer's continuous extension of DOPRI5 over one step.
struct DenseSegment {
  double t0 = 0, h = 0;
  State r1, r2, r3, r4, r5;
  State eval(double t) const;
};

struct Trajectory {
  std::vector<double> times;              // real time or path parameter
  std::vector<State> states;
  std::vector<cplx> path_times;           // t(s) at each node; only for path runs
  std::vector<DenseSegment> dense_segments;
  long accepted_steps = 0;
  long rejected_steps = 0;

  std::size_t size() const { return times.size(); }
  const State& back() const { return states.back(); }
  // Needs dense segments covering t.
  State evaluate(double t) const;
};

enum class Direction { any, decreasing, increasing };

struct EventSpec {
  std::function<double(double t, const State& y)> observable;
  Direction direction = Direction::any;
  double root_tol = 1e-13;
  bool terminal = true;
};

struct EventHit {
  double t = 0;
  State state;
  std::size_t index = 0;  // which EventSpec fired
};

struct IntegrationResult {
  Trajectory trajectory;
  std::optional<EventHit> event;       // the terminal event, if any
  std::vector<EventHit> crossings;     // non-terminal events in order
  bool underflow = false;              // stopped at a step-size underflow
};

IntegrationResult integrate(const Rhs& rhs, const State& y0, double t0, double t1,
                            const IntegratorConfig& cfg, const std::vector<EventSpec>& events = {});

// Piecewise path in the complex t-plane; each piece is parameterised by s in [0, 1].
class ComplexPath {
 public:
  struct Piece {
    bool arc = false;
    cplx a, b;                       // line endpoints
    cplx center;                     // arc
    double radius = 0, theta0 = 0, theta1 = 0;
    cplx point(double s) const;
    cplx derivative(double s) const;
  };

  static ComplexPath line(cplx a, cplx b);
  ComplexPath& then_line(cplx b);
  ComplexPath& then_arc(cplx center, double radius, double theta0, double theta1);

  const std::vector<Piece>& pieces() const { return pieces_; }
  cplx start() const;
  cplx end() const;

 private:
  std::vector<Piece> pieces_;
};

// Trajectory times are the cumulative path parameter (piece i covers [i, i+1]);
// path_times holds the complex t at each node.
Trajectory integrate_path(const Rhs& rhs, const State& y0, const ComplexPath& path,
                          const IntegratorConfig& cfg);

// One DOPRI5 step with its interpolant; y(t0+h) = r1 + r2.
DenseSegment single_step(const Rhs& rhs, double t0, const State& y0, double h);

// Fixed-step DOPRI5 (fifth-order solution) from t0 to t1 with n steps.
State integrate_fixed(const Rhs& rhs, const State& y0, double t0, double t1, int n_steps);

// Least-squares slope of log(error) against log(h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

struct OrderReport {
  std::vector<double> h, err;
  double order = 0;
};

OrderReport order_check(const Rhs& rhs, const State& y0, double t0, double t1,
                        const std::function<State(double)>& exact, const std::vector<double>& hs);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace blowup::ode
