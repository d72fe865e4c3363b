#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "blowup/integrator.hpp"
#include "blowup/spectral.hpp"

namespace blowup::pde {

using spectral::FourierField;
using spectral::GridValues;

struct ModelParams {
  double alpha = 1.0;
  double epsilon = 0.01;
  int n_modes = 128;
  ode::IntegratorConfig integrator;
  double division_floor = 1e-13;

  void validate() const;
};

void to_json(nlohmann::json& j, const ModelParams& p);

// v(x, 0) = alpha - eps cos x.
FourierField initial_field(const ModelParams& p);
// v(x, 0) = alpha + eps V(x), sampled on `grid` nodes.
FourierField initial_field(const ModelParams& p, const std::function<double(double)>& V, int grid = 0);

// Coefficients of v_xx - 1 - 2 v_x^2 / v.
FourierField v_rhs(const FourierField& v, double floor = 1e-13);

ode::State to_state(const FourierField& f);
FourierField from_state(const ode::State& y, int n_modes,
                        spectral::Parity parity = spectral::Parity::general_complex);

// v(0) and v(pi) straight from the coefficients.
spectral::cplx value_at_zero(const ode::State& y);
spectral::cplx value_at_pi(const ode::State& y, int n_modes);

struct BlowupReport {
  double t_c = 0;
  FourierField state_at_tc{0};
  double t_hat = 0, t_tilde = 0, t_c_prime = 0;
  double delta_hat = 0, delta_tilde = 0, delta_prime = 0;  // estimate - t_c
};

void to_json(nlohmann::json& j, const BlowupReport& r);

struct BlowupSolution {
  ode::Trajectory trajectory;
  BlowupReport report;
};

struct SolveOptions {
  bool with_estimates = true;  // fill t_hat, t_tilde, t_c' (costs a two-mode solve)
};

BlowupSolution solve_to_blowup(const ModelParams& p, const SolveOptions& opt = {});

struct UField {
  GridValues grid;      // u on the padded grid
  FourierField coeffs;  // a_k
};
UField u_from_v(const FourierField& v, double floor = 1e-13);

struct Flatness {
  double pointwise;    // 1/v(0) - 1/v(pi)
  double from_coeffs;  // 4 * sum over odd k > 0 of a_k
};
Flatness flatness(const FourierField& v);

// Adds i r_k to c_k and c_{-k} with r_k ~ U(-amp, amp), so the perturbation
// is i times a real even function of x.
FourierField seed_imaginary_noise(const FourierField& f, double amplitude, std::uint64_t seed,
                                  bool negate = false);

enum class ContinuationMethod { noise_seeded, complex_path };

struct ContinuationResult {
  ode::Trajectory trajectory;
  int branch_sign = 0;
  ContinuationMethod method = ContinuationMethod::noise_seeded;
  std::uint64_t rng_seed = 0;
  double t_c = 0;  // where Re v(0, t) crossed zero (noise) or the path centre
};

struct ContinueOptions {
  double amplitude = 1e-16;
  bool negate = false;
};

ContinuationResult continue_past_blowup(const ModelParams& p, double t_end, std::uint64_t seed,
                                        const ContinueOptions& opt = {});

struct PathOptions {
  bool upper = true;
  std::optional<double> center;  // defaults to the detected t_c (alpha when eps = 0)
};

// Real-time sample_times in p.integrator are mapped onto the path; trajectory
// times are the path parameter and path_times carries the complex t.
ContinuationResult continue_complex_path(const ModelParams& p, double radius, double t_end,
                                         const PathOptions& opt = {});

// Stored state at real time t (matched against path_times for path runs).
const ode::State& state_at(const ode::Trajectory& tr, double t, double tol = 1e-12);

}  // namespace blowup::pde
