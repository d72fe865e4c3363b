#pragma once

#include <optional>
#include <string>

namespace blowup::asymptotics {

struct AsymptoticConstants {
  double alpha = 0;
  double C1 = 0, C2 = 0, C3 = 0;
  double beta1 = 0, gamma1 = 0, beta2 = 0, gamma2 = 0;
  double quadrature_error_bound = 0;
};

AsymptoticConstants constants(double alpha, double quad_tol = 1e-12);

// Outer solution, valid for t = O(1).
double perturbation_v(double x, double t, double alpha, double epsilon);

double t_hat(double alpha, double epsilon);
double t_tilde(double alpha, double epsilon);
double t_tilde(const AsymptoticConstants& c, double epsilon);

// Inner solution on the T = (t - t_c)/eps scale.
double v_timescale2(double x, double t, double alpha, double epsilon, double t_c);
double v_timescale2(double x, double t, const AsymptoticConstants& c, double epsilon, double t_c);

// Profile at t_c away from x = 0, and the exponentially-small-x local form.
double blowup_profile_global(double x, double alpha, double epsilon);
double blowup_profile_global(double x, const AsymptoticConstants& c, double epsilon);
double blowup_profile_local(double x, double alpha, double epsilon);

double coeff_decay_global(int k, double alpha, double epsilon);
double coeff_decay_local(int k);

struct TimescaleCoords {
  double T;
  double tau;
};
TimescaleCoords timescale_coords(double t, double t_c, double epsilon);

enum class Regime { naive, early, late_one, scale_two, scale_three, impingement };
Regime regime_from_string(const std::string& s);
std::string to_string(Regime r);

// For naive/early/late_one `arg` is t; for scale_two/scale_three it is
// T = (t - t_c)/eps; for impingement it is t_c - t.
double singularity_y(Regime r, double arg, double alpha, double epsilon);

double flatness_approx(double t, double alpha, double epsilon);
std::optional<double> turning_time(double alpha);

struct TaylorEstimates {
  double t_c;
  double beta1, gamma1, beta2, gamma2;
};
TaylorEstimates taylor_case_estimates(double alpha, double epsilon);

}  // namespace blowup::asymptotics
