#include "blowup/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "blowup/error.hpp"

namespace blowup::asymptotics {

namespace {

// Integrands after s = alpha - t; both have removable singularities at s = 0.
double plus_kernel(double s) { return s == 0 ? 2.0 : std::expm1(2 * s) / s; }
double minus_kernel(double s) { return s == 0 ? -2.0 : std::expm1(-2 * s) / s; }

// Adaptive G-K to near roundoff; the caller checks the weighted absolute error.
template <class F>
double integrate(F f, double a, double b, double& err, double& l1) {
  using boost::math::quadrature::gauss_kronrod;
  double v = gauss_kronrod<double, 15>::integrate(f, a, b, 12, 1e-14, &err, &l1);
  if (!std::isfinite(v)) throw QuadratureError("quadrature produced a non-finite value");
  return v;
}

void require_positive_alpha(double alpha) {
  if (!(alpha > 0)) throw DomainError("alpha must be positive");
}

}  // namespace

AsymptoticConstants constants(double alpha, double quad_tol) {
  require_positive_alpha(alpha);
  if (!(quad_tol > 0)) throw DomainError("quad_tol must be positive");
  AsymptoticConstants c;
  c.alpha = alpha;
  const double w = std::exp(-2 * alpha);
  // C2, C3 carry e^{-2 alpha}; the error that matters is the weighted one.
  // Roundoff floor: a few ulps of the L1 norm.
  double e2 = 0, e3 = 0, l2 = 0, l3 = 0;
  const double i2 = integrate(plus_kernel, 0.0, alpha, e2, l2);
  const double i3 = integrate(minus_kernel, 0.0, alpha, e3, l3);
  const double floor = 8 * std::numeric_limits<double>::epsilon() * w * (l2 + l3);
  if (w * (e2 + e3) > std::max(quad_tol, floor))
    throw QuadratureError("quadrature error estimate " + std::to_string(w * (e2 + e3)) +
                          " exceeds tolerance " + std::to_string(quad_tol));
  c.C1 = w * std::log(alpha);
  c.C2 = w * i2;
  c.C3 = w * i3;
  c.beta1 = -std::exp(-alpha);
  c.gamma1 = 0.5 * std::exp(-alpha);
  c.beta2 = -2 * c.C1 - c.C2 - c.C3;
  c.gamma2 = 2 * (c.C1 + c.C3);
  c.quadrature_error_bound = w * (e2 + e3);
  return c;
}

double perturbation_v(double x, double t, double alpha, double epsilon) {
  return alpha - t - epsilon * std::exp(-t) * std::cos(x);
}

double t_hat(double alpha, double epsilon) { return alpha - epsilon * std::exp(-alpha); }

double t_tilde(const AsymptoticConstants& c, double epsilon) {
  return t_hat(c.alpha, epsilon) - (2 * c.C1 + c.C2 + c.C3) * epsilon * epsilon;
}

double t_tilde(double alpha, double epsilon) {
  if (epsilon == 0) return alpha;
  return t_tilde(constants(alpha), epsilon);
}

double v_timescale2(double x, double t, const AsymptoticConstants& c, double epsilon, double t_c) {
  const double alpha = c.alpha;
  const double s2 = std::sin(x / 2) * std::sin(x / 2);
  const double sx2 = std::sin(x) * std::sin(x);
  const double ea = std::exp(-alpha), e2a = std::exp(-2 * alpha);
  const double arg = (t_c - t) / epsilon + 2 * ea * s2;
  if (!(arg > 0)) throw DomainError("log argument <= 0 in inner solution (past t_c at x = 0?)");
  return t_c - t + 2 * epsilon * ea * s2 +
         2 * epsilon * epsilon * sx2 * (e2a * std::log(epsilon * arg) + c.C1 + c.C3) +
         epsilon * (t - t_c) * ea * std::cos(x);
}

double v_timescale2(double x, double t, double alpha, double epsilon, double t_c) {
  return v_timescale2(x, t, constants(alpha), epsilon, t_c);
}

double blowup_profile_global(double x, const AsymptoticConstants& c, double epsilon) {
  if (x == 0) throw DomainError("global profile is log-singular at x = 0");
  const double alpha = c.alpha;
  const double s2 = std::sin(x / 2) * std::sin(x / 2);
  const double sx2 = std::sin(x) * std::sin(x);
  const double ea = std::exp(-alpha), e2a = std::exp(-2 * alpha);
  return 2 * epsilon * ea * s2 +
         2 * epsilon * epsilon * sx2 * (e2a * std::log(2 * epsilon * ea * s2) + c.C1 + c.C3);
}

double blowup_profile_global(double x, double alpha, double epsilon) {
  return blowup_profile_global(x, constants(alpha), epsilon);
}

double blowup_profile_local(double x, double alpha, double epsilon) {
  if (!(std::abs(x) > 0 && std::abs(x) < 1)) throw DomainError("local profile needs 0 < |x| < 1");
  const double ea = epsilon * std::exp(-alpha);
  return ea * x * x / (2 - 8 * ea * std::log(x * x));
}

double coeff_decay_global(int k, double alpha, double epsilon) {
  if (k < 3) throw DomainError("decay law needs k >= 3");
  return 4 * epsilon * epsilon * std::exp(-2 * alpha) / std::pow(double(k), 3);
}

double coeff_decay_local(int k) {
  if (k < 3) throw DomainError("decay law needs k >= 3");
  const double lk = std::log(double(k));
  return 1.0 / (16 * std::pow(double(k), 3) * lk * lk);
}

TimescaleCoords timescale_coords(double t, double t_c, double epsilon) {
  const double T = (t - t_c) / epsilon;
  if (!(T < 0)) throw DomainError("timescale coordinates need t < t_c");
  return {T, -epsilon * std::log(-T)};
}

Regime regime_from_string(const std::string& s) {
  if (s == "naive") return Regime::naive;
  if (s == "early") return Regime::early;
  if (s == "late_one") return Regime::late_one;
  if (s == "scale_two") return Regime::scale_two;
  if (s == "scale_three") return Regime::scale_three;
  if (s == "impingement") return Regime::impingement;
  throw DomainError("unknown regime '" + s + "'");
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::naive: return "naive";
    case Regime::early: return "early";
    case Regime::late_one: return "late_one";
    case Regime::scale_two: return "scale_two";
    case Regime::scale_three: return "scale_three";
    case Regime::impingement: return "impingement";
  }
  return "?";
}

double singularity_y(Regime r, double arg, double alpha, double epsilon) {
  switch (r) {
    case Regime::naive: {
      const double z = (alpha - arg) * std::exp(arg) / epsilon;
      if (!(z >= 1)) throw DomainError("arccosh argument < 1");
      return std::acosh(z);
    }
    case Regime::early: {
      if (!(arg > 0 && arg < 1)) throw DomainError("early form needs 0 < t < 1");
      return std::log(2 * alpha / epsilon) + std::sqrt(2 * arg * std::log(1 / arg));
    }
    case Regime::late_one: {
      if (!(arg < alpha)) throw DomainError("late form needs t < alpha");
      return std::log(2 / epsilon) + alpha + std::log(alpha - arg);
    }
    case Regime::scale_two: {
      if (!(arg <= 0)) throw DomainError("scale-II needs T <= 0");
      const double m = -arg, ea = std::exp(alpha);
      return std::log(1 + ea * m + std::sqrt(2 * ea * m + ea * ea * m * m));
    }
    case Regime::scale_three: {
      if (!(arg < 0)) throw DomainError("scale-III needs T < 0");
      const double m = -arg;
      const double inner = 1 - 4 * epsilon * std::exp(-alpha) * std::log(m);
      if (!(inner >= 0)) throw DomainError("scale-III radicand negative");
      return std::sqrt(2 * std::exp(alpha) * m) * std::sqrt(inner);
    }
    case Regime::impingement: {
      if (!(arg > 0 && arg < 1)) throw DomainError("impingement law needs 0 < t_c - t < 1");
      return std::sqrt(8 * arg * std::log(1 / arg));
    }
  }
  throw DomainError("unknown regime");
}

double flatness_approx(double t, double alpha, double epsilon) {
  if (!(t < alpha)) throw DomainError("flatness approximation needs t < alpha");
  return 2 * epsilon * std::exp(-t) / ((alpha - t) * (alpha - t));
}

std::optional<double> turning_time(double alpha) {
  if (alpha > 2) return alpha - 2;
  return std::nullopt;
}

TaylorEstimates taylor_case_estimates(double alpha, double epsilon) {
  require_positive_alpha(alpha);
  return {alpha + 2 * alpha * epsilon - 16 * alpha * epsilon * epsilon, 2 * alpha, 1.0, -16 * alpha,
          -8 * std::log(alpha)};
}

}  // namespace blowup::asymptotics
