#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "blowup/integrator.hpp"
#include "blowup/spectral.hpp"

namespace blowup::singularity {

using spectral::FourierField;

struct KRange {
  int lo, hi;  // inclusive
};

struct StripFit {
  double y = 0;
  double prefactor = 0;
  double residual = 0;  // rms of the log-linear fit
  KRange k_range{0, 0};
  double exponent = 1;
};

// log|a_k| = log C + p log k - k y over k_range (default: see default_k_range).
StripFit fit_strip_width(const FourierField& u_coeffs, std::optional<KRange> k_range = std::nullopt,
                         double exponent = 1.0);

// [max(8, N/8), min(N-8, k_floor)], k_floor the last mode above 100x roundoff
// (scale eps * sum|a_k|) and 100x the tail minimum when the tail turns up.
KRange default_k_range(const FourierField& u_coeffs);

// Number of modes above the noise plateau (k = N is never counted: it carries
// step-controller noise). Threshold is plateau_factor times the median of
// |c_k| over k in [N/2, N-1]; for an exactly band-limited field it is the
// last nonzero mode.
int resolved_modes(const FourierField& v, double plateau_factor = 1000.0);

struct RootOptions {
  int k_max = -1;             // truncation, -1 = all modes
  bool tail_average = false;  // average the last two partial sums
  double tol = 1e-10;
};

// Re v(iy) on the imaginary axis with the given truncation.
double v_on_axis(const FourierField& v, double y, const RootOptions& opt = {});

// Root of Re v(iy) = 0 in [y_lo, y_hi] by bisection + secant polish.
double root_on_axis(const FourierField& v, double y_lo, double y_hi, const RootOptions& opt = {});

struct RootSearch {
  std::optional<double> y;
  int k_max = 0;
  bool trusted = false;  // last retained terms still decreasing at the root
};

// Scans upward from y = 0 for the first sign change of the truncated,
// tail-averaged series, then refines it.
RootSearch find_root_on_axis(const FourierField& v, double dy = 0.01, double y_cap = 50.0);

enum class Method { fit, root, both };

struct TrackOptions {
  double fit_exponent = 1.0;
  std::optional<KRange> k_range;
  double resolution_floor = 1e-14;  // report y_fit only while e^{-N y} >= this
};

struct TrackSample {
  double t = 0;
  std::optional<double> y_fit, y_root;
  double residual = 0;
  bool usable = false;
};

struct SingularityTrack {
  std::vector<TrackSample> samples;
};

SingularityTrack build_track(const ode::Trajectory& traj, int n_modes, Method method, int stride = 1,
                             const TrackOptions& opt = {});
TrackSample estimate(double t, const FourierField& v, Method method, const TrackOptions& opt = {});

void write_track_csv(std::ostream& os, const SingularityTrack& track);

// Slope of y^2 against (t_c - t) log(1/(t_c - t)) over usable root samples in
// [t_lo, t_hi]; NaN if fewer than three samples.
double impingement_slope(const SingularityTrack& track, double t_c, double t_lo, double t_hi);

}  // namespace blowup::singularity
