#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "blowup/pde.hpp"
#include "blowup/singularity.hpp"
#include "json.hpp"

namespace blowup::experiments {

struct RunConfig {
  double alpha = 1.0;
  double epsilon = 0.001;
  int n_modes = 128;
  double rtol = 1e-12;
  double atol = 1e-12;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out = "out";
  std::optional<double> t_end;
  std::vector<double> times;
  int stride = 1;
  std::optional<double> radius;  // complex-path continuation; default_path_radius when unset

  pde::ModelParams model() const;
  nlohmann::json to_json() const;
  // Keys present in j override the fields of `base`.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
};

// ---- blow-up time table -----------------------------------------------------------
struct Table1Row {
  double alpha = 0, epsilon = 0;
  double t_c = 0, d_prime = 0, d_hat = 0, d_tilde = 0;
  std::string error;  // non-empty if the cell failed
};
std::vector<Table1Row> run_table1(const RunConfig& cfg);
void write_table1_csv(std::ostream& os, const std::vector<Table1Row>& rows);

// ---- error curves -----------------------------------------------------------
struct ErrorCurveRow {
  double t;
  long k;
  double err_outer, err_inner;
};
struct ErrorCurves {
  double t_c = 0;
  std::vector<ErrorCurveRow> rows;  // one per accepted step before t_c
  double plateau_err_outer = 0;         // at t = alpha/2
};
// Max relative error of both approximations over the padded collocation grid.
ErrorCurveRow step_errors(double t, long k, const pde::FourierField& v, double alpha, double epsilon,
                          double t_c);
ErrorCurves run_error_curves(const pde::ModelParams& p);
void write_error_curves_csv(std::ostream& os, const ErrorCurves& e);

// ---- blow-up profile --------------------------------------------------------
struct ProfileRow {
  double x, v, global, local;
};
struct CoeffRow {
  int k;
  double abs_c, global_law, local_law;
};
struct ProfileResult {
  double t_c = 0;
  pde::FourierField state{0};
  std::vector<ProfileRow> profile;
  std::vector<CoeffRow> coeffs;
  double slope = 0;  // log|c_k| vs log k over [10, 60]
};
double loglog_slope(const pde::FourierField& c, int k_lo, int k_hi);
ProfileResult profile_at(const pde::FourierField& state, double t_c, double alpha, double epsilon);
ProfileResult run_blowup_profile(const pde::ModelParams& p);
void write_profile_csv(std::ostream& os, const ProfileResult& r);
void write_coeff_csv(std::ostream& os, const ProfileResult& r);

// ---- singularity track ------------------------------------------------------
struct OverlayRow {
  double t;
  double naive, early, late_one, scale_two, scale_three, impingement;  // NaN outside domain
};
struct SingularityResult {
  double t_c = 0;
  singularity::SingularityTrack track;
  std::vector<OverlayRow> overlays;
  std::optional<double> y0;
  std::optional<double> t_max;          // argmax of y over usable samples
  double impingement_slope = 0;         // NaN if too few samples
  std::size_t common_samples = 0;       // samples with both estimates
  double max_rel_disagreement = 0;      // max |y_fit - y_root| / y_root over those
  double max_abs_disagreement = 0;
  double max_tolerance_ratio = 0;       // max |y_fit - y_root| / max(0.05 y_root, 2 pi / N)
};
std::vector<double> near_tc_times(double t_c, double epsilon);
SingularityResult run_singularity(const pde::ModelParams& p, int stride = 1);
void write_overlay_csv(std::ostream& os, const SingularityResult& r);

// ---- continuation -----------------------------------------------------------
struct ContinueSummary {
  double t_c = 0;
  int branch_sign = 0;
  double max_imag_before = 0;      // max_k |Im c_k| over samples with t < t_c - 1e-6
  double max_imag_after = 0;       // at 1.25 t_c
  double u_pi_at_1p5 = 0;          // |u(pi)| at 1.5 t_c
  double u_pi_local_max = 0;       // max over [1.5 t_c, 2.5 t_c]
  double t_u_pi_max = 0;
  double min_v_pi_ratio = 0;       // min_x|v| / |v(pi)| at 1.5 t_c
  double t_end = 0;
  double minus_one_over_t = 0;     // max_x |u + 1/t| t at t_end
  std::optional<double> conjugacy_at_2tc;   // max_k |c+ - conj(c-)|
  std::optional<double> path_match_at_3tc;  // min over branches of max_k |c_path - c_noise|
  std::optional<int> path_branch;           // +1 if upper path matched the + noise run
};
struct ContinueRun {
  ContinueSummary summary;
  pde::ContinuationResult noise;
  std::optional<pde::ContinuationResult> negated;
  std::optional<pde::ContinuationResult> path;
  std::vector<double> snapshot_times;
};
// Path radius defaults to min(10 eps, 0.2 t_c) so the arc stays in t > 0.
double default_path_radius(double epsilon, double t_c);
ContinueRun run_continue(const pde::ModelParams& p, double t_end, std::uint64_t seed,
                         const std::vector<double>& user_times, bool with_negated, bool with_path,
                         std::optional<double> path_radius = std::nullopt);
nlohmann::json to_json(const ContinueSummary& s);
void write_snapshot_csv(std::ostream& os, const ode::Trajectory& tr, int n_modes,
                        const std::vector<double>& times);

// ---- Fourier snapshots ------------------------------------------------------
struct SnapshotsResult {
  double t_c = 0;
  std::vector<double> times;
  std::vector<pde::FourierField> fields;
  double slope_at_tc = 0;
  double residual_before = 0, residual_after = 0;  // rms of exponential_fit
  double rate_before = 0, rate_after = 0;          // fitted decay rates
};
// rms residual and rate of a linear fit of log|c_k| against k on the upper
// half of the resolved modes.
std::pair<double, double> exponential_fit(const pde::FourierField& c);
SnapshotsResult run_fourier_snapshots(const pde::ModelParams& p, std::vector<double> times,
                                      std::uint64_t seed);
void write_snapshots_csv(std::ostream& os, const SnapshotsResult& r);

// ---- flatness ---------------------------------------------------------------
struct FlatnessRow {
  double t, f_solver, f_coeffs, f_approx, rel_err;
};
struct FlatnessResult {
  double t_c = 0;
  std::vector<FlatnessRow> rows;
  double max_rel_err_early = 0;  // over t <= 0.9 t_c
  double t_min = 0, f_min = 0;
};
FlatnessResult run_flatness(const pde::ModelParams& p);
void write_flatness_csv(std::ostream& os, const FlatnessResult& r);

}  // namespace blowup::experiments
