#include "blowup/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blowup/error.hpp"
#include "blowup/pde.hpp"

namespace blowup::singularity {

namespace {

constexpr double kRoundoff = 2.220446049250313e-16;

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  auto mid = v.begin() + v.size() / 2;
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// |c_K| cosh(K y) <= |c_{K-1}| cosh((K-1) y): the truncated series is still
// converging at y.
bool tail_decreasing(const FourierField& v, int kk, double y) {
  if (kk < 2) return true;
  const double last = std::abs(v[kk].real()) * std::cosh(kk * y);
  const double prev = std::abs(v[kk - 1].real()) * std::cosh((kk - 1) * y);
  return last <= prev;
}

}  // namespace

KRange default_k_range(const FourierField& a) {
  const int n = a.n_modes();
  // Roundoff in a_k is set by the grid values, bounded by sum |a_k|, not by
  // the largest coefficient (u is a tall spike near t_c).
  double l1 = 0;
  for (int k = -n; k <= n; ++k) l1 += std::abs(a[k]);
  const double floor = 100 * kRoundoff * l1;
  int k_floor = 0;
  for (int k = 1; k <= n; ++k) {
    if (std::abs(a[k]) < floor) break;
    k_floor = k;
  }
  // The tail can bottom out and climb again (amplified roundoff in 1/v);
  // stay 100x above the observed minimum.
  int k_min = 1;
  for (int k = 2; k <= n; ++k)
    if (std::abs(a[k]) < std::abs(a[k_min])) k_min = k;
  if (k_min < n) {
    int k_obs = 0;
    for (int k = 1; k <= k_min; ++k)
      if (std::abs(a[k]) >= 100 * std::abs(a[k_min])) k_obs = k;
    k_floor = std::min(k_floor, k_obs);
  }
  return {std::max(8, n / 8), std::min(n - 8, k_floor)};
}

StripFit fit_strip_width(const FourierField& a, std::optional<KRange> kr, double exponent) {
  const KRange r = kr ? *kr : default_k_range(a);
  if (r.lo < 1 || r.hi > a.n_modes()) throw FitError("k range outside the available modes");
  if (r.hi - r.lo + 1 < 8)
    throw FitError("fewer than 8 usable modes in k range [" + std::to_string(r.lo) + ", " +
                   std::to_string(r.hi) + "]");
  const int m = r.hi - r.lo + 1;
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    const int k = r.lo + i;
    const double mag = std::abs(a[k]);
    if (!(mag > 0) || !std::isfinite(mag)) throw FitError("coefficient at roundoff floor (zero) at k = " + std::to_string(k));
    A(i, 0) = 1.0;
    A(i, 1) = -double(k);
    b[i] = std::log(mag) - exponent * std::log(double(k));
  }
  Eigen::Vector2d x = A.colPivHouseholderQr().solve(b);
  StripFit f;
  f.y = x[1];
  f.prefactor = std::exp(x[0]);
  f.residual = std::sqrt((A * x - b).squaredNorm() / m);
  f.k_range = r;
  f.exponent = exponent;
  return f;
}

int resolved_modes(const FourierField& v, double plateau_factor) {
  const int n = v.n_modes();
  std::vector<double> tail;
  for (int k = n / 2; k <= n - 1; ++k) tail.push_back(std::abs(v[k]));
  const double thr = plateau_factor * median(tail);
  if (thr == 0) {
    for (int k = n - 1; k >= 1; --k)
      if (v[k] != 0.0) return k;
    return 0;
  }
  for (int k = 1; k <= n - 1; ++k)
    if (std::abs(v[k]) < thr) return k - 1;
  return n - 1;
}

double v_on_axis(const FourierField& v, double y, const RootOptions& opt) {
  const int kk = (opt.k_max < 0 || opt.k_max > v.n_modes()) ? v.n_modes() : opt.k_max;
  double s = spectral::eval_at(v, spectral::cplx(0, y), kk).real();
  if (opt.tail_average && kk >= 2) {
    // mean of the partial sums S_K and S_{K-1}
    s -= 0.5 * (v[kk].real() * std::exp(-kk * y) + v[-kk].real() * std::exp(kk * y));
  }
  return s;
}

double root_on_axis(const FourierField& v, double y_lo, double y_hi, const RootOptions& opt) {
  if (!(y_hi > y_lo)) throw DomainError("empty bracket");
  auto f = [&](double y) { return v_on_axis(v, y, opt); };
  double a = y_lo, b = y_hi, fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) throw NoRootInBracket("no sign change of Re v(iy) in bracket");
  while (b - a > 16 * opt.tol) {
    const double m = 0.5 * (a + b), fm = f(m);
    if (fm == 0) return m;
    if ((fm > 0) == (fa > 0)) { a = m; fa = fm; } else { b = m; fb = fm; }
  }
  // secant polish inside the final bracket
  for (int it = 0; it < 20 && b - a > opt.tol; ++it) {
    double c = b - fb * (b - a) / (fb - fa);
    if (!(c > a && c < b)) c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0) return c;
    if ((fc > 0) == (fa > 0)) { if (c - a < opt.tol) return c; a = c; fa = fc; }
    else { if (b - c < opt.tol) return c; b = c; fb = fc; }
  }
  return 0.5 * (a + b);
}

RootSearch find_root_on_axis(const FourierField& v, double dy, double y_cap) {
  RootSearch out;
  const int kk = resolved_modes(v);
  out.k_max = kk;
  if (kk == 0) return out;
  RootOptions opt{kk, true, 1e-10};
  const double y_max = std::min(y_cap, 700.0 / kk);
  double y0 = 0, f0 = v_on_axis(v, 0, opt);
  for (double y1 = dy; y1 <= y_max; y1 += dy) {
    const double f1 = v_on_axis(v, y1, opt);
    if (f0 == 0 || (f0 > 0) != (f1 > 0)) {
      const double y = f0 == 0 ? y0 : root_on_axis(v, y0, y1, opt);
      out.y = y;
      out.trusted = tail_decreasing(v, kk, y);
      return out;
    }
    if (!tail_decreasing(v, kk, y1)) return out;  // series no longer trustworthy further out
    y0 = y1;
    f0 = f1;
  }
  return out;
}

TrackSample estimate(double t, const FourierField& v, Method method, const TrackOptions& opt) {
  TrackSample s;
  s.t = t;
  if (method != Method::fit) {
    try {
      RootSearch r = find_root_on_axis(v);
      if (r.y && r.trusted) s.y_root = r.y;
    } catch (const Error&) {
    }
  }
  if (method != Method::root) {
    try {
      const FourierField a = pde::u_from_v(v).coeffs;
      StripFit f = fit_strip_width(a, opt.k_range, opt.fit_exponent);
      s.residual = f.residual;
      if (f.y > 0 && std::exp(-v.n_modes() * f.y) >= opt.resolution_floor) s.y_fit = f.y;
    } catch (const Error&) {
    }
  }
  s.usable = s.y_fit.has_value() || s.y_root.has_value();
  return s;
}

SingularityTrack build_track(const ode::Trajectory& traj, int n_modes, Method method, int stride,
                             const TrackOptions& opt) {
  if (stride < 1) throw DomainError("stride must be >= 1");
  SingularityTrack tr;
  for (std::size_t i = 0; i < traj.size(); i += stride) {
    FourierField v = pde::from_state(traj.states[i], n_modes);
    if (v.satisfies_even_real(1e-10)) v.project_even_real();
    tr.samples.push_back(estimate(traj.times[i], v, method, opt));
  }
  return tr;
}

void write_track_csv(std::ostream& os, const SingularityTrack& track) {
  os << "t,y_fit,y_root,residual,usable\n";
  os.precision(17);
  for (const auto& s : track.samples) {
    os << s.t << ',';
    if (s.y_fit) os << *s.y_fit;
    else os << "nan";
    os << ',';
    if (s.y_root) os << *s.y_root;
    else os << "nan";
    os << ',' << s.residual << ',' << (s.usable ? 1 : 0) << '\n';
  }
}

double impingement_slope(const SingularityTrack& track, double t_c, double t_lo, double t_hi) {
  std::vector<double> xs, ys;
  for (const auto& s : track.samples) {
    if (!s.y_root || s.t < t_lo || s.t > t_hi) continue;
    const double d = t_c - s.t;
    if (!(d > 0 && d < 1)) continue;
    xs.push_back(d * std::log(1 / d));
    ys.push_back(*s.y_root * *s.y_root);
  }
  const std::size_t n = xs.size();
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace blowup::singularity
