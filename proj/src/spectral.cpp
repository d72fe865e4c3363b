#include "blowup/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "blowup/error.hpp"

namespace blowup::spectral {

namespace {

// FFTW planning is not thread-safe, execution is. Plans are made once per
// (size, direction) and reused on arbitrary unaligned arrays via the new-array
// execute interface.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int m, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_pair(m, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<cplx> a(m), b(m);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    fftw_plan p = fftw_plan_dft_1d(m, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

void fft(const cplx* in, cplx* out, int m, int sign) {
  fftw_plan p = PlanCache::instance().get(m, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

inline int wrap(int k, int m) { return k >= 0 ? k : k + m; }
inline double alt(int k) { return (k & 1) ? -1.0 : 1.0; }

void check_same_modes(const FourierField& f, const FourierField& g) {
  if (f.n_modes() != g.n_modes())
    throw DomainError("fields have different truncations: " + std::to_string(f.n_modes()) +
                      " vs " + std::to_string(g.n_modes()));
}

Parity combine(const FourierField& f, const FourierField& g) {
  return (f.parity() == Parity::even_real && g.parity() == Parity::even_real)
             ? Parity::even_real
             : Parity::general_complex;
}

Eigen::VectorXcd padded_values(const FourierField& f, int m) {
  Eigen::VectorXcd buf = Eigen::VectorXcd::Zero(m);
  const int n = f.n_modes();
  for (int k = -n; k <= n; ++k) buf[wrap(k, m)] = alt(k) * f[k];
  Eigen::VectorXcd out(m);
  fft(buf.data(), out.data(), m, FFTW_BACKWARD);
  return out;
}

FourierField from_values(const Eigen::VectorXcd& vals, int n, Parity parity) {
  const int m = static_cast<int>(vals.size());
  Eigen::VectorXcd out(m);
  fft(vals.data(), out.data(), m, FFTW_FORWARD);
  FourierField f(n, parity);
  for (int k = -n; k <= n; ++k) f[k] = alt(k) * out[wrap(k, m)] / double(m);
  if (parity == Parity::even_real) f.project_even_real();
  return f;
}

}  // namespace

FourierField::FourierField(int n_modes, Parity parity)
    : n_(n_modes), c_(Eigen::VectorXcd::Zero(2 * n_modes + 1)), parity_(parity) {
  if (n_modes < 0) throw DomainError("n_modes must be non-negative");
}

FourierField::FourierField(int n_modes, Eigen::VectorXcd coeffs, Parity parity)
    : n_(n_modes), c_(std::move(coeffs)), parity_(parity) {
  if (c_.size() != 2 * n_ + 1)
    throw DomainError("coefficient array length " + std::to_string(c_.size()) +
                      " != 2N+1 = " + std::to_string(2 * n_ + 1));
}

bool FourierField::is_finite() const { return c_.allFinite(); }

double FourierField::max_imag() const { return c_.imag().cwiseAbs().maxCoeff(); }

void FourierField::project_even_real() {
  for (int k = 1; k <= n_; ++k) {
    double s = 0.5 * ((*this)[k].real() + (*this)[-k].real());
    (*this)[k] = (*this)[-k] = s;
  }
  (*this)[0] = (*this)[0].real();
  parity_ = Parity::even_real;
}

bool FourierField::satisfies_even_real(double tol) const {
  for (int k = 0; k <= n_; ++k) {
    if (std::abs((*this)[k].imag()) > tol || std::abs((*this)[k] - (*this)[-k]) > tol) return false;
  }
  return true;
}

FourierField& FourierField::operator+=(const FourierField& o) {
  check_same_modes(*this, o);
  c_ += o.c_;
  parity_ = combine(*this, o);
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& o) {
  check_same_modes(*this, o);
  c_ -= o.c_;
  parity_ = combine(*this, o);
  return *this;
}

FourierField& FourierField::operator*=(double s) {
  c_ *= s;
  return *this;
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double s, FourierField a) { return a *= s; }

std::vector<double> GridValues::nodes(int m) {
  std::vector<double> x(m);
  for (int j = 0; j < m; ++j) x[j] = -std::numbers::pi + 2.0 * std::numbers::pi * j / m;
  return x;
}

int padded_size(int n_modes) {
  int m = 1;
  while (m < 3 * n_modes + 1) m <<= 1;
  return m;
}

FourierField analyze(const GridValues& values, int n_modes) {
  const int m = values.size();
  if (values.values.size() != m)
    throw DomainError("grid has " + std::to_string(m) + " points but " +
                      std::to_string(values.values.size()) + " values");
  if (m < 2 * n_modes + 1)
    throw DomainError("grid of size " + std::to_string(m) + " cannot resolve N = " +
                      std::to_string(n_modes));
  return from_values(values.values, n_modes, Parity::general_complex);
}

GridValues synthesize(const FourierField& field, int grid_size) {
  if (grid_size < 2 * field.n_modes() + 1)
    throw DomainError("grid_size " + std::to_string(grid_size) + " < 2N+1");
  return {GridValues::nodes(grid_size), padded_values(field, grid_size)};
}

FourierField differentiate(const FourierField& field, int order) {
  if (order != 1 && order != 2)
    throw DomainError("unsupported derivative order " + std::to_string(order));
  const int n = field.n_modes();
  FourierField d(n, order == 2 ? field.parity() : Parity::general_complex);
  for (int k = -n; k <= n; ++k) {
    d[k] = order == 1 ? cplx(0, k) * field[k] : -double(k) * k * field[k];
  }
  return d;
}

FourierField convolve(const FourierField& f, const FourierField& g) {
  check_same_modes(f, g);
  const int m = padded_size(f.n_modes());
  Eigen::VectorXcd fv = padded_values(f, m);
  Eigen::VectorXcd prod = (&f == &g) ? Eigen::VectorXcd(fv.array().square())
                                     : Eigen::VectorXcd(fv.array() * padded_values(g, m).array());
  return from_values(prod, f.n_modes(), combine(f, g));
}

FourierField divide(const FourierField& f, const FourierField& g, double floor) {
  check_same_modes(f, g);
  const int m = padded_size(f.n_modes());
  Eigen::VectorXcd gv = padded_values(g, m);
  Eigen::Index jmin;
  double gmin = gv.cwiseAbs().minCoeff(&jmin);
  if (!(gmin >= floor))
    throw DivisorTooSmall(gmin, -std::numbers::pi + 2.0 * std::numbers::pi * jmin / m);
  Eigen::VectorXcd q = padded_values(f, m).array() / gv.array();
  return from_values(q, f.n_modes(), combine(f, g));
}

cplx eval_at(const FourierField& field, cplx z, int k_max) {
  const int n = field.n_modes();
  const int kk = (k_max < 0 || k_max > n) ? n : k_max;
  if (kk * std::abs(z.imag()) > 700.0)
    throw OverflowError("e^{|k Im z|} overflows: K |Im z| = " + std::to_string(kk * std::abs(z.imag())));
  const cplx w = std::exp(cplx(0, 1) * z);
  const cplx wi = std::exp(cplx(0, -1) * z);
  // Horner on both half-series.
  cplx pos = 0, neg = 0;
  for (int k = kk; k >= 1; --k) {
    pos = (pos + field[k]) * w;
    neg = (neg + field[-k]) * wi;
  }
  return field[0] + pos + neg;
}

void to_json(nlohmann::json& j, const FourierField& f) {
  nlohmann::json arr = nlohmann::json::array();
  for (int k = -f.n_modes(); k <= f.n_modes(); ++k) arr.push_back({f[k].real(), f[k].imag()});
  j = nlohmann::json{{"n_modes", f.n_modes()}, {"coeffs", arr}};
}

FourierField field_from_json(const nlohmann::json& j) {
  const int n = j.at("n_modes").get<int>();
  const auto& arr = j.at("coeffs");
  if (static_cast<int>(arr.size()) != 2 * n + 1)
    throw DomainError("coeffs length does not match n_modes");
  Eigen::VectorXcd c(2 * n + 1);
  for (int i = 0; i < 2 * n + 1; ++i) c[i] = cplx(arr[i].at(0).get<double>(), arr[i].at(1).get<double>());
  FourierField f(n, std::move(c));
  if (f.satisfies_even_real(0.0)) f.set_parity(Parity::even_real);
  return f;
}

}  // namespace blowup::spectral
