#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

namespace blowup::spectral {

using cplx = std::complex<double>;

enum class Parity { even_real, general_complex };

// Truncated Fourier series sum_{k=-N}^{N} c_k e^{ikx}; c_k lives at index k+N.
class FourierField {
 public:
  explicit FourierField(int n_modes, Parity parity = Parity::general_complex);
  FourierField(int n_modes, Eigen::VectorXcd coeffs, Parity parity = Parity::general_complex);

  int n_modes() const { return n_; }
  Parity parity() const { return parity_; }
  void set_parity(Parity p) { parity_ = p; }

  cplx operator[](int k) const { return c_[k + n_]; }
  cplx& operator[](int k) { return c_[k + n_]; }

  const Eigen::VectorXcd& coeffs() const { return c_; }
  Eigen::VectorXcd& coeffs() { return c_; }

  bool is_finite() const;
  double max_imag() const;
  // Force c_k = c_{-k} real; used to keep even_real fields clean of roundoff drift.
  void project_even_real();
  bool satisfies_even_real(double tol = 1e-13) const;

  FourierField& operator+=(const FourierField& o);
  FourierField& operator-=(const FourierField& o);
  FourierField& operator*=(double s);

 private:
  int n_;
  Eigen::VectorXcd c_;
  Parity parity_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double s, FourierField a);

struct GridValues {
  std::vector<double> points;
  Eigen::VectorXcd values;

  int size() const { return static_cast<int>(points.size()); }
  static std::vector<double> nodes(int m);
};

// Smallest power of two >= 3N+1: the padded grid used for products.
int padded_size(int n_modes);

FourierField analyze(const GridValues& values, int n_modes);
GridValues synthesize(const FourierField& field, int grid_size);
FourierField differentiate(const FourierField& field, int order);
FourierField convolve(const FourierField& f, const FourierField& g);
FourierField divide(const FourierField& f, const FourierField& g, double floor = 1e-13);

// Direct summation; k_max < 0 means all modes.
cplx eval_at(const FourierField& field, cplx z, int k_max = -1);

void to_json(nlohmann::json& j, const FourierField& f);
FourierField field_from_json(const nlohmann::json& j);

}  // namespace blowup::spectral
