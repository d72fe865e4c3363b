#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "blowup/error.hpp"
#include "blowup/spectral.hpp"

using namespace blowup;
using namespace blowup::spectral;
using Catch::Approx;

namespace {

FourierField cosine_field(int n, double alpha, double eps) {
  FourierField f(n, Parity::even_real);
  f[0] = alpha;
  f[1] = f[-1] = -eps / 2;
  return f;
}

FourierField random_field(int n, std::uint64_t seed, bool even_real, double decay = 0.3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  FourierField f(n, even_real ? Parity::even_real : Parity::general_complex);
  for (int k = 0; k <= n; ++k) {
    double s = std::exp(-decay * k);
    if (even_real) {
      f[k] = f[-k] = s * U(rng);
    } else {
      f[k] = s * cplx(U(rng), U(rng));
      if (k) f[-k] = s * cplx(U(rng), U(rng));
    }
  }
  return f;
}

double max_diff(const FourierField& a, const FourierField& b) {
  return (a.coeffs() - b.coeffs()).cwiseAbs().maxCoeff();
}

// Direct O(N^2) truncated convolution.
FourierField direct_product(const FourierField& f, const FourierField& g) {
  const int n = f.n_modes();
  FourierField h(n);
  for (int k = -n; k <= n; ++k)
    for (int j = -n; j <= n; ++j)
      if (std::abs(k - j) <= n) h[k] += f[j] * g[k - j];
  return h;
}

}  // namespace

TEST_CASE("nodes and padded size", "[spectral]") {
  auto x = GridValues::nodes(8);
  REQUIRE(x.size() == 8);
  CHECK(x[0] == Approx(-std::numbers::pi));
  CHECK(x[4] == Approx(0.0).margin(1e-15));
  CHECK(padded_size(128) == 512);
  CHECK(padded_size(8) == 32);
  CHECK(padded_size(5) == 16);
}

TEST_CASE("analyze known functions", "[spectral]") {
  const int m = 64;
  GridValues g{GridValues::nodes(m), Eigen::VectorXcd(m)};

  for (int j = 0; j < m; ++j) g.values[j] = 1.0;
  auto c = analyze(g, 8);
  CHECK(std::abs(c[0] - 1.0) < 1e-15);
  for (int k = 1; k <= 8; ++k) CHECK(std::abs(c[k]) < 1e-15);

  for (int j = 0; j < m; ++j) g.values[j] = std::cos(g.points[j]);
  c = analyze(g, 8);
  CHECK(std::abs(c[1] - 0.5) < 1e-15);
  CHECK(std::abs(c[-1] - 0.5) < 1e-15);
  CHECK(std::abs(c[0]) < 1e-15);

  for (int j = 0; j < m; ++j) g.values[j] = 1.0 - 0.1 * std::cos(g.points[j]);
  c = analyze(g, 8);
  CHECK(std::abs(c[0] - 1.0) < 1e-15);
  CHECK(std::abs(c[1] + 0.05) < 1e-15);
  CHECK(std::abs(c[-1] + 0.05) < 1e-15);

  for (int j = 0; j < m; ++j) g.values[j] = std::sin(3 * g.points[j]);
  c = analyze(g, 8);
  CHECK(std::abs(c[3] - cplx(0, -0.5)) < 1e-15);
  CHECK(std::abs(c[-3] - cplx(0, 0.5)) < 1e-15);
}

TEST_CASE("analyze rejects undersized grids", "[spectral]") {
  GridValues g{GridValues::nodes(16), Eigen::VectorXcd::Zero(16)};
  CHECK_THROWS_AS(analyze(g, 8), DomainError);
  CHECK_THROWS_AS(synthesize(FourierField(8), 16), DomainError);
  CHECK_THROWS_AS(FourierField(4, Eigen::VectorXcd::Zero(8)), DomainError);
}

TEST_CASE("synthesize/analyze round trip", "[spectral]") {
  for (bool er : {true, false}) {
    auto f = random_field(32, 7 + er, er, 0.0);
    auto back = analyze(synthesize(f, padded_size(32)), 32);
    CHECK(max_diff(f, back) < 1e-14);
    back = analyze(synthesize(f, 65), 32);
    CHECK(max_diff(f, back) < 1e-14);
  }
}

TEST_CASE("differentiation", "[spectral]") {
  const int n = 16;
  FourierField c(n);
  c[1] = c[-1] = 0.5;  // cos x
  auto d1 = differentiate(c, 1);
  auto gv = synthesize(d1, 64);
  for (int j = 0; j < 64; ++j) CHECK(std::abs(gv.values[j] + std::sin(gv.points[j])) < 1e-15);
  auto d2 = differentiate(c, 2);
  CHECK(max_diff(d2, -1.0 * c) < 1e-16);

  // exp(sin x), derivative cos x exp(sin x); grid oracle.
  const int m = 256;
  GridValues g{GridValues::nodes(m), Eigen::VectorXcd(m)};
  for (int j = 0; j < m; ++j) g.values[j] = std::exp(std::sin(g.points[j]));
  auto e = analyze(g, 40);
  auto de = synthesize(differentiate(e, 1), m);
  for (int j = 0; j < m; ++j) {
    double x = de.points[j];
    CHECK(std::abs(de.values[j] - std::cos(x) * std::exp(std::sin(x))) < 1e-13);
  }
  CHECK_THROWS_AS(differentiate(c, 3), DomainError);
}

TEST_CASE("convolve matches hand expansion and direct sums", "[spectral]") {
  // (alpha - eps cos x)^2 = alpha^2 + eps^2/2 - 2 alpha eps cos x + eps^2/2 cos 2x
  const double a = 1.0, e = 0.1;
  auto v = cosine_field(8, a, e);
  auto sq = convolve(v, v);
  CHECK(std::abs(sq[0] - (a * a + e * e / 2)) < 1e-15);
  CHECK(std::abs(sq[1] + a * e) < 1e-15);
  CHECK(std::abs(sq[-1] + a * e) < 1e-15);
  CHECK(std::abs(sq[2] - e * e / 4) < 1e-15);
  CHECK(std::abs(sq[3]) < 1e-15);
  CHECK(sq.parity() == Parity::even_real);

  // cos x * cos x = 1/2 + 1/2 cos 2x
  FourierField c(8);
  c[1] = c[-1] = 0.5;
  auto cc = convolve(c, c);
  CHECK(std::abs(cc[0] - 0.5) < 1e-15);
  CHECK(std::abs(cc[2] - 0.25) < 1e-15);

  // Full-band random fields: the padded product is the exact truncated convolution.
  for (std::uint64_t s : {1u, 2u, 3u}) {
    auto f = random_field(24, s, false, 0.0);
    auto g = random_field(24, s + 10, false, 0.0);
    CHECK(max_diff(convolve(f, g), direct_product(f, g)) < 1e-13);
  }
  CHECK_THROWS_AS(convolve(FourierField(4), FourierField(5)), DomainError);
}

TEST_CASE("convolve is bilinear and commutative", "[spectral]") {
  auto f = random_field(16, 4, false);
  auto g = random_field(16, 5, false);
  auto h = random_field(16, 6, false);
  CHECK(max_diff(convolve(f, g), convolve(g, f)) < 1e-15);
  CHECK(max_diff(convolve(f, 2.0 * g + h), 2.0 * convolve(f, g) + convolve(f, h)) < 1e-14);
}

TEST_CASE("divide", "[spectral]") {
  const int n = 32;
  auto v = cosine_field(n, 1.0, 0.1);
  FourierField one(n, Parity::even_real);
  one[0] = 1.0;
  CHECK(max_diff(divide(v, one), v) < 1e-15);
  CHECK(max_diff(divide(v, v), one) < 1e-15);

  // h, g band-limited to N/2: f = h g is exact, so f / g must return h.
  for (std::uint64_t s : {11u, 12u, 13u}) {
    auto h = random_field(n, s, true, 0.0);
    auto g = random_field(n, s + 100, true, 1.0);
    for (int k = n / 2 + 1; k <= n; ++k) h[k] = h[-k] = g[k] = g[-k] = 0.0;
    g[0] = 3.0;  // keeps |g| >= 0.5 on the grid
    auto f = convolve(h, g);
    CHECK(max_diff(divide(f, g), h) < 1e-12);
  }

  FourierField z(n);
  z[1] = z[-1] = 0.5;  // cos x vanishes at +-pi/2
  CHECK_THROWS_AS(divide(v, z), DivisorTooSmall);
}

TEST_CASE("(v_x)^2 / v against a fine-grid pointwise oracle", "[spectral]") {
  const int n = 128;
  const double a = 1.0, e = 0.1;
  auto v = cosine_field(n, a, e);
  auto vx = differentiate(v, 1);
  auto q = divide(convolve(vx, vx), v);

  const int m = 4096;
  GridValues g{GridValues::nodes(m), Eigen::VectorXcd(m)};
  for (int j = 0; j < m; ++j) {
    double x = g.points[j];
    g.values[j] = e * e * std::sin(x) * std::sin(x) / (a - e * std::cos(x));
  }
  auto oracle = analyze(g, n);
  CHECK(max_diff(q, oracle) < 1e-12);
  CHECK(q.satisfies_even_real(1e-14));
}

TEST_CASE("eval_at on and off the real axis", "[spectral]") {
  FourierField c(8, Parity::even_real);
  c[1] = c[-1] = 0.5;
  CHECK(std::abs(eval_at(c, 0.0) - 1.0) < 1e-15);
  CHECK(std::abs(eval_at(c, std::numbers::pi) + 1.0) < 1e-15);

  // cos(i y) = cosh y; the oracle is a 50-digit arccosh.
  using big = boost::multiprecision::cpp_bin_float_50;
  double y = static_cast<double>(boost::multiprecision::acosh(big(10)));
  CHECK(y == Approx(2.993222846126381).epsilon(1e-15));
  CHECK(std::abs(eval_at(c, cplx(0, y)) - 10.0) < 1e-12);

  auto v = cosine_field(8, 1.0, 0.1);
  CHECK(std::abs(eval_at(v, cplx(0, y))) < 1e-13);  // the zero of 1 - 0.1 cos x

  FourierField big_n(200);
  big_n[200] = 1.0;
  CHECK_THROWS_AS(eval_at(big_n, cplx(0, 4.0)), OverflowError);
  CHECK_NOTHROW(eval_at(big_n, cplx(0, 4.0), 100));
}

TEST_CASE("eval_at agrees with synthesize on the grid", "[spectral]") {
  auto f = random_field(20, 21, false);
  auto g = synthesize(f, 64);
  for (int j = 0; j < 64; ++j) CHECK(std::abs(eval_at(f, g.points[j]) - g.values[j]) < 1e-14);
}

TEST_CASE("Parseval", "[spectral]") {
  auto f = random_field(32, 31, false, 0.1);
  const int m = 128;
  auto g = synthesize(f, m);
  double grid = g.values.squaredNorm() / m;
  double coef = f.coeffs().squaredNorm();
  CHECK(grid == Approx(coef).epsilon(1e-14));
}

TEST_CASE("even_real closure", "[spectral]") {
  auto f = random_field(32, 41, true);
  auto g = random_field(32, 42, true);
  g[0] = 4.0;
  CHECK(f.satisfies_even_real());
  CHECK(convolve(f, g).satisfies_even_real(1e-14));
  CHECK(divide(f, g).satisfies_even_real(1e-14));
  CHECK(differentiate(f, 2).satisfies_even_real());
  CHECK(differentiate(f, 1).parity() == Parity::general_complex);

  auto h = f;
  h[3] += cplx(1e-12, 1e-12);
  CHECK_FALSE(h.satisfies_even_real());
  h.project_even_real();
  CHECK(h.satisfies_even_real(0.0));
}

TEST_CASE("json round trip", "[spectral]") {
  auto f = random_field(10, 51, true);
  nlohmann::json j;
  to_json(j, f);
  auto g = field_from_json(j);
  CHECK(g.n_modes() == 10);
  CHECK(max_diff(f, g) == 0.0);
  CHECK(g.parity() == Parity::even_real);
  j["n_modes"] = 11;
  CHECK_THROWS_AS(field_from_json(j), DomainError);
}
