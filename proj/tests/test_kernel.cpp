#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "rdream/kernel.hpp"

using namespace rdream;

namespace {

// Adaptive Simpson quadrature, used as the independent integration oracle.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fb, double fm, double eps,
                        int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, fm, flm, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, 0.5 * eps, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double eps) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

}  // namespace

TEST_SUITE_BEGIN("kernel");

TEST_CASE("quartic kernel fixtures") {
  CHECK(quartic_kernel(0.0) == 0.9375);
  CHECK(quartic_kernel(1.0) == 0.0);
  CHECK(quartic_kernel(-1.0) == 0.0);
  CHECK(quartic_kernel(0.5) == 0.52734375);
  CHECK(quartic_kernel(1.5) == 0.0);
  CHECK(quartic_kernel(-7.0) == 0.0);
}

TEST_CASE("kernel symmetry") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = u(gen);
    CHECK(quartic_kernel(x) == quartic_kernel(-x));
  }
}

TEST_CASE("kernel integrals by quadrature") {
  const double mass =
      integrate([](double u) { return quartic_kernel(u); }, -1.0, 1.0, 1e-13);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  const double second = integrate(
      [](double u) {
        const double k = quartic_kernel(u);
        return k * k;
      },
      -1.0, 1.0, 1e-13);
  CHECK(second == doctest::Approx(5.0 / 7.0).epsilon(1e-10));
}

TEST_CASE("product kernel") {
  Vector u1(1);
  u1 << 0.3;
  CHECK(product_kernel(u1) == quartic_kernel(0.3));

  Vector u2(2);
  u2 << 0.0, 0.0;
  CHECK(product_kernel(u2) == 0.87890625);

  Vector u3(3);
  u3 << 0.2, 1.0, 0.1;
  CHECK(product_kernel(u3) == 0.0);
  u3 << 0.2, -1.2, 0.1;
  CHECK(product_kernel(u3) == 0.0);
}

TEST_CASE("bandwidth rules") {
  BandwidthRule opg{BandwidthMethod::OpgTest, 0.0};
  BandwidthRule dee{BandwidthMethod::DeeTest, 0.0};
  CHECK(bandwidth(opg, 100, 1) ==
        doctest::Approx(1.8 * std::pow(100.0, -0.2)).epsilon(1e-14));
  CHECK(bandwidth(dee, 100, 1) ==
        doctest::Approx(0.5 * std::pow(100.0, -0.2)).epsilon(1e-14));
  CHECK(bandwidth(opg, 100, 2) ==
        doctest::Approx(1.8 * std::pow(100.0, -1.0 / 6.0)).epsilon(1e-14));
  CHECK(bandwidth(opg, 100, 1) == doctest::Approx(0.716593).epsilon(1e-5));
  CHECK(bandwidth(dee, 100, 1) == doctest::Approx(0.199054).epsilon(1e-5));

  BandwidthRule fixed{BandwidthMethod::Fixed, 0.37};
  CHECK(bandwidth(fixed, 100, 1) == 0.37);
  BandwidthRule bad{BandwidthMethod::Fixed, 0.0};
  CHECK_THROWS_AS(bandwidth(bad, 100, 1), DegenerateBandwidthError);
}

TEST_CASE("pairwise weights basics") {
  Matrix z(2, 1);
  z << 1.7, 1.7;
  const Matrix w = pairwise_weights(z, 1.0);
  CHECK(w(0, 1) == 0.9375);
  CHECK(w(1, 0) == 0.9375);
  CHECK(w(0, 0) == 0.0);
  CHECK(w(1, 1) == 0.0);

  Matrix far(2, 2);
  far << 0.0, 0.0, 5.0, 0.1;
  CHECK(pairwise_weights(far, 1.0)(0, 1) == 0.0);

  CHECK_THROWS_AS(pairwise_weights(z, 0.0), DegenerateBandwidthError);
  CHECK_THROWS_AS(pairwise_weights(z, -1.0), DegenerateBandwidthError);
}

TEST_CASE("pairwise weights symmetry on random input") {
  std::mt19937 gen(11);
  std::normal_distribution<double> nd;
  Matrix z(20, 2);
  for (Index i = 0; i < 20; ++i) {
    z(i, 0) = nd(gen);
    z(i, 1) = nd(gen);
  }
  const Matrix w = pairwise_weights(z, 0.8);
  CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weights scaling identity") {
  std::mt19937 gen(13);
  std::normal_distribution<double> nd;
  Matrix z(30, 2);
  for (Index i = 0; i < 30; ++i) {
    z(i, 0) = nd(gen);
    z(i, 1) = nd(gen);
  }
  const double h = 0.9;
  const double c = 2.0;
  const Matrix w = pairwise_weights(z, h);
  const Matrix w_scaled = pairwise_weights(c * z, c * h);
  // W(z, h) = c^q W(c z, c h)
  CHECK((w - c * c * w_scaled).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("windowed path matches the dense oracle past the size cutoff") {
  std::mt19937 gen(17);
  std::normal_distribution<double> nd;
  const Index n = 2500;
  Matrix z(n, 1);
  for (Index i = 0; i < n; ++i) z(i, 0) = nd(gen);
  const double h = 0.05;
  const Matrix fast = pairwise_weights(z, h);  // n > 2000 takes the window
  const Matrix dense = detail::pairwise_weights_dense(z, h);
  CHECK((fast - dense).cwiseAbs().maxCoeff() == 0.0);
}

TEST_SUITE_END();
