#include "rdream/chi_square.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rdream {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 1e-16;

// P(a,x) by the power series around x = 0. Converges fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxIter; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a,x) by the Lentz continued fraction. Converges fast for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double frac = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    frac *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return frac * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0 || !std::isfinite(x)) {
    if (std::isinf(x) && x > 0.0) return 1.0;
    throw std::domain_error("gamma_p requires a > 0 and x >= 0");
  }
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi_square_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi_square_quantile(double prob, double df) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::domain_error("chi_square_quantile requires prob in (0, 1)");
  }
  // Bracket, bisect to a good region, then polish with Newton.
  double lo = 0.0;
  double hi = df;
  while (chi_square_cdf(hi, df) < prob) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (chi_square_cdf(mid, df) < prob) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-8 * (1.0 + hi)) break;
  }
  double x = 0.5 * (lo + hi);
  const double half_df = 0.5 * df;
  const double log_norm = half_df * std::log(0.5) + std::lgamma(half_df);
  for (int i = 0; i < 60; ++i) {
    const double f = chi_square_cdf(x, df) - prob;
    const double pdf =
        std::exp((half_df - 1.0) * std::log(x) - 0.5 * x - log_norm);
    if (pdf <= 0.0) break;
    const double step = f / pdf;
    x -= step;
    if (x <= lo || x >= hi) x = 0.5 * (lo + hi);  // keep inside the bracket
    if (std::abs(step) < 1e-14 * (1.0 + x)) break;
  }
  return x;
}

}  // namespace rdream
