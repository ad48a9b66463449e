#ifndef RDREAM_CHI_SQUARE_HPP
#define RDREAM_CHI_SQUARE_HPP

namespace rdream {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
// Series expansion for x < a + 1, continued fraction otherwise; relative
// error below 1e-13 over the range used here.
double gamma_p(double a, double x);

// Chi-square distribution with df degrees of freedom.
double chi_square_cdf(double x, double df = 1.0);

// Inverse of chi_square_cdf, |relative error| < 1e-12. prob in (0, 1).
double chi_square_quantile(double prob, double df = 1.0);

}  // namespace rdream

#endif  // RDREAM_CHI_SQUARE_HPP
