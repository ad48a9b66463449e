#ifndef RDREAM_ROBUST_FIT_HPP
#define RDREAM_ROBUST_FIT_HPP

#include "rdream/types.hpp"

namespace rdream {

struct HuberConfig {
  double tuning_k = 1.345;  // in residual-MAD units
  int max_iter = 200;
  double tol = 1e-9;  // relative parameter-change threshold
};

// 1.4826 * median(|r - median(r)|), floored away from zero so that exact
// fits keep unit weights instead of dividing by zero.
double mad_scale(const Vector& residuals);

double huber_rho(double u, double k);
double huber_weight(double u, double k);

// Huber M-fit of y on [x, 1] by iteratively reweighted least squares with
// the MAD scale re-estimated every iteration. The intercept is always
// fitted; residuals are y - x*beta - intercept.
FittedModel fit_m_linear(const Dataset& d, const HuberConfig& cfg = {});

// Huber M-fit of y = g(beta'x, theta) + intercept + e by damped
// Gauss-Newton. init stacks (beta, theta) of length p + theta_dim. When the
// link absorbs scale, beta is normalized to unit norm with its first
// nonzero coordinate positive after convergence.
FittedModel fit_m_single_index(const Dataset& d, const LinkSpec& link,
                               const Vector& init,
                               const HuberConfig& cfg = {});

// Same, with the default warm start: beta from fit_m_linear (normalized),
// theta from a coordinate grid search refined around its best cell.
FittedModel fit_m_single_index(const Dataset& d, const LinkSpec& link,
                               const HuberConfig& cfg = {});

}  // namespace rdream

#endif  // RDREAM_ROBUST_FIT_HPP
