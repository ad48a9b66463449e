#ifndef RDREAM_TYPES_HPP
#define RDREAM_TYPES_HPP

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "rdream/errors.hpp"

namespace rdream {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Observations for a single regression problem. Construct through
// validate_dataset; treat as immutable afterwards.
struct Dataset {
  Vector y;  // length n
  Matrix x;  // n x p
  Index n = 0;
  Index p = 0;
};

// Affine map that whitens the covariates: x_std = (x - mean) * cov_inv_sqrt.
// cov_inv_sqrt is the symmetric inverse square root of the sample covariance.
struct StandardizationInfo {
  Vector mean;
  Matrix cov_inv_sqrt;
};

enum class LinkKind { Linear, UserSingleIndex };

// A known single-index link g(u, theta) with u = beta'x. Gradients fall back
// to central differences when no analytic form is supplied.
struct LinkSpec {
  LinkKind kind = LinkKind::Linear;
  int theta_dim = 0;

  std::function<double(double, const Vector&)> value;
  std::function<double(double, const Vector&)> dvalue_du;
  std::function<Vector(double, const Vector&)> dvalue_dtheta;

  // Present only when the link absorbs the scale of beta: returns theta'
  // with g(v, theta') == g(c*v, theta) for all v, so beta -> beta/c can be
  // compensated without changing fitted values.
  std::function<Vector(const Vector&, double)> rescale_theta;

  double eval(double u, const Vector& theta) const;
  double grad_u(double u, const Vector& theta) const;
  Vector grad_theta(double u, const Vector& theta) const;

  static LinkSpec linear();
  // g(u) = c1 * exp(c2 * u), no free parameters.
  static LinkSpec scaled_exp(double c1, double c2);
  // g(u, theta) = theta_0 * exp(theta_1 * u); beta scale absorbed by theta_1.
  static LinkSpec exp_theta();
};

// Output of the robust null-model fits. residuals[i] = y[i] -
// g(beta'x_i, theta) - intercept, up to evaluation round-off.
struct FittedModel {
  Vector beta;
  Vector theta;
  double intercept = 0.0;
  LinkSpec link;
  Vector residuals;
  bool converged = false;
  int iterations = 0;

  double predict(const Eigen::Ref<const Vector>& xrow) const {
    return link.eval(beta.dot(xrow), theta) + intercept;
  }
};

}  // namespace rdream

#endif  // RDREAM_TYPES_HPP
