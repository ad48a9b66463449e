#include "rdream/types.hpp"

#include <cmath>

namespace rdream {

namespace {

// Central-difference step scaled to the argument magnitude.
double fd_step(double v) { return 1e-6 * (1.0 + std::abs(v)); }

}  // namespace

double LinkSpec::eval(double u, const Vector& theta) const {
  if (!value) throw GradientUnavailableError("link has no value function");
  return value(u, theta);
}

double LinkSpec::grad_u(double u, const Vector& theta) const {
  if (dvalue_du) return dvalue_du(u, theta);
  if (!value) throw GradientUnavailableError("link has no value function");
  const double h = fd_step(u);
  return (value(u + h, theta) - value(u - h, theta)) / (2.0 * h);
}

Vector LinkSpec::grad_theta(double u, const Vector& theta) const {
  if (dvalue_dtheta) return dvalue_dtheta(u, theta);
  if (!value) throw GradientUnavailableError("link has no value function");
  Vector g(theta.size());
  Vector t = theta;
  for (Index j = 0; j < theta.size(); ++j) {
    const double h = fd_step(theta[j]);
    t[j] = theta[j] + h;
    const double up = value(u, t);
    t[j] = theta[j] - h;
    const double dn = value(u, t);
    t[j] = theta[j];
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

LinkSpec LinkSpec::linear() {
  LinkSpec s;
  s.kind = LinkKind::Linear;
  s.theta_dim = 0;
  s.value = [](double u, const Vector&) { return u; };
  s.dvalue_du = [](double, const Vector&) { return 1.0; };
  s.dvalue_dtheta = [](double, const Vector&) { return Vector(0); };
  return s;
}

LinkSpec LinkSpec::scaled_exp(double c1, double c2) {
  LinkSpec s;
  s.kind = LinkKind::UserSingleIndex;
  s.theta_dim = 0;
  s.value = [c1, c2](double u, const Vector&) { return c1 * std::exp(c2 * u); };
  s.dvalue_du = [c1, c2](double u, const Vector&) {
    return c1 * c2 * std::exp(c2 * u);
  };
  s.dvalue_dtheta = [](double, const Vector&) { return Vector(0); };
  return s;
}

LinkSpec LinkSpec::exp_theta() {
  LinkSpec s;
  s.kind = LinkKind::UserSingleIndex;
  s.theta_dim = 2;
  s.value = [](double u, const Vector& t) { return t[0] * std::exp(t[1] * u); };
  s.dvalue_du = [](double u, const Vector& t) {
    return t[0] * t[1] * std::exp(t[1] * u);
  };
  s.dvalue_dtheta = [](double u, const Vector& t) {
    Vector g(2);
    const double e = std::exp(t[1] * u);
    g[0] = e;
    g[1] = t[0] * u * e;
    return g;
  };
  s.rescale_theta = [](const Vector& t, double c) {
    Vector out = t;
    out[1] *= c;
    return out;
  };
  return s;
}

}  // namespace rdream
