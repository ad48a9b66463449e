#include "rdream/robust_fit.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace rdream {

namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
  return 0.5 * (hi + v[mid - 1]);
}

double median_of(const Vector& v) {
  std::vector<double> tmp(v.data(), v.data() + v.size());
  return median_inplace(tmp);
}

double huber_objective(const Vector& r, double scale, double k) {
  double obj = 0.0;
  for (Index i = 0; i < r.size(); ++i) obj += huber_rho(r[i] / scale, k);
  return obj;
}

}  // namespace

double huber_rho(double u, double k) {
  const double a = std::abs(u);
  if (a <= k) return 0.5 * u * u;
  return k * a - 0.5 * k * k;
}

double huber_weight(double u, double k) {
  const double a = std::abs(u);
  return a <= k ? 1.0 : k / a;
}

double mad_scale(const Vector& residuals) {
  const double med = median_of(residuals);
  std::vector<double> dev(static_cast<std::size_t>(residuals.size()));
  double max_abs = 0.0;
  for (Index i = 0; i < residuals.size(); ++i) {
    dev[static_cast<std::size_t>(i)] = std::abs(residuals[i] - med);
    max_abs = std::max(max_abs, std::abs(residuals[i]));
  }
  const double mad = median_inplace(dev);
  return std::max(1.4826 * mad, 1e-12 * (1.0 + max_abs));
}

FittedModel fit_m_linear(const Dataset& d, const HuberConfig& cfg) {
  const Index n = d.n;
  const Index p = d.p;
  Matrix design(n, p + 1);
  design.leftCols(p) = d.x;
  design.col(p).setOnes();

  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < p + 1) throw RankDeficientDesignError();

  Vector coef = qr.solve(d.y);
  bool converged = false;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    const Vector resid = d.y - design * coef;
    const double scale = mad_scale(resid);
    Vector w(n);
    for (Index i = 0; i < n; ++i) {
      w[i] = huber_weight(resid[i] / scale, cfg.tuning_k);
    }
    const Matrix wx = w.asDiagonal() * design;
    const Matrix gram = design.transpose() * wx;
    const Vector rhs = wx.transpose() * d.y;
    const Vector next = gram.ldlt().solve(rhs);
    const double change = (next - coef).norm();
    coef = next;
    if (change <= cfg.tol * (1.0 + coef.norm())) {
      converged = true;
      ++iter;
      break;
    }
  }

  FittedModel fit;
  fit.beta = coef.head(p);
  fit.intercept = coef[p];
  fit.theta = Vector(0);
  fit.link = LinkSpec::linear();
  fit.residuals = d.y - design * coef;
  fit.converged = converged;
  fit.iterations = iter;
  return fit;
}

namespace {

struct SingleIndexState {
  Vector beta;
  Vector theta;
  double intercept = 0.0;
};

Vector single_index_residuals(const Dataset& d, const LinkSpec& link,
                              const SingleIndexState& s) {
  const Vector u = d.x * s.beta;
  Vector r(d.n);
  for (Index i = 0; i < d.n; ++i) {
    r[i] = d.y[i] - link.eval(u[i], s.theta) - s.intercept;
  }
  return r;
}

// Coordinate grid over theta, then one local refinement pass around the
// best cell. Scores by the Huber loss after a median location shift.
Vector grid_theta_init(const Dataset& d, const LinkSpec& link,
                       const Vector& beta, double k) {
  const int dim = link.theta_dim;
  if (dim == 0) return Vector(0);
  const std::vector<double> grid = {-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0};
  const Vector u = d.x * beta;

  auto score = [&](const Vector& theta) {
    Vector r(d.n);
    for (Index i = 0; i < d.n; ++i) {
      const double g = link.eval(u[i], theta);
      if (!std::isfinite(g)) return std::numeric_limits<double>::infinity();
      r[i] = d.y[i] - g;
    }
    r.array() -= median_of(r);
    return huber_objective(r, mad_scale(r), k);
  };

  Vector best = Vector::Constant(dim, grid[4]);
  double best_score = score(best);
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  const std::size_t total = [&] {
    double t = std::pow(static_cast<double>(grid.size()), dim);
    return static_cast<std::size_t>(std::min(t, 20000.0));
  }();
  for (std::size_t cell = 0; cell < total; ++cell) {
    Vector theta(dim);
    std::size_t rem = cell;
    for (int j = 0; j < dim; ++j) {
      theta[j] = grid[rem % grid.size()];
      rem /= grid.size();
    }
    const double sc = score(theta);
    if (sc < best_score) {
      best_score = sc;
      best = theta;
    }
  }
  // refine each coordinate on a finer local grid around the best cell
  for (int j = 0; j < dim; ++j) {
    const double c = best[j];
    for (double delta : {-0.75, -0.5, -0.25, 0.25, 0.5, 0.75}) {
      Vector cand = best;
      cand[j] = c + delta;
      const double sc = score(cand);
      if (sc < best_score) {
        best_score = sc;
        best = cand;
      }
    }
  }
  return best;
}

void normalize_direction(const LinkSpec& link, SingleIndexState& s) {
  if (!link.rescale_theta) return;
  double c = s.beta.norm();
  if (c <= 0.0) return;
  for (Index j = 0; j < s.beta.size(); ++j) {
    if (std::abs(s.beta[j]) > 1e-12 * c) {
      if (s.beta[j] < 0.0) c = -c;
      break;
    }
  }
  s.beta /= c;
  s.theta = link.rescale_theta(s.theta, c);
}

}  // namespace

FittedModel fit_m_single_index(const Dataset& d, const LinkSpec& link,
                               const Vector& init, const HuberConfig& cfg) {
  const Index p = d.p;
  const int dim_theta = link.theta_dim;
  if (init.size() != p + dim_theta) {
    throw Error("init must stack beta and theta, expected length " +
                std::to_string(p + dim_theta));
  }
  if (!link.value) throw GradientUnavailableError("no value function");

  SingleIndexState s;
  s.beta = init.head(p);
  s.theta = init.tail(dim_theta);
  {
    Vector r0 = single_index_residuals(d, link, s);
    s.intercept = median_of(r0);
  }

  const Index nparam = p + dim_theta + 1;
  bool converged = false;
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    const Vector u = d.x * s.beta;
    Vector r(d.n);
    Matrix jac(d.n, nparam);
    for (Index i = 0; i < d.n; ++i) {
      r[i] = d.y[i] - link.eval(u[i], s.theta) - s.intercept;
      const double gu = link.grad_u(u[i], s.theta);
      jac.row(i).head(p) = gu * d.x.row(i);
      if (dim_theta > 0) {
        jac.row(i).segment(p, dim_theta) =
            link.grad_theta(u[i], s.theta).transpose();
      }
      jac(i, nparam - 1) = 1.0;
    }
    const double scale = mad_scale(r);
    Vector w(d.n);
    for (Index i = 0; i < d.n; ++i) {
      w[i] = huber_weight(r[i] / scale, cfg.tuning_k);
    }
    Matrix gram = jac.transpose() * (w.asDiagonal() * jac);
    const double ridge = 1e-10 * std::max(gram.trace(), 1e-300) /
                         static_cast<double>(nparam);
    gram.diagonal().array() += ridge;
    const Vector step = gram.ldlt().solve(jac.transpose() * (w.array() * r.array()).matrix());

    // halve until the Huber objective (at the current scale) decreases
    const double obj0 = huber_objective(r, scale, cfg.tuning_k);
    double eta = 1.0;
    SingleIndexState trial = s;
    bool improved = false;
    for (int halving = 0; halving <= 30; ++halving) {
      trial.beta = s.beta + eta * step.head(p);
      trial.theta = s.theta + eta * step.segment(p, dim_theta);
      trial.intercept = s.intercept + eta * step[nparam - 1];
      const Vector rt = single_index_residuals(d, link, trial);
      if (rt.allFinite() &&
          huber_objective(rt, scale, cfg.tuning_k) <= obj0) {
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) {
      ++iter;
      break;  // stalled; report last iterate, flagged
    }
    const double change = eta * step.norm();
    s = trial;
    if (change <= cfg.tol * (1.0 + s.beta.norm() + s.theta.norm() +
                             std::abs(s.intercept))) {
      converged = true;
      ++iter;
      break;
    }
  }

  normalize_direction(link, s);

  FittedModel fit;
  fit.beta = s.beta;
  fit.theta = s.theta;
  fit.intercept = s.intercept;
  fit.link = link;
  fit.residuals = single_index_residuals(d, link, s);
  fit.converged = converged;
  fit.iterations = iter;
  return fit;
}

FittedModel fit_m_single_index(const Dataset& d, const LinkSpec& link,
                               const HuberConfig& cfg) {
  const FittedModel lin = fit_m_linear(d, cfg);
  Vector beta0 = lin.beta;
  const double norm = beta0.norm();
  if (norm > 0.0) {
    beta0 /= norm;
    for (Index j = 0; j < beta0.size(); ++j) {
      if (std::abs(beta0[j]) > 1e-12) {
        if (beta0[j] < 0.0) beta0 = -beta0;
        break;
      }
    }
  } else {
    beta0.setZero();
    beta0[0] = 1.0;
  }
  const Vector theta0 = grid_theta_init(d, link, beta0, cfg.tuning_k);
  Vector init(d.p + link.theta_dim);
  init.head(d.p) = beta0;
  init.tail(link.theta_dim) = theta0;
  return fit_m_single_index(d, link, init, cfg);
}

}  // namespace rdream
