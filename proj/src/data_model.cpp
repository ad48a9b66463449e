#include "rdream/data_model.hpp"

#include <Eigen/Eigenvalues>

namespace rdream {

Dataset validate_dataset(const Vector& y, const Matrix& x) {
  if (y.size() != x.rows()) throw ShapeMismatchError(y.size(), x.rows());
  if (x.cols() < 1) throw EmptyCovariatesError();
  if (y.size() < 3) throw TooFewObservationsError(y.size());
  for (Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw NonFiniteError("y[" + std::to_string(i) + "]");
  }
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      if (!std::isfinite(x(i, j))) {
        throw NonFiniteError("x[" + std::to_string(i) + "," +
                             std::to_string(j) + "]");
      }
    }
  }
  Dataset d;
  d.y = y;
  d.x = x;
  d.n = y.size();
  d.p = x.cols();
  return d;
}

Matrix inverse_sqrt_spd(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) throw EigenFailureError();
  const Vector& lam = es.eigenvalues();  // ascending
  const double largest = lam[lam.size() - 1];
  const double floor = 1e-10 * largest;
  if (!(lam[0] > floor)) throw SingularCovarianceError(lam[0], largest);
  const Vector inv_sqrt = lam.array().sqrt().inverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

std::pair<Dataset, StandardizationInfo> standardize_covariates(
    const Dataset& d) {
  StandardizationInfo info;
  info.mean = d.x.colwise().mean();
  const Matrix centered = d.x.rowwise() - info.mean.transpose();
  const Matrix cov =
      centered.transpose() * centered / static_cast<double>(d.n - 1);
  info.cov_inv_sqrt = inverse_sqrt_spd(cov);

  Dataset out;
  out.y = d.y;
  out.x = centered * info.cov_inv_sqrt;
  out.n = d.n;
  out.p = d.p;
  return {std::move(out), std::move(info)};
}

}  // namespace rdream
