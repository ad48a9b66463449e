#ifndef RDREAM_DATA_MODEL_HPP
#define RDREAM_DATA_MODEL_HPP

#include <utility>

#include "rdream/types.hpp"

namespace rdream {

// Checks finiteness and shape; n >= 3 and p >= 1 are required.
Dataset validate_dataset(const Vector& y, const Matrix& x);

// Centers and whitens the covariates so the returned dataset has column
// means 0 and identity sample covariance (denominator n-1). Fails with
// SingularCovarianceError when the smallest covariance eigenvalue drops
// below 1e-10 times the largest; no silent regularization.
std::pair<Dataset, StandardizationInfo> standardize_covariates(
    const Dataset& d);

// Symmetric inverse square root of a covariance matrix, same eigenvalue
// floor as standardize_covariates.
Matrix inverse_sqrt_spd(const Matrix& cov);

}  // namespace rdream

#endif  // RDREAM_DATA_MODEL_HPP
