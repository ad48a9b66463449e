#ifndef RDREAM_ERRORS_HPP
#define RDREAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rdream {

// Base class for all library errors. Non-convergence of iterative fits is
// reported through FittedModel::converged, not through exceptions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(const std::string& where)
      : Error("non-finite entry in " + where) {}
};

class ShapeMismatchError : public Error {
 public:
  ShapeMismatchError(long y_len, long x_rows)
      : Error("response length " + std::to_string(y_len) +
              " does not match covariate row count " + std::to_string(x_rows)) {}
};

class TooFewObservationsError : public Error {
 public:
  explicit TooFewObservationsError(long n, long required = 3)
      : Error("need at least " + std::to_string(required) +
              " observations, got " + std::to_string(n)) {}
};

class EmptyCovariatesError : public Error {
 public:
  EmptyCovariatesError() : Error("covariate matrix has zero columns") {}
};

class SingularCovarianceError : public Error {
 public:
  SingularCovarianceError(double eigenvalue, double largest)
      : Error("sample covariance is numerically singular (eigenvalue " +
              std::to_string(eigenvalue) + " vs largest " +
              std::to_string(largest) + ")") {}
};

class RankDeficientDesignError : public Error {
 public:
  RankDeficientDesignError() : Error("design matrix is rank deficient") {}
};

class GradientUnavailableError : public Error {
 public:
  explicit GradientUnavailableError(const std::string& what)
      : Error("link gradient unavailable: " + what) {}
};

class SingularLocalFitError : public Error {
 public:
  explicit SingularLocalFitError(long anchor)
      : Error("local gradient fit at anchor " + std::to_string(anchor) +
              " has too few in-support neighbours after bandwidth inflation") {}
};

class DegenerateBandwidthError : public Error {
 public:
  explicit DegenerateBandwidthError(double h)
      : Error("bandwidth must be positive, got " + std::to_string(h)) {}
};

class DegenerateVarianceError : public Error {
 public:
  DegenerateVarianceError()
      : Error("variance estimate is zero: every pair lies outside the kernel "
              "support, the statistic cannot be standardized") {}
};

class EigenFailureError : public Error {
 public:
  EigenFailureError() : Error("symmetric eigendecomposition did not converge") {}
};

class FileNotFoundError : public Error {
 public:
  explicit FileNotFoundError(const std::string& path)
      : Error("cannot open file: " + path) {}
};

class MissingColumnError : public Error {
 public:
  explicit MissingColumnError(const std::string& name)
      : Error("column not found in header: " + name) {}
};

class AllRowsDroppedError : public Error {
 public:
  AllRowsDroppedError()
      : Error("every data row was dropped (non-numeric or missing cells)") {}
};

}  // namespace rdream

#endif  // RDREAM_ERRORS_HPP
