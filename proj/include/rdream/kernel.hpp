#ifndef RDREAM_KERNEL_HPP
#define RDREAM_KERNEL_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdream/errors.hpp"
#include "rdream/types.hpp"

namespace rdream {

enum class KernelKind { Quartic };

struct KernelSpec {
  KernelKind kind = KernelKind::Quartic;
  int dim = 1;
};

enum class BandwidthMethod { OpgTest, DeeTest, Fixed };

// h = constant * n^(-1/(q+4)) for the two rate rules, or a fixed value.
struct BandwidthRule {
  BandwidthMethod method = BandwidthMethod::OpgTest;
  double fixed_h = 0.0;

  double rate_constant() const {
    return method == BandwidthMethod::OpgTest ? 1.8 : 0.5;
  }
};

// Quartic (biweight) density 15/16 (1 - u^2)^2 on |u| <= 1.
template <typename Scalar>
Scalar quartic_kernel(Scalar u) {
  if (!(u >= Scalar(-1) && u <= Scalar(1))) return Scalar(0);
  const Scalar t = Scalar(1) - u * u;
  return Scalar(15.0 / 16.0) * t * t;
}

// Product of univariate quartic kernels over the components of u.
template <typename Derived>
typename Derived::Scalar product_kernel(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  Scalar out(1);
  for (Index j = 0; j < u.size(); ++j) {
    out *= quartic_kernel(u[j]);
    if (out == Scalar(0)) return out;
  }
  return out;
}

inline double bandwidth(const BandwidthRule& rule, Index n, int q_hat) {
  if (rule.method == BandwidthMethod::Fixed) {
    if (!(rule.fixed_h > 0.0)) throw DegenerateBandwidthError(rule.fixed_h);
    return rule.fixed_h;
  }
  return rule.rate_constant() *
         std::pow(static_cast<double>(n), -1.0 / (q_hat + 4.0));
}

namespace detail {

// Exact dense double loop; the reference path and the test oracle.
inline Matrix pairwise_weights_dense(const Matrix& z, double h) {
  const Index n = z.rows();
  const Index q = z.cols();
  const double scale = std::pow(h, -static_cast<double>(q));
  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double k = product_kernel(((z.row(i) - z.row(j)) / h).transpose());
      if (k != 0.0) {
        w(i, j) = scale * k;
        w(j, i) = w(i, j);
      }
    }
  }
  return w;
}

// Compact support lets us skip pairs separated by more than h in the first
// coordinate: sort by z(:,0) and scan a sliding window.
inline Matrix pairwise_weights_sorted(const Matrix& z, double h) {
  const Index n = z.rows();
  const Index q = z.cols();
  const double scale = std::pow(h, -static_cast<double>(q));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&z](Index a, Index b) { return z(a, 0) < z(b, 0); });
  Matrix w = Matrix::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    const Index i = order[static_cast<std::size_t>(a)];
    for (Index b = a + 1; b < n; ++b) {
      const Index j = order[static_cast<std::size_t>(b)];
      if (z(j, 0) - z(i, 0) > h) break;
      const double k = product_kernel(((z.row(i) - z.row(j)) / h).transpose());
      if (k != 0.0) {
        w(i, j) = scale * k;
        w(j, i) = w(i, j);
      }
    }
  }
  return w;
}

}  // namespace detail

// W(i,j) = h^-q * prod_kernel((z_i - z_j)/h) for i != j; diagonal is 0.
inline Matrix pairwise_weights(const Matrix& z, double h) {
  if (!(h > 0.0)) throw DegenerateBandwidthError(h);
  if (z.rows() > 2000) return detail::pairwise_weights_sorted(z, h);
  return detail::pairwise_weights_dense(z, h);
}

}  // namespace rdream

#endif  // RDREAM_KERNEL_HPP
