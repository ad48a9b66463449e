#ifndef RDREAM_TESTS_TEST_UTIL_HPP
#define RDREAM_TESTS_TEST_UTIL_HPP

#include <Eigen/Dense>

// Bitwise equality of two dense Eigen objects.
template <typename A, typename B>
bool exact_equal(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.array() == b.array()).all();
}

#endif  // RDREAM_TESTS_TEST_UTIL_HPP
