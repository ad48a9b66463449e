#include "rdream/sdr.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdream/data_model.hpp"
#include "rdream/kernel.hpp"

namespace rdream {

namespace {

constexpr double kOpgBandwidthConstant = 2.34;
constexpr int kMaxBandwidthInflations = 4;
constexpr double kBandwidthInflation = 1.5;
constexpr double kLocalRidge = 1e-8;
constexpr int kMaxOpgRefinements = 4;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double opg_anchor_bandwidth(Index n, int dim) {
  return kOpgBandwidthConstant *
         std::pow(static_cast<double>(n), -1.0 / (dim + 6.0));
}

// One local-linear sweep: slopes are taken with respect to the whitened
// covariates xs while the kernel localizes on wcoords (the full whitened
// covariates on the first pass, current projections afterwards).
Matrix opg_gradient_matrix(const Matrix& xs, const Vector& y,
                           const Matrix& wcoords, double h0) {
  const Index n = xs.rows();
  const Index p = xs.cols();
  Matrix sigma = Matrix::Zero(p, p);
  Matrix gram(p + 1, p + 1);
  Vector rhs(p + 1);
  Matrix diffs(n, p);
  Vector w(n);
  for (Index j = 0; j < n; ++j) {
    diffs = xs.rowwise() - xs.row(j);
    double h = h0;
    Index in_support = 0;
    for (int attempt = 0;; ++attempt) {
      in_support = 0;
      for (Index i = 0; i < n; ++i) {
        w[i] = product_kernel(((wcoords.row(i) - wcoords.row(j)) / h).transpose());
        if (w[i] > 0.0) ++in_support;
      }
      if (in_support >= p + 2) break;
      if (attempt >= kMaxBandwidthInflations) throw SingularLocalFitError(j);
      h *= kBandwidthInflation;
    }
    gram.setZero();
    rhs.setZero();
    for (Index i = 0; i < n; ++i) {
      if (w[i] == 0.0) continue;
      gram(0, 0) += w[i];
      gram.col(0).tail(p) += w[i] * diffs.row(i).transpose();
      gram.bottomRightCorner(p, p).noalias() +=
          w[i] * diffs.row(i).transpose() * diffs.row(i);
      rhs[0] += w[i] * y[i];
      rhs.tail(p) += w[i] * y[i] * diffs.row(i).transpose();
    }
    gram.row(0).tail(p) = gram.col(0).tail(p).transpose();
    gram.diagonal().array() += kLocalRidge * gram.trace();
    const Vector sol = gram.ldlt().solve(rhs);
    sigma.noalias() += sol.tail(p) * sol.tail(p).transpose();
  }
  return sigma / static_cast<double>(n);
}

// The ratio rule expects an O(1) spectrum; gradient matrices scale with the
// squared response gradients, so the spectrum is normalized to unit trace
// before the ridge is applied.
int rre_select_q_normalized(const Vector& eigenvalues_desc, Index n,
                            double h_ref) {
  const double trace = eigenvalues_desc.sum();
  if (trace <= 0.0) return 1;
  return rre_select_q(eigenvalues_desc / trace, n, h_ref);
}

Vector clipped_descending_eigenvalues(const Matrix& sym, Matrix* vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw EigenFailureError();
  if (vectors != nullptr) *vectors = es.eigenvectors();
  return es.eigenvalues().reverse().cwiseMax(0.0);
}

}  // namespace

Matrix opg_matrix(const Dataset& d, double anchor_bandwidth) {
  const Index n = d.n;
  const Index p = d.p;
  if (n <= p + 1) throw TooFewObservationsError(n, p + 2);
  auto [std_data, info] = standardize_covariates(d);
  const double h0 = anchor_bandwidth > 0.0
                        ? anchor_bandwidth
                        : opg_anchor_bandwidth(n, static_cast<int>(p));
  const Matrix sigma = opg_gradient_matrix(std_data.x, d.y, std_data.x, h0);
  return symmetrized(info.cov_inv_sqrt * sigma * info.cov_inv_sqrt);
}

Matrix dee_sir_matrix(const Dataset& d) {
  const Index n = d.n;
  const Index p = d.p;
  if (n < 10) throw TooFewObservationsError(n, 10);
  auto [std_data, info] = standardize_covariates(d);
  const Matrix& xs = std_data.x;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::sort(order.begin(), order.end(),
            [&d](Index a, Index b) { return d.y[a] < d.y[b]; });

  // For level t = y_j the lower slice {y_i <= y_j} is a prefix of the sorted
  // order. With the whitened covariates centered exactly, the two-slice SIR
  // matrix collapses to s s' / (k (n - k)) with s the prefix sum and k the
  // prefix length; tied levels share one prefix.
  Matrix m = Matrix::Zero(p, p);
  Vector prefix = Vector::Zero(p);
  Index pos = 0;
  while (pos < n) {
    Index end = pos + 1;
    const double level = d.y[order[static_cast<std::size_t>(pos)]];
    prefix += xs.row(order[static_cast<std::size_t>(pos)]).transpose();
    while (end < n && d.y[order[static_cast<std::size_t>(end)]] == level) {
      prefix += xs.row(order[static_cast<std::size_t>(end)]).transpose();
      ++end;
    }
    if (end < n) {
      const double k = static_cast<double>(end);
      m.noalias() +=
          (static_cast<double>(end - pos) / (k * (static_cast<double>(n) - k))) *
          prefix * prefix.transpose();
    }
    pos = end;
  }
  m /= static_cast<double>(n);

  return symmetrized(info.cov_inv_sqrt * m * info.cov_inv_sqrt);
}

int rre_select_q(const Vector& eigenvalues_desc, Index n, double h_ref) {
  const Index p = eigenvalues_desc.size();
  if (p < 2) throw Error("eigenvalue-ratio selection needs p >= 2");
  if (!(h_ref > 0.0)) throw DegenerateBandwidthError(h_ref);
  const double c = 1.0 / std::sqrt(static_cast<double>(n) * h_ref);
  int best_k = 1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (Index k = 1; k < p; ++k) {
    const double ratio =
        (eigenvalues_desc[k] + c) / (eigenvalues_desc[k - 1] + c);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_k = static_cast<int>(k);
    }
  }
  return best_k;
}

Matrix estimate_b(const Matrix& candidate, int q_hat) {
  const Index p = candidate.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(candidate));
  if (es.info() != Eigen::Success) throw EigenFailureError();
  Matrix b(p, q_hat);
  for (int k = 0; k < q_hat; ++k) {
    Vector v = es.eigenvectors().col(p - 1 - k);  // ascending -> take from top
    Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
    b.col(k) = v;
  }
  return b;
}

double subspace_distance(const Matrix& b1, const Matrix& b2) {
  if (b1.rows() != b2.rows()) {
    throw Error("subspace_distance needs matching row dimensions");
  }
  const Matrix p1 = b1 * b1.transpose();
  const Matrix p2 = b2 * b2.transpose();
  const double qmax = static_cast<double>(std::max(b1.cols(), b2.cols()));
  return (p1 - p2).norm() / std::sqrt(2.0 * qmax);
}

SdrResult run_sdr(const Dataset& d, SdrMethod method, double h_ref) {
  SdrResult out;
  out.method = method;

  if (d.p == 1) {
    out.candidate = method == SdrMethod::Opg ? opg_matrix(d) : dee_sir_matrix(d);
    if (method == SdrMethod::Opg) {
      out.opg_prefit_h = opg_anchor_bandwidth(d.n, 1);
    }
    out.eigenvalues = clipped_descending_eigenvalues(out.candidate, nullptr);
    out.q_hat = 1;
    out.b_hat = Matrix::Ones(1, 1);
    return out;
  }

  out.ridge_c = 1.0 / std::sqrt(static_cast<double>(d.n) * h_ref);

  if (method == SdrMethod::Dee) {
    out.candidate = dee_sir_matrix(d);
    out.eigenvalues = clipped_descending_eigenvalues(out.candidate, nullptr);
    out.q_hat = rre_select_q_normalized(out.eigenvalues, d.n, h_ref);
    out.b_hat = estimate_b(out.candidate, out.q_hat);
    return out;
  }

  // Gradient outer product with kernel refinement: the first sweep
  // localizes on all whitened covariates, later sweeps on the current
  // projection estimate (the gradient formula carries B inside the
  // kernel), until the selected dimension stabilizes.
  const Index n = d.n;
  const Index p = d.p;
  if (n <= p + 1) throw TooFewObservationsError(n, p + 2);
  auto [std_data, info] = standardize_covariates(d);
  Matrix wcoords = std_data.x;
  double h = opg_anchor_bandwidth(n, static_cast<int>(p));
  out.opg_prefit_h = h;
  int q_prev = -1;
  for (int pass = 0; pass < kMaxOpgRefinements; ++pass) {
    const Matrix sigma =
        opg_gradient_matrix(std_data.x, d.y, wcoords, h);
    out.candidate =
        symmetrized(info.cov_inv_sqrt * sigma * info.cov_inv_sqrt);
    out.eigenvalues = clipped_descending_eigenvalues(out.candidate, nullptr);
    out.q_hat = rre_select_q_normalized(out.eigenvalues, n, h_ref);
    if (out.q_hat == q_prev && pass >= 1) break;
    q_prev = out.q_hat;
    Matrix std_vectors;
    clipped_descending_eigenvalues(symmetrized(sigma), &std_vectors);
    Matrix b_std(p, out.q_hat);
    for (int k = 0; k < out.q_hat; ++k) {
      b_std.col(k) = std_vectors.col(p - 1 - k);
    }
    wcoords = std_data.x * b_std;
    h = opg_anchor_bandwidth(n, out.q_hat);
  }
  out.b_hat = estimate_b(out.candidate, out.q_hat);
  return out;
}

}  // namespace rdream
