#ifndef RDREAM_SDR_HPP
#define RDREAM_SDR_HPP

#include "rdream/types.hpp"

namespace rdream {

enum class SdrMethod { Opg, Dee };

struct SdrResult {
  SdrMethod method = SdrMethod::Opg;
  Matrix candidate;    // symmetric p x p, original covariate scale
  Vector eigenvalues;  // descending, clipped at 0
  int q_hat = 1;
  Matrix b_hat;  // p x q_hat, orthonormal columns
  // provenance
  double opg_prefit_h = 0.0;  // anchor bandwidth before any inflation
  double ridge_c = 0.0;       // ridge used by the eigenvalue-ratio selection
};

// Averaged outer product of local-linear gradient estimates. The local fits
// run on whitened covariates with a product quartic kernel; anchors whose
// kernel support captures fewer than p+2 points inflate their bandwidth by
// 1.5 (at most 4 times) before failing with SingularLocalFitError.
// anchor_bandwidth <= 0 selects the default 2.34 n^(-1/(p+6)).
Matrix opg_matrix(const Dataset& d, double anchor_bandwidth = 0.0);

// Average over all response dichotomizations I(y <= y_j) of the two-slice
// SIR matrix of the whitened covariates, mapped back to the original scale.
Matrix dee_sir_matrix(const Dataset& d);

// argmin over k = 1..p-1 of (lambda_{k+1} + c)/(lambda_k + c) with ridge
// c = 1/sqrt(n * h_ref); ties resolve to the smallest k.
int rre_select_q(const Vector& eigenvalues_desc, Index n, double h_ref);

// Unit eigenvectors of the q_hat largest eigenvalues, each sign-normalized
// so its largest-magnitude entry is positive.
Matrix estimate_b(const Matrix& candidate, int q_hat);

// ||P1 - P2||_F / sqrt(2 max(q1, q2)) for the column-space projectors;
// 0 iff equal spans, 1 for orthogonal spans.
double subspace_distance(const Matrix& b1, const Matrix& b2);

// candidate -> clipped eigenvalues -> q selection -> eigenvectors.
// p = 1 short-circuits to q_hat = 1, b_hat = [1].
SdrResult run_sdr(const Dataset& d, SdrMethod method, double h_ref);

}  // namespace rdream

#endif  // RDREAM_SDR_HPP
