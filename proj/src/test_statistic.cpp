#include "rdream/test_statistic.hpp"

#include <cmath>
#include <limits>

#include "rdream/baselines.hpp"
#include "rdream/chi_square.hpp"
#include "rdream/kernel.hpp"
#include "rdream/robust_fit.hpp"

namespace rdream {

std::string to_string(TestMethod m) {
  switch (m) {
    case TestMethod::Opg:
      return "opg";
    case TestMethod::Dee:
      return "dee";
    case TestMethod::Wq:
      return "wq";
    case TestMethod::Gwz:
      return "gwz";
  }
  return "?";
}

double vn_statistic(const RankScores& scores, const Matrix& weights) {
  const Index n = scores.scores.size();
  if (weights.rows() != n || weights.cols() != n) {
    throw Error("weight matrix does not match the score vector length");
  }
  const double quad = scores.scores.dot(weights * scores.scores);
  return quad / (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
}

double var_estimate(const Matrix& z, double h) {
  if (!(h > 0.0)) throw DegenerateBandwidthError(h);
  const Index n = z.rows();
  const Index q = z.cols();
  const double scale = std::pow(h, -static_cast<double>(q));
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double k = product_kernel(((z.row(i) - z.row(j)) / h).transpose());
      sum += 2.0 * scale * k * k;
    }
  }
  if (sum == 0.0) throw DegenerateVarianceError();
  return sum / (72.0 * static_cast<double>(n) * (static_cast<double>(n) - 1.0));
}

double sn_statistic(double v_n, double var_hat, Index n, double h) {
  if (!(var_hat > 0.0)) throw DegenerateVarianceError();
  const double nn = static_cast<double>(n);
  return (nn - 1.0) / nn * nn * std::sqrt(h) * v_n / std::sqrt(var_hat);
}

double size_adjusted(double s_n, Index n) {
  return (1.0 + 4.0 * std::pow(static_cast<double>(n), -0.8)) * s_n;
}

namespace detail {

void finish_report(TestReport& report) {
  report.s_n_adj = size_adjusted(report.s_n, report.n);
  const double stat = report.s_n_adj * report.s_n_adj;
  report.p_value = 1.0 - chi_square_cdf(stat);
  for (double alpha : {0.01, 0.05, 0.10}) {
    report.reject_at[alpha] = stat >= chi_square_quantile(1.0 - alpha);
  }
}

void mark_degenerate(TestReport& report, const std::string& why) {
  report.degenerate = true;
  report.diagnostic = why;
  report.var_hat = 0.0;
  report.s_n = std::numeric_limits<double>::quiet_NaN();
  report.s_n_adj = std::numeric_limits<double>::quiet_NaN();
  report.p_value.reset();
  report.reject_at.clear();
}

void attach_fit_summary(TestReport& report, const FittedModel& fit) {
  report.beta = fit.beta;
  report.theta = fit.theta;
  report.intercept = fit.intercept;
  report.fit_converged = fit.converged;
  report.fit_iterations = fit.iterations;
}

}  // namespace detail

TestReport rdream_test(const Dataset& d, const LinkSpec& link,
                       SdrMethod method, const TestOverrides& overrides) {
  TestReport report;
  report.method = method == SdrMethod::Opg ? TestMethod::Opg : TestMethod::Dee;
  report.n = d.n;
  report.p = static_cast<int>(d.p);

  const FittedModel fit = link.kind == LinkKind::Linear
                              ? fit_m_linear(d)
                              : fit_m_single_index(d, link);
  detail::attach_fit_summary(report, fit);

  const RankScores scores = centered_rank_transform(fit.residuals);
  report.scores_hash = scores.source_hash;

  const double h_ref = std::pow(static_cast<double>(d.n), -0.2);
  const SdrResult sdr = run_sdr(d, method, h_ref);
  report.rre_c = sdr.ridge_c;
  report.sdr_prefit_h = sdr.opg_prefit_h;

  if (overrides.q_hat) {
    if (*overrides.q_hat < 1 || *overrides.q_hat > d.p) {
      throw Error("dimension override must lie in [1, p]");
    }
    report.q_hat = *overrides.q_hat;
    report.q_overridden = true;
    report.b_hat = d.p == 1 ? Matrix::Ones(1, 1)
                            : estimate_b(sdr.candidate, report.q_hat);
  } else {
    report.q_hat = sdr.q_hat;
    report.b_hat = sdr.b_hat;
  }

  BandwidthRule rule;
  if (overrides.h) {
    rule.method = BandwidthMethod::Fixed;
    rule.fixed_h = *overrides.h;
    report.h_overridden = true;
  } else {
    rule.method = method == SdrMethod::Opg ? BandwidthMethod::OpgTest
                                           : BandwidthMethod::DeeTest;
    report.bandwidth_rate_constant = rule.rate_constant();
  }
  report.h = bandwidth(rule, d.n, report.q_hat);

  const Matrix z = d.x * report.b_hat;
  const Matrix weights = pairwise_weights(z, report.h);
  report.v_n = vn_statistic(scores, weights);
  try {
    report.var_hat = var_estimate(z, report.h);
  } catch (const DegenerateVarianceError& e) {
    detail::mark_degenerate(report, e.what());
    return report;
  }
  report.s_n = sn_statistic(report.v_n, report.var_hat, d.n, report.h);
  detail::finish_report(report);
  return report;
}

Vector sensitivity_curve(const Dataset& d, const LinkSpec& link,
                         TestMethod method, Index index,
                         const Vector& y_grid) {
  if (index < 0 || index >= d.n) throw Error("observation index out of range");
  if (!y_grid.allFinite()) throw NonFiniteError("y_grid");
  Vector out(y_grid.size());
  Dataset perturbed = d;
  for (Index k = 0; k < y_grid.size(); ++k) {
    perturbed.y[index] = y_grid[k];
    const TestReport r = run_lack_of_fit_test(perturbed, link, method);
    out[k] = r.s_n_adj;
  }
  return out;
}

}  // namespace rdream
