#include "rdream/baselines.hpp"

#include <cmath>

#include "rdream/data_model.hpp"
#include "rdream/kernel.hpp"
#include "rdream/robust_fit.hpp"

namespace rdream {

TestReport wq_statistic(const RankScores& scores, const Matrix& x, double h) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (scores.scores.size() != n) {
    throw Error("score vector does not match the covariate row count");
  }
  TestReport report;
  report.method = TestMethod::Wq;
  report.n = n;
  report.p = static_cast<int>(p);
  report.q_hat = static_cast<int>(p);
  report.b_hat = Matrix::Identity(p, p);
  report.h = h;
  report.scores_hash = scores.source_hash;

  Dataset raw;
  raw.y = Vector::Zero(n);
  raw.x = x;
  raw.n = n;
  raw.p = p;
  const Matrix xs = standardize_covariates(raw).first.x;

  const Matrix weights = pairwise_weights(xs, h);
  report.v_n = vn_statistic(scores, weights);
  try {
    report.var_hat = var_estimate(xs, h);
  } catch (const DegenerateVarianceError& e) {
    detail::mark_degenerate(report, e.what());
    return report;
  }
  const double nn = static_cast<double>(n);
  report.s_n = (nn - 1.0) / nn * nn *
               std::pow(h, static_cast<double>(p) / 2.0) * report.v_n /
               std::sqrt(report.var_hat);
  detail::finish_report(report);
  return report;
}

TestReport gwz_statistic(const Dataset& d, const FittedModel& fit,
                         const SdrResult& sdr, double h) {
  if (!(h > 0.0)) throw DegenerateBandwidthError(h);
  const Index n = d.n;
  const Index q = sdr.b_hat.cols();
  TestReport report;
  report.method = TestMethod::Gwz;
  report.n = n;
  report.p = static_cast<int>(d.p);
  report.q_hat = sdr.q_hat;
  report.b_hat = sdr.b_hat;
  report.h = h;
  report.rre_c = sdr.ridge_c;
  detail::attach_fit_summary(report, fit);

  const Matrix z = d.x * sdr.b_hat;
  const Vector& e = fit.residuals;
  const Matrix weights = pairwise_weights(z, h);
  report.v_n = e.dot(weights * e) /
               (static_cast<double>(n) * (static_cast<double>(n) - 1.0));

  // residual-moment plug-in variance
  const double scale = std::pow(h, -static_cast<double>(q));
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double k = product_kernel(((z.row(i) - z.row(j)) / h).transpose());
      sum += 4.0 * scale * k * k * e[i] * e[i] * e[j] * e[j];
    }
  }
  if (sum == 0.0) {
    detail::mark_degenerate(report, DegenerateVarianceError().what());
    return report;
  }
  report.var_hat =
      sum / (static_cast<double>(n) * (static_cast<double>(n) - 1.0));
  report.s_n = static_cast<double>(n) * std::sqrt(h) * report.v_n /
               std::sqrt(report.var_hat);
  detail::finish_report(report);
  return report;
}

TestReport run_lack_of_fit_test(const Dataset& d, const LinkSpec& link,
                                TestMethod method,
                                const TestOverrides& overrides) {
  if (method == TestMethod::Opg || method == TestMethod::Dee) {
    return rdream_test(
        d, link, method == TestMethod::Opg ? SdrMethod::Opg : SdrMethod::Dee,
        overrides);
  }

  const FittedModel fit = link.kind == LinkKind::Linear
                              ? fit_m_linear(d)
                              : fit_m_single_index(d, link);

  if (method == TestMethod::Wq) {
    const RankScores scores = centered_rank_transform(fit.residuals);
    const double h =
        overrides.h ? *overrides.h
                    : 0.5 * std::pow(static_cast<double>(d.n),
                                     -1.0 / (static_cast<double>(d.p) + 4.0));
    TestReport report = wq_statistic(scores, d.x, h);
    detail::attach_fit_summary(report, fit);
    report.h_overridden = overrides.h.has_value();
    if (!overrides.h) report.bandwidth_rate_constant = 0.5;
    return report;
  }

  // Gwz: DEE-based dimension reduction, DEE bandwidth rule
  const double h_ref = std::pow(static_cast<double>(d.n), -0.2);
  SdrResult sdr = run_sdr(d, SdrMethod::Dee, h_ref);
  if (overrides.q_hat) {
    if (*overrides.q_hat < 1 || *overrides.q_hat > d.p) {
      throw Error("dimension override must lie in [1, p]");
    }
    sdr.q_hat = *overrides.q_hat;
    sdr.b_hat = d.p == 1 ? Matrix::Ones(1, 1)
                         : estimate_b(sdr.candidate, sdr.q_hat);
  }
  BandwidthRule rule;
  if (overrides.h) {
    rule.method = BandwidthMethod::Fixed;
    rule.fixed_h = *overrides.h;
  } else {
    rule.method = BandwidthMethod::DeeTest;
  }
  const double h = bandwidth(rule, d.n, sdr.q_hat);
  TestReport report = gwz_statistic(d, fit, sdr, h);
  report.h_overridden = overrides.h.has_value();
  report.q_overridden = overrides.q_hat.has_value();
  if (!overrides.h) report.bandwidth_rate_constant = rule.rate_constant();
  const RankScores scores = centered_rank_transform(fit.residuals);
  report.scores_hash = scores.source_hash;
  return report;
}

}  // namespace rdream
