#ifndef RDREAM_BASELINES_HPP
#define RDREAM_BASELINES_HPP

#include "rdream/test_statistic.hpp"

namespace rdream {

// Full-dimensional robust test: the rank-score double sum with a
// p-dimensional product kernel on standardized covariates, standardized
// with the h^(p/2) rate. Degenerates easily for large p and small h; the
// error is reported, never papered over.
TestReport wq_statistic(const RankScores& scores, const Matrix& x, double h);

// Dimension-reduction test on raw residuals with the residual-moment
// plug-in variance (2/(n(n-1))) sum h^-q K^2 e_i^2 e_j^2.
TestReport gwz_statistic(const Dataset& d, const FittedModel& fit,
                         const SdrResult& sdr, double h);

// Dispatcher used by the simulation engine, the CLI and sensitivity
// curves. Opg/Dee run the main pipeline; Wq fits and ranks, then calls
// wq_statistic with h = 0.5 n^(-1/(p+4)); Gwz fits, runs DEE-based
// dimension reduction and uses the DEE bandwidth rule.
TestReport run_lack_of_fit_test(const Dataset& d, const LinkSpec& link,
                                TestMethod method,
                                const TestOverrides& overrides = {});

}  // namespace rdream

#endif  // RDREAM_BASELINES_HPP
