#include <doctest.h>

#include <cmath>
#include <random>

#include "rdream/baselines.hpp"
#include "rdream/chi_square.hpp"
#include "rdream/data_model.hpp"
#include "rdream/kernel.hpp"
#include "rdream/rng.hpp"
#include "rdream/simulation.hpp"
#include "rdream/test_statistic.hpp"

using namespace rdream;

namespace {

Matrix random_normal_matrix(Index n, Index p, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> nd;
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) x(i, j) = nd(gen);
  }
  return x;
}

// The double-sum definition evaluated directly, no weight matrix reuse.
double vn_brute_force(const Vector& scores, const Matrix& z, double h) {
  const Index n = z.rows();
  const double scale = std::pow(h, -double(z.cols()));
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      sum += scale * product_kernel(((z.row(i) - z.row(j)) / h).transpose()) *
             scores[i] * scores[j];
    }
  }
  return sum / (double(n) * (double(n) - 1.0));
}

}  // namespace

TEST_SUITE_BEGIN("test_statistic");

TEST_CASE("two-point closed form") {
  Vector resid(2);
  resid << -0.3, 0.9;
  const RankScores scores = centered_rank_transform(resid);
  CHECK(scores.scores[0] == -0.25);
  CHECK(scores.scores[1] == 0.25);

  Matrix z(2, 1);
  z << 1.3, 1.3;  // projected distance 0
  const Matrix w = pairwise_weights(z, 1.0);
  CHECK(vn_statistic(scores, w) == -0.05859375);
}

TEST_CASE("empty kernel support gives zero statistic") {
  Vector resid(3);
  resid << 1.0, 2.0, 3.0;
  const RankScores scores = centered_rank_transform(resid);
  Matrix z(3, 1);
  z << 0.0, 10.0, 20.0;
  CHECK(vn_statistic(scores, pairwise_weights(z, 1.0)) == 0.0);
}

TEST_CASE("matches the brute-force double sum") {
  std::mt19937 gen(404);
  std::normal_distribution<double> nd;
  for (int q : {1, 2}) {
    const Index n = 15;
    Matrix z = random_normal_matrix(n, q, 405 + unsigned(q));
    Vector resid(n);
    for (Index i = 0; i < n; ++i) resid[i] = nd(gen);
    const RankScores scores = centered_rank_transform(resid);
    const double h = 0.7;
    const double direct = vn_statistic(scores, pairwise_weights(z, h));
    CHECK(direct ==
          doctest::Approx(vn_brute_force(scores.scores, z, h)).epsilon(1e-12));
  }
}

TEST_CASE("variance fixtures") {
  Matrix z(2, 1);
  z << 0.4, 0.4;
  CHECK(var_estimate(z, 1.0) ==
        doctest::Approx(0.9375 * 0.9375 / 72.0).epsilon(1e-14));

  Matrix far(2, 1);
  far << 0.0, 5.0;
  CHECK_THROWS_AS(var_estimate(far, 1.0), DegenerateVarianceError);
}

TEST_CASE("variance approaches its population value") {
  // for standard normal projections the limit is (1/72)(5/7)/(2 sqrt(pi))
  const Index n = 2000;
  Matrix z = random_normal_matrix(n, 1, 501);
  const double h = 0.5 * std::pow(double(n), -0.2);
  const double v = var_estimate(z, h);
  const double limit = (1.0 / 72.0) * (5.0 / 7.0) / (2.0 * std::sqrt(M_PI));
  CHECK(std::abs(v - limit) / limit < 0.15);
}

TEST_CASE("standardized statistic arithmetic") {
  CHECK(sn_statistic(0.0, 0.01, 50, 0.3) == 0.0);
  CHECK(sn_statistic(0.01, 0.0025, 100, 0.2) ==
        doctest::Approx(8.854829190899167).epsilon(1e-4));
  const double one = sn_statistic(0.013, 0.004, 77, 0.31);
  const double two = sn_statistic(0.026, 0.004, 77, 0.31);
  CHECK(two == 2.0 * one);
  CHECK_THROWS_AS(sn_statistic(0.01, 0.0, 50, 0.3), DegenerateVarianceError);
}

TEST_CASE("size adjustment factor") {
  CHECK(size_adjusted(1.0, 100) ==
        doctest::Approx(1.1004754572603832).epsilon(1e-12));
  CHECK(size_adjusted(0.0, 7) == 0.0);
  double prev = size_adjusted(1.0, 60);
  for (Index n : {100, 200, 1000000}) {
    const double cur = size_adjusted(1.0, n);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(size_adjusted(1.0, 1000000) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("report invariants on a null dataset") {
  const Index n = 80;
  const Index p = 3;
  Vector beta(p);
  beta << 0.5, 0.5, 0.5;
  const Matrix x = random_normal_matrix(n, p, 601);
  std::mt19937 gen(602);
  std::normal_distribution<double> nd;
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y[i] += nd(gen);
  const Dataset d = validate_dataset(y, x);

  for (SdrMethod method : {SdrMethod::Opg, SdrMethod::Dee}) {
    const TestReport r = rdream_test(d, LinkSpec::linear(), method);
    REQUIRE(!r.degenerate);
    REQUIRE(r.p_value.has_value());
    CHECK(*r.p_value >= 0.0);
    CHECK(*r.p_value <= 1.0);
    // p = 1 - F(s~^2) to 1e-12
    CHECK(*r.p_value == doctest::Approx(1.0 - chi_square_cdf(
                            r.s_n_adj * r.s_n_adj)).epsilon(1e-12));
    CHECK(r.s_n_adj == doctest::Approx(size_adjusted(r.s_n, n)).epsilon(1e-14));
    for (const auto& [alpha, reject] : r.reject_at) {
      CHECK(reject == (r.s_n_adj * r.s_n_adj >=
                       chi_square_quantile(1.0 - alpha)));
    }
    CHECK(r.h > 0.0);
    CHECK(r.q_hat >= 1);
    CHECK(r.var_hat > 0.0);
    CHECK(r.fit_converged);
  }
}

TEST_CASE("permutation invariance under fixed tuning overrides") {
  const Index n = 60;
  const Index p = 3;
  Vector beta(p);
  beta << 0.5, -0.5, 1.0;
  const Matrix x = random_normal_matrix(n, p, 611);
  std::mt19937 gen(612);
  std::normal_distribution<double> nd;
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y[i] += nd(gen);
  const Dataset d = validate_dataset(y, x);

  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index(0));
  std::shuffle(perm.begin(), perm.end(), gen);
  Vector y2(n);
  Matrix x2(n, p);
  for (Index i = 0; i < n; ++i) {
    y2[i] = d.y[perm[i]];
    x2.row(i) = d.x.row(perm[i]);
  }
  const Dataset d2 = validate_dataset(y2, x2);

  TestOverrides overrides;
  overrides.h = 0.4;
  overrides.q_hat = 1;
  for (SdrMethod method : {SdrMethod::Opg, SdrMethod::Dee}) {
    const TestReport a = rdream_test(d, LinkSpec::linear(), method, overrides);
    const TestReport b = rdream_test(d2, LinkSpec::linear(), method, overrides);
    CHECK(a.v_n == doctest::Approx(b.v_n).epsilon(1e-10));
    CHECK(a.s_n == doctest::Approx(b.s_n).epsilon(1e-10));
    CHECK(*a.p_value == doctest::Approx(*b.p_value).epsilon(1e-10));
  }
}

TEST_CASE("monotone residual transforms leave the statistic chain fixed") {
  std::mt19937 gen(627);
  std::normal_distribution<double> nd;
  const Index n = 40;
  Vector resid(n);
  for (Index i = 0; i < n; ++i) resid[i] = nd(gen);
  Matrix z = random_normal_matrix(n, 1, 628);
  const Matrix w = pairwise_weights(z, 0.5);

  const double base = vn_statistic(centered_rank_transform(resid), w);
  for (auto&& phi : {+[](double u) { return 2.0 * u + 3.0; },
                     +[](double u) { return u * u * u; },
                     +[](double u) { return std::exp(u); }}) {
    Vector t(n);
    for (Index i = 0; i < n; ++i) t[i] = phi(resid[i]);
    CHECK(vn_statistic(centered_rank_transform(t), w) == base);
  }
}

TEST_CASE("statistic grows with the sample size under a fixed alternative") {
  auto median_stat = [](Index n) {
    ScenarioSpec spec;
    spec.family = Family::H11;
    spec.a = 1.0;
    spec.n = n;
    spec.contamination = default_contamination(Family::H11);
    const std::uint64_t cell = scenario_cell_hash(spec);
    std::vector<double> stats;
    for (int r = 0; r < 60; ++r) {
      const Dataset d = generate_scenario(spec, derive_seed(21, cell, r)).first;
      const TestReport rep =
          run_lack_of_fit_test(d, LinkSpec::linear(), TestMethod::Opg);
      if (!rep.degenerate) stats.push_back(rep.s_n_adj);
    }
    std::sort(stats.begin(), stats.end());
    return stats[stats.size() / 2];
  };
  CHECK(median_stat(200) > median_stat(100));
}

TEST_CASE("degenerate variance is reported, not fabricated") {
  // points land far apart relative to the overridden bandwidth
  Matrix x(12, 1);
  Vector y(12);
  for (Index i = 0; i < 12; ++i) {
    x(i, 0) = 100.0 * double(i);
    y[i] = 100.0 * double(i);
  }
  const Dataset d = validate_dataset(y, x);
  TestOverrides overrides;
  overrides.h = 1e-6;
  const TestReport r =
      rdream_test(d, LinkSpec::linear(), SdrMethod::Dee, overrides);
  CHECK(r.degenerate);
  CHECK(!r.p_value.has_value());
  CHECK(!r.diagnostic.empty());
  CHECK(r.reject_at.empty());
}

TEST_CASE("dimension override is validated") {
  const Index n = 40;
  Matrix x = random_normal_matrix(n, 3, 641);
  Vector y = x.col(0) + x.col(1);
  const Dataset d = validate_dataset(y, x);
  TestOverrides overrides;
  overrides.q_hat = 5;
  CHECK_THROWS_AS(rdream_test(d, LinkSpec::linear(), SdrMethod::Dee, overrides),
                  Error);
  overrides.q_hat = 0;
  CHECK_THROWS_AS(rdream_test(d, LinkSpec::linear(), SdrMethod::Dee, overrides),
                  Error);
  overrides.q_hat = 2;
  const TestReport r =
      rdream_test(d, LinkSpec::linear(), SdrMethod::Dee, overrides);
  CHECK(r.q_hat == 2);
  CHECK(r.b_hat.cols() == 2);
  CHECK(r.q_overridden);
}

TEST_CASE("sensitivity curve identities") {
  const Index n = 40;
  const Index p = 2;
  Vector beta(p);
  beta << 1.0, -1.0;
  const Matrix x = random_normal_matrix(n, p, 631);
  std::mt19937 gen(632);
  std::normal_distribution<double> nd;
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y[i] += nd(gen);
  const Dataset d = validate_dataset(y, x);

  const TestReport base = rdream_test(d, LinkSpec::linear(), SdrMethod::Dee);
  Vector grid(3);
  grid << d.y[5], d.y[5], d.y[5];
  const Vector curve =
      sensitivity_curve(d, LinkSpec::linear(), TestMethod::Dee, 5, grid);
  CHECK(curve[0] == base.s_n_adj);
  CHECK(curve[1] == curve[0]);
  CHECK(curve[2] == curve[0]);

  CHECK_THROWS_AS(
      sensitivity_curve(d, LinkSpec::linear(), TestMethod::Dee, n, grid),
      Error);
}

TEST_SUITE_END();
