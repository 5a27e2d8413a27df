#include <cmath>

#include "doctest.h"
#include "hetseg/criteria.hpp"
#include "hetseg/rng.hpp"

using namespace hetseg;

namespace {

Sample regular_sample(std::vector<double> y) {
  const int n = static_cast<int>(y.size());
  std::vector<double> t(y.size());
  for (int i = 1; i <= n; ++i) t[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / n;
  return Sample::make(std::move(t), std::move(y));
}

}  // namespace

TEST_CASE("empirical risk") {
  SUBCASE("interpolating fit has zero risk") {
    const Sample s = regular_sample({0, 0, 4, 4});
    const auto f = fit_regressogram(s, Segmentation::make(4, {3}));
    CHECK(empirical_risk(s, f) == doctest::Approx(0.0));
  }
  SUBCASE("constant 2 against {1,3}") {
    CHECK(empirical_risk(regular_sample({1, 3}), PiecewiseConstant::constant(2.0)) ==
          doctest::Approx(1.0));
  }
  SUBCASE("fitted two-segment regressogram") {
    const Sample s = regular_sample({1, 2, 3, 4});
    const auto f = fit_regressogram(s, Segmentation::make(4, {3}));
    CHECK(empirical_risk(s, f) == doctest::Approx(0.25));
  }
}

TEST_CASE("quadratic loss") {
  const Sample s = regular_sample({1, 2, 3, 4});
  SUBCASE("zero against itself") {
    const PiecewiseConstant truth({0.5}, {0.0, 1.0});
    CHECK(quadratic_loss(truth, truth, s.t) == 0.0);
  }
  SUBCASE("constant offset") {
    CHECK(quadratic_loss(PiecewiseConstant::constant(0.0), PiecewiseConstant::constant(1.5), s.t) ==
          doctest::Approx(2.25));
  }
  SUBCASE("one jump against its mean level, by direct summation") {
    const PiecewiseConstant truth({0.5}, {0.0, 1.0});
    const PiecewiseConstant flat = PiecewiseConstant::constant(0.5);
    double direct = 0.0;
    for (double ti : s.t) {
      const double r = flat(ti) - truth(ti);
      direct += r * r;
    }
    direct /= s.n();
    CHECK(quadratic_loss(truth, flat, s.t) == doctest::Approx(direct));
    CHECK(quadratic_loss(truth, flat, s.t) == doctest::Approx(0.25));
  }
}

TEST_CASE("risk decomposition") {
  const Sample s = regular_sample({0, 0, 0, 0});
  SUBCASE("homoscedastic variance term is D sigma^2 / n") {
    const PiecewiseConstant truth({0.5}, {0.0, 1.0});
    const auto rd = risk_decomposition(truth, PiecewiseConstant::constant(0.3), s.t,
                                       Segmentation::make(4, {3}));
    CHECK(rd.variance_term == doctest::Approx(2 * 0.09 / 4));
    CHECK(rd.mean_noise == doctest::Approx(0.09));
  }
  SUBCASE("constant truth has zero bias for every segmentation") {
    for (int d = 1; d <= 2; ++d)
      for (const auto& seg : enumerate_segmentations(4, d)) {
        const auto rd = risk_decomposition(PiecewiseConstant::constant(1.0),
                                           PiecewiseConstant::constant(0.3), s.t, seg);
        CHECK(rd.bias == doctest::Approx(0.0));
      }
  }
  SUBCASE("heteroscedastic example") {
    const std::vector<double> sigma{0.1, 0.1, 0.3, 0.3};
    const auto rd = risk_decomposition(PiecewiseConstant::constant(0.0), sigma, s.t,
                                       Segmentation::make(4, {3}));
    CHECK(rd.variance_term == doctest::Approx(0.025));
  }
  SUBCASE("constant noise makes the variance term a function of the dimension") {
    std::vector<double> t(10);
    for (int i = 1; i <= 10; ++i) t[static_cast<std::size_t>(i - 1)] = i / 10.0;
    const PiecewiseConstant truth = PiecewiseConstant::constant(0.0);
    for (int d = 1; d <= 5; ++d) {
      for (const auto& seg : enumerate_segmentations(10, d)) {
        const auto rd = risk_decomposition(truth, PiecewiseConstant::constant(0.4), t, seg);
        CHECK(rd.variance_term == doctest::Approx(d * 0.16 / 10).epsilon(1e-12));
      }
    }
  }
  SUBCASE("variance term only sees per-segment noise multisets") {
    // Swapping sigma values inside a segment leaves V(m) unchanged.
    const std::vector<double> a{0.1, 0.4, 0.3, 0.2};
    const std::vector<double> b{0.4, 0.1, 0.2, 0.3};
    const Segmentation seg = Segmentation::make(4, {3});
    const PiecewiseConstant truth = PiecewiseConstant::constant(0.0);
    CHECK(risk_decomposition(truth, a, s.t, seg).variance_term ==
          doctest::Approx(risk_decomposition(truth, b, s.t, seg).variance_term));
  }
}

TEST_CASE("Monte-Carlo agreement of the risk decomposition") {
  // Fixed (s, sigma, m): replicate averages of empirical risk and loss land
  // within 4 standard errors of the decomposition's predictions.
  const int n = 40;
  std::vector<double> t(n);
  for (int i = 1; i <= n; ++i) t[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / n;
  const PiecewiseConstant truth({0.35, 0.7}, {0.0, 1.0, 0.4});
  const PiecewiseConstant sigma({0.5}, {0.3, 0.08});
  const Segmentation seg = Segmentation::make(n, {11, 21, 31});
  const auto rd = risk_decomposition(truth, sigma, t, seg);

  const int n_rep = 800;
  Rng rng(991);
  double sum_risk = 0, sum_risk2 = 0, sum_loss = 0, sum_loss2 = 0;
  for (int r = 0; r < n_rep; ++r) {
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      y[i] = truth(t[i]) + sigma(t[i]) * rng.gaussian();
    const Sample sample = Sample::make(t, y);
    const auto fit = fit_regressogram(sample, seg);
    const double risk = empirical_risk(sample, fit);
    const double loss = quadratic_loss(truth, fit, t);
    sum_risk += risk;
    sum_risk2 += risk * risk;
    sum_loss += loss;
    sum_loss2 += loss * loss;
  }
  const double mean_risk = sum_risk / n_rep;
  const double se_risk = std::sqrt((sum_risk2 / n_rep - mean_risk * mean_risk) / n_rep);
  const double mean_loss = sum_loss / n_rep;
  const double se_loss = std::sqrt((sum_loss2 / n_rep - mean_loss * mean_loss) / n_rep);

  CHECK(std::abs(mean_risk - (rd.bias - rd.variance_term + rd.mean_noise)) < 4 * se_risk);
  CHECK(std::abs(mean_loss - (rd.bias + rd.variance_term)) < 4 * se_loss);
}

TEST_CASE("oracle loss") {
  SUBCASE("noiseless two-level signal is matched exactly") {
    const PiecewiseConstant truth({0.5}, {0.0, 1.0});
    std::vector<double> t, y;
    for (int i = 1; i <= 10; ++i) {
      t.push_back(i / 10.0);
      y.push_back(truth(t.back()));
    }
    const Sample sample = Sample::make(t, y);
    // t_5 = 0.5 already sits on the upper level under the half-open rule.
    const auto [loss, seg] = oracle_loss(truth, sample, DimensionGrid::make(10, 5));
    CHECK(loss == doctest::Approx(0.0));
    CHECK(seg.breakpoints() == std::vector<int>{5});
  }
  SUBCASE("matches exhaustive enumeration for small n") {
    const PiecewiseConstant truth({0.4, 0.8}, {0.0, 0.9, 0.2});
    Rng rng(55);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> t, y;
      const int n = 10;
      for (int i = 1; i <= n; ++i) {
        t.push_back(static_cast<double>(i) / n);
        y.push_back(truth(t.back()) + 0.4 * rng.gaussian());
      }
      const Sample sample = Sample::make(t, y);
      const DimensionGrid grid = DimensionGrid::make(n, 4);
      double best = 1e300;
      for (int d = 1; d <= grid.d_max; ++d)
        for (const auto& seg : enumerate_segmentations(n, d))
          best = std::min(best, quadratic_loss(truth, fit_regressogram(sample, seg), t));
      const auto [loss, seg] = oracle_loss(truth, sample, grid);
      CHECK(loss == doctest::Approx(best).epsilon(1e-12));
    }
  }
}
