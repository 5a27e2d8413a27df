#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "hetseg/select.hpp"
#include "hetseg/simgen.hpp"

using namespace hetseg;

namespace {

std::vector<double> regular_design(int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) t[static_cast<std::size_t>(i - 1)] = static_cast<double>(i) / n;
  return t;
}

// Interval lengths of a piecewise-constant function, last interval included.
std::vector<double> interval_lengths(const PiecewiseConstant& f) {
  std::vector<double> gaps;
  double left = 0.0;
  for (double c : f.cuts()) {
    gaps.push_back(c - left);
    left = c;
  }
  gaps.push_back(1.0 - left);
  return gaps;
}

}  // namespace

TEST_CASE("fixed signals") {
  const auto t100 = regular_design(100);
  SUBCASE("jump counts") {
    CHECK(make_fixed_signal({SignalId::s1, NoiseId::c, 100}).s.jump_count() == 4);
    CHECK(make_fixed_signal({SignalId::s2, NoiseId::c, 100}).s.jump_count() == 4);
    CHECK(make_fixed_signal({SignalId::s3, NoiseId::c, 100}).s.jump_count() == 9);
  }
  SUBCASE("jump magnitudes stay inside [0.1, 1]") {
    for (SignalId id : {SignalId::s1, SignalId::s2, SignalId::s3}) {
      const auto s = make_fixed_signal({id, NoiseId::c, 100}).s;
      for (std::size_t k = 1; k < s.levels().size(); ++k) {
        const double jump = std::abs(s.levels()[k] - s.levels()[k - 1]);
        CHECK(jump >= 0.1);
        CHECK(jump <= 1.0);
      }
    }
  }
  SUBCASE("noise level means") {
    const auto pc1 = make_fixed_signal({SignalId::s1, NoiseId::pc1, 100}).sigma;
    const auto pc3 = make_fixed_signal({SignalId::s1, NoiseId::pc3, 100}).sigma;
    // Continuous means of sigma^2 are exactly 0.015 and 6.25 x 0.015.
    CHECK(mean_square(pc1.piecewise_part()) == doctest::Approx(0.015).epsilon(1e-12));
    CHECK(mean_square(pc3.piecewise_part()) == doctest::Approx(0.09375).epsilon(1e-12));
    CHECK(mean_square(pc3.piecewise_part()) / mean_square(pc1.piecewise_part()) ==
          doctest::Approx(6.25).epsilon(1e-12));
    // Design-point means at t_i = i/100 (33 points at the high level).
    CHECK(c_hat_sigma_true(pc1.at(t100)) == doctest::Approx(0.014875).epsilon(1e-12));
    CHECK(c_hat_sigma_true(pc3.at(t100)) == doctest::Approx(0.09296875).epsilon(1e-12));
  }
  SUBCASE("first signal's pairwise-difference term is 0.04") {
    const auto s1 = make_fixed_signal({SignalId::s1, NoiseId::c, 100}).s;
    double total = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double d = s1(2.0 * i / 100.0) - s1((2.0 * i - 1) / 100.0);
      total += d * d;
    }
    CHECK(total / 100.0 == doctest::Approx(0.04).epsilon(1e-12));
  }
  SUBCASE("sinusoidal noise level") {
    const auto sig = make_fixed_signal({SignalId::s2, NoiseId::s, 100}).sigma;
    CHECK_FALSE(sig.is_piecewise());
    CHECK(sig(1.0) == doctest::Approx(0.5 * std::sin(std::numbers::pi / 4.0)));
    CHECK(sig(0.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(sig.piecewise_part(), std::logic_error);
  }
}

TEST_CASE("random framework draws respect their construction") {
  const int n = 100;
  const int root = 10;
  for (Framework fw : {Framework::A, Framework::B, Framework::C}) {
    Rng rng(41 + static_cast<int>(fw));
    for (int rep = 0; rep < 800; ++rep) {
      const SignalPair pair = draw_random_framework({fw, n}, rng);
      const auto& s = pair.s;
      const auto& sigma = pair.sigma.piecewise_part();

      // breakpoint structure
      const int k_s = s.jump_count();
      const int k_sigma = sigma.jump_count();
      CHECK(k_sigma >= 5);
      CHECK(k_sigma <= root);
      CHECK(k_s >= 3);
      CHECK(k_s <= root);

      // jumps of the mean live in [0.1, 1]
      for (std::size_t k = 1; k < s.levels().size(); ++k) {
        const double jump = std::abs(s.levels()[k] - s.levels()[k - 1]);
        CHECK(jump >= 0.1);
        CHECK(jump <= 1.0);
      }

      // gap sums and floors
      const auto s_gaps = interval_lengths(s);
      double total = 0.0;
      for (double g : s_gaps) total += g;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      if (fw != Framework::C) {
        const double d_min = std::min(5.0 / n, 1.0 / (k_s + 1));
        for (double g : s_gaps) CHECK(g >= d_min - 1e-12);
      } else {
        // one cut sits exactly on the half split
        bool has_half = false;
        double first_half = 0.0;
        for (double c : s.cuts()) has_half |= std::abs(c - 0.5) < 1e-9;
        CHECK(has_half);
        for (double g : s_gaps) {
          if (first_half + g <= 0.5 + 1e-9) first_half += g;
        }
        CHECK(first_half == doctest::Approx(0.5).epsilon(1e-12));
      }

      const auto b_gaps = interval_lengths(sigma);
      double b_total = 0.0;
      const double b_min = std::min(5.0 / n, 1.0 / (k_sigma + 1));
      for (double g : b_gaps) {
        b_total += g;
        CHECK(g >= b_min - 1e-12);
      }
      CHECK(b_total == doctest::Approx(1.0).epsilon(1e-12));

      // noise-level supports
      double left = 0.0;
      for (std::size_t j = 0; j < sigma.levels().size(); ++j) {
        const double beta = sigma.levels()[j];
        if (fw == Framework::C) {
          if (left < 0.5) {
            CHECK(beta >= 0.025);
            CHECK(beta <= 0.2);
          } else {
            CHECK(beta >= 0.1);
            CHECK(beta <= 0.8);
          }
        } else {
          CHECK(beta >= 0.05);
          CHECK(beta <= 0.5);
        }
        left += b_gaps[j];
      }
    }
  }
  Rng rng(1);
  CHECK_THROWS_AS(draw_random_framework({Framework::A, 35}, rng), std::domain_error);
}

TEST_CASE("sample simulation") {
  SUBCASE("zero noise reproduces the signal") {
    Rng rng(12);
    const auto pair = make_fixed_signal({SignalId::s2, NoiseId::c, 50});
    const Sample s = simulate_sample(pair.s, NoiseLevel::piecewise(PiecewiseConstant::constant(0.0)),
                                     50, rng);
    for (int i = 0; i < 50; ++i)
      CHECK(s.y[static_cast<std::size_t>(i)] == pair.s(s.t[static_cast<std::size_t>(i)]));
  }
  SUBCASE("replicate mean and variance approach the signal and noise power") {
    const auto pair = make_fixed_signal({SignalId::s1, NoiseId::c, 20});
    const int n_rep = 400;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < n_rep; ++r) {
      Rng rng = Rng::substream(99, static_cast<std::uint64_t>(r));
      const Sample s = simulate_sample(pair.s, pair.sigma, 20, rng);
      sum += s.y[0];
      sum2 += s.y[0] * s.y[0];
    }
    const double mean = sum / n_rep;
    const double var = sum2 / n_rep - mean * mean;
    const double expected = pair.s(1.0 / 20);
    CHECK(std::abs(mean - expected) < 4.0 * 0.25 / std::sqrt(static_cast<double>(n_rep)));
    // variance of a chi-square estimate: sd ~ sigma^2 sqrt(2/N)
    CHECK(std::abs(var - 0.0625) < 4.0 * 0.0625 * std::sqrt(2.0 / n_rep));
  }
}

TEST_CASE("homoscedastic loss curves nearly coincide at moderate dimensions") {
  // With constant noise the localization rules agree closely for all
  // dimensions up to twice the best one.
  const FixedSetting setting{SignalId::s2, NoiseId::c, 100};
  const DimensionGrid grid = DimensionGrid::make(100, 12);
  const auto curves = run_risk_curves({{"erm", Crit1::erm()}, {"lpo:1", Crit1::lpo(1)}}, setting,
                                      grid, 80, 271);
  int best_d = 1;
  for (std::size_t i = 1; i < curves[0].mean_loss.size(); ++i)
    if (curves[0].mean_loss[i] < curves[0].mean_loss[static_cast<std::size_t>(best_d - 1)])
      best_d = static_cast<int>(i) + 1;
  for (int d = 1; d <= std::min(12, 2 * best_d); ++d) {
    const double e = curves[0].mean_loss[static_cast<std::size_t>(d - 1)];
    const double l = curves[1].mean_loss[static_cast<std::size_t>(d - 1)];
    CHECK(std::abs(e - l) <= 0.15 * std::max(e, l) + 1e-12);
  }
}

TEST_CASE("benchmark harness") {
  const FixedSetting setting{SignalId::s2, NoiseId::pc3, 50};
  const DimensionGrid grid = DimensionGrid::defaults(50);
  std::vector<BenchProcedure> procs;
  procs.push_back({"oracle", true, {}});
  procs.push_back({"ermxbm", false, {Crit1::erm(), Crit2::bm(), grid}});
  procs.push_back({"lpo:1xvf:5", false, {Crit1::lpo(1), Crit2::vf(5), grid}});

  SUBCASE("oracle pseudo-procedure scores exactly one") {
    const BenchReport report = run_benchmark(procs, setting, grid, 40, 7);
    CHECK(report.rows[0].value == 1.0);
    CHECK(report.rows[1].value >= 1.0);
    CHECK(report.rows[2].value >= 1.0);
    CHECK(report.rows[0].kind == IndexKind::cor);
    CHECK(report.rows[1].kind == IndexKind::cor2);
    CHECK(report.rows[2].kind == IndexKind::cor);
  }
  SUBCASE("identical seeds give identical reports, any thread count") {
    const BenchReport a = run_benchmark(procs, setting, grid, 30, 99, 1);
    const BenchReport b = run_benchmark(procs, setting, grid, 30, 99, 4);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(a.rows[i].value == b.rows[i].value);
      CHECK(a.rows[i].stderr_delta == b.rows[i].stderr_delta);
      CHECK(a.rows[i].stderr_naive == b.rows[i].stderr_naive);
    }
  }
  SUBCASE("random frameworks report the framework index") {
    const RandomFrameworkSpec rnd{Framework::A, 50};
    const DimensionGrid g50 = DimensionGrid::defaults(50);
    std::vector<BenchProcedure> small;
    small.push_back({"ermxvf:5", false, {Crit1::erm(), Crit2::vf(5), g50}});
    const BenchReport report = run_benchmark(small, rnd, g50, 20, 3);
    CHECK(report.rows[0].kind == IndexKind::cor_rand);
    CHECK(report.rows[0].setting == "framework:a");
    CHECK(report.rows[0].value >= 1.0);
  }
}

TEST_CASE("worker count resolution") {
  CHECK(resolve_threads(3, 100) == 3);
  CHECK(resolve_threads(16, 4) == 4);  // never more workers than jobs
  setenv("HETSEG_THREADS", "2", 1);
  CHECK(resolve_threads(0, 100) == 2);
  unsetenv("HETSEG_THREADS");
  CHECK(resolve_threads(0, 1) == 1);
}

TEST_CASE("risk curves") {
  const FixedSetting setting{SignalId::s2, NoiseId::pc1, 40};
  const DimensionGrid grid = DimensionGrid::make(40, 10);
  const auto curves = run_risk_curves({{"erm", Crit1::erm()}, {"lpo:1", Crit1::lpo(1)}}, setting,
                                      grid, 30, 17);
  REQUIRE(curves.size() == 2);
  for (const auto& curve : curves) {
    CHECK(curve.dims.size() == 10);
    for (double v : curve.mean_loss) CHECK(v >= 0.0);
    for (double v : curve.stderr_loss) CHECK(v >= 0.0);
  }
  // identical seeds reproduce the curves bitwise
  const auto again = run_risk_curves({{"erm", Crit1::erm()}, {"lpo:1", Crit1::lpo(1)}}, setting,
                                     grid, 30, 17, 3);
  for (std::size_t k = 0; k < curves.size(); ++k)
    for (std::size_t i = 0; i < curves[k].mean_loss.size(); ++i)
      CHECK(curves[k].mean_loss[i] == again[k].mean_loss[i]);
}
