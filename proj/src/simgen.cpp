#include "hetseg/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace hetseg {

double NoiseLevel::operator()(double t) const {
  if (pc_) return (*pc_)(t);
  return amplitude_ * std::sin(angular_ * t);
}

std::vector<double> NoiseLevel::at(const std::vector<double>& t) const {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = (*this)(t[i]);
  return out;
}

const PiecewiseConstant& NoiseLevel::piecewise_part() const {
  if (!pc_) throw std::logic_error("noise level is not piecewise constant");
  return *pc_;
}

std::function<double(double)> NoiseLevel::as_function() const {
  NoiseLevel copy = *this;
  return [copy](double t) { return copy(t); };
}

SignalPair make_fixed_signal(const FixedSetting& setting) {
  PiecewiseConstant s = [&] {
    switch (setting.signal) {
      case SignalId::s1:
        // Jumps on odd/even pair midpoints of the n=100 design; four unit
        // jumps make the consecutive-difference term exactly 0.04.
        return PiecewiseConstant({0.155, 0.295, 0.615, 0.795}, {0.0, 1.0, 0.0, 1.0, 0.0});
      case SignalId::s2:
        // Four moderate jumps, all in the right (low-noise) region.
        return PiecewiseConstant({0.45, 0.6, 0.75, 0.9}, {0.0, 0.4, 0.0, 0.5, 0.1});
      case SignalId::s3:
        // Nine jumps, ten equal segments.
        return PiecewiseConstant({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
                                 {0.0, 0.7, 0.15, 0.85, 0.3, 1.0, 0.45, 0.75, 0.2, 0.6});
    }
    throw std::invalid_argument("unknown signal id");
  }();

  NoiseLevel sigma = [&] {
    const PiecewiseConstant pc1({1.0 / 3.0}, {0.2, 0.05});
    switch (setting.noise) {
      case NoiseId::c:
        return NoiseLevel::piecewise(PiecewiseConstant::constant(0.25));
      case NoiseId::pc1:
        return NoiseLevel::piecewise(pc1);
      case NoiseId::pc2:
        return NoiseLevel::piecewise(PiecewiseConstant({1.0 / 3.0}, {0.4, 0.1}));
      case NoiseId::pc3:
        return NoiseLevel::piecewise(PiecewiseConstant({1.0 / 3.0}, {0.5, 0.125}));
      case NoiseId::s:
        return NoiseLevel::sine(0.5, std::numbers::pi / 4.0);
    }
    throw std::invalid_argument("unknown noise id");
  }();

  return SignalPair{std::move(s), std::move(sigma)};
}

namespace {

int int_sqrt(int n) {
  int r = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while ((r + 1) * (r + 1) <= n) ++r;
  while (r * r > n) --r;
  return r;
}

// U([-1,-0.1] union [0.1,1]): sign flip of a uniform magnitude.
double draw_jump(Rng& rng) {
  const bool negative = rng.uniform() < 0.5;
  const double magnitude = rng.uniform(0.1, 1.0);
  return negative ? -magnitude : magnitude;
}

// |10 Z1 + Z2| with Z1 ~ Bernoulli(1/2) and Z2 standard Gaussian.
double draw_heavy_weight(Rng& rng) {
  const double z1 = rng.uniform() < 0.5 ? 0.0 : 1.0;
  return std::abs(10.0 * z1 + rng.gaussian());
}

// Gap vector: d_min + (1 - parts*d_min) * u_j / sum(u), rescaled to `total`.
std::vector<double> gaps_from_weights(const std::vector<double>& weights, int n, double total) {
  const int parts = static_cast<int>(weights.size());
  const double d_min = std::min(5.0 / n, 1.0 / parts);
  const double weight_sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> gaps(weights.size());
  for (std::size_t j = 0; j < weights.size(); ++j)
    gaps[j] = total * (d_min + (1.0 - parts * d_min) * weights[j] / weight_sum);
  return gaps;
}

PiecewiseConstant piecewise_from_gaps(const std::vector<double>& gaps,
                                      const std::vector<double>& levels) {
  std::vector<double> cuts(gaps.size() - 1);
  double position = 0.0;
  for (std::size_t j = 0; j + 1 < gaps.size(); ++j) {
    position += gaps[j];
    cuts[j] = position;
  }
  return PiecewiseConstant(std::move(cuts), std::vector<double>(levels));
}

}  // namespace

SignalPair draw_random_framework(const RandomFrameworkSpec& spec, Rng& rng) {
  const int n = spec.n;
  if (n < 36) throw std::domain_error("random framework: n < 36");
  const int root = int_sqrt(n);

  // Regression function.
  std::vector<double> s_gaps;
  int k_s = 0;
  if (spec.framework == Framework::C) {
    const int k_max2 = (root - 1) / 3;
    const int k_max1 = root - 1 - k_max2;
    const int k_s1 = rng.uniform_int(2, k_max1);
    const int k_s2 = rng.uniform_int(0, k_max2);
    k_s = k_s1 + k_s2 + 1;
    std::vector<double> weights(static_cast<std::size_t>(k_s) + 1);
    for (auto& w : weights) w = draw_heavy_weight(rng);
    // Two halves, each carrying half of [0,1].
    const std::vector<double> left(weights.begin(), weights.begin() + k_s1 + 1);
    const std::vector<double> right(weights.begin() + k_s1 + 1, weights.end());
    s_gaps = gaps_from_weights(left, n, 0.5);
    const auto right_gaps = gaps_from_weights(right, n, 0.5);
    s_gaps.insert(s_gaps.end(), right_gaps.begin(), right_gaps.end());
  } else {
    k_s = rng.uniform_int(3, root);
    std::vector<double> weights(static_cast<std::size_t>(k_s) + 1);
    for (auto& w : weights)
      w = (spec.framework == Framework::A) ? rng.uniform() : draw_heavy_weight(rng);
    s_gaps = gaps_from_weights(weights, n, 1.0);
  }
  std::vector<double> alphas(static_cast<std::size_t>(k_s) + 1);
  alphas[0] = draw_jump(rng);
  for (int j = 1; j <= k_s; ++j)
    alphas[static_cast<std::size_t>(j)] = alphas[static_cast<std::size_t>(j - 1)] + draw_jump(rng);
  PiecewiseConstant s = piecewise_from_gaps(s_gaps, alphas);

  // Noise level: identical recipe in all three frameworks, except that the
  // framework-C levels depend on the side of 1/2 their interval starts on.
  const int k_sigma = rng.uniform_int(5, root);
  std::vector<double> weights(static_cast<std::size_t>(k_sigma) + 1);
  for (auto& w : weights) w = rng.uniform();
  const std::vector<double> b_gaps = gaps_from_weights(weights, n, 1.0);
  std::vector<double> betas(static_cast<std::size_t>(k_sigma) + 1);
  double left_edge = 0.0;
  for (int j = 0; j <= k_sigma; ++j) {
    if (spec.framework == Framework::C)
      betas[static_cast<std::size_t>(j)] =
          left_edge < 0.5 ? rng.uniform(0.025, 0.2) : rng.uniform(0.1, 0.8);
    else
      betas[static_cast<std::size_t>(j)] = rng.uniform(0.05, 0.5);
    left_edge += b_gaps[static_cast<std::size_t>(j)];
  }
  PiecewiseConstant sigma = piecewise_from_gaps(b_gaps, betas);

  return SignalPair{std::move(s), NoiseLevel::piecewise(std::move(sigma))};
}

Sample simulate_sample(const PiecewiseConstant& s, const NoiseLevel& sigma, int n, Rng& rng) {
  std::vector<double> t(static_cast<std::size_t>(n));
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double ti = static_cast<double>(i) / n;
    t[static_cast<std::size_t>(i - 1)] = ti;
    y[static_cast<std::size_t>(i - 1)] = s(ti) + sigma(ti) * rng.gaussian();
  }
  return Sample::make(std::move(t), std::move(y));
}

int setting_n(const SettingVariant& setting) {
  return std::visit([](const auto& s) { return s.n; }, setting);
}

std::string setting_name(const SettingVariant& setting) {
  if (const auto* fixed = std::get_if<FixedSetting>(&setting)) {
    std::string name = "s";
    name += std::to_string(static_cast<int>(fixed->signal) + 1);
    name += ':';
    switch (fixed->noise) {
      case NoiseId::c: name += "c"; break;
      case NoiseId::pc1: name += "pc1"; break;
      case NoiseId::pc2: name += "pc2"; break;
      case NoiseId::pc3: name += "pc3"; break;
      case NoiseId::s: name += "s"; break;
    }
    return name;
  }
  const auto& rnd = std::get<RandomFrameworkSpec>(setting);
  switch (rnd.framework) {
    case Framework::A: return "framework:a";
    case Framework::B: return "framework:b";
    case Framework::C: return "framework:c";
  }
  return "framework:?";
}

std::string index_kind_name(IndexKind kind) {
  switch (kind) {
    case IndexKind::cor1: return "Cor1";
    case IndexKind::cor2: return "Cor2";
    case IndexKind::cor: return "Cor";
    case IndexKind::cor_rand: return "CorRand";
  }
  return "?";
}

int resolve_threads(int requested, int jobs) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("HETSEG_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  return std::max(1, std::min(threads, jobs));
}

namespace {

// Runs fn(r) for r in [0, jobs) across workers; results must be written to
// per-r slots so the reduction stays order-independent. The first worker
// exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(int jobs, int threads, Fn&& fn) {
  threads = resolve_threads(threads, jobs);
  if (threads <= 1) {
    for (int r = 0; r < jobs; ++r) fn(r);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int r = w; r < jobs; r += threads) fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& worker : workers) worker.join();
  if (error) std::rethrow_exception(error);
}

double kahan_mean(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(values.size());
}

IndexKind classify_index(const BenchProcedure& proc, bool random_setting) {
  if (random_setting) return IndexKind::cor_rand;
  if (proc.oracle) return IndexKind::cor;
  if (proc.spec.crit2.kind == Crit2::Kind::ideal) return IndexKind::cor1;
  if (proc.spec.crit1.kind == Crit1::Kind::erm) return IndexKind::cor2;
  return IndexKind::cor;
}

}  // namespace

BenchReport run_benchmark(const std::vector<BenchProcedure>& procedures,
                          const SettingVariant& setting, const DimensionGrid& grid, int n_rep,
                          std::uint64_t seed, int threads) {
  if (n_rep < 2) throw std::domain_error("benchmark: need at least 2 replicates");
  const int n = setting_n(setting);
  if (grid.n != n) throw std::invalid_argument("benchmark: grid built for another n");
  const bool random_setting = std::holds_alternative<RandomFrameworkSpec>(setting);
  const std::size_t n_proc = procedures.size();

  std::optional<SignalPair> fixed_pair;
  if (const auto* fixed = std::get_if<FixedSetting>(&setting)) fixed_pair = make_fixed_signal(*fixed);

  std::vector<double> oracle_losses(static_cast<std::size_t>(n_rep));
  std::vector<double> proc_losses(static_cast<std::size_t>(n_rep) * n_proc);

  parallel_for(n_rep, threads, [&](int r) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(r));
    SignalPair pair = fixed_pair ? *fixed_pair
                                 : draw_random_framework(std::get<RandomFrameworkSpec>(setting), rng);
    const Sample sample = simulate_sample(pair.s, pair.sigma, n, rng);
    const SimTruth truth{pair.s, pair.sigma.as_function()};
    const double oracle = oracle_loss(pair.s, sample, grid).first;
    oracle_losses[static_cast<std::size_t>(r)] = oracle;
    for (std::size_t k = 0; k < n_proc; ++k) {
      double loss = oracle;
      if (!procedures[k].oracle) {
        const ProcedureResult res = run_procedure(procedures[k].spec, sample, &truth);
        loss = quadratic_loss(pair.s, res.fitted, sample.t);
      }
      if (loss < oracle)
        throw std::logic_error("benchmark: oracle dominance violated");
      proc_losses[static_cast<std::size_t>(r) * n_proc + k] = loss;
    }
  });

  const double oracle_mean = kahan_mean(oracle_losses);
  BenchReport report;
  for (std::size_t k = 0; k < n_proc; ++k) {
    std::vector<double> losses(static_cast<std::size_t>(n_rep));
    for (int r = 0; r < n_rep; ++r)
      losses[static_cast<std::size_t>(r)] = proc_losses[static_cast<std::size_t>(r) * n_proc + k];
    const double num_mean = kahan_mean(losses);
    const double ratio = num_mean / oracle_mean;

    double s_xx = 0.0, s_yy = 0.0, s_xy = 0.0;
    for (int r = 0; r < n_rep; ++r) {
      const double dx = losses[static_cast<std::size_t>(r)] - num_mean;
      const double dy = oracle_losses[static_cast<std::size_t>(r)] - oracle_mean;
      s_xx += dx * dx;
      s_yy += dy * dy;
      s_xy += dx * dy;
    }
    s_xx /= (n_rep - 1);
    s_yy /= (n_rep - 1);
    s_xy /= (n_rep - 1);
    const double var_ratio =
        (s_xx - 2.0 * ratio * s_xy + ratio * ratio * s_yy) / (n_rep * oracle_mean * oracle_mean);
    const double se_delta = std::sqrt(std::max(0.0, var_ratio));
    const double se_naive = std::sqrt(s_xx / n_rep) / oracle_mean;

    report.rows.push_back(BenchRow{procedures[k].name, setting_name(setting),
                                   classify_index(procedures[k], random_setting), ratio, se_delta,
                                   se_naive, n_rep, seed});
  }
  return report;
}

std::vector<RiskCurve> run_risk_curves(const std::vector<std::pair<std::string, Crit1>>& rules,
                                       const SettingVariant& setting, const DimensionGrid& grid,
                                       int n_rep, std::uint64_t seed, int threads) {
  if (n_rep < 2) throw std::domain_error("risk curves: need at least 2 replicates");
  const int n = setting_n(setting);
  if (grid.n != n) throw std::invalid_argument("risk curves: grid built for another n");
  const std::size_t n_rules = rules.size();
  const std::size_t d_max = static_cast<std::size_t>(grid.d_max);

  std::optional<SignalPair> fixed_pair;
  if (const auto* fixed = std::get_if<FixedSetting>(&setting)) fixed_pair = make_fixed_signal(*fixed);

  std::vector<double> losses(static_cast<std::size_t>(n_rep) * n_rules * d_max);

  parallel_for(n_rep, threads, [&](int r) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(r));
    SignalPair pair = fixed_pair ? *fixed_pair
                                 : draw_random_framework(std::get<RandomFrameworkSpec>(setting), rng);
    const Sample sample = simulate_sample(pair.s, pair.sigma, n, rng);
    const SimTruth truth{pair.s, pair.sigma.as_function()};
    for (std::size_t k = 0; k < n_rules; ++k) {
      const CostMatrix costs = [&] {
        switch (rules[k].second.kind) {
          case Crit1::Kind::erm: return CostMatrix::erm(sample);
          case Crit1::Kind::lpo: return CostMatrix::lpo(sample, rules[k].second.p);
          case Crit1::Kind::ideal: return CostMatrix::true_loss(sample, truth.s);
        }
        throw std::invalid_argument("unknown localization rule");
      }();
      const auto parts = best_partition_all(costs, grid.d_max);
      for (std::size_t d = 0; d < d_max; ++d) {
        const double loss =
            quadratic_loss(pair.s, fit_regressogram(sample, parts[d].seg), sample.t);
        losses[(static_cast<std::size_t>(r) * n_rules + k) * d_max + d] = loss;
      }
    }
  });

  std::vector<RiskCurve> curves;
  for (std::size_t k = 0; k < n_rules; ++k) {
    RiskCurve curve;
    curve.procedure = rules[k].first;
    for (std::size_t d = 0; d < d_max; ++d) {
      std::vector<double> vals(static_cast<std::size_t>(n_rep));
      for (int r = 0; r < n_rep; ++r)
        vals[static_cast<std::size_t>(r)] = losses[(static_cast<std::size_t>(r) * n_rules + k) * d_max + d];
      const double mean = kahan_mean(vals);
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      var /= (n_rep - 1);
      curve.dims.push_back(static_cast<int>(d) + 1);
      curve.mean_loss.push_back(mean);
      curve.stderr_loss.push_back(std::sqrt(var / n_rep));
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace hetseg
