#include "hetseg/lpo.hpp"

#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "hetseg/dp.hpp"

namespace hetseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(k!) table, grown on demand. Guarded so concurrent Monte-Carlo
// replicates can share it.
const double* log_factorials(int up_to) {
  static std::vector<double> table{0.0, 0.0};
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  while (static_cast<int>(table.size()) <= up_to)
    table.push_back(std::lgamma(static_cast<double>(table.size()) + 1.0));
  return table.data();
}

inline double log_choose(const double* lf, int a, int b) {
  return lf[a] - lf[b] - lf[a - b];
}

void check_args(int n, int p, int n_seg) {
  if (n < 2) throw std::domain_error("lpo: n < 2");
  if (p < 1 || p > n - 1) throw std::domain_error("lpo: p outside {1,...,n-1}");
  if (n_seg < 1 || n_seg > n) throw std::domain_error("lpo: segment size outside {1,...,n}");
}

}  // namespace

double hyper_trunc_moment(int k, int n, int p, int n_seg) {
  if (k < -1 || k > 1) throw std::domain_error("lpo: moment order outside {-1,0,1}");
  check_args(n, p, n_seg);
  const double* lf = log_factorials(n);
  const int lo = std::max(1, n_seg - p);
  const int hi = std::min(n_seg, n - p);
  const double log_denom = log_choose(lf, n, n_seg);
  double total = 0.0;
  for (int r = lo; r <= hi; ++r) {
    const double log_pmf = log_choose(lf, n - p, r) + log_choose(lf, p, n_seg - r) - log_denom;
    double weight = std::exp(log_pmf);
    if (k == 1) weight *= r;
    if (k == -1) weight /= r;
    total += weight;
  }
  return total;
}

LpoTerms lpo_terms(int n, int p, int count) {
  check_args(n, p, count);
  LpoTerms t;
  t.count = count;
  const double* lf = log_factorials(n);
  t.hit_prob = 1.0;
  if (p >= count)
    t.hit_prob = 1.0 - std::exp(log_choose(lf, n - count, p - count) - log_choose(lf, n, p));
  t.v_neg1 = hyper_trunc_moment(-1, n, p, count);
  t.v0 = hyper_trunc_moment(0, n, p, count);
  t.v1 = hyper_trunc_moment(1, n, p, count);
  if (count < 2) return t;  // coefficients only defined for usable segments

  const double nl = count;
  t.a = t.v0 * (1.0 - 1.0 / nl) - t.v1 / nl + t.v_neg1;
  if (count >= 3) {
    t.b = t.v1 / (nl * (nl - 1.0)) + t.v0 / (nl - 1.0) * ((1.0 + 1.0 / nl) - 2.0) -
          t.v_neg1 / (nl - 1.0);
  } else {
    t.b = t.v1 * 2.0 / (nl * (nl - 1.0)) - 2.0 * t.v0 / (nl - 1.0);
  }
  const double scale = 1.0 / (p * t.hit_prob);
  t.coef_s2 = scale * (t.a - t.b);
  t.coef_s1_sq = scale * t.b;
  return t;
}

double lpo_risk(const Sample& sample, const Segmentation& seg, int p) {
  const int n = sample.n();
  if (seg.n() != n) throw std::invalid_argument("lpo_risk: segmentation size mismatch");
  if (p < 1 || p > n - 1) throw std::domain_error("lpo_risk: p outside {1,...,n-1}");
  const auto stats = segment_stats(sample, seg);
  double total = 0.0;
  for (const auto& st : stats) {
    if (st.count == 1) return kInf;
    const LpoTerms t = lpo_terms(n, p, st.count);
    total += t.coef_s2 * st.sum_sq + t.coef_s1_sq * st.sum * st.sum;
  }
  return total;
}

double lpo_risk_bruteforce(const Sample& sample, const Segmentation& seg, int p) {
  const int n = sample.n();
  if (seg.n() != n) throw std::invalid_argument("lpo_risk_bruteforce: size mismatch");
  if (p < 1 || p > n - 1) throw std::domain_error("lpo_risk_bruteforce: p outside range");

  double log_splits = 0.0;
  {
    const double* lf = log_factorials(n);
    log_splits = log_choose(lf, n, p);
  }
  if (log_splits > std::log(1e6)) throw std::length_error("lpo_risk_bruteforce: C(n,p) > 1e6");

  const int d = seg.dimension();
  std::vector<int> seg_of(static_cast<std::size_t>(n));
  std::vector<double> seg_sum(static_cast<std::size_t>(d), 0.0);
  std::vector<int> seg_count(static_cast<std::size_t>(d), 0);
  for (int k = 0; k < d; ++k) {
    auto [first, last] = seg.segment(k);
    for (int i = first; i <= last; ++i) {
      seg_of[static_cast<std::size_t>(i - 1)] = k;
      seg_sum[static_cast<std::size_t>(k)] += sample.y[static_cast<std::size_t>(i - 1)];
    }
    seg_count[static_cast<std::size_t>(k)] = last - first + 1;
    if (seg_count[static_cast<std::size_t>(k)] == 1) return kInf;
  }

  // Accumulated per segment over splits that keep it trainable.
  std::vector<double> err_total(static_cast<std::size_t>(d), 0.0);
  std::vector<long long> bad_splits(static_cast<std::size_t>(d), 0);
  long long n_splits = 0;

  std::vector<double> val_sum(static_cast<std::size_t>(d));
  std::vector<int> val_count(static_cast<std::size_t>(d));

  // 0-based validation index combination, lexicographically advanced.
  std::vector<int> comb(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) comb[static_cast<std::size_t>(i)] = i;
  for (;;) {
    ++n_splits;
    std::fill(val_sum.begin(), val_sum.end(), 0.0);
    std::fill(val_count.begin(), val_count.end(), 0);
    for (int idx : comb) {
      const int k = seg_of[static_cast<std::size_t>(idx)];
      val_sum[static_cast<std::size_t>(k)] += sample.y[static_cast<std::size_t>(idx)];
      ++val_count[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < d; ++k) {
      if (val_count[static_cast<std::size_t>(k)] == seg_count[static_cast<std::size_t>(k)]) {
        ++bad_splits[static_cast<std::size_t>(k)];
      }
    }
    for (int idx : comb) {
      const int k = seg_of[static_cast<std::size_t>(idx)];
      const int train = seg_count[static_cast<std::size_t>(k)] - val_count[static_cast<std::size_t>(k)];
      if (train == 0) continue;
      const double pred =
          (seg_sum[static_cast<std::size_t>(k)] - val_sum[static_cast<std::size_t>(k)]) / train;
      const double r = sample.y[static_cast<std::size_t>(idx)] - pred;
      err_total[static_cast<std::size_t>(k)] += r * r;
    }
    // next combination
    int i = p - 1;
    while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - p + i) --i;
    if (i < 0) break;
    ++comb[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < p; ++j)
      comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }

  double total = 0.0;
  for (int k = 0; k < d; ++k) {
    const long long good = n_splits - bad_splits[static_cast<std::size_t>(k)];
    if (good == 0) return kInf;  // unreachable for p <= n-1
    total += err_total[static_cast<std::size_t>(k)] / (static_cast<double>(p) * good);
  }
  return total;
}

Segmentation lpo_select(const Sample& sample, int d, int p) {
  const CostMatrix costs = CostMatrix::lpo(sample, p);
  return best_partition(costs, d).seg;
}

}  // namespace hetseg
