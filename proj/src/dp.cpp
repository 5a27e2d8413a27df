#include "hetseg/dp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hetseg/lpo.hpp"

namespace hetseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kDenseThreshold = 5000;

std::vector<double> prefix_sums(const std::vector<double>& v, bool squared) {
  std::vector<double> out(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i + 1] = out[i] + (squared ? v[i] * v[i] : v[i]);
  return out;
}

}  // namespace

CostMatrix CostMatrix::erm(const Sample& sample, int min_size) {
  CostMatrix m(CostKind::erm, sample.n(), min_size);
  m.prefix_y1_ = prefix_sums(sample.y, false);
  m.prefix_y2_ = prefix_sums(sample.y, true);
  m.maybe_materialize();
  return m;
}

CostMatrix CostMatrix::lpo(const Sample& sample, int p, int min_size) {
  const int n = sample.n();
  if (p < 1 || p > n - 1) throw std::domain_error("cost matrix: p outside {1,...,n-1}");
  CostMatrix m(CostKind::lpo, n, min_size);
  m.p_ = p;
  m.prefix_y1_ = prefix_sums(sample.y, false);
  m.prefix_y2_ = prefix_sums(sample.y, true);
  m.coef_s2_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  m.coef_s1_sq_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int len = std::max(2, min_size); len <= n; ++len) {
    const LpoTerms t = lpo_terms(n, p, len);
    m.coef_s2_[static_cast<std::size_t>(len)] = t.coef_s2;
    m.coef_s1_sq_[static_cast<std::size_t>(len)] = t.coef_s1_sq;
  }
  m.maybe_materialize();
  return m;
}

CostMatrix CostMatrix::true_loss(const Sample& sample, const PiecewiseConstant& s_true,
                                 int min_size) {
  CostMatrix m(CostKind::true_loss, sample.n(), min_size);
  m.prefix_y1_ = prefix_sums(sample.y, false);
  const std::vector<double> s = s_true.at(sample.t);
  m.prefix_s1_ = prefix_sums(s, false);
  m.prefix_s2_ = prefix_sums(s, true);
  m.maybe_materialize();
  return m;
}

CostMatrix CostMatrix::pml(const Sample& sample, int min_size) {
  CostMatrix m(CostKind::pml, sample.n(), min_size);
  m.prefix_y1_ = prefix_sums(sample.y, false);
  m.prefix_y2_ = prefix_sums(sample.y, true);
  const int n = sample.n();
  const double s1 = m.prefix_y1_[static_cast<std::size_t>(n)];
  const double s2 = m.prefix_y2_[static_cast<std::size_t>(n)];
  const double overall_var = (s2 - s1 * s1 / n) / n;
  m.var_floor_ = 1e-12 * (overall_var + 1e-300);
  m.maybe_materialize();
  return m;
}

double CostMatrix::compute(int i, int j) const {
  const auto a = static_cast<std::size_t>(i - 1);
  const auto b = static_cast<std::size_t>(j);
  const int len = j - i + 1;
  const double s1 = prefix_y1_[b] - prefix_y1_[a];
  switch (kind_) {
    case CostKind::erm: {
      const double s2 = prefix_y2_[b] - prefix_y2_[a];
      return s2 - s1 * s1 / len;
    }
    case CostKind::lpo: {
      if (len == 1) return kInf;
      const double s2 = prefix_y2_[b] - prefix_y2_[a];
      return coef_s2_[static_cast<std::size_t>(len)] * s2 +
             coef_s1_sq_[static_cast<std::size_t>(len)] * s1 * s1;
    }
    case CostKind::true_loss: {
      const double mean = s1 / len;
      const double ts1 = prefix_s1_[b] - prefix_s1_[a];
      const double ts2 = prefix_s2_[b] - prefix_s2_[a];
      return len * mean * mean - 2.0 * mean * ts1 + ts2;
    }
    case CostKind::pml: {
      const double s2 = prefix_y2_[b] - prefix_y2_[a];
      const double var = (s2 - s1 * s1 / len) / len;
      return len * std::log(std::max(var, var_floor_));
    }
  }
  return kInf;
}

void CostMatrix::maybe_materialize() {
  if (n_ > kDenseThreshold) return;
  row_offset_.assign(static_cast<std::size_t>(n_) + 1, 0);
  std::size_t offset = 0;
  for (int i = 1; i + min_size_ - 1 <= n_; ++i) {
    row_offset_[static_cast<std::size_t>(i)] = offset;
    offset += static_cast<std::size_t>(n_ - (i + min_size_ - 1) + 1);
  }
  dense_.resize(offset);
  for (int i = 1; i + min_size_ - 1 <= n_; ++i)
    for (int j = i + min_size_ - 1; j <= n_; ++j)
      dense_[dense_index(i, j)] = compute(i, j);
}

CostMatrix build_cost_matrix(CostKind kind, const Sample& sample, int p,
                             const PiecewiseConstant* s_true, int min_size) {
  switch (kind) {
    case CostKind::erm:
      return CostMatrix::erm(sample, min_size);
    case CostKind::lpo:
      return CostMatrix::lpo(sample, p, min_size);
    case CostKind::true_loss:
      if (!s_true) throw std::invalid_argument("cost matrix: true_loss needs the regression function");
      return CostMatrix::true_loss(sample, *s_true, min_size);
    case CostKind::pml:
      return CostMatrix::pml(sample, min_size);
  }
  throw std::invalid_argument("cost matrix: unknown kind");
}

namespace {

// Suffix-based Bellman table. suffix[d][i] is the best cost of splitting
// [i..n] into d admissible segments; choosing the smallest first-segment
// end at every level makes backtracking return the lexicographically
// smallest breakpoint vector among exact ties.
struct BellmanTable {
  int n = 0;
  int min_size = 0;
  int d_max = 0;
  std::vector<double> value;  // (d_max+1) x (n+2)
  std::vector<int> choice;

  double& val(int d, int i) {
    return value[static_cast<std::size_t>(d) * static_cast<std::size_t>(n + 2) +
                 static_cast<std::size_t>(i)];
  }
  int& pick(int d, int i) {
    return choice[static_cast<std::size_t>(d) * static_cast<std::size_t>(n + 2) +
                  static_cast<std::size_t>(i)];
  }
  double val(int d, int i) const {
    return value[static_cast<std::size_t>(d) * static_cast<std::size_t>(n + 2) +
                 static_cast<std::size_t>(i)];
  }
  int pick(int d, int i) const {
    return choice[static_cast<std::size_t>(d) * static_cast<std::size_t>(n + 2) +
                  static_cast<std::size_t>(i)];
  }
};

BellmanTable solve(const CostMatrix& costs, int d_max) {
  const int n = costs.n();
  const int min_size = costs.min_size();
  BellmanTable table;
  table.n = n;
  table.min_size = min_size;
  table.d_max = d_max;
  table.value.assign(static_cast<std::size_t>(d_max + 1) * static_cast<std::size_t>(n + 2), kInf);
  table.choice.assign(table.value.size(), -1);

  for (int i = n - min_size + 1; i >= 1; --i) table.val(1, i) = costs(i, n);

  for (int d = 2; d <= d_max; ++d) {
    // [i..n] must hold d segments of at least min_size points.
    for (int i = n - d * min_size + 1; i >= 1; --i) {
      double best = kInf;
      int best_end = -1;
      const int first_end = i + min_size - 1;
      const int last_end = n - (d - 1) * min_size;
      for (int e = first_end; e <= last_end; ++e) {
        const double cand = costs(i, e) + table.val(d - 1, e + 1);
        if (cand < best) {
          best = cand;
          best_end = e;
        }
      }
      table.val(d, i) = best;
      table.pick(d, i) = best_end;
    }
  }
  return table;
}

Partition backtrack(const CostMatrix& costs, const BellmanTable& table, int d) {
  std::vector<int> breaks;
  breaks.reserve(static_cast<std::size_t>(d - 1));
  int i = 1;
  for (int level = d; level >= 2; --level) {
    const int e = table.pick(level, i);
    breaks.push_back(e + 1);
    i = e + 1;
  }
  return Partition{table.val(d, 1),
                   Segmentation::make(table.n, std::move(breaks), costs.min_size())};
}

}  // namespace

Partition best_partition(const CostMatrix& costs, int d) {
  if (d < 1 || d * costs.min_size() > costs.n())
    throw std::domain_error("best_partition: infeasible dimension");
  const BellmanTable table = solve(costs, d);
  return backtrack(costs, table, d);
}

std::vector<Partition> best_partition_all(const CostMatrix& costs, int d_max) {
  if (d_max < 1 || d_max * costs.min_size() > costs.n())
    throw std::domain_error("best_partition_all: infeasible dimension");
  const BellmanTable table = solve(costs, d_max);
  std::vector<Partition> out;
  out.reserve(static_cast<std::size_t>(d_max));
  for (int d = 1; d <= d_max; ++d) out.push_back(backtrack(costs, table, d));
  return out;
}

}  // namespace hetseg
