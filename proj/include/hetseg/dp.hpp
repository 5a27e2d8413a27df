#pragma once
// Exact optimal partitioning of {1,...,n} into contiguous segments under a
// segment-additive cost with a minimum-segment-size constraint. Shared
// engine for least-squares localization, Lpo localization, oracle loss and
// the penalized log-variance criterion.

#include <vector>

#include "hetseg/core.hpp"

namespace hetseg {

enum class CostKind { erm, lpo, true_loss, pml };

/// Segment cost c(i,j) for 1-based inclusive index ranges with
/// j-i+1 >= min_size. Costs derive from O(n) prefix sums; for n up to the
/// dense threshold the triangle is also materialized up front, above it
/// costs are computed on the fly inside the recursion.
class CostMatrix {
 public:
  /// Unnormalized within-segment sum of squares around the segment mean.
  static CostMatrix erm(const Sample& sample, int min_size = 2);
  /// Closed-form Lpo(p) segment term.
  static CostMatrix lpo(const Sample& sample, int p, int min_size = 2);
  /// Unnormalized sum of (segment mean of y - s(t_k))^2 against a known s.
  static CostMatrix true_loss(const Sample& sample, const PiecewiseConstant& s_true,
                              int min_size = 2);
  /// n_seg * log(within-segment variance), floored at a small multiple of
  /// the overall sample variance to survive degenerate segments.
  static CostMatrix pml(const Sample& sample, int min_size = 2);

  double operator()(int i, int j) const {
    if (!dense_.empty()) return dense_[dense_index(i, j)];
    return compute(i, j);
  }

  int n() const { return n_; }
  int min_size() const { return min_size_; }
  CostKind kind() const { return kind_; }

 private:
  CostMatrix(CostKind kind, int n, int min_size) : kind_(kind), n_(n), min_size_(min_size) {}

  double compute(int i, int j) const;
  void maybe_materialize();
  std::size_t dense_index(int i, int j) const {
    // Row i stores costs for j = i+min_size-1 .. n.
    return row_offset_[static_cast<std::size_t>(i)] +
           static_cast<std::size_t>(j - (i + min_size_ - 1));
  }

  CostKind kind_;
  int n_;
  int min_size_;
  int p_ = 0;  // lpo only
  std::vector<double> prefix_y1_, prefix_y2_;   // sums of y, y^2
  std::vector<double> prefix_s1_, prefix_s2_;   // true_loss: sums of s(t), s(t)^2
  std::vector<double> coef_s2_, coef_s1_sq_;    // lpo: per segment length
  double var_floor_ = 0.0;                      // pml
  std::vector<double> dense_;
  std::vector<std::size_t> row_offset_;
};

/// Spec-level dispatcher over the factories above. `p` is consumed by the
/// lpo kind and `s_true` by the true-loss kind.
CostMatrix build_cost_matrix(CostKind kind, const Sample& sample, int p = 1,
                             const PiecewiseConstant* s_true = nullptr, int min_size = 2);

struct Partition {
  double cost = 0.0;
  Segmentation seg;
};

/// Exact minimum-cost partition into d admissible segments; ties resolve to
/// the lexicographically smallest breakpoint vector.
Partition best_partition(const CostMatrix& costs, int d);

/// Optima for every dimension 1..d_max out of a single O(n^2 d_max) pass.
std::vector<Partition> best_partition_all(const CostMatrix& costs, int d_max);

}  // namespace hetseg
