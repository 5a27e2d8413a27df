#pragma once
// Data model: samples on a fixed design, segmentations of the design into
// contiguous blocks, and piecewise-constant functions on [0,1].

#include <string>
#include <utility>
#include <vector>

namespace hetseg {

/// Observations y_i at strictly increasing design points t_i in [0,1].
struct Sample {
  std::vector<double> t;
  std::vector<double> y;

  int n() const { return static_cast<int>(t.size()); }

  /// Validating constructor: n >= 2, sizes match, t strictly increasing
  /// and contained in [0,1]. Throws std::invalid_argument otherwise.
  static Sample make(std::vector<double> t, std::vector<double> y);
};

/// Per-segment sufficient statistics.
struct SegmentStats {
  int count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

/// Partition of {1,...,n} into contiguous segments. Breakpoints are the
/// 1-based start indices of segments 2..D (strictly increasing, each in
/// {2,...,n}); dimension D = breakpoint count + 1. The default minimum
/// segment size of 2 realizes the admissible model collection.
class Segmentation {
 public:
  static Segmentation make(int n, std::vector<int> breakpoints, int min_size = 2);

  int n() const { return n_; }
  int dimension() const { return static_cast<int>(breaks_.size()) + 1; }
  const std::vector<int>& breakpoints() const { return breaks_; }

  /// 1-based inclusive index range [first,last] of segment k, k in [0,D).
  std::pair<int, int> segment(int k) const;

  /// Smallest segment length.
  int min_segment_length() const;

  /// Comma-separated breakpoint indices; empty string for dimension 1.
  std::string serialize() const;
  static Segmentation parse(int n, const std::string& text, int min_size = 2);

  bool operator==(const Segmentation&) const = default;

 private:
  Segmentation(int n, std::vector<int> breaks) : n_(n), breaks_(std::move(breaks)) {}

  int n_ = 0;
  std::vector<int> breaks_;
};

/// Right-continuous step function on [0,1]. K cut positions in (0,1] split
/// the domain into K+1 intervals [0,c_1), [c_1,c_2), ..., [c_K,1]; the last
/// interval is closed at 1. One level per interval.
class PiecewiseConstant {
 public:
  PiecewiseConstant(std::vector<double> cuts, std::vector<double> levels);

  static PiecewiseConstant constant(double level) { return {{}, {level}}; }

  const std::vector<double>& cuts() const { return cuts_; }
  const std::vector<double>& levels() const { return levels_; }
  int jump_count() const { return static_cast<int>(cuts_.size()); }

  /// Level of the interval containing t; throws std::domain_error when t
  /// lies outside [0,1].
  double operator()(double t) const;

  std::vector<double> at(const std::vector<double>& t) const;

 private:
  std::vector<double> cuts_;
  std::vector<double> levels_;
};

/// Spec-level alias for function evaluation.
inline double evaluate(const PiecewiseConstant& f, double t) { return f(t); }

/// Mean of f^2 over [0,1] (exact, by interval lengths).
double mean_square(const PiecewiseConstant& f);

/// Candidate model dimensions {1, ..., d_max}.
struct DimensionGrid {
  int n = 0;
  int d_max = 0;

  /// Default grid: d_max = floor(4n/10), clamped into [1, floor(n/2)].
  static DimensionGrid defaults(int n);
  static DimensionGrid make(int n, int d_max);
};

std::vector<SegmentStats> segment_stats(const Sample& sample, const Segmentation& seg);

/// Least-squares fit on a segmentation: the per-segment mean, with cuts at
/// the design points where segments start and the first interval extended
/// to 0 so the fit is defined on all of [0,1].
PiecewiseConstant fit_regressogram(const Sample& sample, const Segmentation& seg);

/// All admissible segmentations of dimension d in lexicographic breakpoint
/// order. Guarded to n <= 16; larger n is refused (std::length_error).
std::vector<Segmentation> enumerate_segmentations(int n, int d, int min_size = 2);

}  // namespace hetseg
