#pragma once
// Dimension selection: penalized least squares with slope-heuristic
// calibration, V-fold cross-validation over dimensions, the penalized
// log-variance criterion, and the two-step procedure combining a
// per-dimension localization rule with a dimension-selection rule.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetseg/core.hpp"
#include "hetseg/dp.hpp"

namespace hetseg {

/// Penalty c_hat * shape(D) with shape(D) = (D/n) * (5 + 2 ln(n/D)).
struct PenaltySpec {
  double c_hat = 0.0;
  int n = 0;
  double shape(int d) const;
};

double bm_shape(int n, int d);

/// Largest dimension kept by the threshold calibration: floor(n / ln n).
int dimension_threshold(int n);

/// Interleaved fold assignment: index i belongs to block ((i-1) mod V) + 1,
/// so consecutive design points never share a block and block sizes differ
/// by at most one.
struct FoldAssignment {
  int v = 0;
  std::vector<int> block;  // 1-based fold id per design index

  static FoldAssignment interleaved(int n, int v);
  int n() const { return static_cast<int>(block.size()); }
  int max_block_size() const;
};

inline FoldAssignment vf_folds(int n, int v) { return FoldAssignment::interleaved(n, v); }

/// The step function K -> argmin_D { risk(D) + K * shape(D) } on K >= 0,
/// computed exactly as the lower envelope of the lines K -> risk + K*shape.
/// Piece j covers [k_start[j], k_start[j+1]) and selects dim[j]; the path
/// is right-continuous, so ties at a breakpoint resolve to the next piece.
struct SlopePath {
  std::vector<double> k_start;  // k_start[0] == 0
  std::vector<int> dim;

  int dim_at(double k) const;
  bool empty() const { return dim.empty(); }
};

/// risks[i] and shape[i] belong to dimension i+1.
SlopePath slope_heuristic_path(const std::vector<double>& risks,
                               const std::vector<double>& shape);

/// c_hat = 2K at the largest |jump| of the path (smallest K among maximal
/// jumps); 0 when the path has a single piece.
double c_hat_max_jump(const SlopePath& path);

/// c_hat = 2 * min{K : path(K) <= floor(n / ln n)}. When no piece reaches
/// the threshold the start of the final piece is used.
double c_hat_threshold(const SlopePath& path, int n);

/// c_hat = (1/n) * sum_{i<=n/2} (y_{2i} - y_{2i-1})^2; requires even n.
double c_hat_sigma_hat(const Sample& sample);

/// c_hat = (1/n) * sum_i sigma(t_i)^2 (simulation only).
double c_hat_sigma_true(const std::vector<double>& sigma_at_design);

/// crit(D) = risk(D) + c_hat * shape(D), dimensions indexed from 1.
std::vector<double> bm_dimension_criterion(const std::vector<double>& risks,
                                           const PenaltySpec& pen);

/// First-step localization rule.
struct Crit1 {
  enum class Kind { erm, lpo, ideal };
  Kind kind = Kind::lpo;
  int p = 1;  // lpo only

  static Crit1 erm() { return {Kind::erm, 0}; }
  static Crit1 lpo(int p) { return {Kind::lpo, p}; }
  static Crit1 ideal() { return {Kind::ideal, 0}; }
};

enum class Calibration { max_jump, threshold, sigma_hat, sigma_true };

/// Second-step dimension-selection rule.
struct Crit2 {
  enum class Kind { bm, vf, pml, ideal };
  Kind kind = Kind::vf;
  Calibration calibration = Calibration::threshold;  // bm only
  double overpen = 1.0;                              // bm only
  int v = 5;                                         // vf only

  static Crit2 bm(Calibration c = Calibration::threshold, double overpen = 1.0) {
    return {Kind::bm, c, overpen, 0};
  }
  static Crit2 vf(int v) { return {Kind::vf, Calibration::threshold, 1.0, v}; }
  static Crit2 pml() { return {Kind::pml, Calibration::threshold, 1.0, 0}; }
  static Crit2 ideal() { return {Kind::ideal, Calibration::threshold, 1.0, 0}; }
};

/// Known truth for simulation-only criteria (ideal loss, sigma_true).
struct SimTruth {
  PiecewiseConstant s;
  std::function<double(double)> sigma;
};

struct ProcedureSpec {
  Crit1 crit1;
  Crit2 crit2;
  DimensionGrid grid;
};

/// Largest dimension usable by VFCV given the fold sizes.
int vfcv_feasible_dmax(int n, const FoldAssignment& folds);

/// VFCV estimate of the risk of the dimension-d estimator: per fold, the
/// model collection is rebuilt on the training design, the dimension-d
/// segmentation is localized there with crit1, and the fit is scored on the
/// held-out block. Requires d <= vfcv_feasible_dmax.
double vfcv_dimension_criterion(const Sample& sample, const FoldAssignment& folds, int d,
                                const Crit1& crit1, const SimTruth* truth = nullptr);

/// Per-dimension minimum of the segment-additive log-variance cost.
std::pair<double, Segmentation> pml_criterion(const Sample& sample, int d);

/// Per-dimension criterion values and chosen segmentations of a procedure.
struct ProcedureResult {
  int d_hat = 0;
  Segmentation seg;
  PiecewiseConstant fitted;
  std::vector<int> dims;                // dimensions actually scored
  std::vector<double> crit1_values;     // localization criterion per dimension
  std::vector<double> crit2_values;     // selection criterion per scored dimension
  std::vector<Segmentation> path;       // localized segmentation per dimension
  double c_hat = 0.0;                   // bm/pml calibration actually used
};

ProcedureResult run_procedure(const ProcedureSpec& spec, const Sample& sample,
                              const SimTruth* truth = nullptr);

}  // namespace hetseg
