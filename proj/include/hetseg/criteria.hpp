#pragma once
// Empirical risk, quadratic loss against a known regression function, and
// the exact bias/variance decomposition used as a Monte-Carlo oracle.

#include <functional>
#include <utility>
#include <vector>

#include "hetseg/core.hpp"

namespace hetseg {

/// Exact decomposition of the risk of a regressogram on a fixed model:
/// E[empirical risk] = bias - variance_term + mean_noise and
/// E[quadratic loss] = bias + variance_term.
struct RiskDecomposition {
  double bias = 0.0;           // loss of the projected regression function
  double variance_term = 0.0;  // sum of per-segment mean noise powers / n
  double mean_noise = 0.0;     // mean of sigma(t_i)^2
};

/// Mean squared residual of f over the sample.
double empirical_risk(const Sample& sample, const PiecewiseConstant& f);

/// Mean squared error of f against s at the design points.
double quadratic_loss(const PiecewiseConstant& s_true, const PiecewiseConstant& f,
                      const std::vector<double>& t);

RiskDecomposition risk_decomposition(const PiecewiseConstant& s_true,
                                     const std::vector<double>& sigma_at_design,
                                     const std::vector<double>& t, const Segmentation& seg);

RiskDecomposition risk_decomposition(const PiecewiseConstant& s_true,
                                     const PiecewiseConstant& sigma,
                                     const std::vector<double>& t, const Segmentation& seg);

/// Minimum quadratic loss over all admissible segmentations with dimension
/// in the grid, with its argmin. Exact dynamic programming; needs the true
/// regression function (simulation only).
std::pair<double, Segmentation> oracle_loss(const PiecewiseConstant& s_true,
                                            const Sample& sample, const DimensionGrid& grid);

}  // namespace hetseg
