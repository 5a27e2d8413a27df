#pragma once
// Closed-form leave-p-out risk of the regressogram, its enumeration oracle,
// and the truncated hypergeometric moments the closed form is built from.

#include "hetseg/core.hpp"

namespace hetseg {

/// Per-segment quantities entering the closed-form Lpo risk. For a segment
/// holding `count` of the n design points and a held-out size p, `hit_prob`
/// is the probability that a uniformly drawn training set of size n-p meets
/// the segment, and v0/v1/v_neg1 are E[Z^k 1{Z>0}] for the hypergeometric
/// count Z of training points falling in the segment.
struct LpoTerms {
  int count = 0;
  double hit_prob = 0.0;  // N
  double v_neg1 = 0.0;
  double v0 = 0.0;
  double v1 = 0.0;
  double a = 0.0;
  double b = 0.0;
  /// Segment contribution: coef_s2 * S2 + coef_s1_sq * S1^2.
  double coef_s2 = 0.0;
  double coef_s1_sq = 0.0;
};

/// E[Z^k 1{Z>0}] for Z ~ Hypergeometric(n, n-p, n_seg), k in {-1,0,1}.
/// Binomial ratios are evaluated in log space.
double hyper_trunc_moment(int k, int n, int p, int n_seg);

/// All closed-form coefficients for one segment size.
LpoTerms lpo_terms(int n, int p, int count);

/// Exact Lpo(p) risk of the regressogram on `seg`, O(n). A segment with a
/// single design point makes the risk +infinity.
double lpo_risk(const Sample& sample, const Segmentation& seg, int p);

/// Enumeration oracle: averages the held-out squared prediction error over
/// all C(n,p) validation sets. Training sets that miss a segment entirely
/// carry no information about it, so each segment is averaged over the
/// splits that leave it trainable (which is what the closed form computes).
/// Guarded to C(n,p) <= 1e6.
double lpo_risk_bruteforce(const Sample& sample, const Segmentation& seg, int p);

/// Minimizer of the Lpo(p) risk over admissible segmentations of dimension
/// d, found exactly by dynamic programming; earliest breakpoints win ties.
Segmentation lpo_select(const Sample& sample, int d, int p);

}  // namespace hetseg
