#include "hetseg/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hetseg/criteria.hpp"

namespace hetseg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double bm_shape(int n, int d) {
  if (d < 1 || d > n) throw std::domain_error("bm_shape: dimension outside [1, n]");
  const double dd = d;
  return dd / n * (5.0 + 2.0 * std::log(static_cast<double>(n) / dd));
}

double PenaltySpec::shape(int d) const { return bm_shape(n, d); }

int dimension_threshold(int n) {
  if (n < 2) throw std::domain_error("dimension_threshold: n < 2");
  return static_cast<int>(std::floor(n / std::log(static_cast<double>(n))));
}

FoldAssignment FoldAssignment::interleaved(int n, int v) {
  if (v < 2 || v > n) throw std::domain_error("folds: V outside {2,...,n}");
  FoldAssignment f;
  f.v = v;
  f.block.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) f.block[static_cast<std::size_t>(i - 1)] = (i - 1) % v + 1;
  return f;
}

int FoldAssignment::max_block_size() const {
  std::vector<int> sizes(static_cast<std::size_t>(v), 0);
  for (int b : block) ++sizes[static_cast<std::size_t>(b - 1)];
  return *std::max_element(sizes.begin(), sizes.end());
}

SlopePath slope_heuristic_path(const std::vector<double>& risks,
                               const std::vector<double>& shape) {
  if (risks.size() != shape.size() || risks.empty())
    throw std::invalid_argument("slope path: risks and shape sizes differ or empty");

  struct Line {
    double slope;
    double intercept;
    int dim;
  };
  std::vector<Line> lines;
  lines.reserve(risks.size());
  for (std::size_t i = 0; i < risks.size(); ++i) {
    if (shape[i] <= 0.0) throw std::invalid_argument("slope path: shape must be positive");
    lines.push_back({shape[i], risks[i], static_cast<int>(i) + 1});
  }
  // Equal slopes: only the smallest intercept (then smallest dimension) can
  // ever be selected.
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    if (a.intercept != b.intercept) return a.intercept < b.intercept;
    return a.dim < b.dim;
  });
  std::vector<Line> dedup;
  for (const auto& l : lines)
    if (dedup.empty() || dedup.back().slope != l.slope) dedup.push_back(l);

  // Lower envelope built from steep to flat: a steeper line can only win
  // for smaller K. Each stack entry owns [k_start, next k_start).
  struct Piece {
    double k_start;
    Line line;
  };
  std::vector<Piece> pieces;
  for (auto it = dedup.rbegin(); it != dedup.rend(); ++it) {
    const Line& line = *it;
    for (;;) {
      if (pieces.empty()) {
        pieces.push_back({-kInf, line});
        break;
      }
      const Piece& top = pieces.back();
      const double cross =
          (line.intercept - top.line.intercept) / (top.line.slope - line.slope);
      if (cross <= top.k_start) {
        pieces.pop_back();
        continue;
      }
      pieces.push_back({cross, line});
      break;
    }
  }

  // Restrict to K >= 0: the piece active at 0 starts the path.
  std::size_t first = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i)
    if (pieces[i].k_start <= 0.0) first = i;
  SlopePath path;
  for (std::size_t i = first; i < pieces.size(); ++i) {
    path.k_start.push_back(i == first ? 0.0 : pieces[i].k_start);
    path.dim.push_back(pieces[i].line.dim);
  }
  return path;
}

int SlopePath::dim_at(double k) const {
  if (empty()) throw std::logic_error("slope path: empty");
  const auto it = std::upper_bound(k_start.begin(), k_start.end(), k);
  const auto idx = static_cast<std::size_t>(it - k_start.begin());
  return dim[idx == 0 ? 0 : idx - 1];
}

double c_hat_max_jump(const SlopePath& path) {
  if (path.dim.size() < 2) return 0.0;
  int best_jump = 0;
  double best_k = 0.0;
  for (std::size_t i = 0; i + 1 < path.dim.size(); ++i) {
    const int jump = std::abs(path.dim[i] - path.dim[i + 1]);
    if (jump > best_jump) {
      best_jump = jump;
      best_k = path.k_start[i + 1];
    }
  }
  return 2.0 * best_k;
}

double c_hat_threshold(const SlopePath& path, int n) {
  const int d_thresh = dimension_threshold(n);
  for (std::size_t i = 0; i < path.dim.size(); ++i)
    if (path.dim[i] <= d_thresh) return 2.0 * path.k_start[i];
  // Degenerate: no piece reaches the threshold; fall back to the most
  // penalized piece of the path.
  return 2.0 * path.k_start.back();
}

double c_hat_sigma_hat(const Sample& sample) {
  const int n = sample.n();
  if (n % 2 != 0) throw std::domain_error("sigma_hat calibration needs even n");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < sample.y.size(); i += 2) {
    const double d = sample.y[i + 1] - sample.y[i];
    total += d * d;
  }
  return total / n;
}

double c_hat_sigma_true(const std::vector<double>& sigma_at_design) {
  double total = 0.0;
  for (double s : sigma_at_design) total += s * s;
  return total / static_cast<double>(sigma_at_design.size());
}

std::vector<double> bm_dimension_criterion(const std::vector<double>& risks,
                                           const PenaltySpec& pen) {
  std::vector<double> out(risks.size());
  for (std::size_t i = 0; i < risks.size(); ++i)
    out[i] = risks[i] + pen.c_hat * pen.shape(static_cast<int>(i) + 1);
  return out;
}

namespace {

CostMatrix localization_costs(const Crit1& crit1, const Sample& sample, const SimTruth* truth) {
  switch (crit1.kind) {
    case Crit1::Kind::erm:
      return CostMatrix::erm(sample);
    case Crit1::Kind::lpo:
      return CostMatrix::lpo(sample, crit1.p);
    case Crit1::Kind::ideal:
      if (!truth) throw std::domain_error("ideal localization needs the simulation truth");
      return CostMatrix::true_loss(sample, truth->s);
  }
  throw std::invalid_argument("unknown localization rule");
}

// VFCV criterion for all dimensions 1..d_max at once (one Bellman pass per
// fold). Entries stay +inf when some fold cannot carry the dimension.
std::vector<double> vfcv_all(const Sample& sample, const FoldAssignment& folds, int d_max,
                             const Crit1& crit1, const SimTruth* truth) {
  const int n = sample.n();
  if (folds.n() != n) throw std::invalid_argument("vfcv: fold assignment size mismatch");
  std::vector<double> crit(static_cast<std::size_t>(d_max), 0.0);
  std::vector<int> scored(static_cast<std::size_t>(d_max), 0);

  for (int b = 1; b <= folds.v; ++b) {
    std::vector<double> tt, ty, vt, vy;
    for (int i = 0; i < n; ++i) {
      if (folds.block[static_cast<std::size_t>(i)] == b) {
        vt.push_back(sample.t[static_cast<std::size_t>(i)]);
        vy.push_back(sample.y[static_cast<std::size_t>(i)]);
      } else {
        tt.push_back(sample.t[static_cast<std::size_t>(i)]);
        ty.push_back(sample.y[static_cast<std::size_t>(i)]);
      }
    }
    const Sample train = Sample::make(std::move(tt), std::move(ty));
    if (crit1.kind == Crit1::Kind::lpo && crit1.p > train.n() - 1)
      throw std::domain_error("vfcv: held-out count p too large for the training folds");
    const int fold_dmax = std::min(d_max, train.n() / 2);
    const CostMatrix costs = localization_costs(crit1, train, truth);
    const auto parts = best_partition_all(costs, fold_dmax);
    for (int d = 1; d <= fold_dmax; ++d) {
      const PiecewiseConstant fit = fit_regressogram(train, parts[static_cast<std::size_t>(d - 1)].seg);
      double err = 0.0;
      for (std::size_t j = 0; j < vt.size(); ++j) {
        const double r = vy[j] - fit(vt[j]);
        err += r * r;
      }
      crit[static_cast<std::size_t>(d - 1)] += err / static_cast<double>(vt.size());
      ++scored[static_cast<std::size_t>(d - 1)];
    }
  }
  for (int d = 1; d <= d_max; ++d) {
    auto& c = crit[static_cast<std::size_t>(d - 1)];
    if (scored[static_cast<std::size_t>(d - 1)] == folds.v)
      c /= folds.v;
    else
      c = kInf;
  }
  return crit;
}

std::size_t argmin_index(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

}  // namespace

int vfcv_feasible_dmax(int n, const FoldAssignment& folds) {
  return (n - folds.max_block_size()) / 2;
}

double vfcv_dimension_criterion(const Sample& sample, const FoldAssignment& folds, int d,
                                const Crit1& crit1, const SimTruth* truth) {
  if (d < 1 || d > vfcv_feasible_dmax(sample.n(), folds))
    throw std::domain_error("vfcv: dimension infeasible for these folds");
  return vfcv_all(sample, folds, d, crit1, truth)[static_cast<std::size_t>(d - 1)];
}

std::pair<double, Segmentation> pml_criterion(const Sample& sample, int d) {
  const CostMatrix costs = CostMatrix::pml(sample);
  Partition part = best_partition(costs, d);
  return {part.cost, std::move(part.seg)};
}

ProcedureResult run_procedure(const ProcedureSpec& spec, const Sample& sample,
                              const SimTruth* truth) {
  const int n = sample.n();
  if (spec.grid.n != n) throw std::invalid_argument("run_procedure: grid built for another n");
  const int d_max = spec.grid.d_max;

  // Step 1: localize one segmentation per dimension.
  const CostMatrix c1costs = localization_costs(spec.crit1, sample, truth);
  const auto parts = best_partition_all(c1costs, d_max);
  std::vector<double> crit1_values(static_cast<std::size_t>(d_max));
  for (int d = 1; d <= d_max; ++d) {
    const double cost = parts[static_cast<std::size_t>(d - 1)].cost;
    crit1_values[static_cast<std::size_t>(d - 1)] =
        (spec.crit1.kind == Crit1::Kind::lpo) ? cost : cost / n;
  }

  // Step 2: select the dimension.
  std::vector<int> dims;
  std::vector<double> crit2_values;
  std::vector<Segmentation> path;
  double c_hat = 0.0;
  bool standalone_pml = false;

  switch (spec.crit2.kind) {
    case Crit2::Kind::bm: {
      // The penalty is calibrated on, and added to, the empirical risks of
      // the least-squares path, whatever rule localized the segmentations.
      std::vector<double> erm_risks(static_cast<std::size_t>(d_max));
      if (spec.crit1.kind == Crit1::Kind::erm) {
        for (int d = 1; d <= d_max; ++d)
          erm_risks[static_cast<std::size_t>(d - 1)] = parts[static_cast<std::size_t>(d - 1)].cost / n;
      } else {
        const auto erm_parts = best_partition_all(CostMatrix::erm(sample), d_max);
        for (int d = 1; d <= d_max; ++d)
          erm_risks[static_cast<std::size_t>(d - 1)] = erm_parts[static_cast<std::size_t>(d - 1)].cost / n;
      }
      std::vector<double> shape(static_cast<std::size_t>(d_max));
      for (int d = 1; d <= d_max; ++d) shape[static_cast<std::size_t>(d - 1)] = bm_shape(n, d);
      switch (spec.crit2.calibration) {
        case Calibration::max_jump:
          c_hat = c_hat_max_jump(slope_heuristic_path(erm_risks, shape));
          break;
        case Calibration::threshold:
          c_hat = c_hat_threshold(slope_heuristic_path(erm_risks, shape), n);
          break;
        case Calibration::sigma_hat:
          c_hat = c_hat_sigma_hat(sample);
          break;
        case Calibration::sigma_true: {
          if (!truth) throw std::domain_error("sigma_true calibration needs the simulation truth");
          std::vector<double> sig(sample.t.size());
          for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = truth->sigma(sample.t[i]);
          c_hat = c_hat_sigma_true(sig);
          break;
        }
      }
      const PenaltySpec pen{spec.crit2.overpen * c_hat, n};
      crit2_values = bm_dimension_criterion(erm_risks, pen);
      for (int d = 1; d <= d_max; ++d) dims.push_back(d);
      break;
    }
    case Crit2::Kind::vf: {
      const FoldAssignment folds = FoldAssignment::interleaved(n, spec.crit2.v);
      const int d_feas = std::min(d_max, vfcv_feasible_dmax(n, folds));
      if (d_feas < 1) throw std::domain_error("vfcv: no feasible dimension");
      crit2_values = vfcv_all(sample, folds, d_feas, spec.crit1, truth);
      for (int d = 1; d <= d_feas; ++d) dims.push_back(d);
      crit1_values.resize(static_cast<std::size_t>(d_feas));
      break;
    }
    case Crit2::Kind::pml: {
      // Standalone criterion: its own localization path and its own
      // dimension penalty, calibrated by the threshold rule with a linear
      // shape in the dimension.
      standalone_pml = true;
      const CostMatrix costs = CostMatrix::pml(sample);
      const auto pml_parts = best_partition_all(costs, d_max);
      std::vector<double> risks(static_cast<std::size_t>(d_max));
      std::vector<double> shape(static_cast<std::size_t>(d_max));
      for (int d = 1; d <= d_max; ++d) {
        risks[static_cast<std::size_t>(d - 1)] = pml_parts[static_cast<std::size_t>(d - 1)].cost;
        shape[static_cast<std::size_t>(d - 1)] = static_cast<double>(d) / n;
      }
      c_hat = c_hat_threshold(slope_heuristic_path(risks, shape), n);
      crit2_values.resize(static_cast<std::size_t>(d_max));
      for (int d = 1; d <= d_max; ++d) {
        crit2_values[static_cast<std::size_t>(d - 1)] =
            risks[static_cast<std::size_t>(d - 1)] + c_hat * shape[static_cast<std::size_t>(d - 1)];
        dims.push_back(d);
      }
      crit1_values = risks;
      for (const auto& part : pml_parts) path.push_back(part.seg);
      break;
    }
    case Crit2::Kind::ideal: {
      if (!truth) throw std::domain_error("ideal selection needs the simulation truth");
      crit2_values.resize(static_cast<std::size_t>(d_max));
      for (int d = 1; d <= d_max; ++d) {
        const auto& seg = parts[static_cast<std::size_t>(d - 1)].seg;
        crit2_values[static_cast<std::size_t>(d - 1)] =
            quadratic_loss(truth->s, fit_regressogram(sample, seg), sample.t);
        dims.push_back(d);
      }
      break;
    }
  }

  if (!standalone_pml)
    for (std::size_t i = 0; i < dims.size(); ++i)
      path.push_back(parts[static_cast<std::size_t>(dims[i] - 1)].seg);

  const std::size_t best = argmin_index(crit2_values);
  const int d_hat = dims[best];
  Segmentation chosen = path[best];
  PiecewiseConstant fitted = fit_regressogram(sample, chosen);
  return ProcedureResult{d_hat,
                         std::move(chosen),
                         std::move(fitted),
                         std::move(dims),
                         std::move(crit1_values),
                         std::move(crit2_values),
                         std::move(path),
                         c_hat};
}

}  // namespace hetseg
