#include "hetseg/core.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace hetseg {

Sample Sample::make(std::vector<double> t, std::vector<double> y) {
  if (t.size() != y.size()) throw std::invalid_argument("sample: t and y lengths differ");
  if (t.size() < 2) throw std::invalid_argument("sample: need at least 2 observations");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0.0 || t[i] > 1.0) throw std::invalid_argument("sample: design point outside [0,1]");
    if (i > 0 && t[i] <= t[i - 1])
      throw std::invalid_argument("sample: design points not strictly increasing");
  }
  Sample s;
  s.t = std::move(t);
  s.y = std::move(y);
  return s;
}

Segmentation Segmentation::make(int n, std::vector<int> breakpoints, int min_size) {
  if (n < 1) throw std::invalid_argument("segmentation: empty design");
  if (min_size < 1) throw std::invalid_argument("segmentation: min_size < 1");
  int prev = 1;
  for (int b : breakpoints) {
    if (b < 2 || b > n) throw std::invalid_argument("segmentation: breakpoint out of {2..n}");
    if (b - prev < min_size) throw std::invalid_argument("segmentation: segment shorter than min size");
    prev = b;
  }
  if (n - prev + 1 < min_size)
    throw std::invalid_argument("segmentation: last segment shorter than min size");
  return Segmentation(n, std::move(breakpoints));
}

std::pair<int, int> Segmentation::segment(int k) const {
  const int d = dimension();
  if (k < 0 || k >= d) throw std::out_of_range("segmentation: segment index");
  const int first = (k == 0) ? 1 : breaks_[k - 1];
  const int last = (k == d - 1) ? n_ : breaks_[k] - 1;
  return {first, last};
}

int Segmentation::min_segment_length() const {
  int best = n_;
  for (int k = 0; k < dimension(); ++k) {
    auto [first, last] = segment(k);
    best = std::min(best, last - first + 1);
  }
  return best;
}

std::string Segmentation::serialize() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (i) out << ',';
    out << breaks_[i];
  }
  return out.str();
}

Segmentation Segmentation::parse(int n, const std::string& text, int min_size) {
  std::vector<int> breaks;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    if (field.empty()) continue;
    std::size_t pos = 0;
    int value = 0;
    try {
      value = std::stoi(field, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("segmentation: bad breakpoint '" + field + "'");
    }
    if (pos != field.size())
      throw std::invalid_argument("segmentation: bad breakpoint '" + field + "'");
    breaks.push_back(value);
  }
  return make(n, std::move(breaks), min_size);
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> cuts, std::vector<double> levels)
    : cuts_(std::move(cuts)), levels_(std::move(levels)) {
  if (levels_.size() != cuts_.size() + 1)
    throw std::invalid_argument("piecewise: need one level per interval");
  for (std::size_t i = 0; i < cuts_.size(); ++i) {
    if (cuts_[i] <= 0.0 || cuts_[i] > 1.0)
      throw std::invalid_argument("piecewise: cut outside (0,1]");
    if (i > 0 && cuts_[i] <= cuts_[i - 1])
      throw std::invalid_argument("piecewise: cuts not strictly increasing");
  }
}

double PiecewiseConstant::operator()(double t) const {
  if (t < 0.0 || t > 1.0) throw std::domain_error("piecewise: point outside [0,1]");
  const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), t);
  return levels_[static_cast<std::size_t>(it - cuts_.begin())];
}

std::vector<double> PiecewiseConstant::at(const std::vector<double>& t) const {
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = (*this)(t[i]);
  return out;
}

double mean_square(const PiecewiseConstant& f) {
  double total = 0.0;
  double left = 0.0;
  const auto& cuts = f.cuts();
  const auto& levels = f.levels();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double right = (k < cuts.size()) ? cuts[k] : 1.0;
    total += (right - left) * levels[k] * levels[k];
    left = right;
  }
  return total;
}

DimensionGrid DimensionGrid::defaults(int n) {
  const int half = std::max(1, n / 2);
  const int d = std::clamp(4 * n / 10, 1, half);
  return make(n, d);
}

DimensionGrid DimensionGrid::make(int n, int d_max) {
  if (n < 2) throw std::invalid_argument("dimension grid: n < 2");
  if (d_max < 1 || d_max > n / 2)
    throw std::domain_error("dimension grid: d_max outside [1, n/2]");
  return DimensionGrid{n, d_max};
}

std::vector<SegmentStats> segment_stats(const Sample& sample, const Segmentation& seg) {
  if (seg.n() != sample.n())
    throw std::invalid_argument("segment_stats: segmentation size mismatch");
  std::vector<SegmentStats> out(static_cast<std::size_t>(seg.dimension()));
  for (int k = 0; k < seg.dimension(); ++k) {
    auto [first, last] = seg.segment(k);
    SegmentStats st;
    st.count = last - first + 1;
    for (int i = first; i <= last; ++i) {
      const double v = sample.y[static_cast<std::size_t>(i - 1)];
      st.sum += v;
      st.sum_sq += v * v;
    }
    out[static_cast<std::size_t>(k)] = st;
  }
  return out;
}

PiecewiseConstant fit_regressogram(const Sample& sample, const Segmentation& seg) {
  const auto stats = segment_stats(sample, seg);
  std::vector<double> cuts;
  cuts.reserve(seg.breakpoints().size());
  for (int b : seg.breakpoints()) cuts.push_back(sample.t[static_cast<std::size_t>(b - 1)]);
  std::vector<double> levels;
  levels.reserve(stats.size());
  for (const auto& st : stats) levels.push_back(st.sum / st.count);
  return PiecewiseConstant(std::move(cuts), std::move(levels));
}

namespace {

void enumerate_rec(int n, int d, int min_size, int next_start, std::vector<int>& breaks,
                   std::vector<Segmentation>& out) {
  const int placed = static_cast<int>(breaks.size());
  if (placed == d - 1) {
    out.push_back(Segmentation::make(n, breaks, min_size));
    return;
  }
  const int remaining = d - 1 - placed;  // breakpoints still to place
  // Next breakpoint b: current segment [next_start, b-1] needs >= min_size
  // points, and the suffix needs room for `remaining` segments of that size.
  const int lo = next_start + min_size;
  const int hi = n + 1 - remaining * min_size;
  for (int b = lo; b <= hi; ++b) {
    breaks.push_back(b);
    enumerate_rec(n, d, min_size, b, breaks, out);
    breaks.pop_back();
  }
}

}  // namespace

std::vector<Segmentation> enumerate_segmentations(int n, int d, int min_size) {
  if (n > 16) throw std::length_error("enumerate_segmentations: n > 16 refused");
  if (n < 2) throw std::invalid_argument("enumerate_segmentations: n < 2");
  if (d < 1 || d * min_size > n)
    throw std::domain_error("enumerate_segmentations: infeasible dimension");
  std::vector<Segmentation> out;
  std::vector<int> breaks;
  enumerate_rec(n, d, min_size, 1, breaks, out);
  return out;
}

}  // namespace hetseg
