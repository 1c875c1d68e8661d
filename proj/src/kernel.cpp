#include "dynrank/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynrank/errors.hpp"

namespace dynrank {

namespace {
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}

double kernel_base(KernelFamily family, double v) {
  switch (family) {
    case KernelFamily::epanechnikov:
      return std::abs(v) <= 1.0 ? 0.75 * (1.0 - v * v) : 0.0;
    case KernelFamily::gaussian:
      return kInvSqrt2Pi * std::exp(-0.5 * v * v);
  }
  throw InvalidArgument("kernel_base: unknown family");
}

double kernel_weight(const KernelSpec& spec, double t, double s) {
  if (!(spec.h > 0.0)) throw InvalidArgument("kernel_weight: bandwidth must be positive");
  return kernel_base(spec.family, (t - s) / spec.h) / spec.h;
}

double kernel_l2_integral(KernelFamily family) {
  switch (family) {
    case KernelFamily::epanechnikov:
      return 0.6;
    case KernelFamily::gaussian:
      return 0.5 * kInvSqrt2Pi * std::sqrt(2.0);  // 1 / (2 sqrt(pi))
  }
  throw InvalidArgument("kernel_l2_integral: unknown family");
}

double kernel_support_halfwidth(KernelFamily family) {
  return family == KernelFamily::epanechnikov ? 1.0
                                              : std::numeric_limits<double>::infinity();
}

std::pair<double, double> PairSeries::kernel_sums(const KernelSpec& spec, double t) const {
  double sw = 0.0, swy = 0.0;
  const double half = kernel_support_halfwidth(spec.family) * spec.h;
  std::size_t lo = 0, hi = times.size();
  if (std::isfinite(half)) {
    lo = std::lower_bound(times.begin(), times.end(), t - half) - times.begin();
    hi = std::upper_bound(times.begin(), times.end(), t + half) - times.begin();
  }
  for (std::size_t k = lo; k < hi; ++k) {
    double w = kernel_weight(spec, t, times[k]);
    sw += w;
    swy += w * outcomes[k];
  }
  return {sw, swy};
}

PairIndex::PairIndex(const ComparisonDataset& ds) : n_(ds.n), series_(ds.n * ds.n) {
  std::vector<std::vector<std::pair<double, double>>> buckets(ds.n * ds.n);
  for (const ComparisonRecord& rec : ds.records)
    buckets[rec.item_i * n_ + rec.item_j].push_back({rec.time, double(rec.outcome)});
  for (int p = 0; p < n_ * n_; ++p) {
    auto& b = buckets[p];
    std::sort(b.begin(), b.end());
    series_[p].times.reserve(b.size());
    series_[p].outcomes.reserve(b.size());
    for (auto& [t, y] : b) {
      series_[p].times.push_back(t);
      series_[p].outcomes.push_back(y);
    }
  }
}

std::optional<double> smoothed_win_fraction(const PairIndex& index, const KernelSpec& spec,
                                            int item_i, int item_j, double t) {
  if (item_i < 0 || item_i >= index.n() || item_j < 0 || item_j >= index.n() ||
      item_i == item_j)
    throw InvalidArgument("smoothed_win_fraction: invalid item pair");
  auto [sw, swy] = index.series(item_i, item_j).kernel_sums(spec, t);
  if (sw <= 0.0) return std::nullopt;
  return swy / sw;
}

std::optional<double> smoothed_win_fraction(const ComparisonDataset& ds,
                                            const KernelSpec& spec, int item_i, int item_j,
                                            double t) {
  if (item_i < 0 || item_i >= ds.n || item_j < 0 || item_j >= ds.n || item_i == item_j)
    throw InvalidArgument("smoothed_win_fraction: invalid item pair");
  double sw = 0.0, swy = 0.0;
  for (const ComparisonRecord& rec : ds.records) {
    if (rec.item_i != item_i || rec.item_j != item_j) continue;
    double w = kernel_weight(spec, t, rec.time);
    sw += w;
    swy += w * rec.outcome;
  }
  if (sw <= 0.0) return std::nullopt;
  return swy / sw;
}

}  // namespace dynrank
