#pragma once

#include <optional>
#include <vector>

#include "dynrank/types.hpp"

namespace dynrank {

enum class KernelFamily { epanechnikov, gaussian };

/// Bandwidth-h smoothing kernel K_h(t, s) = K((t - s) / h) / h.
struct KernelSpec {
  KernelFamily family = KernelFamily::epanechnikov;
  double h = 0.05;
};

/// Base kernel K(v): Epanechnikov 0.75 (1 - v^2) on |v| <= 1, or standard
/// normal density. Integrates to 1 over the real line.
double kernel_base(KernelFamily family, double v);

/// K_h(t, s); requires h > 0.
double kernel_weight(const KernelSpec& spec, double t, double s);

/// Integral of K(v)^2 dv: 3/5 for Epanechnikov, 1 / (2 sqrt(pi)) for Gaussian.
double kernel_l2_integral(KernelFamily family);

/// Half-width of the base kernel's support (1 for Epanechnikov, +inf for
/// Gaussian); the smoothing window around t is [t - h * support, t + h * support].
double kernel_support_halfwidth(KernelFamily family);

/// Records of one ordered pair, sorted by time, for windowed kernel sums.
struct PairSeries {
  std::vector<double> times;
  std::vector<double> outcomes;

  /// (sum of weights, sum of weight * outcome) at t
  std::pair<double, double> kernel_sums(const KernelSpec& spec, double t) const;
};

/// Per-ordered-pair view of a dataset. Built once, reused across grid points.
class PairIndex {
 public:
  explicit PairIndex(const ComparisonDataset& ds);

  int n() const { return n_; }
  const PairSeries& series(int i, int j) const { return series_[i * n_ + j]; }

 private:
  int n_;
  std::vector<PairSeries> series_;
};

/// Kernel-weighted win fraction of item j over item i at time t, using the
/// records of the ordered pair (i, j):
///   sum_k y_k K_h(t, t_k) / sum_k K_h(t, t_k).
/// Returns nullopt when the weight mass at t is zero (no local evidence).
std::optional<double> smoothed_win_fraction(const ComparisonDataset& ds,
                                            const KernelSpec& spec, int item_i,
                                            int item_j, double t);

/// Same, via a prebuilt index.
std::optional<double> smoothed_win_fraction(const PairIndex& index,
                                            const KernelSpec& spec, int item_i,
                                            int item_j, double t);

}  // namespace dynrank
