#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "dynrank/grouping.hpp"
#include "dynrank/kernel.hpp"
#include "dynrank/types.hpp"

namespace dynrank {

/// Candidate change locations 0 = xi_0 < xi_1 < ... < xi_U < xi_{U+1} = V.
struct CandidateSet {
  std::vector<double> xi;  // interior candidates, strictly increasing in (0, V)
  double V = 1.0;

  int U() const { return static_cast<int>(xi.size()); }
  /// edge(u) for u in 0..U+1: 0, xi_1..xi_U, V
  double edge(int u) const;
};

/// Uniformly spaced candidates k V / (count + 1), k = 1..count.
CandidateSet uniform_candidates(int count, double V = 1.0);

/// Pairwise smoothed win fractions at time t restricted to records in
/// [interval_a, interval_b); entries with no local evidence are NaN.
/// The half-open window keeps phase boundaries unambiguous; the final
/// segment of a tiling should pass b slightly beyond V or use the dataset
/// horizon (records at exactly t = V are included when b >= horizon).
Eigen::MatrixXd smoothed_fraction_matrix(const ComparisonDataset& ds,
                                         const KernelSpec& spec, double t, double a,
                                         double b);

/// Average negative log-likelihood of scores against smoothed fractions:
///   -(2 / D) sum over defined ordered pairs of ybar_ij log(pi_j / (pi_i + pi_j)),
/// D = number of defined (non-NaN, i != j) entries; 0 when D == 0.
double neg_log_likelihood(const Eigen::VectorXd& scores, const Eigen::MatrixXd& ybar);

struct SegmentFit {
  double a = 0.0;
  double b = 0.0;
  GroupPartition partition;
  double cost_L = 0.0;       // integrated neg log-likelihood over [a, b]
  int group_count = 0;
  TimeGrid grid;             // interval grid the refit was evaluated on
  Eigen::MatrixXd refit_scores;  // per-item refit trajectory on grid (m_I x n)
};

struct DetectOptions {
  double grid_density = 30.0;  // grid points per unit time; at least 10 per interval
  RecognizeOptions recognize;
};

/// Fits the grouped model on [a, b): recognize_groups + refit on the interval
/// grid with m_I = max(10, round(grid_density * (b - a))) midpoints, then the
/// midpoint-rule integral of the neg log-likelihood of the refit trajectory.
/// Throws InvalidArgument when b - a < 2 h (degenerate interval).
SegmentFit segment_cost(const ComparisonDataset& ds, const KernelSpec& spec, double a,
                        double b, const DetectOptions& opts = {});

/// Lazy memo table of segment fits between candidate edges; shared across
/// gamma values and DP calls so each interval is fitted once.
class SegmentCostTable {
 public:
  SegmentCostTable(const ComparisonDataset& ds, const KernelSpec& spec,
                   CandidateSet candidates, DetectOptions opts = {});

  /// fit on [edge(l), edge(r)); infinite cost_L for intervals shorter than 2h
  const SegmentFit& operator()(int l, int r);

  const CandidateSet& candidates() const { return candidates_; }
  int evaluated() const { return static_cast<int>(memo_.size()); }

 private:
  const ComparisonDataset& ds_;
  KernelSpec spec_;
  CandidateSet candidates_;
  DetectOptions opts_;
  std::map<std::pair<int, int>, SegmentFit> memo_;
};

struct ChangePointResult {
  std::vector<double> change_points;  // interior change locations, ascending
  std::vector<SegmentFit> segments;   // fitted segments left to right
  double objective = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

/// Forward dynamic program over candidate edges. cost(l, r) returns the
/// likelihood term L and the group count B of interval (edge l, edge r);
/// the objective adds gamma1 * B * length + gamma2 per segment. Returns the
/// optimal interior breakpoint indices (subset of 1..U) and the objective.
std::pair<std::vector<int>, double> dp_core(
    const CandidateSet& candidates,
    const std::function<std::pair<double, int>(int, int)>& cost, double gamma1,
    double gamma2);

/// Full detection at fixed penalties, using (and filling) the cost table.
ChangePointResult dp_detect(SegmentCostTable& costs, double gamma1, double gamma2);

struct CrossValidationResult {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  Eigen::MatrixXd heldout_loglik;  // gamma1_grid.size() x gamma2_grid.size(), NaN where infeasible
};

/// K-fold selection of (gamma1, gamma2), folds stratified by ordered pair.
/// Feasible cells require gamma1 > gamma2; throws InvalidArgument when the
/// whole grid is infeasible. Held-out records are scored by the refit
/// trajectory of their segment at the nearest grid point.
CrossValidationResult cross_validate_gammas(const ComparisonDataset& ds,
                                            const KernelSpec& spec,
                                            const CandidateSet& candidates,
                                            const std::vector<double>& gamma1_grid,
                                            const std::vector<double>& gamma2_grid,
                                            int folds = 10, std::uint64_t seed = 0,
                                            const DetectOptions& opts = {});

struct NaiveDetection {
  std::vector<double> change_points;              // candidates where the partition changes
  std::vector<GroupPartition> interval_partitions;  // one per inter-candidate interval
};

/// Baseline: group each inter-candidate interval independently and flag every
/// candidate whose adjacent intervals disagree (as partitions of item ids).
NaiveDetection naive_detect(SegmentCostTable& costs);

}  // namespace dynrank
