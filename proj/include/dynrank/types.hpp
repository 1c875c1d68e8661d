#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace dynrank {

/// One pairwise comparison: items are 0-based ids, outcome == 1 means the
/// record is evidence in favour of item_j (the i -> j direction of the
/// comparison chain), outcome == 0 favours item_i.
struct ComparisonRecord {
  int item_i = 0;
  int item_j = 0;
  double time = 0.0;
  int outcome = 0;
};

/// A collection of timestamped pairwise comparisons on n items over [0, horizon].
struct ComparisonDataset {
  int n = 0;
  double horizon = 1.0;
  std::vector<ComparisonRecord> records;
  /// Optional display labels, size n when present (ids index into it).
  std::vector<std::string> labels;
};

/// Checks structural invariants of a dataset and returns one human-readable
/// diagnostic per violation (empty vector == valid). Record positions in the
/// diagnostics are 0-based indices into ds.records.
std::vector<std::string> validate_dataset(const ComparisonDataset& ds);

/// Evaluation grid over [a, b]. Points are the m midpoints of an equal
/// partition: a + (k + 1/2) (b - a) / m, so no point touches the boundary.
struct TimeGrid {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> points;

  int size() const { return static_cast<int>(points.size()); }
  /// Cell width (b - a) / m.
  double step() const { return (b - a) / static_cast<double>(points.size()); }
};

/// Builds the midpoint grid with m points on [a, b]. Requires a < b, m >= 1.
TimeGrid make_grid(double a, double b, int m);

/// Index of the grid point closest to t (ties -> lower index).
int nearest_grid_index(const TimeGrid& grid, double t);

/// Scores for n items evaluated on a grid; scores(k, i) is item i at grid
/// point k. A proper score trajectory has positive entries and unit row sums;
/// validate() reports violations (estimates are allowed to carry raw values).
struct ScoreTrajectory {
  TimeGrid grid;
  Eigen::MatrixXd scores;  // m x n

  std::vector<std::string> validate(double row_sum_tol = 1e-10) const;
};

/// Partition of score-sorted positions into contiguous groups.
/// boundaries = {0 = s_0 < s_1 < ... < s_B = n}; group k covers sorted
/// positions [s_k, s_{k+1}). perm maps sorted position -> original item id.
struct GroupPartition {
  std::vector<int> boundaries;
  std::vector<int> perm;

  int group_count() const { return static_cast<int>(boundaries.size()) - 1; }
  int n_items() const { return boundaries.empty() ? 0 : boundaries.back(); }
  /// group index of a sorted position
  int group_of_position(int pos) const;
  /// per original item id: index of its group
  std::vector<int> group_of_item() const;
  /// group sizes s_{k+1} - s_k
  std::vector<int> group_sizes() const;

  std::vector<std::string> validate() const;
};

}  // namespace dynrank
