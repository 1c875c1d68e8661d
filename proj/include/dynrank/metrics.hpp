#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dynrank/types.hpp"

namespace dynrank {

/// Kendall tau-a between two score vectors: (concordant - discordant) pairs
/// over n(n-1)/2. Ties in either vector count as neither.
double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Grid-averaged Kendall tau-a between two trajectories on a common grid.
double mean_kendall_tau(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth);

/// Kendall tau-b: (concordant - discordant) / sqrt((T - ties_a)(T - ties_b))
/// with T = n(n-1)/2 and ties_x the pairs tied in x. Equals tau-a on tie-free
/// input; stays 1 when both vectors tie exactly the same pairs. Returns 0 when
/// either vector is entirely tied (no ordering information).
double kendall_tau_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Grid-averaged Kendall tau-b between two trajectories on a common grid.
double mean_kendall_tau_b(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth);

/// Trajectory error n^2 / (n m) * sum_{k,i} (est - truth)^2, i.e. the mean
/// squared error of the scaled scores n * pi. Matches the scale the method's
/// simulation tables report.
double trajectory_mse(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth);

struct GroupingConfusion {
  long long same_correct = 0;    // pairs grouped together in both
  long long same_total = 0;      // pairs together in truth
  long long diff_correct = 0;    // pairs separated in both
  long long diff_total = 0;      // pairs separated in truth

  /// fraction of truly-together pairs recovered together (1 when undefined)
  double sensitivity() const;
  /// fraction of truly-separated pairs kept apart (1 when undefined)
  double specificity() const;
};

/// Confusion over unordered item pairs between estimated and true group
/// assignments (given per original item id).
GroupingConfusion grouping_accuracy(const std::vector<int>& est_group_of_item,
                                    const std::vector<int>& true_group_of_item);

/// Hausdorff distance between finite point sets in [0, V]: max directed
/// distance; 0 when both empty, V when exactly one is empty.
double hausdorff(const std::vector<double>& a, const std::vector<double>& b, double V);

}  // namespace dynrank
