#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dynrank/kernel.hpp"
#include "dynrank/spectral.hpp"
#include "dynrank/types.hpp"

namespace dynrank {

/// Difference transform Q: (Q x)_i = x_i - x_{i+1} for i < n, (Q x)_n = sum(x).
/// Rows 1..n-1 read successive score gaps in sorted order; row n pins the
/// simplex constraint.
Eigen::MatrixXd q_matrix(int n);

/// Closed-form inverse: Qinv_ij = [i <= j] - j/n for j < n, Qinv_in = 1/n
/// (1-based indices).
Eigen::MatrixXd q_inverse(int n);

/// theta(k, i) = scores(k, i) - scores(k, i+1) for sorted-score columns;
/// input m x n, output m x (n-1). The implicit last coordinate theta_n = 0.
Eigen::MatrixXd theta_from_scores(const Eigen::MatrixXd& sorted_scores);

/// Inverse map: scores = Qinv (theta; 0) + 1/n, row by row; output m x n with
/// unit row sums up to rounding.
Eigen::MatrixXd scores_from_theta(const Eigen::MatrixXd& theta);

/// Sorted position -> original item id, by descending discrete L2 norm of each
/// item's score column over the grid; ties broken by original index.
std::vector<int> sort_items(const ScoreTrajectory& trajectory);

/// Per-grid-point regression pieces of the fused-lasso problem, in sorted
/// item order. X[k] = (P'(t_k) - I) Qinv with the last column dropped
/// (n x (n-1)); Y[k] = (1/n) (I - P'(t_k)) 1 (length n).
struct FusedDesign {
  TimeGrid grid;
  std::vector<int> perm;  // sorted position -> original item id
  std::vector<Eigen::MatrixXd> X;
  std::vector<Eigen::VectorXd> Y;
  int n = 0;

  int m() const { return static_cast<int>(X.size()); }
};

/// Builds the design from data: P(t_k) via kernel smoothing, rows/columns
/// permuted into sorted order.
FusedDesign assemble_design(const ComparisonDataset& ds, const KernelSpec& spec,
                            const TimeGrid& grid, const std::vector<int>& perm);

/// Same, from precomputed transition matrices in original item order.
FusedDesign assemble_design(const std::vector<TransitionMatrix>& transitions,
                            const TimeGrid& grid, const std::vector<int>& perm);

/// Residual sum of squares sum_k || Y_k - X_k theta_k ||^2 for theta m x (n-1).
double design_rss(const FusedDesign& design, const Eigen::MatrixXd& theta);

struct LassoFit {
  Eigen::MatrixXd theta;  // m x (n-1), block i = column i
  double objective = 0.0;
  double kkt_gap = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  // accepted objective per iteration
};

/// Solves  min_theta 1/2 sum_k ||Y_k - X_k theta_k||^2
///                   + lambda sum_i weights_i ||theta_i.||_2
/// (blocks are the rows of theta', i.e. one boundary across all grid points)
/// by monotone FISTA with blockwise soft thresholding. Convergence is declared
/// on the KKT residuals: active blocks within tol of the stationarity
/// condition, inactive blocks within tol of the subgradient bound. Throws
/// ConvergenceError with the final KKT gap on non-convergence.
LassoFit adaptive_group_lasso(const FusedDesign& design, const Eigen::VectorXd& weights,
                              double lambda, double tol = 1e-9, int max_iter = 50000,
                              const Eigen::MatrixXd* warm_start = nullptr);

/// Objective value of the fit above.
double lasso_objective(const FusedDesign& design, const Eigen::VectorXd& weights,
                       double lambda, const Eigen::MatrixXd& theta);

/// lambda_max = max_i ||X_i' Y||_2 / w_i (smallest lambda with all-zero
/// solution), then `count` log-spaced values down to lambda_max * min_ratio,
/// descending.
std::vector<double> default_lambda_grid(const FusedDesign& design,
                                        const Eigen::VectorXd& weights, int count = 50,
                                        double min_ratio = 1e-4);

/// EBIC(lambda) = nm log(RSS / (nm) + c0 Var(Y)) + log(nm) floor(df) with
/// df = sum_i 1{||theta_i|| > 0} + sum_i (||theta_i|| / ||theta_tilde_i||) (m - 1).
/// tilde_norms holds ||theta_tilde_i|| (any fixed normalization; the ratio is
/// taken in the same convention as theta's norms).
double ebic(const FusedDesign& design, const Eigen::MatrixXd& theta,
            const std::vector<double>& tilde_norms, double c0 = 0.1);

struct ThetaFit {
  double lambda = 0.0;
  Eigen::MatrixXd theta;
  double objective = 0.0;
  double ebic = 0.0;
  std::vector<int> support;  // blocks with ||theta_i|| / sqrt(m) > epsilon
};

struct ThetaPath {
  std::vector<ThetaFit> fits;        // descending lambda
  Eigen::VectorXd weights;           // adaptive weights 1 / ||theta_tilde_i||
  std::vector<double> tilde_norms;   // ||theta_tilde_i||_2 / sqrt(m)
  int selected = -1;                 // EBIC argmin
};

struct RecognizeOptions {
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  double fixed_lambda = 0.0;  // > 0 replaces the whole path with one value
  double epsilon = 1e-3;     // support threshold on ||theta_i|| / sqrt(m)
  double c0 = 0.1;           // EBIC variance offset
  double weight_cap = 1e12;  // cap for 1 / ||theta_tilde_i||
  double lasso_tol = 1e-9;
  int lasso_max_iter = 50000;
  double stat_tol = 1e-10;
  int stat_max_iter = 100000;
};

struct GroupRecognition {
  GroupPartition partition;
  ThetaPath path;
  ScoreTrajectory krc;           // preliminary per-item estimate, original order
  ScoreTrajectory fused_scores;  // Q-inverse of the selected theta, original order
  bool irreducible_warning = false;
};

/// Full pipeline: KRC -> sort -> adaptive weights -> lambda path with warm
/// starts -> EBIC selection -> support thresholding -> contiguous partition.
GroupRecognition recognize_groups(const ComparisonDataset& ds, const KernelSpec& spec,
                                  const TimeGrid& grid,
                                  const RecognizeOptions& opts = {});

struct GroupedScores {
  TimeGrid grid;
  GroupPartition partition;
  Eigen::MatrixXd group_scores;  // m x B, rows sum to 1
  ScoreTrajectory item_scores;   // m x n in original item order, rows sum to 1
};

/// Grouped refit: pooled transition matrix over the recognized groups,
///   Pg_kl(t) = (1/B) sum_{records of pairs G_k x G_l} w y / sum w,
/// stationary distribution per grid point, then per-item scores
/// item_i = group score / sum_k |G_k| group_k.
GroupedScores refit(const ComparisonDataset& ds, const KernelSpec& spec,
                    const TimeGrid& grid, const GroupPartition& partition,
                    double stat_tol = 1e-10, int stat_max_iter = 100000);
GroupedScores refit(const PairIndex& index, const KernelSpec& spec,
                    const TimeGrid& grid, const GroupPartition& partition,
                    double stat_tol = 1e-10, int stat_max_iter = 100000);

}  // namespace dynrank
