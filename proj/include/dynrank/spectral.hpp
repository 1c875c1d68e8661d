#pragma once

#include <Eigen/Dense>

#include "dynrank/kernel.hpp"
#include "dynrank/types.hpp"

namespace dynrank {

/// Row-stochastic comparison transition matrix at a time point.
/// Off-diagonal entries lie in [0, 1/n]; diagonal completes each row to 1.
struct TransitionMatrix {
  double t = 0.0;
  Eigen::MatrixXd entries;
  /// ordered pairs (i, j), i != j, with zero kernel mass at t (their entry is 0)
  int zero_mass_pairs = 0;
};

/// P(t) from data: P_ij(t) = (1/n) * smoothed win fraction of j over i for
/// i != j (0 when the pair has no local evidence), diagonal 1 - row sum.
TransitionMatrix build_transition(const ComparisonDataset& ds, const KernelSpec& spec,
                                  double t);
TransitionMatrix build_transition(const PairIndex& index, const KernelSpec& spec,
                                  double t);

/// Population transition matrix of a positive score vector pi (any scale):
/// P*_ij = (1/n) pi_j / (pi_i + pi_j) for i != j. Its stationary distribution
/// is pi / sum(pi).
TransitionMatrix ideal_transition(const Eigen::VectorXd& pi, double t = 0.0);

struct StationaryResult {
  Eigen::VectorXd dist;
  double residual = 0.0;  // || dist' P - dist' ||_2
  int iterations = 0;
  bool used_fallback = false;     // dense linear solve after power iteration stalled
  bool irreducible_warning = false;  // support graph of P not strongly connected
};

/// Stationary distribution of a row-stochastic matrix by power iteration from
/// the uniform vector, with a dense linear-solve fallback. Throws
/// ConvergenceError (carrying the final residual) if both fail to reach tol.
StationaryResult stationary_distribution(const Eigen::MatrixXd& P, double tol = 1e-10,
                                         int max_iter = 100000);

struct KrcResult {
  ScoreTrajectory trajectory;          // m x n, rows sum to 1
  std::vector<int> zero_mass_pairs;    // per grid point
  bool irreducible_warning = false;    // any grid point with a disconnected support graph
};

/// Kernel rank centrality: stationary distribution of P(t_k) at every grid
/// point. This is the preliminary (per-item) dynamic score estimate.
KrcResult krc_estimate(const ComparisonDataset& ds, const KernelSpec& spec,
                       const TimeGrid& grid, double tol = 1e-10,
                       int max_iter = 100000);

}  // namespace dynrank
