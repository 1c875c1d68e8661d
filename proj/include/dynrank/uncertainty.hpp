#pragma once

#include <Eigen/Dense>

#include "dynrank/grouping.hpp"
#include "dynrank/kernel.hpp"

namespace dynrank {

/// Group (Drazin, index 1) inverse of a square matrix via full-rank
/// factorization: A = C F with C of full column rank, A# = C (F C)^-2 F.
/// Requires rank(A^2) = rank(A); throws InvalidArgument otherwise.
/// Satisfies A A# A = A, A# A A# = A#, A A# = A# A.
Eigen::MatrixXd group_inverse(const Eigen::MatrixXd& A, double rank_tol = 1e-12);

struct AsymptoticCovariance {
  Eigen::MatrixXd sigma;   // B x B covariance of sqrt(n^2 M h) (pi_hat_G - pi*_G)
  Eigen::MatrixXd gamma;   // B x (B(B-1)/2) linearization, pair columns (k,l), k < l, lexicographic
  Eigen::MatrixXd lambda;  // diagonal pair-noise covariance, same column order
};

/// Asymptotic covariance of the grouped score estimate at a fixed time:
/// Sigma = Gamma Lambda Gamma' with
///   Lambda_(kl),(kl) = (1 / (r_k r_l)) pi_k pi_l / (pi_k + pi_l)^2 * int K^2,
///   Gamma_(i),(kl) = (A#_li - A#_ki) (pi_k + pi_l) / B,
/// where A = I - Pg*, Pg*_kl = pi_l / ((pi_k + pi_l) B) off the diagonal and
/// the diagonal completes rows to 1. The 1/B matches the chain the plug-in
/// estimator actually perturbs; a covariance built on the unnormalized chain
/// understates every entry by B^2 (its bands cover far below nominal). r
/// holds the group size fractions. scores_g must be positive and sum to 1.
AsymptoticCovariance theorem2_covariance(const Eigen::VectorXd& scores_g,
                                         const Eigen::VectorXd& r, double kernel_l2);

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement); |error| < 1e-12 on (1e-300, 1 - 1e-16).
double normal_quantile(double p);

struct ConfidenceBand {
  TimeGrid grid;
  Eigen::MatrixXd lower;  // m x B
  Eigen::MatrixXd upper;  // m x B
  Eigen::MatrixXd halfwidth;
  double level = 0.95;
};

/// Pointwise plug-in bands for grouped scores:
///   score +- z_{(1+level)/2} sqrt(Sigma_gg / (n^2 M h)).
/// M is the per-pair comparison budget the dataset was collected under.
ConfidenceBand confidence_band(const GroupedScores& grouped, const KernelSpec& spec,
                               int n, double M, double level = 0.95);

}  // namespace dynrank
