#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "dynrank/errors.hpp"
#include "dynrank/grouping.hpp"
#include "dynrank/rng.hpp"
#include "dynrank/spectral.hpp"
#include "dynrank/uncertainty.hpp"

using namespace dynrank;

namespace {

Eigen::MatrixXd random_low_rank(std::uint64_t seed, int n, int rank) {
  CounterRng rng(seed, 40);
  Eigen::MatrixXd U(n, rank), V(rank, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) U(i, j) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < n; ++j) V(i, j) = rng.uniform(-1.0, 1.0);
  return U * V;
}

}  // namespace

TEST_CASE("group inverse satisfies its defining identities") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    int n = 5;
    int rank = 3;
    Eigen::MatrixXd A = random_low_rank(seed, n, rank);
    // rank(A^2) = rank(A) holds almost surely for random factors
    Eigen::MatrixXd Ag = group_inverse(A);
    CHECK((A * Ag * A - A).norm() < 1e-10 * A.norm());
    CHECK((Ag * A * Ag - Ag).norm() < 1e-10 * Ag.norm());
    CHECK((A * Ag - Ag * A).norm() < 1e-10 * (A * Ag).norm());
  }
}

TEST_CASE("group inverse of an invertible matrix is the inverse") {
  Eigen::MatrixXd A(3, 3);
  A << 2, 1, 0, 0, 3, 1, 1, 0, 4;
  Eigen::MatrixXd Ag = group_inverse(A);
  CHECK((Ag - A.inverse()).norm() < 1e-12);
}

TEST_CASE("group inverse of an idempotent matrix is itself") {
  // projector onto span{(1,-1)} along span{(1,1)}
  Eigen::MatrixXd A(2, 2);
  A << 0.5, -0.5, -0.5, 0.5;
  Eigen::MatrixXd Ag = group_inverse(A);
  CHECK((Ag - A).norm() < 1e-13);
}

TEST_CASE("group inverse rejects index above one and handles zero") {
  Eigen::MatrixXd nilpotent(2, 2);
  nilpotent << 0, 1, 0, 0;  // rank 1, square is zero
  CHECK_THROWS_AS(group_inverse(nilpotent), InvalidArgument);

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  CHECK(group_inverse(zero).norm() == 0.0);

  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(group_inverse(rect), InvalidArgument);
}

TEST_CASE("two-group covariance matches the closed form") {
  // equal-score groups with equal size fractions, Epanechnikov noise constant
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(2, 0.5);
  Eigen::VectorXd r = Eigen::VectorXd::Constant(2, 0.5);
  AsymptoticCovariance cov = theorem2_covariance(pi, r, 0.6);

  REQUIRE(cov.lambda.rows() == 1);
  REQUIRE(cov.gamma.rows() == 2);
  REQUIRE(cov.gamma.cols() == 1);
  // Lambda = (1/(0.5*0.5)) * (0.25/1) * 0.6 = 0.6
  CHECK(cov.lambda(0, 0) == doctest::Approx(0.6).epsilon(1e-12));
  // Pg = [[3/4, 1/4], [1/4, 3/4]], so A = I - Pg is a quarter of the
  // projector onto span{(1,-1)} and A# = 4A = [[1,-1],[-1,1]]. Then
  // Gamma_i = (A#_{1i} - A#_{0i}) * (pi_0 + pi_1) / 2 gives (-1, 1)'.
  CHECK(cov.gamma(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cov.gamma(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::MatrixXd expected(2, 2);
  expected << 0.6, -0.6, -0.6, 0.6;
  CHECK((cov.sigma - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gamma matches a finite difference of the stationary map") {
  // Independent check of the sensitivity matrix: nudge one pairwise win
  // fraction, rebuild the grouped chain the same way the estimator does, and
  // difference the stationary vectors. Central differences keep the
  // truncation error at O(delta^2).
  Eigen::VectorXd pi(3);
  pi << 0.5, 0.3, 0.2;
  Eigen::VectorXd r(3);
  r << 0.3, 0.3, 0.4;
  AsymptoticCovariance cov = theorem2_covariance(pi, r, 0.6);

  const int B = 3;
  Eigen::MatrixXd P(B, B);
  for (int k = 0; k < B; ++k) {
    double off = 0.0;
    for (int l = 0; l < B; ++l) {
      if (l == k) continue;
      P(k, l) = pi(l) / (pi(k) + pi(l)) / B;
      off += P(k, l);
    }
    P(k, k) = 1.0 - off;
  }

  const double delta = 1e-5;
  int idx = 0;
  for (int k = 0; k < B; ++k) {
    for (int l = k + 1; l < B; ++l, ++idx) {
      auto shifted = [&](double d) {
        // win fractions for (k,l) and (l,k) come from the same records, so
        // they move in opposite directions; diagonals keep rows stochastic
        Eigen::MatrixXd Q = P;
        Q(k, l) += d / B;
        Q(k, k) -= d / B;
        Q(l, k) -= d / B;
        Q(l, l) += d / B;
        return stationary_distribution(Q, 1e-13, 200000).dist;
      };
      Eigen::VectorXd grad = (shifted(delta) - shifted(-delta)) / (2.0 * delta);
      for (int i = 0; i < B; ++i) {
        CHECK(std::abs(grad(i) - cov.gamma(i, idx)) < 1e-7);
      }
    }
  }
}

TEST_CASE("covariance is symmetric positive semidefinite with zero row sums") {
  CounterRng rng(9, 12);
  for (int trial = 0; trial < 4; ++trial) {
    int B = 2 + int(rng.below(4));
    Eigen::VectorXd pi(B), r(B);
    double psum = 0.0, rsum = 0.0;
    for (int k = 0; k < B; ++k) {
      pi(k) = rng.uniform(0.1, 1.0);
      r(k) = rng.uniform(0.1, 1.0);
      psum += pi(k);
      rsum += r(k);
    }
    pi /= psum;
    r /= rsum;
    AsymptoticCovariance cov = theorem2_covariance(pi, r, 0.6);
    CHECK((cov.sigma - cov.sigma.transpose()).norm() < 1e-12);
    // the estimate stays on the simplex, so fluctuations cancel across groups
    CHECK(cov.sigma.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov.sigma);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK((cov.sigma - cov.gamma * cov.lambda * cov.gamma.transpose()).norm() < 1e-12);
  }
}

TEST_CASE("covariance validates inputs") {
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(2, 0.5);
  Eigen::VectorXd r3 = Eigen::VectorXd::Constant(3, 1.0 / 3);
  CHECK_THROWS_AS(theorem2_covariance(pi, r3, 0.6), InvalidArgument);
  Eigen::VectorXd bad(2);
  bad << 1.2, -0.2;
  CHECK_THROWS_AS(theorem2_covariance(bad, pi, 0.6), InvalidArgument);
  Eigen::VectorXd unnormalized(2);
  unnormalized << 0.5, 0.6;
  CHECK_THROWS_AS(theorem2_covariance(unnormalized, pi, 0.6), InvalidArgument);
}

TEST_CASE("normal quantile values") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.995) == doctest::Approx(2.5758293035489004).epsilon(1e-12));
  CHECK(normal_quantile(0.841344746068543) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  // symmetry across the median
  for (double p : {0.01, 0.2, 0.37, 0.6}) {
    CHECK(normal_quantile(p) == doctest::Approx(-normal_quantile(1.0 - p)).epsilon(1e-12));
  }
  // round trip against the normal CDF via erfc
  for (double p : {0.001, 0.1, 0.5, 0.9, 0.999}) {
    double z = normal_quantile(p);
    double back = 0.5 * std::erfc(-z / std::sqrt(2.0));
    CHECK(back == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(normal_quantile(0.0), InvalidArgument);
  CHECK_THROWS_AS(normal_quantile(1.0), InvalidArgument);
  CHECK_THROWS_AS(normal_quantile(-0.3), InvalidArgument);
}

TEST_CASE("confidence bands scale as the closed form dictates") {
  GroupedScores grouped;
  grouped.grid = make_grid(0.0, 1.0, 3);
  grouped.partition.boundaries = {0, 2, 4};
  grouped.partition.perm = {0, 1, 2, 3};
  grouped.group_scores.resize(3, 2);
  for (int k = 0; k < 3; ++k) {
    grouped.group_scores(k, 0) = 0.5;
    grouped.group_scores(k, 1) = 0.5;
  }
  KernelSpec spec{KernelFamily::epanechnikov, 0.05};
  int n = 4;
  double M = 100.0;

  ConfidenceBand band = confidence_band(grouped, spec, n, M, 0.95);
  REQUIRE(band.halfwidth.rows() == 3);
  REQUIRE(band.halfwidth.cols() == 2);

  // equal 2-group case: Sigma_kk = 0.6 * (int K^2 / 0.6) for the kernel used
  double sigma_kk = 0.6;
  double expect =
      1.959963984540054 * std::sqrt(sigma_kk / (n * n * M * spec.h));
  for (int k = 0; k < 3; ++k)
    for (int g = 0; g < 2; ++g) {
      CHECK(band.halfwidth(k, g) == doctest::Approx(expect).epsilon(1e-12));
      CHECK(band.upper(k, g) == doctest::Approx(0.5 + expect).epsilon(1e-12));
      CHECK(band.lower(k, g) == doctest::Approx(0.5 - expect).epsilon(1e-12));
    }

  // quadrupling the budget halves the width
  ConfidenceBand tighter = confidence_band(grouped, spec, n, 4.0 * M, 0.95);
  CHECK(tighter.halfwidth(0, 0) == doctest::Approx(0.5 * band.halfwidth(0, 0)).epsilon(1e-12));

  // a wider level widens the band
  ConfidenceBand ninety = confidence_band(grouped, spec, n, M, 0.90);
  CHECK(ninety.halfwidth(0, 0) < band.halfwidth(0, 0));
}
