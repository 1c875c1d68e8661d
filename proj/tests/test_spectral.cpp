#include <doctest.h>

#include <cmath>

#include "dynrank/errors.hpp"
#include "dynrank/rng.hpp"
#include "dynrank/spectral.hpp"

using namespace dynrank;

TEST_CASE("build_transition hand cases") {
  KernelSpec spec{KernelFamily::epanechnikov, 0.1};

  // one-sided evidence: item 1 always beats item 0
  ComparisonDataset ds;
  ds.n = 2;
  ds.horizon = 1.0;
  ds.records = {{0, 1, 0.48, 1}, {0, 1, 0.5, 1}, {1, 0, 0.49, 0}, {1, 0, 0.51, 0}};
  TransitionMatrix P = build_transition(ds, spec, 0.5);
  CHECK(P.entries(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(P.entries(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(P.entries(1, 0) == doctest::Approx(0.0));
  CHECK(P.entries(1, 1) == doctest::Approx(1.0));
  CHECK(P.zero_mass_pairs == 0);
  // the always-winning item absorbs all mass
  StationaryResult st = stationary_distribution(P.entries);
  CHECK(st.dist(1) == doctest::Approx(1.0).epsilon(1e-9));

  // no data at all -> identity
  ComparisonDataset empty;
  empty.n = 3;
  TransitionMatrix I3 = build_transition(empty, spec, 0.5);
  CHECK(I3.entries.isApprox(Eigen::MatrixXd::Identity(3, 3)));
  CHECK(I3.zero_mass_pairs == 6);
}

TEST_CASE("transition invariants on random data") {
  CounterRng rng(11, 0);
  ComparisonDataset ds;
  ds.n = 6;
  ds.horizon = 1.0;
  for (int k = 0; k < 900; ++k) {
    int i = static_cast<int>(rng.below(6));
    int j = static_cast<int>(rng.below(6));
    if (i == j) continue;
    ds.records.push_back({i, j, rng.uniform(), rng.bernoulli(0.3) ? 1 : 0});
  }
  PairIndex index(ds);
  KernelSpec spec{KernelFamily::epanechnikov, 0.07};
  for (double t : {0.1, 0.35, 0.6, 0.92}) {
    TransitionMatrix P = build_transition(index, spec, t);
    for (int i = 0; i < 6; ++i) {
      CHECK(P.entries.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(P.entries(i, i) > 0.0);  // aperiodicity anchor
      for (int j = 0; j < 6; ++j)
        if (j != i) {
          CHECK(P.entries(i, j) >= 0.0);
          CHECK(P.entries(i, j) <= 1.0 / 6 + 1e-15);
        }
    }
  }
}

TEST_CASE("ideal transition and its stationary scores") {
  Eigen::VectorXd pi(2);
  pi << 2.0 / 3.0, 1.0 / 3.0;
  TransitionMatrix P = ideal_transition(pi);
  CHECK(P.entries(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(P.entries(1, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  StationaryResult st = stationary_distribution(P.entries);
  CHECK(st.dist(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(st.residual <= 1e-10);
  CHECK_FALSE(st.irreducible_warning);

  CHECK_THROWS_AS(ideal_transition(Eigen::VectorXd::Zero(3)), InvalidArgument);
}

TEST_CASE("stationary distribution of a generic chain") {
  // two-state chain solved by hand: v = (0.6, 0.4)
  Eigen::MatrixXd P(2, 2);
  P << 0.5, 0.5, 0.75, 0.25;
  StationaryResult st = stationary_distribution(P);
  CHECK(st.dist(0) == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(st.dist(1) == doctest::Approx(0.4).epsilon(1e-10));
  CHECK((P.transpose() * st.dist - st.dist).norm() <= 1e-10);

  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.4, 0.5, 0.5;
  CHECK_THROWS_AS(stationary_distribution(bad), InvalidArgument);
}

TEST_CASE("disconnected support graph raises the warning") {
  // items {0,1} and {2,3} never meet
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(4, 4);
  P(0, 1) = 0.25;
  P(1, 0) = 0.25;
  P(2, 3) = 0.25;
  P(3, 2) = 0.25;
  for (int i = 0; i < 4; ++i) P(i, i) = 1.0 - P.row(i).sum();
  StationaryResult st = stationary_distribution(P);
  CHECK(st.irreducible_warning);
  CHECK(st.dist.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.residual <= 1e-10);
}

TEST_CASE("krc recovers constant scores from heavy sampling") {
  Eigen::VectorXd pi(3);
  pi << 0.5, 0.3, 0.2;
  const int M = 4000;
  const double h = 0.25;
  ComparisonDataset ds;
  ds.n = 3;
  ds.horizon = 1.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      CounterRng rng(5, i * 3 + j);
      for (int k = 0; k < M; ++k) {
        double t = rng.uniform();
        int y = rng.bernoulli(pi(j) / (pi(i) + pi(j))) ? 1 : 0;
        ds.records.push_back({i, j, t, y});
      }
    }
  KernelSpec spec{KernelFamily::epanechnikov, h};
  TimeGrid grid = make_grid(0.3, 0.7, 5);
  KrcResult krc = krc_estimate(ds, spec, grid);
  CHECK_FALSE(krc.irreducible_warning);
  CHECK(krc.trajectory.validate().empty());
  // errors scale like (n^2 M h)^(-1/2) ~ 0.007; allow a generous multiple
  const double tol = 6.0 / std::sqrt(9.0 * M * h);
  for (int k = 0; k < grid.size(); ++k)
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(krc.trajectory.scores(k, i) - pi(i)) < tol);
}

TEST_CASE("krc flags sparse comparison graphs") {
  ComparisonDataset ds;
  ds.n = 3;
  ds.horizon = 1.0;
  CounterRng rng(3, 0);
  for (int k = 0; k < 60; ++k)
    ds.records.push_back({0, 1, rng.uniform(), rng.bernoulli(0.5) ? 1 : 0});
  KernelSpec spec{KernelFamily::epanechnikov, 0.2};
  TimeGrid grid = make_grid(0.0, 1.0, 3);
  KrcResult krc = krc_estimate(ds, spec, grid);
  CHECK(krc.irreducible_warning);
  for (int k = 0; k < 3; ++k) CHECK(krc.zero_mass_pairs[k] >= 4);
}
