#include <doctest.h>

#include <cmath>
#include <vector>

#include "dynrank/errors.hpp"
#include "dynrank/simulate.hpp"

using namespace dynrank;

TEST_CASE("curve evaluation combines the terms") {
  CurveSpec c{0.2, 0.03, 18.0, 0.0, 0.0, 0.0};
  CHECK(c.eval(0.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(c.eval(1.0 / 36) == doctest::Approx(0.23).epsilon(1e-12));  // sin peak

  CurveSpec arc{0.1, 0.0, 0.0, 0.6, 0.0, 0.0};
  CHECK(arc.eval(1.0) == doctest::Approx(0.1 + 0.6 * std::atan(M_PI)).epsilon(1e-14));

  CurveSpec pow_term{0.065, 0.0, 0.0, 0.0, 0.25, 0.5};
  CHECK(pow_term.eval(0.5) == doctest::Approx(0.065).epsilon(1e-15));
  CHECK(pow_term.eval(0.4) == doctest::Approx(0.065).epsilon(1e-15));  // before the shift
  CHECK(pow_term.eval(0.6) ==
        doctest::Approx(0.065 + 0.25 * std::pow(0.1, 0.1)).epsilon(1e-14));
}

TEST_CASE("builtin grouped settings scale with n") {
  PhasedSpec one = builtin_setting("grouping-1", 10);
  CHECK(one.n == 10);
  CHECK(one.breaks.empty());
  REQUIRE(one.phases.size() == 1);
  const TrajectorySpec& tr = one.phases[0];
  REQUIRE(tr.pieces.size() == 3);
  CHECK(tr.pieces[0].size == 3);
  CHECK(tr.pieces[1].size == 3);
  CHECK(tr.pieces[2].size == 4);
  CHECK(tr.pieces[0].curve.eval(0.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(tr.pieces[1].curve.eval(0.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(tr.pieces[2].curve.eval(0.0) == doctest::Approx(0.025).epsilon(1e-14));
  CHECK(tr.pert_amp == doctest::Approx(0.001).epsilon(1e-14));
  CHECK(tr.group_of_item() == std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 2});

  PhasedSpec big = builtin_setting("grouping-1", 20);
  CHECK(big.phases[0].pieces[0].size == 6);
  CHECK(big.phases[0].pieces[2].size == 8);
  CHECK(big.phases[0].pieces[0].curve.eval(0.0) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(big.phases[0].pert_amp == doctest::Approx(0.0005).epsilon(1e-14));

  PhasedSpec two = builtin_setting("grouping-2", 10);
  // curves cross but the sum stays 1 by construction
  const auto& p = two.phases[0].pieces;
  for (double t : {0.0, 0.3, 0.8}) {
    double sum = 3 * p[0].curve.eval(t) + 3 * p[1].curve.eval(t) + 4 * p[2].curve.eval(t);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(builtin_setting("grouping-1", 7), InvalidArgument);
  CHECK_THROWS_AS(builtin_setting("no-such-setting", 10), InvalidArgument);
}

TEST_CASE("builtin change settings pin the break layout") {
  PhasedSpec c1 = builtin_setting("change-1", 10);
  CHECK(c1.breaks == std::vector<double>{0.4, 0.7});
  REQUIRE(c1.phases.size() == 3);
  CHECK(c1.phase_of(0.39) == 0);
  CHECK(c1.phase_of(0.4) == 1);
  CHECK(c1.phase_of(0.69) == 1);
  CHECK(c1.phase_of(0.7) == 2);
  CHECK(c1.phases[1].group_of_item() == std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  CHECK(c1.phases[1].pieces[0].curve.eval(0.5) == doctest::Approx(0.15).epsilon(1e-12));
  // phases next to the middle one share the three-group layout
  CHECK(c1.phases[0].group_of_item() == c1.phases[2].group_of_item());

  PhasedSpec c2 = builtin_setting("change-2", 10);
  CHECK(c2.breaks == std::vector<double>{0.5});
  REQUIRE(c2.phases.size() == 2);
  CHECK(c2.phases[0].pieces.size() == 2);
  CHECK(c2.phases[1].pieces.size() == 3);
  CHECK(c2.phases[0].pieces[1].size == 8);
  CHECK(c2.phases[1].pieces[2].size == 6);

  CHECK_THROWS_AS(builtin_setting("change-1", 20), InvalidArgument);
}

TEST_CASE("true scores stay on the simplex, with renormalization where needed") {
  for (const char* name : {"grouping-1", "grouping-2", "change-1", "change-2"}) {
    PhasedSpec spec = builtin_setting(name, 10);
    SimulatedData sim = sample_dataset(spec, 3, 42);
    std::vector<double> times = {0.05, 0.45, 0.55, 0.72, 0.95};
    Eigen::MatrixXd scores = sim.true_scores(times);
    REQUIRE(scores.rows() == 5);
    REQUIRE(scores.cols() == 10);
    for (int k = 0; k < 5; ++k) {
      CHECK(scores.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(scores.row(k).minCoeff() > 0.0);
    }
  }

  // the second change setting needs a real renormalization after its break
  PhasedSpec c2 = builtin_setting("change-2", 10);
  SimulatedData sim = sample_dataset(c2, 1, 0);
  double t = 0.5;
  double raw0 = c2.phases[1].pieces[0].curve.eval(t);
  double raw1 = c2.phases[1].pieces[1].curve.eval(t);
  double raw2 = c2.phases[1].pieces[2].curve.eval(t);
  double rawsum = 2 * raw0 + 2 * raw1 + 6 * raw2;
  CHECK(rawsum > 1.2);  // renormalization is not a no-op here
  Eigen::MatrixXd scores = sim.true_scores({t});
  CHECK(scores(0, 0) == doctest::Approx(raw0 / rawsum).epsilon(1e-12));
  CHECK(scores(0, 2) == doctest::Approx(raw1 / rawsum).epsilon(1e-12));
  CHECK(scores(0, 9) == doctest::Approx(raw2 / rawsum).epsilon(1e-12));
}

TEST_CASE("group-level curves drop perturbations and tie group members exactly") {
  PhasedSpec spec = builtin_setting("grouping-1", 10);
  std::vector<double> times = {0.1, 0.6};
  Eigen::MatrixXd g = group_curve_scores(spec, times);
  REQUIRE(g.rows() == 2);
  REQUIRE(g.cols() == 10);
  for (int k = 0; k < 2; ++k) {
    CHECK(g.row(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
    // exact ties inside each 3:3:4 block
    CHECK(g(k, 0) == g(k, 1));
    CHECK(g(k, 1) == g(k, 2));
    CHECK(g(k, 3) == g(k, 5));
    CHECK(g(k, 6) == g(k, 9));
    CHECK(g(k, 0) > g(k, 3));
    CHECK(g(k, 3) > g(k, 6));
  }
  // matches the curve ratio directly
  double t = times[0];
  double c0 = spec.phases[0].pieces[0].curve.eval(t);
  double c1 = spec.phases[0].pieces[1].curve.eval(t);
  double c2 = spec.phases[0].pieces[2].curve.eval(t);
  CHECK(g(0, 0) ==
        doctest::Approx(c0 / (3 * c0 + 3 * c1 + 4 * c2)).epsilon(1e-12));

  // perturbed truth differs from the group curve but only by the tiny offsets
  SimulatedData sim = sample_dataset(spec, 1, 5);
  Eigen::MatrixXd p = sim.true_scores(times);
  CHECK((p - g).cwiseAbs().maxCoeff() > 0.0);
  CHECK((p - g).cwiseAbs().maxCoeff() < 3.0 * 0.01 / 10.0);

  // phases are honored: item 2 leaves item 3's group across the first break
  PhasedSpec ch = builtin_setting("change-1", 10);
  Eigen::MatrixXd gc = group_curve_scores(ch, {0.3, 0.5});
  CHECK(gc(0, 2) != gc(0, 3));  // 3:3:4 in phase I separates them
  CHECK(gc(1, 2) == gc(1, 3));  // 5:5 in phase II ties them
}

TEST_CASE("per-item perturbations are frozen and bounded") {
  PhasedSpec spec = builtin_setting("grouping-1", 10);
  SimulatedData sim = sample_dataset(spec, 2, 9);
  REQUIRE(sim.pert.size() == 10);
  CHECK(sim.pert.cwiseAbs().maxCoeff() <= 0.001);
  CHECK(sim.pert.cwiseAbs().maxCoeff() > 0.0);

  // same seed, same perturbations; different seed, different ones
  SimulatedData again = sample_dataset(spec, 2, 9);
  CHECK((again.pert - sim.pert).norm() == 0.0);
  SimulatedData other = sample_dataset(spec, 2, 10);
  CHECK((other.pert - sim.pert).norm() > 0.0);

  // within-group items get distinct scores once perturbed
  Eigen::MatrixXd scores = sim.true_scores({0.3});
  CHECK(scores(0, 0) != scores(0, 1));
  CHECK(std::abs(scores(0, 0) - scores(0, 1)) < 0.003);
}

TEST_CASE("sampled datasets are valid, sized and deterministic") {
  PhasedSpec spec = builtin_setting("grouping-1", 10);
  SimulatedData sim = sample_dataset(spec, 7, 3);
  CHECK(validate_dataset(sim.dataset).empty());
  CHECK(sim.dataset.n == 10);
  CHECK(sim.dataset.horizon == 1.0);
  CHECK(sim.dataset.records.size() == 90u * 7u);
  CHECK(sim.change_points.empty());

  PhasedSpec c1 = builtin_setting("change-1", 10);
  SimulatedData csim = sample_dataset(c1, 5, 3);
  CHECK(csim.dataset.records.size() == 3u * 90u * 5u);
  CHECK(csim.change_points == std::vector<double>{0.4, 0.7});
  // each record's time lies inside its phase
  int in_phase[3] = {0, 0, 0};
  for (const auto& rec : csim.dataset.records) ++in_phase[c1.phase_of(rec.time)];
  CHECK(in_phase[0] == 90 * 5);
  CHECK(in_phase[1] == 90 * 5);
  CHECK(in_phase[2] == 90 * 5);

  SimulatedData rerun = sample_dataset(c1, 5, 3);
  REQUIRE(rerun.dataset.records.size() == csim.dataset.records.size());
  bool identical = true;
  for (size_t i = 0; i < rerun.dataset.records.size(); ++i) {
    const auto& a = rerun.dataset.records[i];
    const auto& b = csim.dataset.records[i];
    if (a.item_i != b.item_i || a.item_j != b.item_j || a.time != b.time ||
        a.outcome != b.outcome)
      identical = false;
  }
  CHECK(identical);

  CHECK_THROWS_AS(sample_dataset(spec, 0, 1), InvalidArgument);
}

TEST_CASE("outcomes follow the score ratio in the long run") {
  TrajectorySpec tr;
  tr.n = 2;
  tr.pieces = {{1, CurveSpec{2.0 / 3, 0, 0, 0, 0, 0}}, {1, CurveSpec{1.0 / 3, 0, 0, 0, 0, 0}}};
  PhasedSpec spec;
  spec.n = 2;
  spec.horizon = 1.0;
  spec.phases = {tr};

  SimulatedData sim = sample_dataset(spec, 100000, 11);
  double wins_for_1 = 0.0;
  long long count = 0;
  for (const auto& rec : sim.dataset.records)
    if (rec.item_i == 0 && rec.item_j == 1) {
      wins_for_1 += rec.outcome;
      ++count;
    }
  REQUIRE(count == 100000);
  // outcome 1 backs item_j, whose share of the pair is 1/3
  CHECK(wins_for_1 / double(count) == doctest::Approx(1.0 / 3).epsilon(0.015));
}

TEST_CASE("true group labels follow the phase containing t") {
  PhasedSpec c1 = builtin_setting("change-1", 10);
  SimulatedData sim = sample_dataset(c1, 1, 2);
  CHECK(sim.true_group_of_item(0.2) ==
        std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 2});
  CHECK(sim.true_group_of_item(0.5) ==
        std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  CHECK(sim.true_group_of_item(0.9) ==
        std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2, 2});
}
