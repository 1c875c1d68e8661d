#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "dynrank/errors.hpp"
#include "dynrank/io.hpp"
#include "dynrank/simulate.hpp"

using namespace dynrank;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/dynrank_io_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
  void fill(const std::string& text) {
    std::ofstream out(path);
    out << text;
  }
};

}  // namespace

TEST_CASE("comparison csv round trip preserves records and labels") {
  PhasedSpec spec = builtin_setting("grouping-1", 10);
  SimulatedData sim = sample_dataset(spec, 3, 21);

  TempFile file("roundtrip.csv");
  write_comparison_csv(file.path, sim.dataset, {{"seed", "21"}});
  ComparisonDataset back = read_comparison_csv(file.path);

  CHECK(back.n == sim.dataset.n);
  CHECK(back.horizon == sim.dataset.horizon);
  REQUIRE(back.records.size() == sim.dataset.records.size());
  for (size_t k = 0; k < back.records.size(); ++k) {
    CHECK(back.records[k].item_i == sim.dataset.records[k].item_i);
    CHECK(back.records[k].item_j == sim.dataset.records[k].item_j);
    CHECK(back.records[k].time == sim.dataset.records[k].time);
    CHECK(back.records[k].outcome == sim.dataset.records[k].outcome);
  }
}

TEST_CASE("reader interns string labels in first-appearance order") {
  TempFile file("labels.csv");
  file.fill(
      "item_i,item_j,time,outcome\n"
      "alpha,beta,0.25,1\n"
      "# a comment to skip\n"
      "gamma,alpha,0.5,0\n"
      "beta,gamma,0.75,1\n");
  ComparisonDataset ds = read_comparison_csv(file.path);
  CHECK(ds.n == 3);
  REQUIRE(ds.labels.size() == 3);
  CHECK(ds.labels[0] == "alpha");
  CHECK(ds.labels[1] == "beta");
  CHECK(ds.labels[2] == "gamma");
  REQUIRE(ds.records.size() == 3);
  CHECK(ds.records[1].item_i == 2);
  CHECK(ds.records[1].item_j == 0);
  CHECK(ds.horizon == 0.75);  // defaults to the last observed time

  ComparisonDataset stretched = read_comparison_csv(file.path, 2.0);
  CHECK(stretched.horizon == 2.0);
}

TEST_CASE("reader names the offending line") {
  TempFile file("bad_outcome.csv");
  file.fill(
      "item_i,item_j,time,outcome\n"
      "a,b,0.5,1\n"
      "a,b,0.6,2\n");
  CHECK_THROWS_WITH_AS(read_comparison_csv(file.path),
                       doctest::Contains("line 3"), InvalidArgument);

  TempFile self("self_pair.csv");
  self.fill(
      "item_i,item_j,time,outcome\n"
      "a,a,0.5,1\n");
  CHECK_THROWS_WITH_AS(read_comparison_csv(self.path),
                       doctest::Contains("line 2"), InvalidArgument);

  TempFile time_bad("bad_time.csv");
  time_bad.fill(
      "item_i,item_j,time,outcome\n"
      "a,b,soon,1\n");
  CHECK_THROWS_WITH_AS(read_comparison_csv(time_bad.path),
                       doctest::Contains("line 2"), InvalidArgument);

  TempFile header_bad("bad_header.csv");
  header_bad.fill("foo,bar\n");
  CHECK_THROWS_AS(read_comparison_csv(header_bad.path), InvalidArgument);

  CHECK_THROWS_AS(read_comparison_csv("/tmp/dynrank_io_does_not_exist.csv"),
                  InvalidArgument);
}

TEST_CASE("trajectory csv round trip is exact") {
  ScoreTrajectory traj;
  traj.grid = make_grid(0.0, 1.0, 4);
  traj.scores.resize(4, 3);
  traj.scores << 0.5, 0.3, 0.2, 0.4, 0.35, 0.25, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.6, 0.25,
      0.15;

  TempFile file("trajectory.csv");
  write_trajectory_csv(file.path, traj, {"a", "b", "c"}, {{"kernel", "epanechnikov"}});
  ScoreTrajectory back = read_trajectory_csv(file.path);

  REQUIRE(back.scores.rows() == 4);
  REQUIRE(back.scores.cols() == 3);
  CHECK((back.scores - traj.scores).cwiseAbs().maxCoeff() == 0.0);
  for (size_t k = 0; k < traj.grid.points.size(); ++k)
    CHECK(back.grid.points[k] == traj.grid.points[k]);

  // provenance lines survive as comments the comparison reader would skip
  std::ifstream in(file.path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# kernel=epanechnikov");
}

TEST_CASE("trajectory writer validates label count") {
  ScoreTrajectory traj;
  traj.grid = make_grid(0.0, 1.0, 1);
  traj.scores.resize(1, 2);
  traj.scores << 0.5, 0.5;
  TempFile file("labels_bad.csv");
  CHECK_THROWS_AS(write_trajectory_csv(file.path, traj, {"only-one"}), InvalidArgument);
}

TEST_CASE("doubles survive the text format bit for bit") {
  for (double v : {0.1, 1.0 / 3, 2.0 / 7, 1e-17, 123456.789012345678, 0.0}) {
    std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
