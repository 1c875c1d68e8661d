#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "dynrank/changepoint.hpp"
#include "dynrank/grouping.hpp"
#include "dynrank/simulate.hpp"

namespace dynrank {

/// Per-replicate metrics for the grouping settings, one column block per
/// method (fused estimate, grouped refit, static baseline, per-item KRC).
struct GroupingReplicate {
  double tau_ours = 0.0, tau_refit = 0.0, tau_static = 0.0, tau_krc = 0.0;
  double mse_ours = 0.0, mse_refit = 0.0, mse_static = 0.0, mse_krc = 0.0;
  double sens_ours = 1.0, spec_ours = 1.0;
  double sens_static = 1.0, spec_static = 1.0;
  int groups_ours = 0;
  int groups_static = 0;
};

struct GroupingStudyConfig {
  std::string setting = "grouping-1";
  int n = 20;
  int M = 100;
  double h = 0.05;
  int grid_m = 30;
  KernelFamily family = KernelFamily::epanechnikov;
  RecognizeOptions recognize;
};

GroupingReplicate run_grouping_replicate(const GroupingStudyConfig& cfg,
                                         std::uint64_t seed);

/// Per-replicate change-point metrics at fixed penalties.
struct ChangeReplicate {
  std::vector<double> change_points;
  double hdist = 0.0;
  int detected = 0;
  int true_count = 0;
};

struct ChangeStudyConfig {
  std::string setting = "change-1";
  int M = 500;  // per phase
  double h = 0.02;
  int candidate_count = 9;
  double gamma1 = 0.04;
  double gamma2 = 0.006;
  KernelFamily family = KernelFamily::epanechnikov;
  DetectOptions detect;
};

ChangeReplicate run_change_replicate(const ChangeStudyConfig& cfg, std::uint64_t seed);

struct SummaryStat {
  double mean = 0.0;
  double sd = 0.0;
};

/// One table shared across the penalty pairs, so segment fits are reused.
std::vector<ChangeReplicate> run_change_sweep(
    const ChangeStudyConfig& cfg, std::uint64_t seed,
    const std::vector<std::pair<double, double>>& gammas);

SummaryStat summarize(const std::vector<double>& values);

/// Runs fn(rep) for rep = 0..reps-1 on `jobs` worker threads; results are
/// collected by index so the output order is scheduling independent.
template <typename T>
std::vector<T> run_replicates(int reps, int jobs, const std::function<T(int)>& fn) {
  std::vector<T> out(reps);
  if (jobs <= 1) {
    for (int rep = 0; rep < reps; ++rep) out[rep] = fn(rep);
    return out;
  }
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int rep = next.fetch_add(1); rep < reps; rep = next.fetch_add(1))
      out[rep] = fn(rep);
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(jobs, reps); ++w) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
  return out;
}

}  // namespace dynrank
