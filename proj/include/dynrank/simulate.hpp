#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dynrank/types.hpp"

namespace dynrank {

/// Score curve base + sin_amp sin(sin_freq pi t) + atan_amp atan(pi t)
///               + pow_amp (t - pow_shift)^(1/10)  (power term only for t >= pow_shift).
struct CurveSpec {
  double base = 0.0;
  double sin_amp = 0.0;
  double sin_freq = 0.0;
  double atan_amp = 0.0;
  double pow_amp = 0.0;
  double pow_shift = 0.0;

  double eval(double t) const;
};

/// A block of `size` consecutive item ids sharing one curve.
struct GroupPiece {
  int size = 0;
  CurveSpec curve;
};

/// One regime: group structure and curves valid on a time interval.
/// Item scores are curve(t) + frozen per-item perturbation, renormalized to
/// sum to 1 at each time (the Bernoulli comparison rates are scale free).
struct TrajectorySpec {
  int n = 0;
  std::vector<GroupPiece> pieces;  // sizes sum to n
  double pert_amp = 0.0;           // per-item uniform offset on [-amp, amp]

  std::vector<int> group_of_item() const;
};

/// Piecewise regime spec on [0, horizon]: phases[p] holds on
/// [breaks[p-1], breaks[p]) with breaks augmented by 0 and horizon.
struct PhasedSpec {
  int n = 0;
  double horizon = 1.0;
  std::vector<double> breaks;          // interior change points, ascending
  std::vector<TrajectorySpec> phases;  // breaks.size() + 1 entries

  int phase_of(double t) const;
};

/// Named built-in settings. grouping-1 / grouping-2 are single-phase with
/// group ratio 3:3:4 on n items (n divisible by 10) and perturbation
/// amplitude 0.01/n; change-1 / change-2 are multi-phase on n = 10 items
/// (the n argument must be 10 for them).
PhasedSpec builtin_setting(const std::string& name, int n);

/// Dataset plus ground truth from one sampling run.
struct SimulatedData {
  ComparisonDataset dataset;
  PhasedSpec spec;
  Eigen::VectorXd pert;  // frozen per-item offsets
  std::vector<double> change_points;

  /// true (renormalized) scores at the given times, times.size() x n
  Eigen::MatrixXd true_scores(const std::vector<double>& times) const;
  /// group index per item id during the phase containing t
  std::vector<int> true_group_of_item(double t) const;
};

/// Samples M comparisons per ordered pair per phase: times uniform within the
/// phase, outcome Bernoulli(pi_j(t) / (pi_i(t) + pi_j(t))) (evidence for j).
/// Identical (spec, M, seed) give identical datasets on every platform.
SimulatedData sample_dataset(const PhasedSpec& spec, int M, std::uint64_t seed);

/// Group-level score trajectory: every item carries its group curve value
/// (no per-item perturbation), renormalized to unit sum per row. Items in one
/// group tie exactly, which is what rank metrics should compare grouped
/// estimators against.
Eigen::MatrixXd group_curve_scores(const PhasedSpec& spec,
                                   const std::vector<double>& times);

}  // namespace dynrank
