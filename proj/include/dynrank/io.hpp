#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dynrank/types.hpp"

namespace dynrank {

/// Reads `item_i,item_j,time,outcome` rows. Items may be arbitrary strings and
/// are mapped to 0-based ids in first-appearance order; outcome must parse as
/// exactly 0 or 1 and time as a finite decimal. '#' lines are skipped, except
/// that a `# horizon=...` comment (as written by write_comparison_csv) sets
/// the horizon when the argument is absent; the final fallback is the maximum
/// observed time. Malformed rows raise InvalidArgument naming the 1-based line.
ComparisonDataset read_comparison_csv(const std::string& path,
                                      std::optional<double> horizon = std::nullopt);

void write_comparison_csv(const std::string& path, const ComparisonDataset& ds,
                          const std::map<std::string, std::string>& provenance = {});

/// Trajectory table: `time,<label0>,<label1>,...` with one row per grid point.
/// Provenance keys are emitted as leading `# key=value` lines.
void write_trajectory_csv(const std::string& path, const ScoreTrajectory& trajectory,
                          const std::vector<std::string>& labels,
                          const std::map<std::string, std::string>& provenance = {});

ScoreTrajectory read_trajectory_csv(const std::string& path);

/// Serializes doubles with enough digits to round-trip exactly.
std::string format_double(double v);

}  // namespace dynrank
