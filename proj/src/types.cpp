#include "dynrank/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dynrank/errors.hpp"

namespace dynrank {

std::vector<std::string> validate_dataset(const ComparisonDataset& ds) {
  std::vector<std::string> out;
  if (ds.n < 2) out.push_back("item count must be at least 2, got " + std::to_string(ds.n));
  if (!(ds.horizon > 0.0) || !std::isfinite(ds.horizon))
    out.push_back("horizon must be positive and finite");
  if (!ds.labels.empty() && static_cast<int>(ds.labels.size()) != ds.n)
    out.push_back("labels size " + std::to_string(ds.labels.size()) +
                  " does not match item count " + std::to_string(ds.n));
  for (std::size_t r = 0; r < ds.records.size(); ++r) {
    const ComparisonRecord& rec = ds.records[r];
    std::ostringstream where;
    where << "record " << r << ": ";
    if (rec.item_i < 0 || rec.item_i >= ds.n || rec.item_j < 0 || rec.item_j >= ds.n)
      out.push_back(where.str() + "item id out of range [0, " + std::to_string(ds.n) + ")");
    else if (rec.item_i == rec.item_j)
      out.push_back(where.str() + "self comparison");
    if (!std::isfinite(rec.time) || rec.time < 0.0 || rec.time > ds.horizon) {
      std::ostringstream msg;
      msg << where.str() << "time " << rec.time << " outside [0, " << ds.horizon << "]";
      out.push_back(msg.str());
    }
    if (rec.outcome != 0 && rec.outcome != 1)
      out.push_back(where.str() + "outcome must be 0 or 1, got " + std::to_string(rec.outcome));
  }
  return out;
}

TimeGrid make_grid(double a, double b, int m) {
  if (!(a < b)) throw InvalidArgument("make_grid: requires a < b");
  if (m < 1) throw InvalidArgument("make_grid: requires m >= 1");
  TimeGrid grid;
  grid.a = a;
  grid.b = b;
  grid.points.resize(m);
  const double step = (b - a) / m;
  for (int k = 0; k < m; ++k) grid.points[k] = a + (k + 0.5) * step;
  return grid;
}

int nearest_grid_index(const TimeGrid& grid, double t) {
  if (grid.points.empty()) throw InvalidArgument("nearest_grid_index: empty grid");
  auto it = std::lower_bound(grid.points.begin(), grid.points.end(), t);
  if (it == grid.points.begin()) return 0;
  if (it == grid.points.end()) return grid.size() - 1;
  int hi = static_cast<int>(it - grid.points.begin());
  return (t - grid.points[hi - 1] <= grid.points[hi] - t) ? hi - 1 : hi;
}

std::vector<std::string> ScoreTrajectory::validate(double row_sum_tol) const {
  std::vector<std::string> out;
  if (scores.rows() != static_cast<Eigen::Index>(grid.points.size()))
    out.push_back("row count " + std::to_string(scores.rows()) +
                  " does not match grid size " + std::to_string(grid.points.size()));
  for (Eigen::Index k = 0; k < scores.rows(); ++k) {
    if ((scores.row(k).array() <= 0.0).any())
      out.push_back("non-positive score at grid point " + std::to_string(k));
    double s = scores.row(k).sum();
    if (std::abs(s - 1.0) > row_sum_tol) {
      std::ostringstream msg;
      msg << "row " << k << " sums to " << s << " (tolerance " << row_sum_tol << ")";
      out.push_back(msg.str());
    }
  }
  return out;
}

int GroupPartition::group_of_position(int pos) const {
  for (int k = 0; k + 1 < static_cast<int>(boundaries.size()); ++k)
    if (pos >= boundaries[k] && pos < boundaries[k + 1]) return k;
  throw InvalidArgument("group_of_position: position " + std::to_string(pos) +
                        " outside partition");
}

std::vector<int> GroupPartition::group_of_item() const {
  std::vector<int> out(n_items(), -1);
  for (int k = 0; k + 1 < static_cast<int>(boundaries.size()); ++k)
    for (int pos = boundaries[k]; pos < boundaries[k + 1]; ++pos)
      out[perm[pos]] = k;
  return out;
}

std::vector<int> GroupPartition::group_sizes() const {
  std::vector<int> out;
  for (int k = 0; k + 1 < static_cast<int>(boundaries.size()); ++k)
    out.push_back(boundaries[k + 1] - boundaries[k]);
  return out;
}

std::vector<std::string> GroupPartition::validate() const {
  std::vector<std::string> out;
  if (boundaries.size() < 2 || boundaries.front() != 0)
    out.push_back("boundaries must start at 0 and contain at least one group");
  for (std::size_t k = 0; k + 1 < boundaries.size(); ++k)
    if (boundaries[k] >= boundaries[k + 1]) out.push_back("boundaries must strictly increase");
  if (!boundaries.empty() && static_cast<int>(perm.size()) != boundaries.back())
    out.push_back("perm size does not match item count");
  std::vector<int> seen(perm.size(), 0);
  for (int p : perm) {
    if (p < 0 || p >= static_cast<int>(perm.size())) {
      out.push_back("perm entry out of range");
      return out;
    }
    ++seen[p];
  }
  for (int c : seen)
    if (c != 1) {
      out.push_back("perm is not a permutation");
      break;
    }
  return out;
}

}  // namespace dynrank
