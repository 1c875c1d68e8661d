#include "dynrank/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dynrank/errors.hpp"

namespace dynrank {

double kendall_tau(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n) throw InvalidArgument("kendall_tau: size mismatch");
  if (n < 2) throw InvalidArgument("kendall_tau: need at least 2 items");
  long long concordant = 0, discordant = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double da = a(i) - a(j), db = b(i) - b(j);
      double s = da * db;
      if (s > 0.0)
        ++concordant;
      else if (s < 0.0)
        ++discordant;
    }
  return double(concordant - discordant) / (0.5 * n * (n - 1));
}

double mean_kendall_tau(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw InvalidArgument("mean_kendall_tau: shape mismatch");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < est.rows(); ++k)
    sum += kendall_tau(est.row(k).transpose(), truth.row(k).transpose());
  return sum / double(est.rows());
}

double kendall_tau_b(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n) throw InvalidArgument("kendall_tau_b: size mismatch");
  if (n < 2) throw InvalidArgument("kendall_tau_b: need at least 2 items");
  long long concordant = 0, discordant = 0, ties_a = 0, ties_b = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double da = a(i) - a(j), db = b(i) - b(j);
      if (da == 0.0) ++ties_a;
      if (db == 0.0) ++ties_b;
      double s = da * db;
      if (s > 0.0)
        ++concordant;
      else if (s < 0.0)
        ++discordant;
    }
  const long long total = (long long)n * (n - 1) / 2;
  if (ties_a == total || ties_b == total) return 0.0;
  return double(concordant - discordant) /
         std::sqrt(double(total - ties_a) * double(total - ties_b));
}

double mean_kendall_tau_b(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw InvalidArgument("mean_kendall_tau_b: shape mismatch");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < est.rows(); ++k)
    sum += kendall_tau_b(est.row(k).transpose(), truth.row(k).transpose());
  return sum / double(est.rows());
}

double trajectory_mse(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw InvalidArgument("trajectory_mse: shape mismatch");
  const double n = double(est.cols());
  return n * n * (est - truth).squaredNorm() / double(est.size());
}

double GroupingConfusion::sensitivity() const {
  return same_total == 0 ? 1.0 : double(same_correct) / double(same_total);
}

double GroupingConfusion::specificity() const {
  return diff_total == 0 ? 1.0 : double(diff_correct) / double(diff_total);
}

GroupingConfusion grouping_accuracy(const std::vector<int>& est_group_of_item,
                                    const std::vector<int>& true_group_of_item) {
  const int n = static_cast<int>(true_group_of_item.size());
  if (static_cast<int>(est_group_of_item.size()) != n)
    throw InvalidArgument("grouping_accuracy: size mismatch");
  GroupingConfusion out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool same_true = true_group_of_item[i] == true_group_of_item[j];
      bool same_est = est_group_of_item[i] == est_group_of_item[j];
      if (same_true) {
        ++out.same_total;
        if (same_est) ++out.same_correct;
      } else {
        ++out.diff_total;
        if (!same_est) ++out.diff_correct;
      }
    }
  return out;
}

double hausdorff(const std::vector<double>& a, const std::vector<double>& b, double V) {
  if (!(V > 0.0)) throw InvalidArgument("hausdorff: V must be positive");
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return V;
  auto directed = [](const std::vector<double>& from, const std::vector<double>& to) {
    double sup = 0.0;
    for (double x : from) {
      double d = std::numeric_limits<double>::infinity();
      for (double y : to) d = std::min(d, std::abs(x - y));
      sup = std::max(sup, d);
    }
    return sup;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace dynrank
