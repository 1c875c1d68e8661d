#include "dynrank/spectral.hpp"

#include <cmath>
#include <vector>

#include "dynrank/errors.hpp"

namespace dynrank {

namespace {

TransitionMatrix transition_from_index(const PairIndex& index, const KernelSpec& spec,
                                       double t) {
  const int n = index.n();
  TransitionMatrix out;
  out.t = t;
  out.entries = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      auto [sw, swy] = index.series(i, j).kernel_sums(spec, t);
      if (sw <= 0.0) {
        ++out.zero_mass_pairs;
        continue;
      }
      double p = swy / sw / n;
      out.entries(i, j) = p;
      off += p;
    }
    out.entries(i, i) = 1.0 - off;
  }
  return out;
}

/// strong connectivity of the positive off-diagonal support graph
bool support_strongly_connected(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  if (n <= 1) return true;
  auto reach = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (v == u || seen[v]) continue;
        double w = transpose ? P(v, u) : P(u, v);
        if (w > 0.0) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reach(false) && reach(true);
}

}  // namespace

TransitionMatrix build_transition(const PairIndex& index, const KernelSpec& spec,
                                  double t) {
  return transition_from_index(index, spec, t);
}

TransitionMatrix build_transition(const ComparisonDataset& ds, const KernelSpec& spec,
                                  double t) {
  if (ds.n < 2) throw InvalidArgument("build_transition: need at least 2 items");
  return transition_from_index(PairIndex(ds), spec, t);
}

TransitionMatrix ideal_transition(const Eigen::VectorXd& pi, double t) {
  const int n = static_cast<int>(pi.size());
  if (n < 2) throw InvalidArgument("ideal_transition: need at least 2 items");
  if ((pi.array() <= 0.0).any())
    throw InvalidArgument("ideal_transition: scores must be positive");
  TransitionMatrix out;
  out.t = t;
  out.entries.resize(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double p = pi(j) / (pi(i) + pi(j)) / n;
      out.entries(i, j) = p;
      off += p;
    }
    out.entries(i, i) = 1.0 - off;
  }
  return out;
}

StationaryResult stationary_distribution(const Eigen::MatrixXd& P, double tol,
                                         int max_iter) {
  const int n = static_cast<int>(P.rows());
  if (n < 1 || P.cols() != n) throw InvalidArgument("stationary_distribution: square matrix required");
  for (int i = 0; i < n; ++i) {
    double s = P.row(i).sum();
    if (std::abs(s - 1.0) > 1e-9)
      throw InvalidArgument("stationary_distribution: row " + std::to_string(i) +
                            " does not sum to 1");
  }

  StationaryResult res;
  res.irreducible_warning = !support_strongly_connected(P);

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  const Eigen::MatrixXd Pt = P.transpose();
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd next = Pt * v;
    double s = next.sum();
    if (s != 0.0) next /= s;
    res.iterations = it;
    double residual = (Pt * next - next).norm();
    if (residual <= tol) {
      res.dist = next;
      res.residual = residual;
      return res;
    }
    v = next;
  }

  // Power iteration stalled (slow mixing or periodic structure); solve the
  // singular system (P' - I) v = 0 with the normalization row appended.
  Eigen::MatrixXd A(n + 1, n);
  A.topRows(n) = Pt - Eigen::MatrixXd::Identity(n, n);
  A.bottomRows(1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b(n) = 1.0;
  Eigen::VectorXd w = A.colPivHouseholderQr().solve(b);
  double s = w.sum();
  if (s != 0.0) w /= s;
  double residual = (Pt * w - w).norm();
  if (residual <= tol * 10.0 && (w.array() >= -tol).all()) {
    res.dist = w.cwiseMax(0.0);
    double ws = res.dist.sum();
    if (ws > 0.0) res.dist /= ws;
    res.residual = (Pt * res.dist - res.dist).norm();
    res.used_fallback = true;
    return res;
  }
  throw ConvergenceError("stationary_distribution: residual " + std::to_string(residual) +
                             " above tolerance after fallback",
                         residual);
}

KrcResult krc_estimate(const ComparisonDataset& ds, const KernelSpec& spec,
                       const TimeGrid& grid, double tol, int max_iter) {
  PairIndex index(ds);
  KrcResult out;
  const int m = grid.size();
  out.trajectory.grid = grid;
  out.trajectory.scores.resize(m, ds.n);
  out.zero_mass_pairs.resize(m);
  for (int k = 0; k < m; ++k) {
    TransitionMatrix P = build_transition(index, spec, grid.points[k]);
    out.zero_mass_pairs[k] = P.zero_mass_pairs;
    StationaryResult st;
    try {
      st = stationary_distribution(P.entries, tol, max_iter);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError(
          "krc_estimate: stationary distribution failed at t = " +
              std::to_string(grid.points[k]) + " (" + err.what() + ")",
          err.residual());
    }
    out.irreducible_warning = out.irreducible_warning || st.irreducible_warning;
    out.trajectory.scores.row(k) = st.dist.transpose();
  }
  return out;
}

}  // namespace dynrank
