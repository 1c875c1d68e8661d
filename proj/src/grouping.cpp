#include "dynrank/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dynrank/errors.hpp"

namespace dynrank {

Eigen::MatrixXd q_matrix(int n) {
  if (n < 2) throw InvalidArgument("q_matrix: need n >= 2");
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    Q(i, i) = 1.0;
    Q(i, i + 1) = -1.0;
  }
  Q.row(n - 1).setOnes();
  return Q;
}

Eigen::MatrixXd q_inverse(int n) {
  if (n < 2) throw InvalidArgument("q_inverse: need n >= 2");
  Eigen::MatrixXd Qinv(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + 1 < n; ++j)
      Qinv(i, j) = (i <= j ? 1.0 : 0.0) - double(j + 1) / n;
    Qinv(i, n - 1) = 1.0 / n;
  }
  return Qinv;
}

Eigen::MatrixXd theta_from_scores(const Eigen::MatrixXd& sorted_scores) {
  const int n = static_cast<int>(sorted_scores.cols());
  if (n < 2) throw InvalidArgument("theta_from_scores: need n >= 2");
  return sorted_scores.leftCols(n - 1) - sorted_scores.rightCols(n - 1);
}

Eigen::MatrixXd scores_from_theta(const Eigen::MatrixXd& theta) {
  const int m = static_cast<int>(theta.rows());
  const int n = static_cast<int>(theta.cols()) + 1;
  Eigen::MatrixXd scores(m, n);
  for (int k = 0; k < m; ++k) {
    // pi_i = sum_{j >= i} theta_j - (1/n) sum_j j theta_j + 1/n  (theta_n = 0)
    double weighted = 0.0;
    for (int j = 0; j + 1 < n; ++j) weighted += double(j + 1) * theta(k, j);
    double suffix = 0.0;
    scores(k, n - 1) = -weighted / n + 1.0 / n;
    for (int i = n - 2; i >= 0; --i) {
      suffix += theta(k, i);
      scores(k, i) = suffix - weighted / n + 1.0 / n;
    }
  }
  return scores;
}

std::vector<int> sort_items(const ScoreTrajectory& trajectory) {
  const int n = static_cast<int>(trajectory.scores.cols());
  std::vector<double> norm(n);
  for (int i = 0; i < n; ++i) norm[i] = trajectory.scores.col(i).norm();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int a, int b) { return norm[a] > norm[b]; });
  return perm;
}

namespace {

Eigen::MatrixXd permute_square(const Eigen::MatrixXd& P, const std::vector<int>& perm) {
  const int n = static_cast<int>(P.rows());
  Eigen::MatrixXd out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out(a, b) = P(perm[a], perm[b]);
  return out;
}

}  // namespace

FusedDesign assemble_design(const std::vector<TransitionMatrix>& transitions,
                            const TimeGrid& grid, const std::vector<int>& perm) {
  if (transitions.size() != grid.points.size())
    throw InvalidArgument("assemble_design: transitions do not match grid");
  if (transitions.empty()) throw InvalidArgument("assemble_design: empty grid");
  const int n = static_cast<int>(transitions[0].entries.rows());
  if (static_cast<int>(perm.size()) != n)
    throw InvalidArgument("assemble_design: perm size does not match items");

  FusedDesign design;
  design.grid = grid;
  design.perm = perm;
  design.n = n;
  const Eigen::MatrixXd Qinv = q_inverse(n);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  design.X.reserve(transitions.size());
  design.Y.reserve(transitions.size());
  for (const TransitionMatrix& tr : transitions) {
    Eigen::MatrixXd Ps = permute_square(tr.entries, perm);
    Eigen::MatrixXd Xfull = (Ps.transpose() - I) * Qinv;
    design.X.push_back(Xfull.leftCols(n - 1));
    design.Y.push_back((I - Ps.transpose()) * Eigen::VectorXd::Constant(n, 1.0 / n));
  }
  return design;
}

FusedDesign assemble_design(const ComparisonDataset& ds, const KernelSpec& spec,
                            const TimeGrid& grid, const std::vector<int>& perm) {
  PairIndex index(ds);
  std::vector<TransitionMatrix> transitions;
  transitions.reserve(grid.points.size());
  for (double t : grid.points) transitions.push_back(build_transition(index, spec, t));
  return assemble_design(transitions, grid, perm);
}

double design_rss(const FusedDesign& design, const Eigen::MatrixXd& theta) {
  double rss = 0.0;
  for (int k = 0; k < design.m(); ++k)
    rss += (design.Y[k] - design.X[k] * theta.row(k).transpose()).squaredNorm();
  return rss;
}

double lasso_objective(const FusedDesign& design, const Eigen::VectorXd& weights,
                       double lambda, const Eigen::MatrixXd& theta) {
  double penalty = 0.0;
  for (int i = 0; i < theta.cols(); ++i) penalty += weights(i) * theta.col(i).norm();
  return 0.5 * design_rss(design, theta) + lambda * penalty;
}

namespace {

/// Precomputed per-time Gram pieces: the smooth part of the objective is
/// 1/2 sum_k (theta_k' G_k theta_k - 2 c_k' theta_k) + yty/2.
struct LassoWorkspace {
  const FusedDesign& design;
  std::vector<Eigen::MatrixXd> G;
  std::vector<Eigen::VectorXd> c;
  double yty = 0.0;
  double lips = 0.0;
  int m = 0;
  int p = 0;  // blocks = n - 1

  explicit LassoWorkspace(const FusedDesign& d) : design(d), m(d.m()), p(d.n - 1) {
    G.reserve(m);
    c.reserve(m);
    for (int k = 0; k < m; ++k) {
      G.push_back(d.X[k].transpose() * d.X[k]);
      c.push_back(d.X[k].transpose() * d.Y[k]);
      yty += d.Y[k].squaredNorm();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G.back(),
                                                        Eigen::EigenvaluesOnly);
      lips = std::max(lips, es.eigenvalues().maxCoeff());
    }
    if (!(lips > 0.0)) lips = 1.0;
  }

  double smooth_value(const Eigen::MatrixXd& theta) const {
    double v = yty;
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd tk = theta.row(k).transpose();
      v += tk.dot(G[k] * tk) - 2.0 * c[k].dot(tk);
    }
    return 0.5 * v;
  }

  double objective(const Eigen::MatrixXd& theta, const Eigen::VectorXd& w,
                   double lambda) const {
    double pen = 0.0;
    for (int i = 0; i < p; ++i) pen += w(i) * theta.col(i).norm();
    return smooth_value(theta) + lambda * pen;
  }

  /// rows k of the returned matrix hold G_k theta_k - c_k
  Eigen::MatrixXd smooth_gradient(const Eigen::MatrixXd& theta) const {
    Eigen::MatrixXd grad(m, p);
    for (int k = 0; k < m; ++k)
      grad.row(k) = (G[k] * theta.row(k).transpose() - c[k]).transpose();
    return grad;
  }

  Eigen::MatrixXd prox(const Eigen::MatrixXd& point, const Eigen::VectorXd& w,
                       double lambda) const {
    Eigen::MatrixXd out = point;
    for (int i = 0; i < p; ++i) {
      double s = out.col(i).norm();
      double cut = lambda * w(i) / lips;
      if (s <= cut)
        out.col(i).setZero();
      else
        out.col(i) *= 1.0 - cut / s;
    }
    return out;
  }

  /// max over blocks of the KKT violation at theta
  double kkt_gap(const Eigen::MatrixXd& theta, const Eigen::VectorXd& w,
                 double lambda) const {
    Eigen::MatrixXd R = -smooth_gradient(theta);  // block gradients of the fit term
    double gap = 0.0;
    for (int i = 0; i < p; ++i) {
      double s = theta.col(i).norm();
      if (s > 0.0)
        gap = std::max(gap, (R.col(i) - lambda * w(i) / s * theta.col(i)).norm());
      else
        gap = std::max(gap, std::max(0.0, R.col(i).norm() - lambda * w(i)));
    }
    return gap;
  }

  LassoFit solve(const Eigen::VectorXd& w, double lambda, double tol, int max_iter,
                 const Eigen::MatrixXd* warm) const {
    LassoFit fit;
    Eigen::MatrixXd theta =
        warm != nullptr ? *warm : Eigen::MatrixXd::Zero(m, p);
    double obj = objective(theta, w, lambda);
    fit.objective_trace.push_back(obj);
    Eigen::MatrixXd acc = theta;
    double tf = 1.0;
    double gap = kkt_gap(theta, w, lambda);
    int it = 0;
    while (gap > tol && it < max_iter) {
      ++it;
      Eigen::MatrixXd cand = prox(acc - smooth_gradient(acc) / lips, w, lambda);
      double cand_obj = objective(cand, w, lambda);
      if (cand_obj > obj) {
        // accelerated step overshot: plain proximal step is non-increasing
        // in exact arithmetic, so only a material increase means we are stuck
        cand = prox(theta - smooth_gradient(theta) / lips, w, lambda);
        cand_obj = objective(cand, w, lambda);
        tf = 1.0;
        if (cand_obj > obj + 1e-14 * (1.0 + std::abs(obj))) {
          gap = kkt_gap(theta, w, lambda);
          break;
        }
        cand_obj = std::min(cand_obj, obj);  // clamp rounding noise
      }
      double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tf * tf));
      acc = cand + ((tf - 1.0) / tn) * (cand - theta);
      tf = tn;
      theta = cand;
      obj = cand_obj;
      fit.objective_trace.push_back(obj);
      if (it % 10 == 0) gap = kkt_gap(theta, w, lambda);
    }
    if (gap > tol) gap = kkt_gap(theta, w, lambda);
    if (gap > tol)
      throw ConvergenceError("adaptive_group_lasso: KKT gap " + std::to_string(gap) +
                                 " above tolerance " + std::to_string(tol),
                             gap);
    fit.theta = theta;
    fit.objective = obj;
    fit.kkt_gap = gap;
    fit.iterations = it;
    return fit;
  }
};

std::vector<int> support_of(const Eigen::MatrixXd& theta, double epsilon) {
  std::vector<int> sup;
  const double inv_sqrt_m = 1.0 / std::sqrt(double(theta.rows()));
  for (int i = 0; i < theta.cols(); ++i)
    if (theta.col(i).norm() * inv_sqrt_m > epsilon) sup.push_back(i);
  return sup;
}

}  // namespace

LassoFit adaptive_group_lasso(const FusedDesign& design, const Eigen::VectorXd& weights,
                              double lambda, double tol, int max_iter,
                              const Eigen::MatrixXd* warm_start) {
  if (weights.size() != design.n - 1)
    throw InvalidArgument("adaptive_group_lasso: weights must have n - 1 entries");
  if ((weights.array() <= 0.0).any())
    throw InvalidArgument("adaptive_group_lasso: weights must be positive");
  if (lambda < 0.0) throw InvalidArgument("adaptive_group_lasso: lambda must be >= 0");
  return LassoWorkspace(design).solve(weights, lambda, tol, max_iter, warm_start);
}

std::vector<double> default_lambda_grid(const FusedDesign& design,
                                        const Eigen::VectorXd& weights, int count,
                                        double min_ratio) {
  if (count < 1) throw InvalidArgument("default_lambda_grid: count must be >= 1");
  const int p = design.n - 1;
  Eigen::MatrixXd stacked(design.m(), p);
  for (int k = 0; k < design.m(); ++k)
    stacked.row(k) = (design.X[k].transpose() * design.Y[k]).transpose();
  double lambda_max = 0.0;
  for (int i = 0; i < p; ++i)
    lambda_max = std::max(lambda_max, stacked.col(i).norm() / weights(i));
  if (!(lambda_max > 0.0)) return {0.0};
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double lmin = std::log(lambda_max * min_ratio);
  const double lmax = std::log(lambda_max);
  for (int k = 0; k < count; ++k)
    grid[k] = std::exp(lmax + (lmin - lmax) * k / (count - 1));
  return grid;
}

double ebic(const FusedDesign& design, const Eigen::MatrixXd& theta,
            const std::vector<double>& tilde_norms, double c0) {
  const int m = design.m();
  const int n = design.n;
  if (theta.rows() != m || theta.cols() != n - 1)
    throw InvalidArgument("ebic: theta shape does not match design");
  if (static_cast<int>(tilde_norms.size()) != n - 1)
    throw InvalidArgument("ebic: tilde_norms must have n - 1 entries");

  const double nm = double(n) * m;
  double rss = design_rss(design, theta);

  double mean = 0.0;
  for (int k = 0; k < m; ++k) mean += design.Y[k].sum();
  mean /= nm;
  double var = 0.0;
  for (int k = 0; k < m; ++k) var += (design.Y[k].array() - mean).square().sum();
  var /= nm;

  const double inv_sqrt_m = 1.0 / std::sqrt(double(m));
  double df = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    double norm_i = theta.col(i).norm() * inv_sqrt_m;
    if (norm_i > 0.0) {
      df += 1.0;
      if (tilde_norms[i] > 0.0) df += norm_i / tilde_norms[i] * (m - 1);
    }
  }
  return nm * std::log(rss / nm + c0 * var) + std::log(nm) * std::floor(df);
}

GroupRecognition recognize_groups(const ComparisonDataset& ds, const KernelSpec& spec,
                                  const TimeGrid& grid, const RecognizeOptions& opts) {
  if (ds.n < 2) throw InvalidArgument("recognize_groups: need at least 2 items");
  const int n = ds.n;
  const int m = grid.size();

  PairIndex index(ds);
  std::vector<TransitionMatrix> transitions;
  transitions.reserve(m);
  for (double t : grid.points) transitions.push_back(build_transition(index, spec, t));

  GroupRecognition out;
  out.krc.grid = grid;
  out.krc.scores.resize(m, n);
  for (int k = 0; k < m; ++k) {
    StationaryResult st;
    try {
      st = stationary_distribution(transitions[k].entries, opts.stat_tol,
                                   opts.stat_max_iter);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError("recognize_groups: stationary distribution failed at t = " +
                                 std::to_string(grid.points[k]),
                             err.residual());
    }
    out.irreducible_warning = out.irreducible_warning || st.irreducible_warning;
    out.krc.scores.row(k) = st.dist.transpose();
  }

  // Ordering pilot: pool every record under an effectively flat kernel and
  // sort by the pooled stationary scores. The fused penalty only needs group
  // members adjacent after sorting, and pooled scores order items far more
  // stably than the per-time pilot when neighbouring trajectory norms nearly
  // tie. Weights and the design below still use the per-time pilot.
  double t_lo = grid.points.front(), t_hi = grid.points.back();
  for (const ComparisonRecord& r : ds.records) {
    t_lo = std::min(t_lo, r.time);
    t_hi = std::max(t_hi, r.time);
  }
  const KernelSpec flat{spec.family, 1e6 * (t_hi - t_lo + 1.0)};
  TransitionMatrix pooled_tr = build_transition(index, flat, 0.5 * (t_lo + t_hi));
  StationaryResult pooled_st;
  try {
    pooled_st = stationary_distribution(pooled_tr.entries, opts.stat_tol,
                                        opts.stat_max_iter);
  } catch (const ConvergenceError& err) {
    throw ConvergenceError("recognize_groups: pooled ordering pilot failed",
                           err.residual());
  }
  out.irreducible_warning = out.irreducible_warning || pooled_st.irreducible_warning;
  ScoreTrajectory pooled;
  pooled.grid.a = grid.a;
  pooled.grid.b = grid.b;
  pooled.grid.points = {0.5 * (t_lo + t_hi)};
  pooled.scores = pooled_st.dist.transpose();

  std::vector<int> perm = sort_items(pooled);
  Eigen::MatrixXd sorted(m, n);
  for (int a = 0; a < n; ++a) sorted.col(a) = out.krc.scores.col(perm[a]);

  Eigen::MatrixXd theta_tilde = theta_from_scores(sorted);
  const double inv_sqrt_m = 1.0 / std::sqrt(double(m));
  std::vector<double> tilde_norms(n - 1);
  Eigen::VectorXd weights(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    tilde_norms[i] = theta_tilde.col(i).norm() * inv_sqrt_m;
    weights(i) = 1.0 / std::max(tilde_norms[i], 1.0 / opts.weight_cap);
  }

  FusedDesign design = assemble_design(transitions, grid, perm);
  std::vector<double> lambdas =
      opts.fixed_lambda > 0.0
          ? std::vector<double>{opts.fixed_lambda}
          : default_lambda_grid(design, weights, opts.lambda_count,
                                opts.lambda_min_ratio);

  LassoWorkspace work(design);
  out.path.weights = weights;
  out.path.tilde_norms = tilde_norms;
  out.path.fits.reserve(lambdas.size());
  Eigen::MatrixXd warm = Eigen::MatrixXd::Zero(m, n - 1);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    LassoFit fit = work.solve(weights, lambdas[k], opts.lasso_tol, opts.lasso_max_iter,
                              k == 0 ? nullptr : &warm);
    warm = fit.theta;
    ThetaFit tf;
    tf.lambda = lambdas[k];
    tf.theta = fit.theta;
    tf.objective = fit.objective;
    tf.ebic = ebic(design, fit.theta, tilde_norms, opts.c0);
    tf.support = support_of(fit.theta, opts.epsilon);
    if (tf.ebic < best) {
      best = tf.ebic;
      out.path.selected = static_cast<int>(k);
    }
    out.path.fits.push_back(std::move(tf));
  }

  const ThetaFit& sel = out.path.fits[out.path.selected];
  out.partition.perm = perm;
  out.partition.boundaries.push_back(0);
  for (int i : sel.support) out.partition.boundaries.push_back(i + 1);
  out.partition.boundaries.push_back(n);

  Eigen::MatrixXd fused_sorted = scores_from_theta(sel.theta);
  out.fused_scores.grid = grid;
  out.fused_scores.scores.resize(m, n);
  for (int a = 0; a < n; ++a) out.fused_scores.scores.col(perm[a]) = fused_sorted.col(a);
  return out;
}

GroupedScores refit(const PairIndex& index, const KernelSpec& spec, const TimeGrid& grid,
                    const GroupPartition& partition, double stat_tol, int stat_max_iter) {
  auto problems = partition.validate();
  if (!problems.empty()) throw InvalidArgument("refit: " + problems.front());
  const int n = partition.n_items();
  if (index.n() != n) throw InvalidArgument("refit: partition does not match dataset");
  const int B = partition.group_count();
  const int m = grid.size();
  const std::vector<int> g_of = partition.group_of_item();
  const std::vector<int> sizes = partition.group_sizes();

  GroupedScores out;
  out.grid = grid;
  out.partition = partition;
  out.group_scores.resize(m, B);
  out.item_scores.grid = grid;
  out.item_scores.scores.resize(m, n);

  Eigen::MatrixXd sw(B, B), swy(B, B);
  for (int k = 0; k < m; ++k) {
    const double t = grid.points[k];
    sw.setZero();
    swy.setZero();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j || g_of[i] == g_of[j]) continue;
        auto [w, wy] = index.series(i, j).kernel_sums(spec, t);
        sw(g_of[i], g_of[j]) += w;
        swy(g_of[i], g_of[j]) += wy;
      }
    }
    Eigen::MatrixXd Pg = Eigen::MatrixXd::Zero(B, B);
    for (int a = 0; a < B; ++a) {
      double off = 0.0;
      for (int b = 0; b < B; ++b) {
        if (a == b || sw(a, b) <= 0.0) continue;
        double p = swy(a, b) / sw(a, b) / B;
        Pg(a, b) = p;
        off += p;
      }
      Pg(a, a) = 1.0 - off;
    }
    StationaryResult st;
    try {
      st = stationary_distribution(Pg, stat_tol, stat_max_iter);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError(
          "refit: stationary distribution failed at t = " + std::to_string(t),
          err.residual());
    }
    out.group_scores.row(k) = st.dist.transpose();
    double denom = 0.0;
    for (int b = 0; b < B; ++b) denom += sizes[b] * st.dist(b);
    for (int i = 0; i < n; ++i) out.item_scores.scores(k, i) = st.dist(g_of[i]) / denom;
  }
  return out;
}

GroupedScores refit(const ComparisonDataset& ds, const KernelSpec& spec,
                    const TimeGrid& grid, const GroupPartition& partition,
                    double stat_tol, int stat_max_iter) {
  PairIndex index(ds);
  return refit(index, spec, grid, partition, stat_tol, stat_max_iter);
}

}  // namespace dynrank
