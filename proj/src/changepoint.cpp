#include "dynrank/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dynrank/errors.hpp"
#include "dynrank/rng.hpp"

namespace dynrank {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

/// records with a <= time < b (closed at b when b reaches the horizon, so the
/// final segment keeps boundary records)
ComparisonDataset restrict_records(const ComparisonDataset& ds, double a, double b) {
  ComparisonDataset out;
  out.n = ds.n;
  out.horizon = ds.horizon;
  out.labels = ds.labels;
  const bool closed = b >= ds.horizon;
  for (const ComparisonRecord& rec : ds.records)
    if (rec.time >= a && (closed ? rec.time <= b : rec.time < b))
      out.records.push_back(rec);
  return out;
}

/// canonical group labels (first occurrence order) for set-partition equality
std::vector<int> canonical_labels(const GroupPartition& partition) {
  std::vector<int> raw = partition.group_of_item();
  std::vector<int> relabel(partition.group_count(), -1);
  int next = 0;
  for (int& g : raw) {
    if (relabel[g] < 0) relabel[g] = next++;
    g = relabel[g];
  }
  return raw;
}

}  // namespace

double CandidateSet::edge(int u) const {
  if (u == 0) return 0.0;
  if (u == U() + 1) return V;
  if (u < 0 || u > U() + 1) throw InvalidArgument("CandidateSet: edge index out of range");
  return xi[u - 1];
}

CandidateSet uniform_candidates(int count, double V) {
  if (count < 0) throw InvalidArgument("uniform_candidates: count must be >= 0");
  if (!(V > 0.0)) throw InvalidArgument("uniform_candidates: V must be positive");
  CandidateSet out;
  out.V = V;
  for (int k = 1; k <= count; ++k) out.xi.push_back(V * k / (count + 1));
  return out;
}

Eigen::MatrixXd smoothed_fraction_matrix(const ComparisonDataset& ds,
                                         const KernelSpec& spec, double t, double a,
                                         double b) {
  ComparisonDataset local = restrict_records(ds, a, b);
  PairIndex index(local);
  const int n = ds.n;
  Eigen::MatrixXd ybar =
      Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto frac = smoothed_win_fraction(index, spec, i, j, t);
      if (frac) ybar(i, j) = *frac;
    }
  return ybar;
}

double neg_log_likelihood(const Eigen::VectorXd& scores, const Eigen::MatrixXd& ybar) {
  const int n = static_cast<int>(scores.size());
  if (ybar.rows() != n || ybar.cols() != n)
    throw InvalidArgument("neg_log_likelihood: ybar must be n x n");
  if ((scores.array() <= 0.0).any())
    throw InvalidArgument("neg_log_likelihood: scores must be positive");
  double sum = 0.0;
  long long defined = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || std::isnan(ybar(i, j))) continue;
      ++defined;
      sum += ybar(i, j) * std::log(scores(j) / (scores(i) + scores(j)));
    }
  if (defined == 0) return 0.0;
  return -2.0 * sum / double(defined);
}

SegmentFit segment_cost(const ComparisonDataset& ds, const KernelSpec& spec, double a,
                        double b, const DetectOptions& opts) {
  if (!(b - a >= 2.0 * spec.h))
    throw InvalidArgument("segment_cost: interval shorter than twice the bandwidth");
  ComparisonDataset local = restrict_records(ds, a, b);
  const int m_I = std::max(10, static_cast<int>(std::lround(opts.grid_density * (b - a))));
  TimeGrid grid = make_grid(a, b, m_I);

  GroupRecognition rec = recognize_groups(local, spec, grid, opts.recognize);
  PairIndex index(local);
  GroupedScores grouped = refit(index, spec, grid, rec.partition,
                                opts.recognize.stat_tol, opts.recognize.stat_max_iter);

  SegmentFit fit;
  fit.a = a;
  fit.b = b;
  fit.partition = rec.partition;
  fit.group_count = rec.partition.group_count();
  fit.grid = grid;
  fit.refit_scores = grouped.item_scores.scores;

  const double step = grid.step();
  double L = 0.0;
  for (int k = 0; k < m_I; ++k) {
    Eigen::MatrixXd ybar(local.n, local.n);
    ybar.setConstant(std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < local.n; ++i)
      for (int j = 0; j < local.n; ++j) {
        if (i == j) continue;
        auto [sw, swy] = index.series(i, j).kernel_sums(spec, grid.points[k]);
        if (sw > 0.0) ybar(i, j) = swy / sw;
      }
    L += neg_log_likelihood(grouped.item_scores.scores.row(k).transpose(), ybar) * step;
  }
  fit.cost_L = L;
  return fit;
}

SegmentCostTable::SegmentCostTable(const ComparisonDataset& ds, const KernelSpec& spec,
                                   CandidateSet candidates, DetectOptions opts)
    : ds_(ds), spec_(spec), candidates_(std::move(candidates)), opts_(std::move(opts)) {
  for (std::size_t k = 0; k + 1 < candidates_.xi.size(); ++k)
    if (!(candidates_.xi[k] < candidates_.xi[k + 1]))
      throw InvalidArgument("SegmentCostTable: candidates must strictly increase");
  if (!candidates_.xi.empty() &&
      (candidates_.xi.front() <= 0.0 || candidates_.xi.back() >= candidates_.V))
    throw InvalidArgument("SegmentCostTable: candidates must lie inside (0, V)");
}

const SegmentFit& SegmentCostTable::operator()(int l, int r) {
  if (l < 0 || r > candidates_.U() + 1 || l >= r)
    throw InvalidArgument("SegmentCostTable: need 0 <= l < r <= U + 1");
  auto key = std::make_pair(l, r);
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  const double a = candidates_.edge(l);
  const double b = candidates_.edge(r);
  SegmentFit fit;
  if (b - a < 2.0 * spec_.h) {
    fit.a = a;
    fit.b = b;
    fit.cost_L = kInf;  // degenerate interval, never selected
  } else {
    fit = segment_cost(ds_, spec_, a, b, opts_);
  }
  return memo_.emplace(key, std::move(fit)).first->second;
}

std::pair<std::vector<int>, double> dp_core(
    const CandidateSet& candidates,
    const std::function<std::pair<double, int>(int, int)>& cost, double gamma1,
    double gamma2) {
  const int U = candidates.U();
  std::vector<double> best(U + 2, kInf);
  std::vector<int> from(U + 2, -1);
  best[0] = 0.0;
  for (int r = 1; r <= U + 1; ++r) {
    for (int l = 0; l < r; ++l) {
      if (!std::isfinite(best[l])) continue;
      auto [L, B] = cost(l, r);
      if (!std::isfinite(L)) continue;
      double total =
          best[l] + L + gamma1 * B * (candidates.edge(r) - candidates.edge(l)) + gamma2;
      if (total < best[r]) {
        best[r] = total;
        from[r] = l;
      }
    }
  }
  if (!std::isfinite(best[U + 1]))
    throw InvalidArgument("dp_core: no feasible segmentation (all intervals degenerate)");
  std::vector<int> cuts;
  for (int r = U + 1; from[r] > 0; r = from[r]) cuts.push_back(from[r]);
  std::reverse(cuts.begin(), cuts.end());
  return {cuts, best[U + 1]};
}

ChangePointResult dp_detect(SegmentCostTable& costs, double gamma1, double gamma2) {
  auto cost_fn = [&costs](int l, int r) {
    const SegmentFit& fit = costs(l, r);
    return std::make_pair(fit.cost_L, fit.group_count);
  };
  auto [cuts, objective] = dp_core(costs.candidates(), cost_fn, gamma1, gamma2);

  ChangePointResult res;
  res.objective = objective;
  res.gamma1 = gamma1;
  res.gamma2 = gamma2;
  for (int u : cuts) res.change_points.push_back(costs.candidates().edge(u));
  std::vector<int> edges = {0};
  for (int u : cuts) edges.push_back(u);
  edges.push_back(costs.candidates().U() + 1);
  for (std::size_t s = 0; s + 1 < edges.size(); ++s)
    res.segments.push_back(costs(edges[s], edges[s + 1]));
  return res;
}

CrossValidationResult cross_validate_gammas(const ComparisonDataset& ds,
                                            const KernelSpec& spec,
                                            const CandidateSet& candidates,
                                            const std::vector<double>& gamma1_grid,
                                            const std::vector<double>& gamma2_grid,
                                            int folds, std::uint64_t seed,
                                            const DetectOptions& opts) {
  if (folds < 2) throw InvalidArgument("cross_validate_gammas: need at least 2 folds");
  if (gamma1_grid.empty() || gamma2_grid.empty())
    throw InvalidArgument("cross_validate_gammas: empty penalty grid");
  bool any_feasible = false;
  for (double g1 : gamma1_grid)
    for (double g2 : gamma2_grid) any_feasible = any_feasible || g1 > g2;
  if (!any_feasible)
    throw InvalidArgument(
        "cross_validate_gammas: no grid cell satisfies gamma1 > gamma2");

  // fold assignment stratified by ordered pair: shuffle each pair's records,
  // deal round-robin
  std::vector<int> fold_of(ds.records.size(), 0);
  {
    std::vector<std::vector<int>> per_pair(ds.n * ds.n);
    for (std::size_t r = 0; r < ds.records.size(); ++r)
      per_pair[ds.records[r].item_i * ds.n + ds.records[r].item_j].push_back(
          static_cast<int>(r));
    for (int p = 0; p < ds.n * ds.n; ++p) {
      auto& idx = per_pair[p];
      if (idx.empty()) continue;
      CounterRng rng(seed, 0x9000 + p);
      for (std::size_t k = idx.size(); k > 1; --k)
        std::swap(idx[k - 1], idx[rng.below(k)]);
      for (std::size_t k = 0; k < idx.size(); ++k)
        fold_of[idx[k]] = static_cast<int>(k) % folds;
    }
  }

  const int n1 = static_cast<int>(gamma1_grid.size());
  const int n2 = static_cast<int>(gamma2_grid.size());
  Eigen::MatrixXd total =
      Eigen::MatrixXd::Constant(n1, n2, std::numeric_limits<double>::quiet_NaN());

  for (int f = 0; f < folds; ++f) {
    ComparisonDataset train;
    train.n = ds.n;
    train.horizon = ds.horizon;
    train.labels = ds.labels;
    std::vector<const ComparisonRecord*> held;
    for (std::size_t r = 0; r < ds.records.size(); ++r) {
      if (fold_of[r] == f)
        held.push_back(&ds.records[r]);
      else
        train.records.push_back(ds.records[r]);
    }
    SegmentCostTable table(train, spec, candidates, opts);
    for (int a = 0; a < n1; ++a) {
      for (int b = 0; b < n2; ++b) {
        if (!(gamma1_grid[a] > gamma2_grid[b])) continue;
        ChangePointResult res = dp_detect(table, gamma1_grid[a], gamma2_grid[b]);
        double ll = 0.0;
        for (const ComparisonRecord* rec : held) {
          const SegmentFit* seg = &res.segments.back();
          for (const SegmentFit& s : res.segments)
            if (rec->time >= s.a && rec->time < s.b) {
              seg = &s;
              break;
            }
          int k = nearest_grid_index(seg->grid, rec->time);
          double pi_i = seg->refit_scores(k, rec->item_i);
          double pi_j = seg->refit_scores(k, rec->item_j);
          double rate = std::clamp(pi_j / (pi_i + pi_j), 1e-12, 1.0 - 1e-12);
          ll += rec->outcome == 1 ? std::log(rate) : std::log1p(-rate);
        }
        if (std::isnan(total(a, b)))
          total(a, b) = ll;
        else
          total(a, b) += ll;
      }
    }
  }

  CrossValidationResult out;
  out.heldout_loglik = total / folds;
  double best = -kInf;
  for (int a = 0; a < n1; ++a)
    for (int b = 0; b < n2; ++b) {
      if (std::isnan(total(a, b)) || !(total(a, b) > best)) continue;
      best = total(a, b);
      out.gamma1 = gamma1_grid[a];
      out.gamma2 = gamma2_grid[b];
    }
  return out;
}

NaiveDetection naive_detect(SegmentCostTable& costs) {
  const CandidateSet& cand = costs.candidates();
  NaiveDetection out;
  for (int u = 0; u <= cand.U(); ++u) {
    const SegmentFit& fit = costs(u, u + 1);
    if (!std::isfinite(fit.cost_L))
      throw InvalidArgument("naive_detect: inter-candidate interval shorter than 2h");
    out.interval_partitions.push_back(fit.partition);
  }
  for (int u = 1; u <= cand.U(); ++u)
    if (canonical_labels(out.interval_partitions[u - 1]) !=
        canonical_labels(out.interval_partitions[u]))
      out.change_points.push_back(cand.edge(u));
  return out;
}

}  // namespace dynrank
