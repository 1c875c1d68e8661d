// Command-line front end for the dynamic ranking toolkit.
//
// Subcommands: simulate | estimate | group | detect | uq | evaluate | replicate.
// Shared numeric options live on the top-level app and may come from a flat
// key=value config file (--config); command-line flags override file values.
// Exit codes: 0 success, 2 config error, 3 data error, 4 convergence failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dynrank/changepoint.hpp"
#include "dynrank/errors.hpp"
#include "dynrank/grouping.hpp"
#include "dynrank/io.hpp"
#include "dynrank/metrics.hpp"
#include "dynrank/replicate.hpp"
#include "dynrank/simulate.hpp"
#include "dynrank/spectral.hpp"
#include "dynrank/uncertainty.hpp"

using json = nlohmann::json;
using namespace dynrank;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string kernel = "epanechnikov";
  double h = 0.05;
  int grid_m = 30;
  int lambda_count = 50;
  double lambda_min_ratio = 1e-4;
  double lambda = 0.0;  // > 0 pins a single penalty value
  double epsilon = 0.001;
  double c0 = 0.1;
  double weight_cap = 1e12;
  int candidate_count = 9;
  double gamma1 = 0.0;  // > 0 with gamma2 skips cross validation
  double gamma2 = 0.0;
  std::vector<double> gamma1_grid = {0.01, 0.02, 0.04, 0.08, 0.16};
  std::vector<double> gamma2_grid = {0.002, 0.006, 0.018};
  int cv_folds = 10;
  double grid_density = 30.0;
  std::uint64_t seed = 0;
  double level = 0.95;
  double budget = 0.0;   // per-pair comparison count for band widths; 0 = infer
  double horizon = 0.0;  // 0 = take from the data file
  int jobs = 1;

  KernelSpec kernel_spec() const {
    KernelSpec spec;
    spec.h = h;
    if (kernel == "epanechnikov")
      spec.family = KernelFamily::epanechnikov;
    else if (kernel == "gaussian")
      spec.family = KernelFamily::gaussian;
    else
      throw ConfigError("unknown kernel '" + kernel + "'");
    return spec;
  }

  RecognizeOptions recognize_options() const {
    RecognizeOptions opts;
    opts.lambda_count = lambda_count;
    opts.lambda_min_ratio = lambda_min_ratio;
    opts.fixed_lambda = lambda;
    opts.epsilon = epsilon;
    opts.c0 = c0;
    opts.weight_cap = weight_cap;
    return opts;
  }

  DetectOptions detect_options() const {
    DetectOptions opts;
    opts.grid_density = grid_density;
    opts.recognize = recognize_options();
    return opts;
  }

  void validate(bool detect_requested) const {
    if (h <= 0.0) throw ConfigError("h must be positive");
    if (grid_m < 1) throw ConfigError("grid-m must be at least 1");
    if (lambda_count < 1) throw ConfigError("lambda-count must be at least 1");
    if (lambda_min_ratio <= 0.0 || lambda_min_ratio > 1.0)
      throw ConfigError("lambda-min-ratio must be in (0, 1]");
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
    if (c0 < 0.0) throw ConfigError("c0 must be nonnegative");
    if (weight_cap <= 0.0) throw ConfigError("weight-cap must be positive");
    if (candidate_count < 0) throw ConfigError("candidate-count must be nonnegative");
    if (grid_density <= 0.0) throw ConfigError("grid-density must be positive");
    if (cv_folds < 2) throw ConfigError("cv-folds must be at least 2");
    if (level <= 0.0 || level >= 1.0) throw ConfigError("level must be in (0, 1)");
    if (budget < 0.0) throw ConfigError("budget must be nonnegative");
    if (horizon < 0.0) throw ConfigError("horizon must be nonnegative");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    kernel_spec();
    if (detect_requested) {
      bool explicit_gammas = gamma1 > 0.0 || gamma2 > 0.0;
      if (explicit_gammas) {
        if (!(gamma1 > gamma2))
          throw ConfigError("gamma1 must exceed gamma2");
      } else {
        if (gamma1_grid.empty() || gamma2_grid.empty())
          throw ConfigError("empty gamma grid");
        double g1max = *std::max_element(gamma1_grid.begin(), gamma1_grid.end());
        double g2min = *std::min_element(gamma2_grid.begin(), gamma2_grid.end());
        if (!(g1max > g2min))
          throw ConfigError("no feasible (gamma1, gamma2) cell: need gamma1 > gamma2");
      }
    }
  }

  std::map<std::string, std::string> provenance() const {
    auto join = [](const std::vector<double>& v) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + format_double(v[i]);
      return out;
    };
    return {{"kernel", kernel},
            {"h", format_double(h)},
            {"grid-m", std::to_string(grid_m)},
            {"lambda-count", std::to_string(lambda_count)},
            {"lambda-min-ratio", format_double(lambda_min_ratio)},
            {"lambda", format_double(lambda)},
            {"epsilon", format_double(epsilon)},
            {"c0", format_double(c0)},
            {"weight-cap", format_double(weight_cap)},
            {"candidate-count", std::to_string(candidate_count)},
            {"gamma1", format_double(gamma1)},
            {"gamma2", format_double(gamma2)},
            {"gamma1-grid", join(gamma1_grid)},
            {"gamma2-grid", join(gamma2_grid)},
            {"cv-folds", std::to_string(cv_folds)},
            {"grid-density", format_double(grid_density)},
            {"seed", std::to_string(seed)},
            {"level", format_double(level)},
            {"budget", format_double(budget)},
            {"jobs", std::to_string(jobs)}};
  }

  json provenance_json() const {
    json out;
    for (const auto& [k, v] : provenance()) out[k] = v;
    return out;
  }
};

ComparisonDataset load_dataset(const std::string& path, const RunConfig& cfg) {
  std::optional<double> horizon;
  if (cfg.horizon > 0.0) horizon = cfg.horizon;
  ComparisonDataset ds = read_comparison_csv(path, horizon);
  auto problems = validate_dataset(ds);
  if (!problems.empty())
    throw InvalidArgument("'" + path + "': " + problems.front());
  return ds;
}

std::vector<std::string> item_labels(const ComparisonDataset& ds) {
  if (!ds.labels.empty()) return ds.labels;
  std::vector<std::string> out;
  for (int i = 0; i < ds.n; ++i) out.push_back("item_" + std::to_string(i));
  return out;
}

json partition_json(const GroupPartition& part, const std::vector<std::string>& labels) {
  json out;
  out["boundaries"] = part.boundaries;
  out["perm"] = part.perm;
  out["group_count"] = part.group_count();
  json groups = json::array();
  for (int g = 0; g < part.group_count(); ++g) {
    json members = json::array();
    for (int pos = part.boundaries[g]; pos < part.boundaries[g + 1]; ++pos)
      members.push_back(labels[part.perm[pos]]);
    groups.push_back(members);
  }
  out["groups"] = groups;
  return out;
}

void write_json(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << doc.dump(2) << "\n";
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    if (field.empty()) continue;
    try {
      std::size_t used = 0;
      double v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("malformed number '" + field + "' in list");
    }
  }
  return out;
}

void check_setting_name(const std::string& setting) {
  static const std::vector<std::string> known = {"grouping-1", "grouping-2", "change-1",
                                                 "change-2"};
  if (std::find(known.begin(), known.end(), setting) == known.end())
    throw ConfigError("unknown setting '" + setting +
                      "' (expected grouping-1, grouping-2, change-1, or change-2)");
}

int cmd_simulate(const RunConfig& cfg, const std::string& setting, int n, int M,
                 const std::string& out, const std::string& truth_out) {
  check_setting_name(setting);
  PhasedSpec spec = builtin_setting(setting, n);
  SimulatedData sim = sample_dataset(spec, M, cfg.seed);

  auto prov = cfg.provenance();
  prov["setting"] = setting;
  prov["n"] = std::to_string(n);
  prov["M"] = std::to_string(M);
  {
    std::string cps;
    for (std::size_t i = 0; i < sim.change_points.size(); ++i)
      cps += (i ? "," : "") + format_double(sim.change_points[i]);
    prov["change-points"] = cps;
  }
  write_comparison_csv(out, sim.dataset, prov);

  if (!truth_out.empty()) {
    TimeGrid grid = make_grid(0.0, spec.horizon, cfg.grid_m);
    ScoreTrajectory truth;
    truth.grid = grid;
    truth.scores = sim.true_scores(grid.points);
    write_trajectory_csv(truth_out, truth, item_labels(sim.dataset), prov);
  }
  std::cout << "wrote " << sim.dataset.records.size() << " comparisons to " << out
            << "\n";
  return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::string& data, const std::string& out,
                 const std::string& heatmap_out, double heatmap_at) {
  ComparisonDataset ds = load_dataset(data, cfg);
  KernelSpec spec = cfg.kernel_spec();
  TimeGrid grid = make_grid(0.0, ds.horizon, cfg.grid_m);
  KrcResult krc = krc_estimate(ds, spec, grid);

  auto prov = cfg.provenance();
  prov["horizon"] = format_double(ds.horizon);
  int zero_mass = 0;
  for (int z : krc.zero_mass_pairs) zero_mass += z;
  prov["zero-mass-pairs"] = std::to_string(zero_mass);
  prov["irreducible-warning"] = krc.irreducible_warning ? "true" : "false";
  write_trajectory_csv(out, krc.trajectory, item_labels(ds), prov);
  if (krc.irreducible_warning)
    std::cerr << "warning: comparison graph not strongly connected at some grid points\n";

  if (!heatmap_out.empty()) {
    Eigen::MatrixXd frac = smoothed_fraction_matrix(ds, spec, heatmap_at, 0.0,
                                                    ds.horizon + 1.0);
    std::ofstream hm(heatmap_out);
    if (!hm) throw InvalidArgument("cannot write '" + heatmap_out + "'");
    auto labels = item_labels(ds);
    for (const auto& [k, v] : prov) hm << "# " << k << "=" << v << "\n";
    hm << "# win fraction of column item over row item at t=" << format_double(heatmap_at)
       << "\nitem";
    for (const auto& l : labels) hm << "," << l;
    hm << "\n";
    for (int i = 0; i < ds.n; ++i) {
      hm << labels[i];
      for (int j = 0; j < ds.n; ++j) {
        hm << ",";
        if (i != j && std::isfinite(frac(i, j))) hm << format_double(frac(i, j));
      }
      hm << "\n";
    }
  }
  std::cout << "wrote " << grid.size() << "-point trajectory for " << ds.n
            << " items to " << out << "\n";
  return 0;
}

int cmd_group(const RunConfig& cfg, const std::string& data, const std::string& prefix,
              bool no_refit) {
  ComparisonDataset ds = load_dataset(data, cfg);
  KernelSpec spec = cfg.kernel_spec();
  TimeGrid grid = make_grid(0.0, ds.horizon, cfg.grid_m);
  GroupRecognition rec = recognize_groups(ds, spec, grid, cfg.recognize_options());

  auto labels = item_labels(ds);
  const ThetaFit& sel = rec.path.fits[rec.path.selected];

  json doc;
  doc["config"] = cfg.provenance_json();
  doc["horizon"] = ds.horizon;
  doc["partition"] = partition_json(rec.partition, labels);
  doc["selected_lambda"] = sel.lambda;
  doc["ebic"] = sel.ebic;
  doc["support"] = sel.support;
  doc["lambda_path_length"] = rec.path.fits.size();
  doc["irreducible_warning"] = rec.irreducible_warning;

  auto prov = cfg.provenance();
  prov["horizon"] = format_double(ds.horizon);
  write_trajectory_csv(prefix + "_scores.csv", rec.fused_scores, labels, prov);
  if (!no_refit) {
    GroupedScores grouped = refit(ds, spec, grid, rec.partition);
    write_trajectory_csv(prefix + "_refit.csv", grouped.item_scores, labels, prov);
    json gs = json::array();
    for (int k = 0; k < grouped.group_scores.rows(); ++k) {
      json row = json::array();
      row.push_back(grid.points[k]);
      for (int g = 0; g < grouped.group_scores.cols(); ++g)
        row.push_back(grouped.group_scores(k, g));
      gs.push_back(row);
    }
    doc["group_scores"] = gs;
  }
  write_json(prefix + "_groups.json", doc);

  std::cout << "recognized " << rec.partition.group_count() << " groups; wrote "
            << prefix << "_groups.json\n";
  return 0;
}

int cmd_detect(const RunConfig& cfg, const std::string& data, const std::string& out,
               const std::string& baseline) {
  ComparisonDataset ds = load_dataset(data, cfg);
  KernelSpec spec = cfg.kernel_spec();
  CandidateSet candidates = uniform_candidates(cfg.candidate_count, ds.horizon);
  DetectOptions opts = cfg.detect_options();

  json doc;
  doc["config"] = cfg.provenance_json();
  doc["horizon"] = ds.horizon;
  doc["candidates"] = candidates.xi;

  double g1 = cfg.gamma1, g2 = cfg.gamma2;
  bool used_cv = false;
  if (!(g1 > 0.0 || g2 > 0.0)) {
    CrossValidationResult cv =
        cross_validate_gammas(ds, spec, candidates, cfg.gamma1_grid, cfg.gamma2_grid,
                              cfg.cv_folds, cfg.seed, opts);
    g1 = cv.gamma1;
    g2 = cv.gamma2;
    used_cv = true;
    json cvj;
    cvj["gamma1_grid"] = cfg.gamma1_grid;
    cvj["gamma2_grid"] = cfg.gamma2_grid;
    json held = json::array();
    for (int i = 0; i < cv.heldout_loglik.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < cv.heldout_loglik.cols(); ++j) {
        double v = cv.heldout_loglik(i, j);
        if (std::isfinite(v))
          row.push_back(v);
        else
          row.push_back(nullptr);
      }
      held.push_back(row);
    }
    cvj["heldout_loglik"] = held;
    doc["cv"] = cvj;
  }
  doc["used_cv"] = used_cv;
  doc["gamma1"] = g1;
  doc["gamma2"] = g2;

  SegmentCostTable table(ds, spec, candidates, opts);
  ChangePointResult res = dp_detect(table, g1, g2);
  doc["change_points"] = res.change_points;
  doc["objective"] = res.objective;

  auto labels = item_labels(ds);
  json segments = json::array();
  for (const SegmentFit& seg : res.segments) {
    json sj;
    sj["a"] = seg.a;
    sj["b"] = seg.b;
    sj["group_count"] = seg.group_count;
    sj["cost"] = seg.cost_L;
    sj["partition"] = partition_json(seg.partition, labels);
    segments.push_back(sj);
  }
  doc["segments"] = segments;

  if (baseline == "naive") {
    NaiveDetection naive = naive_detect(table);
    json nj;
    nj["change_points"] = naive.change_points;
    json parts = json::array();
    for (const GroupPartition& part : naive.interval_partitions)
      parts.push_back(partition_json(part, labels));
    nj["interval_partitions"] = parts;
    doc["naive"] = nj;
  } else if (!baseline.empty() && baseline != "none") {
    throw ConfigError("unknown baseline '" + baseline + "'");
  }

  write_json(out, doc);
  std::cout << "detected " << res.change_points.size() << " change points";
  if (used_cv) std::cout << " (gamma1=" << g1 << ", gamma2=" << g2 << " by CV)";
  std::cout << "; wrote " << out << "\n";
  return 0;
}

int cmd_uq(const RunConfig& cfg, const std::string& data, const std::string& out) {
  ComparisonDataset ds = load_dataset(data, cfg);
  KernelSpec spec = cfg.kernel_spec();
  TimeGrid grid = make_grid(0.0, ds.horizon, cfg.grid_m);
  GroupRecognition rec = recognize_groups(ds, spec, grid, cfg.recognize_options());
  GroupedScores grouped = refit(ds, spec, grid, rec.partition);

  double M = cfg.budget;
  if (M <= 0.0) {
    // infer the per-pair budget from the record count
    M = double(ds.records.size()) / (double(ds.n) * (ds.n - 1));
    if (M <= 0.0) throw InvalidArgument("dataset holds no records");
  }
  ConfidenceBand band = confidence_band(grouped, spec, ds.n, M, cfg.level);

  std::ofstream os(out);
  if (!os) throw InvalidArgument("cannot write '" + out + "'");
  auto prov = cfg.provenance();
  prov["horizon"] = format_double(ds.horizon);
  prov["inferred-budget"] = format_double(M);
  prov["groups"] = std::to_string(grouped.partition.group_count());
  for (const auto& [k, v] : prov) os << "# " << k << "=" << v << "\n";
  os << "time";
  const int B = grouped.partition.group_count();
  for (int g = 0; g < B; ++g)
    os << ",group" << g << "_score,group" << g << "_lower,group" << g << "_upper";
  os << "\n";
  for (int k = 0; k < grid.size(); ++k) {
    os << format_double(grid.points[k]);
    for (int g = 0; g < B; ++g)
      os << "," << format_double(grouped.group_scores(k, g)) << ","
         << format_double(band.lower(k, g)) << "," << format_double(band.upper(k, g));
    os << "\n";
  }
  std::cout << "wrote " << cfg.level * 100 << "% bands for " << B << " groups to "
            << out << "\n";
  return 0;
}

int cmd_evaluate(const std::string& est_path, const std::string& truth_path,
                 const std::string& est_changes, const std::string& truth_changes,
                 double horizon, const std::string& out) {
  json doc;
  if (!est_path.empty() || !truth_path.empty()) {
    if (est_path.empty() || truth_path.empty())
      throw ConfigError("--est and --truth must be given together");
    ScoreTrajectory est = read_trajectory_csv(est_path);
    ScoreTrajectory truth = read_trajectory_csv(truth_path);
    doc["mean_kendall_tau"] = mean_kendall_tau(est.scores, truth.scores);
    doc["trajectory_mse"] = trajectory_mse(est.scores, truth.scores);
    doc["grid_points"] = est.scores.rows();
  }
  if (!est_changes.empty() || !truth_changes.empty()) {
    std::vector<double> a = parse_double_list(est_changes);
    std::vector<double> b = parse_double_list(truth_changes);
    doc["hausdorff"] = hausdorff(a, b, horizon);
    doc["detected"] = a.size();
    doc["expected"] = b.size();
  }
  if (doc.empty()) throw ConfigError("nothing to evaluate; pass trajectories or change lists");
  if (out.empty())
    std::cout << doc.dump(2) << "\n";
  else
    write_json(out, doc);
  return 0;
}

int cmd_replicate(const RunConfig& cfg, const std::string& setting, int reps, int n,
                  int M, const std::string& out) {
  check_setting_name(setting);
  if (reps < 1) throw ConfigError("reps must be at least 1");
  json doc;
  doc["config"] = cfg.provenance_json();
  doc["setting"] = setting;
  doc["reps"] = reps;

  auto stat_json = [](const SummaryStat& s) {
    json j;
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    return j;
  };

  bool grouping = setting.rfind("grouping-", 0) == 0;
  if (grouping) {
    GroupingStudyConfig study;
    study.setting = setting;
    study.n = n;
    study.M = M;
    study.h = cfg.h;
    study.grid_m = cfg.grid_m;
    study.family = cfg.kernel_spec().family;
    study.recognize = cfg.recognize_options();
    std::function<GroupingReplicate(int)> fn = [&](int rep) {
      return run_grouping_replicate(study, cfg.seed + std::uint64_t(rep));
    };
    std::vector<GroupingReplicate> rows = run_replicates(reps, cfg.jobs, fn);

    auto collect = [&](auto member) {
      std::vector<double> v;
      for (const auto& r : rows) v.push_back(r.*member);
      return summarize(v);
    };
    json methods;
    methods["ours"] = {{"tau", stat_json(collect(&GroupingReplicate::tau_ours))},
                       {"mse", stat_json(collect(&GroupingReplicate::mse_ours))},
                       {"sensitivity", stat_json(collect(&GroupingReplicate::sens_ours))},
                       {"specificity", stat_json(collect(&GroupingReplicate::spec_ours))},
                       {"groups", stat_json(collect(&GroupingReplicate::groups_ours))}};
    methods["ours_refit"] = {{"tau", stat_json(collect(&GroupingReplicate::tau_refit))},
                             {"mse", stat_json(collect(&GroupingReplicate::mse_refit))}};
    methods["static"] = {{"tau", stat_json(collect(&GroupingReplicate::tau_static))},
                         {"mse", stat_json(collect(&GroupingReplicate::mse_static))},
                         {"sensitivity", stat_json(collect(&GroupingReplicate::sens_static))},
                         {"specificity", stat_json(collect(&GroupingReplicate::spec_static))},
                         {"groups", stat_json(collect(&GroupingReplicate::groups_static))}};
    methods["krc"] = {{"tau", stat_json(collect(&GroupingReplicate::tau_krc))},
                      {"mse", stat_json(collect(&GroupingReplicate::mse_krc))}};
    doc["n"] = n;
    doc["M"] = M;
    doc["methods"] = methods;

    std::printf("%-12s %14s %14s %12s %12s\n", "method", "tau", "mse", "sensitivity",
                "specificity");
    auto line = [&](const char* name, SummaryStat tau, SummaryStat mse, double sens,
                    double spec, bool has_conf) {
      if (has_conf)
        std::printf("%-12s %6.4f (%5.4f) %6.4f (%5.4f) %12.4f %12.4f\n", name, tau.mean,
                    tau.sd, mse.mean, mse.sd, sens, spec);
      else
        std::printf("%-12s %6.4f (%5.4f) %6.4f (%5.4f) %12s %12s\n", name, tau.mean,
                    tau.sd, mse.mean, mse.sd, "-", "-");
    };
    line("ours", collect(&GroupingReplicate::tau_ours), collect(&GroupingReplicate::mse_ours),
         collect(&GroupingReplicate::sens_ours).mean,
         collect(&GroupingReplicate::spec_ours).mean, true);
    line("ours-refit", collect(&GroupingReplicate::tau_refit),
         collect(&GroupingReplicate::mse_refit), 0, 0, false);
    line("static", collect(&GroupingReplicate::tau_static),
         collect(&GroupingReplicate::mse_static),
         collect(&GroupingReplicate::sens_static).mean,
         collect(&GroupingReplicate::spec_static).mean, true);
    line("krc", collect(&GroupingReplicate::tau_krc), collect(&GroupingReplicate::mse_krc),
         0, 0, false);
  } else {
    ChangeStudyConfig study;
    study.setting = setting;
    study.M = M;
    study.h = cfg.h;
    study.candidate_count = cfg.candidate_count;
    study.gamma1 = cfg.gamma1 > 0.0 ? cfg.gamma1 : 0.04;
    study.gamma2 = cfg.gamma2 > 0.0 ? cfg.gamma2 : 0.006;
    study.family = cfg.kernel_spec().family;
    study.detect = cfg.detect_options();
    std::function<ChangeReplicate(int)> fn = [&](int rep) {
      return run_change_replicate(study, cfg.seed + std::uint64_t(rep));
    };
    std::vector<ChangeReplicate> rows = run_replicates(reps, cfg.jobs, fn);

    std::vector<double> detected, hdist;
    int exact = 0;
    for (const auto& r : rows) {
      detected.push_back(double(r.detected));
      hdist.push_back(r.hdist);
      if (r.detected == r.true_count) ++exact;
    }
    doc["M"] = M;
    doc["gamma1"] = study.gamma1;
    doc["gamma2"] = study.gamma2;
    doc["mean_detected"] = stat_json(summarize(detected));
    doc["hausdorff"] = stat_json(summarize(hdist));
    doc["exact_count_rate"] = double(exact) / reps;

    std::printf("setting %s: detected %.3f (sd %.3f), exact-count rate %.3f, hausdorff %.4f (sd %.4f)\n",
                setting.c_str(), summarize(detected).mean, summarize(detected).sd,
                double(exact) / reps, summarize(hdist).mean, summarize(hdist).sd);
  }

  if (!out.empty()) write_json(out, doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic ranking from pairwise comparison streams"};
  app.require_subcommand(1);
  app.fallthrough();  // shared options may follow the subcommand name
  app.set_help_flag("--help", "print help and exit");  // frees -h for the bandwidth
  app.set_config("--config", "", "flat key=value file; command-line flags win");

  RunConfig cfg;
  std::string gamma1_list, gamma2_list;
  app.add_option("--kernel", cfg.kernel, "epanechnikov | gaussian")
      ->capture_default_str();
  app.add_option("--h", cfg.h, "kernel bandwidth")->capture_default_str();
  app.add_option("--grid-m", cfg.grid_m, "grid points over the horizon")
      ->capture_default_str();
  app.add_option("--lambda-count", cfg.lambda_count, "penalty path length")
      ->capture_default_str();
  app.add_option("--lambda-min-ratio", cfg.lambda_min_ratio,
                 "smallest penalty as a fraction of lambda_max")
      ->capture_default_str();
  app.add_option("--lambda", cfg.lambda, "pin a single penalty value (skips the path)")
      ->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "support threshold on gap norms")
      ->capture_default_str();
  app.add_option("--c0", cfg.c0, "information criterion variance offset")
      ->capture_default_str();
  app.add_option("--weight-cap", cfg.weight_cap, "cap on adaptive weights")
      ->capture_default_str();
  app.add_option("--candidate-count", cfg.candidate_count,
                 "uniform interior change-point candidates")
      ->capture_default_str();
  app.add_option("--gamma1", cfg.gamma1, "complexity penalty (with --gamma2 skips CV)")
      ->capture_default_str();
  app.add_option("--gamma2", cfg.gamma2, "per-segment penalty")->capture_default_str();
  app.add_option("--gamma1-grid", gamma1_list, "comma list for cross validation");
  app.add_option("--gamma2-grid", gamma2_list, "comma list for cross validation");
  app.add_option("--cv-folds", cfg.cv_folds, "cross validation folds")
      ->capture_default_str();
  app.add_option("--grid-density", cfg.grid_density, "segment grid points per unit time")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "base random seed")->capture_default_str();
  app.add_option("--level", cfg.level, "confidence level for bands")
      ->capture_default_str();
  app.add_option("--budget", cfg.budget, "per-pair comparison budget (0 = infer)")
      ->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "observation horizon (0 = from data)")
      ->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "worker threads for replicate")
      ->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample a built-in comparison setting");
  std::string sim_setting = "grouping-1", sim_out, sim_truth_out;
  int sim_n = 10, sim_M = 100;
  sim->add_option("--setting", sim_setting,
                  "grouping-1 | grouping-2 | change-1 | change-2")
      ->capture_default_str();
  sim->add_option("--n", sim_n, "number of items")->capture_default_str();
  sim->add_option("--M", sim_M, "comparisons per ordered pair per phase")
      ->capture_default_str();
  sim->add_option("--out", sim_out, "output comparison CSV")->required();
  sim->add_option("--truth-out", sim_truth_out, "optional true score trajectory CSV");

  // estimate
  auto* est = app.add_subcommand("estimate", "kernel rank centrality trajectory");
  std::string est_data, est_out, est_heatmap;
  double est_heatmap_at = 0.5;
  est->add_option("--data", est_data, "comparison CSV")->required();
  est->add_option("--out", est_out, "output trajectory CSV")->required();
  est->add_option("--heatmap-out", est_heatmap, "optional win-fraction matrix CSV");
  est->add_option("--heatmap-at", est_heatmap_at, "time for the win-fraction matrix")
      ->capture_default_str();

  // group
  auto* grp = app.add_subcommand("group", "recognize groups and refit scores");
  std::string grp_data, grp_prefix;
  bool grp_no_refit = false;
  grp->add_option("--data", grp_data, "comparison CSV")->required();
  grp->add_option("--out-prefix", grp_prefix, "prefix for _groups.json / _scores.csv / _refit.csv")
      ->required();
  grp->add_flag("--no-refit", grp_no_refit, "skip the grouped refit");

  // detect
  auto* det = app.add_subcommand("detect", "locate structural change points");
  std::string det_data, det_out, det_baseline = "none";
  det->add_option("--data", det_data, "comparison CSV")->required();
  det->add_option("--out", det_out, "output JSON")->required();
  det->add_option("--baseline", det_baseline, "none | naive comparison detector")
      ->capture_default_str();

  // uq
  auto* uq = app.add_subcommand("uq", "confidence bands for grouped scores");
  std::string uq_data, uq_out;
  uq->add_option("--data", uq_data, "comparison CSV")->required();
  uq->add_option("--out", uq_out, "output band CSV")->required();

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score estimates against a reference");
  std::string ev_est, ev_truth, ev_est_changes, ev_truth_changes, ev_out;
  double ev_horizon = 1.0;
  ev->add_option("--est", ev_est, "estimated trajectory CSV");
  ev->add_option("--truth", ev_truth, "reference trajectory CSV");
  ev->add_option("--est-changes", ev_est_changes, "comma list of detected change points");
  ev->add_option("--truth-changes", ev_truth_changes, "comma list of true change points");
  ev->add_option("--eval-horizon", ev_horizon, "horizon for the set distance")
      ->capture_default_str();
  ev->add_option("--out", ev_out, "output JSON (stdout when omitted)");

  // replicate
  auto* rep = app.add_subcommand("replicate", "simulation study over many seeds");
  std::string rep_setting = "grouping-1", rep_out;
  int rep_reps = 50, rep_n = 20, rep_M = 0;
  rep->add_option("--setting", rep_setting, "built-in setting name")
      ->capture_default_str();
  rep->add_option("--reps", rep_reps, "replicate count")->capture_default_str();
  rep->add_option("--n", rep_n, "items (grouping settings)")->capture_default_str();
  rep->add_option("--M", rep_M, "comparisons per pair (0 = setting default)")
      ->capture_default_str();
  rep->add_option("--out", rep_out, "optional JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!gamma1_list.empty()) cfg.gamma1_grid = parse_double_list(gamma1_list);
    if (!gamma2_list.empty()) cfg.gamma2_grid = parse_double_list(gamma2_list);
    cfg.validate(det->parsed());

    if (sim->parsed()) return cmd_simulate(cfg, sim_setting, sim_n, sim_M, sim_out, sim_truth_out);
    if (est->parsed()) return cmd_estimate(cfg, est_data, est_out, est_heatmap, est_heatmap_at);
    if (grp->parsed()) return cmd_group(cfg, grp_data, grp_prefix, grp_no_refit);
    if (det->parsed()) return cmd_detect(cfg, det_data, det_out, det_baseline);
    if (uq->parsed()) return cmd_uq(cfg, uq_data, uq_out);
    if (ev->parsed())
      return cmd_evaluate(ev_est, ev_truth, ev_est_changes, ev_truth_changes, ev_horizon, ev_out);
    if (rep->parsed()) {
      int M = rep_M;
      if (M == 0) M = rep_setting.rfind("change-", 0) == 0 ? 500 : 100;
      return cmd_replicate(cfg, rep_setting, rep_reps, rep_n, M, rep_out);
    }
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 4;
  } catch (const InvalidArgument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
