#include "dynrank/simulate.hpp"

#include <cmath>
#include <numbers>

#include "dynrank/errors.hpp"
#include "dynrank/rng.hpp"

namespace dynrank {

double CurveSpec::eval(double t) const {
  constexpr double pi = std::numbers::pi;
  double v = base;
  if (sin_amp != 0.0) v += sin_amp * std::sin(sin_freq * pi * t);
  if (atan_amp != 0.0) v += atan_amp * std::atan(pi * t);
  if (pow_amp != 0.0 && t >= pow_shift) v += pow_amp * std::pow(t - pow_shift, 0.1);
  return v;
}

std::vector<int> TrajectorySpec::group_of_item() const {
  std::vector<int> out;
  out.reserve(n);
  for (std::size_t g = 0; g < pieces.size(); ++g)
    for (int k = 0; k < pieces[g].size; ++k) out.push_back(static_cast<int>(g));
  if (static_cast<int>(out.size()) != n)
    throw InvalidArgument("TrajectorySpec: piece sizes do not sum to n");
  return out;
}

int PhasedSpec::phase_of(double t) const {
  int p = 0;
  while (p < static_cast<int>(breaks.size()) && t >= breaks[p]) ++p;
  return p;
}

namespace {

TrajectorySpec three_group_phase(int n, double s1_base, double s1_sin, double s2_base,
                                 double s2_sin, double s3_base, double s3_sin,
                                 double freq) {
  TrajectorySpec ph;
  ph.n = n;
  int a = 3 * n / 10, b = 3 * n / 10;
  ph.pieces = {{a, {s1_base, s1_sin, freq, 0, 0, 0}},
               {b, {s2_base, s2_sin, freq, 0, 0, 0}},
               {n - a - b, {s3_base, s3_sin, freq, 0, 0, 0}}};
  return ph;
}

}  // namespace

PhasedSpec builtin_setting(const std::string& name, int n) {
  PhasedSpec spec;
  spec.horizon = 1.0;
  if (name == "grouping-1" || name == "grouping-2") {
    if (n < 10 || n % 10 != 0)
      throw InvalidArgument("builtin_setting: grouping settings need n divisible by 10");
    spec.n = n;
    const double s = 1.0 / n;
    TrajectorySpec ph;
    if (name == "grouping-1") {
      ph = three_group_phase(n, 2 * s, 0.3 * s, 1 * s, -0.2 * s, 0.25 * s, -0.075 * s,
                             6.0);
    } else {
      ph.n = n;
      int a = 3 * n / 10, b = 3 * n / 10;
      ph.pieces = {{a, {1.9 * s, 0.5 * s, 3.0, 0, 0, 0}},
                   {b, {0.1 * s, 0, 0, 0.6 * s, 0, 0}},
                   {n - a - b, {1.0 * s, -0.375 * s, 3.0, -0.45 * s, 0, 0}}};
    }
    ph.pert_amp = 0.01 / n;
    spec.phases = {ph};
    return spec;
  }
  if (name == "change-1") {
    if (n != 10) throw InvalidArgument("builtin_setting: change settings are defined for n = 10");
    spec.n = 10;
    spec.breaks = {0.4, 0.7};
    TrajectorySpec outer =
        three_group_phase(10, 0.2, 0.03, 0.1, -0.02, 0.025, -0.0075, 18.0);
    TrajectorySpec middle;
    middle.n = 10;
    middle.pieces = {{5, {0.15, 0.02, 18.0, 0, 0, 0}}, {5, {0.05, -0.02, 18.0, 0, 0, 0}}};
    spec.phases = {outer, middle, outer};
    return spec;
  }
  if (name == "change-2") {
    if (n != 10) throw InvalidArgument("builtin_setting: change settings are defined for n = 10");
    spec.n = 10;
    spec.breaks = {0.5};
    TrajectorySpec first;
    first.n = 10;
    first.pieces = {{2, {0.25, 0.06, 7.0, 0, 0, 0}}, {8, {0.0625, -0.015, 7.0, 0, 0, 0}}};
    TrajectorySpec second;
    second.n = 10;
    second.pieces = {{2, {0.15, -0.04, 15.0, 0, 0, 0}},
                     {2, {0.065, 0, 0, 0, 0.25, 0.5}},
                     {6, {0.1425, 0.02, 15.0, 0, -0.0625, 0.5}}};
    spec.phases = {first, second};
    return spec;
  }
  throw InvalidArgument("builtin_setting: unknown setting '" + name + "'");
}

Eigen::MatrixXd SimulatedData::true_scores(const std::vector<double>& times) const {
  const int n = spec.n;
  Eigen::MatrixXd out(times.size(), n);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const TrajectorySpec& ph = spec.phases[spec.phase_of(t)];
    std::vector<int> g = ph.group_of_item();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double v = ph.pieces[g[i]].curve.eval(t) + pert(i);
      out(k, i) = v;
      sum += v;
    }
    out.row(k) /= sum;
  }
  return out;
}

std::vector<int> SimulatedData::true_group_of_item(double t) const {
  return spec.phases[spec.phase_of(t)].group_of_item();
}

SimulatedData sample_dataset(const PhasedSpec& spec, int M, std::uint64_t seed) {
  if (spec.n < 2) throw InvalidArgument("sample_dataset: need at least 2 items");
  if (M < 1) throw InvalidArgument("sample_dataset: need M >= 1");
  if (spec.phases.size() != spec.breaks.size() + 1)
    throw InvalidArgument("sample_dataset: phases must be breaks.size() + 1");
  for (std::size_t p = 0; p < spec.breaks.size(); ++p) {
    double lo = p == 0 ? 0.0 : spec.breaks[p - 1];
    if (!(spec.breaks[p] > lo && spec.breaks[p] < spec.horizon))
      throw InvalidArgument("sample_dataset: breaks must increase inside (0, horizon)");
  }

  const int n = spec.n;
  SimulatedData out;
  out.spec = spec;
  out.change_points = spec.breaks;
  out.dataset.n = n;
  out.dataset.horizon = spec.horizon;

  out.pert = Eigen::VectorXd::Zero(n);
  {
    CounterRng rng(seed, 0xfade);
    for (int i = 0; i < n; ++i) {
      double amp = 0.0;
      // one draw per item regardless of phase amplitudes, so streams align
      double u = rng.uniform(-1.0, 1.0);
      for (const TrajectorySpec& ph : spec.phases) amp = std::max(amp, ph.pert_amp);
      out.pert(i) = amp * u;
    }
  }

  const int P = static_cast<int>(spec.phases.size());
  out.dataset.records.reserve(static_cast<std::size_t>(P) * n * (n - 1) * M);
  for (int p = 0; p < P; ++p) {
    const double a = p == 0 ? 0.0 : spec.breaks[p - 1];
    const double b = p == P - 1 ? spec.horizon : spec.breaks[p];
    const TrajectorySpec& ph = spec.phases[p];
    std::vector<int> g = ph.group_of_item();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        CounterRng rng(seed, (std::uint64_t(p) * n + i) * n + j);
        for (int k = 0; k < M; ++k) {
          double t = rng.uniform(a, b);
          double si = ph.pieces[g[i]].curve.eval(t) + out.pert(i);
          double sj = ph.pieces[g[j]].curve.eval(t) + out.pert(j);
          // the comparison rate is scale free, renormalization cancels
          int y = rng.bernoulli(sj / (si + sj)) ? 1 : 0;
          out.dataset.records.push_back({i, j, t, y});
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd group_curve_scores(const PhasedSpec& spec,
                                   const std::vector<double>& times) {
  const int n = spec.n;
  Eigen::MatrixXd out(times.size(), n);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const TrajectorySpec& ph = spec.phases[spec.phase_of(t)];
    std::vector<int> g = ph.group_of_item();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double v = ph.pieces[g[i]].curve.eval(t);
      out(k, i) = v;
      sum += v;
    }
    out.row(k) /= sum;
  }
  return out;
}

}  // namespace dynrank
