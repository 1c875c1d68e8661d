#include "dynrank/uncertainty.hpp"

#include <cmath>

#include "dynrank/errors.hpp"

namespace dynrank {

Eigen::MatrixXd group_inverse(const Eigen::MatrixXd& A, double rank_tol) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw InvalidArgument("group_inverse: square matrix required");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(rank_tol);
  const int r = static_cast<int>(qr.rank());
  if (r == 0) return Eigen::MatrixXd::Zero(n, n);

  // full-rank factorization A = C F from the pivoted QR
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, r);
  Eigen::MatrixXd R = qr.matrixR().topRows(r).triangularView<Eigen::Upper>();
  Eigen::MatrixXd F = R * qr.colsPermutation().transpose();

  Eigen::MatrixXd FC = F * Q;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(FC * FC);
  lu.setThreshold(rank_tol);
  if (!lu.isInvertible())
    throw InvalidArgument("group_inverse: matrix has index greater than 1 (rank(A^2) < rank(A))");
  return Q * lu.solve(F);
}

AsymptoticCovariance theorem2_covariance(const Eigen::VectorXd& scores_g,
                                         const Eigen::VectorXd& r, double kernel_l2) {
  const int B = static_cast<int>(scores_g.size());
  if (B < 2) throw InvalidArgument("theorem2_covariance: need at least 2 groups");
  if (r.size() != B)
    throw InvalidArgument("theorem2_covariance: group fractions must match scores");
  if ((scores_g.array() <= 0.0).any() || (r.array() <= 0.0).any())
    throw InvalidArgument("theorem2_covariance: scores and fractions must be positive");
  if (std::abs(scores_g.sum() - 1.0) > 1e-8 || std::abs(r.sum() - 1.0) > 1e-8)
    throw InvalidArgument("theorem2_covariance: scores and fractions must sum to 1");
  if (!(kernel_l2 > 0.0))
    throw InvalidArgument("theorem2_covariance: kernel L2 integral must be positive");

  // population grouped chain with the same 1/B normalization the plug-in
  // estimator uses. The stationary vector does not care about the 1/B, but
  // the group inverse scales with it, and the delta method below must
  // perturb exactly the chain the estimator builds or the sensitivity picks
  // up a spurious factor of B.
  Eigen::MatrixXd Pg(B, B);
  for (int k = 0; k < B; ++k) {
    double off = 0.0;
    for (int l = 0; l < B; ++l) {
      if (l == k) continue;
      double p = scores_g(l) / (scores_g(k) + scores_g(l)) / B;
      Pg(k, l) = p;
      off += p;
    }
    Pg(k, k) = 1.0 - off;
  }

  Eigen::MatrixXd Ash = group_inverse(Eigen::MatrixXd::Identity(B, B) - Pg);

  const int npairs = B * (B - 1) / 2;
  AsymptoticCovariance out;
  out.lambda = Eigen::MatrixXd::Zero(npairs, npairs);
  out.gamma = Eigen::MatrixXd::Zero(B, npairs);
  int idx = 0;
  for (int k = 0; k < B; ++k) {
    for (int l = k + 1; l < B; ++l, ++idx) {
      const double sum_kl = scores_g(k) + scores_g(l);
      out.lambda(idx, idx) =
          scores_g(k) * scores_g(l) / (sum_kl * sum_kl) * kernel_l2 / (r(k) * r(l));
      for (int i = 0; i < B; ++i)
        out.gamma(i, idx) = (Ash(l, i) - Ash(k, i)) * sum_kl / B;
    }
  }
  out.sigma = out.gamma * out.lambda * out.gamma.transpose();
  return out;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("normal_quantile: p must lie in (0, 1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= phigh) {
    double q = p - 0.5, s = q * q;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * q /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley refinement against the exact CDF
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

ConfidenceBand confidence_band(const GroupedScores& grouped, const KernelSpec& spec,
                               int n, double M, double level) {
  if (!(level >= 0.0 && level < 1.0))
    throw InvalidArgument("confidence_band: level must lie in [0, 1)");
  if (n < 2 || !(M > 0.0))
    throw InvalidArgument("confidence_band: need n >= 2 and M > 0");
  const int m = grouped.grid.size();
  const int B = static_cast<int>(grouped.group_scores.cols());
  const double z = level == 0.0 ? 0.0 : normal_quantile(0.5 * (1.0 + level));
  const double scale = double(n) * n * M * spec.h;
  const double kl2 = kernel_l2_integral(spec.family);

  std::vector<int> sizes = grouped.partition.group_sizes();
  Eigen::VectorXd r(B);
  for (int g = 0; g < B; ++g) r(g) = double(sizes[g]) / n;

  ConfidenceBand band;
  band.grid = grouped.grid;
  band.level = level;
  band.lower.resize(m, B);
  band.upper.resize(m, B);
  band.halfwidth.resize(m, B);
  for (int k = 0; k < m; ++k) {
    if (B == 1) {
      band.halfwidth.row(k).setZero();
    } else {
      AsymptoticCovariance cov =
          theorem2_covariance(grouped.group_scores.row(k).transpose(), r, kl2);
      for (int g = 0; g < B; ++g)
        band.halfwidth(k, g) = z * std::sqrt(std::max(0.0, cov.sigma(g, g)) / scale);
    }
    band.lower.row(k) = grouped.group_scores.row(k) - band.halfwidth.row(k);
    band.upper.row(k) = grouped.group_scores.row(k) + band.halfwidth.row(k);
  }
  return band;
}

}  // namespace dynrank
