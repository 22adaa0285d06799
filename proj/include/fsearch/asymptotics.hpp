#ifndef FSEARCH_ASYMPTOTICS_HPP
#define FSEARCH_ASYMPTOTICS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsearch/refdist.hpp"

namespace fsearch {

// Var{G(c_psi)} = psi (1 - psi).
inline double var_G(double psi) {
  if (psi < 0.0 || psi > 1.0)
    throw std::domain_error("var_G: psi must lie in [0,1]");
  return psi * (1.0 - psi);
}

// Var{L(c_psi)} = (kappa - tau^2 + c^2 (1-psi)(c^2 psi - 2 tau)) / tau^2.
inline double var_L(const ReferenceDistribution& dist, double psi) {
  if (!dist.supports_kappa())
    throw std::domain_error("var_L needs the truncated fourth moment (dof > 4)");
  const PsiFunctions pf = dist.psi_functions(psi);
  const double c2 = pf.c * pf.c;
  return (pf.kappa - pf.tau * pf.tau +
          c2 * (1.0 - pf.psi) * (c2 * pf.psi - 2.0 * pf.tau)) /
         (pf.tau * pf.tau);
}

// Cov{G(c_psi), L(c_psi)} = (tau - c^2 psi)(1 - psi) / tau, negative.
inline double cov_GL(const ReferenceDistribution& dist, double psi) {
  const PsiFunctions pf = dist.psi_functions(psi);
  return (pf.tau - pf.c * pf.c * pf.psi) * (1.0 - pf.psi) / pf.tau;
}

// Pointwise asymptotic variance of n^{1/2}(z-hat/sigma-hat-corr - c_psi):
// contributions from the empirical process, the variance estimator, and
// their covariance.
inline double omega(const ReferenceDistribution& dist, double psi) {
  const PsiFunctions pf = dist.psi_functions(psi);
  const double f = dist.pdf(pf.c);
  const double cf = pf.c * f;
  return (var_G(pf.psi) + 2.0 * cf * cov_GL(dist, psi) +
          cf * cf * var_L(dist, psi)) /
         (4.0 * f * f);
}

enum class ForwardStatistic {
  ZOverSigmaHat,    // z-hat / sigma-hat, mean c/varsigma
  ZOverSigmaCorr,   // z-hat / sigma-hat-corr, mean c
  ZOverKnownSigma,  // z-hat / (sigma varsigma), known scale
  BetaComponent     // centered coefficient estimate
};

struct BandCurve {
  std::vector<double> psi_grid;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  ForwardStatistic statistic = ForwardStatistic::ZOverSigmaHat;
  int n = 0;
  double level = 0.90;
};

inline std::vector<double> default_psi_grid(double lo = 0.05, double hi = 0.95,
                                            int points = 181) {
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = lo + (hi - lo) * i / static_cast<double>(points - 1);
  return g;
}

// Pointwise band for the forward plot of `statistic` at sample size n.
// `level` is the two-sided coverage: edges sit at the (1-level)/2 and
// (1+level)/2 asymptotic quantiles.
inline BandCurve band(const ReferenceDistribution& dist, ForwardStatistic statistic,
                      const std::vector<double>& psi_grid, int n, double level) {
  if (n < 1) throw std::domain_error("band: n must be positive");
  if (!(level > 0.0 && level < 1.0))
    throw std::domain_error("band: level must lie in (0,1)");
  for (double psi : psi_grid)
    if (!(psi > 0.0 && psi < 1.0))
      throw std::domain_error("band: psi grid must lie strictly inside (0,1), got " +
                              std::to_string(psi));

  const double zq = ReferenceDistribution::normal().quantile(0.5 * (1.0 + level));
  const double sqrtn = std::sqrt(static_cast<double>(n));

  BandCurve out;
  out.psi_grid = psi_grid;
  out.statistic = statistic;
  out.n = n;
  out.level = level;
  out.mean.reserve(psi_grid.size());
  out.lower.reserve(psi_grid.size());
  out.upper.reserve(psi_grid.size());

  for (double psi : psi_grid) {
    const PsiFunctions pf = dist.psi_functions(psi);
    const double varsigma = std::sqrt(pf.varsigma_sq);
    double mean = 0.0, halfwidth = 0.0;
    switch (statistic) {
      case ForwardStatistic::ZOverSigmaHat:
        mean = pf.c / varsigma;
        halfwidth = zq * std::sqrt(omega(dist, psi)) / (varsigma * sqrtn);
        break;
      case ForwardStatistic::ZOverSigmaCorr:
        mean = pf.c;
        halfwidth = zq * std::sqrt(omega(dist, psi)) / sqrtn;
        break;
      case ForwardStatistic::ZOverKnownSigma: {
        const double f = dist.pdf(pf.c);
        mean = pf.c / varsigma;
        halfwidth = zq * std::sqrt(var_G(pf.psi)) / (2.0 * f * varsigma * sqrtn);
        break;
      }
      case ForwardStatistic::BetaComponent: {
        const double denom = pf.psi - 2.0 * pf.c * dist.pdf(pf.c);
        mean = 0.0;
        halfwidth = zq * std::sqrt(pf.tau) / (std::abs(denom) * sqrtn);
        break;
      }
    }
    out.mean.push_back(mean);
    out.lower.push_back(mean - halfwidth);
    out.upper.push_back(mean + halfwidth);
  }
  return out;
}

// Limit covariance of n^{1/2}(beta-hat_psi - beta) for stationary
// regressors: tau sigma^2 / (psi - 2 c f(c))^2 * Sigma^{-1}.
inline Eigen::MatrixXd beta_asymptotic_variance(const ReferenceDistribution& dist,
                                                double psi, double sigma,
                                                const Eigen::MatrixXd& Sigma) {
  const PsiFunctions pf = dist.psi_functions(psi);
  const double denom = pf.psi - 2.0 * pf.c * dist.pdf(pf.c);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Sigma);
  const Eigen::VectorXd diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff()))
    throw std::domain_error("beta_asymptotic_variance: Sigma must be positive definite");
  const Eigen::MatrixXd inv =
      ldlt.solve(Eigen::MatrixXd::Identity(Sigma.rows(), Sigma.cols()));
  return pf.tau * sigma * sigma / (denom * denom) * inv;
}

}  // namespace fsearch

#endif
