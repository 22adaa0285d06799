#include <doctest.h>

#include <cmath>

#include "fsearch/asymptotics.hpp"
#include "fsearch/refdist.hpp"

using namespace fsearch;

TEST_CASE("var_G") {
  CHECK(var_G(0.5) == 0.25);
  CHECK(var_G(0.0) == 0.0);
  CHECK(var_G(1.0) == 0.0);
  for (double psi : {0.1, 0.25, 0.4})
    CHECK(var_G(psi) == doctest::Approx(var_G(1.0 - psi)).epsilon(1e-15));
}

TEST_CASE("var_L positivity and normal limit") {
  const auto n = ReferenceDistribution::normal();
  for (double psi = 0.05; psi < 1.0; psi += 0.05) CHECK(var_L(n, psi) > 0.0);
  // as psi -> 1 the limit is kappa - tau^2 = 3 - 1 = 2
  CHECK(var_L(n, 1.0 - 1e-10) == doctest::Approx(2.0).epsilon(1e-4));
  CHECK_THROWS_AS(var_L(ReferenceDistribution::scaled_t(4.0), 0.5),
                  std::domain_error);
}

TEST_CASE("cov_GL strictly negative, vanishing at 1") {
  const auto n = ReferenceDistribution::normal();
  const auto t6 = ReferenceDistribution::scaled_t(6.0);
  for (double psi = 0.05; psi < 1.0; psi += 0.05) {
    CHECK(cov_GL(n, psi) < 0.0);
    CHECK(cov_GL(t6, psi) < 0.0);
  }
  CHECK(std::abs(cov_GL(n, 1.0 - 1e-10)) < 1e-5);
}

TEST_CASE("variance formulas agree with quadrature moments") {
  // plug quadrature moments into Eq-style formulas, compare with closed forms
  const auto n = ReferenceDistribution::normal();
  for (double psi : {0.2, 0.5, 0.8}) {
    const double c = n.abs_quantile(psi);
    const double tau = n.truncated_moment_numeric(psi, 2);
    const double kappa = n.truncated_moment_numeric(psi, 4);
    const double c2 = c * c;
    const double vL =
        (kappa - tau * tau + c2 * (1.0 - psi) * (c2 * psi - 2.0 * tau)) /
        (tau * tau);
    const double cGL = (tau - c2 * psi) * (1.0 - psi) / tau;
    CHECK(var_L(n, psi) == doctest::Approx(vL).epsilon(1e-9));
    CHECK(cov_GL(n, psi) == doctest::Approx(cGL).epsilon(1e-9));
  }
}

TEST_CASE("omega: estimating the variance reduces uncertainty") {
  const auto n = ReferenceDistribution::normal();
  for (double psi = 0.05; psi <= 0.95; psi += 0.05) {
    const double c = n.abs_quantile(psi);
    const double f = n.pdf(c);
    const double om = omega(n, psi);
    CHECK(std::isfinite(om));
    CHECK(om > 0.0);
    CHECK(om < var_G(psi) / (4.0 * f * f));
  }
}

TEST_CASE("omega assembled as a quadratic form") {
  const auto n = ReferenceDistribution::normal();
  for (double psi : {0.1, 0.5, 0.9}) {
    const double c = n.abs_quantile(psi);
    const double f = n.pdf(c);
    const double w = c * f;
    Eigen::Matrix2d cov;
    cov << var_G(psi), cov_GL(n, psi), cov_GL(n, psi), var_L(n, psi);
    const Eigen::Vector2d v(1.0, w);
    const double om2 = v.dot(cov * v) / (4.0 * f * f);
    CHECK(omega(n, psi) == doctest::Approx(om2).epsilon(1e-12));
  }
}

TEST_CASE("band: mean curves and statistic relations") {
  const auto n = ReferenceDistribution::normal();
  const std::vector<double> grid = {0.01, 0.3, 0.5, 0.7};
  const BandCurve hat = band(n, ForwardStatistic::ZOverSigmaHat, grid, 128, 0.90);
  const BandCurve corr = band(n, ForwardStatistic::ZOverSigmaCorr, grid, 128, 0.90);

  // psi -> 0: mean of z/sigma-hat approaches sqrt(3)
  CHECK(hat.mean[0] == doctest::Approx(std::sqrt(3.0)).epsilon(0.02));

  // the two parameterisations differ by the factor 1/varsigma
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double vs = std::sqrt(n.psi_functions(grid[k]).varsigma_sq);
    CHECK(hat.mean[k] == doctest::Approx(corr.mean[k] / vs).epsilon(1e-12));
    CHECK(hat.upper[k] - hat.lower[k] ==
          doctest::Approx((corr.upper[k] - corr.lower[k]) / vs).epsilon(1e-12));
    CHECK(hat.lower[k] <= hat.mean[k]);
    CHECK(hat.mean[k] <= hat.upper[k]);
  }
}

TEST_CASE("band width scales as n^{-1/2}") {
  const auto t8 = ReferenceDistribution::scaled_t(8.0);
  const std::vector<double> grid = default_psi_grid(0.1, 0.9, 9);
  for (auto st : {ForwardStatistic::ZOverSigmaHat, ForwardStatistic::ZOverSigmaCorr,
                  ForwardStatistic::ZOverKnownSigma, ForwardStatistic::BetaComponent}) {
    const BandCurve a = band(t8, st, grid, 100, 0.90);
    const BandCurve b = band(t8, st, grid, 400, 0.90);
    for (std::size_t k = 0; k < grid.size(); ++k)
      CHECK(a.upper[k] - a.lower[k] ==
            doctest::Approx(2.0 * (b.upper[k] - b.lower[k])).epsilon(1e-12));
  }
}

TEST_CASE("band rejects grids touching the endpoints") {
  const auto n = ReferenceDistribution::normal();
  CHECK_THROWS_AS(band(n, ForwardStatistic::ZOverSigmaHat, {0.5, 1.0}, 100, 0.9),
                  std::domain_error);
  CHECK_THROWS_AS(band(n, ForwardStatistic::ZOverSigmaHat, {0.0, 0.5}, 100, 0.9),
                  std::domain_error);
  CHECK_THROWS_AS(band(n, ForwardStatistic::ZOverSigmaHat, {0.5}, 100, 1.5),
                  std::domain_error);
}

TEST_CASE("beta asymptotic variance") {
  const auto n = ReferenceDistribution::normal();
  // psi -> 1 recovers the full-sample OLS variance sigma^2 Sigma^{-1}
  const Eigen::MatrixXd Sigma = Eigen::MatrixXd::Identity(1, 1);
  const double sigma = 1.7;
  const Eigen::MatrixXd v = beta_asymptotic_variance(n, 1.0 - 1e-10, sigma, Sigma);
  CHECK(v(0, 0) == doctest::Approx(sigma * sigma).epsilon(1e-4));

  // monotone decreasing in psi on [0.5, 0.99]
  double prev = std::numeric_limits<double>::infinity();
  for (double psi = 0.5; psi <= 0.99; psi += 0.01) {
    const double cur = beta_asymptotic_variance(n, psi, 1.0, Sigma)(0, 0);
    CHECK(cur < prev);
    prev = cur;
  }

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(beta_asymptotic_variance(n, 0.5, 1.0, singular),
                  std::domain_error);
}
