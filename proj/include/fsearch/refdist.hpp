#ifndef FSEARCH_REFDIST_HPP
#define FSEARCH_REFDIST_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fsearch/quadrature.hpp"

namespace fsearch {

inline constexpr double kPsiClamp = 1.0 - 1e-12;

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kSqrt2 = 1.4142135623730950488016887;

inline double norm_pdf(double c) { return kInvSqrt2Pi * std::exp(-0.5 * c * c); }
inline double norm_cdf(double c) { return 0.5 * std::erfc(-c / kSqrt2); }

// Regularized incomplete beta I_x(a,b) by Lentz continued fraction.
inline double ibeta_cf(double a, double b, double x) {
  constexpr double eps = 1e-15;
  constexpr double fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("ibeta continued fraction did not converge");
}

inline double ibeta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(lnfront);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * ibeta_cf(a, b, x) / a;
  return 1.0 - front * ibeta_cf(b, a, 1.0 - x) / b;
}

// CDF of the (unscaled) t distribution with dof degrees of freedom.
inline double t_cdf(double dof, double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  const double p = 0.5 * ibeta_reg(0.5 * dof, 0.5, dof / (dof + x * x));
  return x > 0 ? 1.0 - p : p;
}

inline double t_pdf(double dof, double x) {
  const double lc = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                    0.5 * std::log(dof * M_PI);
  return std::exp(lc - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

// Bisection with Newton polish is plenty here; quantiles are evaluated on
// small grids only.
template <class F>
double bisect(const F& f, double lo, double hi, double tol) {
  double flo = f(lo);
  if (flo > 0.0) return lo;
  if (f(hi) < 0.0) return hi;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

enum class DistKind { StandardNormal, ScaledT };

// Per-psi scalar bundle: truncation point, truncated moments, bias
// correction and contraction coefficient.
struct PsiFunctions {
  double psi = 0.0;
  double c = 0.0;            // abs-quantile c_psi
  double tau = 0.0;          // truncated second moment
  double kappa = 0.0;        // truncated fourth moment (NaN if unsupported)
  double varsigma_sq = 0.0;  // tau/psi
  double rho = 0.0;          // 2 c f(c) / psi
  bool clamped = false;      // psi was clamped away from 1
};

// Reference error law: standard normal or t(d) rescaled to unit variance.
class ReferenceDistribution {
 public:
  static ReferenceDistribution normal() {
    return ReferenceDistribution(DistKind::StandardNormal, 0.0);
  }
  static ReferenceDistribution scaled_t(double dof) {
    if (!(dof > 2.0))
      throw std::domain_error("scaled t requires dof > 2 for unit variance");
    return ReferenceDistribution(DistKind::ScaledT, dof);
  }

  DistKind kind() const { return kind_; }
  double dof() const { return dof_; }
  bool supports_kappa() const {
    return kind_ == DistKind::StandardNormal || dof_ > 4.0;
  }

  double pdf(double c) const {
    if (kind_ == DistKind::StandardNormal) return detail::norm_pdf(c);
    return delta_ * detail::t_pdf(dof_, c * delta_);
  }

  double cdf(double c) const {
    if (kind_ == DistKind::StandardNormal) return detail::norm_cdf(c);
    return detail::t_cdf(dof_, c * delta_);
  }

  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0))
      throw std::domain_error("quantile: p must lie in (0,1)");
    if (p == 0.5) return 0.0;
    // Expanding bracket, bisection on the CDF, then Newton polish.
    double hi = 1.0;
    while (cdf(hi) < p && hi < 1e300) hi *= 2.0;
    double lo = -1.0;
    while (cdf(lo) > p && lo > -1e300) lo *= 2.0;
    double x = detail::bisect([&](double x) { return cdf(x) - p; }, lo, hi, 1e-10);
    for (int it = 0; it < 3; ++it) {
      const double f = pdf(x);
      if (f <= 0.0) break;
      x -= (cdf(x) - p) / f;
    }
    return x;
  }

  // G(c) = P(|eps|/sigma <= c) = 2F(c) - 1, computed without cancellation
  // near c = 0.
  double abs_cdf(double c) const {
    if (kind_ == DistKind::StandardNormal) return std::erf(c / detail::kSqrt2);
    return 2.0 * detail::t_cdf(dof_, c * delta_) - 1.0;
  }

  // c_psi = F^{-1}{(1+psi)/2}, the psi-quantile of |eps|/sigma.
  double abs_quantile(double psi) const {
    if (psi < 0.0 || psi >= 1.0)
      throw std::domain_error("abs_quantile: psi must lie in [0,1)");
    if (psi == 0.0) return 0.0;
    return quantile(0.5 * (1.0 + psi));
  }

  struct Moments {
    double tau;
    double kappa;
  };

  // Closed-form truncated second and fourth moments over |u| <= c_psi.
  Moments truncated_moments(double psi) const {
    if (psi < 0.0 || psi >= 1.0 + 1e-15)
      throw std::domain_error("truncated_moments: psi must lie in [0,1)");
    if (psi > kPsiClamp) psi = kPsiClamp;
    if (psi == 0.0) return {0.0, 0.0};
    const double c = abs_quantile(psi);
    // Evaluate the closed forms at psi recomputed from c. Using the input
    // psi against functions of c loses all precision for small psi, where
    // tau is a near-cancellation of the two terms.
    psi = abs_cdf(c);
    if (kind_ == DistKind::StandardNormal) {
      const double phi = detail::norm_pdf(c);
      return {psi - 2.0 * c * phi, 3.0 * psi - 2.0 * (c * c * c + 3.0 * c) * phi};
    }
    const double d = dof_;
    const double G = [&](double dof, double x) {
      return 2.0 * detail::t_cdf(dof, x) - 1.0;
    }(d - 2.0, c);
    const double tau = (d - 1.0) * G - (d - 2.0) * psi;
    double kappa = std::numeric_limits<double>::quiet_NaN();
    if (d > 4.0) {
      const double delta_dm2 = std::sqrt((d - 2.0) / (d - 4.0));
      const double Gm4 = 2.0 * detail::t_cdf(d - 4.0, c / delta_dm2) - 1.0;
      kappa = (d - 2.0) * (d - 2.0) *
              ((d - 1.0) * (d - 3.0) / ((d - 2.0) * (d - 4.0)) * Gm4 -
               2.0 * (d - 1.0) / (d - 2.0) * G + psi);
    }
    return {tau, kappa};
  }

  double tau(double psi) const { return truncated_moments(psi).tau; }

  double kappa(double psi) const {
    const Moments m = truncated_moments(psi);
    if (std::isnan(m.kappa))
      throw std::domain_error(
          "kappa undefined for scaled t with dof <= 4 (dof = " +
          std::to_string(dof_) + ")");
    return m.kappa;
  }

  // Quadrature oracle for the truncated moments; independent of the
  // closed forms above.
  double truncated_moment_numeric(double psi, int order,
                                  double abstol = 1e-12) const {
    if (order != 2 && order != 4)
      throw std::domain_error("truncated_moment_numeric: order must be 2 or 4");
    if (psi < 0.0 || psi >= 1.0)
      throw std::domain_error("truncated_moment_numeric: psi must lie in [0,1)");
    if (psi == 0.0) return 0.0;
    const double c = abs_quantile(psi);
    const auto integrand = [this, order](double u) {
      const double u2 = u * u;
      return (order == 2 ? u2 : u2 * u2) * pdf(u);
    };
    return 2.0 * integrate(integrand, 0.0, c, 0.5 * abstol);
  }

  PsiFunctions psi_functions(double psi) const {
    if (!(psi > 0.0 && psi < 1.0))
      throw std::domain_error("psi_functions: psi must lie in (0,1)");
    PsiFunctions out;
    out.clamped = psi > kPsiClamp;
    out.psi = out.clamped ? kPsiClamp : psi;
    out.c = abs_quantile(out.psi);
    const Moments m = truncated_moments(out.psi);
    out.tau = m.tau;
    out.kappa = m.kappa;
    out.varsigma_sq = m.tau / out.psi;
    out.rho = 2.0 * out.c * pdf(out.c) / out.psi;
    return out;
  }

 private:
  ReferenceDistribution(DistKind kind, double dof)
      : kind_(kind), dof_(dof),
        delta_(kind == DistKind::ScaledT ? std::sqrt(dof / (dof - 2.0)) : 1.0) {}

  DistKind kind_;
  double dof_;    // only meaningful for ScaledT
  double delta_;  // sqrt(d/(d-2)), unit-variance rescaling
};

}  // namespace fsearch

#endif
