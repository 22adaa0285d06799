#ifndef FSEARCH_QUADRATURE_HPP
#define FSEARCH_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace fsearch {

struct QuadratureError : std::runtime_error {
  double achieved;
  QuadratureError(double err, double tol)
      : std::runtime_error("adaptive quadrature did not converge: achieved " +
                           std::to_string(err) + ", requested " +
                           std::to_string(tol)),
        achieved(err) {}
};

namespace detail {

// 15-point Gauss-Kronrod rule on [-1,1]; the embedded 7-point Gauss rule
// supplies the error estimate.
inline constexpr double gk15_nodes[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};
inline constexpr double gk15_wk[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};
inline constexpr double gk15_wg[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

template <class F>
void gk15(const F& f, double a, double b, double& result, double& err) {
  const double h = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);

  const double f0 = f(mid);
  double resk = gk15_wk[0] * f0;
  double resg = gk15_wg[0] * f0;
  for (int j = 1; j < 8; ++j) {
    const double x = h * gk15_nodes[j];
    const double fsum = f(mid - x) + f(mid + x);
    resk += gk15_wk[j] * fsum;
    if (j % 2 == 0) resg += gk15_wg[j / 2] * fsum;
  }
  result = resk * h;
  err = std::abs((resk - resg) * h);
}

template <class F>
double adapt(const F& f, double a, double b, double tol, int depth) {
  double result, err;
  gk15(f, a, b, result, err);
  if (err <= tol || b - a < 1e-14 * (1.0 + std::abs(a))) {
    if (err > tol && depth <= 0) throw QuadratureError(err, tol);
    return result;
  }
  if (depth <= 0) throw QuadratureError(err, tol);
  const double mid = 0.5 * (a + b);
  return adapt(f, a, mid, 0.5 * tol, depth - 1) +
         adapt(f, mid, b, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive quadrature of f over [a,b] to absolute tolerance abstol.
template <class F>
double integrate(const F& f, double a, double b, double abstol = 1e-12) {
  if (a == b) return 0.0;
  return detail::adapt(f, a, b, abstol, 48);
}

}  // namespace fsearch

#endif
