#ifndef FSEARCH_FORWARD_SEARCH_HPP
#define FSEARCH_FORWARD_SEARCH_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fsearch/dataset.hpp"
#include "fsearch/refdist.hpp"
#include "fsearch/rng.hpp"

namespace fsearch {

struct RankDeficiencyError : std::runtime_error {
  int subset_size;
  explicit RankDeficiencyError(int m)
      : std::runtime_error("singular Gram matrix on subset of size " +
                           std::to_string(m)),
        subset_size(m) {}
};

struct InitializationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LsFit {
  Eigen::VectorXd beta;
  double sigma_sq = 0.0;
};

// Least squares on the rows in `subset`. The variance divisor is |S|
// unless dof_correct is set, in which case it is |S| - dim x.
inline LsFit least_squares(const Dataset& data, const std::vector<int>& subset,
                           bool dof_correct = false) {
  const int m = static_cast<int>(subset.size());
  const int p = data.dim_x();
  if (m < p) throw RankDeficiencyError(m);

  Eigen::MatrixXd Xs(m, p);
  Eigen::VectorXd ys(m);
  for (int k = 0; k < m; ++k) {
    Xs.row(k) = data.X.row(subset[k]);
    ys(k) = data.y(subset[k]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(1e-12);
  if (qr.rank() < p) throw RankDeficiencyError(m);

  LsFit fit;
  fit.beta = qr.solve(ys);
  const double rss = (ys - Xs * fit.beta).squaredNorm();
  const int div = dof_correct ? m - p : m;
  if (div <= 0) throw RankDeficiencyError(m);
  fit.sigma_sq = rss / div;
  return fit;
}

enum class InitialMethod { LMS, FullLS };

// Least median of squares over T random elemental subsets (exact fits on
// dim x points), or plain full-sample least squares.
inline Eigen::VectorXd initial_estimate(const Dataset& data, InitialMethod method,
                                        std::uint64_t seed, int trials = 500) {
  if (method == InitialMethod::FullLS) {
    std::vector<int> all(data.n());
    std::iota(all.begin(), all.end(), 0);
    return least_squares(data, all).beta;
  }

  const int n = data.n();
  const int p = data.dim_x();
  Rng rng = make_rng(seed, 0x1135u);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Eigen::VectorXd best;
  double best_med = std::numeric_limits<double>::infinity();
  std::vector<double> sq(n);
  for (int t = 0; t < trials; ++t) {
    std::vector<int> idx;
    while (static_cast<int>(idx.size()) < p) {
      const int i = pick(rng);
      if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
    }
    Eigen::MatrixXd Xe(p, p);
    Eigen::VectorXd ye(p);
    for (int k = 0; k < p; ++k) {
      Xe.row(k) = data.X.row(idx[k]);
      ye(k) = data.y(idx[k]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xe);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) continue;
    const Eigen::VectorXd beta = qr.solve(ye);
    Eigen::VectorXd r = data.y - data.X * beta;
    for (int i = 0; i < n; ++i) sq[i] = r(i) * r(i);
    std::nth_element(sq.begin(), sq.begin() + n / 2, sq.end());
    const double med = sq[n / 2];
    if (med < best_med) {
      best_med = med;
      best = beta;
    }
  }
  if (best.size() == 0)
    throw InitializationError("all elemental subsets were singular");
  return best;
}

// One step of the search at subset size m: statistics computed under the
// step-m coefficient estimate.
struct ForwardStep {
  int m = 0;
  std::vector<int> subset;   // S(m), sorted ascending
  Eigen::VectorXd beta;      // beta-hat(m)
  double sigma_sq = 0.0;     // (sigma-hat(m))^2
  double z = 0.0;            // forward residual z-hat(m)
  double d = 0.0;            // deletion residual d-hat(m)
};

struct SearchConfig {
  int m0 = -1;  // default int(n/2)
  InitialMethod initial = InitialMethod::FullLS;
  std::uint64_t seed = 0;
  bool dof_correct = false;
  int lms_trials = 500;
  // When set, no coefficients are estimated: residuals are always taken
  // against this vector (the known-beta regime of the theory).
  std::optional<Eigen::VectorXd> fixed_beta;
};

struct ForwardPath {
  std::vector<ForwardStep> steps;  // m = m0 .. n-1
  Eigen::VectorXd full_beta;       // full-sample least squares
  double full_sigma_sq = 0.0;
  int n = 0;
  int dim_x = 0;
  SearchConfig config;

  int m0() const { return steps.empty() ? 0 : steps.front().m; }

  // Eq-9 style right-continuous embedding over psi = m/n; 0 below m0/n.
  const ForwardStep* step_at(double psi) const {
    if (steps.empty()) return nullptr;
    int m = static_cast<int>(n * psi);
    if (m < steps.front().m) return nullptr;
    if (m > steps.back().m) m = steps.back().m;
    return &steps[m - steps.front().m];
  }
  double z_at(double psi) const {
    const ForwardStep* s = step_at(psi);
    return s ? s->z : 0.0;
  }
};

namespace detail {

// Indices of residual magnitudes in increasing order; ties broken by
// original observation index.
inline std::vector<int> order_by_abs(const Eigen::VectorXd& absresid) {
  std::vector<int> ord(absresid.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) {
    return absresid(a) < absresid(b);
  });
  return ord;
}

inline std::vector<int> sorted_prefix(const std::vector<int>& ord, int k) {
  std::vector<int> s(ord.begin(), ord.begin() + k);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace detail

struct StepOutcome {
  ForwardStep step;
  std::vector<int> next_subset;  // S(m+1)
  LsFit next_fit;                // least squares on S(m+1)
};

// Executes Algorithm steps 1-4 at size m given beta-hat(m). If subset_m is
// null, S(m) is taken as the m smallest residuals under beta_m itself (in
// which case d = z by construction).
inline StepOutcome forward_step(const Dataset& data, const Eigen::VectorXd& beta_m,
                                double sigma_sq_m, int m,
                                const std::vector<int>* subset_m = nullptr,
                                bool dof_correct = false, bool refit = true) {
  const int n = data.n();
  if (m < data.dim_x() || m >= n)
    throw std::domain_error("forward_step: need dim x <= m < n");

  const Eigen::VectorXd absresid = (data.y - data.X * beta_m).cwiseAbs();
  const std::vector<int> ord = detail::order_by_abs(absresid);

  StepOutcome out;
  out.step.m = m;
  out.step.beta = beta_m;
  out.step.sigma_sq = sigma_sq_m;
  out.step.z = absresid(ord[m]);  // (m+1)-st smallest
  out.step.subset = subset_m ? *subset_m : detail::sorted_prefix(ord, m);

  std::vector<char> inS(n, 0);
  for (int i : out.step.subset) inS[i] = 1;
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (!inS[i] && absresid(i) < d) d = absresid(i);
  out.step.d = d;

  out.next_subset = detail::sorted_prefix(ord, m + 1);
  if (refit) out.next_fit = least_squares(data, out.next_subset, dof_correct);
  return out;
}

inline ForwardPath run_forward_search(const Dataset& data, SearchConfig config) {
  const int n = data.n();
  const int p = data.dim_x();
  if (config.m0 < 0) config.m0 = n / 2;
  if (config.m0 < p + 1 || config.m0 >= n)
    throw std::domain_error("m0 must satisfy dim x + 1 <= m0 < n");

  const bool fixed = config.fixed_beta.has_value();
  Eigen::VectorXd beta0 =
      fixed ? *config.fixed_beta
            : initial_estimate(data, config.initial, config.seed, config.lms_trials);

  // S(m0): the m0 smallest absolute residuals under the initial estimate.
  const Eigen::VectorXd absresid0 = (data.y - data.X * beta0).cwiseAbs();
  std::vector<int> subset = detail::sorted_prefix(detail::order_by_abs(absresid0),
                                                  config.m0);
  LsFit fit;
  if (fixed) {
    fit.beta = beta0;
    double rss = 0.0;
    for (int i : subset) rss += absresid0(i) * absresid0(i);
    fit.sigma_sq = rss / static_cast<int>(subset.size());
  } else {
    fit = least_squares(data, subset, config.dof_correct);
  }

  ForwardPath path;
  path.n = n;
  path.dim_x = p;
  path.config = config;
  path.steps.reserve(n - config.m0);
  for (int m = config.m0; m < n; ++m) {
    StepOutcome out;
    try {
      out = forward_step(data, fit.beta, fit.sigma_sq, m, &subset,
                         config.dof_correct, !fixed);
    } catch (const RankDeficiencyError&) {
      throw RankDeficiencyError(m + 1);
    }
    path.steps.push_back(std::move(out.step));
    subset = std::move(out.next_subset);
    if (fixed) {
      double rss = 0.0;
      const Eigen::VectorXd ar = (data.y - data.X * fit.beta).cwiseAbs();
      for (int i : subset) rss += ar(i) * ar(i);
      fit.sigma_sq = rss / static_cast<int>(subset.size());
    } else {
      fit = out.next_fit;
    }
  }
  path.full_beta = fit.beta;
  path.full_sigma_sq = fit.sigma_sq;
  return path;
}

// (sigma-hat-corr(m))^2 = (sigma-hat(m))^2 / varsigma^2_{m/n} per step.
inline std::vector<double> bias_corrected_sigma_sq(const ForwardPath& path,
                                                   const ReferenceDistribution& dist) {
  std::vector<double> out;
  out.reserve(path.steps.size());
  for (const ForwardStep& s : path.steps) {
    const double psi = static_cast<double>(s.m) / path.n;
    out.push_back(s.sigma_sq / dist.psi_functions(psi).varsigma_sq);
  }
  return out;
}

// Residuals scaled by sqrt(1 -/+ h_i) for points in/out of S(m).
inline std::vector<double> leverage_scaled_residuals(const Dataset& data,
                                                     const ForwardStep& step) {
  const int n = data.n();
  const int p = data.dim_x();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  for (int i : step.subset) gram += data.X.row(i).transpose() * data.X.row(i);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff()))
    throw RankDeficiencyError(static_cast<int>(step.subset.size()));

  std::vector<char> inS(n, 0);
  for (int i : step.subset) inS[i] = 1;
  const Eigen::VectorXd absresid = (data.y - data.X * step.beta).cwiseAbs();
  const double sigma = std::sqrt(step.sigma_sq);

  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = data.X.row(i).transpose();
    const double h = xi.dot(ldlt.solve(xi));
    if (inS[i]) {
      if (h >= 1.0)
        throw std::runtime_error("leverage factor >= 1 for in-subset point " +
                                 std::to_string(i));
      out[i] = absresid(i) / (sigma * std::sqrt(1.0 - h));
    } else {
      out[i] = absresid(i) / (sigma * std::sqrt(1.0 + h));
    }
  }
  return out;
}

}  // namespace fsearch

#endif
