#ifndef FSEARCH_MONTECARLO_HPP
#define FSEARCH_MONTECARLO_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fsearch/asymptotics.hpp"
#include "fsearch/dataset.hpp"
#include "fsearch/forward_search.hpp"
#include "fsearch/refdist.hpp"
#include "fsearch/rng.hpp"

namespace fsearch {

enum class Regime { LocationScale, StationaryAR1, LinearTrend, RandomWalk };

struct DgpSpec {
  Regime regime = Regime::LocationScale;
  double ar_coef = 0.5;  // StationaryAR1 only
  int n = 100;
  Eigen::VectorXd beta;  // dimension must match the regime
  double sigma = 1.0;
  ReferenceDistribution error_dist = ReferenceDistribution::normal();

  int dim_x() const { return regime == Regime::LinearTrend ? 2 : 1; }

  void validate() const {
    if (n < 4) throw std::domain_error("DgpSpec: n too small");
    if (!(sigma > 0.0)) throw std::domain_error("DgpSpec: sigma must be positive");
    if (regime == Regime::StationaryAR1 && !(std::abs(ar_coef) < 1.0))
      throw std::domain_error("DgpSpec: |AR1 coefficient| must be < 1");
    if (beta.size() != dim_x())
      throw std::domain_error("DgpSpec: beta dimension does not match regime");
  }
};

// Draw from the unit-variance reference law.
inline double draw_error(const ReferenceDistribution& dist, Rng& rng) {
  if (dist.kind() == DistKind::StandardNormal) {
    std::normal_distribution<double> nd;
    return nd(rng);
  }
  std::student_t_distribution<double> td(dist.dof());
  return td(rng) / std::sqrt(dist.dof() / (dist.dof() - 2.0));
}

// Normalisation matrix N for the regime, chosen so that
// N' sum x_i x_i' N converges.
inline Eigen::MatrixXd normalization(const DgpSpec& spec) {
  const double n = spec.n;
  switch (spec.regime) {
    case Regime::LinearTrend: {
      Eigen::MatrixXd N = Eigen::MatrixXd::Zero(2, 2);
      N(0, 0) = 1.0 / std::sqrt(n);
      N(1, 1) = std::pow(n, -1.5);
      return N;
    }
    case Regime::RandomWalk:
      return Eigen::MatrixXd::Constant(1, 1, 1.0 / n);
    default:
      return Eigen::MatrixXd::Constant(1, 1, 1.0 / std::sqrt(n));
  }
}

struct GeneratedData {
  Dataset data;
  Eigen::VectorXd errors;  // the eps_i, before adding the signal
};

inline GeneratedData generate(const DgpSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int n = spec.n;
  Rng rng = make_rng(seed, 0xD67Au);

  GeneratedData out;
  out.errors.resize(n);
  for (int i = 0; i < n; ++i)
    out.errors(i) = spec.sigma * draw_error(spec.error_dist, rng);

  Eigen::MatrixXd X(n, spec.dim_x());
  switch (spec.regime) {
    case Regime::LocationScale:
      X.setOnes();
      break;
    case Regime::StationaryAR1: {
      std::normal_distribution<double> nd;
      const double a = spec.ar_coef;
      double x = nd(rng) / std::sqrt(1.0 - a * a);  // stationary start
      for (int i = 0; i < n; ++i) {
        X(i, 0) = x;
        x = a * x + nd(rng);
      }
      break;
    }
    case Regime::LinearTrend:
      for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i + 1;
      }
      break;
    case Regime::RandomWalk: {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        X(i, 0) = s;  // sum of errors before observation i
        s += out.errors(i);
      }
      break;
    }
  }
  out.data.X = std::move(X);
  out.data.y = out.data.X * spec.beta + out.errors;
  out.data.true_beta = spec.beta;
  out.data.true_sigma = spec.sigma;
  return out;
}

// G_n(c_psi) = n^{-1/2} sum { 1(|eps_i/sigma| <= c_psi) - psi }.
inline std::vector<double> empirical_G(const Eigen::VectorXd& errors, double sigma,
                                       const ReferenceDistribution& dist,
                                       const std::vector<double>& psi_grid) {
  const int n = static_cast<int>(errors.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out;
  out.reserve(psi_grid.size());
  for (double psi : psi_grid) {
    const double c = dist.abs_quantile(psi);
    int count = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(errors(i) / sigma) <= c) ++count;
    out.push_back(scale * (count - n * psi));
  }
  return out;
}

// L_n(c_psi), the normalised truncated-variance process.
inline std::vector<double> empirical_L(const Eigen::VectorXd& errors, double sigma,
                                       const ReferenceDistribution& dist,
                                       const std::vector<double>& psi_grid) {
  const int n = static_cast<int>(errors.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> out;
  out.reserve(psi_grid.size());
  for (double psi : psi_grid) {
    const double c = dist.abs_quantile(psi);
    const double tau = dist.truncated_moments(psi).tau;
    const double c2 = c * c;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = errors(i) / sigma;
      const double ind = std::abs(u) <= c ? 1.0 : 0.0;
      sum += (u * u - c2) * ind - (tau - c2 * psi);
    }
    out.push_back(scale * sum / tau);
  }
  return out;
}

// K_n(c_psi) = sum N'x_i eps_i 1(|eps_i/sigma| <= c_psi).
inline std::vector<Eigen::VectorXd> empirical_K(const Eigen::VectorXd& errors,
                                                double sigma, const Eigen::MatrixXd& X,
                                                const Eigen::MatrixXd& N,
                                                const ReferenceDistribution& dist,
                                                const std::vector<double>& psi_grid) {
  const int n = static_cast<int>(errors.size());
  std::vector<Eigen::VectorXd> out;
  out.reserve(psi_grid.size());
  for (double psi : psi_grid) {
    const double c = dist.abs_quantile(psi);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(N.cols());
    for (int i = 0; i < n; ++i)
      if (std::abs(errors(i) / sigma) <= c)
        sum += N.transpose() * X.row(i).transpose() * errors(i);
    out.push_back(std::move(sum));
  }
  return out;
}

struct ProbeStats {
  double mean = 0.0;
  double variance = 0.0;
  std::map<double, double> quantiles;  // probability -> empirical quantile
};

struct ProbeRecord {
  double psi = 0.0;
  ProbeStats z_over_sigma;        // sqrt(n)(z/sigma-hat - c/varsigma)
  ProbeStats z_over_sigma_corr;   // sqrt(n)(z/sigma-hat-corr - c)
  ProbeStats sigma_corr;          // sqrt(n)(sigma-hat-corr^2/sigma^2 - 1)
  ProbeStats z_over_sigma_raw;    // z/sigma-hat, unnormalised
  std::vector<ProbeStats> beta;   // N^{-1}(beta-hat - beta), per component
  double coverage = 0.0;          // of the level-band for z/sigma-hat-corr
};

struct SimulationReport {
  DgpSpec spec;
  SearchConfig fs_config;
  int replicates = 0;
  int failures = 0;
  std::uint64_t master_seed = 0;
  double band_level = 0.90;
  std::vector<double> quantile_probs;
  std::vector<ProbeRecord> records;
};

namespace detail {

inline ProbeStats summarize(std::vector<double> samples,
                            const std::vector<double>& probs) {
  ProbeStats s;
  samples.erase(std::remove_if(samples.begin(), samples.end(),
                               [](double v) { return std::isnan(v); }),
                samples.end());
  const int r = static_cast<int>(samples.size());
  if (r == 0) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / r;
  double ss = 0.0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.variance = r > 1 ? ss / (r - 1) : 0.0;
  std::sort(samples.begin(), samples.end());
  for (double p : probs) {
    const double h = (r - 1) * p;
    const int lo = static_cast<int>(h);
    const int hi = std::min(lo + 1, r - 1);
    s.quantiles[p] = samples[lo] + (h - lo) * (samples[hi] - samples[lo]);
  }
  return s;
}

}  // namespace detail

inline int thread_count_from_env() {
  if (const char* env = std::getenv("FS_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// R seeded replicates of generate -> forward search; normalised probe
// statistics aggregated against the asymptotic bands. Results do not
// depend on the number of threads.
inline SimulationReport run_experiment(const DgpSpec& spec, SearchConfig fs_config,
                                       int R, const std::vector<double>& psi_probes,
                                       std::uint64_t master_seed,
                                       double band_level = 0.90, int threads = 0,
                                       std::vector<double> quantile_probs = {0.05, 0.5,
                                                                             0.95}) {
  spec.validate();
  if (R < 1) throw std::domain_error("run_experiment: need R >= 1");
  const int n = spec.n;
  const int np = static_cast<int>(psi_probes.size());
  const int p = spec.dim_x();
  const double sqrtn = std::sqrt(static_cast<double>(n));
  const Eigen::MatrixXd N = normalization(spec);
  const Eigen::MatrixXd Ninv = N.inverse();

  // Per-probe reference values and band edges.
  std::vector<PsiFunctions> pf(np);
  std::vector<double> band_lo(np), band_hi(np);
  const double zq =
      ReferenceDistribution::normal().quantile(0.5 * (1.0 + band_level));
  for (int k = 0; k < np; ++k) {
    pf[k] = spec.error_dist.psi_functions(psi_probes[k]);
    const double hw = zq * std::sqrt(omega(spec.error_dist, psi_probes[k]) / n);
    band_lo[k] = pf[k].c - hw;
    band_hi[k] = pf[k].c + hw;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> s_zsig(np, std::vector<double>(R, nan));
  std::vector<std::vector<double>> s_zcorr(np, std::vector<double>(R, nan));
  std::vector<std::vector<double>> s_scorr(np, std::vector<double>(R, nan));
  std::vector<std::vector<double>> s_raw(np, std::vector<double>(R, nan));
  std::vector<std::vector<std::vector<double>>> s_beta(
      np, std::vector<std::vector<double>>(p, std::vector<double>(R, nan)));
  std::vector<std::vector<char>> covered(np, std::vector<char>(R, 0));
  std::atomic<int> failures{0};

  const auto worker = [&](int r_begin, int r_end) {
    for (int r = r_begin; r < r_end; ++r) {
      try {
        const std::uint64_t seed = derive_seed(master_seed, r);
        SearchConfig cfg = fs_config;
        cfg.seed = seed;
        GeneratedData gd = generate(spec, seed);
        ForwardPath path = run_forward_search(gd.data, cfg);
        for (int k = 0; k < np; ++k) {
          const ForwardStep* step = path.step_at(psi_probes[k]);
          if (!step) continue;
          const double psi_m = static_cast<double>(step->m) / n;
          const double sigma_hat = std::sqrt(step->sigma_sq);
          const double sigma_corr_sq =
              step->sigma_sq / spec.error_dist.psi_functions(psi_m).varsigma_sq;
          const double sigma_corr = std::sqrt(sigma_corr_sq);
          const double varsigma = std::sqrt(pf[k].varsigma_sq);
          s_zsig[k][r] = sqrtn * (step->z / sigma_hat - pf[k].c / varsigma);
          s_zcorr[k][r] = sqrtn * (step->z / sigma_corr - pf[k].c);
          s_scorr[k][r] =
              sqrtn * (sigma_corr_sq / (spec.sigma * spec.sigma) - 1.0);
          s_raw[k][r] = step->z / sigma_hat;
          const Eigen::VectorXd be = Ninv * (step->beta - spec.beta);
          for (int j = 0; j < p; ++j) s_beta[k][j][r] = be(j);
          const double zc = step->z / sigma_corr;
          covered[k][r] = (zc >= band_lo[k] && zc <= band_hi[k]) ? 1 : 0;
        }
      } catch (const std::exception&) {
        failures.fetch_add(1, std::memory_order_relaxed);
      }
    }
  };

  int nthreads = threads > 0 ? threads : thread_count_from_env();
  nthreads = std::max(1, std::min(nthreads, R));
  if (nthreads == 1) {
    worker(0, R);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (R + nthreads - 1) / nthreads;
    for (int t = 0; t < nthreads; ++t) {
      const int lo = t * chunk;
      const int hi = std::min(R, lo + chunk);
      if (lo < hi) pool.emplace_back(worker, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SimulationReport report;
  report.spec = spec;
  report.fs_config = fs_config;
  report.replicates = R;
  report.failures = failures.load();
  report.master_seed = master_seed;
  report.band_level = band_level;
  report.quantile_probs = quantile_probs;
  for (int k = 0; k < np; ++k) {
    ProbeRecord rec;
    rec.psi = psi_probes[k];
    rec.z_over_sigma = detail::summarize(s_zsig[k], quantile_probs);
    rec.z_over_sigma_corr = detail::summarize(s_zcorr[k], quantile_probs);
    rec.sigma_corr = detail::summarize(s_scorr[k], quantile_probs);
    rec.z_over_sigma_raw = detail::summarize(s_raw[k], quantile_probs);
    for (int j = 0; j < p; ++j)
      rec.beta.push_back(detail::summarize(s_beta[k][j], quantile_probs));
    int cov = 0, tot = 0;
    for (int r = 0; r < R; ++r)
      if (!std::isnan(s_zcorr[k][r])) {
        ++tot;
        cov += covered[k][r];
      }
    rec.coverage = tot ? static_cast<double>(cov) / tot : 0.0;
    report.records.push_back(std::move(rec));
  }
  return report;
}

// sup over psi >= psi1 of f(c_psi) sqrt(n) (z-hat - d-hat) along a path.
inline double deletion_gap(const ForwardPath& path, const ReferenceDistribution& dist,
                           double psi1) {
  double sup = 0.0;
  const double sqrtn = std::sqrt(static_cast<double>(path.n));
  for (const ForwardStep& s : path.steps) {
    const double psi = static_cast<double>(s.m) / path.n;
    if (psi < psi1) continue;
    const double v = dist.pdf(dist.abs_quantile(psi)) * sqrtn * (s.z - s.d);
    sup = std::max(sup, v);
  }
  return sup;
}

struct TProbeSummary {
  double normalized_mean = 0.0;
  double normalized_variance = 0.0;
};

// Simulates the (m+1)-st order statistic of n absolute t_{m - dimx}
// variables, normalised by 2 phi(c_{m/n}) sqrt(n) against the normal
// abs-quantile. Its variance should approach psi(1-psi).
inline TProbeSummary t_order_statistic_probe(int m, int dimx, int n, int R,
                                             std::uint64_t seed,
                                             bool use_normal = false) {
  if (m - dimx <= 2) throw std::domain_error("t probe needs m - dimx > 2");
  const double psi = static_cast<double>(m) / n;
  const ReferenceDistribution normal = ReferenceDistribution::normal();
  const double c = normal.abs_quantile(psi);
  const double scale = 2.0 * normal.pdf(c) * std::sqrt(static_cast<double>(n));

  std::vector<double> stats(R);
  std::vector<double> v(n);
  for (int r = 0; r < R; ++r) {
    Rng rng = make_rng(seed, 0x7057u + r);
    std::student_t_distribution<double> td(static_cast<double>(m - dimx));
    std::normal_distribution<double> nd;
    for (int i = 0; i < n; ++i)
      v[i] = std::abs(use_normal ? nd(rng) : td(rng));
    std::nth_element(v.begin(), v.begin() + m, v.end());
    stats[r] = scale * (v[m] - c);
  }
  const ProbeStats s = detail::summarize(stats, {});
  return {s.mean, s.variance};
}

}  // namespace fsearch

#endif
