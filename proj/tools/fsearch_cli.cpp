// Forward Search command line front end. Emits forward-plot tables, band
// curves, psi-function tables, and Monte Carlo reports as CSV or JSON for
// external plotting.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>

#include "fsearch/dataset.hpp"
#include "fsearch/forward_search.hpp"
#include "fsearch/montecarlo.hpp"
#include "fsearch/report_io.hpp"

namespace {

constexpr int kExitBadInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitDomain = 4;

struct CommonOpts {
  std::string dist = "normal";
  double dof = 5.0;
  std::string format = "csv";
  std::string output;
  double psi_min = 0.05, psi_max = 0.95;
  int psi_points = 181;
  double level = 0.90;
  int n = 128;
  std::uint64_t seed = 1;
};

fsearch::ReferenceDistribution make_dist(const CommonOpts& o) {
  if (o.dist == "normal") return fsearch::ReferenceDistribution::normal();
  if (o.dist == "t") return fsearch::ReferenceDistribution::scaled_t(o.dof);
  throw std::domain_error("unknown --dist '" + o.dist + "' (use normal or t)");
}

std::vector<double> make_grid(const CommonOpts& o) {
  if (o.psi_points < 1 || o.psi_min > o.psi_max)
    throw std::domain_error("bad psi grid specification");
  if (o.psi_points == 1) return {o.psi_min};
  std::vector<double> g(o.psi_points);
  for (int i = 0; i < o.psi_points; ++i)
    g[i] = o.psi_min + (o.psi_max - o.psi_min) * i / double(o.psi_points - 1);
  return g;
}

// Streams to the output file if --output was given, stdout otherwise.
struct OutputSink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit OutputSink(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw std::runtime_error("cannot write to " + path);
      os = &file;
    }
  }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_grid = true) {
  cmd->add_option("--dist", o.dist, "Reference distribution: normal or t");
  cmd->add_option("--dof", o.dof, "Degrees of freedom for --dist t");
  cmd->add_option("--format", o.format, "Output format: csv or json");
  cmd->add_option("--output", o.output, "Output file (default stdout)");
  cmd->add_option("--level", o.level, "Two-sided band coverage level");
  if (with_grid) {
    cmd->add_option("--psi-min", o.psi_min, "Smallest psi on the grid");
    cmd->add_option("--psi-max", o.psi_max, "Largest psi on the grid");
    cmd->add_option("--psi-points", o.psi_points, "Number of psi grid points");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Forward Search robust regression: forward plots, asymptotic confidence "
      "bands, psi-function tables, and Monte Carlo validation.\n"
      "CSV output: header row, fixed column order as documented per "
      "subcommand, floats with 17 significant digits."};
  app.require_subcommand(1);

  // analyze
  CommonOpts an;
  std::string input;
  int m0 = -1;
  std::string initial = "ols";
  bool dof_correct = false, add_intercept = false;
  auto* analyze = app.add_subcommand(
      "analyze",
      "Run the Forward Search on a CSV file (response column 'y') and emit "
      "the per-step table: m,psi,z,d,sigma,sigma_corr,beta*,band columns");
  analyze->add_option("input", input, "Input CSV file")->required();
  add_common(analyze, an, false);
  analyze->add_option("--m0", m0, "Initial subset size (default n/2)");
  analyze->add_option("--initial", initial, "Initial estimator: lms or ols");
  analyze->add_option("--seed", an.seed, "Seed for the LMS initializer");
  analyze->add_flag("--dof-correct", dof_correct,
                    "Divide subset RSS by m - dim x instead of m");
  analyze->add_flag("--add-intercept", add_intercept,
                    "Prepend a column of ones to the regressors");

  // bands
  CommonOpts bo;
  std::string statistic = "z_over_sigma_hat";
  auto* bands = app.add_subcommand(
      "bands",
      "Emit asymptotic pointwise band curves: psi,mean,lower,upper");
  add_common(bands, bo);
  bands->add_option("--n", bo.n, "Sample size the band is computed for");
  bands->add_option("--statistic", statistic,
                    "z_over_sigma_hat, z_over_sigma_corr, z_over_known_sigma, "
                    "or beta_component");

  // moments
  CommonOpts mo;
  auto* moments = app.add_subcommand(
      "moments", "Emit the psi-function table: psi,c,tau,kappa,varsigma_sq,rho");
  add_common(moments, mo);

  // simulate
  CommonOpts so;
  so.format = "json";
  int reps = 1000, sim_m0 = -1;
  std::string regime = "location", sim_initial = "ols";
  double ar_coef = 0.5, sigma = 1.0;
  std::vector<double> probes = {0.3, 0.5, 0.7, 0.9};
  auto* simulate = app.add_subcommand(
      "simulate",
      "Monte Carlo validation of the asymptotics (parallelism capped by "
      "FS_THREADS)");
  add_common(simulate, so, false);
  simulate->add_option("--n", so.n, "Sample size per replicate");
  simulate->add_option("--reps", reps, "Number of replicates");
  simulate->add_option("--seed", so.seed, "Master seed");
  simulate->add_option("--regime", regime,
                       "Regressors: location, ar1, trend, or randomwalk");
  simulate->add_option("--ar-coef", ar_coef, "AR(1) coefficient");
  simulate->add_option("--sigma", sigma, "Error standard deviation");
  simulate->add_option("--m0", sim_m0, "Initial subset size (default n/2)");
  simulate->add_option("--initial", sim_initial, "Initial estimator: lms or ols");
  simulate->add_option("--psi-probes", probes, "Probe psi values");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      fsearch::Dataset data;
      try {
        data = fsearch::load_csv(input, add_intercept);
      } catch (const fsearch::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
      }
      const auto dist = make_dist(an);
      fsearch::SearchConfig cfg;
      cfg.m0 = m0;
      cfg.seed = an.seed;
      cfg.dof_correct = dof_correct;
      cfg.initial = initial == "lms" ? fsearch::InitialMethod::LMS
                                     : fsearch::InitialMethod::FullLS;
      fsearch::ForwardPath path;
      try {
        path = fsearch::run_forward_search(data, cfg);
      } catch (const fsearch::RankDeficiencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
      }
      std::vector<double> psis;
      for (const auto& s : path.steps)
        psis.push_back(double(s.m) / path.n);
      const auto bc = fsearch::band(
          dist, fsearch::ForwardStatistic::ZOverSigmaHat, psis, path.n, an.level);
      OutputSink sink(an.output);
      if (an.format == "json")
        fsearch::write_path_json(*sink.os, path, dist);
      else
        fsearch::write_path_csv(*sink.os, path, dist, &bc);
      return 0;
    }

    if (*bands) {
      const auto dist = make_dist(bo);
      fsearch::ForwardStatistic st;
      if (statistic == "z_over_sigma_hat")
        st = fsearch::ForwardStatistic::ZOverSigmaHat;
      else if (statistic == "z_over_sigma_corr")
        st = fsearch::ForwardStatistic::ZOverSigmaCorr;
      else if (statistic == "z_over_known_sigma")
        st = fsearch::ForwardStatistic::ZOverKnownSigma;
      else if (statistic == "beta_component")
        st = fsearch::ForwardStatistic::BetaComponent;
      else
        throw std::domain_error("unknown --statistic '" + statistic + "'");
      const auto curve =
          fsearch::band(dist, st, make_grid(bo), bo.n, bo.level);
      OutputSink sink(bo.output);
      if (bo.format == "json")
        *sink.os << fsearch::band_to_json(curve).dump(2) << "\n";
      else
        fsearch::write_band_csv(*sink.os, curve);
      return 0;
    }

    if (*moments) {
      const auto dist = make_dist(mo);
      OutputSink sink(mo.output);
      fsearch::write_moments_csv(*sink.os, dist, make_grid(mo));
      return 0;
    }

    if (*simulate) {
      fsearch::DgpSpec spec;
      if (regime == "location")
        spec.regime = fsearch::Regime::LocationScale;
      else if (regime == "ar1")
        spec.regime = fsearch::Regime::StationaryAR1;
      else if (regime == "trend")
        spec.regime = fsearch::Regime::LinearTrend;
      else if (regime == "randomwalk")
        spec.regime = fsearch::Regime::RandomWalk;
      else
        throw std::domain_error("unknown --regime '" + regime + "'");
      spec.ar_coef = ar_coef;
      spec.n = so.n;
      spec.sigma = sigma;
      spec.error_dist = make_dist(so);
      spec.beta = Eigen::VectorXd::Zero(spec.dim_x());
      fsearch::SearchConfig cfg;
      cfg.m0 = sim_m0;
      cfg.initial = sim_initial == "lms" ? fsearch::InitialMethod::LMS
                                         : fsearch::InitialMethod::FullLS;
      const auto report = fsearch::run_experiment(spec, cfg, reps, probes,
                                                  so.seed, so.level);
      OutputSink sink(so.output);
      if (so.format == "csv")
        fsearch::write_report_csv(*sink.os, report);
      else
        *sink.os << fsearch::report_to_json(report).dump(2) << "\n";
      return 0;
    }
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
