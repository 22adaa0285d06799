#ifndef FSEARCH_REPORT_IO_HPP
#define FSEARCH_REPORT_IO_HPP

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsearch/asymptotics.hpp"
#include "fsearch/forward_search.hpp"
#include "fsearch/montecarlo.hpp"
#include "fsearch/refdist.hpp"

namespace fsearch {

// Floats are printed with 17 significant digits so that CSV round-trips
// are exact.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::LocationScale: return "location";
    case Regime::StationaryAR1: return "ar1";
    case Regime::LinearTrend: return "trend";
    case Regime::RandomWalk: return "randomwalk";
  }
  return "?";
}

inline const char* statistic_name(ForwardStatistic s) {
  switch (s) {
    case ForwardStatistic::ZOverSigmaHat: return "z_over_sigma_hat";
    case ForwardStatistic::ZOverSigmaCorr: return "z_over_sigma_corr";
    case ForwardStatistic::ZOverKnownSigma: return "z_over_known_sigma";
    case ForwardStatistic::BetaComponent: return "beta_component";
  }
  return "?";
}

// Per-step forward-plot table, optionally joined with band columns at
// each step's psi.
inline void write_path_csv(std::ostream& os, const ForwardPath& path,
                           const ReferenceDistribution& dist,
                           const BandCurve* bands = nullptr) {
  os << "m,psi,z,d,sigma,sigma_corr";
  for (int j = 0; j < path.dim_x; ++j) os << ",beta" << j;
  if (bands) os << ",band_mean,band_lower,band_upper";
  os << "\n";
  const std::vector<double> corr = bias_corrected_sigma_sq(path, dist);
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    const ForwardStep& s = path.steps[k];
    const double psi = static_cast<double>(s.m) / path.n;
    os << s.m << ',' << fmt(psi) << ',' << fmt(s.z) << ',' << fmt(s.d) << ','
       << fmt(std::sqrt(s.sigma_sq)) << ',' << fmt(std::sqrt(corr[k]));
    for (int j = 0; j < path.dim_x; ++j) os << ',' << fmt(s.beta(j));
    if (bands) {
      os << ',' << fmt(bands->mean[k]) << ',' << fmt(bands->lower[k]) << ','
         << fmt(bands->upper[k]);
    }
    os << "\n";
  }
}

inline void write_path_json(std::ostream& os, const ForwardPath& path,
                            const ReferenceDistribution& dist) {
  const std::vector<double> corr = bias_corrected_sigma_sq(path, dist);
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    const ForwardStep& s = path.steps[k];
    nlohmann::ordered_json j;
    j["m"] = s.m;
    j["psi"] = static_cast<double>(s.m) / path.n;
    j["z"] = s.z;
    j["d"] = s.d;
    j["sigma"] = std::sqrt(s.sigma_sq);
    j["sigma_corr"] = std::sqrt(corr[k]);
    j["beta"] = std::vector<double>(s.beta.data(), s.beta.data() + s.beta.size());
    os << j.dump() << "\n";
  }
}

inline void write_band_csv(std::ostream& os, const BandCurve& band) {
  os << "psi,mean,lower,upper\n";
  for (std::size_t k = 0; k < band.psi_grid.size(); ++k)
    os << fmt(band.psi_grid[k]) << ',' << fmt(band.mean[k]) << ','
       << fmt(band.lower[k]) << ',' << fmt(band.upper[k]) << "\n";
}

inline nlohmann::ordered_json band_to_json(const BandCurve& band) {
  nlohmann::ordered_json j;
  j["statistic"] = statistic_name(band.statistic);
  j["n"] = band.n;
  j["level"] = band.level;
  j["psi"] = band.psi_grid;
  j["mean"] = band.mean;
  j["lower"] = band.lower;
  j["upper"] = band.upper;
  return j;
}

inline void write_moments_csv(std::ostream& os, const ReferenceDistribution& dist,
                              const std::vector<double>& psi_grid) {
  os << "psi,c,tau,kappa,varsigma_sq,rho\n";
  for (double psi : psi_grid) {
    const PsiFunctions pf = dist.psi_functions(psi);
    os << fmt(psi) << ',' << fmt(pf.c) << ',' << fmt(pf.tau) << ','
       << fmt(pf.kappa) << ',' << fmt(pf.varsigma_sq) << ',' << fmt(pf.rho)
       << "\n";
  }
}

inline nlohmann::ordered_json stats_to_json(const ProbeStats& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["variance"] = s.variance;
  nlohmann::ordered_json q;
  for (const auto& [p, v] : s.quantiles) q[fmt(p)] = v;
  j["quantiles"] = q;
  return j;
}

inline nlohmann::ordered_json report_to_json(const SimulationReport& r) {
  nlohmann::ordered_json j;
  j["config"]["regime"] = regime_name(r.spec.regime);
  j["config"]["n"] = r.spec.n;
  j["config"]["sigma"] = r.spec.sigma;
  j["config"]["dist"] =
      r.spec.error_dist.kind() == DistKind::StandardNormal ? "normal" : "t";
  if (r.spec.error_dist.kind() == DistKind::ScaledT)
    j["config"]["dof"] = r.spec.error_dist.dof();
  if (r.spec.regime == Regime::StationaryAR1)
    j["config"]["ar_coef"] = r.spec.ar_coef;
  j["config"]["beta"] = std::vector<double>(
      r.spec.beta.data(), r.spec.beta.data() + r.spec.beta.size());
  j["config"]["m0"] = r.fs_config.m0;
  j["config"]["replicates"] = r.replicates;
  j["config"]["seed"] = r.master_seed;
  j["config"]["band_level"] = r.band_level;
  j["failures"] = r.failures;
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const ProbeRecord& rec : r.records) {
    nlohmann::ordered_json e;
    e["psi"] = rec.psi;
    e["z_over_sigma"] = stats_to_json(rec.z_over_sigma);
    e["z_over_sigma_corr"] = stats_to_json(rec.z_over_sigma_corr);
    e["sigma_corr"] = stats_to_json(rec.sigma_corr);
    e["z_over_sigma_raw"] = stats_to_json(rec.z_over_sigma_raw);
    nlohmann::ordered_json betas = nlohmann::ordered_json::array();
    for (const ProbeStats& b : rec.beta) betas.push_back(stats_to_json(b));
    e["beta"] = betas;
    e["coverage"] = rec.coverage;
    recs.push_back(std::move(e));
  }
  j["records"] = std::move(recs);
  return j;
}

inline void write_report_csv(std::ostream& os, const SimulationReport& r) {
  os << "psi,statistic,mean,variance";
  for (double p : r.quantile_probs) os << ",q" << fmt(p);
  os << ",coverage\n";
  const auto row = [&](double psi, const std::string& name, const ProbeStats& s,
                       double coverage) {
    os << fmt(psi) << ',' << name << ',' << fmt(s.mean) << ',' << fmt(s.variance);
    for (double p : r.quantile_probs) {
      const auto it = s.quantiles.find(p);
      os << ',' << fmt(it == s.quantiles.end() ? 0.0 : it->second);
    }
    os << ',' << fmt(coverage) << "\n";
  };
  for (const ProbeRecord& rec : r.records) {
    row(rec.psi, "z_over_sigma", rec.z_over_sigma, rec.coverage);
    row(rec.psi, "z_over_sigma_corr", rec.z_over_sigma_corr, rec.coverage);
    row(rec.psi, "sigma_corr", rec.sigma_corr, rec.coverage);
    row(rec.psi, "z_over_sigma_raw", rec.z_over_sigma_raw, rec.coverage);
    for (std::size_t j = 0; j < rec.beta.size(); ++j)
      row(rec.psi, "beta" + std::to_string(j), rec.beta[j], rec.coverage);
  }
}

}  // namespace fsearch

#endif
