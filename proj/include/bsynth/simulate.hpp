#ifndef BSYNTH_SIMULATE_HPP
#define BSYNTH_SIMULATE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "bsynth/csv.hpp"
#include "bsynth/error.hpp"
#include "bsynth/model.hpp"
#include "bsynth/panel.hpp"

namespace bsynth::sim {

/// Treated unit and inclusive time-index window (0-based).
struct SimTreatment {
  int unit = 0;
  int start = 0;
  int end = 0;
};

struct SimConfig {
  int units = 10;
  int times = 30;
  int factors = 2;
  double noise_sd = 0.25;
  std::vector<SimTreatment> treated;
  /// Additive effect in original units: one value for every treated cell,
  /// or one value per position inside each window.
  std::vector<double> effect = {0.0};
  int static_covariates = 0;
  int tv_covariates = 0;
  /// Original units are level + scale * (model-scale outcome).
  double level = 0.0;
  double scale = 1.0;
  /// Fixed value of every raw shrinkage variate (lambda, eta, tau).
  double shrinkage_raw = 0.5;
  int first_time = 1;
  std::uint64_t seed = 1;

  void validate() const {
    if (units < 2 || times < 2) throw Error(ErrorKind::config, "simulation needs units >= 2 and times >= 2");
    if (factors < 1 || factors >= times) throw Error(ErrorKind::config, "simulation factors must satisfy 1 <= L < T");
    if (!(noise_sd > 0.0)) throw Error(ErrorKind::config, "noise_sd must be positive");
    if (!(scale > 0.0)) throw Error(ErrorKind::config, "scale must be positive");
    if (!(shrinkage_raw > 0.0 && shrinkage_raw < 1.0)) throw Error(ErrorKind::config, "shrinkage_raw must lie in (0, 1)");
    if (effect.empty()) throw Error(ErrorKind::config, "effect profile must not be empty");
    if (static_covariates < 0 || tv_covariates < 0) throw Error(ErrorKind::config, "covariate counts must be >= 0");
    for (const auto& t : treated) {
      if (t.unit < 0 || t.unit >= units) throw Error(ErrorKind::config, "treated unit index out of range");
      if (t.start < 1 || t.end < t.start || t.end >= times)
        throw Error(ErrorKind::config, "treatment window must satisfy 1 <= start <= end < times");
      if (effect.size() != 1 && static_cast<int>(effect.size()) != t.end - t.start + 1)
        throw Error(ErrorKind::config, "effect profile length must be 1 or match every window length");
    }
  }
};

struct SimResult {
  PanelData panel;              // observed outcomes, treated cells masked
  Eigen::MatrixXd truth;        // untreated outcomes, original units
  std::vector<TreatmentWindow> windows;
};

inline std::string unit_label(int j, int units) {
  const int width = static_cast<int>(std::to_string(units).size());
  std::string n = std::to_string(j + 1);
  return "u" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0') + n;
}

/**
 * Draws a panel from the latent-factor model: factors, loadings offsets,
 * time and unit effects and covariate coefficients from their priors;
 * shrinkage variates fixed at `shrinkage_raw`.
 */
inline SimResult generate_panel(const SimConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int J = cfg.units, T = cfg.times, L = cfg.factors, P = cfg.static_covariates, Q = cfg.tv_covariates;
  const ModelConfig prior;

  Eigen::VectorXd diag(L), lower(lower_count(T, L));
  for (int l = 0; l < L; ++l) diag(l) = std::abs(prior.f_diag_sd * normal(rng));
  for (Eigen::Index i = 0; i < lower.size(); ++i) lower(i) = prior.f_lower_sd * normal(rng);
  const Eigen::MatrixXd f = make_factor_matrix(T, diag, lower);

  Eigen::MatrixXd off(J, L);
  for (int j = 0; j < J; ++j)
    for (int l = 0; l < L; ++l) off(j, l) = prior.beta_off_sd * normal(rng);
  const Eigen::MatrixXd beta = make_beta(off, Eigen::VectorXd::Constant(L, cfg.shrinkage_raw), cfg.shrinkage_raw,
                                         Eigen::VectorXd::Constant(J, cfg.shrinkage_raw));

  Eigen::VectorXd delta(T), kappa(J), gamma(P + Q);
  for (int t = 0; t < T; ++t) delta(t) = prior.delta_sd * normal(rng);
  for (int j = 0; j < J; ++j) kappa(j) = prior.kappa_sd * normal(rng);
  for (int k = 0; k < P + Q; ++k) gamma(k) = prior.gamma_sd * normal(rng);

  Eigen::MatrixXd x_static(P, J);
  for (int p = 0; p < P; ++p)
    for (int j = 0; j < J; ++j) x_static(p, j) = normal(rng);
  std::vector<Eigen::MatrixXd> x_tv(Q, Eigen::MatrixXd(J, T));
  for (int q = 0; q < Q; ++q)
    for (int j = 0; j < J; ++j)
      for (int t = 0; t < T; ++t) x_tv[q](j, t) = normal(rng);

  const Eigen::MatrixXd fb = (f * beta).transpose();  // J x T
  Eigen::MatrixXd y(J, T);
  for (int j = 0; j < J; ++j) {
    double unit_term = kappa(j);
    for (int p = 0; p < P; ++p) unit_term += gamma(p) * x_static(p, j);
    for (int t = 0; t < T; ++t) {
      double m = fb(j, t) + delta(t) + unit_term;
      for (int q = 0; q < Q; ++q) m += gamma(P + q) * x_tv[q](j, t);
      y(j, t) = m + cfg.noise_sd * normal(rng);
    }
  }

  SimResult out;
  out.truth = (cfg.level + cfg.scale * y.array()).matrix();
  PanelData& panel = out.panel;
  for (int j = 0; j < J; ++j) panel.units.push_back(unit_label(j, J));
  for (int t = 0; t < T; ++t) panel.times.push_back(std::to_string(cfg.first_time + t));
  panel.outcome = out.truth;
  for (int p = 0; p < P; ++p) panel.static_names.push_back("x" + std::to_string(p + 1));
  for (int q = 0; q < Q; ++q) panel.tv_names.push_back("z" + std::to_string(q + 1));
  panel.static_covariates = x_static;
  panel.tv_covariates = x_tv;

  for (const auto& tr : cfg.treated) {
    out.windows.push_back({panel.units[tr.unit], panel.times[tr.start], panel.times[tr.end]});
  }
  panel.mask = build_mask(panel, out.windows);
  for (const auto& tr : cfg.treated)
    for (int t = tr.start; t <= tr.end; ++t) {
      const double e = cfg.effect.size() == 1 ? cfg.effect[0] : cfg.effect[t - tr.start];
      panel.outcome(tr.unit, t) = out.truth(tr.unit, t) + e;
    }
  return out;
}

/// Long-format table consumable by load_panel.
inline void write_long(std::ostream& out, const PanelData& panel) {
  csv::Writer w(out);
  std::vector<std::string> header = {"unit", "time", "outcome"};
  header.insert(header.end(), panel.static_names.begin(), panel.static_names.end());
  header.insert(header.end(), panel.tv_names.begin(), panel.tv_names.end());
  w.row(header);
  for (Eigen::Index j = 0; j < panel.J(); ++j)
    for (Eigen::Index t = 0; t < panel.T(); ++t) {
      w.field(panel.units[j]).field(panel.times[t]).field(panel.outcome(j, t));
      for (Eigen::Index p = 0; p < panel.P(); ++p) w.field(panel.static_covariates(p, j));
      for (Eigen::Index q = 0; q < panel.Q(); ++q) w.field(panel.tv_covariates[q](j, t));
      w.end_row();
    }
}

/// unit,time,truth,observed,effect
inline void write_truth(std::ostream& out, const SimResult& sim) {
  csv::Writer w(out);
  w.row({"unit", "time", "truth", "observed", "effect"});
  const auto& p = sim.panel;
  for (Eigen::Index j = 0; j < p.J(); ++j)
    for (Eigen::Index t = 0; t < p.T(); ++t) {
      w.field(p.units[j]).field(p.times[t]).field(sim.truth(j, t)).field(p.outcome(j, t));
      w.field(p.outcome(j, t) - sim.truth(j, t));
      w.end_row();
    }
}

}  // namespace bsynth::sim

#endif  // BSYNTH_SIMULATE_HPP
