#ifndef BSYNTH_POSTERIOR_HPP
#define BSYNTH_POSTERIOR_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bsynth/diagnostics.hpp"
#include "bsynth/error.hpp"
#include "bsynth/fit.hpp"
#include "bsynth/log.hpp"
#include "bsynth/model.hpp"
#include "bsynth/panel.hpp"
#include "bsynth/sampler.hpp"

namespace bsynth {

/// Per-draw synthetic J x T surfaces in original units.
struct CounterfactualDraws {
  std::vector<std::string> units;
  std::vector<std::string> times;
  std::vector<Eigen::MatrixXd> surfaces;
};

struct ReconstructOptions {
  /// Adds N(0, sigma) observation noise on the standardized scale.
  bool predictive_noise = false;
  std::uint64_t seed = 0;
};

/**
 * Rebuilds the mean surface of every draw and maps it back to original
 * units with the model's scaling.
 */
inline CounterfactualDraws reconstruct(const Model& model, const std::vector<Eigen::VectorXd>& draws,
                                       const ReconstructOptions& opts = {}) {
  CounterfactualDraws out;
  out.units = model.units();
  out.times = model.times();
  out.surfaces.reserve(draws.size());
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& theta : draws) {
    if (theta.size() != model.dim()) throw Error(ErrorKind::model, "draw length does not match the model layout");
    const auto params = constrain(theta, model.layout()).first;
    Eigen::MatrixXd mean = model.mean_matrix(params);
    if (opts.predictive_noise)
      for (Eigen::Index i = 0; i < mean.size(); ++i) mean.data()[i] += params.sigma * normal(rng);
    out.surfaces.push_back(destandardize(mean, model.scaling()));
  }
  return out;
}

/// Posterior mean and the central 50% / 90% interval endpoints.
struct CellSummary {
  double mean = 0.0;
  double q05 = 0.0, q25 = 0.0, q75 = 0.0, q95 = 0.0;
};

inline CellSummary summarize_cell(std::vector<double> values) {
  CellSummary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  s.q05 = diag::quantile_sorted(values, 0.05);
  s.q25 = diag::quantile_sorted(values, 0.25);
  s.q75 = diag::quantile_sorted(values, 0.75);
  s.q95 = diag::quantile_sorted(values, 0.95);
  return s;
}

struct SurfaceRow {
  std::string unit;
  std::string time;
  CellSummary stats;
};

/// One row per unit and time of the synthetic surface.
inline std::vector<SurfaceRow> summarize_synthetic(const CounterfactualDraws& cf) {
  std::vector<SurfaceRow> rows;
  const auto J = static_cast<Eigen::Index>(cf.units.size());
  const auto T = static_cast<Eigen::Index>(cf.times.size());
  std::vector<double> buf(cf.surfaces.size());
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index t = 0; t < T; ++t) {
      for (std::size_t d = 0; d < cf.surfaces.size(); ++d) buf[d] = cf.surfaces[d](j, t);
      rows.push_back({cf.units[j], cf.times[t], summarize_cell(buf)});
    }
  return rows;
}

struct GapRow {
  std::string unit;
  std::string time;
  bool treated = false;     // inside the unit's treatment window
  double observed = 0.0;    // NaN when the cell was not supplied
  double synthetic = 0.0;   // posterior mean of the synthetic outcome
  CellSummary gap;          // observed - synthetic
};

using GapSummary = std::vector<GapRow>;

/**
 * Observed minus synthetic for `units` (default: every treated unit) at
 * every time point.
 */
inline GapSummary gap(const CounterfactualDraws& cf, const PanelData& panel,
                      std::optional<std::vector<Eigen::Index>> units = std::nullopt) {
  const auto which = units ? *units : panel.treated_units();
  if (which.empty()) throw Error(ErrorKind::validation, "gap summary needs at least one treated unit");
  GapSummary rows;
  std::vector<double> g(cf.surfaces.size()), s(cf.surfaces.size());
  for (auto j : which) {
    for (Eigen::Index t = 0; t < panel.T(); ++t) {
      const double obs = panel.outcome(j, t);
      for (std::size_t d = 0; d < cf.surfaces.size(); ++d) {
        s[d] = cf.surfaces[d](j, t);
        g[d] = obs - s[d];
      }
      GapRow row;
      row.unit = panel.units[j];
      row.time = panel.times[t];
      row.treated = panel.mask(j, t);
      row.observed = obs;
      row.synthetic = summarize_cell(s).mean;
      row.gap = summarize_cell(g);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

/// Schema shared by synthetic.csv and gap.csv.
inline std::vector<std::string> interval_header(const std::string& key = "unit") {
  return {key, "time", "mean", "q05", "q25", "q75", "q95"};
}

inline void write_synthetic(std::ostream& out, const std::vector<SurfaceRow>& rows) {
  csv::Writer w(out);
  w.row(interval_header());
  for (const auto& r : rows) {
    w.field(r.unit).field(r.time).field(r.stats.mean).field(r.stats.q05).field(r.stats.q25).field(r.stats.q75).field(r.stats.q95);
    w.end_row();
  }
}

inline void write_gap(std::ostream& out, const GapSummary& rows, const std::string& key = "unit") {
  csv::Writer w(out);
  w.row(interval_header(key));
  for (const auto& r : rows) {
    w.field(r.unit).field(r.time).field(r.gap.mean).field(r.gap.q05).field(r.gap.q25).field(r.gap.q75).field(r.gap.q95);
    w.end_row();
  }
}

struct PlaceboOptions {
  /// Drop truly treated units from every placebo panel.
  bool exclude_treated = true;
  /// Concurrent donor fits.
  int jobs = 1;
  /// Gap intervals include observation noise, as in ReconstructOptions.
  bool predictive_noise = false;
};

struct PlaceboFit {
  std::string donor;
  GapSummary gap;  // empty when the fit failed
  std::optional<std::string> error;
  int divergences = 0;
};

/// Placebo panel: donor `d` masked over the time span of every window.
inline PanelData placebo_panel(const PanelData& panel, const std::vector<TreatmentWindow>& windows, Eigen::Index donor,
                               bool exclude_treated) {
  std::set<Eigen::Index> window_times;
  for (const auto& w : windows) {
    auto s = panel.time_index(w.start), e = panel.time_index(w.end);
    if (!s || !e) throw Error(ErrorKind::validation, "treatment window references unknown times");
    for (auto t = *s; t <= *e; ++t) window_times.insert(t);
  }
  if (window_times.empty()) throw Error(ErrorKind::validation, "placebo study needs at least one treatment window");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < panel.J(); ++j)
    if (!exclude_treated || !panel.is_treated(j) || j == donor) keep.push_back(j);
  PanelData out = select_units(panel, keep);
  const auto pos = static_cast<Eigen::Index>(std::find(keep.begin(), keep.end(), donor) - keep.begin());
  for (auto t : window_times) out.mask(pos, t) = true;
  if (!out.is_treated(pos)) throw Error(ErrorKind::validation, "placebo mask is empty");
  return out;
}

/**
 * Refits the model once per donor with that donor treated over the same
 * windows. Each donor fit derives its own seed, so results do not depend
 * on `opts.jobs`. A failed donor fit is recorded and the study continues.
 */
inline std::vector<PlaceboFit> placebo_study(const PanelData& panel, const std::vector<TreatmentWindow>& windows,
                                             const ModelConfig& model_cfg, const ScalingPolicy& policy,
                                             const NutsConfig& nuts_cfg, const PlaceboOptions& opts = {}) {
  const auto donors = panel.donor_units();
  if (donors.size() < 3)
    throw Error(ErrorKind::validation, "placebo study needs at least 3 donors, found " + std::to_string(donors.size()));
  std::vector<PlaceboFit> results(donors.size());
  const int jobs = std::max(1, opts.jobs);
  parallel_for(static_cast<int>(donors.size()), jobs, [&](int k) {
    const auto d = donors[k];
    PlaceboFit& res = results[k];
    res.donor = panel.units[d];
    try {
      PanelData pp = placebo_panel(panel, windows, d, opts.exclude_treated);
      Model model(pp, model_cfg, policy);
      NutsConfig cfg = nuts_cfg;
      cfg.seed = derive_seed(nuts_cfg.seed, 0x706C6163ULL + static_cast<std::uint64_t>(d));
      if (jobs > 1) cfg.threads = 1;
      auto run = fit(model, cfg);
      if (run.chains.empty()) throw Error(ErrorKind::sampler, "all chains failed");
      for (const auto& c : run.chains) res.divergences += c.divergences();
      ReconstructOptions ro;
      ro.predictive_noise = opts.predictive_noise;
      ro.seed = derive_seed(cfg.seed, 0x6e6f697365ULL);
      auto cf = reconstruct(model, pooled_draws(run), ro);
      auto pos = pp.unit_index(res.donor);
      res.gap = gap(cf, pp, std::vector<Eigen::Index>{*pos});
    } catch (const std::exception& e) {
      res.error = e.what();
      log::warn("placebo fit for donor '" + res.donor + "' failed: " + e.what());
    }
  });
  return results;
}

inline void write_placebo(std::ostream& out, const std::vector<PlaceboFit>& fits) {
  csv::Writer w(out);
  w.row(interval_header("donor"));
  for (const auto& f : fits)
    for (const auto& r : f.gap) {
      w.field(r.unit).field(r.time).field(r.gap.mean).field(r.gap.q05).field(r.gap.q25).field(r.gap.q75).field(r.gap.q95);
      w.end_row();
    }
}

}  // namespace bsynth

#endif  // BSYNTH_POSTERIOR_HPP
