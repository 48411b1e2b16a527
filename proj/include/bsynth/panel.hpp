#ifndef BSYNTH_PANEL_HPP
#define BSYNTH_PANEL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bsynth/csv.hpp"
#include "bsynth/error.hpp"

namespace bsynth {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kSentinel = std::numeric_limits<double>::quiet_NaN();

/// Inclusive treatment interval for one unit, in time labels.
struct TreatmentWindow {
  std::string unit;
  std::string start;
  std::string end;
};

/**
 * Dense J x T panel. Absent or withheld outcome cells hold a NaN sentinel;
 * `mask` is authoritative for which cells are treated and the sentinel is
 * never read by the model.
 */
struct PanelData {
  std::vector<std::string> units;
  std::vector<std::string> times;
  Eigen::MatrixXd outcome;  // J x T, original units
  Mask mask;                // J x T, true = treated / withheld

  std::vector<std::string> static_names;
  Eigen::MatrixXd static_covariates;  // P x J

  std::vector<std::string> tv_names;
  std::vector<Eigen::MatrixXd> tv_covariates;  // Q entries of J x T

  Eigen::Index J() const { return static_cast<Eigen::Index>(units.size()); }
  Eigen::Index T() const { return static_cast<Eigen::Index>(times.size()); }
  Eigen::Index P() const { return static_cast<Eigen::Index>(static_names.size()); }
  Eigen::Index Q() const { return static_cast<Eigen::Index>(tv_names.size()); }

  std::optional<Eigen::Index> unit_index(const std::string& name) const {
    auto it = std::find(units.begin(), units.end(), name);
    if (it == units.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - units.begin());
  }

  std::optional<Eigen::Index> time_index(const std::string& label) const {
    auto it = std::find(times.begin(), times.end(), label);
    if (it == times.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - times.begin());
  }

  bool is_treated(Eigen::Index j) const { return mask.row(j).any(); }

  std::vector<Eigen::Index> treated_units() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < J(); ++j)
      if (is_treated(j)) out.push_back(j);
    return out;
  }

  std::vector<Eigen::Index> donor_units() const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index j = 0; j < J(); ++j)
      if (!is_treated(j)) out.push_back(j);
    return out;
  }
};

enum class CenterPolicy { last_pre_value, pre_mean };
enum class ScalePolicy { pre_sd, pre_mean };

struct ScalingPolicy {
  CenterPolicy center = CenterPolicy::last_pre_value;
  ScalePolicy scale = ScalePolicy::pre_sd;
};

inline const char* to_string(CenterPolicy p) {
  return p == CenterPolicy::last_pre_value ? "last_pre_value" : "pre_mean";
}
inline const char* to_string(ScalePolicy p) {
  return p == ScalePolicy::pre_sd ? "pre_sd" : "pre_mean";
}

inline CenterPolicy parse_center_policy(const std::string& s) {
  if (s == "last_pre_value") return CenterPolicy::last_pre_value;
  if (s == "pre_mean") return CenterPolicy::pre_mean;
  throw Error(ErrorKind::config, "unknown center policy '" + s + "'");
}
inline ScalePolicy parse_scale_policy(const std::string& s) {
  if (s == "pre_sd") return ScalePolicy::pre_sd;
  if (s == "pre_mean") return ScalePolicy::pre_mean;
  throw Error(ErrorKind::config, "unknown scale policy '" + s + "'");
}

struct ScalingInfo {
  Eigen::VectorXd center;  // length J
  Eigen::VectorXd scale;   // length J, > 0
  ScalingPolicy policy;
  Eigen::Index cutoff = 0;  // first time index excluded from the pre-period
};

struct StandardizedOutcome {
  Eigen::MatrixXd values;  // J x T, NaN at masked cells
  ScalingInfo scaling;
};

struct StandardizedCovariates {
  Eigen::MatrixXd x_static;              // J x P
  std::vector<Eigen::MatrixXd> x_tv;     // Q entries of J x T
};

/// Column names for the long-format loader.
struct LoadOptions {
  std::string unit_column = "unit";
  std::string time_column = "time";
  std::string outcome_column = "outcome";
  std::vector<std::string> static_columns;
  std::vector<std::string> tv_columns;
};

namespace detail {

inline bool all_numeric(const std::vector<std::string>& labels) {
  return std::all_of(labels.begin(), labels.end(), [](const std::string& s) {
    auto v = csv::parse_double(s);
    return v.has_value() && std::isfinite(*v);
  });
}

inline void sort_times(std::vector<std::string>& times) {
  if (all_numeric(times)) {
    std::stable_sort(times.begin(), times.end(), [](const std::string& a, const std::string& b) {
      return *csv::parse_double(a) < *csv::parse_double(b);
    });
  } else {
    std::stable_sort(times.begin(), times.end());
  }
}

inline double sample_sd(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace detail

/// First time index at which any cell is masked; T when nothing is masked.
inline Eigen::Index pre_period_cutoff(const Mask& mask) {
  Eigen::Index cutoff = mask.cols();
  for (Eigen::Index j = 0; j < mask.rows(); ++j)
    for (Eigen::Index t = 0; t < cutoff; ++t)
      if (mask(j, t)) {
        cutoff = t;
        break;
      }
  return cutoff;
}

/**
 * Builds the treatment mask from windows. Windows may be interior and may
 * target several units; overlapping windows simply union.
 */
inline Mask build_mask(const PanelData& panel, const std::vector<TreatmentWindow>& windows) {
  Mask mask = Mask::Constant(panel.J(), panel.T(), false);
  for (const auto& w : windows) {
    auto j = panel.unit_index(w.unit);
    if (!j) throw Error(ErrorKind::validation, "treatment window references unknown unit '" + w.unit + "'");
    auto s = panel.time_index(w.start);
    auto e = panel.time_index(w.end);
    if (!s) throw Error(ErrorKind::validation, "treatment window start '" + w.start + "' is not a panel time");
    if (!e) throw Error(ErrorKind::validation, "treatment window end '" + w.end + "' is not a panel time");
    if (*s > *e)
      throw Error(ErrorKind::validation, "treatment window for '" + w.unit + "' starts after it ends");
    if (*s == 0 && *e == panel.T() - 1)
      throw Error(ErrorKind::validation, "treatment window covers the entire series of '" + w.unit + "'");
    if (*s == 0)
      throw Error(ErrorKind::validation, "treatment window for '" + w.unit + "' starts at the first time point");
    for (Eigen::Index t = *s; t <= *e; ++t) mask(*j, t) = true;
  }
  for (Eigen::Index j = 0; j < mask.rows(); ++j) {
    for (Eigen::Index t = 0; t < mask.cols(); ++t) {
      if (!mask(j, t)) continue;
      if (t < 2)
        throw Error(ErrorKind::validation,
                    "unit '" + panel.units[j] + "' has fewer than 2 pre-treatment time points");
      break;
    }
  }
  return mask;
}

/// Checks the structural invariants of a masked panel.
inline void validate(const PanelData& panel) {
  const auto J = panel.J(), T = panel.T();
  if (J < 2) throw Error(ErrorKind::validation, "panel needs at least 2 units");
  if (T < 2) throw Error(ErrorKind::validation, "panel needs at least 2 time points");
  if (panel.outcome.rows() != J || panel.outcome.cols() != T || panel.mask.rows() != J ||
      panel.mask.cols() != T)
    throw Error(ErrorKind::validation, "outcome/mask dimensions do not match labels");
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index t = 0; t < T; ++t)
      if (!panel.mask(j, t) && !std::isfinite(panel.outcome(j, t)))
        throw Error(ErrorKind::validation, "missing or non-finite outcome for unit '" + panel.units[j] +
                                               "' at time '" + panel.times[t] + "'");
  if (panel.donor_units().empty())
    throw Error(ErrorKind::validation, "every unit is treated; at least one pure donor is required");
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index t = 0; t < T; ++t) {
      if (!panel.mask(j, t)) continue;
      if (t < 2)
        throw Error(ErrorKind::validation,
                    "unit '" + panel.units[j] + "' has fewer than 2 pre-treatment time points");
      break;
    }
  }
  if (panel.static_covariates.rows() != panel.P() ||
      (panel.P() > 0 && panel.static_covariates.cols() != J))
    throw Error(ErrorKind::validation, "static covariate dimensions do not match");
  if (static_cast<Eigen::Index>(panel.tv_covariates.size()) != panel.Q())
    throw Error(ErrorKind::validation, "time-varying covariate count does not match names");
  for (const auto& x : panel.tv_covariates)
    if (x.rows() != J || x.cols() != T || !x.allFinite())
      throw Error(ErrorKind::validation, "time-varying covariates must be complete J x T arrays");
  if (panel.P() > 0 && !panel.static_covariates.allFinite())
    throw Error(ErrorKind::validation, "static covariates must be finite");
}

/**
 * Builds a dense panel from long-format records. Units keep first-seen
 * order; times sort numerically when every label is a number, otherwise
 * lexicographically. Outcome cells may be absent only where `windows` mask
 * them.
 */
inline PanelData load_panel(const csv::Table& table, const LoadOptions& opts = {},
                            const std::vector<TreatmentWindow>& windows = {}) {
  const int ucol = table.column(opts.unit_column);
  const int tcol = table.column(opts.time_column);
  const int ycol = table.column(opts.outcome_column);
  if (ucol < 0 || tcol < 0 || ycol < 0)
    throw Error(ErrorKind::parse, "input must have columns '" + opts.unit_column + "', '" +
                                      opts.time_column + "', '" + opts.outcome_column + "'");
  auto find_cols = [&](const std::vector<std::string>& names) {
    std::vector<int> cols;
    for (const auto& n : names) {
      int c = table.column(n);
      if (c < 0) throw Error(ErrorKind::parse, "covariate column '" + n + "' not found");
      cols.push_back(c);
    }
    return cols;
  };
  const auto scols = find_cols(opts.static_columns);
  const auto vcols = find_cols(opts.tv_columns);

  PanelData panel;
  std::unordered_map<std::string, Eigen::Index> unit_pos;
  std::vector<std::string> time_labels;
  std::unordered_map<std::string, bool> seen_time;
  for (const auto& row : table.rows) {
    const auto& u = row[ucol];
    const auto& t = row[tcol];
    if (u.empty() || t.empty()) throw Error(ErrorKind::parse, "empty unit or time field");
    if (!unit_pos.count(u)) {
      unit_pos.emplace(u, static_cast<Eigen::Index>(panel.units.size()));
      panel.units.push_back(u);
    }
    if (!seen_time[t]) {
      seen_time[t] = true;
      time_labels.push_back(t);
    }
  }
  detail::sort_times(time_labels);
  panel.times = time_labels;
  std::unordered_map<std::string, Eigen::Index> time_pos;
  for (std::size_t i = 0; i < panel.times.size(); ++i) time_pos.emplace(panel.times[i], i);

  const auto J = panel.J(), T = panel.T();
  panel.outcome = Eigen::MatrixXd::Constant(J, T, kSentinel);
  panel.mask = Mask::Constant(J, T, false);
  panel.static_names = opts.static_columns;
  panel.tv_names = opts.tv_columns;
  const auto P = panel.P();
  panel.static_covariates = Eigen::MatrixXd::Constant(P, J, kSentinel);
  panel.tv_covariates.assign(panel.Q(), Eigen::MatrixXd::Constant(J, T, kSentinel));

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> present = Mask::Constant(J, T, false);
  for (const auto& row : table.rows) {
    const auto j = unit_pos.at(row[ucol]);
    const auto t = time_pos.at(row[tcol]);
    if (present(j, t))
      throw Error(ErrorKind::validation,
                  "duplicate cell (" + row[ucol] + ", " + row[tcol] + ")");
    present(j, t) = true;
    const auto& ytext = row[ycol];
    if (!ytext.empty()) {
      auto y = csv::parse_double(ytext);
      if (!y)
        throw Error(ErrorKind::parse, "non-numeric outcome '" + ytext + "' for (" + row[ucol] + ", " +
                                          row[tcol] + ")");
      panel.outcome(j, t) = *y;
    }
    for (Eigen::Index p = 0; p < P; ++p) {
      const auto& text = row[scols[p]];
      if (text.empty()) continue;
      auto x = csv::parse_double(text);
      if (!x || !std::isfinite(*x))
        throw Error(ErrorKind::parse, "non-numeric static covariate '" + opts.static_columns[p] + "'");
      double& slot = panel.static_covariates(p, j);
      if (!std::isnan(slot) && slot != *x)
        throw Error(ErrorKind::validation, "static covariate '" + opts.static_columns[p] +
                                               "' varies within unit '" + row[ucol] + "'");
      slot = *x;
    }
    for (std::size_t q = 0; q < vcols.size(); ++q) {
      auto x = csv::parse_double(row[vcols[q]]);
      if (!x || !std::isfinite(*x))
        throw Error(ErrorKind::parse, "non-numeric time-varying covariate '" + opts.tv_columns[q] +
                                          "' at (" + row[ucol] + ", " + row[tcol] + ")");
      panel.tv_covariates[q](j, t) = *x;
    }
  }
  for (Eigen::Index p = 0; p < P; ++p)
    for (Eigen::Index j = 0; j < J; ++j)
      if (std::isnan(panel.static_covariates(p, j)))
        throw Error(ErrorKind::validation, "static covariate '" + opts.static_columns[p] +
                                               "' missing for unit '" + panel.units[j] + "'");
  for (Eigen::Index q = 0; q < panel.Q(); ++q)
    if (!panel.tv_covariates[q].allFinite())
      throw Error(ErrorKind::validation, "time-varying covariate '" + opts.tv_columns[q] +
                                             "' must be supplied for every unit and time");

  panel.mask = build_mask(panel, windows);
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index t = 0; t < T; ++t)
      if (!panel.mask(j, t) && !present(j, t))
        throw Error(ErrorKind::validation, "ragged panel: no row for (" + panel.units[j] + ", " +
                                               panel.times[t] + ")");
  validate(panel);
  return panel;
}

/**
 * Centers and scales each unit using only cells strictly before the
 * earliest masked time in the panel, so no treatment-period value can
 * reach the scaling.
 */
inline StandardizedOutcome standardize_outcome(const PanelData& panel, ScalingPolicy policy = {}) {
  const auto J = panel.J(), T = panel.T();
  const auto cutoff = pre_period_cutoff(panel.mask);
  if (cutoff < 2) throw Error(ErrorKind::validation, "pre-period must contain at least 2 time points");

  StandardizedOutcome out;
  out.scaling.center.resize(J);
  out.scaling.scale.resize(J);
  out.scaling.policy = policy;
  out.scaling.cutoff = cutoff;
  std::vector<double> pre(static_cast<std::size_t>(cutoff));
  for (Eigen::Index j = 0; j < J; ++j) {
    for (Eigen::Index t = 0; t < cutoff; ++t) pre[t] = panel.outcome(j, t);
    const double mean = std::accumulate(pre.begin(), pre.end(), 0.0) / static_cast<double>(cutoff);
    const double center = policy.center == CenterPolicy::last_pre_value ? pre.back() : mean;
    double scale = 0.0;
    if (policy.scale == ScalePolicy::pre_sd) {
      scale = detail::sample_sd(pre);
      if (!(scale > 0.0))
        throw Error(ErrorKind::validation,
                    "unit '" + panel.units[j] + "' has zero pre-period standard deviation");
    } else {
      scale = mean;
      if (!(scale > 0.0))
        throw Error(ErrorKind::validation,
                    "unit '" + panel.units[j] + "' has a non-positive pre-period mean");
    }
    out.scaling.center(j) = center;
    out.scaling.scale(j) = scale;
  }
  out.values.resize(J, T);
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index t = 0; t < T; ++t)
      out.values(j, t) = panel.mask(j, t)
                             ? kSentinel
                             : (panel.outcome(j, t) - out.scaling.center(j)) / out.scaling.scale(j);
  return out;
}

/**
 * Static covariates are standardized across units with the full column;
 * time-varying covariates use pre-period cells of all units.
 */
inline StandardizedCovariates standardize_covariates(const PanelData& panel) {
  const auto J = panel.J();
  StandardizedCovariates out;
  out.x_static.resize(J, panel.P());
  for (Eigen::Index p = 0; p < panel.P(); ++p) {
    std::vector<double> col(panel.static_covariates.row(p).begin(), panel.static_covariates.row(p).end());
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(J);
    const double sd = detail::sample_sd(col);
    if (!(sd > 0.0))
      throw Error(ErrorKind::validation, "static covariate '" + panel.static_names[p] + "' is constant");
    for (Eigen::Index j = 0; j < J; ++j) out.x_static(j, p) = (col[j] - mean) / sd;
  }
  const auto cutoff = pre_period_cutoff(panel.mask);
  for (Eigen::Index q = 0; q < panel.Q(); ++q) {
    const auto& x = panel.tv_covariates[q];
    std::vector<double> pre;
    pre.reserve(static_cast<std::size_t>(J * cutoff));
    for (Eigen::Index j = 0; j < J; ++j)
      for (Eigen::Index t = 0; t < cutoff; ++t) pre.push_back(x(j, t));
    const double mean = std::accumulate(pre.begin(), pre.end(), 0.0) / static_cast<double>(pre.size());
    const double sd = pre.size() > 1 ? detail::sample_sd(pre) : 0.0;
    if (!(sd > 0.0))
      throw Error(ErrorKind::validation,
                  "time-varying covariate '" + panel.tv_names[q] + "' is constant over the pre-period");
    out.x_tv.push_back(((x.array() - mean) / sd).matrix());
  }
  return out;
}

/// Maps a standardized series for `unit` back to original units.
inline Eigen::VectorXd destandardize(const Eigen::Ref<const Eigen::VectorXd>& values,
                                     const ScalingInfo& scaling, Eigen::Index unit) {
  if (unit < 0 || unit >= scaling.center.size())
    throw Error(ErrorKind::validation, "unit index out of range");
  return (values.array() * scaling.scale(unit) + scaling.center(unit)).matrix();
}

/// Destandardizes a full J x T surface row by row.
inline Eigen::MatrixXd destandardize(const Eigen::MatrixXd& values, const ScalingInfo& scaling) {
  if (values.rows() != scaling.center.size())
    throw Error(ErrorKind::validation, "surface rows do not match scaling");
  Eigen::MatrixXd out(values.rows(), values.cols());
  for (Eigen::Index j = 0; j < values.rows(); ++j)
    out.row(j) = values.row(j).array() * scaling.scale(j) + scaling.center(j);
  return out;
}

/// Returns a copy of `panel` restricted to the listed units, in that order.
inline PanelData select_units(const PanelData& panel, const std::vector<Eigen::Index>& keep) {
  PanelData out;
  out.times = panel.times;
  out.static_names = panel.static_names;
  out.tv_names = panel.tv_names;
  const auto J = static_cast<Eigen::Index>(keep.size());
  out.outcome.resize(J, panel.T());
  out.mask.resize(J, panel.T());
  out.static_covariates.resize(panel.P(), J);
  out.tv_covariates.assign(panel.Q(), Eigen::MatrixXd(J, panel.T()));
  for (Eigen::Index i = 0; i < J; ++i) {
    const auto j = keep[i];
    out.units.push_back(panel.units[j]);
    out.outcome.row(i) = panel.outcome.row(j);
    out.mask.row(i) = panel.mask.row(j);
    if (panel.P() > 0) out.static_covariates.col(i) = panel.static_covariates.col(j);
    for (Eigen::Index q = 0; q < panel.Q(); ++q) out.tv_covariates[q].row(i) = panel.tv_covariates[q].row(j);
  }
  return out;
}

}  // namespace bsynth

#endif  // BSYNTH_PANEL_HPP
