#ifndef BSYNTH_DIAGNOSTICS_HPP
#define BSYNTH_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bsynth/csv.hpp"
#include "bsynth/error.hpp"

// Rank-normalized split-Rhat and bulk/tail effective sample size
// (Vehtari, Gelman, Simpson, Carpenter & Buerkner, 2021).
//
// Draw matrices are laid out draws x chains: one column per chain.

namespace bsynth::diag {

using DrawMatrix = Eigen::MatrixXd;

/// Upper bound on ESS as a multiple of the total number of draws.
inline constexpr double kEssCapFactor = 1.5;

/// Sample quantile by linear interpolation between order statistics (type 7).
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, prob);
}

inline bool is_constant(const DrawMatrix& x) {
  if (x.size() == 0) return true;
  const double first = x(0, 0);
  return (x.array() == first).all();
}

/// Splits every chain in half; an odd middle draw is dropped.
inline DrawMatrix split_chains(const DrawMatrix& x) {
  const Eigen::Index n = x.rows(), m = x.cols();
  const Eigen::Index half = n / 2;
  DrawMatrix out(half, 2 * m);
  for (Eigen::Index c = 0; c < m; ++c) {
    out.col(2 * c) = x.col(c).head(half);
    out.col(2 * c + 1) = x.col(c).tail(half);
  }
  return out;
}

/// Replaces pooled draws by normal scores of their fractional ranks (ties averaged).
inline DrawMatrix rank_normalize(const DrawMatrix& x) {
  const Eigen::Index total = x.size();
  std::vector<Eigen::Index> order(total);
  std::iota(order.begin(), order.end(), 0);
  const double* data = x.data();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return data[a] < data[b]; });
  std::vector<double> rank(total);
  for (Eigen::Index i = 0; i < total;) {
    Eigen::Index j = i;
    while (j + 1 < total && data[order[j + 1]] == data[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  const boost::math::normal_distribution<double> normal;
  DrawMatrix z(x.rows(), x.cols());
  const double denom = static_cast<double>(total) + 0.25;
  for (Eigen::Index i = 0; i < total; ++i) z.data()[i] = boost::math::quantile(normal, (rank[i] - 0.375) / denom);
  return z;
}

/// Classic potential scale reduction on the chains as given.
inline double rhat_basic(const DrawMatrix& x) {
  const double n = static_cast<double>(x.rows());
  const Eigen::Index m = x.cols();
  Eigen::VectorXd means = x.colwise().mean();
  Eigen::VectorXd vars(m);
  for (Eigen::Index c = 0; c < m; ++c) vars(c) = (x.col(c).array() - means(c)).square().sum() / (n - 1.0);
  const double w = vars.mean();
  const double b = m > 1 ? n * (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1) : 0.0;
  const double var_plus = (n - 1.0) / n * w + b / n;
  if (w == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(var_plus / w);
}

namespace detail {

inline void check_shape(const DrawMatrix& x) {
  if (x.cols() < 1) throw Error(ErrorKind::validation, "diagnostics need at least one chain");
  if (x.rows() < 8) throw Error(ErrorKind::validation, "diagnostics need at least 4 draws per split chain");
}

/// Biased autocovariance of one chain at `lag`.
inline double autocov(const Eigen::Ref<const Eigen::VectorXd>& v, double mean, Eigen::Index lag) {
  const Eigen::Index n = v.size();
  double s = 0.0;
  for (Eigen::Index i = 0; i + lag < n; ++i) s += (v(i) - mean) * (v(i + lag) - mean);
  return s / static_cast<double>(n);
}

}  // namespace detail

/**
 * Multi-chain ESS with Geyer's initial positive and monotone sequence
 * truncation, on the chains as given. Capped at kEssCapFactor x draws.
 * Empty optional when the draws are constant.
 */
inline std::optional<double> ess_basic(const DrawMatrix& x) {
  if (is_constant(x)) return std::nullopt;
  const Eigen::Index n = x.rows(), m = x.cols();
  const double nd = static_cast<double>(n);
  Eigen::VectorXd means = x.colwise().mean();
  std::vector<double> chain_var(m);
  for (Eigen::Index c = 0; c < m; ++c) chain_var[c] = detail::autocov(x.col(c), means(c), 0) * nd / (nd - 1.0);
  const double mean_var = std::accumulate(chain_var.begin(), chain_var.end(), 0.0) / static_cast<double>(m);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1);
  if (!(var_plus > 0.0)) return std::nullopt;

  auto acov_mean = [&](Eigen::Index lag) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) s += detail::autocov(x.col(c), means(c), lag);
    return s / static_cast<double>(m);
  };

  std::vector<double> rho(static_cast<std::size_t>(n) + 2, 0.0);
  double rho_even = 1.0;
  rho[0] = rho_even;
  double rho_odd = n > 1 ? 1.0 - (mean_var - acov_mean(1)) / var_plus : 0.0;
  rho[1] = rho_odd;
  Eigen::Index s = 1;
  while (s < n - 4 && (rho_even + rho_odd) > 0) {
    rho_even = 1.0 - (mean_var - acov_mean(s + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - acov_mean(s + 2)) / var_plus;
    if ((rho_even + rho_odd) >= 0) {
      rho[s + 1] = rho_even;
      rho[s + 2] = rho_odd;
    }
    s += 2;
  }
  const Eigen::Index max_s = s;
  if (rho_even > 0) rho[max_s + 1] = rho_even;

  for (Eigen::Index k = 1; k <= max_s - 3; k += 2) {
    if (rho[k + 1] + rho[k + 2] > rho[k - 1] + rho[k]) {
      rho[k + 1] = (rho[k - 1] + rho[k]) / 2.0;
      rho[k + 2] = rho[k + 1];
    }
  }
  const double total = static_cast<double>(n * m);
  double tau = -1.0 + rho[max_s + 1];
  for (Eigen::Index k = 0; k <= max_s; ++k) tau += 2.0 * rho[k];
  tau = std::max(tau, 1.0 / kEssCapFactor);
  return total / tau;
}

/// Rank-normalized split-Rhat. Empty optional for constant draws; infinite
/// when some split chain is constant but the chains disagree.
inline std::optional<double> split_rhat(const DrawMatrix& x) {
  detail::check_shape(x);
  if (is_constant(x)) return std::nullopt;
  return rhat_basic(rank_normalize(split_chains(x)));
}

enum class EssKind { bulk, tail };

inline std::optional<double> ess_bulk(const DrawMatrix& x) {
  detail::check_shape(x);
  if (is_constant(x)) return std::nullopt;
  return ess_basic(rank_normalize(split_chains(x)));
}

/// Minimum ESS of the 5% and 95% quantile indicators.
inline std::optional<double> ess_tail(const DrawMatrix& x) {
  detail::check_shape(x);
  if (is_constant(x)) return std::nullopt;
  std::vector<double> pooled(x.data(), x.data() + x.size());
  std::sort(pooled.begin(), pooled.end());
  std::optional<double> best;
  for (double prob : {0.05, 0.95}) {
    const double q = quantile_sorted(pooled, prob);
    DrawMatrix ind = (x.array() <= q).cast<double>();
    auto e = ess_basic(split_chains(ind));
    if (!e) return std::nullopt;
    best = best ? std::min(*best, *e) : *e;
  }
  return best;
}

inline std::optional<double> ess(const DrawMatrix& x, EssKind kind) {
  return kind == EssKind::bulk ? ess_bulk(x) : ess_tail(x);
}

inline constexpr std::array<double, 7> kSummaryProbs = {0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975};

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  std::array<double, 7> quantiles{};  // at kSummaryProbs
  std::optional<double> rhat, ess_bulk, ess_tail;
};

inline ParamSummary summarize(const std::string& name, const DrawMatrix& x) {
  ParamSummary s;
  s.name = name;
  std::vector<double> pooled(x.data(), x.data() + x.size());
  const double n = static_cast<double>(pooled.size());
  s.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : pooled) ss += (v - s.mean) * (v - s.mean);
  s.sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(pooled.begin(), pooled.end());
  for (std::size_t i = 0; i < kSummaryProbs.size(); ++i) s.quantiles[i] = quantile_sorted(pooled, kSummaryProbs[i]);
  if (x.rows() >= 8) {
    s.rhat = split_rhat(x);
    s.ess_bulk = ess_bulk(x);
    s.ess_tail = ess_tail(x);
  }
  return s;
}

inline std::vector<std::string> summary_header() {
  return {"variable", "mean", "sd", "q2.5", "q5", "q25", "q50", "q75", "q95", "q97.5", "rhat", "ess_bulk", "ess_tail"};
}

/// Delimiter-separated summary table; undefined diagnostics print as NA.
inline void write_summary(std::ostream& out, const std::vector<ParamSummary>& rows) {
  csv::Writer w(out);
  w.row(summary_header());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : rows) {
    w.field(r.name).field(r.mean).field(r.sd);
    for (double q : r.quantiles) w.field(q);
    w.field(r.rhat.value_or(nan)).field(r.ess_bulk.value_or(nan)).field(r.ess_tail.value_or(nan));
    w.end_row();
  }
}

}  // namespace bsynth::diag

#endif  // BSYNTH_DIAGNOSTICS_HPP
