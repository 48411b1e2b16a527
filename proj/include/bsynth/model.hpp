#ifndef BSYNTH_MODEL_HPP
#define BSYNTH_MODEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "bsynth/ad.hpp"
#include "bsynth/error.hpp"
#include "bsynth/log.hpp"
#include "bsynth/panel.hpp"

namespace bsynth {

/// How the sampler obtains gradients: the hand-derived fused pass or the AD tape.
enum class GradientMethod { fused, tape };

inline const char* to_string(GradientMethod m) { return m == GradientMethod::fused ? "fused" : "tape"; }

inline GradientMethod parse_gradient_method(const std::string& s) {
  if (s == "fused") return GradientMethod::fused;
  if (s == "tape") return GradientMethod::tape;
  throw Error(ErrorKind::config, "unknown gradient method '" + s + "' (expected fused or tape)");
}

/// Latent-factor model settings. Prior scales are standard deviations.
struct ModelConfig {
  int factors = 8;
  double delta_sd = 2.0;
  double f_lower_sd = 2.0;
  double f_diag_sd = 1.0;
  double kappa_sd = 1.0;
  double gamma_sd = 1.0;
  double beta_off_sd = 1.0;
  double sigma_sd = 1.0;
  bool use_static_covariates = true;
  bool use_tv_covariates = true;
  GradientMethod gradient = GradientMethod::fused;
};

/// Contiguous slice of the unconstrained parameter vector.
struct Block {
  Eigen::Index offset = 0;
  Eigen::Index size = 0;

  Eigen::Index end() const { return offset + size; }
};

/// Number of free strictly-lower factor loadings for a T x L factor matrix.
constexpr Eigen::Index lower_count(Eigen::Index T, Eigen::Index L) {
  return L * (T - L) + L * (L - 1) / 2;
}

/**
 * Packing of the unconstrained vector, in order: F_diag, F_lower, delta,
 * kappa, gamma, beta_off (unit-major), lambda, eta, tau, y_missing (unit
 * then time scan of masked cells), sigma.
 */
struct ParameterLayout {
  Eigen::Index J = 0, T = 0, L = 0, P = 0, Q = 0;
  Block f_diag, f_lower, delta, kappa, gamma, beta_off, lambda, eta, tau, y_missing, sigma;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> missing_cells;  // (unit, time)
  Eigen::Index dim = 0;
};

/// Builds the layout from dimensions; `P` and `Q` are the covariates in use.
inline ParameterLayout build_layout(const ModelConfig& config, const Mask& mask, Eigen::Index P,
                                    Eigen::Index Q) {
  ParameterLayout lay;
  lay.J = mask.rows();
  lay.T = mask.cols();
  lay.L = config.factors;
  lay.P = P;
  lay.Q = Q;
  if (lay.L < 1) throw Error(ErrorKind::config, "number of factors must be at least 1");
  if (lay.L >= lay.T)
    throw Error(ErrorKind::config, "number of factors (" + std::to_string(lay.L) +
                                       ") must be smaller than the number of time points (" +
                                       std::to_string(lay.T) + ")");
  if (lay.L > lay.J)
    log::warn("number of factors exceeds number of units; loadings will be weakly identified");
  for (Eigen::Index j = 0; j < lay.J; ++j)
    for (Eigen::Index t = 0; t < lay.T; ++t)
      if (mask(j, t)) lay.missing_cells.emplace_back(j, t);

  Eigen::Index at = 0;
  auto take = [&](Block& b, Eigen::Index n) {
    b.offset = at;
    b.size = n;
    at += n;
  };
  take(lay.f_diag, lay.L);
  take(lay.f_lower, lower_count(lay.T, lay.L));
  take(lay.delta, lay.T);
  take(lay.kappa, lay.J);
  take(lay.gamma, P + Q);
  take(lay.beta_off, lay.J * lay.L);
  take(lay.lambda, lay.L);
  take(lay.eta, 1);
  take(lay.tau, lay.J);
  take(lay.y_missing, static_cast<Eigen::Index>(lay.missing_cells.size()));
  take(lay.sigma, 1);
  lay.dim = at;
  return lay;
}

inline ParameterLayout build_layout(const ModelConfig& config, const PanelData& panel) {
  return build_layout(config, panel.mask, config.use_static_covariates ? panel.P() : 0,
                      config.use_tv_covariates ? panel.Q() : 0);
}

/// Parameters on their natural scale. `S` is double or ad::Var.
template <class S>
struct Params {
  std::vector<S> f_diag, f_lower, delta, kappa, gamma, beta_off, lambda, tau, y_missing;
  S eta{}, sigma{};
};

using ConstrainedParams = Params<double>;

/**
 * Applies the bound transforms: exp for positives, logistic for (0, 1),
 * identity otherwise. Log-Jacobian terms are appended to `jacobian`.
 */
template <class S>
Params<S> constrain(std::span<const S> theta, const ParameterLayout& lay, std::vector<S>& jacobian) {
  if (static_cast<Eigen::Index>(theta.size()) != lay.dim)
    throw Error(ErrorKind::model, "parameter vector has the wrong length");
  auto slice = [&](const Block& b) {
    return std::vector<S>(theta.begin() + b.offset, theta.begin() + b.end());
  };
  auto positive = [&](const S& x) {
    jacobian.push_back(x);
    return ad::exp(x);
  };
  auto unit = [&](const S& x) {
    jacobian.push_back(ad::log_inv_logit(x));
    jacobian.push_back(ad::log1m_inv_logit(x));
    return ad::inv_logit(x);
  };
  Params<S> p;
  for (Eigen::Index i = 0; i < lay.f_diag.size; ++i) p.f_diag.push_back(positive(theta[lay.f_diag.offset + i]));
  p.f_lower = slice(lay.f_lower);
  p.delta = slice(lay.delta);
  p.kappa = slice(lay.kappa);
  p.gamma = slice(lay.gamma);
  p.beta_off = slice(lay.beta_off);
  for (Eigen::Index i = 0; i < lay.lambda.size; ++i) p.lambda.push_back(unit(theta[lay.lambda.offset + i]));
  p.eta = unit(theta[lay.eta.offset]);
  for (Eigen::Index i = 0; i < lay.tau.size; ++i) p.tau.push_back(unit(theta[lay.tau.offset + i]));
  p.y_missing = slice(lay.y_missing);
  p.sigma = positive(theta[lay.sigma.offset]);
  return p;
}

/// Double-precision constrain returning the summed log-Jacobian.
inline std::pair<ConstrainedParams, double> constrain(const Eigen::VectorXd& theta, const ParameterLayout& lay) {
  std::vector<double> jac;
  auto p = constrain<double>(std::span<const double>(theta.data(), theta.size()), lay, jac);
  double sum = 0.0;
  for (double v : jac) sum += v;
  return {std::move(p), sum};
}

/// Inverse of constrain.
inline Eigen::VectorXd unconstrain(const ConstrainedParams& p, const ParameterLayout& lay) {
  Eigen::VectorXd theta(lay.dim);
  auto put = [&](const Block& b, const std::vector<double>& v, auto&& fn) {
    if (static_cast<Eigen::Index>(v.size()) != b.size)
      throw Error(ErrorKind::model, "parameter block has the wrong length");
    for (Eigen::Index i = 0; i < b.size; ++i) theta(b.offset + i) = fn(v[i]);
  };
  auto id = [](double x) { return x; };
  auto logf = [](double x) { return std::log(x); };
  auto logit = [](double u) { return std::log(u) - std::log1p(-u); };
  put(lay.f_diag, p.f_diag, logf);
  put(lay.f_lower, p.f_lower, id);
  put(lay.delta, p.delta, id);
  put(lay.kappa, p.kappa, id);
  put(lay.gamma, p.gamma, id);
  put(lay.beta_off, p.beta_off, id);
  put(lay.lambda, p.lambda, logit);
  theta(lay.eta.offset) = logit(p.eta);
  put(lay.tau, p.tau, logit);
  put(lay.y_missing, p.y_missing, id);
  theta(lay.sigma.offset) = std::log(p.sigma);
  return theta;
}

namespace detail {

/// Position of F(row, col), row > col, in the strictly-lower vector.
constexpr Eigen::Index lower_index(Eigen::Index T, Eigen::Index row, Eigen::Index col) {
  // Columns are filled top to bottom; column c holds T - c - 1 entries.
  return col * (T - 1) - col * (col - 1) / 2 + (row - col - 1);
}

/**
 * Row-major T x L factor entries; row t only uses its first min(t + 1, L)
 * columns, the rest are structural zeros and left untouched.
 */
template <class S>
std::vector<S> factor_rows(Eigen::Index T, Eigen::Index L, const std::vector<S>& diag, const std::vector<S>& lower) {
  std::vector<S> f(static_cast<std::size_t>(T * L));
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index l = 0; l < L && l <= t; ++l)
      f[t * L + l] = (t == l) ? diag[l] : lower[lower_index(T, t, l)];
  }
  return f;
}

/// Unit-major loadings: result[j * L + l] = beta(l, j).
template <class S>
std::vector<S> loadings(Eigen::Index J, Eigen::Index L, const std::vector<S>& off, const std::vector<S>& lambda,
                        const S& eta, const std::vector<S>& tau) {
  constexpr double half_pi = 0.5 * std::numbers::pi;
  const S eta_scale = ad::tan(eta * half_pi);
  std::vector<S> cache;
  cache.reserve(L);
  for (Eigen::Index l = 0; l < L; ++l) cache.push_back(ad::tan(lambda[l] * half_pi) * eta_scale);
  std::vector<S> beta;
  beta.reserve(J * L);
  for (Eigen::Index j = 0; j < J; ++j) {
    const S tau_scale = ad::tan(tau[j] * half_pi);
    for (Eigen::Index l = 0; l < L; ++l) beta.push_back(cache[l] * (tau_scale * off[j * L + l]));
  }
  return beta;
}

}  // namespace detail

/**
 * Lower-triangular T x L factor matrix. Strictly-lower entries are taken
 * column by column, top to bottom; the upper triangle of the leading
 * L x L block is zero.
 */
inline Eigen::MatrixXd make_factor_matrix(Eigen::Index T, const Eigen::VectorXd& diag, const Eigen::VectorXd& lower) {
  const Eigen::Index L = diag.size();
  if (L < 1 || L >= T) throw Error(ErrorKind::model, "factor count must satisfy 1 <= L < T");
  if (lower.size() != lower_count(T, L))
    throw Error(ErrorKind::model, "expected " + std::to_string(lower_count(T, L)) + " lower loadings, got " +
                                      std::to_string(lower.size()));
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(T, L);
  Eigen::Index idx = 0;
  for (Eigen::Index j = 0; j < L; ++j) {
    f(j, j) = diag(j);
    for (Eigen::Index i = j + 1; i < T; ++i) f(i, j) = lower(idx++);
  }
  return f;
}

/**
 * L x J loadings with horseshoe+ scales:
 * beta(l, j) = tan(pi lambda_l / 2) tan(pi eta / 2) tan(pi tau_j / 2) off(j, l).
 */
inline Eigen::MatrixXd make_beta(const Eigen::MatrixXd& off, const Eigen::VectorXd& lambda, double eta,
                                 const Eigen::VectorXd& tau) {
  const Eigen::Index J = off.rows(), L = off.cols();
  if (lambda.size() != L || tau.size() != J) throw Error(ErrorKind::model, "make_beta dimension mismatch");
  auto in_unit = [](double u) { return u > 0.0 && u < 1.0; };
  if (!in_unit(eta) || !lambda.unaryExpr(in_unit).all() || !tau.unaryExpr(in_unit).all())
    throw Error(ErrorKind::model, "shrinkage parameters must lie in (0, 1)");
  std::vector<double> offv(J * L), lam(lambda.data(), lambda.data() + L), tv(tau.data(), tau.data() + J);
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index l = 0; l < L; ++l) offv[j * L + l] = off(j, l);
  auto b = detail::loadings<double>(J, L, offv, lam, eta, tv);
  Eigen::MatrixXd beta(L, J);
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index l = 0; l < L; ++l) beta(l, j) = b[j * L + l];
  return beta;
}

/// Standardized inputs consumed by the density.
struct ModelData {
  Eigen::MatrixXd y;                 // J x T standardized, NaN where masked
  Mask mask;                         // J x T
  Eigen::MatrixXd x_static;          // J x P in use (P may be 0)
  std::vector<Eigen::MatrixXd> x_tv; // Q in use, each J x T
};

/**
 * The latent-factor model bound to one standardized panel. Immutable after
 * construction; evaluation is a pure function of theta, so one Model can
 * serve several chains as long as each chain brings its own tape.
 */
class Model {
public:
  Model(const PanelData& panel, ModelConfig config, ScalingPolicy policy = {}) : config_(config) {
    validate(panel);
    auto std_out = standardize_outcome(panel, policy);
    scaling_ = std_out.scaling;
    data_.y = std::move(std_out.values);
    data_.mask = panel.mask;
    auto cov = standardize_covariates(panel);
    data_.x_static = config.use_static_covariates ? cov.x_static : Eigen::MatrixXd(panel.J(), 0);
    if (config.use_tv_covariates) data_.x_tv = std::move(cov.x_tv);
    layout_ = build_layout(config, data_.mask, data_.x_static.cols(),
                           static_cast<Eigen::Index>(data_.x_tv.size()));
    units_ = panel.units;
    times_ = panel.times;
    static_names_ = config.use_static_covariates ? panel.static_names : std::vector<std::string>{};
    tv_names_ = config.use_tv_covariates ? panel.tv_names : std::vector<std::string>{};
  }

  const ModelConfig& config() const { return config_; }
  const ParameterLayout& layout() const { return layout_; }
  const ScalingInfo& scaling() const { return scaling_; }
  const ModelData& data() const { return data_; }
  Eigen::Index dim() const { return layout_.dim; }

  /// Log posterior on the unconstrained scale (Jacobian included).
  template <class S>
  S log_density(std::span<const S> theta) const {
    const auto& lay = layout_;
    const auto J = lay.J, T = lay.T, L = lay.L, P = lay.P, Q = lay.Q;
    std::vector<S> terms;
    terms.reserve(static_cast<std::size_t>(J * T + 4 * lay.dim + 16));
    auto p = constrain<S>(theta, lay, terms);

    auto add_prior = [&](const std::vector<S>& v, double sd) {
      if (!v.empty()) terms.push_back(ad::normal_lpdf(std::span<const S>(v), 0.0, sd));
    };
    add_prior(p.f_diag, config_.f_diag_sd);
    add_prior(p.f_lower, config_.f_lower_sd);
    add_prior(p.delta, config_.delta_sd);
    add_prior(p.kappa, config_.kappa_sd);
    add_prior(p.gamma, config_.gamma_sd);
    add_prior(p.beta_off, config_.beta_off_sd);
    terms.push_back(ad::normal_lpdf(p.sigma, 0.0, config_.sigma_sd));

    const auto f = detail::factor_rows<S>(T, L, p.f_diag, p.f_lower);
    const auto beta = detail::loadings<S>(J, L, p.beta_off, p.lambda, p.eta, p.tau);

    // Per-unit offset kappa_j + sum_p X_std(j, p) gamma_p.
    std::vector<S> unit_offset;
    unit_offset.reserve(J);
    const std::span<const S> gamma_static(p.gamma.data(), static_cast<std::size_t>(P));
    for (Eigen::Index j = 0; j < J; ++j) {
      if (P > 0) {
        std::vector<double> xrow(data_.x_static.row(j).begin(), data_.x_static.row(j).end());
        unit_offset.push_back(p.kappa[j] + ad::dot(gamma_static, std::span<const double>(xrow)));
      } else {
        unit_offset.push_back(p.kappa[j]);
      }
    }

    const std::span<const S> gamma_tv(p.gamma.data() + P, static_cast<std::size_t>(Q));
    std::vector<double> xtv(static_cast<std::size_t>(Q));
    std::size_t miss = 0;
    for (Eigen::Index j = 0; j < J; ++j) {
      for (Eigen::Index t = 0; t < T; ++t) {
        const std::size_t active = static_cast<std::size_t>(std::min<Eigen::Index>(t + 1, L));
        const std::span<const S> frow(f.data() + t * L, active);
        const std::span<const S> brow(beta.data() + j * L, active);
        const S offs[2] = {p.delta[t], unit_offset[j]};
        for (Eigen::Index q = 0; q < Q; ++q) xtv[q] = data_.x_tv[q](j, t);
        if (data_.mask(j, t)) {
          terms.push_back(ad::normal_linear_lpdf<S>(p.y_missing[miss++], frow, brow, std::span<const S>(offs, 2),
                                                    gamma_tv, std::span<const double>(xtv), p.sigma));
        } else {
          terms.push_back(ad::normal_linear_lpdf<S>(data_.y(j, t), frow, brow, std::span<const S>(offs, 2),
                                                    gamma_tv, std::span<const double>(xtv), p.sigma));
        }
      }
    }
    return ad::sum(std::span<const S>(terms));
  }

  double log_posterior(const Eigen::VectorXd& theta) const {
    return log_density<double>(std::span<const double>(theta.data(), theta.size()));
  }

  /// Value and exact gradient through one recording on `tape`.
  double log_posterior_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad, ad::Tape& tape) const {
    auto g = ad::gradient(tape, std::span<const double>(theta.data(), theta.size()),
                          [this](std::span<const ad::Var> x) { return log_density<ad::Var>(x); });
    grad = Eigen::Map<const Eigen::VectorXd>(g.grad.data(), static_cast<Eigen::Index>(g.grad.size()));
    return g.value;
  }

  /**
   * Value and gradient by a hand-derived pass over the same density.
   * Agrees with the tape to rounding; no allocation beyond a few
   * J x T temporaries.
   */
  double log_posterior_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

  /// Gradient through the configured method.
  Eigen::VectorXd grad_log_posterior(const Eigen::VectorXd& theta) const {
    Eigen::VectorXd grad;
    if (config_.gradient == GradientMethod::fused) {
      log_posterior_gradient(theta, grad);
    } else {
      ad::Tape tape;
      log_posterior_gradient(theta, grad, tape);
    }
    return grad;
  }

  /// Standardized J x T mean surface (no observation noise).
  Eigen::MatrixXd mean_matrix(const ConstrainedParams& p) const {
    const auto& lay = layout_;
    const auto J = lay.J, T = lay.T, L = lay.L, P = lay.P, Q = lay.Q;
    const auto f = detail::factor_rows<double>(T, L, p.f_diag, p.f_lower);
    const auto beta = detail::loadings<double>(J, L, p.beta_off, p.lambda, p.eta, p.tau);
    Eigen::MatrixXd mean(J, T);
    for (Eigen::Index j = 0; j < J; ++j) {
      double unit_term = p.kappa[j];
      for (Eigen::Index k = 0; k < P; ++k) unit_term += data_.x_static(j, k) * p.gamma[k];
      for (Eigen::Index t = 0; t < T; ++t) {
        double m = p.delta[t] + unit_term;
        for (Eigen::Index l = 0; l < L && l <= t; ++l) m += f[t * L + l] * beta[j * L + l];
        for (Eigen::Index q = 0; q < Q; ++q) m += p.gamma[P + q] * data_.x_tv[q](j, t);
        mean(j, t) = m;
      }
    }
    return mean;
  }

  Eigen::MatrixXd mean_matrix(const Eigen::VectorXd& theta) const { return mean_matrix(constrain(theta, layout_).first); }

  /// Loadings matrix (L x J) implied by theta.
  Eigen::MatrixXd loadings(const Eigen::VectorXd& theta) const {
    const auto p = constrain(theta, layout_).first;
    const auto b = detail::loadings<double>(layout_.J, layout_.L, p.beta_off, p.lambda, p.eta, p.tau);
    Eigen::MatrixXd out(layout_.L, layout_.J);
    for (Eigen::Index j = 0; j < layout_.J; ++j)
      for (Eigen::Index l = 0; l < layout_.L; ++l) out(l, j) = b[j * layout_.L + l];
    return out;
  }

  /// Names of the unconstrained coordinates, in layout order.
  std::vector<std::string> unconstrained_names() const {
    std::vector<std::string> names;
    names.reserve(layout_.dim);
    for (auto& n : constrained_names()) names.push_back("theta." + n);
    return names;
  }

  /// Names matching `constrained_values`.
  std::vector<std::string> constrained_names() const {
    const auto& lay = layout_;
    std::vector<std::string> n;
    n.reserve(lay.dim);
    for (Eigen::Index l = 0; l < lay.L; ++l) n.push_back("F_diag[" + std::to_string(l + 1) + "]");
    for (Eigen::Index l = 0; l < lay.L; ++l)
      for (Eigen::Index t = l + 1; t < lay.T; ++t)
        n.push_back("F_lower[" + times_[t] + "," + std::to_string(l + 1) + "]");
    for (Eigen::Index t = 0; t < lay.T; ++t) n.push_back("delta[" + times_[t] + "]");
    for (Eigen::Index j = 0; j < lay.J; ++j) n.push_back("kappa[" + units_[j] + "]");
    for (const auto& s : static_names_) n.push_back("gamma[" + s + "]");
    for (const auto& s : tv_names_) n.push_back("gamma[" + s + "]");
    for (Eigen::Index j = 0; j < lay.J; ++j)
      for (Eigen::Index l = 0; l < lay.L; ++l)
        n.push_back("beta_off[" + units_[j] + "," + std::to_string(l + 1) + "]");
    for (Eigen::Index l = 0; l < lay.L; ++l) n.push_back("lambda[" + std::to_string(l + 1) + "]");
    n.push_back("eta");
    for (Eigen::Index j = 0; j < lay.J; ++j) n.push_back("tau[" + units_[j] + "]");
    for (auto [j, t] : lay.missing_cells) n.push_back("y_missing[" + units_[j] + "," + times_[t] + "]");
    n.push_back("sigma");
    return n;
  }

  /// Constrained values in layout order (same length as theta).
  Eigen::VectorXd constrained_values(const Eigen::VectorXd& theta) const {
    const auto p = constrain(theta, layout_).first;
    Eigen::VectorXd out(layout_.dim);
    Eigen::Index at = 0;
    auto put = [&](const std::vector<double>& v) {
      for (double x : v) out(at++) = x;
    };
    put(p.f_diag);
    // F_lower is stored column by column, matching the name order above.
    put(p.f_lower);
    put(p.delta);
    put(p.kappa);
    put(p.gamma);
    put(p.beta_off);
    put(p.lambda);
    out(at++) = p.eta;
    put(p.tau);
    put(p.y_missing);
    out(at++) = p.sigma;
    return out;
  }

  const std::vector<std::string>& units() const { return units_; }
  const std::vector<std::string>& times() const { return times_; }
  const std::vector<std::string>& covariate_names() const { return static_names_; }
  const std::vector<std::string>& tv_covariate_names() const { return tv_names_; }

private:
  ModelConfig config_;
  ScalingInfo scaling_;
  ModelData data_;
  ParameterLayout layout_;
  std::vector<std::string> units_, times_, static_names_, tv_names_;
};


inline double Model::log_posterior_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  const auto& lay = layout_;
  const auto J = lay.J, T = lay.T, L = lay.L, P = lay.P, Q = lay.Q;
  if (theta.size() != lay.dim) throw Error(ErrorKind::model, "parameter vector has the wrong length");
  constexpr double half_pi = 0.5 * std::numbers::pi;
  constexpr double half_log_2pi = 0.91893853320467274178;
  grad.setZero(lay.dim);
  double lp = 0.0;

  auto normal_prior = [&](const Block& b, double sd) {
    const double inv_var = 1.0 / (sd * sd);
    for (Eigen::Index i = b.offset; i < b.end(); ++i) {
      lp += -0.5 * theta(i) * theta(i) * inv_var - half_log_2pi - std::log(sd);
      grad(i) = -theta(i) * inv_var;
    }
  };
  normal_prior(lay.f_lower, config_.f_lower_sd);
  normal_prior(lay.delta, config_.delta_sd);
  normal_prior(lay.kappa, config_.kappa_sd);
  normal_prior(lay.gamma, config_.gamma_sd);
  normal_prior(lay.beta_off, config_.beta_off_sd);

  // Positive parameters x = exp(v): half-normal prior plus Jacobian v.
  auto positive = [&](Eigen::Index i, double sd) {
    const double x = std::exp(theta(i));
    lp += -0.5 * x * x / (sd * sd) - half_log_2pi - std::log(sd) + theta(i);
    grad(i) = -x * x / (sd * sd) + 1.0;
    return x;
  };
  // Unit-interval parameters u = logistic(v), scale tan(pi u / 2). Returns
  // the scale and d scale / d v.
  auto unit_scale = [&](Eigen::Index i) {
    const double v = theta(i);
    const double lu = ad::log_inv_logit(v), l1u = ad::log1m_inv_logit(v);
    const double u = std::exp(lu);
    lp += lu + l1u;
    grad(i) = std::exp(l1u) - u;
    const double s = std::tan(half_pi * u);
    return std::pair<double, double>{s, half_pi * (1.0 + s * s) * u * std::exp(l1u)};
  };

  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(T, L);
  for (Eigen::Index l = 0; l < L; ++l) {
    f(l, l) = positive(lay.f_diag.offset + l, config_.f_diag_sd);
    for (Eigen::Index t = l + 1; t < T; ++t) f(t, l) = theta(lay.f_lower.offset + detail::lower_index(T, t, l));
  }
  const double sigma = positive(lay.sigma.offset, config_.sigma_sd);

  Eigen::VectorXd lam(L), dlam(L), tau(J), dtau(J);
  for (Eigen::Index l = 0; l < L; ++l) std::tie(lam(l), dlam(l)) = unit_scale(lay.lambda.offset + l);
  const auto [eta, deta] = unit_scale(lay.eta.offset);
  for (Eigen::Index j = 0; j < J; ++j) std::tie(tau(j), dtau(j)) = unit_scale(lay.tau.offset + j);

  // off is J x L unit-major in theta, viewed here as L x J.
  const Eigen::Map<const Eigen::MatrixXd> off(theta.data() + lay.beta_off.offset, L, J);
  const Eigen::MatrixXd beta = (eta * lam).asDiagonal() * off * tau.asDiagonal();

  Eigen::MatrixXd mean = (f * beta).transpose();  // J x T
  const Eigen::Map<const Eigen::VectorXd> delta(theta.data() + lay.delta.offset, T);
  const Eigen::Map<const Eigen::VectorXd> kappa(theta.data() + lay.kappa.offset, J);
  const Eigen::Map<const Eigen::VectorXd> gamma(theta.data() + lay.gamma.offset, P + Q);
  Eigen::VectorXd unit_term = kappa;
  if (P > 0) unit_term += data_.x_static * gamma.head(P);
  mean.rowwise() += delta.transpose();
  mean.colwise() += unit_term;
  for (Eigen::Index q = 0; q < Q; ++q) mean += gamma(P + q) * data_.x_tv[q];

  Eigen::MatrixXd y = data_.y;
  for (std::size_t k = 0; k < lay.missing_cells.size(); ++k) {
    const auto [j, t] = lay.missing_cells[k];
    y(j, t) = theta(lay.y_missing.offset + static_cast<Eigen::Index>(k));
  }
  const Eigen::MatrixXd resid = y - mean;
  const double ss = resid.squaredNorm();
  const double n = static_cast<double>(J * T);
  lp += -0.5 * ss / (sigma * sigma) - n * (std::log(sigma) + half_log_2pi);
  grad(lay.sigma.offset) += ss / (sigma * sigma) - n;

  // e = d lp / d mean.
  const Eigen::MatrixXd e = resid / (sigma * sigma);
  for (std::size_t k = 0; k < lay.missing_cells.size(); ++k) {
    const auto [j, t] = lay.missing_cells[k];
    grad(lay.y_missing.offset + static_cast<Eigen::Index>(k)) = -e(j, t);
  }
  const Eigen::VectorXd e_time = e.colwise().sum().transpose();
  const Eigen::VectorXd e_unit = e.rowwise().sum();
  grad.segment(lay.delta.offset, T) += e_time;
  grad.segment(lay.kappa.offset, J) += e_unit;
  if (P > 0) grad.segment(lay.gamma.offset, P) += data_.x_static.transpose() * e_unit;
  for (Eigen::Index q = 0; q < Q; ++q) grad(lay.gamma.offset + P + q) += (e.array() * data_.x_tv[q].array()).sum();

  const Eigen::MatrixXd g_f = e.transpose() * beta.transpose();  // T x L
  const Eigen::MatrixXd g_beta = f.transpose() * e.transpose();  // L x J
  for (Eigen::Index l = 0; l < L; ++l) {
    grad(lay.f_diag.offset + l) += g_f(l, l) * f(l, l);
    for (Eigen::Index t = l + 1; t < T; ++t) grad(lay.f_lower.offset + detail::lower_index(T, t, l)) += g_f(t, l);
  }
  // beta = eta lam_l tau_j off(l, j); h = g_beta .* off.
  const Eigen::MatrixXd h = g_beta.cwiseProduct(off);
  Eigen::Map<Eigen::MatrixXd>(grad.data() + lay.beta_off.offset, L, J) +=
      ((eta * lam).asDiagonal() * g_beta * tau.asDiagonal());
  const Eigen::VectorXd h_lam = h * tau;                     // sum over units
  const Eigen::VectorXd h_tau = h.transpose() * lam;         // sum over factors
  for (Eigen::Index l = 0; l < L; ++l) grad(lay.lambda.offset + l) += eta * h_lam(l) * dlam(l);
  for (Eigen::Index j = 0; j < J; ++j) grad(lay.tau.offset + j) += eta * h_tau(j) * dtau(j);
  grad(lay.eta.offset) += lam.dot(h_lam) * deta;
  return lp;
}

}  // namespace bsynth

#endif  // BSYNTH_MODEL_HPP
