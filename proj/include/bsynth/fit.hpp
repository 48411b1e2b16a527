#ifndef BSYNTH_FIT_HPP
#define BSYNTH_FIT_HPP

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "bsynth/ad.hpp"
#include "bsynth/model.hpp"
#include "bsynth/sampler.hpp"

namespace bsynth {

/// Sampler target over a Model; owns the chain's tape.
class ModelTarget {
public:
  explicit ModelTarget(const Model& model) : model_(&model) {}

  double operator()(const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
    const double lp = model_->config().gradient == GradientMethod::fused ? model_->log_posterior_gradient(q, grad)
                                                                         : model_->log_posterior_gradient(q, grad, tape_);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return lp;
  }

private:
  const Model* model_;
  ad::Tape tape_;
};

inline RunResult fit(const Model& model, const NutsConfig& cfg) {
  return run_chains([&model] { return ModelTarget(model); }, model.dim(), cfg);
}

/// All post-warmup draws in chain order.
inline std::vector<Eigen::VectorXd> pooled_draws(const RunResult& run) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& c : run.chains)
    for (Eigen::Index i = 0; i < c.draws.rows(); ++i) out.emplace_back(c.draws.row(i).transpose());
  return out;
}

}  // namespace bsynth

#endif  // BSYNTH_FIT_HPP
