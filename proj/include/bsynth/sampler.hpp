#ifndef BSYNTH_SAMPLER_HPP
#define BSYNTH_SAMPLER_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "bsynth/error.hpp"
#include "bsynth/log.hpp"

// No-U-Turn sampler with multinomial trajectory sampling, dual-averaging
// step size adaptation and a windowed diagonal metric.
//
// References: Hoffman & Gelman (2014), JMLR 15; Betancourt (2017),
// arXiv:1701.02434.

namespace bsynth {

enum class InitMode { uniform, fixed };

inline const char* to_string(InitMode m) { return m == InitMode::uniform ? "uniform" : "fixed"; }

inline InitMode parse_init_mode(const std::string& s) {
  if (s == "uniform") return InitMode::uniform;
  if (s == "fixed") return InitMode::fixed;
  throw Error(ErrorKind::config, "unknown init mode '" + s + "'");
}

struct NutsConfig {
  int chains = 4;
  int warmup = 500;
  int samples = 500;
  int max_treedepth = 14;
  double adapt_delta = 0.95;
  InitMode init_mode = InitMode::uniform;
  double init_radius = 0.1;
  std::uint64_t seed = 20201;
  /// Worker threads for chains; 0 means one per chain.
  int threads = 0;

  void validate() const {
    if (chains < 1) throw Error(ErrorKind::config, "chains must be >= 1");
    if (warmup < 1 || samples < 1) throw Error(ErrorKind::config, "warmup and samples must be >= 1");
    if (!(adapt_delta > 0.0 && adapt_delta < 1.0)) throw Error(ErrorKind::config, "adapt_delta must lie in (0, 1)");
    if (max_treedepth < 1 || max_treedepth > 20) throw Error(ErrorKind::config, "max_treedepth must lie in [1, 20]");
    if (!(init_radius >= 0.0) || !std::isfinite(init_radius)) throw Error(ErrorKind::config, "init_radius must be finite and >= 0");
    if (threads < 0) throw Error(ErrorKind::config, "threads must be >= 0");
  }
};

/// Post-warmup output of one chain.
struct ChainDraws {
  int chain = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd draws;  // samples x dim, unconstrained
  std::vector<double> lp;
  std::vector<char> divergent;
  std::vector<int> treedepth;
  std::vector<int> n_leapfrog;
  std::vector<double> energy;
  std::vector<double> accept_stat;
  double step_size = 0.0;
  Eigen::VectorXd inv_mass;
  int warmup_divergences = 0;

  int divergences() const { return static_cast<int>(std::count(divergent.begin(), divergent.end(), 1)); }
  int treedepth_hits(int max_depth) const {
    return static_cast<int>(std::count(treedepth.begin(), treedepth.end(), max_depth));
  }
};

struct RunResult {
  std::vector<ChainDraws> chains;
  std::vector<std::string> failures;  // one message per aborted chain
};

/// SplitMix64 finalizer; derives independent sub-seeds from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Position, momentum, log density and its gradient at one point.
struct PhasePoint {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd g;  // gradient of log density at q
  double lp = 0.0;
};

/// Kinetic plus potential energy.
inline double hamiltonian(const PhasePoint& z, const Eigen::VectorXd& inv_mass) {
  return -z.lp + 0.5 * z.p.dot(inv_mass.cwiseProduct(z.p));
}

/**
 * One leapfrog step of size `eps`. `target(q, grad)` returns the log
 * density and writes its gradient. The incoming `z.g` must be the gradient
 * at `z.q`.
 */
template <class Target>
void leapfrog(PhasePoint& z, double eps, const Eigen::VectorXd& inv_mass, Target& target) {
  z.p += 0.5 * eps * z.g;
  z.q += eps * inv_mass.cwiseProduct(z.p);
  z.lp = target(z.q, z.g);
  z.p += 0.5 * eps * z.g;
}

/// Nesterov dual averaging of log step size toward a target acceptance.
class DualAveraging {
public:
  explicit DualAveraging(double delta, double gamma = 0.05, double t0 = 10.0, double kappa = 0.75)
      : delta_(delta), gamma_(gamma), t0_(t0), kappa_(kappa) {}

  void restart(double step_size) {
    mu_ = std::log(10.0 * step_size);
    counter_ = 0;
    s_bar_ = 0.0;
    x_bar_ = 0.0;
  }

  double learn(double accept_stat) {
    ++counter_;
    accept_stat = std::min(1.0, accept_stat);
    const double eta = 1.0 / (counter_ + t0_);
    s_bar_ = (1.0 - eta) * s_bar_ + eta * (delta_ - accept_stat);
    const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / gamma_;
    const double x_eta = std::pow(static_cast<double>(counter_), -kappa_);
    x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
    return std::exp(x);
  }

  double final_step_size() const { return std::exp(x_bar_); }

private:
  double delta_, gamma_, t0_, kappa_;
  double mu_ = 0.0;
  long counter_ = 0;
  double s_bar_ = 0.0;
  double x_bar_ = 0.0;
};

/**
 * Diagonal metric estimation over expanding windows: an initial fast
 * buffer, doubling slow windows, and a terminal fast buffer. Short warmups
 * fall back to a single 15% / 75% / 10% split.
 */
class WindowedVariance {
public:
  WindowedVariance(int num_warmup, Eigen::Index dim, int init_buffer = 75, int term_buffer = 50,
                   int base_window = 25)
      : num_warmup_(num_warmup), init_buffer_(init_buffer), term_buffer_(term_buffer), base_window_(base_window) {
    if (num_warmup_ < 20) {
      engaged_ = false;
      return;
    }
    if (init_buffer_ + base_window_ + term_buffer_ > num_warmup_) {
      log::warn("warmup of " + std::to_string(num_warmup_) +
                " iterations is too short for windowed adaptation; using a single metric window");
      init_buffer_ = static_cast<int>(0.15 * num_warmup_);
      term_buffer_ = static_cast<int>(0.1 * num_warmup_);
      base_window_ = num_warmup_ - (init_buffer_ + term_buffer_);
    }
    window_size_ = base_window_;
    next_window_ = init_buffer_ + window_size_ - 1;
    reset_estimator(dim);
  }

  bool engaged() const { return engaged_; }

  /// Feeds one warmup draw; returns true when `inv_mass` was updated.
  bool learn(Eigen::VectorXd& inv_mass, const Eigen::VectorXd& q) {
    if (!engaged_) return false;
    if (in_window()) add_sample(q);
    if (end_of_window()) {
      compute_next_window();
      const double n = static_cast<double>(n_);
      Eigen::VectorXd var = m2_ / (n - 1.0);
      inv_mass = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
      reset_estimator(q.size());
      ++counter_;
      return true;
    }
    ++counter_;
    return false;
  }

private:
  bool in_window() const {
    return counter_ >= init_buffer_ && counter_ < num_warmup_ - term_buffer_ && counter_ != num_warmup_;
  }
  bool end_of_window() const { return counter_ == next_window_ && counter_ != num_warmup_; }

  void compute_next_window() {
    if (next_window_ == num_warmup_ - term_buffer_ - 1) return;
    window_size_ *= 2;
    next_window_ = counter_ + window_size_;
    if (next_window_ != num_warmup_ - term_buffer_ - 1) {
      const int boundary = next_window_ + 2 * window_size_;
      if (boundary >= num_warmup_ - term_buffer_) next_window_ = num_warmup_ - term_buffer_ - 1;
    }
  }

  void reset_estimator(Eigen::Index dim) {
    n_ = 0;
    mean_ = Eigen::VectorXd::Zero(dim);
    m2_ = Eigen::VectorXd::Zero(dim);
  }

  void add_sample(const Eigen::VectorXd& q) {
    ++n_;
    const Eigen::VectorXd delta = q - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta.cwiseProduct(q - mean_);
  }

  int num_warmup_;
  int init_buffer_, term_buffer_, base_window_;
  int window_size_ = 0;
  int next_window_ = 0;
  int counter_ = 0;
  bool engaged_ = true;
  long n_ = 0;
  Eigen::VectorXd mean_, m2_;
};

struct Transition {
  double accept_stat = 0.0;
  int treedepth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double energy = 0.0;
  double lp = 0.0;
};

/**
 * Multinomial NUTS kernel over a fixed step size and diagonal inverse
 * metric. A transition is divergent when the energy error of any leapfrog
 * state exceeds `max_delta_h`.
 */
template <class Target, class Rng = std::mt19937_64>
class NutsSampler {
public:
  static constexpr double max_delta_h = 1000.0;

  NutsSampler(Target& target, Rng& rng, int max_depth) : target_(target), rng_(rng), max_depth_(max_depth) {}

  /// Sets the current position; throws when the density is not finite there.
  void set_position(const Eigen::VectorXd& q) {
    z_.q = q;
    z_.g.resize(q.size());
    z_.lp = target_(z_.q, z_.g);
    z_.p = Eigen::VectorXd::Zero(q.size());
    if (inv_mass_.size() != q.size()) inv_mass_ = Eigen::VectorXd::Ones(q.size());
    if (!std::isfinite(z_.lp) || !z_.g.allFinite())
      throw Error(ErrorKind::sampler, "log density or gradient is not finite at the initial point");
  }

  const Eigen::VectorXd& position() const { return z_.q; }
  double lp() const { return z_.lp; }
  double step_size() const { return eps_; }
  void set_step_size(double eps) { eps_ = eps; }
  const Eigen::VectorXd& inv_mass() const { return inv_mass_; }
  void set_inv_mass(const Eigen::VectorXd& m) { inv_mass_ = m; }
  void set_max_depth(int d) { max_depth_ = d; }

  /// Doubles or halves the step size until one leapfrog step crosses an
  /// acceptance probability of 0.8.
  void init_step_size() {
    const PhasePoint start = z_;
    sample_momentum();
    double h0 = hamiltonian(z_, inv_mass_);
    leapfrog(z_, eps_, inv_mass_, target_);
    double h = hamiltonian(z_, inv_mass_);
    if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
    double delta_h = h0 - h;
    const int direction = delta_h > std::log(0.8) ? 1 : -1;
    for (int iter = 0; iter < 200; ++iter) {
      z_ = start;
      sample_momentum();
      h0 = hamiltonian(z_, inv_mass_);
      leapfrog(z_, eps_, inv_mass_, target_);
      h = hamiltonian(z_, inv_mass_);
      if (std::isnan(h)) h = std::numeric_limits<double>::infinity();
      delta_h = h0 - h;
      if (direction == 1 && !(delta_h > std::log(0.8))) break;
      if (direction == -1 && !(delta_h < std::log(0.8))) break;
      eps_ = direction == 1 ? 2.0 * eps_ : 0.5 * eps_;
      if (eps_ > 1e7) throw Error(ErrorKind::sampler, "step size search diverged; posterior may be improper");
      if (eps_ == 0.0) throw Error(ErrorKind::sampler, "step size underflowed to zero");
    }
    z_ = start;
  }

  Transition transition() {
    sample_momentum();
    const double h0 = hamiltonian(z_, inv_mass_);

    PhasePoint z_fwd = z_, z_bck = z_;
    Proposal sample{z_.q, z_.p, z_.g, z_.lp};

    Eigen::VectorXd p_fwd_fwd = z_.p, p_sharp_fwd_fwd = inv_mass_.cwiseProduct(z_.p);
    Eigen::VectorXd p_fwd_bck = z_.p, p_sharp_fwd_bck = p_sharp_fwd_fwd;
    Eigen::VectorXd p_bck_fwd = z_.p, p_sharp_bck_fwd = p_sharp_fwd_fwd;
    Eigen::VectorXd p_bck_bck = z_.p, p_sharp_bck_bck = p_sharp_fwd_fwd;
    Eigen::VectorXd rho = z_.p;

    double log_sum_weight = 0.0;
    int depth = 0;
    n_leapfrog_ = 0;
    sum_metro_prob_ = 0.0;
    divergent_ = false;
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    while (depth < max_depth_) {
      Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(rho.size());
      Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(rho.size());
      bool valid_subtree = false;
      double log_sum_weight_subtree = -std::numeric_limits<double>::infinity();
      Proposal propose;

      if (unif(rng_) > 0.5) {
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid_subtree = build_tree(depth, z_fwd, propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                                   p_fwd_fwd, h0, 1.0, log_sum_weight_subtree);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid_subtree = build_tree(depth, z_bck, propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                                   p_bck_bck, h0, -1.0, log_sum_weight_subtree);
      }
      if (!valid_subtree) break;
      ++depth;

      if (log_sum_weight_subtree > log_sum_weight) {
        sample = propose;
      } else if (unif(rng_) < std::exp(log_sum_weight_subtree - log_sum_weight)) {
        sample = propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

      rho = rho_bck + rho_fwd;
      bool persist = no_u_turn(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      Eigen::VectorXd rho_extended = rho_bck + p_fwd_bck;
      persist = persist && no_u_turn(p_sharp_bck_bck, p_sharp_fwd_bck, rho_extended);
      rho_extended = rho_fwd + p_bck_fwd;
      persist = persist && no_u_turn(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_extended);
      if (!persist) break;
    }

    z_.q = std::move(sample.q);
    z_.p = std::move(sample.p);
    z_.g = std::move(sample.g);
    z_.lp = sample.lp;

    Transition t;
    t.accept_stat = n_leapfrog_ > 0 ? sum_metro_prob_ / n_leapfrog_ : 0.0;
    t.treedepth = depth;
    t.n_leapfrog = n_leapfrog_;
    t.divergent = divergent_;
    t.energy = hamiltonian(z_, inv_mass_);
    t.lp = z_.lp;
    return t;
  }

private:
  struct Proposal {
    Eigen::VectorXd q, p, g;
    double lp = 0.0;
  };

  static double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  static bool no_u_turn(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
                        const Eigen::VectorXd& rho) {
    return p_sharp_plus.dot(rho) > 0 && p_sharp_minus.dot(rho) > 0;
  }

  void sample_momentum() {
    std::normal_distribution<double> normal(0.0, 1.0);
    z_.p.resize(z_.q.size());
    for (Eigen::Index i = 0; i < z_.p.size(); ++i) z_.p(i) = normal(rng_) / std::sqrt(inv_mass_(i));
  }

  bool build_tree(int depth, PhasePoint& z, Proposal& propose, Eigen::VectorXd& p_sharp_beg,
                  Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
                  Eigen::VectorXd& p_end, double h0, double sign, double& log_sum_weight) {
    if (depth == 0) {
      leapfrog(z, sign * eps_, inv_mass_, target_);
      ++n_leapfrog_;
      double h = hamiltonian(z, inv_mass_);
      if (std::isnan(h) || !z.g.allFinite()) h = std::numeric_limits<double>::infinity();
      if (h - h0 > max_delta_h) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro_prob_ += h0 - h > 0 ? 1.0 : std::exp(h0 - h);
      propose.q = z.q;
      propose.p = z.p;
      propose.g = z.g;
      propose.lp = z.lp;
      p_sharp_beg = inv_mass_.cwiseProduct(z.p);
      p_sharp_end = p_sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }

    // Initial subtree
    Eigen::VectorXd p_sharp_init_end(z.q.size()), p_init_end(z.q.size());
    Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(rho.size());
    double log_sum_weight_init = -std::numeric_limits<double>::infinity();
    if (!build_tree(depth - 1, z, propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end, h0, sign,
                    log_sum_weight_init))
      return false;

    // Final subtree
    Proposal propose_final;
    Eigen::VectorXd p_sharp_final_beg(z.q.size()), p_final_beg(z.q.size());
    Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(rho.size());
    double log_sum_weight_final = -std::numeric_limits<double>::infinity();
    if (!build_tree(depth - 1, z, propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg, p_end, h0,
                    sign, log_sum_weight_final))
      return false;

    const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
    log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (log_sum_weight_final > log_sum_weight_subtree) {
      propose = std::move(propose_final);
    } else if (unif(rng_) < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
      propose = std::move(propose_final);
    }

    const Eigen::VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = no_u_turn(p_sharp_beg, p_sharp_end, rho_subtree);
    Eigen::VectorXd rho_extended = rho_init + p_final_beg;
    persist = persist && no_u_turn(p_sharp_beg, p_sharp_final_beg, rho_extended);
    rho_extended = rho_final + p_init_end;
    persist = persist && no_u_turn(p_sharp_init_end, p_sharp_end, rho_extended);
    return persist;
  }

  Target& target_;
  Rng& rng_;
  int max_depth_;
  PhasePoint z_;
  Eigen::VectorXd inv_mass_;
  double eps_ = 1.0;
  int n_leapfrog_ = 0;
  double sum_metro_prob_ = 0.0;
  bool divergent_ = false;
};

/// Draws an initial point; uniform draws are retried until the density is finite.
template <class Target, class Rng>
Eigen::VectorXd initial_point(Target& target, Eigen::Index dim, const NutsConfig& cfg, Rng& rng) {
  Eigen::VectorXd q(dim), g(dim);
  if (cfg.init_mode == InitMode::fixed) {
    q.setConstant(cfg.init_radius);
    return q;
  }
  std::uniform_real_distribution<double> unif(-cfg.init_radius, cfg.init_radius);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (Eigen::Index i = 0; i < dim; ++i) q(i) = unif(rng);
    const double lp = target(q, g);
    if (std::isfinite(lp) && g.allFinite()) return q;
  }
  throw Error(ErrorKind::sampler, "could not find a finite initial point after 100 attempts");
}

/**
 * Runs warmup and sampling for one chain. `target(q, grad)` must return
 * the log density and fill `grad`.
 */
template <class Target>
ChainDraws run_chain(Target& target, Eigen::Index dim, const NutsConfig& cfg, int chain_id) {
  ChainDraws out;
  out.chain = chain_id;
  out.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(chain_id));
  std::mt19937_64 rng(out.seed);

  NutsSampler<Target> sampler(target, rng, cfg.max_treedepth);
  sampler.set_inv_mass(Eigen::VectorXd::Ones(dim));
  sampler.set_position(initial_point(target, dim, cfg, rng));
  sampler.set_step_size(1.0);
  sampler.init_step_size();

  DualAveraging step_adapt(cfg.adapt_delta);
  step_adapt.restart(sampler.step_size());
  WindowedVariance metric_adapt(cfg.warmup, dim);
  if (!metric_adapt.engaged())
    log::warn("warmup shorter than 20 iterations; only the step size is adapted");

  Eigen::VectorXd inv_mass = Eigen::VectorXd::Ones(dim);
  for (int it = 0; it < cfg.warmup; ++it) {
    const Transition t = sampler.transition();
    if (t.divergent) ++out.warmup_divergences;
    sampler.set_step_size(step_adapt.learn(t.accept_stat));
    if (metric_adapt.learn(inv_mass, sampler.position())) {
      sampler.set_inv_mass(inv_mass);
      sampler.init_step_size();
      step_adapt.restart(sampler.step_size());
    }
  }
  sampler.set_step_size(step_adapt.final_step_size());
  out.step_size = sampler.step_size();
  out.inv_mass = sampler.inv_mass();

  out.draws.resize(cfg.samples, dim);
  for (int it = 0; it < cfg.samples; ++it) {
    const Transition t = sampler.transition();
    out.draws.row(it) = sampler.position().transpose();
    out.lp.push_back(t.lp);
    out.divergent.push_back(t.divergent ? 1 : 0);
    out.treedepth.push_back(t.treedepth);
    out.n_leapfrog.push_back(t.n_leapfrog);
    out.energy.push_back(t.energy);
    out.accept_stat.push_back(t.accept_stat);
  }
  if (out.divergences() == cfg.samples)
    throw Error(ErrorKind::sampler, "chain " + std::to_string(chain_id) + ": every post-warmup transition diverged");
  return out;
}

/// Runs `jobs` independent tasks on up to `threads` workers; task order is preserved.
inline void parallel_for(int jobs, int threads, const std::function<void(int)>& task) {
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < jobs; i = next++) task(i);
    });
  for (auto& th : pool) th.join();
}

/**
 * Runs `cfg.chains` chains. `make_target()` is called once per chain so
 * each chain owns its own evaluation state (tape, buffers). Chains that
 * fail are reported in `failures`; successful chains keep chain order.
 */
template <class TargetFactory>
RunResult run_chains(TargetFactory&& make_target, Eigen::Index dim, const NutsConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<ChainDraws>> slots(cfg.chains);
  std::vector<std::string> errors(cfg.chains);
  const int threads = cfg.threads == 0 ? cfg.chains : cfg.threads;
  parallel_for(cfg.chains, threads, [&](int c) {
    try {
      auto target = make_target();
      slots[c] = run_chain(target, dim, cfg, c);
    } catch (const std::exception& e) {
      errors[c] = e.what();
    }
  });
  RunResult result;
  for (int c = 0; c < cfg.chains; ++c) {
    if (slots[c]) {
      result.chains.push_back(std::move(*slots[c]));
    } else {
      result.failures.push_back("chain " + std::to_string(c) + ": " + errors[c]);
      log::error(result.failures.back());
    }
  }
  return result;
}

}  // namespace bsynth

#endif  // BSYNTH_SAMPLER_HPP
