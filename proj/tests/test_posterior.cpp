#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bsynth/posterior.hpp"
#include "bsynth/simulate.hpp"
#include "support.hpp"

using namespace bsynth;

namespace {

sim::SimResult simulated(int units, int times, int window, double effect, std::uint64_t seed, int factors = 2) {
  sim::SimConfig c;
  c.units = units;
  c.times = times;
  c.factors = factors;
  c.noise_sd = 0.25;
  c.treated = {{0, times - window, times - 1}};
  c.effect = {effect};
  c.level = 100.0;
  c.scale = 5.0;
  c.seed = seed;
  return sim::generate_panel(c);
}

NutsConfig short_run(int chains, int warmup, int samples, std::uint64_t seed) {
  NutsConfig c;
  c.chains = chains;
  c.warmup = warmup;
  c.samples = samples;
  c.max_treedepth = 10;
  c.adapt_delta = 0.9;
  c.seed = seed;
  c.threads = 1;
  return c;
}

ModelConfig factors(int L) {
  ModelConfig c;
  c.factors = L;
  return c;
}

/// Surfaces whose gap against `panel` at (j, t) is `gaps[d]` for draw d.
CounterfactualDraws with_gaps(const PanelData& panel, Eigen::Index j, Eigen::Index t, const std::vector<double>& gaps) {
  CounterfactualDraws cf;
  cf.units = panel.units;
  cf.times = panel.times;
  for (double g : gaps) {
    Eigen::MatrixXd s = panel.outcome;
    s(j, t) = panel.outcome(j, t) - g;
    cf.surfaces.push_back(s);
  }
  return cf;
}

/// A short fit shared by the slower tests.
struct SmallFit {
  sim::SimResult sim;
  Model model;
  RunResult run;

  explicit SmallFit(double effect)
      : sim(simulated(6, 20, 4, effect, 3)),
        model(sim.panel, factors(2)),
        run(fit(model, short_run(2, 300, 300, 5))) {}
};

const SmallFit& small_fit() {
  static const SmallFit f(3.0);
  return f;
}

}  // namespace

// ---- reconstruction ---------------------------------------------------------

TEST(Reconstruct, ZeroParametersGiveTheCentres) {
  const auto s = simulated(5, 12, 3, 0.0, 1);
  const Model m(s.panel, factors(2));
  const auto cf = reconstruct(m, {Eigen::VectorXd::Zero(m.dim())});
  ASSERT_EQ(cf.surfaces.size(), 1u);
  for (Eigen::Index j = 0; j < 5; ++j)
    for (Eigen::Index t = 0; t < 12; ++t) EXPECT_NEAR(cf.surfaces[0](j, t), m.scaling().center(j), 1e-12);
  EXPECT_EQ(cf.units, s.panel.units);
  EXPECT_EQ(cf.times, s.panel.times);
}

TEST(Reconstruct, MatchesDestandardizedMeanSurface) {
  const auto s = simulated(5, 12, 3, 0.0, 2);
  const Model m(s.panel, factors(3));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  std::vector<Eigen::VectorXd> draws;
  for (int d = 0; d < 5; ++d) {
    Eigen::VectorXd theta(m.dim());
    for (auto& v : theta) v = n(rng);
    draws.push_back(theta);
  }
  const auto cf = reconstruct(m, draws);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const Eigen::MatrixXd mean = m.mean_matrix(draws[d]);
    for (Eigen::Index j = 0; j < 5; ++j)
      for (Eigen::Index t = 0; t < 12; ++t) {
        const double want = mean(j, t) * m.scaling().scale(j) + m.scaling().center(j);
        EXPECT_NEAR(cf.surfaces[d](j, t), want, 1e-10);
      }
  }
}

TEST(Reconstruct, PredictiveNoiseIsSeededAndScaledBySigma) {
  const auto s = simulated(4, 10, 2, 0.0, 4);
  const Model m(s.panel, factors(2));
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m.dim());
  theta(m.layout().sigma.offset) = std::log(0.5);
  const std::vector<Eigen::VectorXd> draws(2000, theta);
  ReconstructOptions ro;
  ro.predictive_noise = true;
  ro.seed = 9;
  const auto a = reconstruct(m, draws, ro), b = reconstruct(m, draws, ro);
  EXPECT_EQ(a.surfaces[17], b.surfaces[17]);
  std::vector<double> z;
  for (const auto& surf : a.surfaces) z.push_back((surf(1, 3) - m.scaling().center(1)) / m.scaling().scale(1));
  double mean = 0, var = 0;
  for (double v : z) mean += v / z.size();
  for (double v : z) var += (v - mean) * (v - mean) / (z.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(std::sqrt(var), 0.5, 0.03);
}

TEST(Reconstruct, LayoutMismatchThrows) {
  const auto s = simulated(4, 10, 2, 0.0, 5);
  const Model m(s.panel, factors(2));
  EXPECT_THROW(reconstruct(m, {Eigen::VectorXd::Zero(m.dim() + 1)}), Error);
}

// ---- gap summaries ----------------------------------------------------------

TEST(Gap, IdentityGivesZeroWidthZeroGaps) {
  const auto s = simulated(4, 10, 3, 2.0, 6);
  CounterfactualDraws cf;
  cf.units = s.panel.units;
  cf.times = s.panel.times;
  cf.surfaces.assign(10, s.panel.outcome);
  const auto rows = gap(cf, s.panel);
  ASSERT_EQ(rows.size(), 10u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.gap.mean, 0.0);
    EXPECT_EQ(r.gap.q05, 0.0);
    EXPECT_EQ(r.gap.q95, 0.0);
    EXPECT_DOUBLE_EQ(r.synthetic, r.observed);
  }
  EXPECT_FALSE(rows[6].treated);
  EXPECT_TRUE(rows[7].treated);
}

TEST(Gap, QuantileConventionOnKnownDraws) {
  const auto s = simulated(4, 10, 3, 0.0, 7);
  std::vector<double> gaps(100);
  for (int i = 0; i < 100; ++i) gaps[i] = 100.0 - i;
  const auto rows = gap(with_gaps(s.panel, 0, 8, gaps), s.panel);
  const auto& r = rows[8];
  EXPECT_NEAR(r.gap.q05, 5.95, 1e-9);
  EXPECT_NEAR(r.gap.q95, 95.05, 1e-9);
  EXPECT_NEAR(r.gap.q25, 25.75, 1e-9);
  EXPECT_NEAR(r.gap.q75, 75.25, 1e-9);
  EXPECT_NEAR(r.gap.mean, 50.5, 1e-9);
}

TEST(Gap, AntisymmetricUnderSwappedArguments) {
  auto s = simulated(4, 10, 3, 0.0, 8);
  s.panel.outcome.row(0).setZero();
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 1);
  CounterfactualDraws cf, swapped;
  cf.units = swapped.units = s.panel.units;
  cf.times = swapped.times = s.panel.times;
  for (int d = 0; d < 57; ++d) {
    Eigen::MatrixXd surf = s.panel.outcome;
    for (Eigen::Index t = 0; t < 10; ++t) surf(0, t) = n(rng);
    cf.surfaces.push_back(surf);
    surf.row(0) = -surf.row(0);
    swapped.surfaces.push_back(surf);
  }
  const auto a = gap(cf, s.panel), b = gap(swapped, s.panel);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].gap.mean, -b[i].gap.mean, 1e-12);
    EXPECT_NEAR(a[i].gap.q05, -b[i].gap.q95, 1e-12);
    EXPECT_NEAR(a[i].gap.q25, -b[i].gap.q75, 1e-12);
    EXPECT_NEAR(a[i].gap.q75, -b[i].gap.q25, 1e-12);
    EXPECT_NEAR(a[i].gap.q95, -b[i].gap.q05, 1e-12);
  }
}

TEST(Gap, NeedsATreatedUnit) {
  PanelData p = testing_support::make_panel(Eigen::MatrixXd::Ones(3, 4));
  CounterfactualDraws cf{p.units, p.times, {p.outcome}};
  EXPECT_THROW(gap(cf, p), Error);
  EXPECT_NO_THROW(gap(cf, p, std::vector<Eigen::Index>{1}));
}

TEST(Gap, CsvSchemas) {
  const auto s = simulated(4, 6, 2, 0.0, 10);
  CounterfactualDraws cf{s.panel.units, s.panel.times, {s.truth, s.truth}};
  std::ostringstream syn, gp;
  write_synthetic(syn, summarize_synthetic(cf));
  write_gap(gp, gap(cf, s.panel));
  const auto ts = testing_support::table(syn.str()), tg = testing_support::table(gp.str());
  const std::vector<std::string> header = {"unit", "time", "mean", "q05", "q25", "q75", "q95"};
  EXPECT_EQ(ts.header, header);
  EXPECT_EQ(tg.header, header);
  EXPECT_EQ(ts.rows.size(), 24u);
  EXPECT_EQ(tg.rows.size(), 6u);
}

// ---- fitted posterior -------------------------------------------------------

TEST(FittedPosterior, IntervalsNest) {
  const auto& f = small_fit();
  ASSERT_EQ(f.run.chains.size(), 2u);
  const auto cf = reconstruct(f.model, pooled_draws(f.run));
  for (const auto& row : summarize_synthetic(cf)) {
    EXPECT_LE(row.stats.q05, row.stats.q25);
    EXPECT_LE(row.stats.q25, row.stats.q75);
    EXPECT_LE(row.stats.q75, row.stats.q95);
  }
  for (const auto& row : gap(cf, f.sim.panel)) {
    EXPECT_LE(row.gap.q05, row.gap.q25);
    EXPECT_LE(row.gap.q75, row.gap.q95);
  }
}

TEST(FittedPosterior, PrePeriodWithinPredictiveBand) {
  const auto& f = small_fit();
  ReconstructOptions ro;
  ro.predictive_noise = true;
  ro.seed = 11;
  const auto cf = reconstruct(f.model, pooled_draws(f.run), ro);
  int inside = 0, total = 0;
  std::vector<double> v(cf.surfaces.size());
  for (Eigen::Index t = 0; t < f.sim.panel.T(); ++t) {
    if (f.sim.panel.mask(0, t)) continue;
    for (std::size_t d = 0; d < v.size(); ++d) v[d] = cf.surfaces[d](0, t);
    const double obs = f.sim.panel.outcome(0, t);
    inside += obs >= diag::quantile(v, 0.005) && obs <= diag::quantile(v, 0.995);
    ++total;
  }
  EXPECT_GE(inside, 0.95 * total);
}

TEST(FittedPosterior, GapRecoversInjectedEffect) {
  const auto& f = small_fit();
  ReconstructOptions ro;
  ro.predictive_noise = true;
  ro.seed = 12;
  const auto rows = gap(reconstruct(f.model, pooled_draws(f.run), ro), f.sim.panel);
  int covered = 0, treated = 0;
  for (const auto& r : rows) {
    if (!r.treated) continue;
    ++treated;
    covered += r.gap.q05 <= 3.0 && 3.0 <= r.gap.q95;
  }
  EXPECT_EQ(treated, 4);
  EXPECT_GE(covered, 3);
}

// ---- placebo ----------------------------------------------------------------

TEST(Placebo, PanelMasksDonorOverTheWindowUnion) {
  auto s = simulated(6, 12, 3, 0.0, 13);
  s.panel.mask(3, 5) = true;  // a second treated unit with an interior window
  const std::vector<TreatmentWindow> windows = {{"u1", "10", "12"}, {"u4", "6", "6"}};
  const PanelData p = placebo_panel(s.panel, windows, 1, true);
  EXPECT_EQ(p.units, (std::vector<std::string>{"u2", "u3", "u5", "u6"}));
  for (Eigen::Index t = 0; t < 12; ++t) EXPECT_EQ(p.mask(0, t), t == 5 || t >= 9) << t;
  EXPECT_FALSE(p.mask.bottomRows(3).any());
  const PanelData kept = placebo_panel(s.panel, windows, 1, false);
  EXPECT_EQ(kept.J(), 6);
  EXPECT_TRUE(kept.mask(1, 5));
}

TEST(Placebo, RefusesFewerThanThreeDonors) {
  auto s = simulated(4, 10, 2, 0.0, 14);
  s.panel.mask(1, 9) = s.panel.mask(2, 9) = true;
  try {
    placebo_study(s.panel, s.windows, factors(1), {}, short_run(1, 20, 20, 1));
    FAIL() << "expected a refusal";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("at least 3 donors"), std::string::npos);
  }
}

TEST(Placebo, OneFitPerDonorAndJobsDoNotChangeResults) {
  const auto s = simulated(5, 14, 3, 0.0, 15);
  const NutsConfig nuts = short_run(1, 100, 100, 16);
  PlaceboOptions serial, parallel;
  parallel.jobs = 4;
  const auto a = placebo_study(s.panel, s.windows, factors(1), {}, nuts, serial);
  const auto b = placebo_study(s.panel, s.windows, factors(1), {}, nuts, parallel);
  ASSERT_EQ(a.size(), 4u);
  ASSERT_EQ(b.size(), 4u);
  std::ostringstream oa, ob;
  write_placebo(oa, a);
  write_placebo(ob, b);
  EXPECT_EQ(oa.str(), ob.str());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_FALSE(a[k].error);
    EXPECT_EQ(a[k].donor, s.panel.units[k + 1]);
    EXPECT_EQ(a[k].gap.size(), 14u);
  }
  EXPECT_EQ(testing_support::table(oa.str()).rows.size(), 4u * 14u);
}

TEST(Placebo, FailedDonorFitsAreRecordedAndStudyContinues) {
  auto s = simulated(6, 12, 3, 0.0, 17);
  // A constant pre-period invalidates every placebo panel.
  s.panel.outcome.row(2).setConstant(7.0);
  std::vector<PlaceboFit> fits;
  ASSERT_NO_THROW(fits = placebo_study(s.panel, s.windows, factors(1), {}, short_run(1, 50, 50, 18)));
  ASSERT_EQ(fits.size(), 5u);
  for (const auto& f : fits) {
    ASSERT_TRUE(f.error);
    EXPECT_NE(f.error->find("standard deviation"), std::string::npos);
    EXPECT_TRUE(f.gap.empty());
  }
  std::ostringstream out;
  write_placebo(out, fits);
  EXPECT_EQ(out.str(), "donor,time,mean,q05,q25,q75,q95\n");
}

namespace {

/// Covered / total treated donor cells whose 90% gap interval contains 0.
std::pair<int, int> zero_coverage(const std::vector<PlaceboFit>& fits, const std::string& skip = "") {
  int covered = 0, cells = 0;
  for (const auto& f : fits) {
    if (f.donor == skip) continue;
    for (const auto& r : f.gap)
      if (r.treated) covered += r.gap.q05 <= 0.0 && 0.0 <= r.gap.q95, ++cells;
  }
  return {covered, cells};
}

}  // namespace

TEST(Placebo, CalibratedOnCleanDonors) {
  // Fitted with twice the true factor count, as the simulate command suggests.
  const auto s = simulated(7, 20, 4, 0.0, 19);
  PlaceboOptions opts;
  opts.predictive_noise = true;
  const auto fits = placebo_study(s.panel, s.windows, factors(4), {}, short_run(2, 250, 250, 20), opts);
  ASSERT_EQ(fits.size(), 6u);
  for (const auto& f : fits) ASSERT_FALSE(f.error) << *f.error;
  const auto [covered, cells] = zero_coverage(fits);
  EXPECT_EQ(cells, 24);
  EXPECT_GE(covered, 0.8 * cells) << covered << "/" << cells;
}

TEST(Placebo, DetectsDonorLevelShift) {
  auto s = simulated(6, 20, 4, 0.0, 21);
  // Five pre-period standard deviations of the shifted unit.
  const double shift = 5.0 * standardize_outcome(s.panel).scaling.scale(2);
  for (Eigen::Index t = 16; t < 20; ++t) s.panel.outcome(2, t) += shift;
  PlaceboOptions opts;
  opts.predictive_noise = true;
  const auto fits = placebo_study(s.panel, s.windows, factors(4), {}, short_run(2, 250, 250, 22), opts);
  ASSERT_EQ(fits.size(), 5u);
  const auto& shifted = fits[1];
  ASSERT_EQ(shifted.donor, "u3");
  ASSERT_FALSE(shifted.error);
  for (const auto& r : shifted.gap)
    if (r.treated) EXPECT_GT(r.gap.q05, 0.0) << "time " << r.time << " shift " << shift << " mean " << r.gap.mean;
}
