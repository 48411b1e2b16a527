#ifndef BSYNTH_APP_HPP
#define BSYNTH_APP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bsynth/config.hpp"
#include "bsynth/csv.hpp"
#include "bsynth/diagnostics.hpp"
#include "bsynth/error.hpp"
#include "bsynth/fit.hpp"
#include "bsynth/log.hpp"
#include "bsynth/model.hpp"
#include "bsynth/panel.hpp"
#include "bsynth/posterior.hpp"
#include "bsynth/sampler.hpp"
#include "bsynth/simulate.hpp"
#include "bsynth/svg.hpp"

#ifndef BSYNTH_VERSION
#define BSYNTH_VERSION "0.1.0"
#endif

namespace bsynth::app {

namespace fs = std::filesystem;

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kRunManifest = "run_manifest.json";
inline constexpr const char* kPlaceboManifest = "placebo_manifest.json";
inline constexpr const char* kSimManifest = "sim_manifest.json";

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool svg = false;
};

inline std::string version() { return BSYNTH_VERSION; }

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
inline std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
}

/// Opens `path` for writing or throws.
inline std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
  return out;
}

inline void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline PanelData load_data(const RunConfig& cfg) {
  if (!fs::exists(cfg.data)) throw Error(ErrorKind::io, "data file '" + cfg.data + "' does not exist");
  return load_panel(csv::read_table(cfg.data, cfg.delimiter), cfg.columns, cfg.windows);
}

inline void apply(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.output_dir = fs::absolute(*o.out).lexically_normal().string();
  if (o.seed) cfg.sampler.seed = *o.seed;
  if (o.jobs) {
    if (*o.jobs < 0) throw Error(ErrorKind::config, "--jobs must be >= 0");
    cfg.jobs = *o.jobs;
  }
  if (o.svg) cfg.emit_svg = true;
}

inline int effective_jobs(const RunConfig& cfg) { return cfg.jobs == 0 ? cfg.sampler.chains : cfg.jobs; }

// ---------------------------------------------------------------- draws.csv

inline const std::vector<std::string>& sampler_columns() {
  static const std::vector<std::string> cols = {"lp__",         "accept_stat__", "treedepth__",
                                                "n_leapfrog__", "divergent__",   "energy__"};
  return cols;
}

/// Constrained coordinates worth carrying next to theta in draws.csv.
inline std::vector<Eigen::Index> key_constrained(const Model& model) {
  const auto& lay = model.layout();
  std::vector<Eigen::Index> idx;
  idx.push_back(lay.sigma.offset);
  idx.push_back(lay.eta.offset);
  for (Eigen::Index i = lay.lambda.offset; i < lay.lambda.end(); ++i) idx.push_back(i);
  for (Eigen::Index i = lay.gamma.offset; i < lay.gamma.end(); ++i) idx.push_back(i);
  return idx;
}

/**
 * One row per post-warmup draw: chain, draw, sampler telemetry, every
 * unconstrained coordinate (theta.*) and a few constrained parameters.
 */
inline void write_draws(std::ostream& out, const Model& model, const std::vector<ChainDraws>& chains) {
  csv::Writer w(out);
  const auto key = key_constrained(model);
  const auto cnames = model.constrained_names();
  std::vector<std::string> header = {"chain", "draw"};
  header.insert(header.end(), sampler_columns().begin(), sampler_columns().end());
  for (const auto& n : model.unconstrained_names()) header.push_back(n);
  for (auto i : key) header.push_back(cnames[i]);
  w.row(header);
  for (const auto& c : chains) {
    for (Eigen::Index i = 0; i < c.draws.rows(); ++i) {
      const Eigen::VectorXd theta = c.draws.row(i).transpose();
      w.field(c.chain).field(static_cast<long long>(i));
      w.field(c.lp[i]).field(c.accept_stat[i]).field(c.treedepth[i]).field(c.n_leapfrog[i]);
      w.field(static_cast<int>(c.divergent[i])).field(c.energy[i]);
      for (Eigen::Index k = 0; k < theta.size(); ++k) w.field(theta(k));
      const Eigen::VectorXd cons = model.constrained_values(theta);
      for (auto k : key) w.field(cons(k));
      w.end_row();
    }
  }
}

/// Reads draws.csv back into per-chain draws (telemetry included).
inline std::vector<ChainDraws> read_draws(const fs::path& path, const Model& model) {
  const auto table = csv::read_table(path.string());
  auto col = [&](const std::string& name) {
    const int c = table.column(name);
    if (c < 0) throw Error(ErrorKind::parse, path.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(c);
  };
  const auto names = model.unconstrained_names();
  std::vector<std::size_t> theta_cols;
  for (const auto& n : names) theta_cols.push_back(col(n));
  const std::size_t c_chain = col("chain"), c_lp = col("lp__"), c_acc = col("accept_stat__"),
                    c_depth = col("treedepth__"), c_leap = col("n_leapfrog__"), c_div = col("divergent__"),
                    c_energy = col("energy__");
  auto num = [&](const std::string& s) {
    auto v = csv::parse_double(s);
    if (!v) throw Error(ErrorKind::parse, path.string() + ": non-numeric value '" + s + "'");
    return *v;
  };

  std::vector<ChainDraws> chains;
  std::map<int, std::size_t> slot;
  std::vector<std::vector<Eigen::VectorXd>> rows;
  for (const auto& r : table.rows) {
    const int id = static_cast<int>(num(r[c_chain]));
    auto it = slot.find(id);
    if (it == slot.end()) {
      it = slot.emplace(id, chains.size()).first;
      chains.emplace_back();
      chains.back().chain = id;
      rows.emplace_back();
    }
    auto& c = chains[it->second];
    Eigen::VectorXd theta(static_cast<Eigen::Index>(theta_cols.size()));
    for (std::size_t k = 0; k < theta_cols.size(); ++k) theta(static_cast<Eigen::Index>(k)) = num(r[theta_cols[k]]);
    rows[it->second].push_back(std::move(theta));
    c.lp.push_back(num(r[c_lp]));
    c.accept_stat.push_back(num(r[c_acc]));
    c.treedepth.push_back(static_cast<int>(num(r[c_depth])));
    c.n_leapfrog.push_back(static_cast<int>(num(r[c_leap])));
    c.divergent.push_back(static_cast<char>(num(r[c_div]) != 0.0));
    c.energy.push_back(num(r[c_energy]));
  }
  if (chains.empty()) throw Error(ErrorKind::parse, path.string() + " holds no draws");
  for (std::size_t c = 0; c < chains.size(); ++c) {
    auto& d = chains[c].draws;
    d.resize(static_cast<Eigen::Index>(rows[c].size()), model.dim());
    for (std::size_t i = 0; i < rows[c].size(); ++i) d.row(static_cast<Eigen::Index>(i)) = rows[c][i].transpose();
    if (d.rows() != chains[0].draws.rows())
      throw Error(ErrorKind::parse, path.string() + ": chains have different draw counts");
  }
  return chains;
}

// ------------------------------------------------------------- fit outputs

/**
 * Posterior summaries of lp__, every constrained parameter and the implied
 * loadings beta[factor,unit].
 */
inline std::vector<diag::ParamSummary> summarize_chains(const Model& model, const std::vector<ChainDraws>& chains) {
  const auto& lay = model.layout();
  const Eigen::Index S = chains.front().draws.rows();
  const auto C = static_cast<Eigen::Index>(chains.size());
  std::vector<std::string> names = {"lp__"};
  for (const auto& n : model.constrained_names()) names.push_back(n);
  for (Eigen::Index j = 0; j < lay.J; ++j)
    for (Eigen::Index l = 0; l < lay.L; ++l)
      names.push_back("beta[" + std::to_string(l + 1) + "," + model.units()[j] + "]");
  const auto V = static_cast<Eigen::Index>(names.size());

  // values(v, c * S + i)
  Eigen::MatrixXd values(V, S * C);
  for (Eigen::Index c = 0; c < C; ++c)
    for (Eigen::Index i = 0; i < S; ++i) {
      const Eigen::VectorXd theta = chains[c].draws.row(i).transpose();
      auto col = values.col(c * S + i);
      col(0) = chains[c].lp[i];
      col.segment(1, lay.dim) = model.constrained_values(theta);
      const Eigen::MatrixXd beta = model.loadings(theta);
      col.tail(lay.J * lay.L) = Eigen::Map<const Eigen::VectorXd>(beta.data(), lay.J * lay.L);
    }
  std::vector<diag::ParamSummary> out;
  out.reserve(names.size());
  diag::DrawMatrix x(S, C);
  for (Eigen::Index v = 0; v < V; ++v) {
    for (Eigen::Index c = 0; c < C; ++c) x.col(c) = values.row(v).segment(c * S, S).transpose();
    out.push_back(diag::summarize(names[v], x));
  }
  return out;
}

/// Numeric time axis: the labels themselves when numeric, else 1..T.
inline std::vector<double> time_axis(const std::vector<std::string>& times) {
  std::vector<double> x;
  for (std::size_t t = 0; t < times.size(); ++t) {
    auto v = csv::parse_double(times[t]);
    if (!v || !std::isfinite(*v)) {
      x.clear();
      for (std::size_t k = 0; k < times.size(); ++k) x.push_back(static_cast<double>(k + 1));
      return x;
    }
    x.push_back(*v);
  }
  return x;
}

/// Trend (observed vs synthetic) and gap charts, one panel per treated unit.
inline void write_charts(const fs::path& dir, const PanelData& panel, const std::vector<SurfaceRow>& synthetic,
                         const GapSummary& gaps) {
  const auto x = time_axis(panel.times);
  const auto T = static_cast<std::size_t>(panel.T());
  std::vector<svg::Chart> trend, gap_charts;
  for (auto j : panel.treated_units()) {
    std::optional<double> marker;
    for (Eigen::Index t = 0; t < panel.T(); ++t)
      if (panel.mask(j, t)) {
        marker = x[static_cast<std::size_t>(t)];
        break;
      }
    svg::Series obs{"observed", x, {}, "#000000"}, syn{"synthetic", x, {}, "#1f77b4", true};
    svg::Band b90, b50;
    b50.opacity = 0.35;
    for (std::size_t t = 0; t < T; ++t) {
      const auto& s = synthetic[static_cast<std::size_t>(j) * T + t].stats;
      obs.y.push_back(panel.outcome(j, static_cast<Eigen::Index>(t)));
      syn.y.push_back(s.mean);
      b90.lo.push_back(s.q05), b90.hi.push_back(s.q95);
      b50.lo.push_back(s.q25), b50.hi.push_back(s.q75);
    }
    syn.bands = {b90, b50};
    trend.push_back({"Trend: " + panel.units[j], "time", "outcome", {syn, obs}, marker});

    svg::Series g{"gap", {}, {}, "#d62728"};
    svg::Band g90, g50;
    g50.opacity = 0.35;
    for (const auto& r : gaps) {
      if (r.unit != panel.units[j]) continue;
      g.x.push_back(x[static_cast<std::size_t>(*panel.time_index(r.time))]);
      g.y.push_back(r.gap.mean);
      g90.lo.push_back(r.gap.q05), g90.hi.push_back(r.gap.q95);
      g50.lo.push_back(r.gap.q25), g50.hi.push_back(r.gap.q75);
    }
    g.bands = {g90, g50};
    svg::Chart gc{"Gap: " + panel.units[j], "time", "observed - synthetic", {g}, marker};
    gc.zero_line = true;
    gap_charts.push_back(gc);
  }
  if (trend.empty()) return;
  auto t_out = open_out(dir / "trend.svg");
  svg::write_grid(t_out, trend, 2);
  auto g_out = open_out(dir / "gap.svg");
  svg::write_grid(g_out, gap_charts, 2);
}

/// Seed of the optional predictive-noise stream.
inline std::uint64_t noise_seed(const RunConfig& cfg) { return derive_seed(cfg.sampler.seed, 0x6e6f697365ULL); }

/**
 * summary.csv, synthetic.csv, gap.csv (when a unit is treated) and the
 * optional charts. A pure function of the draws, shared by fit and
 * summarize.
 */
inline std::vector<diag::ParamSummary> write_fit_outputs(const RunConfig& cfg, const PanelData& panel,
                                                         const Model& model, const std::vector<ChainDraws>& chains,
                                                         const fs::path& dir) {
  const auto summary = summarize_chains(model, chains);
  {
    auto out = open_out(dir / "summary.csv");
    diag::write_summary(out, summary);
  }
  std::vector<Eigen::VectorXd> draws;
  for (const auto& c : chains)
    for (Eigen::Index i = 0; i < c.draws.rows(); ++i) draws.emplace_back(c.draws.row(i).transpose());
  ReconstructOptions ro;
  ro.predictive_noise = cfg.predictive_noise;
  ro.seed = noise_seed(cfg);
  const auto cf = reconstruct(model, draws, ro);
  const auto synthetic = summarize_synthetic(cf);
  {
    auto out = open_out(dir / "synthetic.csv");
    write_synthetic(out, synthetic);
  }
  GapSummary gaps;
  if (!panel.treated_units().empty()) {
    gaps = gap(cf, panel);
    auto out = open_out(dir / "gap.csv");
    write_gap(out, gaps);
  }
  if (cfg.emit_svg) write_charts(dir, panel, synthetic, gaps);
  return summary;
}

/// Sampler and convergence warnings, also echoed to the log.
inline std::vector<std::string> collect_warnings(const Model& model, const NutsConfig& nuts, const RunResult& run,
                                                 const std::vector<diag::ParamSummary>& summary) {
  std::vector<std::string> w;
  if (model.layout().L > model.layout().J)
    w.push_back("number of factors exceeds number of units; loadings are weakly identified");
  for (const auto& f : run.failures) w.push_back(f);
  for (const auto& c : run.chains) {
    if (const int d = c.divergences(); d > 0)
      w.push_back("chain " + std::to_string(c.chain) + ": " + std::to_string(d) + " divergent transitions after warmup");
    if (const int h = c.treedepth_hits(nuts.max_treedepth); h > 0)
      w.push_back("chain " + std::to_string(c.chain) + ": " + std::to_string(h) + " transitions hit max_treedepth " +
                  std::to_string(nuts.max_treedepth));
  }
  double worst = 1.0;
  std::string worst_name;
  int low_ess = 0;
  const double ess_floor = 100.0 * static_cast<double>(run.chains.size());
  for (const auto& s : summary) {
    if (s.rhat && *s.rhat > worst) worst = *s.rhat, worst_name = s.name;
    if (s.ess_bulk && *s.ess_bulk < ess_floor) ++low_ess;
  }
  if (worst > 1.01) {
    std::ostringstream os;
    os << "max R-hat " << std::setprecision(4) << worst << " (" << worst_name << ") exceeds 1.01";
    w.push_back(os.str());
  }
  if (low_ess > 0)
    w.push_back(std::to_string(low_ess) + " variables have bulk ESS below " + std::to_string(static_cast<int>(ess_floor)));
  for (const auto& s : w) log::warn(s);
  return w;
}

inline json chain_telemetry(const std::vector<ChainDraws>& chains, int max_depth) {
  json arr = json::array();
  for (const auto& c : chains) {
    double acc = 0.0;
    for (double a : c.accept_stat) acc += a;
    arr.push_back({{"chain", c.chain},
                   {"seed", c.seed},
                   {"step_size", c.step_size},
                   {"mean_accept_stat", c.accept_stat.empty() ? 0.0 : acc / static_cast<double>(c.accept_stat.size())},
                   {"divergences", c.divergences()},
                   {"warmup_divergences", c.warmup_divergences},
                   {"treedepth_hits", c.treedepth_hits(max_depth)}});
  }
  return arr;
}

// ---------------------------------------------------------------- commands

/// Fits the model and writes the full artifact set. Returns the manifest.
inline json cmd_fit(const fs::path& config_path, const Overrides& o = {}) {
  RunConfig cfg = load_run_config(config_path);
  apply(cfg, o);
  const PanelData panel = load_data(cfg);
  const Model model(panel, cfg.model, cfg.scaling);
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);

  NutsConfig nuts = cfg.sampler;
  nuts.threads = effective_jobs(cfg);
  log::info("fitting " + std::to_string(panel.J()) + " units x " + std::to_string(panel.T()) + " times, " +
            std::to_string(model.dim()) + " parameters, " + std::to_string(nuts.chains) + " chains");
  RunResult run = fit(model, nuts);
  if (run.chains.empty()) {
    std::string msg = "all chains failed";
    for (const auto& f : run.failures) msg += "; " + f;
    throw Error(ErrorKind::sampler, msg);
  }
  {
    auto out = open_out(dir / "draws.csv");
    write_draws(out, model, run.chains);
  }
  const auto summary = write_fit_outputs(cfg, panel, model, run.chains, dir);

  json m;
  m["manifest_version"] = kManifestVersion;
  m["command"] = "fit";
  m["bsynth_version"] = version();
  m["config"] = to_json(cfg);
  m["data_hash"] = file_hash(cfg.data);
  m["panel"] = {{"units", panel.J()}, {"times", panel.T()}, {"parameters", model.dim()}};
  m["chains"] = chain_telemetry(run.chains, nuts.max_treedepth);
  m["failures"] = run.failures;
  m["warnings"] = collect_warnings(model, nuts, run, summary);
  write_json(dir / kRunManifest, m);
  return m;
}

/**
 * Regenerates summary.csv, synthetic.csv, gap.csv (and charts) from a fit
 * directory without refitting. Writes into `o.out` when given.
 */
inline void cmd_summarize(const fs::path& fit_dir, const Overrides& o = {}) {
  const fs::path manifest = fit_dir / kRunManifest;
  if (!fs::exists(manifest)) throw Error(ErrorKind::io, "no " + std::string(kRunManifest) + " in '" + fit_dir.string() + "'");
  RunConfig cfg = load_run_config(manifest);
  if (o.svg) cfg.emit_svg = true;
  const json m = read_json_file(manifest);
  if (m.contains("data_hash") && m["data_hash"] != file_hash(cfg.data))
    log::warn("data file '" + cfg.data + "' changed since the fit");
  const PanelData panel = load_data(cfg);
  const Model model(panel, cfg.model, cfg.scaling);
  const auto chains = read_draws(fit_dir / "draws.csv", model);
  const fs::path dir = o.out ? fs::path(*o.out) : fit_dir;
  ensure_dir(dir);
  write_fit_outputs(cfg, panel, model, chains, dir);
}

/// Placebo study over every donor; writes placebo.csv and its manifest.
inline json cmd_placebo(const fs::path& config_path, const Overrides& o = {}) {
  RunConfig cfg = load_run_config(config_path);
  apply(cfg, o);
  const PanelData panel = load_data(cfg);
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);

  PlaceboOptions opts;
  opts.exclude_treated = cfg.exclude_treated_in_placebo;
  opts.jobs = effective_jobs(cfg);
  opts.predictive_noise = cfg.predictive_noise;
  NutsConfig nuts = cfg.sampler;
  nuts.threads = 1;
  const auto fits = placebo_study(panel, cfg.windows, cfg.model, cfg.scaling, nuts, opts);
  {
    auto out = open_out(dir / "placebo.csv");
    write_placebo(out, fits);
  }
  if (cfg.emit_svg) {
    const auto x = time_axis(panel.times);
    std::vector<svg::Chart> charts;
    for (const auto& f : fits) {
      if (f.gap.empty()) continue;
      svg::Series g{"", {}, {}, "#555555"};
      svg::Band b90;
      std::optional<double> marker;
      for (const auto& r : f.gap) {
        const double xt = x[static_cast<std::size_t>(*panel.time_index(r.time))];
        if (r.treated && !marker) marker = xt;
        g.x.push_back(xt);
        g.y.push_back(r.gap.mean);
        b90.lo.push_back(r.gap.q05), b90.hi.push_back(r.gap.q95);
      }
      g.bands = {b90};
      svg::Chart c{f.donor, "time", "gap", {g}, marker};
      c.zero_line = true;
      c.width = 320;
      c.height = 220;
      charts.push_back(c);
    }
    auto out = open_out(dir / "placebo.svg");
    svg::write_grid(out, charts, 4);
  }

  json m;
  m["manifest_version"] = kManifestVersion;
  m["command"] = "placebo";
  m["bsynth_version"] = version();
  m["config"] = to_json(cfg);
  m["data_hash"] = file_hash(cfg.data);
  json donors = json::array();
  std::vector<std::string> warnings;
  for (const auto& f : fits) {
    donors.push_back({{"donor", f.donor}, {"divergences", f.divergences}, {"error", f.error ? json(*f.error) : json()}});
    if (f.error) warnings.push_back("donor " + f.donor + ": " + *f.error);
    if (f.divergences > 0)
      warnings.push_back("donor " + f.donor + ": " + std::to_string(f.divergences) + " divergent transitions");
  }
  m["donors"] = donors;
  m["warnings"] = warnings;
  write_json(dir / kPlaceboManifest, m);
  return m;
}

/**
 * Generates a panel and writes panel.csv, truth.csv, a ready-to-run
 * fit_config.json and the resolved simulation config.
 */
inline void cmd_simulate(const fs::path& config_path, const Overrides& o = {}) {
  json j = read_json_file(config_path);
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) j = j["config"];
  SimRunConfig sc = parse_sim_config(j, fs::absolute(config_path).parent_path());
  if (o.out) sc.output_dir = fs::absolute(*o.out).lexically_normal().string();
  if (o.seed) sc.sim.seed = *o.seed;
  const auto sim = sim::generate_panel(sc.sim);
  const fs::path dir(sc.output_dir);
  ensure_dir(dir);
  {
    auto out = open_out(dir / "panel.csv");
    sim::write_long(out, sim.panel);
  }
  {
    auto out = open_out(dir / "truth.csv");
    sim::write_truth(out, sim);
  }
  json fit;
  fit["data"] = "panel.csv";
  fit["covariates"] = {{"static", sim.panel.static_names}, {"time_varying", sim.panel.tv_names}};
  fit["treatment_windows"] = json::array();
  for (const auto& w : sim.windows) fit["treatment_windows"].push_back({{"unit", w.unit}, {"start", w.start}, {"end", w.end}});
  const int factors = sc.fit_factors > 0 ? sc.fit_factors : std::min(2 * sc.sim.factors, sc.sim.times - 1);
  fit["model"] = {{"factors", factors}};
  fit["output_dir"] = "fit";
  write_json(dir / "fit_config.json", fit);

  json m;
  m["manifest_version"] = kManifestVersion;
  m["command"] = "simulate";
  m["bsynth_version"] = version();
  m["config"] = to_json(sc);
  write_json(dir / kSimManifest, m);
}

/// JSON error record printed by the CLI on failure.
inline json error_record(const std::exception& e) {
  json j;
  if (const auto* be = dynamic_cast<const Error*>(&e)) {
    j["error"] = {{"kind", to_string(be->kind())}, {"message", be->what()}};
  } else {
    j["error"] = {{"kind", "internal"}, {"message", e.what()}};
  }
  return j;
}

}  // namespace bsynth::app

#endif  // BSYNTH_APP_HPP
