#ifndef BSYNTH_CONFIG_HPP
#define BSYNTH_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "bsynth/error.hpp"
#include "bsynth/model.hpp"
#include "bsynth/panel.hpp"
#include "bsynth/sampler.hpp"
#include "bsynth/simulate.hpp"

namespace bsynth {

using json = nlohmann::ordered_json;

/// Everything a fit or placebo run needs. Paths are absolute once loaded.
struct RunConfig {
  std::string data;
  char delimiter = ',';
  LoadOptions columns;
  std::vector<TreatmentWindow> windows;
  ScalingPolicy scaling;
  ModelConfig model;
  NutsConfig sampler;
  bool predictive_noise = false;
  bool exclude_treated_in_placebo = true;
  std::string output_dir = "out";
  bool emit_svg = false;
  /// Chain threads for fit, concurrent donor fits for placebo; 0 = chains.
  int jobs = 0;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw Error(ErrorKind::config, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw Error(ErrorKind::config, "unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::config, where + "." + key + " has the wrong type");
  }
}

/// Time labels may be written as JSON strings or integers.
inline std::string label(const json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorKind::config, where + " must be a string or an integer");
}

inline std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_relative()) p = base / p;
  return std::filesystem::absolute(p).lexically_normal().string();
}

}  // namespace detail

/**
 * Parses a run config. Relative `data` and `output_dir` resolve against
 * `base_dir`. Unknown keys are rejected so typos surface early.
 */
inline RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  using detail::read;
  detail::check_keys(j, "config",
                     {"data", "delimiter", "columns", "covariates", "treatment_windows", "standardization", "model",
                      "sampler", "posterior", "output_dir", "emit_svg", "jobs"});
  RunConfig c;
  if (!j.contains("data")) throw Error(ErrorKind::config, "config.data is required");
  read(j, "data", c.data, "config");
  std::string delim = ",";
  read(j, "delimiter", delim, "config");
  if (delim == "\\t" || delim == "tab") delim = "\t";
  if (delim.size() != 1) throw Error(ErrorKind::config, "config.delimiter must be a single character");
  c.delimiter = delim[0];

  if (j.contains("columns")) {
    const auto& o = j["columns"];
    detail::check_keys(o, "columns", {"unit", "time", "outcome"});
    read(o, "unit", c.columns.unit_column, "columns");
    read(o, "time", c.columns.time_column, "columns");
    read(o, "outcome", c.columns.outcome_column, "columns");
  }
  if (j.contains("covariates")) {
    const auto& o = j["covariates"];
    detail::check_keys(o, "covariates", {"static", "time_varying"});
    read(o, "static", c.columns.static_columns, "covariates");
    read(o, "time_varying", c.columns.tv_columns, "covariates");
  }
  if (j.contains("treatment_windows")) {
    const auto& arr = j["treatment_windows"];
    if (!arr.is_array()) throw Error(ErrorKind::config, "treatment_windows must be an array");
    for (const auto& w : arr) {
      detail::check_keys(w, "treatment_windows[]", {"unit", "start", "end"});
      if (!w.contains("unit") || !w.contains("start") || !w.contains("end"))
        throw Error(ErrorKind::config, "every treatment window needs unit, start and end");
      c.windows.push_back({detail::label(w["unit"], "window unit"), detail::label(w["start"], "window start"),
                           detail::label(w["end"], "window end")});
    }
  }
  if (j.contains("standardization")) {
    const auto& o = j["standardization"];
    detail::check_keys(o, "standardization", {"center", "scale"});
    std::string center = to_string(c.scaling.center), scale = to_string(c.scaling.scale);
    read(o, "center", center, "standardization");
    read(o, "scale", scale, "standardization");
    c.scaling.center = parse_center_policy(center);
    c.scaling.scale = parse_scale_policy(scale);
  }
  if (j.contains("model")) {
    const auto& o = j["model"];
    detail::check_keys(o, "model",
                       {"factors", "delta_sd", "f_lower_sd", "f_diag_sd", "kappa_sd", "gamma_sd", "beta_off_sd",
                        "sigma_sd", "use_static_covariates", "use_tv_covariates", "gradient"});
    auto& m = c.model;
    read(o, "factors", m.factors, "model");
    read(o, "delta_sd", m.delta_sd, "model");
    read(o, "f_lower_sd", m.f_lower_sd, "model");
    read(o, "f_diag_sd", m.f_diag_sd, "model");
    read(o, "kappa_sd", m.kappa_sd, "model");
    read(o, "gamma_sd", m.gamma_sd, "model");
    read(o, "beta_off_sd", m.beta_off_sd, "model");
    read(o, "sigma_sd", m.sigma_sd, "model");
    read(o, "use_static_covariates", m.use_static_covariates, "model");
    read(o, "use_tv_covariates", m.use_tv_covariates, "model");
    std::string grad = to_string(m.gradient);
    read(o, "gradient", grad, "model");
    m.gradient = parse_gradient_method(grad);
    for (double sd : {m.delta_sd, m.f_lower_sd, m.f_diag_sd, m.kappa_sd, m.gamma_sd, m.beta_off_sd, m.sigma_sd})
      if (!(sd > 0.0)) throw Error(ErrorKind::config, "prior scales must be positive");
  }
  if (j.contains("sampler")) {
    const auto& o = j["sampler"];
    detail::check_keys(o, "sampler",
                       {"chains", "warmup", "samples", "max_treedepth", "adapt_delta", "init_mode", "init_radius",
                        "seed"});
    auto& s = c.sampler;
    read(o, "chains", s.chains, "sampler");
    read(o, "warmup", s.warmup, "sampler");
    read(o, "samples", s.samples, "sampler");
    read(o, "max_treedepth", s.max_treedepth, "sampler");
    read(o, "adapt_delta", s.adapt_delta, "sampler");
    std::string mode = to_string(s.init_mode);
    read(o, "init_mode", mode, "sampler");
    s.init_mode = parse_init_mode(mode);
    read(o, "init_radius", s.init_radius, "sampler");
    read(o, "seed", s.seed, "sampler");
  }
  if (j.contains("posterior")) {
    const auto& o = j["posterior"];
    detail::check_keys(o, "posterior", {"predictive_noise", "exclude_treated_in_placebo"});
    read(o, "predictive_noise", c.predictive_noise, "posterior");
    read(o, "exclude_treated_in_placebo", c.exclude_treated_in_placebo, "posterior");
  }
  read(j, "output_dir", c.output_dir, "config");
  read(j, "emit_svg", c.emit_svg, "config");
  read(j, "jobs", c.jobs, "config");
  if (c.jobs < 0) throw Error(ErrorKind::config, "jobs must be >= 0");
  c.sampler.validate();
  if (c.model.factors < 1) throw Error(ErrorKind::config, "model.factors must be >= 1");

  c.data = detail::resolve(c.data, base_dir);
  c.output_dir = detail::resolve(c.output_dir, base_dir);
  return c;
}

/// Fully resolved config; parsing it back yields the same RunConfig.
inline json to_json(const RunConfig& c) {
  json j;
  j["data"] = c.data;
  j["delimiter"] = c.delimiter == '\t' ? std::string("\\t") : std::string(1, c.delimiter);
  j["columns"] = {{"unit", c.columns.unit_column}, {"time", c.columns.time_column},
                  {"outcome", c.columns.outcome_column}};
  j["covariates"] = {{"static", c.columns.static_columns}, {"time_varying", c.columns.tv_columns}};
  j["treatment_windows"] = json::array();
  for (const auto& w : c.windows) j["treatment_windows"].push_back({{"unit", w.unit}, {"start", w.start}, {"end", w.end}});
  j["standardization"] = {{"center", to_string(c.scaling.center)}, {"scale", to_string(c.scaling.scale)}};
  const auto& m = c.model;
  j["model"] = {{"factors", m.factors},
                {"delta_sd", m.delta_sd},
                {"f_lower_sd", m.f_lower_sd},
                {"f_diag_sd", m.f_diag_sd},
                {"kappa_sd", m.kappa_sd},
                {"gamma_sd", m.gamma_sd},
                {"beta_off_sd", m.beta_off_sd},
                {"sigma_sd", m.sigma_sd},
                {"use_static_covariates", m.use_static_covariates},
                {"use_tv_covariates", m.use_tv_covariates},
                {"gradient", to_string(m.gradient)}};
  const auto& s = c.sampler;
  j["sampler"] = {{"chains", s.chains},
                  {"warmup", s.warmup},
                  {"samples", s.samples},
                  {"max_treedepth", s.max_treedepth},
                  {"adapt_delta", s.adapt_delta},
                  {"init_mode", to_string(s.init_mode)},
                  {"init_radius", s.init_radius},
                  {"seed", s.seed}};
  j["posterior"] = {{"predictive_noise", c.predictive_noise},
                    {"exclude_treated_in_placebo", c.exclude_treated_in_placebo}};
  j["output_dir"] = c.output_dir;
  j["emit_svg"] = c.emit_svg;
  j["jobs"] = c.jobs;
  return j;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, "invalid JSON in '" + path.string() + "': " + e.what());
  }
}

/// Loads a run config, or the config embedded in a run manifest.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  json j = read_json_file(path);
  if (j.is_object() && j.contains("config") && j.contains("manifest_version")) j = j["config"];
  return parse_run_config(j, std::filesystem::absolute(path).parent_path());
}

/// Simulation settings plus where to write the generated files.
struct SimRunConfig {
  sim::SimConfig sim;
  std::string output_dir = "sim";
  int fit_factors = 0;  // factors in the emitted fit config; 0 = 2 * sim.factors
};

/**
 * Keys: units, times, factors, noise_sd, effect (number or array), treated
 * ([{unit: 1-based index, start: time label, end: time label}]),
 * static_covariates, tv_covariates, level, scale, shrinkage_raw,
 * first_time, seed, output_dir, fit_factors.
 */
inline SimRunConfig parse_sim_config(const json& j, const std::filesystem::path& base_dir) {
  using detail::read;
  detail::check_keys(j, "simulation config",
                     {"units", "times", "factors", "noise_sd", "effect", "treated", "static_covariates",
                      "tv_covariates", "level", "scale", "shrinkage_raw", "first_time", "seed", "output_dir",
                      "fit_factors"});
  SimRunConfig c;
  auto& s = c.sim;
  const std::string where = "simulation";
  read(j, "units", s.units, where);
  read(j, "times", s.times, where);
  read(j, "factors", s.factors, where);
  read(j, "noise_sd", s.noise_sd, where);
  read(j, "static_covariates", s.static_covariates, where);
  read(j, "tv_covariates", s.tv_covariates, where);
  read(j, "level", s.level, where);
  read(j, "scale", s.scale, where);
  read(j, "shrinkage_raw", s.shrinkage_raw, where);
  read(j, "first_time", s.first_time, where);
  read(j, "seed", s.seed, where);
  read(j, "output_dir", c.output_dir, where);
  read(j, "fit_factors", c.fit_factors, where);
  if (j.contains("effect")) {
    const auto& e = j["effect"];
    if (e.is_number()) {
      s.effect = {e.get<double>()};
    } else if (e.is_array() && !e.empty() && std::all_of(e.begin(), e.end(), [](const json& v) { return v.is_number(); })) {
      s.effect = e.get<std::vector<double>>();
    } else {
      throw Error(ErrorKind::config, "simulation.effect must be a number or a non-empty numeric array");
    }
  }
  if (j.contains("treated")) {
    const auto& arr = j["treated"];
    if (!arr.is_array()) throw Error(ErrorKind::config, "simulation.treated must be an array");
    for (const auto& w : arr) {
      detail::check_keys(w, "simulation.treated[]", {"unit", "start", "end"});
      if (!w.contains("unit") || !w["unit"].is_number_integer() || !w.contains("start") ||
          !w["start"].is_number_integer() || !w.contains("end") || !w["end"].is_number_integer())
        throw Error(ErrorKind::config, "simulation.treated entries need integer unit, start and end");
      s.treated.push_back({w["unit"].get<int>() - 1, w["start"].get<int>() - s.first_time,
                           w["end"].get<int>() - s.first_time});
    }
  }
  if (c.fit_factors < 0) throw Error(ErrorKind::config, "fit_factors must be >= 0");
  s.validate();
  c.output_dir = detail::resolve(c.output_dir, base_dir);
  return c;
}

inline json to_json(const SimRunConfig& c) {
  const auto& s = c.sim;
  json j;
  j["units"] = s.units;
  j["times"] = s.times;
  j["factors"] = s.factors;
  j["noise_sd"] = s.noise_sd;
  j["effect"] = s.effect;
  j["treated"] = json::array();
  for (const auto& t : s.treated)
    j["treated"].push_back({{"unit", t.unit + 1}, {"start", t.start + s.first_time}, {"end", t.end + s.first_time}});
  j["static_covariates"] = s.static_covariates;
  j["tv_covariates"] = s.tv_covariates;
  j["level"] = s.level;
  j["scale"] = s.scale;
  j["shrinkage_raw"] = s.shrinkage_raw;
  j["first_time"] = s.first_time;
  j["seed"] = s.seed;
  j["output_dir"] = c.output_dir;
  j["fit_factors"] = c.fit_factors;
  return j;
}

}  // namespace bsynth

#endif  // BSYNTH_CONFIG_HPP
