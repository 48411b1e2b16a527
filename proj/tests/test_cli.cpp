#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bsynth/app.hpp"

using namespace bsynth;
namespace fs = std::filesystem;

namespace {

const std::string kCli = BSYNTH_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

struct Result {
  int code = 0;
  std::string err;
};

/// Fresh scratch directory per test.
fs::path scratch() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  fs::path dir = fs::temp_directory_path() / "bsynth_cli" / (std::string(info->test_suite_name()) + "." + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = "BSYNTH_LOG=warn \"" + kCli + "\" " + args + " 2>\"" + err.string() + "\" >/dev/null";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

/// Simulated 6-unit panel plus a short-run fit config next to it.
fs::path setup(const fs::path& dir, int units = 6) {
  spit(dir / "sim.json", R"({"units": )" + std::to_string(units) +
                             R"(, "times": 16, "factors": 1, "noise_sd": 0.25, "effect": 2.0,
        "treated": [{"unit": 1, "start": 13, "end": 16}], "level": 50, "scale": 4, "seed": 3})");
  EXPECT_EQ(run("simulate --config \"" + (dir / "sim.json").string() + "\" --out \"" + (dir / "sim").string() + "\"", dir).code, 0);
  spit(dir / "fit.json", R"({
    "data": "sim/panel.csv",
    "treatment_windows": [{"unit": "u1", "start": "13", "end": "16"}],
    "model": {"factors": 2},
    "sampler": {"chains": 2, "warmup": 120, "samples": 100, "max_treedepth": 8, "adapt_delta": 0.9, "seed": 7},
    "output_dir": "fit"
  })");
  return dir / "fit.json";
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, SimulateIsByteIdenticalAndFeedsFit) {
  const auto dir = scratch();
  spit(dir / "sim.json", R"({"units": 5, "times": 12, "factors": 1, "effect": [1, 2, 3],
      "treated": [{"unit": 2, "start": 10, "end": 12}], "static_covariates": 1, "seed": 9})");
  ASSERT_EQ(run("simulate --config " + q(dir / "sim.json") + " --out " + q(dir / "a"), dir).code, 0);
  ASSERT_EQ(run("simulate --config " + q(dir / "sim.json") + " --out " + q(dir / "b"), dir).code, 0);
  for (const char* f : {"panel.csv", "truth.csv", "fit_config.json"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  // Manifests differ only in the recorded output directory.
  auto ma = read_json_file(dir / "a" / "sim_manifest.json"), mb = read_json_file(dir / "b" / "sim_manifest.json");
  ma["config"].erase("output_dir");
  mb["config"].erase("output_dir");
  EXPECT_EQ(ma, mb);
  ASSERT_EQ(run("simulate --config " + q(dir / "sim.json") + " --out " + q(dir / "c") + " --seed 10", dir).code, 0);
  EXPECT_NE(slurp(dir / "a" / "panel.csv"), slurp(dir / "c" / "panel.csv"));
  // Rerun from the manifest alone.
  ASSERT_EQ(run("simulate --config " + q(dir / "a" / "sim_manifest.json") + " --out " + q(dir / "d"), dir).code, 0);
  EXPECT_EQ(slurp(dir / "a" / "panel.csv"), slurp(dir / "d" / "panel.csv"));

  const auto fit_cfg = load_run_config(dir / "a" / "fit_config.json");
  EXPECT_EQ(fit_cfg.model.factors, 2);
  EXPECT_EQ(fit_cfg.windows.size(), 1u);
  EXPECT_EQ(fit_cfg.windows[0].unit, "u2");
  const PanelData panel = app::load_data(fit_cfg);
  EXPECT_EQ(panel.J(), 5);
  EXPECT_EQ(panel.P(), 1);
  EXPECT_EQ(panel.mask.count(), 3);
}

TEST(Cli, FitWritesArtifactsAndReproducesFromManifest) {
  const auto dir = scratch();
  const auto cfg = setup(dir);
  ASSERT_EQ(run("fit --config " + q(cfg), dir).code, 0) << slurp(dir / "stderr.txt");
  const auto out = dir / "fit";
  for (const char* f : {"draws.csv", "summary.csv", "synthetic.csv", "gap.csv", "run_manifest.json"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_FALSE(fs::exists(out / "trend.svg"));

  const auto manifest = read_json_file(out / "run_manifest.json");
  EXPECT_EQ(manifest["command"], "fit");
  EXPECT_EQ(manifest["config"]["sampler"]["seed"], 7);
  EXPECT_EQ(manifest["data_hash"], app::file_hash(dir / "sim" / "panel.csv"));
  EXPECT_EQ(manifest["chains"].size(), 2u);
  EXPECT_TRUE(manifest["warnings"].is_array());

  // gap.csv: one row per treated unit x time.
  const auto gap = csv::read_table((out / "gap.csv").string());
  EXPECT_EQ(gap.header, (std::vector<std::string>{"unit", "time", "mean", "q05", "q25", "q75", "q95"}));
  EXPECT_EQ(gap.rows.size(), 16u);
  for (const auto& r : gap.rows) EXPECT_EQ(r[0], "u1");
  const auto synthetic = csv::read_table((out / "synthetic.csv").string());
  EXPECT_EQ(synthetic.rows.size(), 6u * 16u);
  const auto summary = csv::read_table((out / "summary.csv").string());
  EXPECT_EQ(summary.header, diag::summary_header());

  // Rerun from the manifest alone, serially: draws are bit-identical.
  ASSERT_EQ(run("fit --config " + q(out / "run_manifest.json") + " --out " + q(dir / "rerun") + " --jobs 1", dir).code, 0);
  EXPECT_EQ(slurp(out / "draws.csv"), slurp(dir / "rerun" / "draws.csv"));
  EXPECT_EQ(slurp(out / "summary.csv"), slurp(dir / "rerun" / "summary.csv"));

  // A seed override changes the draws and is recorded.
  ASSERT_EQ(run("fit --config " + q(cfg) + " --out " + q(dir / "seeded") + " --seed 8", dir).code, 0);
  EXPECT_NE(slurp(out / "draws.csv"), slurp(dir / "seeded" / "draws.csv"));
  EXPECT_EQ(read_json_file(dir / "seeded" / "run_manifest.json")["config"]["sampler"]["seed"], 8);
}

TEST(Cli, DrawsRoundTripLosslessly) {
  const auto dir = scratch();
  ASSERT_EQ(run("fit --config " + q(setup(dir)), dir).code, 0);
  const auto cfg = load_run_config(dir / "fit" / "run_manifest.json");
  const PanelData panel = app::load_data(cfg);
  const Model model(panel, cfg.model, cfg.scaling);
  const auto chains = app::read_draws(dir / "fit" / "draws.csv", model);
  ASSERT_EQ(chains.size(), 2u);
  EXPECT_EQ(chains[0].draws.rows(), 100);
  std::ostringstream again;
  app::write_draws(again, model, chains);
  EXPECT_EQ(again.str(), slurp(dir / "fit" / "draws.csv"));
}

TEST(Cli, SummarizeIsIdempotentAndRendersUndefinedAsNA) {
  const auto dir = scratch();
  ASSERT_EQ(run("fit --config " + q(setup(dir)), dir).code, 0);
  const auto fit = dir / "fit";
  ASSERT_EQ(run("summarize " + q(fit) + " --out " + q(dir / "s1") + " --svg", dir).code, 0);
  ASSERT_EQ(run("summarize " + q(fit) + " --out " + q(dir / "s2"), dir).code, 0);
  for (const char* f : {"summary.csv", "synthetic.csv", "gap.csv"}) {
    EXPECT_EQ(slurp(fit / f), slurp(dir / "s1" / f)) << f;
    EXPECT_EQ(slurp(fit / f), slurp(dir / "s2" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir / "s1" / "trend.svg"));
  EXPECT_TRUE(fs::exists(dir / "s1" / "gap.svg"));
  EXPECT_NE(slurp(dir / "s1" / "gap.svg").find("<svg"), std::string::npos);

  // Freeze one coordinate across every draw.
  fs::create_directories(dir / "frozen");
  fs::copy_file(fit / "run_manifest.json", dir / "frozen" / "run_manifest.json");
  auto table = csv::read_table((fit / "draws.csv").string());
  const int col = table.column("theta.delta[1]");
  ASSERT_GE(col, 0);
  for (auto& r : table.rows) r[static_cast<std::size_t>(col)] = "0.25";
  {
    std::ofstream out(dir / "frozen" / "draws.csv");
    csv::Writer w(out);
    w.row(table.header);
    for (const auto& r : table.rows) w.row(r);
  }
  ASSERT_EQ(run("summarize " + q(dir / "frozen"), dir).code, 0) << slurp(dir / "stderr.txt");
  const auto summary = csv::read_table((dir / "frozen" / "summary.csv").string());
  const int rhat = summary.column("rhat");
  bool found = false;
  for (const auto& r : summary.rows)
    if (r[0] == "delta[1]") {
      found = true;
      EXPECT_EQ(r[static_cast<std::size_t>(rhat)], "NA");
      EXPECT_EQ(r[static_cast<std::size_t>(rhat) + 1], "NA");
    }
  EXPECT_TRUE(found);
}

TEST(Cli, PlaceboJobsDoNotChangeOutputs) {
  const auto dir = scratch();
  auto j = read_json_file(setup(dir));
  j["sampler"]["chains"] = 1;
  spit(dir / "placebo.json", j.dump());
  ASSERT_EQ(run("placebo --config " + q(dir / "placebo.json") + " --out " + q(dir / "p1") + " --jobs 1", dir).code, 0)
      << slurp(dir / "stderr.txt");
  ASSERT_EQ(run("placebo --config " + q(dir / "placebo.json") + " --out " + q(dir / "p4") + " --jobs 4 --svg", dir).code, 0);
  EXPECT_EQ(slurp(dir / "p1" / "placebo.csv"), slurp(dir / "p4" / "placebo.csv"));
  EXPECT_TRUE(fs::exists(dir / "p4" / "placebo.svg"));
  const auto t = csv::read_table((dir / "p1" / "placebo.csv").string());
  EXPECT_EQ(t.header[0], "donor");
  std::set<std::string> donors;
  for (const auto& r : t.rows) donors.insert(r[0]);
  EXPECT_EQ(donors, (std::set<std::string>{"u2", "u3", "u4", "u5", "u6"}));
  EXPECT_EQ(t.rows.size(), 5u * 16u);

  ASSERT_EQ(run("placebo --config " + q(dir / "p1" / "placebo_manifest.json") + " --out " + q(dir / "p_rerun"), dir).code, 0);
  EXPECT_EQ(slurp(dir / "p1" / "placebo.csv"), slurp(dir / "p_rerun" / "placebo.csv"));
}

TEST(Cli, PlaceboRefusesTooFewDonors) {
  const auto dir = scratch();
  const auto cfg = setup(dir, 3);
  const auto r = run("placebo --config " + q(cfg), dir);
  EXPECT_NE(r.code, 0);
  const auto err = nlohmann::json::parse(r.err.substr(r.err.find('{')));
  EXPECT_EQ(err["error"]["kind"], "validation");
  EXPECT_NE(err["error"]["message"].get<std::string>().find("at least 3 donors"), std::string::npos);
}

TEST(Cli, StructuredErrors) {
  const auto dir = scratch();
  auto expect_error = [&](const std::string& args, const std::string& kind) {
    const auto r = run(args, dir);
    EXPECT_NE(r.code, 0) << args;
    const auto brace = r.err.find("{\"error\"");
    ASSERT_NE(brace, std::string::npos) << r.err;
    const auto j = nlohmann::json::parse(r.err.substr(brace, r.err.find('\n', brace) - brace));
    EXPECT_EQ(j["error"]["kind"], kind) << args;
    EXPECT_FALSE(j["error"]["message"].get<std::string>().empty());
  };
  expect_error("fit --config " + q(dir / "nope.json"), "io");
  spit(dir / "missing_data.json", R"({"data": "absent.csv", "treatment_windows": [{"unit": "a", "start": "1", "end": "1"}]})");
  expect_error("fit --config " + q(dir / "missing_data.json"), "io");
  spit(dir / "bad.json", "{ not json");
  expect_error("fit --config " + q(dir / "bad.json"), "parse");
  spit(dir / "unknown.json", R"({"data": "x.csv", "sampler": {"chians": 4}})");
  expect_error("fit --config " + q(dir / "unknown.json"), "config");
  spit(dir / "badsim.json", R"({"units": "ten"})");
  expect_error("simulate --config " + q(dir / "badsim.json"), "config");
  spit(dir / "badsim2.json", R"({"units": 4, "times": 10, "treated": [{"unit": 9, "start": 5, "end": 6}]})");
  expect_error("simulate --config " + q(dir / "badsim2.json"), "config");
  expect_error("summarize " + q(dir / "empty_dir"), "io");
  EXPECT_NE(run("fit", dir).code, 0);
  EXPECT_NE(run("bogus", dir).code, 0);
}

TEST(Cli, StudySettingsParse) {
  const auto dir = scratch();
  spit(dir / "german.json", R"({
    "data": "gdp.csv",
    "covariates": {"static": ["trade", "inflation"]},
    "treatment_windows": [{"unit": "West Germany", "start": 1990, "end": 2003}],
    "model": {"factors": 8},
    "sampler": {"chains": 4, "warmup": 500, "samples": 500, "max_treedepth": 14, "adapt_delta": 0.95,
                "init_mode": "fixed", "init_radius": 0.1}
  })");
  const auto g = parse_run_config(read_json_file(dir / "german.json"), dir);
  EXPECT_EQ(g.model.factors, 8);
  EXPECT_EQ(g.sampler.max_treedepth, 14);
  EXPECT_EQ(g.sampler.adapt_delta, 0.95);
  EXPECT_EQ(g.sampler.init_mode, InitMode::fixed);
  EXPECT_EQ(g.windows[0].start, "1990");
  EXPECT_EQ(g.columns.static_columns.size(), 2u);
  EXPECT_EQ(fs::path(g.data), dir / "gdp.csv");

  spit(dir / "digital.json", R"({
    "data": "visits.csv",
    "covariates": {"time_varying": ["pageviews"]},
    "treatment_windows": [{"unit": "site A", "start": "2020-06", "end": "2020-08"},
                          {"unit": "site B", "start": "2020-06", "end": "2020-08"}],
    "model": {"factors": 10},
    "sampler": {"warmup": 500, "samples": 500, "max_treedepth": 13, "adapt_delta": 0.99}
  })");
  const auto d = parse_run_config(read_json_file(dir / "digital.json"), dir);
  EXPECT_EQ(d.model.factors, 10);
  EXPECT_EQ(d.sampler.adapt_delta, 0.99);
  EXPECT_EQ(d.windows.size(), 2u);

  // The resolved config survives a JSON round trip.
  const auto again = parse_run_config(to_json(d), dir);
  EXPECT_EQ(to_json(again).dump(), to_json(d).dump());
}
