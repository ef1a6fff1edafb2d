// SPDX-License-Identifier: Apache-2.0
//
// End-to-end CLI coverage: config validation exit codes, train/generate
// round-trips, deterministic sampling, evaluate outputs, the numerical
// failure exit path, and the style/standard comparison report.

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sqg/cli.hpp"

using namespace sqg;
namespace fs = std::filesystem;
using Catch::Approx;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sqg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  json j;
  f >> j;
  return j;
}

/// Minimal 1-qubit gamma run config; caller may tweak fields.
json tiny_config(const fs::path& out_dir, int epochs) {
  return json{{"dataset", "gamma"},
              {"gamma_alpha", 1.0},
              {"gamma_beta", 1.0},
              {"preprocessor", "minmax"},
              {"n_samples", 64},
              {"generator", {{"n_qubits", 1}, {"n_layers", 1}, {"d_latent", 1}}},
              {"training", {{"epochs", epochs}, {"batch_size", 8}}},
              {"seed", 7},
              {"output_dir", out_dir.string()}};
}

int run_cli(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

}  // namespace

TEST_CASE("usage errors exit with code 2, help with 0") {
  CHECK(run_cli({}) == cli::exit_usage);
  CHECK(run_cli({"frobnicate"}) == cli::exit_usage);
  CHECK(run_cli({"--help"}) == cli::exit_ok);
  CHECK(run_cli({"train"}) == cli::exit_usage);                     // missing --config
  CHECK(run_cli({"train", "--config", "/no/such.json"}) == cli::exit_usage);
}

TEST_CASE("config schema violations exit with code 2") {
  const fs::path dir = fresh_dir("schema");
  json c = tiny_config(dir, 1);
  c.erase("dataset");
  write_text(dir / "missing.json", c.dump());
  CHECK(run_cli({"train", "--config", (dir / "missing.json").string()}) == cli::exit_usage);

  c = tiny_config(dir, 1);
  c["surprise"] = 1;
  write_text(dir / "unknown.json", c.dump());
  CHECK(run_cli({"train", "--config", (dir / "unknown.json").string()}) == cli::exit_usage);

  c = tiny_config(dir, 1);
  c["dataset"] = "unknown_set";
  write_text(dir / "badset.json", c.dump());
  CHECK(run_cli({"train", "--config", (dir / "badset.json").string()}) == cli::exit_usage);

  write_text(dir / "notjson.json", "{nope");
  CHECK(run_cli({"train", "--config", (dir / "notjson.json").string()}) == cli::exit_usage);
}

TEST_CASE("train writes a loadable model and a log") {
  const fs::path dir = fresh_dir("train");
  write_text(dir / "config.json", tiny_config(dir, 3).dump());
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_ok);

  const ModelFile m = load_model((dir / "model.json").string());
  CHECK(m.architecture == "style");
  CHECK(m.layout.n_qubits == 1);
  CHECK(m.generator_params.size() == 10);  // 2 * (4*1+0)*1+1 gates
  CHECK(m.preprocessor.has_value());
  CHECK(m.seed == 7);

  const std::string log = read_text(dir / "training_log.csv");
  CHECK(log.find("epoch,loss_generator,loss_discriminator,wall_time_s") != std::string::npos);
  CHECK(log.find("\n0,") != std::string::npos);
}

TEST_CASE("zero-epoch training still emits a model") {
  const fs::path dir = fresh_dir("train0");
  write_text(dir / "config.json", tiny_config(dir, 0).dump());
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_ok);
  const ModelFile m = load_model((dir / "model.json").string());
  CHECK(m.generator_params.size() == 10);
}

TEST_CASE("generate is deterministic in the seed and round-trips the model") {
  const fs::path dir = fresh_dir("gen");
  write_text(dir / "config.json", tiny_config(dir, 2).dump());
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_ok);
  const std::string model = (dir / "model.json").string();

  REQUIRE(run_cli({"generate", "--model", model, "--n", "5", "--exact", "--seed", "3", "--out",
                   (dir / "a.csv").string()}) == cli::exit_ok);
  REQUIRE(run_cli({"generate", "--model", model, "--n", "5", "--exact", "--seed", "3", "--out",
                   (dir / "b.csv").string()}) == cli::exit_ok);
  REQUIRE(run_cli({"generate", "--model", model, "--n", "5", "--exact", "--seed", "4", "--out",
                   (dir / "c.csv").string()}) == cli::exit_ok);
  CHECK(read_text(dir / "a.csv") == read_text(dir / "b.csv"));
  CHECK(read_text(dir / "a.csv") != read_text(dir / "c.csv"));

  const SampleSet s = load_csv((dir / "a.csv").string());
  CHECK(s.dim == 1);
  CHECK(s.rows.size() == 5);
  CHECK(s.names == std::vector<std::string>{"x0"});

  // re-saving the loaded model yields identical samples
  const ModelFile m = load_model(model);
  save_model((dir / "copy.json").string(), m);
  REQUIRE(run_cli({"generate", "--model", (dir / "copy.json").string(), "--n", "5", "--exact",
                   "--seed", "3", "--out", (dir / "d.csv").string()}) == cli::exit_ok);
  CHECK(read_text(dir / "a.csv") == read_text(dir / "d.csv"));
}

TEST_CASE("generate with n=0 writes a header-only CSV") {
  const fs::path dir = fresh_dir("gen0");
  write_text(dir / "config.json", tiny_config(dir, 1).dump());
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_ok);
  REQUIRE(run_cli({"generate", "--model", (dir / "model.json").string(), "--n", "0", "--exact",
                   "--seed", "1", "--out", (dir / "empty.csv").string()}) == cli::exit_ok);
  CHECK(read_text(dir / "empty.csv") == "x0\n");
}

TEST_CASE("shots backend flags") {
  const fs::path dir = fresh_dir("shots");
  write_text(dir / "config.json", tiny_config(dir, 1).dump());
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_ok);
  const std::string model = (dir / "model.json").string();

  // --exact and --shots are mutually exclusive
  CHECK(run_cli({"generate", "--model", model, "--n", "2", "--exact", "--shots", "100", "--seed",
                 "1", "--out", (dir / "x.csv").string()}) == cli::exit_usage);

  REQUIRE(run_cli({"generate", "--model", model, "--n", "3", "--shots", "100", "--seed", "5",
                   "--out", (dir / "s1.csv").string()}) == cli::exit_ok);
  REQUIRE(run_cli({"generate", "--model", model, "--n", "3", "--shots", "100", "--seed", "5",
                   "--out", (dir / "s2.csv").string()}) == cli::exit_ok);
  CHECK(read_text(dir / "s1.csv") == read_text(dir / "s2.csv"));
}

TEST_CASE("noise calibration must match the model width") {
  const fs::path dir = fresh_dir("noise");
  write_text(dir / "config.json", tiny_config(dir, 1).dump());
  REQUIRE(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_ok);
  const std::string model = (dir / "model.json").string();

  const json qcal = {{"p10", 0.01}, {"p01", 0.02}, {"t1_s", 1e-4}, {"t2_s", 1e-4}};
  const json good = {{"qubits", json::array({qcal})}, {"gates", json::array()}};
  write_text(dir / "cal1.json", good.dump());
  REQUIRE(run_cli({"generate", "--model", model, "--n", "3", "--noise",
                   (dir / "cal1.json").string(), "--seed", "2", "--out",
                   (dir / "noisy.csv").string()}) == cli::exit_ok);
  CHECK(load_csv((dir / "noisy.csv").string()).rows.size() == 3);

  json wide = good;
  wide["qubits"].push_back(wide["qubits"][0]);
  wide["qubits"].push_back(wide["qubits"][0]);
  write_text(dir / "cal3.json", wide.dump());
  CHECK(run_cli({"generate", "--model", model, "--n", "3", "--noise",
                 (dir / "cal3.json").string(), "--seed", "2", "--out",
                 (dir / "noisy3.csv").string()}) == cli::exit_usage);
}

TEST_CASE("evaluate of a file against itself reports zero divergence") {
  const fs::path dir = fresh_dir("eval");
  Rng rng(50);
  SampleSet s = sample_gaussian3d(3000, rng);
  save_csv((dir / "ref.csv").string(), s);

  REQUIRE(run_cli({"evaluate", "--reference", (dir / "ref.csv").string(), "--generated",
                   (dir / "ref.csv").string(), "--bins", "50", "--grid-bins", "10", "--out",
                   (dir / "metrics.json").string()}) == cli::exit_ok);
  const json out = read_json(dir / "metrics.json");
  CHECK(out["dim"] == 3);
  REQUIRE(out["kl_per_dim"].size() == 3);
  for (const auto& v : out["kl_per_dim"]) CHECK(v.get<double>() == 0.0);
  CHECK(out["eigen_agreement"].get<double>() == 0.0);
  REQUIRE(out.contains("augmentation"));
  CHECK(out["augmentation"].size() == 3);
  REQUIRE(out["ratio_grids"].size() == 3);  // dims (0,1), (0,2), (1,2)
  CHECK(fs::exists(dir / "metrics_grid_0_1.csv"));
  CHECK(fs::exists(dir / "metrics_grid_1_2.csv"));
}

TEST_CASE("evaluate rejects mismatched dimensions and skips tiny files") {
  const fs::path dir = fresh_dir("eval2");
  Rng rng(51);
  save_csv((dir / "g3.csv").string(), sample_gaussian3d(100, rng));
  save_csv((dir / "g1.csv").string(), sample_gamma(100, 1.0, 1.0, rng));
  CHECK(run_cli({"evaluate", "--reference", (dir / "g3.csv").string(), "--generated",
                 (dir / "g1.csv").string(), "--out", (dir / "m.json").string()}) ==
        cli::exit_usage);

  REQUIRE(run_cli({"evaluate", "--reference", (dir / "g1.csv").string(), "--generated",
                   (dir / "g1.csv").string(), "--out", (dir / "m1.json").string()}) ==
          cli::exit_ok);
  const json out = read_json(dir / "m1.json");
  CHECK(out.contains("augmentation_skipped"));
  CHECK_FALSE(out.contains("eigen_agreement"));  // 1D has no covariance report
}

TEST_CASE("non-finite data during training exits with code 3") {
  const fs::path dir = fresh_dir("diverge");
  std::string csv = "x\n";
  for (int i = 0; i < 15; ++i) csv += std::to_string(0.1 * i) + "\n";
  csv += "inf\n";  // minmax squashes finite rows to -1 and this one to NaN
  write_text(dir / "bad.csv", csv);

  json c = tiny_config(dir, 1);
  c["dataset"] = "csv:" + (dir / "bad.csv").string();
  c["training"]["batch_size"] = 16;
  write_text(dir / "config.json", c.dump());
  CHECK(run_cli({"train", "--config", (dir / "config.json").string()}) == cli::exit_numeric);
}

TEST_CASE("compare reports both architectures' sizes and divergences") {
  const fs::path dir = fresh_dir("compare");
  // A csv dataset makes the comparison reference the training file itself, so
  // even the untrained (epochs = 0) generators inverse-transform into the
  // reference range and the divergences stay finite.
  Rng rng(99);
  save_csv((dir / "data.csv").string(), sample_gaussian3d(300, rng));
  json c = {{"dataset", "csv:" + (dir / "data.csv").string()},
            {"n_samples", 300},
            {"preprocessor", "minmax"},
            {"generator",
             {{"n_qubits", 3},
              {"n_layers", 2},
              {"d_latent", 5},
              {"entanglers", json::array({json::array({0, 1}), json::array({1, 2})})}}},
            {"training", {{"epochs", 0}, {"batch_size", 32}}},
            {"seed", 13},
            {"n_eval", 200},
            {"eval_bins", 20},
            {"output_dir", dir.string()}};
  write_text(dir / "config.json", c.dump());
  REQUIRE(run_cli({"compare", "--config", (dir / "config.json").string(), "--out",
                   (dir / "report.json").string()}) == cli::exit_ok);

  const json out = read_json(dir / "report.json");
  CHECK(out["parameter_count_style"] == 62);
  CHECK(out["parameter_count_standard"] == 36);
  CHECK(out["kl_style"].size() == 3);
  CHECK(out["kl_standard"].size() == 3);
  for (const auto& v : out["kl_style"]) CHECK(std::isfinite(v.get<double>()));

  const ModelFile style = load_model((dir / "model_style.json").string());
  CHECK(style.architecture == "style");
  CHECK(style.generator_params.size() == 62);
  const ModelFile standard = load_model((dir / "model_standard.json").string());
  CHECK(standard.architecture == "standard");
  CHECK(standard.generator_params.size() == 31);
}
