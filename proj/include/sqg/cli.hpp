// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqg/data.hpp"
#include "sqg/generator.hpp"
#include "sqg/metrics.hpp"
#include "sqg/model_io.hpp"
#include "sqg/training.hpp"

namespace sqg::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;    // bad flags, config schema, bad inputs
inline constexpr int exit_numeric = 3;  // training diverged / non-finite loss

// ---------------------------------------------------------------------------
// Run configuration (train / compare)
// ---------------------------------------------------------------------------

/// One JSON file drives a whole run: dataset choice, preprocessing,
/// generator layout, training hyperparameters, seed, and output directory.
/// Unknown keys anywhere in the file are rejected.
struct RunConfig {
  std::string dataset;  // "gamma" | "gaussian3d" | "csv:<path>"
  double gamma_alpha = 1.0;
  double gamma_beta = 1.0;
  std::string preprocessor = "minmax";  // "minmax" | "power_minmax"
  int n_samples = 10000;                // synthetic datasets only
  CircuitLayout layout;
  TrainingConfig training;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  int n_eval = 10000;   // compare: generated sample count per architecture
  int eval_bins = 100;  // compare: histogram bins per dimension
};

inline RunConfig run_config_from_json(const json& j) {
  const std::string ctx = "config";
  detail::check_keys(j, ctx,
                     {"dataset", "gamma_alpha", "gamma_beta", "preprocessor", "n_samples",
                      "generator", "training", "seed", "output_dir", "n_eval", "eval_bins"});
  RunConfig c;
  c.dataset = detail::require<std::string>(j, ctx, "dataset");
  if (c.dataset != "gamma" && c.dataset != "gaussian3d" && c.dataset.rfind("csv:", 0) != 0)
    throw std::invalid_argument("config: dataset must be gamma, gaussian3d, or csv:<path>");
  if (c.dataset.rfind("csv:", 0) == 0 && c.dataset.size() == 4)
    throw std::invalid_argument("config: dataset csv path is empty");
  c.gamma_alpha = detail::get_or<double>(j, ctx, "gamma_alpha", 1.0);
  c.gamma_beta = detail::get_or<double>(j, ctx, "gamma_beta", 1.0);
  c.preprocessor = detail::get_or<std::string>(j, ctx, "preprocessor", "minmax");
  if (c.preprocessor != "minmax" && c.preprocessor != "power_minmax")
    throw std::invalid_argument("config: preprocessor must be minmax or power_minmax");
  c.n_samples = detail::get_or<int>(j, ctx, "n_samples", 10000);
  if (c.n_samples < 2) throw std::invalid_argument("config: n_samples must be >= 2");
  c.layout = layout_from_json(detail::require<json>(j, ctx, "generator"), "config.generator");
  c.training = training_config_from_json(detail::require<json>(j, ctx, "training"), c.layout,
                                         "config.training");
  c.seed = detail::get_or<std::uint64_t>(j, ctx, "seed", 0);
  c.training.seed = c.seed;
  c.output_dir = detail::get_or<std::string>(j, ctx, "output_dir", ".");
  c.n_eval = detail::get_or<int>(j, ctx, "n_eval", 10000);
  c.eval_bins = detail::get_or<int>(j, ctx, "eval_bins", 100);
  if (c.n_eval < 1 || c.eval_bins < 1)
    throw std::invalid_argument("config: n_eval and eval_bins must be >= 1");
  c.training.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

namespace detail_cli {

/// Draws (or loads) the raw dataset named by the config. `rng` advances, so
/// consecutive calls give fresh independent draws for synthetic datasets.
inline SampleSet make_dataset(const RunConfig& c, std::size_t n, Rng& rng) {
  if (c.dataset == "gamma") return sample_gamma(n, c.gamma_alpha, c.gamma_beta, rng);
  if (c.dataset == "gaussian3d") return sample_gaussian3d(n, rng);
  return load_csv(c.dataset.substr(4));
}

inline Preprocessor fit_preprocessor(const RunConfig& c, const SampleSet& raw) {
  return Preprocessor::fit(raw, c.preprocessor == "minmax" ? PreprocessKind::minmax
                                                           : PreprocessKind::power_minmax);
}

inline std::vector<std::string> default_names(int dim) {
  std::vector<std::string> names;
  for (int i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed for " + path);
}

/// Per-dimension KL of generated against reference, binned over the
/// reference range.
inline std::vector<double> kl_per_dimension(const SampleSet& reference, const SampleSet& generated,
                                            int bins, const std::vector<int>& log_dims = {}) {
  std::vector<double> kl;
  for (int dim = 0; dim < reference.dim; ++dim) {
    const bool log_scale =
        std::find(log_dims.begin(), log_dims.end(), dim) != log_dims.end();
    const HistScale scale = log_scale ? HistScale::log : HistScale::linear;
    const Histogram href = build_histogram(reference.column(dim), bins, scale);
    const Histogram hgen = histogram_with_edges(generated.column(dim), href.edges, scale);
    kl.push_back(kl_divergence(href, hgen));
  }
  return kl;
}

}  // namespace detail_cli

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

inline int cmd_train(const std::string& config_path) {
  const RunConfig config = load_run_config(config_path);
  Rng rng_data = make_stream(config.seed, Stream::data_sampling);
  const SampleSet raw =
      detail_cli::make_dataset(config, static_cast<std::size_t>(config.n_samples), rng_data);
  if (raw.dim != config.layout.n_qubits)
    throw std::invalid_argument("config: dataset dim " + std::to_string(raw.dim) +
                                " != n_qubits " + std::to_string(config.layout.n_qubits));
  const Preprocessor prep = detail_cli::fit_preprocessor(config, raw);
  const SampleSet transformed = prep.transform(raw);

  const TrainingResult result = train(config.training, transformed);

  ModelFile m;
  m.architecture = "style";
  m.layout = config.layout;
  m.generator_params = result.generator.to_flat();
  m.discriminator = result.discriminator;
  m.preprocessor = prep;
  m.config = config.training;
  m.seed = config.seed;
  if (!result.log.records.empty()) {
    m.final_loss_generator = result.log.records.back().loss_generator;
    m.final_loss_discriminator = result.log.records.back().loss_discriminator;
  }

  std::filesystem::create_directories(config.output_dir);
  const std::string model_path = config.output_dir + "/model.json";
  const std::string log_path = config.output_dir + "/training_log.csv";
  save_model(model_path, m);
  save_training_log_csv(log_path, result.log);
  std::cout << "model: " << model_path << "\nlog: " << log_path << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

inline int cmd_generate(const std::string& model_path, std::size_t n, bool exact,
                        std::optional<std::size_t> shots, const std::string& noise_path,
                        std::uint64_t seed, const std::string& out_path) {
  const ModelFile m = load_model(model_path);
  Rng rng_latent = make_stream(seed, Stream::latent_generation);
  Rng rng_shots = make_stream(seed, Stream::shots);

  std::optional<NoiseModel> noise;
  if (!noise_path.empty()) {
    noise = load_noise_model(noise_path);
    if (!noise->qubits.empty() &&
        static_cast<int>(noise->qubits.size()) != m.layout.n_qubits)
      throw std::invalid_argument("noise calibration has " + std::to_string(noise->qubits.size()) +
                                  " qubits but the model needs " +
                                  std::to_string(m.layout.n_qubits));
  }

  Backend backend = ExactBackend{};
  if (noise) {
    backend = NoisyBackend{&*noise, shots.value_or(1000), &rng_shots};
  } else if (shots) {
    backend = ShotsBackend{*shots, &rng_shots};
  } else if (!exact) {
    backend = ExactBackend{};  // default
  }

  SampleSet s;
  s.dim = m.layout.n_qubits;
  s.space = "transformed";
  s.names = detail_cli::default_names(s.dim);
  s.rows.reserve(n);
  const GeneratorParams style_params =
      m.architecture == "style" ? GeneratorParams::from_flat(m.generator_params)
                                : GeneratorParams{};
  for (std::size_t i = 0; i < n; ++i) {
    const LatentVector z = sample_latent(m.layout.d_latent, rng_latent);
    s.rows.push_back(m.architecture == "style"
                         ? generate_sample(m.layout, style_params, z, backend)
                         : standard_generate_sample(m.layout, m.generator_params, z, backend));
  }
  if (m.preprocessor) s = m.preprocessor->inverse_transform(s);
  s.names = detail_cli::default_names(s.dim);
  save_csv(out_path, s);
  std::cout << "samples: " << out_path << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

inline int cmd_evaluate(const std::string& reference_csv, const std::string& generated_csv,
                        int bins, const std::vector<int>& log_dims, int grid_bins,
                        const std::string& out_path) {
  const SampleSet reference = load_csv(reference_csv);
  const SampleSet generated = load_csv(generated_csv);
  if (reference.dim != generated.dim)
    throw std::invalid_argument("evaluate: reference dim " + std::to_string(reference.dim) +
                                " != generated dim " + std::to_string(generated.dim));
  for (int d : log_dims)
    if (d < 0 || d >= reference.dim)
      throw std::invalid_argument("evaluate: --log-dims index out of range");

  json out;
  out["dim"] = reference.dim;
  out["bins"] = bins;
  out["kl_per_dim"] = detail_cli::kl_per_dimension(reference, generated, bins, log_dims);

  if (reference.dim >= 2)
    out["eigen_agreement"] = covariance_eigen_agreement(reference, generated);

  // Data-augmentation report per dimension. Fresh reference draws are
  // emulated by reshuffling the reference file, so sizes adapt to the
  // smaller of the two files; tiny files skip the check.
  const std::size_t max_n = std::min(reference.rows.size(), generated.rows.size());
  std::size_t large = std::min<std::size_t>(100000, max_n);
  large -= large % 10;
  if (large >= 2000) {
    const std::size_t small = large / 10;
    json reports = json::array();
    for (int dim = 0; dim < reference.dim; ++dim) {
      Rng rng(0xa0a0a0a0ULL + static_cast<std::uint64_t>(dim));
      std::vector<double> pool = reference.column(dim);
      const auto sampler = [&](std::size_t n) {
        std::shuffle(pool.begin(), pool.end(), rng);
        return std::vector<double>(pool.begin(), pool.begin() + static_cast<long>(n));
      };
      const AugmentationReport r =
          data_augmentation_check(sampler, generated, dim, small, large, 100);
      json rj = to_json(r);
      rj["dim"] = dim;
      reports.push_back(std::move(rj));
    }
    out["augmentation"] = std::move(reports);
  } else {
    out["augmentation_skipped"] = "need at least 2000 rows in both files";
  }

  if (reference.dim >= 2) {
    json grids = json::array();
    const std::string stem = out_path.size() > 5 && out_path.substr(out_path.size() - 5) == ".json"
                                 ? out_path.substr(0, out_path.size() - 5)
                                 : out_path;
    for (int a = 0; a < reference.dim; ++a)
      for (int b = a + 1; b < reference.dim; ++b) {
        const RatioGrid g = build_ratio_grid(reference, generated, a, b, grid_bins, grid_bins);
        json gj = to_json(g);
        gj["dims"] = {a, b};
        const std::string csv_path =
            stem + "_grid_" + std::to_string(a) + "_" + std::to_string(b) + ".csv";
        save_ratio_grid_csv(csv_path, g);
        gj["csv"] = csv_path;
        grids.push_back(std::move(gj));
      }
    out["ratio_grids"] = std::move(grids);
  }

  detail_cli::write_json(out_path, out);
  std::cout << "metrics: " << out_path << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

inline int cmd_compare(const std::string& config_path, const std::string& out_path) {
  const RunConfig config = load_run_config(config_path);
  Rng rng_data = make_stream(config.seed, Stream::data_sampling);
  const SampleSet raw =
      detail_cli::make_dataset(config, static_cast<std::size_t>(config.n_samples), rng_data);
  if (raw.dim != config.layout.n_qubits)
    throw std::invalid_argument("config: dataset dim " + std::to_string(raw.dim) +
                                " != n_qubits " + std::to_string(config.layout.n_qubits));
  const Preprocessor prep = detail_cli::fit_preprocessor(config, raw);
  const SampleSet transformed = prep.transform(raw);

  const TrainingResult style = train(config.training, transformed);
  const StandardTrainingResult standard = train_standard(config.training, transformed);

  // Matched evaluation: same latent stream for both architectures, fresh
  // reference draws for the comparison (the file itself for csv datasets).
  const auto n_eval = static_cast<std::size_t>(config.n_eval);
  SampleSet ref_eval = config.dataset.rfind("csv:", 0) == 0
                           ? raw
                           : detail_cli::make_dataset(config, n_eval, rng_data);

  const auto generate_all = [&](bool is_style) {
    Rng rng_latent = make_stream(config.seed, Stream::latent_generation);
    const GeneratorParams style_params = style.generator;
    SampleSet s;
    s.dim = config.layout.n_qubits;
    s.space = "transformed";
    s.rows.reserve(n_eval);
    for (std::size_t i = 0; i < n_eval; ++i) {
      const LatentVector z = sample_latent(config.layout.d_latent, rng_latent);
      s.rows.push_back(is_style
                           ? generate_sample(config.layout, style_params, z)
                           : standard_generate_sample(config.layout, standard.phi, z));
    }
    return prep.inverse_transform(s);
  };
  const SampleSet gen_style = generate_all(true);
  const SampleSet gen_standard = generate_all(false);

  json out;
  out["parameter_count_style"] = config.layout.parameter_count();
  out["parameter_count_standard"] = standard_parameter_count(config.layout);
  out["kl_style"] = detail_cli::kl_per_dimension(ref_eval, gen_style, config.eval_bins);
  out["kl_standard"] = detail_cli::kl_per_dimension(ref_eval, gen_standard, config.eval_bins);
  out["n_eval"] = n_eval;
  out["bins"] = config.eval_bins;
  out["seed"] = config.seed;
  out["epochs"] = config.training.epochs;

  if (!config.output_dir.empty()) {
    std::filesystem::create_directories(config.output_dir);
    ModelFile ms;
    ms.architecture = "style";
    ms.layout = config.layout;
    ms.generator_params = style.generator.to_flat();
    ms.discriminator = style.discriminator;
    ms.preprocessor = prep;
    ms.config = config.training;
    ms.seed = config.seed;
    save_model(config.output_dir + "/model_style.json", ms);
    ModelFile mb;
    mb.architecture = "standard";
    mb.layout = config.layout;
    mb.generator_params = standard.phi;
    mb.discriminator = standard.discriminator;
    mb.preprocessor = prep;
    mb.config = config.training;
    mb.seed = config.seed;
    save_model(config.output_dir + "/model_standard.json", mb);
  }

  detail_cli::write_json(out_path, out);
  std::cout << "comparison: " << out_path << '\n';
  return exit_ok;
}

// ---------------------------------------------------------------------------
// argument parsing
// ---------------------------------------------------------------------------

/// Entry point shared by the binary and the tests; args exclude argv[0].
/// Exit codes: 0 success, 2 usage/config errors, 3 numerical failure.
inline int run(const std::vector<std::string>& args) {
  CLI::App app{"style-based quantum GAN trainer and sampler"};
  app.require_subcommand(1);

  std::string train_config;
  CLI::App* c_train = app.add_subcommand("train", "train a model from a JSON config");
  c_train->add_option("--config", train_config, "run configuration JSON")->required();

  std::string gen_model, gen_noise, gen_out;
  std::uint64_t gen_seed = 0;
  std::size_t gen_n = 0;
  bool gen_exact = false;
  std::optional<std::size_t> gen_shots;
  CLI::App* c_gen = app.add_subcommand("generate", "sample from a trained model");
  c_gen->add_option("--model", gen_model, "model JSON path")->required();
  c_gen->add_option("--n", gen_n, "number of samples")->required();
  CLI::Option* o_exact = c_gen->add_flag("--exact", gen_exact, "exact expectation backend");
  CLI::Option* o_shots = c_gen->add_option(
      "--shots", [&gen_shots](const std::vector<std::string>& v) {
        gen_shots = std::stoull(v.at(0));
        return true;
      },
      "estimate expectations from this many shots");
  o_exact->excludes(o_shots);
  c_gen->add_option("--noise", gen_noise, "noise calibration JSON (implies shots, default 1000)");
  c_gen->add_option("--seed", gen_seed, "sampling seed");
  c_gen->add_option("--out", gen_out, "output CSV path")->required();

  std::string eval_ref, eval_gen, eval_out;
  int eval_bins = 100, eval_grid_bins = 50;
  std::vector<int> eval_log_dims;
  CLI::App* c_eval = app.add_subcommand("evaluate", "compare generated samples to a reference");
  c_eval->add_option("--reference", eval_ref, "reference CSV")->required();
  c_eval->add_option("--generated", eval_gen, "generated CSV")->required();
  c_eval->add_option("--bins", eval_bins, "histogram bins per dimension");
  c_eval->add_option("--log-dims", eval_log_dims, "dimensions binned log-spaced")
      ->delimiter(',');
  c_eval->add_option("--grid-bins", eval_grid_bins, "2D ratio-grid bins per axis");
  c_eval->add_option("--out", eval_out, "output metrics JSON")->required();

  std::string cmp_config, cmp_out;
  CLI::App* c_cmp = app.add_subcommand("compare", "train style and standard under one config");
  c_cmp->add_option("--config", cmp_config, "run configuration JSON")->required();
  c_cmp->add_option("--out", cmp_out, "output report JSON")->required();

  std::vector<const char*> argv;
  argv.push_back("styleqgan");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, returns 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (c_train->parsed()) return cmd_train(train_config);
    if (c_gen->parsed())
      return cmd_generate(gen_model, gen_n, gen_exact, gen_shots, gen_noise, gen_seed, gen_out);
    if (c_eval->parsed())
      return cmd_evaluate(eval_ref, eval_gen, eval_bins, eval_log_dims, eval_grid_bins, eval_out);
    if (c_cmp->parsed()) return cmd_compare(cmp_config, cmp_out);
  } catch (const TrainingDiverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_usage;  // unreachable: a subcommand is required
}

}  // namespace sqg::cli
