// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqg/circuit.hpp"
#include "sqg/data.hpp"
#include "sqg/discriminator.hpp"
#include "sqg/noise.hpp"
#include "sqg/training.hpp"

namespace sqg {

using nlohmann::json;

namespace detail {

/// Strict-schema guard: any key outside `allowed` is an error, naming the
/// context and the offending key.
inline void check_keys(const json& j, const std::string& ctx,
                       const std::vector<std::string>& allowed) {
  if (!j.is_object()) throw std::invalid_argument(ctx + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw std::invalid_argument(ctx + ": unknown key '" + key + "'");
  }
}

template <typename T>
T require(const json& j, const std::string& ctx, const std::string& key) {
  if (!j.contains(key)) throw std::invalid_argument(ctx + ": missing required key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(ctx + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const std::string& ctx, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(ctx + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Layout / params / discriminator / preprocessor <-> JSON
// ---------------------------------------------------------------------------

inline json layout_to_json(const CircuitLayout& l) {
  json j = {{"n_qubits", l.n_qubits},
            {"n_layers", l.n_layers},
            {"d_latent", l.d_latent},
            {"entanglers", json::array()}};
  for (const auto& [c, t] : l.entangler) j["entanglers"].push_back({c, t});
  if (l.encoder_slots > 0) j["encoder_slots"] = l.encoder_slots;
  if (!l.latent_schedule.empty()) j["latent_schedule"] = l.latent_schedule;
  return j;
}

inline CircuitLayout layout_from_json(const json& j, const std::string& ctx = "layout") {
  detail::check_keys(j, ctx,
                     {"n_qubits", "n_layers", "d_latent", "entanglers", "encoder_slots",
                      "latent_schedule"});
  CircuitLayout l;
  l.n_qubits = detail::require<int>(j, ctx, "n_qubits");
  l.n_layers = detail::require<int>(j, ctx, "n_layers");
  l.d_latent = detail::require<int>(j, ctx, "d_latent");
  for (const auto& pair : detail::get_or<json>(j, ctx, "entanglers", json::array())) {
    if (!pair.is_array() || pair.size() != 2)
      throw std::invalid_argument(ctx + ": entanglers must be [control, target] pairs");
    l.entangler.emplace_back(pair[0].get<int>(), pair[1].get<int>());
  }
  l.encoder_slots = detail::get_or<int>(j, ctx, "encoder_slots", 0);
  l.latent_schedule = detail::get_or<std::vector<int>>(j, ctx, "latent_schedule", {});
  l.validate();
  return l;
}

inline json discriminator_to_json(const DiscriminatorParams& d) {
  json layers = json::array();
  for (const DiscriminatorLayer& l : d.layers) {
    json w = json::array();
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row.push_back(l.weights(r, c));
      w.push_back(std::move(row));
    }
    json b = json::array();
    for (Eigen::Index r = 0; r < l.biases.size(); ++r) b.push_back(l.biases(r));
    layers.push_back(
        {{"weights", std::move(w)},
         {"biases", std::move(b)},
         {"activation", l.activation == ActivationKind::sigmoid ? "sigmoid" : "leaky_relu"},
         {"leaky_slope", l.leaky_slope}});
  }
  return {{"layers", std::move(layers)}};
}

inline DiscriminatorParams discriminator_from_json(const json& j,
                                                   const std::string& ctx = "discriminator") {
  detail::check_keys(j, ctx, {"layers"});
  DiscriminatorParams d;
  for (const json& lj : detail::require<json>(j, ctx, "layers")) {
    detail::check_keys(lj, ctx + ".layers[]", {"weights", "biases", "activation", "leaky_slope"});
    DiscriminatorLayer l;
    const json& w = detail::require<json>(lj, ctx, "weights");
    const json& b = detail::require<json>(lj, ctx, "biases");
    const auto rows = static_cast<Eigen::Index>(w.size());
    if (rows == 0) throw std::invalid_argument(ctx + ": empty weight matrix");
    const auto cols = static_cast<Eigen::Index>(w[0].size());
    l.weights.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (static_cast<Eigen::Index>(w[static_cast<std::size_t>(r)].size()) != cols)
        throw std::invalid_argument(ctx + ": ragged weight matrix");
      for (Eigen::Index c = 0; c < cols; ++c)
        l.weights(r, c) = w[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
    l.biases.resize(static_cast<Eigen::Index>(b.size()));
    for (Eigen::Index r = 0; r < l.biases.size(); ++r)
      l.biases(r) = b[static_cast<std::size_t>(r)].get<double>();
    const std::string act = detail::require<std::string>(lj, ctx, "activation");
    if (act == "sigmoid")
      l.activation = ActivationKind::sigmoid;
    else if (act == "leaky_relu")
      l.activation = ActivationKind::leaky_relu;
    else
      throw std::invalid_argument(ctx + ": unknown activation '" + act + "'");
    l.leaky_slope = detail::get_or<double>(lj, ctx, "leaky_slope", 0.2);
    d.layers.push_back(std::move(l));
  }
  d.validate();
  return d;
}

inline json preprocessor_to_json(const Preprocessor& p) {
  json j = {{"kind", p.kind == PreprocessKind::minmax ? "minmax" : "power_minmax"},
            {"dim", p.dim},
            {"lo", p.lo},
            {"hi", p.hi}};
  if (p.kind == PreprocessKind::power_minmax) {
    j["lambda"] = p.lambda;
    j["mean"] = p.mean;
    j["stddev"] = p.stddev;
  }
  return j;
}

inline Preprocessor preprocessor_from_json(const json& j,
                                           const std::string& ctx = "preprocessor") {
  detail::check_keys(j, ctx, {"kind", "dim", "lo", "hi", "lambda", "mean", "stddev"});
  Preprocessor p;
  const std::string kind = detail::require<std::string>(j, ctx, "kind");
  if (kind == "minmax")
    p.kind = PreprocessKind::minmax;
  else if (kind == "power_minmax")
    p.kind = PreprocessKind::power_minmax;
  else
    throw std::invalid_argument(ctx + ": unknown kind '" + kind + "'");
  p.dim = detail::require<int>(j, ctx, "dim");
  p.lo = detail::require<std::vector<double>>(j, ctx, "lo");
  p.hi = detail::require<std::vector<double>>(j, ctx, "hi");
  if (p.kind == PreprocessKind::power_minmax) {
    p.lambda = detail::require<std::vector<double>>(j, ctx, "lambda");
    p.mean = detail::require<std::vector<double>>(j, ctx, "mean");
    p.stddev = detail::require<std::vector<double>>(j, ctx, "stddev");
  }
  const auto dim_u = static_cast<std::size_t>(p.dim);
  if (p.lo.size() != dim_u || p.hi.size() != dim_u ||
      (p.kind == PreprocessKind::power_minmax &&
       (p.lambda.size() != dim_u || p.mean.size() != dim_u || p.stddev.size() != dim_u)))
    throw std::invalid_argument(ctx + ": per-dimension array length mismatch");
  return p;
}

inline json training_config_to_json(const TrainingConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr_discriminator", c.lr_discriminator},
          {"lr_generator", c.lr_generator},
          {"k_discriminator", c.k_discriminator},
          {"discriminator_hidden", c.discriminator_hidden},
          {"checkpoint_every", c.checkpoint_every},
          {"log_every", c.log_every}};
}

inline TrainingConfig training_config_from_json(const json& j, const CircuitLayout& layout,
                                                const std::string& ctx = "training") {
  detail::check_keys(j, ctx,
                     {"epochs", "batch_size", "lr_discriminator", "lr_generator",
                      "k_discriminator", "discriminator_hidden", "checkpoint_every",
                      "log_every"});
  TrainingConfig c;
  c.layout = layout;
  c.epochs = detail::require<int>(j, ctx, "epochs");
  c.batch_size = detail::get_or<int>(j, ctx, "batch_size", 128);
  c.lr_discriminator = detail::get_or<double>(j, ctx, "lr_discriminator", 0.1);
  c.lr_generator = detail::get_or<double>(j, ctx, "lr_generator", 0.5);
  c.k_discriminator = detail::get_or<int>(j, ctx, "k_discriminator", 1);
  c.discriminator_hidden =
      detail::get_or<std::vector<int>>(j, ctx, "discriminator_hidden", {64, 32});
  c.checkpoint_every = detail::get_or<int>(j, ctx, "checkpoint_every", 0);
  c.log_every = detail::get_or<int>(j, ctx, "log_every", 1);
  return c;
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

/// Everything needed to regenerate samples with no external state: circuit
/// layout and parameters, the preprocessor for the inverse transform, the
/// discriminator, and the training provenance.
struct ModelFile {
  int format_version = 1;
  std::string architecture = "style";  // "style" | "standard"
  CircuitLayout layout;
  std::vector<double> generator_params;  // style: (w,b) flat; standard: phi
  DiscriminatorParams discriminator;
  std::optional<Preprocessor> preprocessor;
  TrainingConfig config;
  std::uint64_t seed = 0;
  double final_loss_generator = 0;
  double final_loss_discriminator = 0;
};

inline json model_to_json(const ModelFile& m) {
  json j = {{"format_version", m.format_version},
            {"architecture", m.architecture},
            {"layout", layout_to_json(m.layout)},
            {"generator_params", m.generator_params},
            {"discriminator", discriminator_to_json(m.discriminator)},
            {"training", training_config_to_json(m.config)},
            {"seed", m.seed},
            {"final_loss_generator", m.final_loss_generator},
            {"final_loss_discriminator", m.final_loss_discriminator}};
  if (m.preprocessor) j["preprocessor"] = preprocessor_to_json(*m.preprocessor);
  return j;
}

inline ModelFile model_from_json(const json& j) {
  const std::string ctx = "model";
  detail::check_keys(j, ctx,
                     {"format_version", "architecture", "layout", "generator_params",
                      "discriminator", "preprocessor", "training", "seed",
                      "final_loss_generator", "final_loss_discriminator"});
  ModelFile m;
  m.format_version = detail::require<int>(j, ctx, "format_version");
  if (m.format_version != 1)
    throw std::invalid_argument("model: unsupported format_version " +
                               std::to_string(m.format_version));
  m.architecture = detail::require<std::string>(j, ctx, "architecture");
  if (m.architecture != "style" && m.architecture != "standard")
    throw std::invalid_argument("model: unknown architecture '" + m.architecture + "'");
  m.layout = layout_from_json(detail::require<json>(j, ctx, "layout"));
  m.generator_params = detail::require<std::vector<double>>(j, ctx, "generator_params");
  const std::size_t expect =
      m.architecture == "style" ? static_cast<std::size_t>(m.layout.parameter_count())
                                : static_cast<std::size_t>(m.layout.layered_gate_count());
  if (m.generator_params.size() != expect)
    throw std::invalid_argument("model: generator_params length mismatch");
  m.discriminator = discriminator_from_json(detail::require<json>(j, ctx, "discriminator"));
  if (j.contains("preprocessor")) m.preprocessor = preprocessor_from_json(j.at("preprocessor"));
  m.config = training_config_from_json(detail::require<json>(j, ctx, "training"), m.layout);
  m.seed = detail::require<std::uint64_t>(j, ctx, "seed");
  m.final_loss_generator = detail::get_or<double>(j, ctx, "final_loss_generator", 0.0);
  m.final_loss_discriminator = detail::get_or<double>(j, ctx, "final_loss_discriminator", 0.0);
  return m;
}

inline void save_model(const std::string& path, const ModelFile& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_model: cannot open " + path);
  f << model_to_json(m).dump(2) << '\n';
  if (!f) throw std::runtime_error("save_model: write failed for " + path);
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_model: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_model: " + path + ": " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Noise calibration file
// ---------------------------------------------------------------------------

inline json noise_to_json(const NoiseModel& m) {
  json qubits = json::array();
  for (const QubitCalibration& q : m.qubits)
    qubits.push_back(
        {{"p10", q.p_read1_given0}, {"p01", q.p_read0_given1}, {"t1_s", q.t1_s}, {"t2_s", q.t2_s}});
  json gates = json::array();
  for (const GateCalibration& g : m.gates) {
    json gj = {{"kind", to_string(g.kind)},
               {"error_prob", g.error_prob},
               {"duration_s", g.duration_s}};
    if (!g.qubits.empty()) gj["qubits"] = g.qubits;
    gates.push_back(std::move(gj));
  }
  return {{"qubits", std::move(qubits)},
          {"gates", std::move(gates)},
          {"idle_relaxation", m.idle_relaxation}};
}

inline NoiseModel noise_from_json(const json& j) {
  const std::string ctx = "noise";
  detail::check_keys(j, ctx, {"qubits", "gates", "idle_relaxation"});
  NoiseModel m;
  for (const json& qj : detail::get_or<json>(j, ctx, "qubits", json::array())) {
    detail::check_keys(qj, ctx + ".qubits[]", {"p10", "p01", "t1_s", "t2_s"});
    QubitCalibration q;
    q.p_read1_given0 = detail::get_or<double>(qj, ctx, "p10", 0.0);
    q.p_read0_given1 = detail::get_or<double>(qj, ctx, "p01", 0.0);
    q.t1_s = detail::get_or<double>(qj, ctx, "t1_s", q.t1_s);
    q.t2_s = detail::get_or<double>(qj, ctx, "t2_s", q.t2_s);
    m.qubits.push_back(q);
  }
  for (const json& gj : detail::get_or<json>(j, ctx, "gates", json::array())) {
    detail::check_keys(gj, ctx + ".gates[]", {"kind", "qubits", "error_prob", "duration_s"});
    GateCalibration g;
    const std::string kind = detail::require<std::string>(gj, ctx, "kind");
    if (kind == "RY")
      g.kind = GateKind::RY;
    else if (kind == "RZ")
      g.kind = GateKind::RZ;
    else if (kind == "CRY")
      g.kind = GateKind::CRY;
    else
      throw std::invalid_argument(ctx + ": unknown gate kind '" + kind + "'");
    g.qubits = detail::get_or<std::vector<int>>(gj, ctx, "qubits", {});
    g.error_prob = detail::get_or<double>(gj, ctx, "error_prob", 0.0);
    g.duration_s = detail::get_or<double>(gj, ctx, "duration_s", 0.0);
    m.gates.push_back(std::move(g));
  }
  m.idle_relaxation = detail::get_or<bool>(j, ctx, "idle_relaxation", true);
  m.validate();
  return m;
}

inline NoiseModel load_noise_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_noise_model: cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_noise_model: " + path + ": " + e.what());
  }
  return noise_from_json(j);
}

// ---------------------------------------------------------------------------
// Training log CSV
// ---------------------------------------------------------------------------

inline void save_training_log_csv(const std::string& path, const TrainingLog& log) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_training_log_csv: cannot open " + path);
  f << "# k_discriminator=" << log.k_discriminator
    << " fresh_generator_latents=" << (log.fresh_generator_latents ? 1 : 0)
    << " backend=" << log.backend << '\n';
  f << "epoch,loss_generator,loss_discriminator,wall_time_s\n";
  for (const TrainingRecord& r : log.records)
    f << r.epoch << ',' << format_double(r.loss_generator) << ','
      << format_double(r.loss_discriminator) << ',' << format_double(r.wall_time_s) << '\n';
  if (!f) throw std::runtime_error("save_training_log_csv: write failed for " + path);
}

}  // namespace sqg
