// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqg/adadelta.hpp"
#include "sqg/circuit.hpp"
#include "sqg/data.hpp"
#include "sqg/discriminator.hpp"
#include "sqg/generator.hpp"
#include "sqg/rng.hpp"

namespace sqg {

struct TrainingConfig {
  int epochs = 0;             // one epoch = one discriminator/generator update pair
  int batch_size = 128;
  double lr_discriminator = 0.1;
  double lr_generator = 0.5;
  CircuitLayout layout;       // carries n_qubits, n_layers, d_latent, entanglers
  std::uint64_t seed = 0;
  int checkpoint_every = 0;   // 0 disables checkpoint callbacks
  int log_every = 1;
  int k_discriminator = 1;    // discriminator updates per generator update
  std::vector<int> discriminator_hidden = {64, 32};

  void validate() const {
    layout.validate();
    if (epochs < 0) throw std::invalid_argument("TrainingConfig: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("TrainingConfig: batch_size must be >= 1");
    if (!(lr_discriminator > 0) || !(lr_generator > 0))
      throw std::invalid_argument("TrainingConfig: learning rates must be > 0");
    if (checkpoint_every < 0 || log_every < 1)
      throw std::invalid_argument("TrainingConfig: bad checkpoint/log cadence");
    if (k_discriminator < 1)
      throw std::invalid_argument("TrainingConfig: k_discriminator must be >= 1");
    for (int w : discriminator_hidden)
      if (w < 1) throw std::invalid_argument("TrainingConfig: bad hidden width");
  }
};

struct TrainingRecord {
  int epoch = 0;
  double loss_generator = 0;      // -E[log D(fake)], minimized
  double loss_discriminator = 0;  // E[log D(real)] + E[log(1 - D(fake))], maximized
  double wall_time_s = 0;         // cumulative since training start
};

/// Loss history plus a header recording the loop conventions that the
/// config leaves implicit (update ratio, latent reuse policy, backend).
struct TrainingLog {
  int k_discriminator = 1;
  bool fresh_generator_latents = true;
  std::string backend = "exact";
  std::vector<TrainingRecord> records;
};

struct TrainingResult {
  GeneratorParams generator;
  DiscriminatorParams discriminator;
  TrainingLog log;
};

/// Thrown when a loss or gradient turns non-finite; carries the epoch.
struct TrainingDiverged : std::runtime_error {
  int epoch;
  explicit TrainingDiverged(int ep, const std::string& what)
      : std::runtime_error("training diverged at epoch " + std::to_string(ep) + ": " + what),
        epoch(ep) {}
};

enum class StepPhase { discriminator_update, generator_update };

/// Called after every optimizer-state update; lets tests verify the
/// discriminator-then-generator alternation.
using TrainingObserver = std::function<void(int epoch, StepPhase phase)>;

/// Called every checkpoint_every epochs with the current parameters.
using CheckpointSink =
    std::function<void(int epoch, const GeneratorParams&, const DiscriminatorParams&)>;

namespace detail {

/// Without-replacement minibatch cursor: shuffles a full pass of indices and
/// reshuffles whenever fewer than one batch remains.
class BatchCursor {
 public:
  BatchCursor(std::size_t n, std::size_t batch, Rng& rng) : batch_(batch), rng_(rng) {
    if (n < batch) throw std::invalid_argument("BatchCursor: fewer samples than batch size");
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    reshuffle();
  }

  std::vector<std::size_t> next() {
    if (pos_ + batch_ > order_.size()) reshuffle();
    std::vector<std::size_t> idx(order_.begin() + static_cast<long>(pos_),
                                 order_.begin() + static_cast<long>(pos_ + batch_));
    pos_ += batch_;
    return idx;
  }

 private:
  void reshuffle() {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t pos_ = 0;
  Rng& rng_;
};

inline std::vector<LatentVector> draw_latent_batch(int batch, int d_latent, Rng& rng) {
  std::vector<LatentVector> zs;
  zs.reserve(static_cast<std::size_t>(batch));
  for (int i = 0; i < batch; ++i) zs.push_back(sample_latent(d_latent, rng));
  return zs;
}

inline Batch fakes_from_latents(const CircuitLayout& layout, const GeneratorParams& params,
                                const std::vector<LatentVector>& zs) {
  Batch fakes;
  fakes.reserve(zs.size());
  for (const LatentVector& z : zs) fakes.push_back(generate_sample(layout, params, z));
  return fakes;
}

inline void check_finite(double v, int epoch, const char* what) {
  if (!std::isfinite(v)) throw TrainingDiverged(epoch, what);
}

}  // namespace detail

/// Adversarial loop: per epoch, k discriminator ascent steps on the Eq.-style
/// discriminator objective (implemented as descent on its negation), then one
/// generator descent step, both with ADADELTA. real_samples must already live
/// in [-1, 1]^n_qubits; training always uses the exact expectation backend.
/// Deterministic for a fixed config (all randomness flows from config.seed).
inline TrainingResult train(const TrainingConfig& config, const SampleSet& real_samples,
                            const TrainingObserver& observer = nullptr,
                            const CheckpointSink& checkpoint = nullptr) {
  config.validate();
  real_samples.validate();
  if (real_samples.dim != config.layout.n_qubits)
    throw std::invalid_argument("train: sample dim must equal n_qubits");
  if (real_samples.rows.size() < static_cast<std::size_t>(config.batch_size))
    throw std::invalid_argument("train: need at least batch_size real samples");

  Rng rng_init_d = make_stream(config.seed, Stream::init_discriminator);
  Rng rng_init_g = make_stream(config.seed, Stream::init_generator);
  Rng rng_latent = make_stream(config.seed, Stream::latent_training);
  Rng rng_shuffle = make_stream(config.seed, Stream::shuffle);

  TrainingResult out;
  out.discriminator = DiscriminatorParams::random_init(config.layout.n_qubits, rng_init_d,
                                                       config.discriminator_hidden);
  out.generator = GeneratorParams::random_init(config.layout, rng_init_g);
  out.log.k_discriminator = config.k_discriminator;
  out.log.fresh_generator_latents = true;
  out.log.backend = "exact";

  AdadeltaState opt_d =
      AdadeltaState::make(out.discriminator.n_params(), config.lr_discriminator);
  AdadeltaState opt_g = AdadeltaState::make(
      static_cast<std::size_t>(config.layout.parameter_count()), config.lr_generator);

  detail::BatchCursor cursor(real_samples.rows.size(),
                             static_cast<std::size_t>(config.batch_size), rng_shuffle);
  const auto t0 = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_d = 0;
    for (int k = 0; k < config.k_discriminator; ++k) {
      Batch real_batch;
      real_batch.reserve(static_cast<std::size_t>(config.batch_size));
      for (std::size_t i : cursor.next()) real_batch.push_back(real_samples.rows[i]);

      const auto zs =
          detail::draw_latent_batch(config.batch_size, config.layout.d_latent, rng_latent);
      const Batch fakes = detail::fakes_from_latents(config.layout, out.generator, zs);

      loss_d = loss_discriminator(out.discriminator, real_batch, fakes);
      detail::check_finite(loss_d, epoch, "discriminator loss");
      const std::vector<double> gd = grads_discriminator(out.discriminator, real_batch, fakes);
      for (double g : gd) detail::check_finite(g, epoch, "discriminator gradient");

      std::vector<double> flat = out.discriminator.to_flat();
      auto [next_flat, next_state] = adadelta_step(opt_d, flat, gd);
      opt_d = std::move(next_state);
      out.discriminator.from_flat(next_flat);
      if (observer) observer(epoch, StepPhase::discriminator_update);
    }

    const auto zs_g =
        detail::draw_latent_batch(config.batch_size, config.layout.d_latent, rng_latent);
    const Batch fakes_g = detail::fakes_from_latents(config.layout, out.generator, zs_g);
    const double loss_g = loss_generator(out.discriminator, fakes_g);
    detail::check_finite(loss_g, epoch, "generator loss");
    const std::vector<double> gg =
        grad_generator_params(out.discriminator, config.layout, out.generator, zs_g);
    for (double g : gg) detail::check_finite(g, epoch, "generator gradient");

    std::vector<double> flat_g = out.generator.to_flat();
    auto [next_flat_g, next_state_g] = adadelta_step(opt_g, flat_g, gg);
    opt_g = std::move(next_state_g);
    out.generator = GeneratorParams::from_flat(next_flat_g);
    if (observer) observer(epoch, StepPhase::generator_update);

    if (epoch % config.log_every == 0 || epoch == config.epochs - 1) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.log.records.push_back({epoch, loss_g, loss_d, secs});
    }
    if (checkpoint && config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0)
      checkpoint(epoch, out.generator, out.discriminator);
  }
  return out;
}

struct StandardTrainingResult {
  std::vector<double> phi;  // one angle per layered gate
  DiscriminatorParams discriminator;
  TrainingLog log;
};

/// Same loop as train(), but for the standard baseline circuit whose latent
/// enters only through the fixed input encoder. Uses the identical seed
/// streams so style/standard comparisons are matched draw-for-draw.
inline StandardTrainingResult train_standard(const TrainingConfig& config,
                                             const SampleSet& real_samples,
                                             const TrainingObserver& observer = nullptr) {
  config.validate();
  real_samples.validate();
  if (real_samples.dim != config.layout.n_qubits)
    throw std::invalid_argument("train_standard: sample dim must equal n_qubits");
  if (real_samples.rows.size() < static_cast<std::size_t>(config.batch_size))
    throw std::invalid_argument("train_standard: need at least batch_size real samples");

  Rng rng_init_d = make_stream(config.seed, Stream::init_discriminator);
  Rng rng_init_g = make_stream(config.seed, Stream::init_generator);
  Rng rng_latent = make_stream(config.seed, Stream::latent_training);
  Rng rng_shuffle = make_stream(config.seed, Stream::shuffle);

  StandardTrainingResult out;
  out.discriminator = DiscriminatorParams::random_init(config.layout.n_qubits, rng_init_d,
                                                       config.discriminator_hidden);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  out.phi.resize(static_cast<std::size_t>(config.layout.layered_gate_count()));
  for (double& v : out.phi) v = u(rng_init_g);
  out.log.k_discriminator = config.k_discriminator;
  out.log.backend = "exact";

  AdadeltaState opt_d =
      AdadeltaState::make(out.discriminator.n_params(), config.lr_discriminator);
  AdadeltaState opt_g = AdadeltaState::make(out.phi.size(), config.lr_generator);

  detail::BatchCursor cursor(real_samples.rows.size(),
                             static_cast<std::size_t>(config.batch_size), rng_shuffle);
  const auto t0 = std::chrono::steady_clock::now();

  const auto fakes_from = [&](const std::vector<LatentVector>& zs) {
    Batch fakes;
    fakes.reserve(zs.size());
    for (const LatentVector& z : zs)
      fakes.push_back(standard_generate_sample(config.layout, out.phi, z));
    return fakes;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_d = 0;
    for (int k = 0; k < config.k_discriminator; ++k) {
      Batch real_batch;
      real_batch.reserve(static_cast<std::size_t>(config.batch_size));
      for (std::size_t i : cursor.next()) real_batch.push_back(real_samples.rows[i]);

      const auto zs =
          detail::draw_latent_batch(config.batch_size, config.layout.d_latent, rng_latent);
      const Batch fakes = fakes_from(zs);

      loss_d = loss_discriminator(out.discriminator, real_batch, fakes);
      detail::check_finite(loss_d, epoch, "discriminator loss");
      const std::vector<double> gd = grads_discriminator(out.discriminator, real_batch, fakes);

      std::vector<double> flat = out.discriminator.to_flat();
      auto [next_flat, next_state] = adadelta_step(opt_d, flat, gd);
      opt_d = std::move(next_state);
      out.discriminator.from_flat(next_flat);
      if (observer) observer(epoch, StepPhase::discriminator_update);
    }

    const auto zs_g =
        detail::draw_latent_batch(config.batch_size, config.layout.d_latent, rng_latent);
    const Batch fakes_g = fakes_from(zs_g);
    const double loss_g = loss_generator(out.discriminator, fakes_g);
    detail::check_finite(loss_g, epoch, "generator loss");
    const std::vector<double> gg =
        standard_grad_generator_params(out.discriminator, config.layout, out.phi, zs_g);
    for (double g : gg) detail::check_finite(g, epoch, "generator gradient");

    auto [next_phi, next_state_g] = adadelta_step(opt_g, out.phi, gg);
    opt_g = std::move(next_state_g);
    out.phi = std::move(next_phi);
    if (observer) observer(epoch, StepPhase::generator_update);

    if (epoch % config.log_every == 0 || epoch == config.epochs - 1) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.log.records.push_back({epoch, loss_g, loss_d, secs});
    }
  }
  return out;
}

/// Generates n_samples from the trained circuit (latents drawn from rng) and
/// optionally inverse-transforms them back into data space.
inline SampleSet evaluate_checkpoint(const CircuitLayout& layout, const GeneratorParams& params,
                                     std::size_t n_samples, const Backend& backend,
                                     const std::optional<Preprocessor>& postprocess, Rng& rng) {
  layout.validate();
  SampleSet s;
  s.dim = layout.n_qubits;
  s.space = "transformed";
  s.rows.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const LatentVector z = sample_latent(layout.d_latent, rng);
    s.rows.push_back(generate_sample(layout, params, z, backend));
  }
  if (postprocess) {
    if (postprocess->dim != s.dim)
      throw std::invalid_argument("evaluate_checkpoint: preprocessor dim mismatch");
    s = postprocess->inverse_transform(s);
  }
  return s;
}

}  // namespace sqg
