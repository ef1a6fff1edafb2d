// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "sqg/circuit.hpp"
#include "sqg/generator.hpp"
#include "sqg/rng.hpp"

namespace sqg {

/// Output probabilities are clamped into [kProbClamp, 1 - kProbClamp]
/// inside every log term, so losses stay finite for arbitrary inputs.
inline constexpr double kProbClamp = 1e-7;

enum class ActivationKind { leaky_relu, sigmoid };

struct DiscriminatorLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;
  ActivationKind activation = ActivationKind::leaky_relu;
  double leaky_slope = 0.2;
};

/// Fully-connected binary classifier, sigmoid-terminated. Default shape is
/// input -> 64 -> 32 -> 1 with leaky-rectifier hidden units; widths and
/// depth are configurable.
struct DiscriminatorParams {
  std::vector<DiscriminatorLayer> layers;

  int input_dim() const {
    return layers.empty() ? 0 : static_cast<int>(layers.front().weights.cols());
  }

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("DiscriminatorParams: no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const DiscriminatorLayer& l = layers[i];
      if (l.weights.rows() != l.biases.size())
        throw std::invalid_argument("DiscriminatorParams: weight/bias row mismatch");
      if (i > 0 && l.weights.cols() != layers[i - 1].weights.rows())
        throw std::invalid_argument("DiscriminatorParams: adjacent layer dimension mismatch");
    }
    if (layers.back().weights.rows() != 1)
      throw std::invalid_argument("DiscriminatorParams: final layer must have one output");
    if (layers.back().activation != ActivationKind::sigmoid)
      throw std::invalid_argument("DiscriminatorParams: final activation must be sigmoid");
  }

  static DiscriminatorParams zeros(int input_dim, const std::vector<int>& hidden = {64, 32},
                                   double leaky_slope = 0.2) {
    DiscriminatorParams p;
    int in = input_dim;
    for (int width : hidden) {
      p.layers.push_back({Eigen::MatrixXd::Zero(width, in), Eigen::VectorXd::Zero(width),
                          ActivationKind::leaky_relu, leaky_slope});
      in = width;
    }
    p.layers.push_back(
        {Eigen::MatrixXd::Zero(1, in), Eigen::VectorXd::Zero(1), ActivationKind::sigmoid, 0.0});
    p.validate();
    return p;
  }

  /// Zero biases; weights uniform in [-s, s] with s = sqrt(6/(fan_in+fan_out)).
  static DiscriminatorParams random_init(int input_dim, Rng& rng,
                                         const std::vector<int>& hidden = {64, 32},
                                         double leaky_slope = 0.2) {
    DiscriminatorParams p = zeros(input_dim, hidden, leaky_slope);
    for (DiscriminatorLayer& l : p.layers) {
      const double s = std::sqrt(6.0 / static_cast<double>(l.weights.rows() + l.weights.cols()));
      std::uniform_real_distribution<double> u(-s, s);
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = u(rng);
    }
    return p;
  }

  std::size_t n_params() const {
    std::size_t n = 0;
    for (const DiscriminatorLayer& l : layers)
      n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
    return n;
  }

  std::vector<double> to_flat() const {
    std::vector<double> f;
    f.reserve(n_params());
    for (const DiscriminatorLayer& l : layers) {
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) f.push_back(l.weights(r, c));
      for (Eigen::Index r = 0; r < l.biases.size(); ++r) f.push_back(l.biases(r));
    }
    return f;
  }

  void from_flat(const std::vector<double>& flat) {
    if (flat.size() != n_params())
      throw std::invalid_argument("DiscriminatorParams::from_flat: length mismatch");
    std::size_t i = 0;
    for (DiscriminatorLayer& l : layers) {
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = flat[i++];
      for (Eigen::Index r = 0; r < l.biases.size(); ++r) l.biases(r) = flat[i++];
    }
  }
};

namespace detail {

inline double clamp_prob(double p) {
  return p < kProbClamp ? kProbClamp : (p > 1.0 - kProbClamp ? 1.0 - kProbClamp : p);
}

inline double sigmoid(double s) {
  // split to avoid overflow of exp for large |s|
  return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

struct ForwardTrace {
  std::vector<Eigen::VectorXd> inputs;  // input of each layer; inputs[0] = x
  double logit = 0.0;
  double prob = 0.5;
};

inline ForwardTrace forward_trace(const DiscriminatorParams& d, const Eigen::VectorXd& x) {
  if (x.size() != d.layers.front().weights.cols())
    throw std::invalid_argument("discriminator forward: input dimension mismatch");
  ForwardTrace t;
  Eigen::VectorXd h = x;
  for (const DiscriminatorLayer& l : d.layers) {
    t.inputs.push_back(h);
    Eigen::VectorXd pre = l.weights * h + l.biases;
    if (l.activation == ActivationKind::leaky_relu) {
      h = pre.unaryExpr([&](double v) { return v >= 0 ? v : l.leaky_slope * v; });
    } else {
      t.logit = pre(0);
      t.prob = sigmoid(t.logit);
      h = pre;  // kept pre-sigmoid; only the scalar logit is consumed
    }
  }
  return t;
}

/// Back-propagates d(loss)/d(logit) into flat parameter gradients
/// (accumulated into grad) and, optionally, the gradient w.r.t. the input.
inline void backprop(const DiscriminatorParams& d, const ForwardTrace& t, double dlogit,
                     std::vector<double>* grad, Eigen::VectorXd* input_grad) {
  Eigen::VectorXd delta(1);
  delta(0) = dlogit;
  // per-layer flat offsets
  std::vector<std::size_t> offsets(d.layers.size());
  std::size_t off = 0;
  for (std::size_t i = 0; i < d.layers.size(); ++i) {
    offsets[i] = off;
    off += static_cast<std::size_t>(d.layers[i].weights.size() + d.layers[i].biases.size());
  }
  for (int li = static_cast<int>(d.layers.size()) - 1; li >= 0; --li) {
    const DiscriminatorLayer& l = d.layers[static_cast<std::size_t>(li)];
    const Eigen::VectorXd& in = t.inputs[static_cast<std::size_t>(li)];
    if (grad) {
      std::size_t i = offsets[static_cast<std::size_t>(li)];
      for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weights.cols(); ++c) (*grad)[i++] += delta(r) * in(c);
      for (Eigen::Index r = 0; r < l.biases.size(); ++r) (*grad)[i++] += delta(r);
    }
    if (li == 0 && input_grad == nullptr) break;
    Eigen::VectorXd prev = l.weights.transpose() * delta;
    if (li > 0) {
      const DiscriminatorLayer& below = d.layers[static_cast<std::size_t>(li - 1)];
      const Eigen::VectorXd& below_in = t.inputs[static_cast<std::size_t>(li - 1)];
      Eigen::VectorXd pre = below.weights * below_in + below.biases;
      for (Eigen::Index r = 0; r < prev.size(); ++r)
        if (pre(r) < 0) prev(r) *= below.leaky_slope;
    }
    delta = std::move(prev);
    if (li == 0 && input_grad) *input_grad = delta;
  }
}

inline Eigen::VectorXd to_vec(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

}  // namespace detail

/// D(x): probability that x is real, clamped away from exact 0/1.
inline double discriminator_forward(const DiscriminatorParams& d, const std::vector<double>& x) {
  return detail::clamp_prob(detail::forward_trace(d, detail::to_vec(x)).prob);
}

using Batch = std::vector<std::vector<double>>;

/// Discriminator objective (to be maximized):
///   mean log D(real) + mean log(1 - D(fake)).
inline double loss_discriminator(const DiscriminatorParams& d, const Batch& real_batch,
                                 const Batch& fake_batch) {
  if (real_batch.empty() || fake_batch.empty())
    throw std::invalid_argument("loss_discriminator: empty batch");
  double lr = 0, lf = 0;
  for (const auto& x : real_batch) lr += std::log(discriminator_forward(d, x));
  for (const auto& x : fake_batch) lf += std::log(1.0 - discriminator_forward(d, x));
  return lr / static_cast<double>(real_batch.size()) + lf / static_cast<double>(fake_batch.size());
}

/// Generator objective (to be minimized): -mean log D(fake).
inline double loss_generator(const DiscriminatorParams& d, const Batch& fake_batch) {
  if (fake_batch.empty()) throw std::invalid_argument("loss_generator: empty batch");
  double l = 0;
  for (const auto& x : fake_batch) l += std::log(discriminator_forward(d, x));
  return -l / static_cast<double>(fake_batch.size());
}

/// Gradient of -loss_discriminator w.r.t. the flat discriminator parameters
/// (the quantity a minimizer descends on). Computed through the logits, so
/// it is finite even where the probability clamp is active.
inline std::vector<double> grads_discriminator(const DiscriminatorParams& d,
                                               const Batch& real_batch, const Batch& fake_batch) {
  if (real_batch.empty() || fake_batch.empty())
    throw std::invalid_argument("grads_discriminator: empty batch");
  std::vector<double> grad(d.n_params(), 0.0);
  const double nr = static_cast<double>(real_batch.size());
  const double nf = static_cast<double>(fake_batch.size());
  for (const auto& x : real_batch) {
    const auto t = detail::forward_trace(d, detail::to_vec(x));
    // d(-log D)/dlogit = p - 1
    detail::backprop(d, t, (t.prob - 1.0) / nr, &grad, nullptr);
  }
  for (const auto& x : fake_batch) {
    const auto t = detail::forward_trace(d, detail::to_vec(x));
    // d(-log(1-D))/dlogit = p
    detail::backprop(d, t, t.prob / nf, &grad, nullptr);
  }
  return grad;
}

/// Gradient of loss_generator w.r.t. the flat style parameters, chaining
/// the discriminator's input gradient through the exact circuit Jacobian of
/// x = -<s_z>.
inline std::vector<double> grad_generator_params(const DiscriminatorParams& d,
                                                 const CircuitLayout& layout,
                                                 const GeneratorParams& params_g,
                                                 const std::vector<LatentVector>& latent_batch) {
  if (latent_batch.empty()) throw std::invalid_argument("grad_generator_params: empty batch");
  std::vector<double> grad(static_cast<std::size_t>(layout.parameter_count()), 0.0);
  const double nb = static_cast<double>(latent_batch.size());
  for (const LatentVector& z : latent_batch) {
    const std::vector<double> x = generate_sample(layout, params_g, z, ExactBackend{});
    const auto t = detail::forward_trace(d, detail::to_vec(x));
    Eigen::VectorXd dlogit_dx;
    detail::backprop(d, t, 1.0, nullptr, &dlogit_dx);
    // d(-log D)/dx = (p - 1) * dlogit/dx; dx/dparam = -jacobian
    const Eigen::VectorXd dl_dx = (t.prob - 1.0) / nb * dlogit_dx;
    const Eigen::MatrixXd jac = jacobian(layout, params_g, z);
    const Eigen::VectorXd contrib = -jac.transpose() * dl_dx;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += contrib(static_cast<Eigen::Index>(i));
  }
  return grad;
}

/// Baseline counterpart of grad_generator_params for the standard circuit.
inline std::vector<double> standard_grad_generator_params(
    const DiscriminatorParams& d, const CircuitLayout& layout, const std::vector<double>& phi,
    const std::vector<LatentVector>& latent_batch) {
  if (latent_batch.empty())
    throw std::invalid_argument("standard_grad_generator_params: empty batch");
  std::vector<double> grad(phi.size(), 0.0);
  const double nb = static_cast<double>(latent_batch.size());
  for (const LatentVector& z : latent_batch) {
    const std::vector<double> x = standard_generate_sample(layout, phi, z, ExactBackend{});
    const auto t = detail::forward_trace(d, detail::to_vec(x));
    Eigen::VectorXd dlogit_dx;
    detail::backprop(d, t, 1.0, nullptr, &dlogit_dx);
    const Eigen::VectorXd dl_dx = (t.prob - 1.0) / nb * dlogit_dx;
    const Eigen::MatrixXd jac = standard_jacobian(layout, phi, z);
    const Eigen::VectorXd contrib = -jac.transpose() * dl_dx;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += contrib(static_cast<Eigen::Index>(i));
  }
  return grad;
}

}  // namespace sqg
