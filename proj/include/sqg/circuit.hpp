// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sqg/rng.hpp"
#include "sqg/state.hpp"

namespace sqg {

/// A sample of the standard-normal latent prior.
using LatentVector = std::vector<double>;

/// Architecture descriptor for the layered generator circuit.
///
/// Structure, in construction order:
///   1. `encoder_slots` RY gates (slot j on qubit j mod n_qubits). Zero for
///      the style architecture; the standard-baseline architecture and its
///      style embedding use d_latent slots.
///   2. Per layer: RY,RZ,RY,RZ on each qubit, then the entangling CRY pairs.
///   3. A final RY on each qubit.
///
/// Latent assignment: gate g reads component latent_index(g); by default the
/// index cycles 0,1,...,d_latent-1 over gates in construction order. An
/// explicit per-gate schedule can be supplied instead.
struct CircuitLayout {
  int n_qubits = 1;
  int n_layers = 1;
  int d_latent = 1;
  std::vector<std::pair<int, int>> entangler;  // (control, target) CRY pairs per layer
  int encoder_slots = 0;
  std::vector<int> latent_schedule;  // empty = round-robin

  void validate() const {
    if (n_qubits < 1 || n_qubits > 3)
      throw std::invalid_argument("CircuitLayout: n_qubits must be in [1,3]");
    if (n_layers < 1) throw std::invalid_argument("CircuitLayout: n_layers must be >= 1");
    if (d_latent < 1) throw std::invalid_argument("CircuitLayout: d_latent must be >= 1");
    if (encoder_slots < 0) throw std::invalid_argument("CircuitLayout: encoder_slots must be >= 0");
    for (const auto& [c, t] : entangler) {
      if (c < 0 || c >= n_qubits || t < 0 || t >= n_qubits)
        throw std::invalid_argument("CircuitLayout: entangler qubit out of range");
      if (c == t) throw std::invalid_argument("CircuitLayout: entangler control == target");
    }
    if (!latent_schedule.empty()) {
      if (static_cast<int>(latent_schedule.size()) != gate_count())
        throw std::invalid_argument("CircuitLayout: latent_schedule length != gate count");
      for (int m : latent_schedule)
        if (m < 0 || m >= d_latent)
          throw std::invalid_argument("CircuitLayout: latent_schedule index out of range");
    }
  }

  int layered_gate_count() const {
    return (4 * n_qubits + static_cast<int>(entangler.size())) * n_layers + n_qubits;
  }
  int gate_count() const { return encoder_slots + layered_gate_count(); }

  /// Trainable parameter count of the style architecture: one (weight, bias)
  /// pair per gate.
  int parameter_count() const { return 2 * gate_count(); }

  int latent_index(int gate) const {
    return latent_schedule.empty() ? gate % d_latent : latent_schedule[gate];
  }

  /// Layout of the style circuit that contains the standard baseline: the
  /// same layered body with a d_latent-slot encoder prefix.
  CircuitLayout with_encoder_prefix() const {
    CircuitLayout ext = *this;
    ext.encoder_slots = d_latent;
    ext.latent_schedule.clear();
    return ext;
  }
};

/// Trainable parameter count reported for the standard baseline: one angle
/// per layered gate plus one per latent encoder slot.
inline int standard_parameter_count(const CircuitLayout& layout) {
  return layout.layered_gate_count() + layout.d_latent;
}

/// Trainable (weight, bias) pair per gate, in circuit construction order.
/// Gate angle: weight * z[m] + bias, with m from the layout's schedule.
struct GeneratorParams {
  std::vector<std::pair<double, double>> pairs;

  static GeneratorParams zeros(int n_pairs) {
    GeneratorParams p;
    p.pairs.assign(static_cast<std::size_t>(n_pairs), {0.0, 0.0});
    return p;
  }

  /// Uniform init in [-scale, scale] for every weight and bias.
  static GeneratorParams random_init(const CircuitLayout& layout, Rng& rng, double scale = 0.1) {
    std::uniform_real_distribution<double> u(-scale, scale);
    GeneratorParams p;
    p.pairs.reserve(static_cast<std::size_t>(layout.gate_count()));
    for (int g = 0; g < layout.gate_count(); ++g) {
      const double w = u(rng), b = u(rng);
      p.pairs.emplace_back(w, b);
    }
    return p;
  }

  /// Flat layout [w0, b0, w1, b1, ...] used by the optimizer and model file.
  std::vector<double> to_flat() const {
    std::vector<double> f;
    f.reserve(2 * pairs.size());
    for (const auto& [w, b] : pairs) {
      f.push_back(w);
      f.push_back(b);
    }
    return f;
  }

  static GeneratorParams from_flat(const std::vector<double>& flat) {
    if (flat.size() % 2 != 0)
      throw std::invalid_argument("GeneratorParams: flat length must be even");
    GeneratorParams p;
    p.pairs.reserve(flat.size() / 2);
    for (std::size_t i = 0; i < flat.size(); i += 2) p.pairs.emplace_back(flat[i], flat[i + 1]);
    return p;
  }
};

namespace detail {

/// Emits the gate skeleton (kind/control/target) in construction order.
template <typename Fn>
void for_each_gate_slot(const CircuitLayout& layout, Fn&& fn) {
  for (int j = 0; j < layout.encoder_slots; ++j)
    fn(GateKind::RY, -1, j % layout.n_qubits);
  for (int l = 0; l < layout.n_layers; ++l) {
    for (int q = 0; q < layout.n_qubits; ++q) {
      fn(GateKind::RY, -1, q);
      fn(GateKind::RZ, -1, q);
      fn(GateKind::RY, -1, q);
      fn(GateKind::RZ, -1, q);
    }
    for (const auto& [c, t] : layout.entangler) fn(GateKind::CRY, c, t);
  }
  for (int q = 0; q < layout.n_qubits; ++q) fn(GateKind::RY, -1, q);
}

inline void check_latent(const CircuitLayout& layout, const LatentVector& z) {
  if (static_cast<int>(z.size()) != layout.d_latent)
    throw std::invalid_argument("latent vector length " + std::to_string(z.size()) +
                                " != d_latent " + std::to_string(layout.d_latent));
}

}  // namespace detail

/// One gate of a built circuit plus the sensitivity of its angle to each
/// trainable parameter (flat index, d angle / d param). Style gates carry
/// {(2g, z[m]), (2g+1, 1)}; standard layered gates carry {(g, 1)}; encoder
/// gates of the standard architecture carry nothing.
struct ParamGate {
  GateOp op;
  std::vector<std::pair<int, double>> dangle_dparam;
};

struct BuiltCircuit {
  std::vector<ParamGate> gates;
  int n_params = 0;

  std::vector<GateOp> ops() const {
    std::vector<GateOp> v;
    v.reserve(gates.size());
    for (const ParamGate& g : gates) v.push_back(g.op);
    return v;
  }
};

/// Style circuit with the trainable linear latent encoding in every gate,
/// entanglers included.
inline BuiltCircuit build_style_circuit_detailed(const CircuitLayout& layout,
                                                 const GeneratorParams& params,
                                                 const LatentVector& z) {
  layout.validate();
  detail::check_latent(layout, z);
  if (static_cast<int>(params.pairs.size()) != layout.gate_count())
    throw std::invalid_argument("GeneratorParams: got " + std::to_string(params.pairs.size()) +
                                " pairs, layout needs " + std::to_string(layout.gate_count()));
  BuiltCircuit c;
  c.n_params = layout.parameter_count();
  c.gates.reserve(static_cast<std::size_t>(layout.gate_count()));
  int g = 0;
  detail::for_each_gate_slot(layout, [&](GateKind kind, int control, int target) {
    const auto [w, b] = params.pairs[static_cast<std::size_t>(g)];
    const double zm = z[static_cast<std::size_t>(layout.latent_index(g))];
    ParamGate pg;
    pg.op = GateOp{kind, target, control, w * zm + b};
    pg.dangle_dparam = {{2 * g, zm}, {2 * g + 1, 1.0}};
    c.gates.push_back(std::move(pg));
    ++g;
  });
  return c;
}

inline std::vector<GateOp> build_style_circuit(const CircuitLayout& layout,
                                               const GeneratorParams& params,
                                               const LatentVector& z) {
  return build_style_circuit_detailed(layout, params, z).ops();
}

/// Standard-baseline circuit: the latent enters once, through a prefix of
/// d_latent fixed RY(z[m]) gates; every layered gate has a single trainable
/// angle with no latent dependence. `layout` is the base layout
/// (encoder_slots must be 0); `phi` has one entry per layered gate.
inline BuiltCircuit build_standard_circuit_detailed(const CircuitLayout& layout,
                                                    const std::vector<double>& phi,
                                                    const LatentVector& z) {
  layout.validate();
  detail::check_latent(layout, z);
  if (layout.encoder_slots != 0)
    throw std::invalid_argument("build_standard_circuit: pass the base layout (encoder_slots 0)");
  if (static_cast<int>(phi.size()) != layout.layered_gate_count())
    throw std::invalid_argument("standard parameter vector: got " + std::to_string(phi.size()) +
                                ", layout needs " + std::to_string(layout.layered_gate_count()));
  BuiltCircuit c;
  c.n_params = static_cast<int>(phi.size());
  c.gates.reserve(static_cast<std::size_t>(layout.d_latent + layout.layered_gate_count()));
  for (int j = 0; j < layout.d_latent; ++j) {
    ParamGate pg;
    pg.op = GateOp::ry(j % layout.n_qubits, z[static_cast<std::size_t>(j)]);
    c.gates.push_back(std::move(pg));
  }
  int g = 0;
  detail::for_each_gate_slot(layout, [&](GateKind kind, int control, int target) {
    ParamGate pg;
    pg.op = GateOp{kind, target, control, phi[static_cast<std::size_t>(g)]};
    pg.dangle_dparam = {{g, 1.0}};
    c.gates.push_back(std::move(pg));
    ++g;
  });
  return c;
}

inline std::vector<GateOp> build_standard_circuit(const CircuitLayout& layout,
                                                  const std::vector<double>& phi,
                                                  const LatentVector& z) {
  return build_standard_circuit_detailed(layout, phi, z).ops();
}

/// Explicit style parameters reproducing a standard baseline on the
/// encoder-prefixed layout: encoder pairs (1, 0) pass z[m] through, layered
/// pairs (0, phi[g]) freeze the angle. Together with with_encoder_prefix()
/// this realizes the baseline exactly, for every z.
inline GeneratorParams standard_embedding_params(const CircuitLayout& layout,
                                                 const std::vector<double>& phi) {
  if (static_cast<int>(phi.size()) != layout.layered_gate_count())
    throw std::invalid_argument("standard_embedding_params: phi length mismatch");
  GeneratorParams p;
  p.pairs.reserve(static_cast<std::size_t>(layout.d_latent) + phi.size());
  for (int j = 0; j < layout.d_latent; ++j) p.pairs.emplace_back(1.0, 0.0);
  for (double angle : phi) p.pairs.emplace_back(0.0, angle);
  return p;
}

/// Standard-normal latent draw.
inline LatentVector sample_latent(int d_latent, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  LatentVector z(static_cast<std::size_t>(d_latent));
  for (double& v : z) v = n01(rng);
  return z;
}

}  // namespace sqg
