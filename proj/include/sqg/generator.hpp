// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "sqg/circuit.hpp"
#include "sqg/noise.hpp"
#include "sqg/state.hpp"

namespace sqg {

/// Sampling backends. Exact evaluates <s_z> from the state vector; Shots
/// estimates it from multinomial draws; Noisy runs the density-matrix
/// pipeline of noise.hpp with readout confusion and shots.
struct ExactBackend {};
struct ShotsBackend {
  std::size_t n_shots = 1000;
  Rng* rng = nullptr;
};
struct NoisyBackend {
  const NoiseModel* model = nullptr;
  std::size_t n_shots = 1000;
  Rng* rng = nullptr;
};
using Backend = std::variant<ExactBackend, ShotsBackend, NoisyBackend>;

namespace detail {

inline std::vector<double> sample_from_state(const StateVector& psi, const Backend& backend) {
  if (std::holds_alternative<ExactBackend>(backend)) {
    std::vector<double> x(static_cast<std::size_t>(psi.n_qubits));
    for (int q = 0; q < psi.n_qubits; ++q) x[static_cast<std::size_t>(q)] = -expectation_z(psi, q);
    return x;
  }
  const auto& shots = std::get<ShotsBackend>(backend);
  if (shots.rng == nullptr) throw std::invalid_argument("ShotsBackend: rng is required");
  std::vector<double> est =
      estimate_expectations_shots(measure_distribution(psi), shots.n_shots, *shots.rng);
  for (double& v : est) v = -v;
  return est;
}

}  // namespace detail

/// One fake sample x = (-<s_z^0>, ..., -<s_z^{n-1}>) from the style circuit.
inline std::vector<double> generate_sample(const CircuitLayout& layout,
                                           const GeneratorParams& params, const LatentVector& z,
                                           const Backend& backend = ExactBackend{}) {
  if (const auto* noisy = std::get_if<NoisyBackend>(&backend)) {
    if (noisy->model == nullptr || noisy->rng == nullptr)
      throw std::invalid_argument("NoisyBackend: model and rng are required");
    return noisy_generate_sample(layout, params, z, *noisy->model, noisy->n_shots, *noisy->rng);
  }
  return detail::sample_from_state(
      apply_circuit(StateVector(layout.n_qubits), build_style_circuit(layout, params, z)), backend);
}

/// Same for the standard baseline (exact and shots backends; the noisy
/// pipeline is specific to the deployed style model).
inline std::vector<double> standard_generate_sample(const CircuitLayout& layout,
                                                    const std::vector<double>& phi,
                                                    const LatentVector& z,
                                                    const Backend& backend = ExactBackend{}) {
  if (std::holds_alternative<NoisyBackend>(backend))
    throw std::invalid_argument("standard_generate_sample: noisy backend not supported");
  return detail::sample_from_state(
      apply_circuit(StateVector(layout.n_qubits), build_standard_circuit(layout, phi, z)), backend);
}

namespace detail {

/// d<s_z^i>/d param via reverse-mode sweep over the state vector. For gate g
/// with prefix state |b_g> and back-propagated observable state |a_g> =
/// U_{g+1}^dag ... U_G^dag Z_i |psi>, the angle derivative is
/// 2 Re <a_g| dU_g/dangle |b_g>; angle derivatives fan out to parameters
/// through each gate's recorded sensitivities.
inline Eigen::MatrixXd jacobian_of_circuit(const BuiltCircuit& circuit, int n_qubits) {
  const int n_gates = static_cast<int>(circuit.gates.size());
  std::vector<StateVector> prefix;
  prefix.reserve(static_cast<std::size_t>(n_gates));
  StateVector psi(n_qubits);
  for (const ParamGate& g : circuit.gates) {
    prefix.push_back(psi);
    apply_gate_inplace(psi, g.op);
  }

  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n_qubits, circuit.n_params);
  for (int q = 0; q < n_qubits; ++q) {
    StateVector a = psi;  // Z_q |psi>
    for (std::size_t k = 0; k < a.dim(); ++k)
      if (a.bit(k, q) == 1) a.amps[k] = -a.amps[k];

    for (int g = n_gates - 1; g >= 0; --g) {
      const ParamGate& pg = circuit.gates[static_cast<std::size_t>(g)];
      if (!pg.dangle_dparam.empty()) {
        StateVector mu = prefix[static_cast<std::size_t>(g)];
        apply_gate_derivative_inplace(mu, pg.op);
        cd inner = 0.0;
        for (std::size_t k = 0; k < mu.dim(); ++k) inner += std::conj(a.amps[k]) * mu.amps[k];
        const double dtheta = 2.0 * inner.real();
        for (const auto& [idx, sens] : pg.dangle_dparam) jac(q, idx) += dtheta * sens;
      }
      apply_gate_inverse_inplace(a, pg.op);
    }
  }
  return jac;
}

}  // namespace detail

/// Exact n_qubits x P Jacobian of the <s_z^i> expectations with respect to
/// the flat style parameters [w0, b0, w1, b1, ...].
inline Eigen::MatrixXd jacobian(const CircuitLayout& layout, const GeneratorParams& params,
                                const LatentVector& z) {
  return detail::jacobian_of_circuit(build_style_circuit_detailed(layout, params, z),
                                     layout.n_qubits);
}

/// Exact n_qubits x G Jacobian of <s_z^i> for the standard baseline angles.
inline Eigen::MatrixXd standard_jacobian(const CircuitLayout& layout,
                                         const std::vector<double>& phi, const LatentVector& z) {
  return detail::jacobian_of_circuit(build_standard_circuit_detailed(layout, phi, z),
                                     layout.n_qubits);
}

}  // namespace sqg
