// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqg/rng.hpp"

namespace sqg {

using cd = std::complex<double>;

/// Rotation gates of the generator circuit. Convention: R_j(t) = exp(-i t s_j / 2),
/// so RY(t) = [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]] and
/// RZ(t) = diag(exp(-it/2), exp(+it/2)). CRY applies RY on `target` when
/// `control` is |1>.
enum class GateKind { RY, RZ, CRY };

inline const char* to_string(GateKind k) {
  switch (k) {
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CRY: return "CRY";
  }
  return "?";
}

struct GateOp {
  GateKind kind = GateKind::RY;
  int target = 0;
  int control = -1;  // >= 0 only for CRY
  double angle = 0.0;

  static GateOp ry(int target, double angle) { return {GateKind::RY, target, -1, angle}; }
  static GateOp rz(int target, double angle) { return {GateKind::RZ, target, -1, angle}; }
  static GateOp cry(int control, int target, double angle) {
    return {GateKind::CRY, target, control, angle};
  }
};

/// Pure state of a small register. Qubit bits are read big-endian: qubit 0
/// is the most significant bit of the basis-state index. Every consumer of
/// per-qubit quantities (expectations, distributions, readout confusion)
/// uses this convention.
struct StateVector {
  int n_qubits = 1;
  std::vector<cd> amps;

  StateVector() : amps{cd{1, 0}, cd{0, 0}} {}

  explicit StateVector(int n) : n_qubits(n) {
    if (n < 1 || n > 3) throw std::invalid_argument("StateVector: n_qubits must be in [1,3]");
    amps.assign(std::size_t{1} << n, cd{0, 0});
    amps[0] = cd{1, 0};
  }

  std::size_t dim() const { return amps.size(); }

  double norm_sq() const {
    double s = 0;
    for (const cd& a : amps) s += std::norm(a);
    return s;
  }

  /// Bit of qubit q in basis index k (big-endian).
  int bit(std::size_t k, int q) const { return static_cast<int>((k >> (n_qubits - 1 - q)) & 1u); }
};

namespace detail {

inline void check_qubit(int n_qubits, int q, const char* what) {
  if (q < 0 || q >= n_qubits)
    throw std::out_of_range(std::string(what) + ": qubit index " + std::to_string(q) +
                            " out of range for " + std::to_string(n_qubits) + " qubits");
}

/// In-place 2x2 matrix action on `q`, restricted to indices where `control`
/// (if >= 0) is set. With zero_rest, amplitudes outside the controlled
/// subspace are zeroed; that turns the routine into the action of the
/// (non-unitary) block matrix diag(0, M), used for CRY angle derivatives.
inline void apply_1q_matrix_inplace(StateVector& s, int q, cd m00, cd m01, cd m10, cd m11,
                                    int control = -1, bool zero_rest = false) {
  const std::size_t n = s.dim();
  const std::size_t stride = std::size_t{1} << (s.n_qubits - 1 - q);
  for (std::size_t base = 0; base < n; ++base) {
    if (base & stride) continue;  // visit each (0,1) pair once
    if (control >= 0) {
      const std::size_t cmask = std::size_t{1} << (s.n_qubits - 1 - control);
      if (!(base & cmask)) {
        if (zero_rest) {
          s.amps[base] = 0;
          s.amps[base | stride] = 0;
        }
        continue;
      }
    }
    const cd a0 = s.amps[base];
    const cd a1 = s.amps[base | stride];
    s.amps[base] = m00 * a0 + m01 * a1;
    s.amps[base | stride] = m10 * a0 + m11 * a1;
  }
}

inline void apply_gate_inplace(StateVector& s, const GateOp& g) {
  check_qubit(s.n_qubits, g.target, "apply_gate");
  const double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
  switch (g.kind) {
    case GateKind::RY:
      apply_1q_matrix_inplace(s, g.target, c, -sn, sn, c);
      break;
    case GateKind::RZ:
      apply_1q_matrix_inplace(s, g.target, cd{c, -sn}, 0, 0, cd{c, sn});
      break;
    case GateKind::CRY:
      check_qubit(s.n_qubits, g.control, "apply_gate");
      if (g.control == g.target) throw std::invalid_argument("apply_gate: control == target");
      apply_1q_matrix_inplace(s, g.target, c, -sn, sn, c, g.control);
      break;
  }
}

/// Action of dU/dangle. For RY/RZ this is another 2x2 map; for CRY it is
/// diag(0, dRY/dangle), which annihilates the control=0 subspace.
inline void apply_gate_derivative_inplace(StateVector& s, const GateOp& g) {
  const double c = 0.5 * std::cos(g.angle / 2), sn = 0.5 * std::sin(g.angle / 2);
  switch (g.kind) {
    case GateKind::RY:
      apply_1q_matrix_inplace(s, g.target, -sn, -c, c, -sn);
      break;
    case GateKind::RZ:
      apply_1q_matrix_inplace(s, g.target, cd{-sn, -c}, 0, 0, cd{-sn, c});
      break;
    case GateKind::CRY:
      apply_1q_matrix_inplace(s, g.target, -sn, -c, c, -sn, g.control, /*zero_rest=*/true);
      break;
  }
}

/// Inverse gate = gate with negated angle (all three kinds are rotations).
inline void apply_gate_inverse_inplace(StateVector& s, const GateOp& g) {
  GateOp inv = g;
  inv.angle = -g.angle;
  apply_gate_inplace(s, inv);
}

}  // namespace detail

/// Value-semantics gate application; the input is left untouched.
inline StateVector apply_gate(const StateVector& state, const GateOp& gate) {
  StateVector out = state;
  detail::apply_gate_inplace(out, gate);
  return out;
}

inline StateVector apply_circuit(StateVector state, const std::vector<GateOp>& gates) {
  for (const GateOp& g : gates) detail::apply_gate_inplace(state, g);
  return state;
}

/// <s_z> of one qubit: sum of +/-|amp|^2 with the sign set by the qubit's bit.
inline double expectation_z(const StateVector& state, int qubit) {
  detail::check_qubit(state.n_qubits, qubit, "expectation_z");
  double v = 0;
  for (std::size_t k = 0; k < state.dim(); ++k)
    v += (state.bit(k, qubit) == 0 ? 1.0 : -1.0) * std::norm(state.amps[k]);
  return v;
}

/// Born-rule outcome distribution over the 2^n computational basis states.
inline std::vector<double> measure_distribution(const StateVector& state) {
  std::vector<double> p(state.dim());
  for (std::size_t k = 0; k < state.dim(); ++k) p[k] = std::norm(state.amps[k]);
  return p;
}

inline int qubits_of_distribution(const std::vector<double>& dist) {
  int n = 0;
  while ((std::size_t{1} << n) < dist.size()) ++n;
  if ((std::size_t{1} << n) != dist.size() || dist.empty())
    throw std::invalid_argument("distribution length must be a power of two");
  return n;
}

/// Per-qubit <s_z> estimates from n_shots multinomial draws of the full
/// register. Estimate for qubit q is (#outcomes with bit 0 - #with bit 1)/n.
inline std::vector<double> estimate_expectations_shots(const std::vector<double>& dist,
                                                       std::size_t n_shots, Rng& rng) {
  if (n_shots == 0) throw std::invalid_argument("estimate_expectations_shots: n_shots must be >= 1");
  const int n = qubits_of_distribution(dist);
  std::discrete_distribution<std::size_t> draw(dist.begin(), dist.end());
  std::vector<std::int64_t> ones(n, 0);
  for (std::size_t s = 0; s < n_shots; ++s) {
    const std::size_t k = draw(rng);
    for (int q = 0; q < n; ++q) ones[q] += (k >> (n - 1 - q)) & 1u;
  }
  std::vector<double> est(n);
  for (int q = 0; q < n; ++q)
    est[q] = 1.0 - 2.0 * static_cast<double>(ones[q]) / static_cast<double>(n_shots);
  return est;
}

}  // namespace sqg
