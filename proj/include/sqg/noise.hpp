// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sqg/circuit.hpp"
#include "sqg/density.hpp"

namespace sqg {

/// Per-qubit calibration: readout confusion probabilities and relaxation
/// time constants. Defaults are noise-free (infinite coherence times).
struct QubitCalibration {
  double p_read1_given0 = 0.0;  // probability of reading |1> when the state is |0>
  double p_read0_given1 = 0.0;  // probability of reading |0> when the state is |1>
  double t1_s = std::numeric_limits<double>::infinity();
  double t2_s = std::numeric_limits<double>::infinity();
};

/// Per-gate-kind calibration. An entry with an explicit qubit list only
/// matches gates on exactly those qubits; an entry without one matches the
/// kind on any qubits.
struct GateCalibration {
  GateKind kind = GateKind::RY;
  std::vector<int> qubits;  // empty = any
  double error_prob = 0.0;  // depolarizing probability attached to the gate
  double duration_s = 0.0;  // gate length driving relaxation
};

struct NoiseModel {
  std::vector<QubitCalibration> qubits;
  std::vector<GateCalibration> gates;
  bool idle_relaxation = true;  // qubits not acted on by a gate relax over its duration

  void validate() const {
    for (const QubitCalibration& q : qubits) {
      if (q.p_read1_given0 < 0 || q.p_read1_given0 > 1 || q.p_read0_given1 < 0 ||
          q.p_read0_given1 > 1)
        throw std::invalid_argument("NoiseModel: readout probabilities must be in [0,1]");
      if (!(q.t1_s > 0) || !(q.t2_s > 0))
        throw std::invalid_argument("NoiseModel: t1 and t2 must be positive");
      if (q.t2_s > 2 * q.t1_s) throw std::invalid_argument("NoiseModel: t2 must be <= 2*t1");
    }
    for (const GateCalibration& g : gates) {
      if (g.error_prob < 0 || g.error_prob > 1)
        throw std::invalid_argument("NoiseModel: gate error_prob must be in [0,1]");
      if (g.duration_s < 0 || !std::isfinite(g.duration_s))
        throw std::invalid_argument("NoiseModel: gate duration must be finite and >= 0");
    }
  }

  const QubitCalibration& qubit(int q) const {
    static const QubitCalibration kClean{};
    return q >= 0 && q < static_cast<int>(qubits.size()) ? qubits[static_cast<std::size_t>(q)]
                                                         : kClean;
  }

  /// Calibration for a gate instance; exact-qubit entries win over
  /// kind-wide ones. Unlisted kinds behave noise-free.
  GateCalibration gate(GateKind kind, const std::vector<int>& on_qubits) const {
    const GateCalibration* kind_wide = nullptr;
    for (const GateCalibration& g : gates) {
      if (g.kind != kind) continue;
      if (g.qubits == on_qubits) return g;
      if (g.qubits.empty() && kind_wide == nullptr) kind_wide = &g;
    }
    if (kind_wide) return *kind_wide;
    GateCalibration clean;
    clean.kind = kind;
    return clean;
  }

  /// All calibration entries zeroed-out (useful baseline in tests).
  static NoiseModel trivial(int n_qubits) {
    NoiseModel m;
    m.qubits.assign(static_cast<std::size_t>(n_qubits), QubitCalibration{});
    return m;
  }
};

/// Thermal relaxation of one qubit toward |0> over `duration`: populations
/// decay with t1 (damping parameter 1 - exp(-d/t1)), coherences with t2.
/// Complete positivity needs t2 <= 2*t1, enforced here.
inline DensityMatrix relaxation_channel(const DensityMatrix& dm, int qubit, double t1, double t2,
                                        double duration) {
  detail::check_qubit(dm.n_qubits, qubit, "relaxation_channel");
  if (!(t1 > 0) || !(t2 > 0)) throw std::invalid_argument("relaxation_channel: t1, t2 must be > 0");
  if (t2 > 2 * t1) throw std::invalid_argument("relaxation_channel: t2 > 2*t1 is not a channel");
  if (duration < 0) throw std::invalid_argument("relaxation_channel: negative duration");
  const double gamma = -std::expm1(-duration / t1);
  const double eta = std::exp(-duration / t2);

  DensityMatrix out = dm;
  const Eigen::Index d = dm.dim();
  const Eigen::Index qm = Eigen::Index{1} << (dm.n_qubits - 1 - qubit);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const bool rb = (r & qm) != 0, cb = (c & qm) != 0;
      if (rb && cb)
        out.rho(r, c) = (1.0 - gamma) * dm.rho(r, c);
      else if (!rb && !cb)
        out.rho(r, c) = dm.rho(r, c) + gamma * dm.rho(r | qm, c | qm);
      else
        out.rho(r, c) = eta * dm.rho(r, c);
    }
  }
  return out;
}

/// rho -> (1-p) rho + p * (I / 2^k) on the given k qubits (k = 1 or 2),
/// leaving the marginal on the other qubits untouched.
inline DensityMatrix depolarizing_channel(const DensityMatrix& dm, const std::vector<int>& qubits,
                                          double p) {
  if (p < 0 || p > 1) throw std::invalid_argument("depolarizing_channel: p must be in [0,1]");
  if (qubits.empty() || qubits.size() > 2)
    throw std::invalid_argument("depolarizing_channel: acts on 1 or 2 qubits");
  Eigen::Index mask = 0;
  for (int q : qubits) {
    detail::check_qubit(dm.n_qubits, q, "depolarizing_channel");
    const Eigen::Index bit = Eigen::Index{1} << (dm.n_qubits - 1 - q);
    if (mask & bit) throw std::invalid_argument("depolarizing_channel: duplicate qubit");
    mask |= bit;
  }
  if (p == 0.0) return dm;

  // (Tr_qubits rho) tensor I/2^k, with the identity re-embedded on `qubits`.
  const Eigen::Index d = dm.dim();
  const int k = static_cast<int>(qubits.size());
  std::vector<Eigen::Index> offsets;
  for (Eigen::Index m = 0; m < d; ++m)
    if ((m & mask) == m) offsets.push_back(m);  // all bit patterns within mask

  DensityMatrix out = dm;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      cd mixed = 0.0;
      if ((r & mask) == (c & mask)) {
        const Eigen::Index rb = r & ~mask, cb = c & ~mask;
        for (Eigen::Index off : offsets) mixed += dm.rho(rb | off, cb | off);
        mixed /= static_cast<double>(Eigen::Index{1} << k);
      }
      out.rho(r, c) = (1.0 - p) * dm.rho(r, c) + p * mixed;
    }
  }
  return out;
}

/// Tensor product of per-qubit 2x2 confusion matrices applied to an outcome
/// distribution. Column-stochastic per qubit, so the total mass is kept.
inline std::vector<double> apply_readout_error(const std::vector<double>& dist,
                                               const NoiseModel& model) {
  model.validate();
  const int n = qubits_of_distribution(dist);
  std::vector<double> p = dist;
  for (int q = 0; q < n; ++q) {
    const QubitCalibration& cal = model.qubit(q);
    const double p10 = cal.p_read1_given0, p01 = cal.p_read0_given1;
    if (p10 == 0.0 && p01 == 0.0) continue;
    const std::size_t stride = std::size_t{1} << (n - 1 - q);
    for (std::size_t base = 0; base < p.size(); ++base) {
      if (base & stride) continue;
      const double v0 = p[base], v1 = p[base | stride];
      p[base] = (1.0 - p10) * v0 + p01 * v1;
      p[base | stride] = p10 * v0 + (1.0 - p01) * v1;
    }
  }
  return p;
}

/// Unitary conjugation followed by the gate's error channels: depolarizing
/// on the gate's qubits, then relaxation over the gate duration (all qubits
/// when idle_relaxation is set, otherwise only the acted ones).
inline DensityMatrix evolve_density(const DensityMatrix& dm, const GateOp& gate,
                                    const NoiseModel& noise) {
  noise.validate();
  DensityMatrix out = evolve_density(dm, gate);
  std::vector<int> acted{gate.target};
  if (gate.kind == GateKind::CRY) acted.insert(acted.begin(), gate.control);
  const GateCalibration cal = noise.gate(gate.kind, acted);
  if (cal.error_prob > 0) out = depolarizing_channel(out, acted, cal.error_prob);
  if (cal.duration_s > 0) {
    for (int q = 0; q < dm.n_qubits; ++q) {
      const bool is_acted = q == gate.target || (gate.kind == GateKind::CRY && q == gate.control);
      if (!noise.idle_relaxation && !is_acted) continue;
      const QubitCalibration& qc = noise.qubit(q);
      out = relaxation_channel(out, q, qc.t1_s, qc.t2_s, cal.duration_s);
    }
  }
  return out;
}

inline DensityMatrix evolve_density(const DensityMatrix& dm, const GateOp& gate,
                                    const std::optional<NoiseModel>& noise) {
  return noise ? evolve_density(dm, gate, *noise) : evolve_density(dm, gate);
}

/// Full noisy sampling pipeline: density-matrix evolution with per-gate
/// channels, readout confusion on the final distribution, then shot-based
/// expectation estimates. Returns x = -<s_z> per qubit.
inline std::vector<double> noisy_generate_sample(const CircuitLayout& layout,
                                                 const GeneratorParams& params,
                                                 const LatentVector& z, const NoiseModel& model,
                                                 std::size_t n_shots, Rng& rng) {
  model.validate();
  const std::vector<GateOp> gates = build_style_circuit(layout, params, z);
  DensityMatrix dm(layout.n_qubits);
  for (const GateOp& g : gates) dm = evolve_density(dm, g, model);
  std::vector<double> dist = apply_readout_error(dm.diagonal_distribution(), model);
  std::vector<double> est = estimate_expectations_shots(dist, n_shots, rng);
  for (double& v : est) v = -v;
  return est;
}

}  // namespace sqg
