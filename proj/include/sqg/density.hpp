// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

#include "sqg/state.hpp"

namespace sqg {

/// Mixed state of a small register, same big-endian qubit convention as
/// StateVector. Entries are stored dense; at n <= 3 this is at most 8x8.
struct DensityMatrix {
  int n_qubits = 1;
  Eigen::MatrixXcd rho;

  DensityMatrix() : rho(Eigen::MatrixXcd::Zero(2, 2)) { rho(0, 0) = 1.0; }

  explicit DensityMatrix(int n) : n_qubits(n) {
    if (n < 1 || n > 3) throw std::invalid_argument("DensityMatrix: n_qubits must be in [1,3]");
    const Eigen::Index d = Eigen::Index{1} << n;
    rho = Eigen::MatrixXcd::Zero(d, d);
    rho(0, 0) = 1.0;
  }

  static DensityMatrix from_state(const StateVector& psi) {
    DensityMatrix dm(psi.n_qubits);
    const Eigen::Index d = static_cast<Eigen::Index>(psi.dim());
    Eigen::VectorXcd v(d);
    for (Eigen::Index k = 0; k < d; ++k) v(k) = psi.amps[static_cast<std::size_t>(k)];
    dm.rho = v * v.adjoint();
    return dm;
  }

  Eigen::Index dim() const { return rho.rows(); }
  double trace_real() const { return rho.trace().real(); }

  int bit(Eigen::Index k, int q) const {
    return static_cast<int>((static_cast<std::size_t>(k) >> (n_qubits - 1 - q)) & 1u);
  }

  /// Diagonal in the computational basis, i.e. the measurement distribution.
  std::vector<double> diagonal_distribution() const {
    std::vector<double> p(static_cast<std::size_t>(dim()));
    for (Eigen::Index k = 0; k < dim(); ++k) p[static_cast<std::size_t>(k)] = rho(k, k).real();
    return p;
  }

  double expectation_z(int qubit) const {
    detail::check_qubit(n_qubits, qubit, "expectation_z");
    double v = 0;
    for (Eigen::Index k = 0; k < dim(); ++k)
      v += (bit(k, qubit) == 0 ? 1.0 : -1.0) * rho(k, k).real();
    return v;
  }
};

/// Dense 2^n x 2^n unitary of one gate, built from the tensor structure.
/// This is the density-matrix backend's own route; the state-vector backend
/// uses stride kernels instead, and the two are cross-checked in tests.
inline Eigen::MatrixXcd gate_unitary(const GateOp& g, int n_qubits) {
  detail::check_qubit(n_qubits, g.target, "gate_unitary");
  const double c = std::cos(g.angle / 2), sn = std::sin(g.angle / 2);
  Eigen::Matrix2cd m;
  if (g.kind == GateKind::RZ)
    m << cd{c, -sn}, 0, 0, cd{c, sn};
  else
    m << c, -sn, sn, c;

  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
  const int tshift = n_qubits - 1 - g.target;
  for (Eigen::Index col = 0; col < d; ++col) {
    if (g.kind == GateKind::CRY) {
      detail::check_qubit(n_qubits, g.control, "gate_unitary");
      if (g.control == g.target) throw std::invalid_argument("gate_unitary: control == target");
      const int cbit = static_cast<int>((col >> (n_qubits - 1 - g.control)) & 1);
      if (cbit == 0) {
        u(col, col) = 1.0;
        continue;
      }
    }
    const int tbit = static_cast<int>((col >> tshift) & 1);
    const Eigen::Index flipped = col ^ (Eigen::Index{1} << tshift);
    u(col, col) = m(tbit, tbit);
    u(flipped, col) = m(1 - tbit, tbit);
  }
  return u;
}

/// Noiseless evolution: unitary conjugation. The noisy overload lives with
/// the channel definitions in noise.hpp.
inline DensityMatrix evolve_density(const DensityMatrix& dm, const GateOp& gate) {
  const Eigen::MatrixXcd u = gate_unitary(gate, dm.n_qubits);
  DensityMatrix out = dm;
  out.rho = u * dm.rho * u.adjoint();
  return out;
}

}  // namespace sqg
