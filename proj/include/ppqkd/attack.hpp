#pragma once

#include <array>
#include <vector>

#include "ppqkd/qmath.hpp"

namespace ppqkd {

// Basis conventions used throughout:
//   travel qutrit: index 0 = |v> (vacuum), 1 = |0>, 2 = |1>
//   travel qubit (channel input): index 0 = |0>, 1 = |1>
//   Eve ancilla (6-dim): 0..5 = E_0v, E_00, E_01, E_1v, E_10, E_11

/// The six transition probabilities of Eve's collective attack on the
/// forward channel. Rows (conditioned on the travel qubit collapsing to
/// |0> resp. |1>) must each sum to 1.
struct AttackParams {
  double p0v, p00, p01, p1v, p10, p11;

  void validate() const;  // throws std::invalid_argument

  static AttackParams identity() { return {0.0, 1.0, 0.0, 0.0, 0.0, 1.0}; }
  static AttackParams pure_loss() { return {1.0, 0.0, 0.0, 1.0, 0.0, 0.0}; }
};

/// Forward statistics after the vacuum branch is excluded: per-branch
/// efficiency and the renormalized conditional probabilities. A branch
/// with zero efficiency carries NaN conditionals.
struct EffectiveForwardStats {
  double eta_fwd;    // branch 0: p00 + p01
  double p00_prime;  // p00 / eta_fwd
  double p01_prime;  // p01 / eta_fwd
  double eta_fwd_1;  // branch 1: p10 + p11
  double p10_prime;  // p10 / eta_fwd_1
  double p11_prime;  // p11 / eta_fwd_1
};

EffectiveForwardStats effective_forward_stats(const AttackParams& params);

enum class EncodingLabel { I0, I1, Y0, Y1 };

/// One of Alice's four encoding operations: a diagonal unitary on the
/// travel qutrit, fixing the vacuum. I0/I1 encode key bit 0, Y0/Y1 bit 1.
struct EncodingOp {
  EncodingLabel label;
  Eigen::Matrix3cd matrix;
  int key_bit;
};

const std::array<EncodingOp, 4>& encoding_ops();
const EncodingOp& encoding_op(EncodingLabel label);

/// Kraus form of Eve's attack: six operators mapping the travel qubit into
/// the qutrit, one per transition branch, each tagged by a distinct
/// orthonormal ancilla vector. Order matches the AttackParams fields.
/// Completeness Σ K†K = I₂ holds by construction.
std::vector<ComplexMatrix> forward_kraus(const AttackParams& params);

/// Joint travel ⊗ ancilla state after the forward attack acted on Bob's
/// half of |Φ+>: the equal mixture of the two branch vectors, with the
/// orthonormal ancilla assignment from forward_kraus. factor_dims = {3, 6}.
DensityOperator joint_state_after_forward(const AttackParams& params);

/// The two post-encoding joint states for the given travel branch: bit 0
/// (average of I0/I1 images) and bit 1 (average of Y0/Y1 images), each on
/// travel qutrit ⊗ ancilla.
struct EncodedStates {
  DensityOperator bit0;
  DensityOperator bit1;
};

EncodedStates encoded_states(const AttackParams& params, int travel_branch);

/// The effective 2x2 encoding matrices after vacuum exclusion, written in
/// the branch basis {|0>|E_b0>, |1>|E_b1>}, plus their average (diagonal).
struct EffectiveMatrices {
  EffectiveForwardStats stats;
  Eigen::Matrix2cd rho_ae0;
  Eigen::Matrix2cd rho_ae1;
  Eigen::Matrix2cd rho_ae;
};

/// Throws DegenerateChannelError when the requested branch has zero
/// non-vacuum efficiency.
EffectiveMatrices effective_matrices(const AttackParams& params, int travel_branch);

/// Eve's conditional entropy S(A'|AE) for one branch, in bits, computed by
/// explicitly building the 4x4 classical-quantum state and subtracting
/// S(rho_ae). No analytic shortcut: this is the oracle the closed form is
/// checked against.
double eve_entropy_oracle(const AttackParams& params, int travel_branch);

}  // namespace ppqkd
