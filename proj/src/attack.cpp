#include "ppqkd/attack.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ppqkd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string("AttackParams: ") + name + " out of [0,1]");
  }
}

void check_branch(int travel_branch) {
  if (travel_branch != 0 && travel_branch != 1) {
    throw std::invalid_argument("travel_branch must be 0 or 1");
  }
}

// Branch vector of Eq. 1 in the 18-dim travel ⊗ ancilla space, with signs
// on the non-vacuum amplitudes: s0*sqrt(p_b0)|0>|E_b0> + s1*sqrt(p_b1)|1>|E_b1>
// + sqrt(p_bv)|v>|E_bv>.
ComplexVector branch_vector(const AttackParams& p, int branch, double s0, double s1) {
  const double pv = branch == 0 ? p.p0v : p.p1v;
  const double pa = branch == 0 ? p.p00 : p.p10;
  const double pb = branch == 0 ? p.p01 : p.p11;
  const int anc = branch == 0 ? 0 : 3;  // E_bv index; E_b0 = anc+1, E_b1 = anc+2
  ComplexVector v = ComplexVector::Zero(18);
  v(0 * 6 + anc) = std::sqrt(pv);
  v(1 * 6 + anc + 1) = s0 * std::sqrt(pa);
  v(2 * 6 + anc + 2) = s1 * std::sqrt(pb);
  return v;
}

}  // namespace

void AttackParams::validate() const {
  check_probability(p0v, "p0v");
  check_probability(p00, "p00");
  check_probability(p01, "p01");
  check_probability(p1v, "p1v");
  check_probability(p10, "p10");
  check_probability(p11, "p11");
  if (std::abs(p0v + p00 + p01 - 1.0) > kRowSumTol) {
    throw std::invalid_argument("AttackParams: branch-0 row must sum to 1");
  }
  if (std::abs(p1v + p10 + p11 - 1.0) > kRowSumTol) {
    throw std::invalid_argument("AttackParams: branch-1 row must sum to 1");
  }
}

EffectiveForwardStats effective_forward_stats(const AttackParams& params) {
  params.validate();
  EffectiveForwardStats s{};
  s.eta_fwd = params.p00 + params.p01;
  s.eta_fwd_1 = params.p10 + params.p11;
  s.p00_prime = s.eta_fwd > 0.0 ? params.p00 / s.eta_fwd : kNaN;
  s.p01_prime = s.eta_fwd > 0.0 ? params.p01 / s.eta_fwd : kNaN;
  s.p10_prime = s.eta_fwd_1 > 0.0 ? params.p10 / s.eta_fwd_1 : kNaN;
  s.p11_prime = s.eta_fwd_1 > 0.0 ? params.p11 / s.eta_fwd_1 : kNaN;
  return s;
}

const std::array<EncodingOp, 4>& encoding_ops() {
  static const std::array<EncodingOp, 4> ops = [] {
    auto diag = [](double v, double a, double b) {
      Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
      m(0, 0) = v;
      m(1, 1) = a;
      m(2, 2) = b;
      return m;
    };
    return std::array<EncodingOp, 4>{
        EncodingOp{EncodingLabel::I0, diag(1, 1, 1), 0},
        EncodingOp{EncodingLabel::I1, diag(1, -1, -1), 0},
        EncodingOp{EncodingLabel::Y0, diag(1, 1, -1), 1},
        EncodingOp{EncodingLabel::Y1, diag(1, -1, 1), 1},
    };
  }();
  return ops;
}

const EncodingOp& encoding_op(EncodingLabel label) {
  return encoding_ops()[static_cast<std::size_t>(label)];
}

std::vector<ComplexMatrix> forward_kraus(const AttackParams& params) {
  params.validate();
  // Qubit input basis (|0>,|1>), qutrit output basis (|v>,|0>,|1>).
  auto op = [](double p, int out_row, int in_col) {
    ComplexMatrix k = ComplexMatrix::Zero(3, 2);
    k(out_row, in_col) = std::sqrt(p);
    return k;
  };
  return {op(params.p0v, 0, 0), op(params.p00, 1, 0), op(params.p01, 2, 0),
          op(params.p1v, 0, 1), op(params.p10, 1, 1), op(params.p11, 2, 1)};
}

DensityOperator joint_state_after_forward(const AttackParams& params) {
  params.validate();
  const ComplexVector b0 = branch_vector(params, 0, 1.0, 1.0);
  const ComplexVector b1 = branch_vector(params, 1, 1.0, 1.0);
  ComplexMatrix rho = 0.5 * projector(b0) + 0.5 * projector(b1);
  return DensityOperator(std::move(rho), {3, 6});
}

EncodedStates encoded_states(const AttackParams& params, int travel_branch) {
  params.validate();
  check_branch(travel_branch);
  // Averaging the two same-bit operations cancels the vacuum/non-vacuum
  // cross terms, leaving the vacuum weight plus one pure non-vacuum branch
  // whose relative sign carries the key bit.
  const double pv = travel_branch == 0 ? params.p0v : params.p1v;
  const int anc_v = travel_branch == 0 ? 0 : 3;
  ComplexVector vac = ComplexVector::Zero(18);
  vac(0 * 6 + anc_v) = 1.0;

  auto mix = [&](double s1) {
    ComplexVector nonvac = branch_vector(params, travel_branch, 1.0, s1);
    nonvac(0 * 6 + anc_v) = 0.0;
    return DensityOperator(pv * projector(vac) + projector(nonvac), {3, 6});
  };
  return EncodedStates{mix(1.0), mix(-1.0)};
}

EffectiveMatrices effective_matrices(const AttackParams& params, int travel_branch) {
  check_branch(travel_branch);
  EffectiveMatrices em{};
  em.stats = effective_forward_stats(params);
  const double eta = travel_branch == 0 ? em.stats.eta_fwd : em.stats.eta_fwd_1;
  if (!(eta > 0.0)) {
    throw DegenerateChannelError("effective_matrices: branch " + std::to_string(travel_branch) +
                                 " has zero forward efficiency");
  }
  const double pk = travel_branch == 0 ? em.stats.p00_prime : em.stats.p10_prime;
  const double pf = travel_branch == 0 ? em.stats.p01_prime : em.stats.p11_prime;
  const double cross = std::sqrt(pk * pf);
  em.rho_ae0 << pk, cross, cross, pf;
  em.rho_ae1 << pk, -cross, -cross, pf;
  em.rho_ae << pk, 0, 0, pf;
  return em;
}

double eve_entropy_oracle(const AttackParams& params, int travel_branch) {
  const EffectiveMatrices em = effective_matrices(params, travel_branch);
  ComplexMatrix joint = ComplexMatrix::Zero(4, 4);
  joint.topLeftCorner<2, 2>() = 0.5 * em.rho_ae0;
  joint.bottomRightCorner<2, 2>() = 0.5 * em.rho_ae1;
  const double s_joint = von_neumann_entropy(DensityOperator(joint, {2, 2}));
  const double s_ae = von_neumann_entropy(DensityOperator(em.rho_ae, {2}));
  return s_joint - s_ae;
}

}  // namespace ppqkd
