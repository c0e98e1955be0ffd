#include "ppqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ppqkd {

namespace {

constexpr std::array<BobResult, 5> kBellOrder = {
    BobResult::NoDetection, BobResult::PhiPlus, BobResult::PhiMinus,
    BobResult::PsiPlus, BobResult::PsiMinus,
};

// 2 ⊗ 3 flat index: home j, travel t (0=|v>,1=|0>,2=|1>).
constexpr Eigen::Index ht(Eigen::Index j, Eigen::Index t) { return j * 3 + t; }

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

template <std::size_t N>
std::size_t sample_cumulative(const std::array<double, N>& weights, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  return N - 1;
}

// Distributions precomputed once per session from the exact 6-dim
// density-matrix evolution; per-trial work is then pure Born sampling.
struct SessionTables {
  std::array<double, 3> alice_ctrl_marginal;            // p(x)
  std::array<std::array<double, 2>, 3> home_given_ctrl; // p(j | x)
  std::array<double, 2> home_marginal;                  // p(j)
  std::array<std::array<double, 5>, 4> bsm_by_op;       // both-message trials
  std::array<std::array<double, 5>, 3> bsm_by_ctrl;     // Alice-control, Bob-message
};

SessionTables build_tables(const AttackParams& fwd, const BackwardChannelParams& bwd) {
  SessionTables t{};
  const DensityOperator rho_fwd = state_after_forward(fwd);
  const ComplexMatrix& m = rho_fwd.matrix();

  std::array<std::array<double, 3>, 2> joint{};
  for (Eigen::Index j = 0; j < 2; ++j) {
    for (Eigen::Index x = 0; x < 3; ++x) {
      joint[j][x] = std::max(0.0, m(ht(j, x), ht(j, x)).real());
    }
  }
  for (int x = 0; x < 3; ++x) {
    t.alice_ctrl_marginal[x] = joint[0][x] + joint[1][x];
    for (int j = 0; j < 2; ++j) {
      t.home_given_ctrl[x][j] =
          t.alice_ctrl_marginal[x] > 0.0 ? joint[j][x] / t.alice_ctrl_marginal[x] : 0.5;
    }
  }
  for (int j = 0; j < 2; ++j) t.home_marginal[j] = joint[j][0] + joint[j][1] + joint[j][2];

  for (std::size_t op = 0; op < 4; ++op) {
    const DensityOperator evolved = apply_backward(
        apply_encoding(rho_fwd, static_cast<EncodingLabel>(op)), bwd);
    t.bsm_by_op[op] = bell_weights(evolved);
  }

  for (Eigen::Index x = 0; x < 3; ++x) {
    if (t.alice_ctrl_marginal[x] <= 0.0) {
      t.bsm_by_ctrl[x] = {1.0, 0.0, 0.0, 0.0, 0.0};
      continue;
    }
    // Post-measurement state after Alice's projector |x><x| on travel.
    ComplexMatrix collapsed = ComplexMatrix::Zero(6, 6);
    for (Eigen::Index j = 0; j < 2; ++j) {
      for (Eigen::Index jp = 0; jp < 2; ++jp) {
        collapsed(ht(j, x), ht(jp, x)) = m(ht(j, x), ht(jp, x));
      }
    }
    collapsed /= t.alice_ctrl_marginal[x];
    t.bsm_by_ctrl[x] = bell_weights(apply_backward(DensityOperator(collapsed, {2, 3}), bwd));
  }
  return t;
}

}  // namespace

void SessionConfig::validate() const {
  if (n_trials == 0) throw std::invalid_argument("SessionConfig: n_trials must be positive");
  if (!(message_mode_prob > 0.0 && message_mode_prob <= 1.0)) {
    throw std::invalid_argument("SessionConfig: message_mode_prob must be in (0,1]");
  }
}

void BackwardChannelParams::validate() const {
  for (double q : {q_v0, q_00, q_01, q_v1, q_10, q_11}) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw std::invalid_argument("BackwardChannelParams: probability out of [0,1]");
    }
  }
  if (std::abs(q_v0 + q_00 + q_01 - 1.0) > kRowSumTol) {
    throw std::invalid_argument("BackwardChannelParams: |0> row must sum to 1");
  }
  if (std::abs(q_v1 + q_10 + q_11 - 1.0) > kRowSumTol) {
    throw std::invalid_argument("BackwardChannelParams: |1> row must sum to 1");
  }
}

std::vector<ComplexMatrix> loss_flip_forward_kraus(const AttackParams& params) {
  params.validate();
  ComplexMatrix keep = ComplexMatrix::Zero(3, 2);
  keep(1, 0) = std::sqrt(params.p00);
  keep(2, 1) = std::sqrt(params.p11);
  ComplexMatrix flip0 = ComplexMatrix::Zero(3, 2);
  flip0(2, 0) = std::sqrt(params.p01);
  ComplexMatrix flip1 = ComplexMatrix::Zero(3, 2);
  flip1(1, 1) = std::sqrt(params.p10);
  ComplexMatrix loss0 = ComplexMatrix::Zero(3, 2);
  loss0(0, 0) = std::sqrt(params.p0v);
  ComplexMatrix loss1 = ComplexMatrix::Zero(3, 2);
  loss1(0, 1) = std::sqrt(params.p1v);
  return {keep, flip0, flip1, loss0, loss1};
}

std::vector<ComplexMatrix> loss_flip_backward_kraus(const BackwardChannelParams& params) {
  params.validate();
  ComplexMatrix keep = ComplexMatrix::Zero(3, 3);
  keep(0, 0) = 1.0;  // vacuum passes unchanged
  keep(1, 1) = std::sqrt(params.q_00);
  keep(2, 2) = std::sqrt(params.q_11);
  ComplexMatrix flip0 = ComplexMatrix::Zero(3, 3);
  flip0(2, 1) = std::sqrt(params.q_01);
  ComplexMatrix flip1 = ComplexMatrix::Zero(3, 3);
  flip1(1, 2) = std::sqrt(params.q_10);
  ComplexMatrix loss0 = ComplexMatrix::Zero(3, 3);
  loss0(0, 1) = std::sqrt(params.q_v0);
  ComplexMatrix loss1 = ComplexMatrix::Zero(3, 3);
  loss1(0, 2) = std::sqrt(params.q_v1);
  return {keep, flip0, flip1, loss0, loss1};
}

std::array<double, 5> bell_weights(const DensityOperator& rho) {
  if (rho.factor_dims() != std::vector<Eigen::Index>{2, 3}) {
    throw std::invalid_argument("bell_weights: expected factor_dims {2,3}");
  }
  const ComplexMatrix& m = rho.matrix();
  const double nd = m(ht(0, 0), ht(0, 0)).real() + m(ht(1, 0), ht(1, 0)).real();
  // Phi± = (|0,0> ± |1,1>)/sqrt2, Psi± = (|0,1> ± |1,0>)/sqrt2 within the
  // non-vacuum travel block.
  const double d00 = m(ht(0, 1), ht(0, 1)).real();
  const double d11 = m(ht(1, 2), ht(1, 2)).real();
  const double c_phi = m(ht(0, 1), ht(1, 2)).real();
  const double d01 = m(ht(0, 2), ht(0, 2)).real();
  const double d10 = m(ht(1, 1), ht(1, 1)).real();
  const double c_psi = m(ht(0, 2), ht(1, 1)).real();
  auto clamp0 = [](double w) { return std::max(0.0, w); };
  return {clamp0(nd), clamp0(0.5 * (d00 + d11) + c_phi), clamp0(0.5 * (d00 + d11) - c_phi),
          clamp0(0.5 * (d01 + d10) + c_psi), clamp0(0.5 * (d01 + d10) - c_psi)};
}

BobResult bell_measure(const DensityOperator& rho, double rng_draw) {
  return kBellOrder[sample_cumulative(bell_weights(rho), rng_draw)];
}

DensityOperator state_after_forward(const AttackParams& params) {
  ComplexVector phi_plus = ComplexVector::Zero(4);
  phi_plus(0) = phi_plus(3) = 1.0 / std::sqrt(2.0);
  const ComplexMatrix pair = projector(phi_plus);
  const auto fwd_ops = loss_flip_forward_kraus(params);
  ComplexMatrix out = ComplexMatrix::Zero(6, 6);
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  for (const auto& k : fwd_ops) {
    const ComplexMatrix lifted = tensor(id2, k);
    out += lifted * pair * lifted.adjoint();
  }
  return DensityOperator(std::move(out), {2, 3});
}

DensityOperator apply_encoding(const DensityOperator& rho, EncodingLabel op) {
  if (rho.factor_dims() != std::vector<Eigen::Index>{2, 3}) {
    throw std::invalid_argument("apply_encoding: expected factor_dims {2,3}");
  }
  const ComplexMatrix lifted = tensor(ComplexMatrix::Identity(2, 2), encoding_op(op).matrix);
  return DensityOperator(lifted * rho.matrix() * lifted.adjoint(), {2, 3});
}

DensityOperator apply_backward(const DensityOperator& rho, const BackwardChannelParams& params) {
  if (rho.factor_dims() != std::vector<Eigen::Index>{2, 3}) {
    throw std::invalid_argument("apply_backward: expected factor_dims {2,3}");
  }
  const auto ops = loss_flip_backward_kraus(params);
  ComplexMatrix out = ComplexMatrix::Zero(6, 6);
  const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  for (const auto& k : ops) {
    const ComplexMatrix lifted = tensor(id2, k);
    out += lifted * rho.matrix() * lifted.adjoint();
  }
  return DensityOperator(std::move(out), {2, 3});
}

SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial_index) {
  return SplitMix64(mix64(seed ^ mix64(trial_index)));
}

ObservedStatistics estimate_statistics(const std::vector<TrialOutcome>& outcomes,
                                       PsiOutcomePolicy policy) {
  if (outcomes.empty()) {
    throw std::invalid_argument("estimate_statistics: empty outcome sequence");
  }
  ObservedStatistics stats{};
  for (const TrialOutcome& o : outcomes) {
    if (o.mode_alice == Mode::Control && o.mode_bob == Mode::Control) {
      if (o.bob_result != BobResult::Z0 && o.bob_result != BobResult::Z1) {
        throw std::invalid_argument("estimate_statistics: non-Z result in a control trial");
      }
      if (o.alice_ctrl < 0 || o.alice_ctrl > 2) {
        throw std::invalid_argument("estimate_statistics: control trial without a control result");
      }
      ++stats.n_control;
      const int j = o.bob_result == BobResult::Z0 ? 0 : 1;
      ++stats.counts[j][static_cast<std::size_t>(o.alice_ctrl)];
    } else if (o.mode_alice == Mode::Message && o.mode_bob == Mode::Message) {
      ++stats.n_message;
      switch (o.bob_result) {
        case BobResult::NoDetection:
          break;
        case BobResult::PhiPlus:
        case BobResult::PhiMinus: {
          ++stats.n_detected;
          const int decoded = o.bob_result == BobResult::PhiPlus ? 0 : 1;
          ++stats.qber_hat.denominator;
          if (decoded != o.alice_bit) ++stats.qber_hat.numerator;
          break;
        }
        case BobResult::PsiPlus:
        case BobResult::PsiMinus:
          ++stats.n_detected;
          if (policy == PsiOutcomePolicy::CountAsError) {
            ++stats.qber_hat.denominator;
            ++stats.qber_hat.numerator;
          }
          break;
        default:
          throw std::invalid_argument("estimate_statistics: Z result in a message trial");
      }
    }
    // Mixed-mode trials are discarded.
  }

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j < 2; ++j) {
    const std::uint64_t row = stats.counts[j][0] + stats.counts[j][1] + stats.counts[j][2];
    stats.row_estimated[j] = row > 0;
    const double denom = static_cast<double>(row);
    double* fields[2][3] = {{&stats.p_hat.p0v, &stats.p_hat.p00, &stats.p_hat.p01},
                            {&stats.p_hat.p1v, &stats.p_hat.p10, &stats.p_hat.p11}};
    for (int x = 0; x < 3; ++x) {
      *fields[j][x] = row > 0 ? static_cast<double>(stats.counts[j][x]) / denom : nan;
    }
  }
  if (stats.n_control > 0) {
    const std::uint64_t nonvac = stats.counts[0][1] + stats.counts[0][2] + stats.counts[1][1] +
                                 stats.counts[1][2];
    stats.eta_fwd_hat = static_cast<double>(nonvac) / static_cast<double>(stats.n_control);
    if (stats.n_message > 0 && stats.eta_fwd_hat > 0.0) {
      const double detect_frac =
          static_cast<double>(stats.n_detected) / static_cast<double>(stats.n_message);
      stats.eta_bwd_hat = detect_frac / stats.eta_fwd_hat;
      stats.eta_estimated = true;
    }
  }
  if (stats.qber_hat.denominator > 0) {
    stats.qber_hat.value = static_cast<double>(stats.qber_hat.numerator) /
                           static_cast<double>(stats.qber_hat.denominator);
    stats.qber_hat.defined = true;
  }
  return stats;
}

SessionResult run_session(const SessionConfig& config, const AttackParams& fwd,
                          const BackwardChannelParams& bwd) {
  config.validate();
  fwd.validate();
  bwd.validate();

  const SessionTables tables = build_tables(fwd, bwd);
  const double c = config.message_mode_prob;

  SessionResult result;
  result.outcomes.reserve(config.n_trials);
  for (std::uint64_t trial = 0; trial < config.n_trials; ++trial) {
    SplitMix64 rng = trial_stream(config.rng_seed, trial);
    const bool alice_message = rng.next_uniform() < c;
    const bool bob_message = rng.next_uniform() < c;
    const double u_alice = rng.next_uniform();
    const double u_bob = rng.next_uniform();

    TrialOutcome o{};
    o.mode_alice = alice_message ? Mode::Message : Mode::Control;
    o.mode_bob = bob_message ? Mode::Message : Mode::Control;
    o.alice_bit = -1;
    o.alice_op = -1;
    o.alice_ctrl = -1;

    int ctrl_x = -1;
    int op_idx = -1;
    if (alice_message) {
      op_idx = std::min(3, static_cast<int>(u_alice * 4.0));
      o.alice_op = static_cast<std::int8_t>(op_idx);
      o.alice_bit = encoding_ops()[op_idx].key_bit;
    } else {
      ctrl_x = static_cast<int>(sample_cumulative(tables.alice_ctrl_marginal, u_alice));
      o.alice_ctrl = static_cast<std::int8_t>(ctrl_x);
    }

    if (bob_message) {
      const auto& weights =
          alice_message ? tables.bsm_by_op[op_idx] : tables.bsm_by_ctrl[ctrl_x];
      o.bob_result = kBellOrder[sample_cumulative(weights, u_bob)];
    } else {
      const auto& home = alice_message ? tables.home_marginal : tables.home_given_ctrl[ctrl_x];
      o.bob_result = u_bob < home[0] ? BobResult::Z0 : BobResult::Z1;
    }
    result.outcomes.push_back(o);
  }

  result.statistics = estimate_statistics(result.outcomes, config.psi_outcome_policy);
  const ObservedStatistics& s = result.statistics;

  // Derive the bound inputs; any unestimable piece degrades to a rate-0
  // report with a diagnostic rather than a guess.
  const double branch0_nonvac = s.row_estimated[0] ? s.p_hat.p00 + s.p_hat.p01 : 0.0;
  const double branch1_nonvac = s.row_estimated[1] ? s.p_hat.p10 + s.p_hat.p11 : 0.0;
  if (!s.row_estimated[0] || !s.row_estimated[1]) {
    result.diagnostic = "control-mode rows unestimated; rate fixed at 0";
  } else if (branch0_nonvac <= 0.0 || branch1_nonvac <= 0.0) {
    result.diagnostic = "a control row saw only vacuum; rate fixed at 0";
  } else if (!s.eta_estimated) {
    result.diagnostic = "backward efficiency unestimated; rate fixed at 0";
  } else if (!s.qber_hat.defined) {
    result.diagnostic = "no detected message rounds; qber undefined, rate fixed at 0";
  }
  if (!result.diagnostic.empty()) {
    result.report.degenerate = true;
    if (s.qber_hat.defined) result.report.qber = s.qber_hat.value;
    return result;
  }

  result.report = key_rate(s.p_hat.p01 / branch0_nonvac, s.p_hat.p10 / branch1_nonvac,
                           std::clamp(s.eta_bwd_hat, 0.0, 1.0), s.qber_hat.value);
  return result;
}

}  // namespace ppqkd
