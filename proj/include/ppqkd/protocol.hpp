#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ppqkd/attack.hpp"
#include "ppqkd/bounds.hpp"
#include "ppqkd/qmath.hpp"

namespace ppqkd {

enum class PsiOutcomePolicy { CountAsError, Discard };

/// Monte Carlo session parameters. message_mode_prob is the probability c
/// that a party picks message mode, drawn independently by Alice and Bob
/// each trial.
struct SessionConfig {
  std::uint64_t n_trials = 0;
  double message_mode_prob = 0.5;
  std::uint64_t rng_seed = 0;
  PsiOutcomePolicy psi_outcome_policy = PsiOutcomePolicy::CountAsError;

  void validate() const;
};

/// Honest backward-channel transition probabilities for non-vacuum inputs;
/// the vacuum is transmitted unchanged. Rows (conditioned on |0> resp. |1>
/// input) must each sum to 1. Symmetric loss gives backward efficiency
/// eta_bwd = q_00 + q_01 = q_10 + q_11.
struct BackwardChannelParams {
  double q_v0, q_00, q_01, q_v1, q_10, q_11;

  void validate() const;

  static BackwardChannelParams identity() { return {0.0, 1.0, 0.0, 0.0, 0.0, 1.0}; }
  static BackwardChannelParams pure_loss() { return {1.0, 0.0, 0.0, 1.0, 0.0, 0.0}; }
};

// Kraus realizations of the Monte Carlo channels. These reproduce the
// configured transition probabilities with a single coherent no-change
// operator, i.e. the honest loss+flip channel: an identity parameter set
// transmits entanglement intact. (The six-operator form in attack.hpp
// models Eve holding a which-branch record and fully dephases; it is the
// object of the security analysis, not of the honest simulation.)
std::vector<ComplexMatrix> loss_flip_forward_kraus(const AttackParams& params);
std::vector<ComplexMatrix> loss_flip_backward_kraus(const BackwardChannelParams& params);

enum class Mode : std::uint8_t { Message, Control };

enum class BobResult : std::uint8_t {
  PhiPlus,
  PhiMinus,
  PsiPlus,
  PsiMinus,
  NoDetection,
  Z0,
  Z1,
};

struct TrialOutcome {
  Mode mode_alice;
  Mode mode_bob;
  std::int8_t alice_bit;   // 0/1 when Alice was in message mode, else -1
  std::int8_t alice_op;    // EncodingLabel index when in message mode, else -1
  BobResult bob_result;
  std::int8_t alice_ctrl;  // 0=|v>, 1=|0>, 2=|1> when in control mode, else -1
};

struct QberEstimate {
  double value = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
  bool defined = false;
};

/// Control-mode and message-mode estimates shared in step 4.
struct ObservedStatistics {
  /// counts[j][x]: both-control trials with Bob home result j and Alice
  /// control result x (0=|v>, 1=|0>, 2=|1>).
  std::array<std::array<std::uint64_t, 3>, 2> counts{};
  /// Row-conditional forward estimates p_hat[jx] = counts[j][x] / row j.
  AttackParams p_hat{};
  std::array<bool, 2> row_estimated{false, false};
  double eta_fwd_hat = std::numeric_limits<double>::quiet_NaN();
  double eta_bwd_hat = std::numeric_limits<double>::quiet_NaN();
  bool eta_estimated = false;
  QberEstimate qber_hat{};
  std::uint64_t n_message = 0;   // trials where both chose message mode
  std::uint64_t n_control = 0;   // trials where both chose control mode
  std::uint64_t n_detected = 0;  // message trials with any Bell click
};

/// Born weights of a Bell measurement on a home-qubit ⊗ travel-qutrit
/// state, in the fixed cumulative ordering
/// (no_detection, Phi+, Phi-, Psi+, Psi-).
std::array<double, 5> bell_weights(const DensityOperator& rho);

/// Samples the Bell measurement with the supplied uniform draw in [0,1),
/// walking the cumulative ordering above.
BobResult bell_measure(const DensityOperator& rho, double rng_draw);

// Exact per-step state evolution on the home ⊗ travel system (2 ⊗ 3).
// run_session samples from Born distributions of states built this way.
DensityOperator state_after_forward(const AttackParams& params);
DensityOperator apply_encoding(const DensityOperator& rho, EncodingLabel op);
DensityOperator apply_backward(const DensityOperator& rho, const BackwardChannelParams& params);

/// Aggregates trial outcomes into the shared statistics. Only both-control
/// trials feed the p_hat rows and only both-message trials feed the
/// detection and error estimates; mixed-mode trials are discarded.
ObservedStatistics estimate_statistics(const std::vector<TrialOutcome>& outcomes,
                                       PsiOutcomePolicy policy = PsiOutcomePolicy::CountAsError);

struct SessionResult {
  ObservedStatistics statistics;
  KeyRateReport report;
  std::string diagnostic;  // empty when the full bound chain was evaluable
  std::vector<TrialOutcome> outcomes;
};

/// Simulates n_trials independent rounds of the modified protocol and
/// evaluates the key-rate bound on the estimated statistics. Deterministic
/// in (rng_seed, n_trials, channels): each trial consumes exactly four
/// uniform draws from its own substream, in the order Alice mode, Bob
/// mode, Alice action, Bob action.
SessionResult run_session(const SessionConfig& config, const AttackParams& fwd,
                          const BackwardChannelParams& bwd);

/// splitmix64; the per-trial substream generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

SplitMix64 trial_stream(std::uint64_t seed, std::uint64_t trial_index);

}  // namespace ppqkd
