#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ppqkd/attack.hpp"
#include "ppqkd/bounds.hpp"
#include "ppqkd/protocol.hpp"

namespace ppqkd {

/// Fiber-and-detector model parameters. Defaults are the off-the-shelf
/// experimental values used for the distance sweep.
struct ChannelParams {
  double distance_km = 0.0;
  double attenuation_db_per_km = 0.20;
  double detector_efficiency = 0.10;  // eta_d
  double dark_count_prob = 1e-5;      // p_d per gate
  double misalignment = 0.01;         // d_e

  void validate() const;
};

/// Fiber transmission efficiency 10^(-attenuation * distance / 10).
double fiber_efficiency(double distance_km, double attenuation_db_per_km);

/// Conditional forward flip probability p01' (= p10' by symmetry):
/// (eta*eta_d*d_e + (1 - eta*eta_d)*p_d) / (eta*eta_d + 2*(1 - eta*eta_d)*p_d).
double forward_error(const ChannelParams& params);

/// Message-mode error rate from detector dark counts:
/// (1-eta^2)*eta^2*eta_d*p_d / (eta^4*eta_d^2 + 2*(1-eta^2)*eta^2*eta_d*p_d).
double message_qber(const ChannelParams& params);

/// Per-trial rate at one distance: the bound chain evaluated at
/// (forward_error, forward_error, eta, message_qber) scaled by the eta^4
/// detection prefactor for the round home-qubit channel.
KeyRateReport overall_rate(const ChannelParams& params);

struct SweepPoint {
  double distance_km;
  KeyRateReport report;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  /// Zero crossing of rate_raw, bisected to 0.01 km between the first pair
  /// of sweep points that brackets a sign change; absent if none does.
  std::optional<double> cutoff_km;
};

SweepResult sweep(const ChannelParams& params_template, const std::vector<double>& distances);

/// Loss+flip channel pair matching this physical model: both directions
/// lose with probability 1-eta and flip surviving qubits with probability
/// forward_error. Lets run_session validate the analytic chain.
std::pair<AttackParams, BackwardChannelParams> loss_map(const ChannelParams& params);

}  // namespace ppqkd
