#pragma once

#include "ppqkd/qmath.hpp"

namespace ppqkd {

/// Final secret-key-rate bound together with every intermediate quantity.
/// rate_raw = prefactor * (eve_bound - h_e) and may be negative; rate is the
/// clamped presentation value max(0, rate_raw). prefactor is 1 for
/// per-detected-pair reports and the per-trial detection factor otherwise.
struct KeyRateReport {
  double p01_prime = 0.0;
  double p10_prime = 0.0;
  double eta_bwd = 0.0;
  double qber = 0.0;
  double h_fwd = 0.0;      // (H(p01') + H(p10')) / 2
  double eve_bound = 0.0;  // 1 - h_fwd / eta_bwd
  double h_e = 0.0;        // H(qber)
  double rate_raw = 0.0;
  double rate = 0.0;
  double prefactor = 1.0;
  bool degenerate = false;  // no backward transmission; rate fixed at 0
};

/// Average branch entropy deficit (H(p01') + H(p10')) / 2 in bits.
double forward_entropy_bound(double p01_prime, double p10_prime);

/// Lower bound on Eve's conditional entropy restricted to received rounds:
/// 1 - h_fwd_avg / eta_bwd. May be negative; the caller interprets.
/// Throws DegenerateChannelError when eta_bwd is 0.
double received_entropy_bound(double h_fwd_avg, double eta_bwd);

/// Full bound chain from forward conditional error probabilities, backward
/// efficiency and error rate. eta_bwd = 0 yields a degenerate-flagged
/// report with rate 0 instead of throwing.
KeyRateReport key_rate(double p01_prime, double p10_prime, double eta_bwd, double qber);

}  // namespace ppqkd
