#include "ppqkd/bounds.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ppqkd {

namespace {

double checked_probability(double p, const char* name) {
  if (!(p >= -kProbabilityTol && p <= 1.0 + kProbabilityTol)) {
    throw std::invalid_argument(std::string(name) + " out of [0,1]: " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double forward_entropy_bound(double p01_prime, double p10_prime) {
  p01_prime = checked_probability(p01_prime, "p01_prime");
  p10_prime = checked_probability(p10_prime, "p10_prime");
  return 0.5 * (binary_entropy(p01_prime) + binary_entropy(p10_prime));
}

double received_entropy_bound(double h_fwd_avg, double eta_bwd) {
  if (h_fwd_avg < 0.0) {
    throw std::invalid_argument("h_fwd_avg must be non-negative");
  }
  eta_bwd = checked_probability(eta_bwd, "eta_bwd");
  if (eta_bwd == 0.0) {
    throw DegenerateChannelError("received_entropy_bound: zero backward efficiency");
  }
  return 1.0 - h_fwd_avg / eta_bwd;
}

KeyRateReport key_rate(double p01_prime, double p10_prime, double eta_bwd, double qber) {
  KeyRateReport report;
  report.p01_prime = checked_probability(p01_prime, "p01_prime");
  report.p10_prime = checked_probability(p10_prime, "p10_prime");
  report.eta_bwd = checked_probability(eta_bwd, "eta_bwd");
  report.qber = checked_probability(qber, "qber");
  report.h_fwd = forward_entropy_bound(report.p01_prime, report.p10_prime);
  report.h_e = binary_entropy(report.qber);
  report.prefactor = 1.0;
  if (report.eta_bwd == 0.0) {
    report.degenerate = true;
    return report;
  }
  report.eve_bound = received_entropy_bound(report.h_fwd, report.eta_bwd);
  report.rate_raw = report.eve_bound - report.h_e;
  report.rate = std::max(0.0, report.rate_raw);
  return report;
}

}  // namespace ppqkd
