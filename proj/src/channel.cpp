#include "ppqkd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ppqkd {

void ChannelParams::validate() const {
  if (!(distance_km >= 0.0)) {
    throw std::invalid_argument("ChannelParams: distance_km must be non-negative");
  }
  if (!(attenuation_db_per_km >= 0.0)) {
    throw std::invalid_argument("ChannelParams: attenuation_db_per_km must be non-negative");
  }
  auto check = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(std::string("ChannelParams: ") + name + " out of [0,1]");
    }
  };
  check(detector_efficiency, "detector_efficiency");
  check(dark_count_prob, "dark_count_prob");
  check(misalignment, "misalignment");
}

double fiber_efficiency(double distance_km, double attenuation_db_per_km) {
  if (!(distance_km >= 0.0)) {
    throw std::invalid_argument("fiber_efficiency: distance must be non-negative");
  }
  return std::pow(10.0, -attenuation_db_per_km * distance_km / 10.0);
}

double forward_error(const ChannelParams& params) {
  params.validate();
  const double eta = fiber_efficiency(params.distance_km, params.attenuation_db_per_km);
  const double coupled = eta * params.detector_efficiency;
  const double den = coupled + 2.0 * (1.0 - coupled) * params.dark_count_prob;
  if (den == 0.0) {
    throw DegenerateChannelError("forward_error: no detection probability (eta_d and p_d both 0)");
  }
  return (coupled * params.misalignment + (1.0 - coupled) * params.dark_count_prob) / den;
}

double message_qber(const ChannelParams& params) {
  params.validate();
  const double eta = fiber_efficiency(params.distance_km, params.attenuation_db_per_km);
  const double eta2 = eta * eta;
  const double eta_d = params.detector_efficiency;
  const double num = (1.0 - eta2) * eta2 * eta_d * params.dark_count_prob;
  const double den =
      eta2 * eta2 * eta_d * eta_d + 2.0 * (1.0 - eta2) * eta2 * eta_d * params.dark_count_prob;
  if (den == 0.0) {
    throw DegenerateChannelError("message_qber: no coincidence probability");
  }
  return num / den;
}

KeyRateReport overall_rate(const ChannelParams& params) {
  const double eta = fiber_efficiency(params.distance_km, params.attenuation_db_per_km);
  const double flip = forward_error(params);
  KeyRateReport report = key_rate(flip, flip, eta, message_qber(params));
  report.prefactor = eta * eta * eta * eta;
  report.rate_raw *= report.prefactor;
  report.rate = std::max(0.0, report.rate_raw);
  return report;
}

SweepResult sweep(const ChannelParams& params_template, const std::vector<double>& distances) {
  if (distances.empty()) {
    throw std::invalid_argument("sweep: distance list must be non-empty");
  }
  SweepResult result;
  result.points.reserve(distances.size());
  ChannelParams p = params_template;
  for (double d : distances) {
    if (!(d >= 0.0)) throw std::invalid_argument("sweep: distances must be non-negative");
    p.distance_km = d;
    result.points.push_back({d, overall_rate(p)});
  }

  auto raw_at = [&](double d) {
    ChannelParams q = params_template;
    q.distance_km = d;
    return overall_rate(q).rate_raw;
  };
  for (std::size_t i = 0; i + 1 < result.points.size(); ++i) {
    const double r_lo = result.points[i].report.rate_raw;
    const double r_hi = result.points[i + 1].report.rate_raw;
    if (r_lo > 0.0 && r_hi <= 0.0) {
      double lo = result.points[i].distance_km;
      double hi = result.points[i + 1].distance_km;
      while (hi - lo > 0.01) {
        const double mid = 0.5 * (lo + hi);
        (raw_at(mid) > 0.0 ? lo : hi) = mid;
      }
      result.cutoff_km = 0.5 * (lo + hi);
      break;
    }
  }
  return result;
}

std::pair<AttackParams, BackwardChannelParams> loss_map(const ChannelParams& params) {
  const double eta = fiber_efficiency(params.distance_km, params.attenuation_db_per_km);
  const double flip = forward_error(params);
  AttackParams fwd{};
  fwd.p0v = fwd.p1v = 1.0 - eta;
  fwd.p00 = fwd.p11 = eta * (1.0 - flip);
  fwd.p01 = fwd.p10 = eta * flip;
  BackwardChannelParams bwd{};
  bwd.q_v0 = bwd.q_v1 = 1.0 - eta;
  bwd.q_00 = bwd.q_11 = eta * (1.0 - flip);
  bwd.q_01 = bwd.q_10 = eta * flip;
  return {fwd, bwd};
}

}  // namespace ppqkd
