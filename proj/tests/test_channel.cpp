#include <doctest.h>

#include <cmath>

#include "ppqkd/channel.hpp"
#include "ppqkd/config.hpp"
#include "test_support.hpp"

using namespace ppqkd;

namespace {

ChannelParams noiseless_at(double km) {
  ChannelParams p;
  p.distance_km = km;
  p.dark_count_prob = 0.0;
  p.misalignment = 0.0;
  return p;
}

// Expected message-mode error rate of the Monte Carlo under
// count-as-error, from the exact per-operation Born weights.
double expected_mc_qber(const AttackParams& fwd, const BackwardChannelParams& bwd) {
  const DensityOperator rho = state_after_forward(fwd);
  double err = 0.0, detected = 0.0;
  for (std::size_t op = 0; op < 4; ++op) {
    const auto w = bell_weights(apply_backward(
        apply_encoding(rho, static_cast<EncodingLabel>(op)), bwd));
    const int bit = encoding_ops()[op].key_bit;
    const double wrong_phi = bit == 0 ? w[2] : w[1];
    err += 0.25 * (wrong_phi + w[3] + w[4]);
    detected += 0.25 * (w[1] + w[2] + w[3] + w[4]);
  }
  return err / detected;
}

}  // namespace

TEST_CASE("fiber_efficiency: anchors and multiplicativity") {
  CHECK(fiber_efficiency(0.0, 0.20) == 1.0);
  CHECK(fiber_efficiency(50.0, 0.20) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(fiber_efficiency(15.0, 0.20) == doctest::Approx(0.5011872336272722).epsilon(1e-13));
  std::mt19937_64 rng(109);
  std::uniform_real_distribution<double> uni(0.0, 80.0);
  for (int i = 0; i < 20; ++i) {
    const double a = uni(rng), b = uni(rng);
    CHECK(std::abs(fiber_efficiency(a + b, 0.20) -
                   fiber_efficiency(a, 0.20) * fiber_efficiency(b, 0.20)) <= 1e-12);
  }
  CHECK_THROWS_AS(fiber_efficiency(-1.0, 0.20), std::invalid_argument);
}

TEST_CASE("forward_error: limits and the 50 km operating point") {
  CHECK(forward_error(noiseless_at(10.0)) == 0.0);

  ChannelParams misaligned_only;
  misaligned_only.distance_km = 0.0;
  misaligned_only.detector_efficiency = 1.0;
  misaligned_only.dark_count_prob = 0.0;
  misaligned_only.misalignment = 0.013;
  CHECK(forward_error(misaligned_only) == doctest::Approx(0.013).epsilon(1e-14));

  ChannelParams at50;
  at50.distance_km = 50.0;
  CHECK(forward_error(at50) == doctest::Approx(0.010968282800055889).epsilon(1e-12));

  ChannelParams dead;
  dead.detector_efficiency = 0.0;
  dead.dark_count_prob = 0.0;
  CHECK_THROWS_AS(forward_error(dead), DegenerateChannelError);
}

TEST_CASE("forward_error: dark-count floor at long distance") {
  ChannelParams far;
  far.distance_km = 500.0;
  CHECK(std::abs(forward_error(far) - 0.5) < 1e-4);
}

TEST_CASE("message_qber: limits and the 50 km operating point") {
  CHECK(message_qber(noiseless_at(10.0)) == 0.0);

  ChannelParams lossless;
  lossless.distance_km = 0.0;
  CHECK(message_qber(lossless) == 0.0);

  ChannelParams at50;
  at50.distance_km = 50.0;
  CHECK(message_qber(at50) == doctest::Approx(0.009707785840360855).epsilon(1e-12));

  ChannelParams dead;
  dead.detector_efficiency = 0.0;
  CHECK_THROWS_AS(message_qber(dead), DegenerateChannelError);
}

TEST_CASE("overall_rate: endpoints of the default curve") {
  const KeyRateReport perfect = overall_rate(noiseless_at(0.0));
  CHECK(std::abs(perfect.rate - 1.0) <= 1e-12);
  CHECK(perfect.prefactor == 1.0);

  ChannelParams at50;
  at50.distance_km = 50.0;
  const KeyRateReport r50 = overall_rate(at50);
  CHECK(r50.rate > 0.0);
  CHECK(r50.prefactor == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(r50.rate_raw / r50.prefactor == doctest::Approx(0.04969037869069431).epsilon(1e-9));

  ChannelParams at55;
  at55.distance_km = 55.0;
  const KeyRateReport r55 = overall_rate(at55);
  CHECK(r55.rate_raw < 0.0);
  CHECK(r55.rate == 0.0);
}

TEST_CASE("sweep: single noiseless point and the default cutoff") {
  const SweepResult single = sweep(noiseless_at(0.0), {0.0});
  REQUIRE(single.points.size() == 1);
  CHECK(std::abs(single.points[0].report.rate - 1.0) <= 1e-12);
  CHECK_FALSE(single.cutoff_km.has_value());

  std::vector<double> distances;
  for (int km = 0; km <= 60; ++km) distances.push_back(km);
  const SweepResult result = sweep(ChannelParams{}, distances);
  REQUIRE(result.points.size() == 61);
  REQUIRE(result.cutoff_km.has_value());
  CHECK(*result.cutoff_km > 45.0);
  CHECK(*result.cutoff_km < 60.0);
  CHECK(*result.cutoff_km == doctest::Approx(50.988).epsilon(5e-4));

  // Strictly decreasing over the positive-rate region.
  for (std::size_t i = 0; i + 1 < result.points.size(); ++i) {
    if (result.points[i + 1].report.rate > 0.0) {
      CHECK(result.points[i + 1].report.rate < result.points[i].report.rate);
    }
  }

  CHECK(sweep_to_csv(result) == sweep_to_csv(sweep(ChannelParams{}, distances)));
  CHECK_THROWS_AS(sweep(ChannelParams{}, {}), std::invalid_argument);
}

TEST_CASE("loss_map: valid channel pair matching eta and flip") {
  ChannelParams at25;
  at25.distance_km = 25.0;
  const auto [fwd, bwd] = loss_map(at25);
  CHECK_NOTHROW(fwd.validate());
  CHECK_NOTHROW(bwd.validate());
  const double eta = fiber_efficiency(25.0, 0.20);
  const double flip = forward_error(at25);
  CHECK(fwd.p00 + fwd.p01 == doctest::Approx(eta).epsilon(1e-12));
  CHECK(fwd.p01 / (fwd.p00 + fwd.p01) == doctest::Approx(flip).epsilon(1e-12));
  CHECK(bwd.q_00 + bwd.q_01 == doctest::Approx(eta).epsilon(1e-12));
}

TEST_CASE("loss_map + run_session reproduces the analytic estimation chain") {
  ChannelParams at25;
  at25.distance_km = 25.0;
  const auto [fwd, bwd] = loss_map(at25);
  const double eta = fiber_efficiency(25.0, 0.20);
  const double flip = forward_error(at25);

  const SessionConfig config{100000, 0.5, 20240501, PsiOutcomePolicy::CountAsError};
  const SessionResult result = run_session(config, fwd, bwd);
  const ObservedStatistics& s = result.statistics;

  const std::uint64_t m0 = s.counts[0][1] + s.counts[0][2];
  REQUIRE(m0 > 100);
  const double p01_est = s.p_hat.p01 / (s.p_hat.p00 + s.p_hat.p01);
  const double sigma_p = std::sqrt(flip * (1.0 - flip) / static_cast<double>(m0));
  CHECK(std::abs(p01_est - flip) <= 4.0 * sigma_p);

  const double sigma_eta_fwd = std::sqrt(eta * (1.0 - eta) / static_cast<double>(s.n_control));
  CHECK(std::abs(s.eta_fwd_hat - eta) <= 4.0 * sigma_eta_fwd);

  const double p_detect = eta * eta;
  const double var_bwd =
      eta * eta *
      ((1.0 - p_detect) / (static_cast<double>(s.n_message) * p_detect) +
       (1.0 - eta) / (static_cast<double>(s.n_control) * eta));
  CHECK(std::abs(s.eta_bwd_hat - eta) <= 4.0 * std::sqrt(var_bwd));

  // The reported rate equals the bound chain evaluated at the estimates.
  const KeyRateReport recomputed =
      key_rate(p01_est, s.p_hat.p10 / (s.p_hat.p10 + s.p_hat.p11),
               std::min(1.0, s.eta_bwd_hat), s.qber_hat.value);
  CHECK(result.report.rate_raw == doctest::Approx(recomputed.rate_raw).epsilon(1e-12));

  // And it agrees with the analytic chain evaluated at the configured
  // channel values, within a first-order 4-sigma envelope.
  const double e_exp = expected_mc_qber(fwd, bwd);
  const double sigma_e =
      std::sqrt(e_exp * (1.0 - e_exp) / static_cast<double>(s.qber_hat.denominator));
  CHECK(std::abs(s.qber_hat.value - e_exp) <= 4.0 * sigma_e);

  const double expected_rate = key_rate(flip, flip, eta, e_exp).rate_raw;
  auto partial = [&](auto f, double x, double sigma) {
    const double h = std::max(1e-6, 1e-3 * std::abs(x));
    return std::abs((f(x + h) - f(x - h)) / (2.0 * h)) * sigma;
  };
  const double d_p = partial(
      [&](double x) { return key_rate(x, flip, eta, e_exp).rate_raw; }, flip, sigma_p);
  const double d_eta = partial(
      [&](double x) { return key_rate(flip, flip, x, e_exp).rate_raw; }, eta,
      std::sqrt(var_bwd));
  const double d_e = partial(
      [&](double x) { return key_rate(flip, flip, eta, x).rate_raw; }, e_exp, sigma_e);
  const double sigma_rate = std::sqrt(2.0 * d_p * d_p + d_eta * d_eta + d_e * d_e);
  CHECK(std::abs(result.report.rate_raw - expected_rate) <= 4.0 * sigma_rate);
}
