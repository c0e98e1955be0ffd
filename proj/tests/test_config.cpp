#include <doctest.h>

#include <fstream>

#include "ppqkd/config.hpp"
#include "ppqkd/manifest.hpp"
#include "ppqkd/version.hpp"
#include "test_support.hpp"

using namespace ppqkd;
using nlohmann::json;

TEST_CASE("attack/backward/channel/session JSON round trips") {
  std::mt19937_64 rng(113);
  const AttackParams a = test::random_attack(rng);
  const AttackParams a2 = attack_from_json(to_json(a));
  CHECK(a2.p0v == a.p0v);
  CHECK(a2.p01 == a.p01);
  CHECK(a2.p11 == a.p11);

  const BackwardChannelParams b = test::random_backward(rng);
  const BackwardChannelParams b2 = backward_from_json(to_json(b));
  CHECK(b2.q_v0 == b.q_v0);
  CHECK(b2.q_10 == b.q_10);

  ChannelParams c;
  c.distance_km = 37.5;
  c.dark_count_prob = 2e-6;
  const ChannelParams c2 = channel_from_json(to_json(c));
  CHECK(c2.distance_km == 37.5);
  CHECK(c2.dark_count_prob == 2e-6);
  CHECK(c2.detector_efficiency == 0.10);

  const SessionConfig s{12345, 0.25, 99, PsiOutcomePolicy::Discard};
  const SessionConfig s2 = session_from_json(to_json(s));
  CHECK(s2.n_trials == 12345);
  CHECK(s2.message_mode_prob == 0.25);
  CHECK(s2.rng_seed == 99);
  CHECK(s2.psi_outcome_policy == PsiOutcomePolicy::Discard);
}

TEST_CASE("config parsing rejects unknown and malformed keys by name") {
  CHECK_THROWS_WITH_AS(parse_config(json{{"atack", json::object()}}),
                       doctest::Contains("unknown key 'atack'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      attack_from_json(json{{"p0w", 1.0}}),
      doctest::Contains("unknown key 'p0w'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      attack_from_json(json{{"p0v", 1.0}, {"p00", 0.0}, {"p01", 0.0}, {"p1v", 1.0}, {"p10", 0.0}}),
      doctest::Contains("p11"), std::invalid_argument);
  CHECK_THROWS_AS(session_from_json(json{{"n_trials", -5}}), std::invalid_argument);
  CHECK_THROWS_AS(session_from_json(json{{"psi_outcome_policy", "sometimes"}}),
                  std::invalid_argument);
}

TEST_CASE("load_config: file errors and parse errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/nope.json"), IoError);

  const auto dir = test::fresh_dir("config_parse");
  const auto bad = dir / "bad.json";
  write_file_atomic(bad, "{ not json");
  CHECK_THROWS_AS(load_config(bad.string()), std::invalid_argument);

  const auto good = dir / "good.json";
  write_file_atomic(good, R"({"channel": {"distance_km": 12.0}})");
  const Config cfg = load_config(good.string());
  REQUIRE(cfg.channel.has_value());
  CHECK(cfg.channel->distance_km == 12.0);
  CHECK_FALSE(cfg.attack.has_value());
}

TEST_CASE("shipped example configs validate against the config schema") {
  const json schema = test::load_schema("config.schema.json");
  for (const char* name : {"example.json", "attack_example.json"}) {
    const auto path = std::filesystem::path(PPQKD_SOURCE_DIR) / "configs" / name;
    const json doc = json::parse(read_file(path));
    std::string err;
    CHECK_MESSAGE(test::schema_check(schema, doc, err), err);
    CHECK_NOTHROW(parse_config(doc));
  }
}

TEST_CASE("emitted JSON validates against the shipped schemas") {
  std::string err;

  const KeyRateReport report = key_rate(0.01, 0.02, 0.5, 0.03);
  CHECK_MESSAGE(test::schema_check(test::load_schema("keyrate_report.schema.json"),
                                   to_json(report), err),
                err);

  const SessionConfig config{4000, 0.5, 3, PsiOutcomePolicy::CountAsError};
  std::mt19937_64 rng(127);
  const SessionResult session =
      run_session(config, test::random_attack(rng, 0.2), test::random_backward(rng));
  CHECK_MESSAGE(test::schema_check(test::load_schema("statistics.schema.json"),
                                   to_json(session.statistics), err),
                err);

  const SweepResult swept = sweep(ChannelParams{}, {0.0, 25.0, 50.0});
  json sweep_doc = to_json(swept);
  sweep_doc["channel"] = to_json(ChannelParams{});
  CHECK_MESSAGE(test::schema_check(test::load_schema("sweep.schema.json"), sweep_doc, err), err);

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.parameters = {{"channel", to_json(ChannelParams{})}};
  manifest.version = kVersion;
  manifest.output_checksums["x.csv"] = "fnv1a64:0000000000000000";
  CHECK_MESSAGE(
      test::schema_check(test::load_schema("manifest.schema.json"), to_json(manifest), err), err);
}

TEST_CASE("sweep CSV: fixed header, null lg_rate for non-positive rates") {
  std::vector<double> distances = {0.0, 50.0, 55.0};
  const SweepResult result = sweep(ChannelParams{}, distances);
  const std::string csv = sweep_to_csv(result);
  CHECK(csv.rfind("distance_km,eta,p01_prime,qber,rate_raw,rate,lg_rate\n", 0) == 0);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);  // 0 km: positive rate, lg_rate present
  CHECK(line.back() != ',');
  std::getline(lines, line);
  std::getline(lines, line);  // 55 km: clamped rate, empty lg_rate
  CHECK(line.back() == ',');
}

TEST_CASE("transcript CSV lists one row per trial") {
  const SessionConfig config{50, 0.5, 21, PsiOutcomePolicy::CountAsError};
  const SessionResult result =
      run_session(config, AttackParams::identity(), BackwardChannelParams::identity());
  const std::string csv = transcript_to_csv(result.outcomes);
  CHECK(csv.rfind("trial,mode_a,mode_b,op,bob_result,alice_ctrl\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);
  CHECK(csv.find("phi_plus") != std::string::npos);
}

TEST_CASE("fnv1a64 checksum and atomic write") {
  CHECK(fnv1a64("") == 0xCBF29CE484222325ull);
  const auto dir = test::fresh_dir("manifest_io");
  const auto path = dir / "artifact.txt";
  write_file_atomic(path, "hello");
  CHECK(read_file(path) == "hello");
  CHECK(file_checksum(path) == file_checksum(path));
  CHECK_THROWS_AS(write_file_atomic("/nonexistent-dir/x.txt", "x"), IoError);
}
