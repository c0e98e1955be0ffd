#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "ppqkd/attack.hpp"
#include "ppqkd/bounds.hpp"
#include "ppqkd/channel.hpp"
#include "ppqkd/protocol.hpp"

namespace ppqkd {

/// One JSON document drives every command: all sections optional, unknown
/// keys rejected so typos surface as validation errors.
struct Config {
  std::optional<AttackParams> attack;
  std::optional<BackwardChannelParams> backward;
  std::optional<ChannelParams> channel;
  std::optional<SessionConfig> session;
};

Config parse_config(const nlohmann::json& doc);
Config load_config(const std::string& path);  // throws std::invalid_argument / IoError

nlohmann::json to_json(const AttackParams& p);
nlohmann::json to_json(const BackwardChannelParams& p);
nlohmann::json to_json(const ChannelParams& p);
nlohmann::json to_json(const SessionConfig& c);
nlohmann::json to_json(const Config& c);
nlohmann::json to_json(const KeyRateReport& r);
nlohmann::json to_json(const ObservedStatistics& s);
nlohmann::json to_json(const SweepResult& s);

AttackParams attack_from_json(const nlohmann::json& j);
BackwardChannelParams backward_from_json(const nlohmann::json& j);
ChannelParams channel_from_json(const nlohmann::json& j);
SessionConfig session_from_json(const nlohmann::json& j);

std::string psi_policy_name(PsiOutcomePolicy policy);
PsiOutcomePolicy psi_policy_from_name(const std::string& name);

std::string bob_result_name(BobResult r);

/// Sweep rows as CSV with the fixed column set
/// distance_km,eta,p01_prime,qber,rate_raw,rate,lg_rate.
/// lg_rate is log10(rate), left empty when the rate is non-positive.
std::string sweep_to_csv(const SweepResult& s);

/// Per-trial transcript with columns trial,mode_a,mode_b,op,bob_result,alice_ctrl.
std::string transcript_to_csv(const std::vector<TrialOutcome>& outcomes);

}  // namespace ppqkd
