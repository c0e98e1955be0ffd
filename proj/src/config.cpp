#include "ppqkd/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>

#include "ppqkd/errors.hpp"

namespace ppqkd {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw std::invalid_argument(section + ": expected a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end()) {
      throw std::invalid_argument(section + ": unknown key '" + it.key() + "'");
    }
  }
}

double require_number(const json& j, const std::string& section, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(section + ": missing or non-numeric key '" + key + "'");
  }
  return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& section, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) {
    throw std::invalid_argument(section + ": non-numeric key '" + key + "'");
  }
  return j.at(key).get<double>();
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

AttackParams attack_from_json(const json& j) {
  check_keys(j, "attack", {"p0v", "p00", "p01", "p1v", "p10", "p11"});
  AttackParams p{};
  p.p0v = require_number(j, "attack", "p0v");
  p.p00 = require_number(j, "attack", "p00");
  p.p01 = require_number(j, "attack", "p01");
  p.p1v = require_number(j, "attack", "p1v");
  p.p10 = require_number(j, "attack", "p10");
  p.p11 = require_number(j, "attack", "p11");
  p.validate();
  return p;
}

BackwardChannelParams backward_from_json(const json& j) {
  check_keys(j, "backward", {"q_v0", "q_00", "q_01", "q_v1", "q_10", "q_11"});
  BackwardChannelParams p{};
  p.q_v0 = require_number(j, "backward", "q_v0");
  p.q_00 = require_number(j, "backward", "q_00");
  p.q_01 = require_number(j, "backward", "q_01");
  p.q_v1 = require_number(j, "backward", "q_v1");
  p.q_10 = require_number(j, "backward", "q_10");
  p.q_11 = require_number(j, "backward", "q_11");
  p.validate();
  return p;
}

ChannelParams channel_from_json(const json& j) {
  check_keys(j, "channel",
             {"distance_km", "attenuation_db_per_km", "detector_efficiency", "dark_count_prob",
              "misalignment"});
  ChannelParams p{};
  p.distance_km = number_or(j, "channel", "distance_km", p.distance_km);
  p.attenuation_db_per_km =
      number_or(j, "channel", "attenuation_db_per_km", p.attenuation_db_per_km);
  p.detector_efficiency = number_or(j, "channel", "detector_efficiency", p.detector_efficiency);
  p.dark_count_prob = number_or(j, "channel", "dark_count_prob", p.dark_count_prob);
  p.misalignment = number_or(j, "channel", "misalignment", p.misalignment);
  p.validate();
  return p;
}

SessionConfig session_from_json(const json& j) {
  check_keys(j, "session", {"n_trials", "message_mode_prob", "rng_seed", "psi_outcome_policy"});
  SessionConfig c{};
  c.n_trials = 10000;
  c.message_mode_prob = 0.5;
  c.rng_seed = 1;
  if (j.contains("n_trials")) {
    if (!j.at("n_trials").is_number_unsigned()) {
      throw std::invalid_argument("session: n_trials must be a positive integer");
    }
    c.n_trials = j.at("n_trials").get<std::uint64_t>();
  }
  c.message_mode_prob = number_or(j, "session", "message_mode_prob", c.message_mode_prob);
  if (j.contains("rng_seed")) {
    if (!j.at("rng_seed").is_number_unsigned()) {
      throw std::invalid_argument("session: rng_seed must be an unsigned integer");
    }
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  }
  if (j.contains("psi_outcome_policy")) {
    if (!j.at("psi_outcome_policy").is_string()) {
      throw std::invalid_argument("session: psi_outcome_policy must be a string");
    }
    c.psi_outcome_policy = psi_policy_from_name(j.at("psi_outcome_policy").get<std::string>());
  }
  c.validate();
  return c;
}

Config parse_config(const json& doc) {
  check_keys(doc, "config", {"attack", "backward", "channel", "session"});
  Config cfg;
  if (doc.contains("attack")) cfg.attack = attack_from_json(doc.at("attack"));
  if (doc.contains("backward")) cfg.backward = backward_from_json(doc.at("backward"));
  if (doc.contains("channel")) cfg.channel = channel_from_json(doc.at("channel"));
  if (doc.contains("session")) cfg.session = session_from_json(doc.at("session"));
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const AttackParams& p) {
  return {{"p0v", p.p0v}, {"p00", p.p00}, {"p01", p.p01},
          {"p1v", p.p1v}, {"p10", p.p10}, {"p11", p.p11}};
}

json to_json(const BackwardChannelParams& p) {
  return {{"q_v0", p.q_v0}, {"q_00", p.q_00}, {"q_01", p.q_01},
          {"q_v1", p.q_v1}, {"q_10", p.q_10}, {"q_11", p.q_11}};
}

json to_json(const ChannelParams& p) {
  return {{"distance_km", p.distance_km},
          {"attenuation_db_per_km", p.attenuation_db_per_km},
          {"detector_efficiency", p.detector_efficiency},
          {"dark_count_prob", p.dark_count_prob},
          {"misalignment", p.misalignment}};
}

json to_json(const SessionConfig& c) {
  return {{"n_trials", c.n_trials},
          {"message_mode_prob", c.message_mode_prob},
          {"rng_seed", c.rng_seed},
          {"psi_outcome_policy", psi_policy_name(c.psi_outcome_policy)}};
}

json to_json(const Config& c) {
  json doc = json::object();
  if (c.attack) doc["attack"] = to_json(*c.attack);
  if (c.backward) doc["backward"] = to_json(*c.backward);
  if (c.channel) doc["channel"] = to_json(*c.channel);
  if (c.session) doc["session"] = to_json(*c.session);
  return doc;
}

json to_json(const KeyRateReport& r) {
  return {{"p01_prime", r.p01_prime},
          {"p10_prime", r.p10_prime},
          {"eta_bwd", r.eta_bwd},
          {"qber", r.qber},
          {"h_fwd", r.h_fwd},
          {"eve_bound", r.eve_bound},
          {"h_e", r.h_e},
          {"rate_raw", r.rate_raw},
          {"rate", r.rate},
          {"prefactor", r.prefactor},
          {"degenerate", r.degenerate}};
}

json to_json(const ObservedStatistics& s) {
  json counts = {{"0", {{"v", s.counts[0][0]}, {"0", s.counts[0][1]}, {"1", s.counts[0][2]}}},
                 {"1", {{"v", s.counts[1][0]}, {"0", s.counts[1][1]}, {"1", s.counts[1][2]}}}};
  json p_hat = {{"p0v", finite_or_null(s.p_hat.p0v)}, {"p00", finite_or_null(s.p_hat.p00)},
                {"p01", finite_or_null(s.p_hat.p01)}, {"p1v", finite_or_null(s.p_hat.p1v)},
                {"p10", finite_or_null(s.p_hat.p10)}, {"p11", finite_or_null(s.p_hat.p11)}};
  return {{"counts", counts},
          {"p_hat", p_hat},
          {"row_estimated", {s.row_estimated[0], s.row_estimated[1]}},
          {"eta_fwd_hat", finite_or_null(s.eta_fwd_hat)},
          {"eta_bwd_hat", finite_or_null(s.eta_bwd_hat)},
          {"qber_hat",
           {{"value", s.qber_hat.defined ? json(s.qber_hat.value) : json(nullptr)},
            {"numerator", s.qber_hat.numerator},
            {"denominator", s.qber_hat.denominator},
            {"defined", s.qber_hat.defined}}},
          {"n_message", s.n_message},
          {"n_control", s.n_control},
          {"n_detected", s.n_detected}};
}

json to_json(const SweepResult& s) {
  json points = json::array();
  for (const SweepPoint& p : s.points) {
    points.push_back({{"distance_km", p.distance_km}, {"report", to_json(p.report)}});
  }
  return {{"points", points},
          {"cutoff_km", s.cutoff_km ? json(*s.cutoff_km) : json(nullptr)}};
}

std::string psi_policy_name(PsiOutcomePolicy policy) {
  return policy == PsiOutcomePolicy::CountAsError ? "count_as_error" : "discard";
}

PsiOutcomePolicy psi_policy_from_name(const std::string& name) {
  if (name == "count_as_error") return PsiOutcomePolicy::CountAsError;
  if (name == "discard") return PsiOutcomePolicy::Discard;
  throw std::invalid_argument("psi_outcome_policy must be 'count_as_error' or 'discard', got '" +
                              name + "'");
}

std::string bob_result_name(BobResult r) {
  switch (r) {
    case BobResult::PhiPlus: return "phi_plus";
    case BobResult::PhiMinus: return "phi_minus";
    case BobResult::PsiPlus: return "psi_plus";
    case BobResult::PsiMinus: return "psi_minus";
    case BobResult::NoDetection: return "no_detection";
    case BobResult::Z0: return "z0";
    case BobResult::Z1: return "z1";
  }
  return "unknown";
}

std::string sweep_to_csv(const SweepResult& s) {
  std::ostringstream out;
  out << "distance_km,eta,p01_prime,qber,rate_raw,rate,lg_rate\n";
  for (const SweepPoint& p : s.points) {
    const KeyRateReport& r = p.report;
    out << fmt(p.distance_km) << ',' << fmt(r.eta_bwd) << ',' << fmt(r.p01_prime) << ','
        << fmt(r.qber) << ',' << fmt(r.rate_raw) << ',' << fmt(r.rate) << ',';
    if (r.rate > 0.0) out << fmt(std::log10(r.rate));
    out << '\n';
  }
  return out.str();
}

std::string transcript_to_csv(const std::vector<TrialOutcome>& outcomes) {
  static const char* kOpNames[] = {"I0", "I1", "Y0", "Y1"};
  static const char* kCtrlNames[] = {"v", "0", "1"};
  std::ostringstream out;
  out << "trial,mode_a,mode_b,op,bob_result,alice_ctrl\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const TrialOutcome& o = outcomes[i];
    out << i << ',' << (o.mode_alice == Mode::Message ? "message" : "control") << ','
        << (o.mode_bob == Mode::Message ? "message" : "control") << ','
        << (o.alice_op >= 0 ? kOpNames[o.alice_op] : "-") << ',' << bob_result_name(o.bob_result)
        << ',' << (o.alice_ctrl >= 0 ? kCtrlNames[o.alice_ctrl] : "-") << '\n';
  }
  return out.str();
}

}  // namespace ppqkd
