#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppqkd/channel.hpp"
#include "ppqkd/config.hpp"
#include "ppqkd/manifest.hpp"
#include "ppqkd/version.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitIo = 4;

struct KeyrateArgs {
  std::optional<double> p01_prime, p10_prime, eta_bwd, qber;
};

struct SweepArgs {
  double from_km = 0.0;
  double to_km = 60.0;
  double step_km = 1.0;
};

struct ChannelOverrides {
  std::optional<double> distance_km, attenuation, detector_efficiency, dark_count, misalignment;

  ppqkd::ChannelParams apply(ppqkd::ChannelParams base) const {
    if (distance_km) base.distance_km = *distance_km;
    if (attenuation) base.attenuation_db_per_km = *attenuation;
    if (detector_efficiency) base.detector_efficiency = *detector_efficiency;
    if (dark_count) base.dark_count_prob = *dark_count;
    if (misalignment) base.misalignment = *misalignment;
    return base;
  }
};

struct SimulateArgs {
  std::optional<std::uint64_t> trials, seed;
  std::optional<double> message_mode_prob;
  std::optional<std::string> psi_policy;
  bool transcript = false;
};

struct AttackArgs {
  std::vector<double> p;  // p0v p00 p01 p1v p10 p11 when given
  double eta_bwd = 1.0;
};

ppqkd::Config load_config_if_any(const std::string& path) {
  if (path.empty()) return {};
  return ppqkd::load_config(path);
}

void write_artifacts(const std::string& command, const json& parameters, std::uint64_t rng_seed,
                     const std::string& out_prefix,
                     const std::vector<std::pair<std::string, std::string>>& files) {
  ppqkd::RunManifest manifest;
  manifest.command = command;
  manifest.parameters = parameters;
  manifest.rng_seed = rng_seed;
  manifest.version = ppqkd::kVersion;
  for (const auto& [suffix, content] : files) {
    const std::filesystem::path path = out_prefix + suffix;
    ppqkd::write_file_atomic(path, content);
    char sum[32];
    std::snprintf(sum, sizeof sum, "fnv1a64:%016llx",
                  static_cast<unsigned long long>(ppqkd::fnv1a64(content)));
    manifest.output_checksums[path.filename().string()] = sum;
  }
  const json doc = to_json(manifest);
  ppqkd::write_file_atomic(out_prefix + ".manifest.json", doc.dump(2) + "\n");
}

int cmd_keyrate(const std::string& config_path, const KeyrateArgs& args,
                const std::string& out_prefix) {
  const ppqkd::Config cfg = load_config_if_any(config_path);

  std::optional<double> p01 = args.p01_prime, p10 = args.p10_prime;
  std::optional<double> eta = args.eta_bwd, qber = args.qber;
  if (cfg.channel) {
    // Derive the operating point of the configured physical channel; flags
    // override individual values.
    const double flip = ppqkd::forward_error(*cfg.channel);
    if (!p01) p01 = flip;
    if (!p10) p10 = flip;
    if (!eta) {
      eta = ppqkd::fiber_efficiency(cfg.channel->distance_km, cfg.channel->attenuation_db_per_km);
    }
    if (!qber) qber = ppqkd::message_qber(*cfg.channel);
  }
  for (const auto& [value, flag] :
       {std::pair{p01, "--p01-prime"}, {p10, "--p10-prime"}, {eta, "--eta-bwd"},
        {qber, "--qber"}}) {
    if (!value) throw std::invalid_argument(std::string("keyrate: missing ") + flag);
  }

  const ppqkd::KeyRateReport report = ppqkd::key_rate(*p01, *p10, *eta, *qber);
  const json doc = to_json(report);
  std::cout << doc.dump(2) << "\n";
  if (!out_prefix.empty()) {
    const json params = {
        {"p01_prime", *p01}, {"p10_prime", *p10}, {"eta_bwd", *eta}, {"qber", *qber}};
    write_artifacts("keyrate", params, 0, out_prefix, {{".report.json", doc.dump(2) + "\n"}});
  }
  return report.degenerate ? kExitDegenerate : kExitOk;
}

int cmd_attack(const std::string& config_path, const AttackArgs& args,
               const std::string& out_prefix) {
  const ppqkd::Config cfg = load_config_if_any(config_path);
  ppqkd::AttackParams params{};
  if (!args.p.empty()) {
    params = {args.p[0], args.p[1], args.p[2], args.p[3], args.p[4], args.p[5]};
  } else if (cfg.attack) {
    params = *cfg.attack;
  } else {
    throw std::invalid_argument("attack: provide --params or a config with an attack section");
  }
  params.validate();
  if (!(args.eta_bwd > 0.0 && args.eta_bwd <= 1.0)) {
    throw std::invalid_argument("attack: --eta-bwd out of (0,1]");
  }

  const ppqkd::EffectiveForwardStats stats = ppqkd::effective_forward_stats(params);
  auto branch_json = [&](int branch) {
    const double eta_branch = branch == 0 ? stats.eta_fwd : stats.eta_fwd_1;
    if (!(eta_branch > 0.0)) return json{{"degenerate", true}};
    const double flip = branch == 0 ? stats.p01_prime : stats.p10_prime;
    const double oracle = ppqkd::eve_entropy_oracle(params, branch);
    const double analytic = 1.0 - ppqkd::binary_entropy(flip);
    return json{{"degenerate", false},
                {"entropy_oracle", oracle},
                {"entropy_analytic", analytic},
                {"difference", oracle - analytic}};
  };

  const bool degenerate = !(stats.eta_fwd > 0.0) && !(stats.eta_fwd_1 > 0.0);
  json analysis = {{"params", ppqkd::to_json(params)},
                   {"eta_fwd", stats.eta_fwd},
                   {"eta_fwd_1", stats.eta_fwd_1},
                   {"p00_prime", stats.eta_fwd > 0.0 ? json(stats.p00_prime) : json(nullptr)},
                   {"p01_prime", stats.eta_fwd > 0.0 ? json(stats.p01_prime) : json(nullptr)},
                   {"p10_prime", stats.eta_fwd_1 > 0.0 ? json(stats.p10_prime) : json(nullptr)},
                   {"p11_prime", stats.eta_fwd_1 > 0.0 ? json(stats.p11_prime) : json(nullptr)},
                   {"branch0", branch_json(0)},
                   {"branch1", branch_json(1)},
                   {"eta_bwd", args.eta_bwd},
                   {"degenerate", degenerate}};
  if (stats.eta_fwd > 0.0 && stats.eta_fwd_1 > 0.0) {
    const double h_fwd = ppqkd::forward_entropy_bound(stats.p01_prime, stats.p10_prime);
    analysis["eve_bound"] = ppqkd::received_entropy_bound(h_fwd, args.eta_bwd);
  } else {
    analysis["eve_bound"] = nullptr;
  }

  std::cout << analysis.dump(2) << "\n";
  if (!out_prefix.empty()) {
    const json params_doc = {{"attack", ppqkd::to_json(params)}, {"eta_bwd", args.eta_bwd}};
    write_artifacts("attack", params_doc, 0, out_prefix,
                    {{".analysis.json", analysis.dump(2) + "\n"}});
  }
  return degenerate ? kExitDegenerate : kExitOk;
}

int cmd_sweep(const std::string& config_path, const SweepArgs& args,
              const ChannelOverrides& overrides, const std::string& out_prefix) {
  const ppqkd::Config cfg = load_config_if_any(config_path);
  const ppqkd::ChannelParams params =
      overrides.apply(cfg.channel.value_or(ppqkd::ChannelParams{}));
  params.validate();
  if (!(args.from_km >= 0.0)) throw std::invalid_argument("sweep: --from-km must be >= 0");
  if (!(args.to_km >= args.from_km)) {
    throw std::invalid_argument("sweep: --to-km must be >= --from-km");
  }
  if (!(args.step_km > 0.0)) throw std::invalid_argument("sweep: --step-km must be > 0");

  std::vector<double> distances;
  for (double d = args.from_km; d <= args.to_km + 1e-9; d += args.step_km) distances.push_back(d);

  const ppqkd::SweepResult result = ppqkd::sweep(params, distances);
  const std::string csv = ppqkd::sweep_to_csv(result);
  json doc = to_json(result);
  doc["channel"] = ppqkd::to_json(params);

  const json params_doc = {{"channel", ppqkd::to_json(params)},
                           {"from_km", args.from_km},
                           {"to_km", args.to_km},
                           {"step_km", args.step_km}};
  write_artifacts("sweep", params_doc, 0, out_prefix,
                  {{".csv", csv}, {".json", doc.dump(2) + "\n"}});

  std::cout << "rows: " << result.points.size() << "\n";
  if (result.cutoff_km) {
    std::cout << "cutoff_km: " << *result.cutoff_km << "\n";
  } else {
    std::cout << "cutoff_km: none\n";
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const SimulateArgs& args,
                 const ChannelOverrides& overrides, const std::string& out_prefix) {
  const ppqkd::Config cfg = load_config_if_any(config_path);

  ppqkd::AttackParams fwd{};
  ppqkd::BackwardChannelParams bwd{};
  if (cfg.attack && cfg.backward) {
    fwd = *cfg.attack;
    bwd = *cfg.backward;
  } else if (cfg.attack || cfg.backward) {
    throw std::invalid_argument(
        "simulate: config must provide both 'attack' and 'backward' sections, or neither");
  } else if (cfg.channel || overrides.distance_km) {
    const ppqkd::ChannelParams channel =
        overrides.apply(cfg.channel.value_or(ppqkd::ChannelParams{}));
    std::tie(fwd, bwd) = ppqkd::loss_map(channel);
  } else {
    throw std::invalid_argument(
        "simulate: provide attack+backward sections or a channel section/--distance-km");
  }

  ppqkd::SessionConfig session = cfg.session.value_or(ppqkd::SessionConfig{
      .n_trials = 10000, .message_mode_prob = 0.5, .rng_seed = 1,
      .psi_outcome_policy = ppqkd::PsiOutcomePolicy::CountAsError});
  if (args.trials) session.n_trials = *args.trials;
  if (args.seed) session.rng_seed = *args.seed;
  if (args.message_mode_prob) session.message_mode_prob = *args.message_mode_prob;
  if (args.psi_policy) session.psi_outcome_policy = ppqkd::psi_policy_from_name(*args.psi_policy);
  session.validate();

  const ppqkd::SessionResult result = ppqkd::run_session(session, fwd, bwd);

  json stats_doc = to_json(result.statistics);
  json report_doc = to_json(result.report);
  if (!result.diagnostic.empty()) report_doc["diagnostic"] = result.diagnostic;

  std::vector<std::pair<std::string, std::string>> files = {
      {".statistics.json", stats_doc.dump(2) + "\n"},
      {".report.json", report_doc.dump(2) + "\n"}};
  if (args.transcript) {
    files.emplace_back(".transcript.csv", ppqkd::transcript_to_csv(result.outcomes));
  }
  const json params_doc = {{"attack", ppqkd::to_json(fwd)},
                           {"backward", ppqkd::to_json(bwd)},
                           {"session", ppqkd::to_json(session)}};
  write_artifacts("simulate", params_doc, session.rng_seed, out_prefix, files);

  const auto& s = result.statistics;
  std::cout << "trials: " << session.n_trials << "\n"
            << "both_message: " << s.n_message << "\n"
            << "both_control: " << s.n_control << "\n"
            << "detections: " << s.n_detected << "\n";
  if (s.qber_hat.defined) {
    std::cout << "qber_hat: " << s.qber_hat.value << " (" << s.qber_hat.numerator << "/"
              << s.qber_hat.denominator << ")\n";
  } else {
    std::cout << "qber_hat: undefined\n";
  }
  std::cout << "rate: " << result.report.rate << "\n";
  if (!result.diagnostic.empty()) std::cout << "diagnostic: " << result.diagnostic << "\n";
  return result.report.degenerate ? kExitDegenerate : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ppqkd — modified Ping-Pong QKD key-rate analysis and simulation"};
  app.set_version_flag("--version", ppqkd::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_prefix;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->envname("PPQKD_CONFIG");
  };
  auto add_channel_overrides = [](CLI::App* sub, ChannelOverrides& o) {
    sub->add_option("--distance-km", o.distance_km, "fiber length");
    sub->add_option("--attenuation-db-per-km", o.attenuation, "fiber attenuation");
    sub->add_option("--detector-efficiency", o.detector_efficiency, "detector efficiency eta_d");
    sub->add_option("--dark-count-prob", o.dark_count, "dark count probability p_d");
    sub->add_option("--misalignment", o.misalignment, "detector misalignment d_e");
  };

  KeyrateArgs keyrate_args;
  auto* keyrate = app.add_subcommand("keyrate", "evaluate the key-rate bound at one point");
  add_common(keyrate);
  keyrate->add_option("--p01-prime", keyrate_args.p01_prime, "forward flip probability, branch 0");
  keyrate->add_option("--p10-prime", keyrate_args.p10_prime, "forward flip probability, branch 1");
  keyrate->add_option("--eta-bwd", keyrate_args.eta_bwd, "backward channel efficiency");
  keyrate->add_option("--qber", keyrate_args.qber, "message-mode error rate");
  keyrate->add_option("--out", out_prefix, "output file prefix");

  AttackArgs attack_args;
  auto* attack = app.add_subcommand("attack", "analyze a collective attack parameter set");
  add_common(attack);
  attack->add_option("--params", attack_args.p,
                     "six transition probabilities: p0v p00 p01 p1v p10 p11")
      ->expected(6);
  attack->add_option("--eta-bwd", attack_args.eta_bwd, "backward efficiency for the Eq-style bound");
  attack->add_option("--out", out_prefix, "output file prefix");

  SweepArgs sweep_args;
  ChannelOverrides sweep_overrides;
  auto* sweep = app.add_subcommand("sweep", "key rate vs distance, CSV/JSON output");
  add_common(sweep);
  sweep->add_option("--from-km", sweep_args.from_km, "first distance");
  sweep->add_option("--to-km", sweep_args.to_km, "last distance");
  sweep->add_option("--step-km", sweep_args.step_km, "distance step");
  add_channel_overrides(sweep, sweep_overrides);
  sweep->add_option("--out", out_prefix, "output file prefix")->required();

  SimulateArgs simulate_args;
  ChannelOverrides simulate_overrides;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo protocol session");
  add_common(simulate);
  simulate->add_option("--trials", simulate_args.trials, "number of trials");
  simulate->add_option("--seed", simulate_args.seed, "RNG seed");
  simulate->add_option("--message-mode-prob", simulate_args.message_mode_prob,
                       "per-party message-mode probability c");
  simulate->add_option("--psi-policy", simulate_args.psi_policy,
                       "psi outcome policy: count_as_error | discard");
  add_channel_overrides(simulate, simulate_overrides);
  simulate->add_flag("--transcript", simulate_args.transcript, "write per-trial transcript CSV");
  simulate->add_option("--out", out_prefix, "output file prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (keyrate->parsed()) return cmd_keyrate(config_path, keyrate_args, out_prefix);
    if (attack->parsed()) return cmd_attack(config_path, attack_args, out_prefix);
    if (sweep->parsed()) return cmd_sweep(config_path, sweep_args, sweep_overrides, out_prefix);
    if (simulate->parsed()) {
      return cmd_simulate(config_path, simulate_args, simulate_overrides, out_prefix);
    }
    return kExitValidation;
  } catch (const ppqkd::DegenerateChannelError& e) {
    std::cerr << "degenerate channel: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const ppqkd::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  }
}
