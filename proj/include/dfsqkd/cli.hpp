#pragma once

// Command-line front end: run | sweep | tables | oracle.
//
// Documents are JSON (keys sorted, two-space indent) or CSV. Rates are
// fractions in [0, 1] rounded to six significant digits. Every document
// echoes the configuration and seed needed to reproduce it.
//
// Exit codes: 0 success, 2 protocol abort, 64 usage error, 1 internal error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dfsqkd/adversary.hpp"
#include "dfsqkd/oracle.hpp"
#include "dfsqkd/protocol.hpp"

namespace dfsqkd::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitAbort = 2;
inline constexpr int kExitUsage = 64;

inline constexpr const char* kOutputDirEnv = "DFSQKD_OUTPUT_DIR";

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Format { Json, Csv };

struct RunSpec {
  std::string subcommand = "run";
  Variant variant = Variant::Dephasing;
  std::string attack = "none";
  double probability = 1.0;
  CnotPair cnot_pair = CnotPair::Photons34;
  std::size_t n = 64;
  std::size_t delta = 16;
  double threshold = kDefaultAbortThreshold;
  std::string noise = "fixed";
  double noise_value = 0.0;
  double noise_lo = 0.0;
  double noise_hi = 0.0;
  double noise_split = 1.0;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  std::optional<Variant> table_variant;
  std::string out;
  Format format = Format::Json;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string document;
};

// ---------------------------------------------------------------------------
// Formatting helpers

/// Six significant digits, returned as the nearest double.
inline double fraction(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return std::strtod(buf, nullptr);
}

inline std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline json optional_fraction(const std::optional<double>& x) { return x ? json(fraction(*x)) : json(nullptr); }

inline std::string csv_optional(const std::optional<double>& x) { return x ? csv_number(*x) : std::string(); }

inline std::string bits_string(const std::vector<KeyBit>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (KeyBit b : bits) s.push_back(static_cast<char>('0' + b));
  return s;
}

inline std::string cnot_pair_name(CnotPair p) { return p == CnotPair::Photons34 ? "34" : "24"; }

inline std::string csv_document(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return os.str();
}

inline std::string json_document(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Spec translation

inline Variant parse_variant(const std::string& s) {
  if (s == "dephasing") return Variant::Dephasing;
  if (s == "rotation") return Variant::Rotation;
  throw UsageError("unknown variant '" + s + "' (expected dephasing or rotation)");
}

inline AttackKind attack_of(const RunSpec& spec) {
  AttackKind k;
  try {
    k = parse_attack_id(spec.attack);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  k.probability = spec.probability;
  k.cnot_pair = spec.cnot_pair;
  if (!is_supported(spec.variant, k))
    throw UsageError("attack '" + spec.attack + "' with p=" + csv_number(spec.probability) +
                     " is not supported for the " + std::string(to_string(spec.variant)) + " variant");
  return k;
}

inline NoisePolicy noise_of(const RunSpec& spec) {
  NoisePolicy policy;
  if (spec.noise == "fixed") policy = FixedNoise{spec.noise_value};
  else if (spec.noise == "uniform") policy = UniformNoise{spec.noise_lo, spec.noise_hi};
  else throw UsageError("unknown noise policy '" + spec.noise + "' (expected fixed or uniform)");
  try {
    validate(policy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!(spec.noise_split >= 0.0 && spec.noise_split <= 1.0)) throw UsageError("noise split must lie in [0, 1]");
  return policy;
}

inline SessionConfig session_config_of(const RunSpec& spec) {
  SessionConfig cfg;
  cfg.n = spec.n;
  cfg.delta = spec.delta;
  cfg.variant = spec.variant;
  cfg.noise_policy = noise_of(spec);
  cfg.noise_split = spec.noise_split;
  cfg.abort_threshold = spec.threshold;
  cfg.seed = spec.seed;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

inline json noise_json(const RunSpec& spec) {
  json j{{"policy", spec.noise}, {"split", spec.noise_split}};
  if (spec.noise == "fixed") j["value"] = spec.noise_value;
  else {
    j["lo"] = spec.noise_lo;
    j["hi"] = spec.noise_hi;
  }
  return j;
}

inline json config_json(const RunSpec& spec) {
  return json{{"subcommand", spec.subcommand},
              {"variant", std::string(to_string(spec.variant))},
              {"attack", spec.attack},
              {"interception_probability", spec.probability},
              {"cnot_pair", cnot_pair_name(spec.cnot_pair)},
              {"n", spec.n},
              {"delta", spec.delta},
              {"threshold", spec.threshold},
              {"noise", noise_json(spec)},
              {"trials", spec.trials},
              {"seed", spec.seed}};
}

// ---------------------------------------------------------------------------
// Commands

inline CommandResult cmd_run(const RunSpec& spec) {
  const SessionConfig cfg = session_config_of(spec);
  const AttackKind attack = attack_of(spec);
  const SessionResult r = run_session(cfg, attack);

  CommandResult out;
  out.exit_code = r.aborted ? kExitAbort : kExitOk;
  const EveReport eve_stats = r.eve_stats.value_or(EveReport{});
  const std::optional<double>& pre = eve_stats.pre_accuracy;
  const std::optional<double>& post = eve_stats.post_accuracy;

  if (spec.format == Format::Csv) {
    out.document = csv_document(
        {"variant", "attack", "interception_probability", "n", "delta", "threshold", "noise_policy", "seed", "eX",
         "eZ", "eA", "aborted", "alice_key_length", "bob_key_length", "keys_agree", "inconsistent_count",
         "sifted_fraction", "eve_pre_accuracy", "eve_post_accuracy"},
        {{std::string(to_string(spec.variant)), spec.attack, csv_number(spec.probability), std::to_string(spec.n),
          std::to_string(spec.delta), csv_number(spec.threshold), spec.noise, std::to_string(spec.seed),
          csv_number(r.observed_eX), csv_number(r.observed_eZ), csv_number(r.observed_eA),
          r.aborted ? "true" : "false", std::to_string(r.alice_raw_key.size()), std::to_string(r.bob_raw_key.size()),
          r.keys_agree() ? "true" : "false", std::to_string(r.inconsistent_count), csv_number(r.sifted_fraction()),
          csv_optional(pre), csv_optional(post)}});
    return out;
  }

  json transcript = json::array();
  for (const auto& m : r.transcript.messages())
    transcript.push_back({{"kind", std::string(to_string(m.kind))}, {"sender", m.sender}, {"summary", m.summary}});
  json eve = nullptr;
  if (r.eve_stats)
    eve = {{"intercepted", r.eve_stats->intercepted}, {"pre_accuracy", optional_fraction(pre)},
           {"post_accuracy", optional_fraction(post)}};
  json doc{{"schema", "dfsqkd.run.v1"},
           {"config", config_json(spec)},
           {"result",
            {{"eX", fraction(r.observed_eX)},
             {"eZ", fraction(r.observed_eZ)},
             {"eA", fraction(r.observed_eA)},
             {"aborted", r.aborted},
             {"quartets", r.quartets},
             {"alice_key_length", r.alice_raw_key.size()},
             {"bob_key_length", r.bob_raw_key.size()},
             {"keys_agree", r.keys_agree()},
             {"inconsistent_count", r.inconsistent_count},
             {"sifted_fraction", fraction(r.sifted_fraction())},
             {"alice_key", bits_string(r.alice_raw_key)},
             {"bob_key", bits_string(r.bob_raw_key)}}},
           {"eve", eve},
           {"transcript", transcript}};
  out.document = json_document(doc);
  return out;
}

inline CommandResult cmd_tables(const RunSpec& spec) {
  std::vector<TableRow> rows;
  for (Variant v : {Variant::Dephasing, Variant::Rotation}) {
    if (spec.table_variant && *spec.table_variant != v) continue;
    for (auto& r : reproduce_table(v)) rows.push_back(r);
  }
  CommandResult out;
  if (spec.format == Format::Csv) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
      cells.push_back({std::string(to_string(r.variant)), attack_id(r.attack), csv_number(r.computed.eX),
                       csv_number(r.computed.eZ), csv_number(r.computed.eA), csv_number(r.published.eA),
                       r.match ? "true" : "false"});
    out.document = csv_document({"variant", "attack", "eX", "eZ", "eA_computed", "eA_paper", "match_flag"}, cells);
    return out;
  }
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"variant", std::string(to_string(r.variant))},
                   {"attack", attack_id(r.attack)},
                   {"eX", fraction(r.computed.eX)},
                   {"eZ", fraction(r.computed.eZ)},
                   {"eA_computed", fraction(r.computed.eA)},
                   {"eA_paper", fraction(r.published.eA)},
                   {"eX_paper", fraction(r.published.eX)},
                   {"eZ_paper", fraction(r.published.eZ)},
                   {"match_flag", r.match}});
  out.document = json_document({{"schema", "dfsqkd.tables.v1"}, {"rows", arr}});
  return out;
}

inline CommandResult cmd_oracle(const RunSpec& spec) {
  const AttackKind attack = attack_of(spec);
  const AttackReport rep = analyze_attack(spec.variant, attack);
  CommandResult out;
  if (spec.format == Format::Csv) {
    out.document = csv_document(
        {"variant", "attack", "interception_probability", "eX", "eZ", "eA", "eve_pre_accuracy", "eve_post_accuracy",
         "branch_count"},
        {{std::string(to_string(spec.variant)), spec.attack, csv_number(spec.probability), csv_number(rep.rates.eX),
          csv_number(rep.rates.eZ), csv_number(rep.rates.eA), csv_optional(rep.eve_pre_accuracy),
          csv_optional(rep.eve_post_accuracy), std::to_string(rep.branch_count)}});
    return out;
  }
  json doc{{"schema", "dfsqkd.oracle.v1"},
           {"config", config_json(spec)},
           {"eX", fraction(rep.rates.eX)},
           {"eZ", fraction(rep.rates.eZ)},
           {"eA", fraction(rep.rates.eA)},
           {"eve_pre_accuracy", optional_fraction(rep.eve_pre_accuracy)},
           {"eve_post_accuracy", optional_fraction(rep.eve_post_accuracy)},
           {"branch_count", rep.branch_count}};
  out.document = json_document(doc);
  return out;
}

inline CommandResult cmd_sweep(const RunSpec& spec) {
  if (spec.trials < 1) throw UsageError("trials must be at least 1");
  const AttackKind attack = attack_of(spec);
  McOptions opt;
  opt.noise_policy = noise_of(spec);
  opt.noise_split = spec.noise_split;
  const auto points = sweep_interception(spec.variant, attack, spec.trials, spec.seed, opt);
  CommandResult out;
  if (spec.format == Format::Csv) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& pt : points) {
      const auto& e = pt.estimate;
      cells.push_back({csv_number(pt.probability), csv_number(e.rates.eX), csv_number(e.rates.eZ),
                       csv_number(e.rates.eA), csv_number(e.se_x), csv_number(e.se_z), csv_number(e.se_a),
                       std::to_string(e.trials)});
    }
    out.document = csv_document({"p", "eX", "eZ", "eA", "se_x", "se_z", "se_a", "trials"}, cells);
    return out;
  }
  json arr = json::array();
  for (const auto& pt : points) {
    const auto& e = pt.estimate;
    arr.push_back({{"p", pt.probability},
                   {"eX", fraction(e.rates.eX)},
                   {"eZ", fraction(e.rates.eZ)},
                   {"eA", fraction(e.rates.eA)},
                   {"se_x", fraction(e.se_x)},
                   {"se_z", fraction(e.se_z)},
                   {"se_a", fraction(e.se_a)},
                   {"trials", e.trials}});
  }
  out.document = json_document({{"schema", "dfsqkd.sweep.v1"}, {"config", config_json(spec)}, {"points", arr}});
  return out;
}

inline CommandResult dispatch(const RunSpec& spec) {
  if (spec.subcommand == "run") return cmd_run(spec);
  if (spec.subcommand == "tables") return cmd_tables(spec);
  if (spec.subcommand == "oracle") return cmd_oracle(spec);
  if (spec.subcommand == "sweep") return cmd_sweep(spec);
  throw UsageError("unknown subcommand '" + spec.subcommand + "'");
}

// ---------------------------------------------------------------------------
// Argument parsing

inline std::filesystem::path output_path(const RunSpec& spec) {
  if (!spec.out.empty()) return spec.out;
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir)
    return std::filesystem::path(dir) / (spec.subcommand + (spec.format == Format::Csv ? ".csv" : ".json"));
  return {};
}

/// Parses argv-style arguments (without the program name), runs the command
/// and writes its document to the output file or `out`. Returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunSpec spec;
  std::string variant = "dephasing";
  std::string table_variant = "all";
  std::string format = "json";
  std::string cnot_pair = "34";

  CLI::App app{"Decoherence-free-subspace QKD simulator", "dfsqkd"};
  app.require_subcommand(1, 1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", spec.out, "Output file (default: stdout or $" + std::string(kOutputDirEnv) + ")");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  };
  auto add_attack = [&](CLI::App* sub) {
    sub->add_option("--variant", variant, "dephasing or rotation")
        ->check(CLI::IsMember({"dephasing", "rotation"}))
        ->capture_default_str();
    sub->add_option("--attack", spec.attack, "none, mrp-x, mrp-z, mre-x, mre-z, bell, cnot-x, cnot-z")
        ->capture_default_str();
    sub->add_option("--p", spec.probability, "Interception probability per quartet")->capture_default_str();
    sub->add_option("--cnot-pair", cnot_pair, "CNOT control photons: 34 or 24")
        ->check(CLI::IsMember({"34", "24"}))
        ->capture_default_str();
  };
  auto add_noise = [&](CLI::App* sub) {
    sub->add_option("--noise", spec.noise, "fixed or uniform")->capture_default_str();
    sub->add_option("--noise-value", spec.noise_value, "Fixed noise parameter (radians)");
    sub->add_option("--noise-lo", spec.noise_lo, "Uniform noise lower bound (radians)");
    sub->add_option("--noise-hi", spec.noise_hi, "Uniform noise upper bound (radians)");
    sub->add_option("--noise-split", spec.noise_split, "Fraction of noise applied before Eve")->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "Run one protocol session");
  add_attack(run);
  add_noise(run);
  add_common(run);
  run->add_option("--n", spec.n, "Key quartets")->capture_default_str();
  run->add_option("--delta", spec.delta, "Check quartets per basis")->capture_default_str();
  run->add_option("--threshold", spec.threshold, "Abort threshold on the average check error")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo error rates versus interception probability");
  add_attack(sweep);
  add_noise(sweep);
  add_common(sweep);
  sweep->add_option("--trials", spec.trials, "Check quartets per basis per point")->capture_default_str();

  CLI::App* tables = app.add_subcommand("tables", "Exact attack error-rate tables");
  tables->add_option("--variant", table_variant, "dephasing, rotation or all")
      ->check(CLI::IsMember({"dephasing", "rotation", "all"}))
      ->capture_default_str();
  add_common(tables);

  CLI::App* oracle = app.add_subcommand("oracle", "Exact rates and Eve accuracy for one attack");
  add_attack(oracle);
  add_common(oracle);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  for (CLI::App* sub : {run, sweep, tables, oracle})
    if (sub->parsed()) spec.subcommand = sub->get_name();
  spec.format = format == "csv" ? Format::Csv : Format::Json;
  spec.cnot_pair = cnot_pair == "24" ? CnotPair::Photons24 : CnotPair::Photons34;

  CommandResult result;
  try {
    spec.variant = parse_variant(variant);
    if (table_variant != "all") spec.table_variant = parse_variant(table_variant);
    result = dispatch(spec);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const auto path = output_path(spec);
  if (path.empty()) {
    out << result.document;
  } else {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      err << "cannot write " << path.string() << "\n";
      return kExitUsage;
    }
    file << result.document;
  }
  if (result.exit_code == kExitAbort) err << "protocol aborted: check error rate above threshold\n";
  return result.exit_code;
}

}  // namespace dfsqkd::cli
