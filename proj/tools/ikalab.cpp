// ikalab: run a key agreement scenario or re-derive its report offline.
//
//   ikalab run --config configs/honest.yaml [--scenario S] [--n N] [--seed X]
//              [--backend modexp|elliptic] [--out-dir DIR] [--fixed-secrets a,b,c]
//   ikalab verify --transcript out/transcript.jsonl --config configs/honest.yaml
//                 [--report out/report.json] [--out derived.json]
//
// Exit codes: 0 all verdicts hold, 1 verdict or replay mismatch,
// 2 configuration error, 3 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ikalab/config.hpp"
#include "ikalab/errors.hpp"
#include "ikalab/report.hpp"
#include "ikalab/scenario.hpp"
#include "ikalab/verify.hpp"

namespace {

using namespace ikalab;

void print_summary(std::ostream& out, const VerificationReport& report) {
  out << report.scenario << " n=" << report.n << " backend=" << report.backend << " seed=" << report.seed << ": "
      << (report.passed() ? "PASS" : "FAIL") << '\n';
  for (const auto& v : report.verdicts) {
    if (!v.passed) out << "  failed: " << v.name << '\n';
  }
}

int run_command(const std::string& config_path, const ConfigOverrides& overrides) {
  const ScenarioConfig config =
      config_path.empty() ? parse_config("", overrides) : load_config(config_path, overrides);
  const ScenarioResult result = run_scenario(config);
  const int code = write_outputs(config, result);
  if (code == exit_code::kIoError) {
    std::cerr << "ikalab: cannot write outputs under " << config.out_dir << '\n';
    return code;
  }
  print_summary(std::cout, result.report);
  return code;
}

int verify_command(const std::string& config_path, const std::string& transcript_path,
                   const std::string& report_path, const std::string& out_path) {
  const ScenarioConfig config = load_config(config_path);
  if (!std::ifstream(transcript_path)) {
    std::cerr << "ikalab: cannot read " << transcript_path << '\n';
    return exit_code::kIoError;
  }
  const VerificationReport report = verify_transcript_file(config, transcript_path);
  const std::string derived = render_report(report);

  if (out_path.empty()) {
    std::cout << derived;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << derived;
    if (!out) {
      std::cerr << "ikalab: cannot write " << out_path << '\n';
      return exit_code::kIoError;
    }
  }
  if (!report_path.empty()) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) {
      std::cerr << "ikalab: cannot read " << report_path << '\n';
      return exit_code::kIoError;
    }
    std::stringstream recorded;
    recorded << in.rdbuf();
    if (recorded.str() != derived) {
      std::cerr << "ikalab: " << report_path << " differs from the report derived from the transcript\n";
      return exit_code::kVerdictMismatch;
    }
  }
  print_summary(std::cerr, report);
  return report.passed() ? exit_code::kOk : exit_code::kVerdictMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cliques IKA.2 attack laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string fixed_secrets;
  std::string scenario;
  std::string backend;
  std::string out_dir;
  std::uint32_t n = 0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write transcript and report");
  run->add_option("--config", config_path, "Scenario document (YAML)")->check(CLI::ExistingFile);
  auto* scenario_opt = run->add_option("--scenario", scenario, "Scenario name");
  auto* n_opt = run->add_option("--n", n, "Group size");
  auto* seed_opt = run->add_option("--seed", seed, "Seed for every random draw");
  auto* backend_opt = run->add_option("--backend", backend, "Preset: modexp or elliptic");
  auto* out_opt = run->add_option("--out-dir", out_dir, "Output directory");
  auto* fixed_opt = run->add_option("--fixed-secrets", fixed_secrets, "Comma-separated user secrets");

  std::string transcript_path;
  std::string report_path;
  std::string derived_path;
  auto* verify = app.add_subcommand("verify", "Re-derive the report from a transcript");
  verify->add_option("--transcript", transcript_path, "Transcript (JSON lines)")->required();
  verify->add_option("--config", config_path, "Scenario document used for the run")->required();
  verify->add_option("--report", report_path, "Recorded report to compare byte for byte");
  verify->add_option("--out", derived_path, "Write the derived report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::kConfigError;
  }

  try {
    if (*run) {
      ConfigOverrides overrides;
      if (*scenario_opt) overrides.scenario = scenario;
      if (*n_opt) overrides.n = n;
      if (*seed_opt) overrides.seed = seed;
      if (*backend_opt) overrides.backend = backend;
      if (*out_opt) overrides.out_dir = out_dir;
      if (*fixed_opt) overrides.fixed_secrets = parse_scalar_list(fixed_secrets, "fixed-secrets");
      return run_command(config_path, overrides);
    }
    return verify_command(config_path, transcript_path, report_path, derived_path);
  } catch (const ConfigError& e) {
    std::cerr << "ikalab: configuration error: " << e.what() << '\n';
    return exit_code::kConfigError;
  } catch (const VerificationError& e) {
    std::cerr << "ikalab: transcript does not replay: " << e.what() << '\n';
    return exit_code::kVerdictMismatch;
  } catch (const Error& e) {
    std::cerr << "ikalab: " << e.what() << '\n';
    return exit_code::kVerdictMismatch;
  }
}
