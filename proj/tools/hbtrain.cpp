#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hbtrain/errors.hpp"
#include "hbtrain/experiment.hpp"
#include "hbtrain/selfcheck.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

int threads_from_env() {
  const char* env = std::getenv("HBTRAIN_THREADS");
  if (!env) return 0;
  try {
    return std::max(0, std::stoi(env));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training design, channel estimation, and link evaluation "
               "for correlated MIMO with few RF chains"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  int threads = -1;  // -1: not given on the command line
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string fault_name;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path,
                                "experiment configuration file");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_path, "output CSV path (overrides config)");
    cmd->add_option("--threads", threads,
                    "worker threads (default: HBTRAIN_THREADS or all cores)");
    cmd->add_option("--seed", seed, "override the configured seed")
        ->each([&](const std::string&) { seed_given = true; });
  };

  auto* run_cmd = app.add_subcommand("run", "single-point evaluation");
  add_common(run_cmd, true);
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep_cmd, true);
  auto* qnz_cmd =
      app.add_subcommand("qnz", "active-slot profile over antennas and rho");
  add_common(qnz_cmd, true);
  auto* selfcheck_cmd =
      app.add_subcommand("selfcheck", "run the built-in invariant suites");
  selfcheck_cmd->add_option("--inject-fault", fault_name,
                            "deliberately break one check (testing aid)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (selfcheck_cmd->parsed()) {
      hbtrain::SelfcheckFault fault = hbtrain::SelfcheckFault::none;
      if (fault_name == "skip-hermitianization")
        fault = hbtrain::SelfcheckFault::skip_hermitianization;
      else if (!fault_name.empty()) {
        std::cerr << "unknown fault '" << fault_name << "'\n";
        return kExitParse;
      }
      return hbtrain::selfcheck(std::cout, fault) ? 0 : 1;
    }

    hbtrain::ExperimentSpec spec = hbtrain::parse_spec_file(config_path);
    if (run_cmd->parsed()) spec.command = hbtrain::Command::run;
    if (sweep_cmd->parsed()) spec.command = hbtrain::Command::sweep;
    if (qnz_cmd->parsed()) spec.command = hbtrain::Command::qnz;
    if (!out_path.empty()) spec.output_path = out_path;
    if (threads >= 0)
      spec.threads = threads;
    else if (spec.threads == 0)
      spec.threads = threads_from_env();
    if (seed_given) spec.base.seed = seed;

    return hbtrain::run_experiment(spec);
  } catch (const hbtrain::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitParse;
  } catch (const hbtrain::IoError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const hbtrain::NumericError& e) {
    std::cerr << e.what() << "\n";
    return kExitNumeric;
  } catch (const hbtrain::InvalidParameterError& e) {
    std::cerr << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitNumeric;
  }
}
