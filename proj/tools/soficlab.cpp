// soficlab: batch front-end for sofic-approximation experiments.
//
//   soficlab run <config.json> [--out report.json] [--csv trace.csv] [--jobs N]
//   soficlab validate <config.json>
//
// Exit codes: 0 success, 2 validation/usage error, 3 runtime error.
// SOFICLAB_SEED supplies a default seed for randomized ops; a seed in the
// config takes precedence.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "soficlab/soficlab.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

std::optional<std::uint64_t> env_default_seed() {
  const char* raw = std::getenv("SOFICLAB_SEED");
  if (!raw) return std::nullopt;
  try {
    std::size_t pos = 0;
    const std::uint64_t seed = std::stoull(raw, &pos);
    if (pos != std::string(raw).size()) throw std::invalid_argument("trailing characters");
    return seed;
  } catch (const std::exception&) {
    throw soficlab::ConfigError("SOFICLAB_SEED: not a nonnegative integer");
  }
}

struct LoadedConfig {
  soficlab::json parsed;
  std::string raw;
};

LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw soficlab::ConfigError("cannot read config file \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  LoadedConfig loaded;
  loaded.raw = buffer.str();
  try {
    loaded.parsed = soficlab::json::parse(loaded.raw);
  } catch (const soficlab::json::parse_error& e) {
    throw soficlab::ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return loaded;
}

int run_command(const std::string& config_path, const std::string& out_path,
                const std::string& csv_path, int jobs) {
  LoadedConfig loaded;
  soficlab::PreparedExperiment prep;
  try {
    loaded = load_config(config_path);
    prep = soficlab::prepare_experiment(loaded.parsed, env_default_seed());
  } catch (const soficlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  for (const auto& w : prep.warnings) std::cerr << "warning: " << w << "\n";

  soficlab::json payload;
  double wall_ms = 0.0;
  try {
    const auto start = std::chrono::steady_clock::now();
    payload = prep.run(jobs);
    const auto stop = std::chrono::steady_clock::now();
    wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }

  const soficlab::json report =
      soficlab::make_report(loaded.parsed, loaded.raw, prep.op, payload, wall_ms);
  const std::string serialized = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << serialized;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      std::cerr << "runtime error: cannot write \"" << out_path << "\"\n";
      return kExitRuntime;
    }
    out << serialized;
  }

  if (!csv_path.empty()) {
    if (payload.contains("rows")) {
      std::ofstream csv(csv_path, std::ios::binary);
      if (!csv) {
        std::cerr << "runtime error: cannot write \"" << csv_path << "\"\n";
        return kExitRuntime;
      }
      csv << soficlab::trace_to_csv(payload);
    } else {
      std::cerr << "warning: --csv ignored (op \"" << prep.op << "\" has no trace rows)\n";
    }
  }
  return kExitOk;
}

int validate_command(const std::string& config_path) {
  try {
    const LoadedConfig loaded = load_config(config_path);
    const soficlab::PreparedExperiment prep =
        soficlab::prepare_experiment(loaded.parsed, env_default_seed());
    for (const auto& w : prep.warnings) std::cout << "warning: " << w << "\n";
    std::cout << "ok\n";
    return kExitOk;
  } catch (const soficlab::ConfigError& e) {
    std::cout << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soficlab: finite permutation models, microstates, and Kantorovich fits"};
  app.require_subcommand(1);

  std::string config_path, out_path, csv_path;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_path, "write the report here instead of stdout");
  run->add_option("--csv", csv_path, "write trace rows as CSV");
  run->add_option("--jobs", jobs, "worker threads (never changes results)")
      ->check(CLI::PositiveNumber);

  CLI::App* validate = app.add_subcommand("validate", "check a config without running it");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run->parsed()) return run_command(config_path, out_path, csv_path, jobs);
    return validate_command(config_path);
  } catch (const soficlab::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
