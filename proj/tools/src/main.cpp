// qdb-run: runs scenario files and writes <output-dir>/<name>.csv and .txt.
//
// Exit status: 0 all identities pass, 1 an identity failed, 2 bad config or
// input, 3 numerical or domain error.

#include <chrono>
#include <cstdio>
#include <future>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qdb/errors.hpp"
#include "qdb_tools/scenario.hpp"

namespace {

enum Exit { kPass = 0, kIdentityFailed = 1, kConfigError = 2, kNumericalError = 3 };

struct Outcome {
  int code = kPass;
  std::string console;
};

Outcome run_one(const std::string& path, const qdb::tools::RunOverrides& overrides, const std::string& output_dir,
                bool strict, bool quiet) {
  Outcome out;
  qdb::tools::ScenarioConfig cfg;
  try {
    std::vector<std::string> warnings;
    cfg = qdb::tools::load_config(path, strict, &warnings);
    for (const auto& w : warnings) out.console += fmt::format("warning: {}\n", w);
  } catch (const qdb::tools::ConfigError& e) {
    for (const auto& p : e.problems()) out.console += fmt::format("error: {}\n", p);
    out.code = kConfigError;
    return out;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    qdb::tools::RunReport r = qdb::tools::run_scenario(cfg, overrides);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    qdb::tools::emit_report(r, output_dir, cfg.output_path);
    if (!quiet) out.console += qdb::tools::format_text(r);
    out.console += fmt::format("{}: {} ({:.2f} s)\n", cfg.name, r.passed() ? "PASS" : "FAIL", r.wall_seconds);
    out.code = r.passed() ? kPass : kIdentityFailed;
  } catch (const qdb::ValidationError& e) {
    out.console += fmt::format("error: {}: {}\n", path, e.what());
    out.code = kConfigError;
  } catch (const qdb::Error& e) {
    out.console += fmt::format("error: {}: {}\n", path, e.what());
    out.code = kNumericalError;
  } catch (const std::exception& e) {
    out.console += fmt::format("error: {}: {}\n", path, e.what());
    out.code = kNumericalError;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runs entropy-rate scenarios and checks their identities"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::string output_dir = "results";
  bool strict = false;
  bool quiet = false;
  bool serial = false;
  std::optional<double> fd_step;
  std::optional<qdb::Index> cutoff;
  std::optional<std::uint64_t> seed;

  CLI::App* run = app.add_subcommand("run", "Run one or more scenario files");
  run->add_option("configs", configs, "Scenario files")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output-dir", output_dir, "Directory for the CSV and text reports");
  run->add_flag("--strict", strict, "Treat unknown config keys as errors");
  run->add_flag("-q,--quiet", quiet, "Print one summary line per scenario");
  run->add_flag("--serial", serial, "Run scenarios one after another");
  run->add_option("--fd-step", fd_step, "Finite-difference step")->check(CLI::PositiveNumber);
  run->add_option("--cutoff", cutoff, "Fock cutoff per mode for cross-validation")->check(CLI::Range(2, 200));
  run->add_option("--seed", seed, "Seed for every random draw");

  CLI11_PARSE(app, argc, argv);

  const qdb::tools::RunOverrides overrides{fd_step, cutoff, seed};
  std::vector<std::future<Outcome>> jobs;
  jobs.reserve(configs.size());
  const auto policy = serial ? std::launch::deferred : std::launch::async;
  for (const auto& path : configs) {
    jobs.push_back(std::async(policy, run_one, path, overrides, output_dir, strict, quiet));
  }

  int worst = kPass;
  for (auto& job : jobs) {
    const Outcome o = job.get();
    std::fputs(o.console.c_str(), stdout);
    worst = std::max(worst, o.code);
  }
  return worst;
}
