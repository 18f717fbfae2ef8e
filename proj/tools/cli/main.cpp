#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI/CLI11.hpp>

#include "dirac/scenario.hpp"

namespace {

int exit_code(dirac::ErrorKind kind) {
  using dirac::ErrorKind;
  switch (kind) {
  case ErrorKind::io:
    return 4;
  case ErrorKind::domain:
  case ErrorKind::degenerate:
  case ErrorKind::sampling:
    return 3;
  default:
    return 2;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dirac propagator kernel toolkit"};
  app.require_subcommand(1);

  std::string path;
  std::string out_dir = "out";
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write summary.json, series.csv and run.log");
  run->add_option("scenario", path, "Scenario JSON file")->required();
  run->add_option("--out,-o", out_dir, "Output directory");
  run->add_option("--threads,-j", threads, "Worker threads (default: DIRAC_KERNEL_THREADS or 1)");

  auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
  validate->add_option("scenario", path, "Scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const dirac::Scenario scenario = dirac::load_scenario(path);
    if (*validate) {
      std::cout << "valid: " << scenario.name << " (" << dirac::to_string(scenario.task) << ")\n";
      return 0;
    }
    if (threads == 0) threads = dirac::env_thread_cap(1);
    const auto result = dirac::run_scenario(scenario, out_dir, threads);
    for (const auto& c : result.checks)
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << dirac::format_double(c.value)
                << '\n';
    std::cout << (result.passed() ? "passed" : "failed") << ": " << scenario.name << '\n';
    return result.passed() ? 0 : 3;
  } catch (const dirac::Error& e) {
    std::cerr << "error [" << dirac::to_string(e.kind()) << "]: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
