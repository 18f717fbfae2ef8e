// Runs the shipped scenarios behind each acceptance criterion and prints one
// PASS/FAIL line per criterion. Exit status is 0 only when all pass.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI/CLI11.hpp>

#include "dirac/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string error;
  dirac::RunResult result;
  double seconds = 0.0;
};

struct Requirement {
  std::string scenario;
  std::vector<std::string> checks; ///< must be present and passing
};

struct Criterion {
  int id;
  std::string title;
  std::vector<Requirement> runs;
  double budget_seconds;
  /// Extra condition on the summaries, empty when none.
  std::function<std::string(const std::map<std::string, Outcome>&)> extra;
};

class Runner {
public:
  Runner(fs::path scenarios, fs::path work, unsigned threads)
      : scenarios_(std::move(scenarios)), work_(std::move(work)), threads_(threads) {}

  const Outcome& run(const std::string& name) {
    auto it = done_.find(name);
    if (it != done_.end()) return it->second;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto s = dirac::load_scenario(scenarios_ / (name + ".json"));
      o.result = dirac::run_scenario(s, work_ / "first" / name, threads_);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return done_.emplace(name, std::move(o)).first->second;
  }

  [[nodiscard]] const std::map<std::string, Outcome>& done() const { return done_; }
  [[nodiscard]] const fs::path& scenarios() const { return scenarios_; }
  [[nodiscard]] const fs::path& work() const { return work_; }

private:
  fs::path scenarios_;
  fs::path work_;
  unsigned threads_;
  std::map<std::string, Outcome> done_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool evaluate(Runner& runner, const Criterion& c, std::string& detail) {
  bool ok = true;
  double seconds = 0.0;
  std::ostringstream out;
  for (const auto& req : c.runs) {
    const Outcome& o = runner.run(req.scenario);
    seconds += o.seconds;
    if (!o.ok) {
      out << req.scenario << " error: " << o.error << "; ";
      ok = false;
      continue;
    }
    for (const auto& check : o.result.checks)
      if (!check.pass) {
        out << req.scenario << "." << check.name << "=" << short_number(check.value) << " failed; ";
        ok = false;
      }
    for (const auto& name : req.checks) {
      const auto it = std::find_if(o.result.checks.begin(), o.result.checks.end(),
                                   [&](const dirac::Check& k) { return k.name == name; });
      if (it == o.result.checks.end()) {
        out << req.scenario << "." << name << " missing; ";
        ok = false;
      } else if (it->pass) {
        out << name << "=" << short_number(it->value) << " ";
      }
    }
  }
  if (c.extra) {
    const std::string msg = c.extra(runner.done());
    if (!msg.empty()) {
      out << msg << "; ";
      ok = false;
    }
  }
  if (seconds > c.budget_seconds) {
    out << "runtime " << short_number(seconds) << " s over " << c.budget_seconds << " s; ";
    ok = false;
  }
  out << "(" << short_number(seconds) << " s)";
  detail = out.str();
  return ok;
}

/// Every shipped scenario again, with a different thread count; all files
/// except run.log must match byte for byte.
bool determinism(Runner& runner, std::string& detail) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(runner.scenarios()))
    if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
  std::sort(names.begin(), names.end());
  std::ostringstream out;
  bool ok = !names.empty();
  std::size_t files = 0;
  for (const auto& name : names) {
    const Outcome& first = runner.run(name);
    if (!first.ok) {
      out << name << " error: " << first.error << "; ";
      ok = false;
      continue;
    }
    const fs::path a = runner.work() / "first" / name;
    const fs::path b = runner.work() / "second" / name;
    try {
      const auto s = dirac::load_scenario(runner.scenarios() / (name + ".json"));
      (void)dirac::run_scenario(s, b, 3);
    } catch (const std::exception& e) {
      out << name << " rerun error: " << e.what() << "; ";
      ok = false;
      continue;
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto file = entry.path().filename();
      if (file == "run.log") continue;
      ++files;
      if (!fs::exists(b / file) || slurp(entry.path()) != slurp(b / file)) {
        out << name << "/" << file.string() << " differs; ";
        ok = false;
      }
    }
  }
  out << names.size() << " scenarios, " << files << " files compared";
  detail = out.str();
  return ok;
}

std::string oracle_shape(const std::map<std::string, Outcome>& done) {
  const auto& o = done.at("oracle_compare");
  if (!o.ok) return {};
  const auto& grid = o.result.summary["grid"];
  const auto slices = o.result.summary["results"]["slices"].get<std::size_t>();
  if (grid["N"].get<int>() != 128 || slices != 64) return "oracle run is not N=128 with 64 slices";
  return {};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance_runs";
  std::string scenarios = DIRAC_SCENARIO_DIR;
  unsigned threads = 2;
  app.add_option("--work", work, "Directory for run outputs");
  app.add_option("--scenarios", scenarios, "Directory with the scenario files");
  app.add_option("--threads,-j", threads, "Worker threads for the first pass");
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  Runner runner(scenarios, work, threads);

  const std::vector<Criterion> criteria{
      {1,
       "clifford",
       {{"clifford",
         {"clifford_dirac_1d", "clifford_chiral_1d", "clifford_dirac_3d", "clifford_chiral_3d"}}},
       1.0,
       {}},
      {2, "unitarity", {{"unitarity_constant_electric", {"max_step_drift", "norm_drift"}}}, 30.0, {}},
      {3,
       "chapman-kolmogorov",
       {{"composition", {"mode_composition", "kernel_composition", "interacting_composition"}}},
       60.0,
       {}},
      {4,
       "splitting order",
       {{"convergence_constant_electric", {"lie_order", "strang_order"}},
        {"convergence_plane_wave", {"lie_order", "strang_order"}}},
       120.0,
       {}},
      {5, "oracle equivalence", {{"oracle_compare", {"oracle_relative_difference"}}}, 60.0,
       oracle_shape},
      {6, "generator and duhamel", {{"generator_check", {"generator_order", "duhamel_order"}}}, 120.0,
       {}},
      {7,
       "gauge covariance",
       {{"gauge_check", {"field_invariance", "covariance_order", "residual_at_dt_1e-3"}}},
       120.0,
       {}},
      {8,
       "foldy-wouthuysen",
       {{"fw_check",
         {"transform_unitarity", "diagonalization_residual", "conjugation_residual",
          "interacting_difference_slope"}},
        {"fw_check_3d", {"transform_unitarity", "diagonalization_residual", "conjugation_residual"}}},
       60.0,
       {}},
      {9, "causality", {{"causality", {"leakage_outside_cone"}}}, 60.0, {}},
      {10,
       "zitterbewegung",
       {{"zitterbewegung", {"frequency_relative_error", "projected_to_mixed_amplitude"}}},
       60.0,
       {}},
      {11, "correspondence", {{"sweep_hbar", {"monotone_decrease", "error_ratio"}}}, 600.0, {}},
      {12, "eikonal phase", {{"eikonal", {"eikonal_wavenumber"}}}, 60.0, {}},
      {13,
       "classical integrator",
       {{"classical_hyperbolic", {"rk4_order", "hyperbolic_closed_form"}},
        {"classical_magnetic", {"rk4_order", "magnetic_momentum_magnitude"}}},
       60.0,
       {}},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    std::string detail;
    const bool ok = evaluate(runner, c, detail);
    failed += ok ? 0 : 1;
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), detail.c_str());
    std::fflush(stdout);
  }
  std::string detail;
  const bool ok = determinism(runner, detail);
  failed += ok ? 0 : 1;
  std::printf("%s 14 determinism: %s\n", ok ? "PASS" : "FAIL", detail.c_str());
  std::printf("%d of 14 criteria passed\n", 14 - failed);
  return failed == 0 ? 0 : 1;
}
