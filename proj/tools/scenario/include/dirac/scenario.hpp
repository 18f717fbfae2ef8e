#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirac/classical_limit.hpp"
#include "dirac/em_potential.hpp"
#include "dirac/interacting_evolution.hpp"

namespace dirac {

enum class Task {
  free_kernel,
  evolve,
  oracle_compare,
  fw_check,
  classical,
  zb,
  sweep_hbar,
  gauge_check,
  generator_check,
  clifford,
  composition,
  convergence,
  causality,
  eikonal,
};

[[nodiscard]] std::string_view to_string(Task task) noexcept;

struct PacketConfig {
  Vec3 center = Vec3::Zero();
  Vec3 momentum = Vec3::Zero(); ///< lab momentum; the wavenumber is momentum / hbar
  double width = 1.0;
  EnergyBranch branch = EnergyBranch::none;
  std::optional<CVector> spinor;
};

/// A validated run description. Times are lab times; the solver runs in tau = c t.
struct Scenario {
  std::string name;
  Task task = Task::evolve;
  int d = 1;
  int N = 256;
  double dx = 0.05;
  std::string representation = "dirac";
  UnitsConfig units;
  Potential potential = Potential::zero(1);
  std::string potential_kind = "zero";
  std::optional<GaugeFunction> gauge;
  PacketConfig packet;
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-2;
  SplitVariant scheme = SplitVariant::strang;
  std::vector<double> ladder;
  std::vector<double> duhamel_ladder; ///< defaults to ladder
  std::vector<double> hbar_list;
  std::vector<double> e_list;
  std::size_t sample_every = 1;
  std::uint64_t seed = 0;
  double source_half_width = 1.0;

  [[nodiscard]] Grid grid() const { return Grid(d, N, dx); }
  [[nodiscard]] Representation rep() const;
};

/// Reads and validates a scenario file. Throws ErrorKind::io when the file
/// cannot be read and ErrorKind::validation for parse or bound violations.
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// Same as load_scenario for in-memory text; relative table paths resolve
/// against base_dir.
[[nodiscard]] Scenario parse_scenario(const std::string& text, const std::string& origin,
                                      const std::filesystem::path& base_dir);

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation; ///< "<", "<=", ">=", "in"
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct RunResult {
  nlohmann::ordered_json summary;
  std::vector<Check> checks;
  double wall_seconds = 0.0;
  [[nodiscard]] bool passed() const;
};

/// Executes the task and writes summary.json, optional series.csv and
/// kernel.dkf into out_dir. Files depend only on the scenario, so reruns
/// are byte-identical. Wall time goes to run.log.
RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                       unsigned threads = 1);

/// JSON text with every number printed as %.17g.
[[nodiscard]] std::string dump_json(const nlohmann::ordered_json& value, int indent = 2);

/// %.17g
[[nodiscard]] std::string format_double(double v);

/// Thread cap from DIRAC_KERNEL_THREADS, or fallback when unset or invalid.
[[nodiscard]] unsigned env_thread_cap(unsigned fallback);

/// Deterministic uniform doubles in [0, 1) from a 64-bit Mersenne twister.
class SeededUniform {
public:
  explicit SeededUniform(std::uint64_t seed);
  double operator()();

private:
  std::mt19937_64 engine_;
};

} // namespace dirac
