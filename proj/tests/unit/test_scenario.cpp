#include <doctest/doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dirac/scenario.hpp"

using namespace dirac;
namespace fs = std::filesystem;

namespace {

const fs::path scenario_dir = DIRAC_SCENARIO_DIR;

Scenario parse(const std::string& text) { return parse_scenario(text, "inline.json", fs::temp_directory_path()); }

std::string validation_message(const std::string& text) {
  try {
    (void)parse(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    return e.what();
  }
  FAIL("scenario was accepted");
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dirac_scenario_test_" + name);
  fs::remove_all(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / ("dirac_scenario_test_" + name);
  std::ofstream(path) << text;
  return path;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + DIRAC_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double result(const RunResult& r, const std::string& key) { return r.summary["results"][key].get<double>(); }

} // namespace

TEST_CASE("minimal free-kernel file gets defaults") {
  const auto s = load_scenario(scenario_dir / "free_kernel_minimal.json");
  CHECK(s.task == Task::free_kernel);
  CHECK(s.d == 1);
  CHECK(s.N == 256);
  CHECK(s.dx == 0.05);
  CHECK(s.scheme == SplitVariant::strang);
  CHECK(s.units.hbar == 1.0);
  CHECK(s.units.c == 1.0);
  CHECK(s.units.m0 == 1.0);
  CHECK(s.units.e == 0.0);
  CHECK(s.representation == "dirac");
  CHECK(s.potential.is_zero());
}

TEST_CASE("grid bounds are named in diagnostics") {
  CHECK(contains(validation_message(R"({"task": "free-kernel", "N": 100, "dx": 0.05, "t": 1})"),
                 "points_per_axis must be a power of two"));
  CHECK(contains(validation_message(R"({"task": "free-kernel", "N": 4, "t": 1})"), "field 'N'"));
  CHECK(contains(validation_message(R"({"task": "free-kernel", "dx": -1, "t": 1})"), "field 'dx'"));
  CHECK(contains(validation_message(R"({"task": "free-kernel", "d": 2, "t": 1})"), "field 'd'"));
}

TEST_CASE("packet at the box edge fails the wraparound budget") {
  const auto msg = validation_message(R"({
    "task": "evolve", "N": 256, "dx": 0.05,
    "packet": {"center": [5.5], "width": 0.5},
    "t1": 1, "dt": 0.01})");
  CHECK(contains(msg, "wraparound budget violated"));
  CHECK(contains(msg, "L/2 = 6.4"));
}

TEST_CASE("structural validation") {
  CHECK(contains(validation_message(R"({"task": "teleport"})"), "unknown task 'teleport'"));
  CHECK(contains(validation_message(R"({"task": "clifford", "bogus": 1})"), "field 'bogus': unknown key"));
  CHECK(contains(validation_message(R"({"task": "clifford", "potential": {"kind": "magic"}})"),
                 "field 'potential.kind'"));
  CHECK(contains(validation_message(R"({"task": "evolve", "t1": 1, "dt": 0.3,
                                        "packet": {"width": 0.5}})"),
                 "field 'dt'"));
  CHECK(contains(validation_message(R"({"task": "convergence", "ladder": [0.01, 0.02],
                                        "packet": {"width": 0.5}})"),
                 "field 'ladder'"));
  CHECK(contains(validation_message(R"({"task": "sweep-hbar", "hbar_list": [0.5, 1],
                                        "packet": {"width": 0.5}})"),
                 "field 'hbar_list'"));
  CHECK(contains(validation_message(R"({"task": "oracle-compare", "N": 4096, "t1": 0.1, "dt": 0.05,
                                        "packet": {"width": 0.5}})"),
                 "field 'N'"));
  CHECK(contains(validation_message(R"({"task": "evolve", "packet": {"width": 0.01}})"),
                 "field 'packet.width'"));
  CHECK(contains(validation_message(R"({"task": "clifford", "d": 1,
                   "potential": {"kind": "constant_magnetic", "field": [0, 0, 1]}})"),
                 "constant_magnetic"));
  CHECK(contains(validation_message(R"({"task": "clifford", "hbar": 0})"), "field 'hbar'"));
  CHECK(contains(validation_message(R"({"task": "clifford", "scheme": "euler"})"), "field 'scheme'"));
}

TEST_CASE("parse errors carry the line number") {
  const auto msg = validation_message("{\n  \"task\": \"clifford\",\n  \"N\": ,\n}");
  CHECK(contains(msg, "inline.json:3"));
  CHECK(contains(validation_message("[1, 2]"), "top level must be an object"));
}

TEST_CASE("missing files are io errors") {
  try {
    (void)load_scenario("/nonexistent/scenario.json");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("potential and gauge specifications") {
  const auto s = parse(R"({
    "task": "gauge-check", "N": 256, "dx": 0.1, "e": 1,
    "potential": {"kind": "constant_electric", "field": [0.3]},
    "gauge": {"kind": "polynomial", "terms": [{"coefficient": 0.5, "t_power": 1, "x_powers": [1]}],
              "center": [0], "width": 2},
    "packet": {"width": 1, "momentum": [0.5], "branch": "positive"},
    "t1": 1, "dt": 0.01, "ladder": [0.02, 0.01]})");
  CHECK(s.potential_kind == "constant_electric");
  REQUIRE(s.gauge.has_value());
  CHECK(s.packet.branch == EnergyBranch::positive);
  CHECK(s.potential.evaluate(0.0, Vec3(2.0, 0, 0)).scalar == doctest::Approx(-0.6));

  // temporal gauge: A0 = 0, A = -E tau
  const auto t = parse(R"({"task": "clifford",
    "potential": {"kind": "constant_electric", "field": [0.3], "gauge": "temporal"}})");
  const auto v = t.potential.evaluate(2.0, Vec3(1.0, 0, 0));
  CHECK(std::abs(v.scalar) < 1e-15);
  CHECK(v.vector[0] == doctest::Approx(-0.6));
}

TEST_CASE("tabulated potentials resolve relative to the scenario file") {
  const auto dir = fresh_dir("tab");
  fs::create_directories(dir);
  std::ofstream(dir / "pot.csv") << "t,x,A0,Ax\n0,-20,1,0\n0,20,1,0\n5,-20,1,0\n5,20,1,0\n";
  std::ofstream(dir / "s.json") << R"({"task": "clifford", "potential": {"kind": "tabulated", "path": "pot.csv"}})";
  const auto s = load_scenario(dir / "s.json");
  CHECK(s.potential.evaluate(1.0, Vec3::Zero()).scalar == doctest::Approx(1.0));
}

TEST_CASE("every shipped scenario validates") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(scenario_dir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW((void)load_scenario(entry.path()));
    ++count;
  }
  CHECK(count >= 14);
}

TEST_CASE("json output uses 17 significant digits") {
  nlohmann::ordered_json j;
  j["a"] = 0.1;
  j["b"] = 1e-300;
  j["c"] = std::nan("");
  j["d"] = 3;
  j["e"] = "x";
  const auto text = dump_json(j);
  CHECK(contains(text, "\"a\": 0.10000000000000001"));
  CHECK(contains(text, "\"b\": 1e-300"));
  CHECK(contains(text, "\"c\": null"));
  CHECK(contains(text, "\"d\": 3"));
  CHECK(format_double(2.0 / 3.0) == "0.66666666666666663");
}

TEST_CASE("seeded uniforms are reproducible") {
  SeededUniform a(42);
  SeededUniform b(42);
  SeededUniform c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a();
    CHECK(x == b());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    differs = differs || x != c();
  }
  CHECK(differs);
}

TEST_CASE("thread cap from the environment") {
  ::setenv("DIRAC_KERNEL_THREADS", "3", 1);
  CHECK(env_thread_cap(1) == 3);
  ::setenv("DIRAC_KERNEL_THREADS", "zero", 1);
  CHECK(env_thread_cap(5) == 5);
  ::unsetenv("DIRAC_KERNEL_THREADS");
  CHECK(env_thread_cap(2) == 2);
}

TEST_CASE("evolve at zero potential reports a tiny norm drift") {
  const auto s = parse(R"({"name": "free", "task": "evolve", "N": 256, "dx": 0.1,
    "packet": {"width": 1, "momentum": [1]}, "t1": 1, "dt": 0.01, "sample_every": 10})");
  const auto out = fresh_dir("evolve");
  const auto r = run_scenario(s, out);
  CHECK(r.passed());
  CHECK(result(r, "norm_drift") < 1e-10);
  CHECK(r.summary["passed"].get<bool>());
  CHECK(fs::exists(out / "summary.json"));
  CHECK(fs::exists(out / "run.log"));
  const auto csv = slurp(out / "series.csv");
  CHECK(csv.rfind("t,norm", 0) == 0);
  // header plus 11 samples
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}

TEST_CASE("oracle-compare and sweep summaries") {
  const auto oracle = run_scenario(load_scenario(scenario_dir / "oracle_compare.json"), fresh_dir("oracle"));
  CHECK(oracle.passed());
  CHECK(result(oracle, "relative_difference") < 1e-9);

  const auto sweep = run_scenario(load_scenario(scenario_dir / "sweep_hbar.json"), fresh_dir("sweep"), 2);
  CHECK(sweep.passed());
  CHECK(sweep.summary["results"]["monotone"].get<bool>());
  const auto& rows = sweep.summary["results"]["rows"];
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i]["error"].get<double>() < rows[i - 1]["error"].get<double>());
}

TEST_CASE("free-kernel writes a kernel dump") {
  const auto out = fresh_dir("kernel");
  const auto r = run_scenario(load_scenario(scenario_dir / "free_kernel_minimal.json"), out);
  CHECK(r.passed());
  const auto dkf = slurp(out / "kernel.dkf");
  CHECK(dkf.rfind("DKF1", 0) == 0);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const auto s = load_scenario(scenario_dir / "composition.json");
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  (void)run_scenario(s, a, 1);
  (void)run_scenario(s, b, 4);
  for (const char* f : {"summary.json", "series.csv"}) {
    if (!fs::exists(a / f)) continue;
    CAPTURE(f);
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "summary.json").size() > 100);
}

TEST_CASE("command line exit codes") {
  const auto out = fresh_dir("cli");
  CHECK(cli("validate \"" + (scenario_dir / "clifford.json").string() + "\"") == 0);
  CHECK(cli("run \"" + (scenario_dir / "clifford.json").string() + "\" --out \"" + out.string() +
            "\" -j 2") == 0);
  CHECK(fs::exists(out / "summary.json"));

  const auto bad = write_file("bad_n.json", R"({"task": "free-kernel", "N": 100, "t": 1})");
  CHECK(cli("validate \"" + bad.string() + "\"") == 2);
  CHECK(cli("run \"" + bad.string() + "\" --out \"" + out.string() + "\"") == 2);

  CHECK(cli("run /nonexistent/scenario.json") == 4);

  // too few samples per zitterbewegung period: a numerical failure, not a bad file
  const auto coarse = write_file("coarse_zb.json", R"({"task": "zb", "N": 256, "dx": 0.1,
    "packet": {"width": 1, "spinor": [[1, 0], [1, 0]]}, "t1": 6, "dt": 0.2})");
  CHECK(cli("validate \"" + coarse.string() + "\"") == 0);
  CHECK(cli("run \"" + coarse.string() + "\" --out \"" + out.string() + "\"") == 3);

  CHECK(cli("") != 0);
}
