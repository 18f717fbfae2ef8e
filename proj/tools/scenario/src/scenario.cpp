#include "dirac/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace dirac {

using json = nlohmann::json;

std::string_view to_string(Task task) noexcept {
  switch (task) {
  case Task::free_kernel: return "free-kernel";
  case Task::evolve: return "evolve";
  case Task::oracle_compare: return "oracle-compare";
  case Task::fw_check: return "fw-check";
  case Task::classical: return "classical";
  case Task::zb: return "zb";
  case Task::sweep_hbar: return "sweep-hbar";
  case Task::gauge_check: return "gauge-check";
  case Task::generator_check: return "generator-check";
  case Task::clifford: return "clifford";
  case Task::composition: return "composition";
  case Task::convergence: return "convergence";
  case Task::causality: return "causality";
  case Task::eikonal: return "eikonal";
  }
  return "unknown";
}

Representation Scenario::rep() const {
  return representation == "chiral" ? Representation::chiral(d) : Representation::dirac(d);
}

namespace {

[[noreturn]] void reject(const std::string& field, const std::string& message) {
  fail(ErrorKind::validation, "field '" + field + "': " + message);
}

const std::set<std::string> top_level_keys = {
    "name",   "task",    "d",          "N",         "dx",        "representation",
    "hbar",   "c",       "m0",         "e",         "potential", "gauge",
    "packet", "t0",      "t1",         "t",         "dt",        "scheme",
    "ladder", "duhamel_ladder",        "hbar_list", "e_list",    "sample_every",
    "seed",   "source_half_width"};

double number(const json& j, const std::string& field) {
  if (!j.is_number()) reject(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) reject(field, "must be finite");
  return v;
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& prefix = "") {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), prefix + key);
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) reject(field, "expected an integer");
  return j.get<int>();
}

std::vector<double> number_list(const json& j, const std::string& field) {
  if (!j.is_array()) reject(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Vec3 vector_field(const json& obj, const std::string& key, int d, const std::string& prefix,
                  const Vec3& fallback = Vec3::Zero()) {
  if (!obj.contains(key)) return fallback;
  const auto v = number_list(obj.at(key), prefix + key);
  if (static_cast<int>(v.size()) != d)
    reject(prefix + key, "expected " + std::to_string(d) + " components");
  Vec3 out = Vec3::Zero();
  for (int a = 0; a < d; ++a) out[a] = v[a];
  return out;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) reject(where.empty() ? key : where + "." + key, "unknown key");
}

Task parse_task(const json& j) {
  if (!j.is_string()) reject("task", "expected a string");
  const auto s = j.get<std::string>();
  for (Task t : {Task::free_kernel, Task::evolve, Task::oracle_compare, Task::fw_check,
                 Task::classical, Task::zb, Task::sweep_hbar, Task::gauge_check,
                 Task::generator_check, Task::clifford, Task::composition, Task::convergence,
                 Task::causality, Task::eikonal})
    if (to_string(t) == s) return t;
  reject("task", "unknown task '" + s + "'");
}

Potential parse_potential(const json& j, int d, const std::filesystem::path& base_dir,
                          std::string& kind) {
  if (!j.is_object()) reject("potential", "expected an object");
  if (!j.contains("kind") || !j.at("kind").is_string()) reject("potential.kind", "missing");
  kind = j.at("kind").get<std::string>();
  const std::string p = "potential.";
  if (kind == "zero") {
    check_keys(j, {"kind"}, "potential");
    return Potential::zero(d);
  }
  if (kind == "uniform_scalar") {
    check_keys(j, {"kind", "value"}, "potential");
    return Potential::uniform_scalar(d, number_or(j, "value", 0.0, p));
  }
  if (kind == "constant_electric") {
    check_keys(j, {"kind", "field", "gauge"}, "potential");
    const Vec3 field = vector_field(j, "field", d, p);
    const std::string gauge = j.contains("gauge") ? j.at("gauge").get<std::string>() : "scalar";
    const Potential scalar = Potential::constant_electric(d, field);
    if (gauge == "scalar") return scalar;
    if (gauge == "temporal") return gauge_transform(scalar, GaugeFunction::linear_electric(d, -field));
    reject("potential.gauge", "expected 'scalar' or 'temporal'");
  }
  if (kind == "constant_magnetic") {
    check_keys(j, {"kind", "field"}, "potential");
    if (d != 3) reject("potential.kind", "constant_magnetic needs d = 3");
    return Potential::constant_magnetic(vector_field(j, "field", 3, p));
  }
  if (kind == "plane_wave") {
    check_keys(j, {"kind", "wave_vector", "frequency", "amplitude", "scalar_amplitude", "phase"},
               "potential");
    PlaneWave w;
    w.wave_vector = vector_field(j, "wave_vector", d, p);
    w.frequency = number_or(j, "frequency", 0.0, p);
    w.amplitude = vector_field(j, "amplitude", d, p);
    w.scalar_amplitude = number_or(j, "scalar_amplitude", 0.0, p);
    w.phase = number_or(j, "phase", 0.0, p);
    return Potential::plane_wave(d, w);
  }
  if (kind == "gaussian_pulse") {
    check_keys(j,
               {"kind", "direction", "center", "center_time", "width", "carrier", "phase",
                "amplitude"},
               "potential");
    GaussianPulse g;
    g.direction = vector_field(j, "direction", d, p, Vec3::UnitX());
    g.center = vector_field(j, "center", d, p);
    g.center_time = number_or(j, "center_time", 0.0, p);
    g.width = number_or(j, "width", 1.0, p);
    g.carrier = number_or(j, "carrier", 0.0, p);
    g.phase = number_or(j, "phase", 0.0, p);
    g.amplitude = vector_field(j, "amplitude", d, p);
    if (!(g.width > 0.0)) reject("potential.width", "must be positive");
    return Potential::gaussian_pulse(d, g);
  }
  if (kind == "tabulated") {
    check_keys(j, {"kind", "path"}, "potential");
    if (!j.contains("path") || !j.at("path").is_string()) reject("potential.path", "missing");
    std::filesystem::path path = j.at("path").get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    return Potential::tabulated(load_potential_csv(path, d));
  }
  reject("potential.kind", "unknown kind '" + kind + "'");
}

GaugeFunction parse_gauge(const json& j, int d) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    reject("gauge", "expected an object with a kind");
  const auto kind = j.at("kind").get<std::string>();
  const std::string p = "gauge.";
  if (kind == "constant") {
    check_keys(j, {"kind", "value"}, "gauge");
    return GaugeFunction::constant(d, number_or(j, "value", 0.0, p));
  }
  if (kind == "linear_electric") {
    check_keys(j, {"kind", "field"}, "gauge");
    return GaugeFunction::linear_electric(d, vector_field(j, "field", d, p));
  }
  if (kind == "polynomial") {
    check_keys(j, {"kind", "terms", "center", "width"}, "gauge");
    if (!j.contains("terms") || !j.at("terms").is_array()) reject("gauge.terms", "missing");
    std::vector<GaugeFunction::Term> terms;
    for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
      const json& t = j.at("terms")[i];
      const std::string tp = "gauge.terms[" + std::to_string(i) + "].";
      check_keys(t, {"coefficient", "t_power", "x_powers"}, "gauge.terms");
      GaugeFunction::Term term;
      term.coefficient = number_or(t, "coefficient", 0.0, tp);
      term.t_power = t.contains("t_power") ? integer(t.at("t_power"), tp + "t_power") : 0;
      if (t.contains("x_powers")) {
        const auto xp = number_list(t.at("x_powers"), tp + "x_powers");
        if (static_cast<int>(xp.size()) != d) reject(tp + "x_powers", "expected d entries");
        for (int a = 0; a < d; ++a) term.x_powers[a] = static_cast<int>(xp[a]);
      }
      if (term.t_power < 0) reject(tp + "t_power", "must be non-negative");
      for (int a = 0; a < 3; ++a)
        if (term.x_powers[a] < 0) reject(tp + "x_powers", "must be non-negative");
      terms.push_back(term);
    }
    if (j.contains("width"))
      return GaugeFunction(d, std::move(terms), vector_field(j, "center", d, p),
                           number(j.at("width"), "gauge.width"));
    return GaugeFunction(d, std::move(terms));
  }
  reject("gauge.kind", "unknown kind '" + kind + "'");
}

PacketConfig parse_packet(const json& j, int d) {
  if (!j.is_object()) reject("packet", "expected an object");
  check_keys(j, {"center", "momentum", "width", "branch", "spinor"}, "packet");
  PacketConfig pc;
  const std::string p = "packet.";
  pc.center = vector_field(j, "center", d, p);
  pc.momentum = vector_field(j, "momentum", d, p);
  pc.width = number_or(j, "width", 1.0, p);
  if (j.contains("branch")) {
    const auto b = j.at("branch").get<std::string>();
    if (b == "none") pc.branch = EnergyBranch::none;
    else if (b == "positive") pc.branch = EnergyBranch::positive;
    else if (b == "negative") pc.branch = EnergyBranch::negative;
    else reject("packet.branch", "expected none, positive or negative");
  }
  if (j.contains("spinor")) {
    const json& s = j.at("spinor");
    const int dim = d == 1 ? 2 : 4;
    if (!s.is_array() || static_cast<int>(s.size()) != dim)
      reject("packet.spinor", "expected " + std::to_string(dim) + " entries");
    CVector v(dim);
    for (int i = 0; i < dim; ++i) {
      const std::string f = "packet.spinor[" + std::to_string(i) + "]";
      if (s[i].is_array()) {
        const auto pair = number_list(s[i], f);
        if (pair.size() != 2) reject(f, "expected [re, im]");
        v[i] = cplx(pair[0], pair[1]);
      } else {
        v[i] = number(s[i], f);
      }
    }
    if (v.norm() == 0.0) reject("packet.spinor", "must be non-zero");
    pc.spinor = v / v.norm();
  }
  return pc;
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

bool divides(double span, double dt) {
  const double n = std::round(span / dt);
  return std::abs(n * dt - span) <= 1e-12 * std::max(1.0, span);
}

void require_decreasing(const std::vector<double>& v, const std::string& field) {
  for (double x : v)
    if (!(x > 0.0)) reject(field, "entries must be positive");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) reject(field, "entries must be strictly decreasing");
}

bool uses_packet(const Scenario& s) {
  switch (s.task) {
  case Task::evolve:
  case Task::oracle_compare:
  case Task::zb:
  case Task::gauge_check:
  case Task::generator_check:
  case Task::convergence:
  case Task::sweep_hbar:
    return true;
  case Task::fw_check:
    return !s.potential.is_zero() && s.ladder.size() >= 2;
  default:
    return false;
  }
}

void validate(const Scenario& s) {
  if (s.d != 1 && s.d != 3) reject("d", "spatial dimension must be 1 or 3");
  if (!power_of_two(s.N)) reject("N", "points_per_axis must be a power of two");
  if (s.N < 8) reject("N", "points_per_axis must be at least 8");
  if (!(s.dx > 0.0)) reject("dx", "spacing must be positive");
  if (s.representation != "dirac" && s.representation != "chiral")
    reject("representation", "expected 'dirac' or 'chiral'");
  if (!(s.units.hbar > 0.0)) reject("hbar", "must be positive");
  if (!(s.units.c > 0.0)) reject("c", "must be positive");
  if (!(s.units.m0 > 0.0)) reject("m0", "must be positive");
  if (!std::isfinite(s.units.e)) reject("e", "must be finite");
  if (s.t1 < s.t0) reject("t1", "must not precede t0");
  if (!(s.dt > 0.0)) reject("dt", "must be positive");

  const double half = 0.5 * s.N * s.dx;
  const double span = s.units.c * (s.t1 - s.t0);
  const bool stepped = s.task != Task::free_kernel && s.task != Task::clifford &&
                       s.task != Task::causality && s.task != Task::eikonal &&
                       s.task != Task::classical;
  if (stepped && !divides(s.t1 - s.t0, s.dt))
    reject("dt", "time step does not divide the evolution span t1 - t0");

  if (uses_packet(s)) {
    const double sigma = s.packet.width;
    if (sigma < 3.0 * s.dx) {
      std::ostringstream m;
      m << "packet width " << sigma << " is below 3 dx = " << 3.0 * s.dx;
      reject("packet.width", m.str());
    }
    for (int a = 0; a < s.d; ++a) {
      const double reach = std::abs(s.packet.center[a]) + span + 5.0 * sigma;
      if (!(reach < half)) {
        std::ostringstream m;
        m << "wraparound budget violated: |x0| + c t + 5 sigma = " << reach
          << " must be < L/2 = " << half;
        reject("packet", m.str());
      }
    }
  }

  if (!s.ladder.empty()) {
    require_decreasing(s.ladder, "ladder");
    if (s.task != Task::classical && s.task != Task::generator_check)
      for (double dt : s.ladder)
        if (!divides(s.t1 - s.t0, dt)) reject("ladder", "entries must divide t1 - t0");
  }

  switch (s.task) {
  case Task::oracle_compare: {
    if (s.d != 1) reject("d", "oracle-compare is 1+1D only");
    const std::size_t dim = static_cast<std::size_t>(s.N) * 2;
    if (dim > 4096) reject("N", "dense oracle dimension N s exceeds 4096");
    break;
  }
  case Task::sweep_hbar:
    if (s.d != 1) reject("d", "sweep-hbar is 1+1D only");
    if (s.hbar_list.empty()) reject("hbar_list", "required for sweep-hbar");
    require_decreasing(s.hbar_list, "hbar_list");
    if (s.t0 != 0.0) reject("t0", "sweep-hbar starts at t0 = 0");
    break;
  case Task::gauge_check:
    if (!s.gauge) reject("gauge", "required for gauge-check");
    if (s.t0 != 0.0) reject("t0", "gauge-check starts at t0 = 0");
    if (s.ladder.size() < 2) reject("ladder", "gauge-check needs at least two steps");
    break;
  case Task::generator_check:
    if (s.ladder.size() < 2) reject("ladder", "generator-check needs at least two steps");
    break;
  case Task::convergence:
    if (s.ladder.size() < 2) reject("ladder", "convergence needs at least two steps");
    break;
  case Task::classical:
    if (!divides(s.t1 - s.t0, s.dt)) reject("dt", "time step does not divide t1 - t0");
    for (double dt : s.ladder)
      if (!divides(s.t1 - s.t0, dt) || !divides(s.t1 - s.t0, 0.5 * dt))
        reject("ladder", "entries and their halves must divide t1 - t0");
    break;
  case Task::causality: {
    if (s.d != 1) reject("d", "causality is 1+1D only");
    if (!(s.source_half_width > 0.0)) reject("source_half_width", "must be positive");
    const double reach = s.source_half_width + span + 4.0 * s.dx;
    if (!(reach + s.source_half_width < half)) {
      std::ostringstream m;
      m << "wraparound budget violated: w + c t + 4 dx = " << reach << " leaves no margin in L/2 = "
        << half;
      reject("source_half_width", m.str());
    }
    break;
  }
  case Task::eikonal:
    if (s.d != 1) reject("d", "eikonal is 1+1D only");
    if (!(s.t1 > 0.0)) reject("t1", "must be positive");
    if (!(span + 10.0 * s.dx < half)) reject("t1", "light cone does not fit inside the box");
    break;
  case Task::free_kernel:
    if (s.t1 < 0.0) reject("t", "retarded kernel needs t >= 0");
    break;
  default:
    break;
  }
}

} // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin,
                        const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    fail(ErrorKind::validation, origin + ":" + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorKind::validation, origin + ": top level must be an object");

  try {
    check_keys(j, top_level_keys, "");
    Scenario s;
    if (!j.contains("task")) reject("task", "missing");
    s.task = parse_task(j.at("task"));
    s.name = j.contains("name") ? j.at("name").get<std::string>() : std::string(to_string(s.task));
    if (j.contains("d")) s.d = integer(j.at("d"), "d");
    if (j.contains("N")) s.N = integer(j.at("N"), "N");
    s.dx = number_or(j, "dx", s.dx);
    if (j.contains("representation")) s.representation = j.at("representation").get<std::string>();
    s.units.hbar = number_or(j, "hbar", 1.0);
    s.units.c = number_or(j, "c", 1.0);
    s.units.m0 = number_or(j, "m0", 1.0);
    s.units.e = number_or(j, "e", 0.0);
    if (s.d != 1 && s.d != 3) reject("d", "spatial dimension must be 1 or 3");

    s.potential = Potential::zero(s.d);
    if (j.contains("potential"))
      s.potential = parse_potential(j.at("potential"), s.d, base_dir, s.potential_kind);
    if (j.contains("gauge")) s.gauge = parse_gauge(j.at("gauge"), s.d);
    if (j.contains("packet")) s.packet = parse_packet(j.at("packet"), s.d);

    s.t0 = number_or(j, "t0", 0.0);
    if (j.contains("t") && j.contains("t1")) reject("t", "give either t or t1, not both");
    s.t1 = j.contains("t") ? number(j.at("t"), "t") : number_or(j, "t1", 1.0);
    s.dt = number_or(j, "dt", s.dt);
    if (j.contains("scheme")) {
      const auto sch = j.at("scheme").get<std::string>();
      if (sch == "strang") s.scheme = SplitVariant::strang;
      else if (sch == "lie") s.scheme = SplitVariant::lie;
      else reject("scheme", "expected 'strang' or 'lie'");
    }
    if (j.contains("ladder")) s.ladder = number_list(j.at("ladder"), "ladder");
    if (j.contains("duhamel_ladder")) {
      s.duhamel_ladder = number_list(j.at("duhamel_ladder"), "duhamel_ladder");
      require_decreasing(s.duhamel_ladder, "duhamel_ladder");
      for (double dt : s.duhamel_ladder)
        if (!divides(s.t1 - s.t0, dt)) reject("duhamel_ladder", "entries must divide t1 - t0");
    }
    if (j.contains("hbar_list")) s.hbar_list = number_list(j.at("hbar_list"), "hbar_list");
    if (j.contains("e_list")) s.e_list = number_list(j.at("e_list"), "e_list");
    if (j.contains("sample_every")) {
      const int every = integer(j.at("sample_every"), "sample_every");
      if (every < 1) reject("sample_every", "must be at least 1");
      s.sample_every = static_cast<std::size_t>(every);
    }
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_unsigned()) reject("seed", "expected a non-negative integer");
      s.seed = j.at("seed").get<std::uint64_t>();
    }
    s.source_half_width = number_or(j, "source_half_width", 1.0);
    validate(s);
    return s;
  } catch (const json::exception& e) {
    fail(ErrorKind::validation, origin + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::io) throw;
    if (e.kind() == ErrorKind::validation) fail(ErrorKind::validation, origin + ": " + e.what());
    fail(ErrorKind::validation, origin + ": " + std::string(to_string(e.kind())) + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string(), path.parent_path());
}

bool RunResult::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void dump_into(std::string& out, const nlohmann::ordered_json& v, int indent, int depth) {
  const auto newline = [&](int level) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * level), ' ');
  };
  switch (v.type()) {
  case json::value_t::number_float: {
    const double d = v.get<double>();
    out += std::isfinite(d) ? format_double(d) : "null";
    break;
  }
  case json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      break;
    }
    out += '[';
    bool first = true;
    for (const auto& item : v) {
      if (!first) out += ',';
      first = false;
      newline(depth + 1);
      dump_into(out, item, indent, depth + 1);
    }
    newline(depth);
    out += ']';
    break;
  }
  case json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      break;
    }
    out += '{';
    bool first = true;
    for (const auto& [key, item] : v.items()) {
      if (!first) out += ',';
      first = false;
      newline(depth + 1);
      out += json(key).dump();
      out += indent < 0 ? ":" : ": ";
      dump_into(out, item, indent, depth + 1);
    }
    newline(depth);
    out += '}';
    break;
  }
  default:
    out += v.dump();
  }
}

} // namespace

std::string dump_json(const nlohmann::ordered_json& value, int indent) {
  std::string out;
  dump_into(out, value, indent, 0);
  out += '\n';
  return out;
}

unsigned env_thread_cap(unsigned fallback) {
  const char* raw = std::getenv("DIRAC_KERNEL_THREADS");
  if (!raw || !*raw) return fallback;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1) return fallback;
  return static_cast<unsigned>(v);
}

SeededUniform::SeededUniform(std::uint64_t seed) : engine_(seed) {}

double SeededUniform::operator()() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

} // namespace dirac
