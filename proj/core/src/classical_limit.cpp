#include "dirac/classical_limit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "dirac/foldy_wouthuysen.hpp"
#include "dirac/fourier.hpp"

namespace dirac {

void UnitsConfig::validate() const {
  if (!(hbar > 0.0)) fail(ErrorKind::configuration, "hbar must be positive");
  if (!(c > 0.0)) fail(ErrorKind::configuration, "c must be positive");
  if (!(m0 > 0.0)) fail(ErrorKind::configuration, "m0 must be positive");
  if (!std::isfinite(e)) fail(ErrorKind::configuration, "e must be finite");
}

Vec3 ClassicalState::velocity(const UnitsConfig& units) const {
  const double c = units.c;
  return p * c * c / std::sqrt(units.m0 * units.m0 * c * c * c * c + p.squaredNorm() * c * c);
}

namespace {

struct Phase {
  Vec3 x;
  Vec3 p;
};

Phase derivative(double t, const Phase& s, const Potential& potential, const UnitsConfig& units) {
  const int d = potential.spatial_dim();
  const ClassicalState cs{t, s.x, s.p};
  const Vec3 v = cs.velocity(units);
  const FieldStrength f = potential.fields(units.evolution_time(t), s.x);
  Vec3 force = f.electric;
  if (d == 3) force += v.cross(f.magnetic) / units.c;
  force *= units.e;
  Phase out{v, force};
  for (int a = d; a < 3; ++a) {
    out.x[a] = 0.0;
    out.p[a] = 0.0;
  }
  if (!out.x.allFinite() || !out.p.allFinite())
    fail(ErrorKind::domain, "classical equations of motion are not finite");
  return out;
}

} // namespace

Trajectory integrate_classical(const ClassicalState& start, const Potential& potential, double t1,
                               double dt, const UnitsConfig& units,
                               std::optional<double> box_half_extent) {
  units.validate();
  const std::size_t n = slice_count(t1 - start.t, dt);
  const int d = potential.spatial_dim();
  Trajectory traj{dt, {}};
  traj.states.reserve(n + 1);
  traj.states.push_back(start);
  Phase s{start.x, start.p};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = start.t + static_cast<double>(k) * dt;
    const Phase k1 = derivative(t, s, potential, units);
    const Phase k2 = derivative(t + 0.5 * dt, {s.x + 0.5 * dt * k1.x, s.p + 0.5 * dt * k1.p},
                                potential, units);
    const Phase k3 = derivative(t + 0.5 * dt, {s.x + 0.5 * dt * k2.x, s.p + 0.5 * dt * k2.p},
                                potential, units);
    const Phase k4 =
        derivative(t + dt, {s.x + dt * k3.x, s.p + dt * k3.p}, potential, units);
    s.x += dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    s.p += dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    if (box_half_extent) {
      for (int a = 0; a < d; ++a)
        if (!(std::abs(s.x[a]) < *box_half_extent)) {
          std::ostringstream msg;
          msg << "classical trajectory leaves the box at t = " << t + dt;
          fail(ErrorKind::domain, msg.str());
        }
    }
    traj.states.push_back({start.t + static_cast<double>(k + 1) * dt, s.x, s.p});
  }
  return traj;
}

double classical_action(const Trajectory& trajectory, const Potential& potential,
                        const UnitsConfig& units) {
  units.validate();
  const int d = potential.spatial_dim();
  const double c = units.c;
  double action = 0.0;
  const auto& st = trajectory.states;
  for (std::size_t k = 0; k + 1 < st.size(); ++k) {
    const double dt = st[k + 1].t - st[k].t;
    if (!(dt > 0.0)) fail(ErrorKind::domain, "trajectory times must increase");
    Vec3 dx = Vec3::Zero();
    for (int a = 0; a < d; ++a) dx[a] = st[k + 1].x[a] - st[k].x[a];
    const Vec3 v = dx / dt;
    const double beta2 = v.squaredNorm() / (c * c);
    if (!(beta2 < 1.0))
      fail(ErrorKind::domain, "trajectory step " + std::to_string(k) + " is not slower than light");
    const FourPotential mid = potential.evaluate(units.evolution_time(st[k].t + 0.5 * dt),
                                                 0.5 * (st[k].x + st[k + 1].x));
    const double lagrangian = -units.m0 * c * c * std::sqrt(1.0 - beta2) +
                              units.e * (mid.vector.dot(v) / c - mid.scalar);
    action += lagrangian * dt;
  }
  return action;
}

double eikonal_free(const Vec3& x, double t, double m0) {
  const double r = x.norm();
  if (!(r < t)) fail(ErrorKind::domain, "eikonal is defined strictly inside the light cone");
  return m0 * std::sqrt(t * t - r * r);
}

bool SweepTable::monotone_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].error < rows[i - 1].error)) return false;
  return true;
}

namespace {

SweepRow sweep_member(const SweepScenario& sc, double hbar, const UnitsConfig& base) {
  UnitsConfig units = base;
  units.hbar = hbar;
  units.validate();
  if (sc.potential.spatial_dim() != 1) fail(ErrorKind::structural, "hbar sweep is 1+1D only");
  const Grid grid(1, sc.points_per_axis, sc.spacing);
  const Representation rep = Representation::dirac(1);

  SweepRow row;
  row.hbar = hbar;
  row.mass = units.solver_mass();
  row.sigma = sc.sigma0 * std::sqrt(hbar / sc.reference_hbar);

  const double tau = units.evolution_time(sc.duration);
  const std::size_t n = slice_count(tau, sc.dt);
  const Trajectory traj = integrate_classical({0.0, Vec3(sc.x0, 0, 0), Vec3(sc.p0, 0, 0)},
                                              sc.potential, sc.duration, sc.dt / units.c, units,
                                              grid.half_extent());

  double p_max = 0.0;
  for (const auto& s : traj.states) p_max = std::max(p_max, std::abs(s.p[0]));
  p_max += 5.0 * hbar / (2.0 * row.sigma);
  const double wavelength = 2.0 * pi * hbar / p_max;
  if (wavelength < 8.0 * sc.spacing) {
    std::ostringstream msg;
    msg << "hbar = " << hbar << ": shortest de Broglie wavelength " << wavelength
        << " is resolved by fewer than 8 grid points";
    fail(ErrorKind::resolution, msg.str());
  }

  PacketSpec spec;
  spec.center = Vec3(sc.x0, 0, 0);
  spec.momentum = Vec3(sc.p0 / hbar, 0, 0);
  spec.width = row.sigma;
  spec.branch = EnergyBranch::positive;
  spec.mass = row.mass;
  const SpinorField psi0 = gaussian_packet(grid, rep, spec);
  SpinorField fw = fw_transform(psi0, row.mass);
  fw -= psi0;
  row.fw_basis_difference = fw.norm();

  const std::size_t stride = std::max<std::size_t>(1, sc.sample_every);
  EvolveOptions opts;
  opts.observer = [&](std::size_t k, double t, const SpinorField& psi) {
    if (k % stride != 0 && k != n) return;
    row.times.push_back(t / units.c);
    row.centroid.push_back(position_mean(psi, 0));
    row.classical.push_back(traj.states[k].x[0]);
  };
  (void)evolve(psi0, sc.potential, 0.0, tau, {sc.variant, sc.dt}, row.mass,
               units.solver_coupling(), opts);
  for (std::size_t i = 0; i < row.times.size(); ++i)
    row.error = std::max(row.error, std::abs(row.centroid[i] - row.classical[i]));
  return row;
}

} // namespace

SweepTable hbar_sweep(const SweepScenario& scenario, const std::vector<double>& hbar_list,
                      const UnitsConfig& units_base, unsigned threads) {
  if (hbar_list.empty()) fail(ErrorKind::configuration, "hbar list is empty");
  for (std::size_t i = 1; i < hbar_list.size(); ++i)
    if (!(hbar_list[i] < hbar_list[i - 1]))
      fail(ErrorKind::configuration, "hbar list must be decreasing");

  const std::size_t count = hbar_list.size();
  SweepTable table;
  table.rows.resize(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        table.rows[i] = sweep_member(scenario, hbar_list[i], units_base);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned pool = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(count));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < pool; ++w) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return table;
}

void ZitterbewegungRecorder::record(double t, const SpinorField& psi) {
  const int d = psi.grid().spatial_dim();
  const double n2 = psi.norm_squared();
  Vec3 x = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  for (int a = 0; a < d; ++a) {
    x[a] = position_mean(psi, a);
    v[a] = expectation(psi, psi.rep().alpha(a)).real() / n2;
  }
  data_.times.push_back(t);
  data_.position.push_back(x);
  data_.velocity.push_back(v);
}

namespace {

// Half peak-to-peak of the first component after removing the least-squares line.
double oscillation_amplitude(const std::vector<double>& t, const std::vector<Vec3>& series) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += series[i][0];
    stt += t[i] * t[i];
    sty += t[i] * series[i][0];
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icpt = (sy - slope * st) / n;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = series[i][0] - (icpt + slope * t[i]);
    lo = i == 0 ? r : std::min(lo, r);
    hi = i == 0 ? r : std::max(hi, r);
  }
  return 0.5 * (hi - lo);
}

} // namespace

ZitterbewegungObservables ZitterbewegungRecorder::finish(double expected_energy) const {
  const auto& t = data_.times;
  if (t.size() < 64) fail(ErrorKind::sampling, "zitterbewegung series needs at least 64 samples");
  const double dt = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * dt)
      fail(ErrorKind::sampling, "zitterbewegung series is not uniformly sampled");
  const double period = pi / expected_energy;
  if (dt > period / 64.0 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "sampling interval " << dt << " gives fewer than 64 samples per period " << period;
    fail(ErrorKind::sampling, msg.str());
  }
  ZitterbewegungObservables out = data_;
  std::vector<double> v1;
  for (const auto& v : data_.velocity) v1.push_back(v[0]);
  out.dominant_frequency = dominant_frequency(v1, dt);
  out.velocity_amplitude = oscillation_amplitude(t, data_.velocity);
  out.position_amplitude = oscillation_amplitude(t, data_.position);
  return out;
}

double dominant_frequency(const std::vector<double>& series, double dt) {
  const std::size_t n = series.size();
  if (n < 8) fail(ErrorKind::sampling, "series too short for a spectrum");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  std::size_t m = 1;
  while (m < 8 * n) m <<= 1;
  std::vector<cplx> buf(m, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(j) / (n - 1)));
    buf[j] = w * (series[j] - mean);
  }
  fft_1d(buf);

  std::size_t best = 1;
  for (std::size_t k = 1; k < m / 2; ++k)
    if (std::abs(buf[k]) > std::abs(buf[best])) best = k;
  double shift = 0.0;
  if (best > 1 && best + 1 < m / 2) {
    const double a = std::log(std::abs(buf[best - 1]));
    const double b = std::log(std::abs(buf[best]));
    const double c = std::log(std::abs(buf[best + 1]));
    const double denom = a - 2.0 * b + c;
    if (denom != 0.0) shift = 0.5 * (a - c) / denom;
  }
  return 2.0 * pi * (static_cast<double>(best) + shift) / (static_cast<double>(m) * dt);
}

EikonalReport eikonal_phase_check(const Grid& grid, double t, const UnitsConfig& units) {
  units.validate();
  if (grid.spatial_dim() != 1) fail(ErrorKind::structural, "eikonal check is 1+1D only");
  const double tau = units.evolution_time(t);
  const double m = units.solver_mass();
  const double dx = grid.spacing();
  if (!(tau + 10.0 * dx < grid.half_extent()))
    fail(ErrorKind::budget, "light cone does not fit inside the box");

  EikonalReport report;
  report.wavelengths = 0.8 * m * tau / (2.0 * pi);
  if (report.wavelengths < 10.0) {
    std::ostringstream msg;
    msg << "only " << report.wavelengths << " wavelengths across the window, need 10";
    fail(ErrorKind::sampling, msg.str());
  }
  // largest predicted wavenumber sits at r = 0.8 tau
  if (m * 0.8 / 0.6 * 2.0 * dx > 0.5 * pi)
    fail(ErrorKind::resolution, "grid too coarse for the eikonal phase gradient");

  const Representation rep = Representation::dirac(1);
  const ModeTable full = fw_kernel(grid, rep, tau, m).symbol();
  const double width = 2.0 * dx;
  ModeTable lower(grid, 2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double p = grid.momentum(k)[0];
    CMatrix b = CMatrix::Zero(2, 2);
    b(1, 1) = full.matrix(k)(1, 1) * std::exp(-0.5 * p * p * width * width);
    lower.set_block(k, b);
  }
  const KernelField smeared = kernel_from_symbol(grid, rep, tau, m, lower);
  const auto value = [&](int j) { return smeared.entry(static_cast<std::size_t>(j), 1, 1); };

  const int n = grid.points_per_axis();
  for (int j = 1; j + 1 < n; ++j) {
    const double r = std::abs(grid.coordinate(j));
    if (!(r > 0.1 * tau && r < 0.8 * tau)) continue;
    const double measured = std::abs(std::arg(value(j + 1) * std::conj(value(j - 1)))) / (2.0 * dx);
    const double predicted = m * r / std::sqrt(tau * tau - r * r);
    report.r.push_back(grid.coordinate(j));
    report.measured.push_back(measured);
    report.predicted.push_back(predicted);
    report.max_relative_deviation =
        std::max(report.max_relative_deviation, std::abs(measured - predicted) / predicted);
  }
  return report;
}

} // namespace dirac
