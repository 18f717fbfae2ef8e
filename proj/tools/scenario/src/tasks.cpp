#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dirac/classical_limit.hpp"
#include "dirac/foldy_wouthuysen.hpp"
#include "dirac/free_propagator.hpp"
#include "dirac/path_sum_oracle.hpp"
#include "dirac/scenario.hpp"

namespace dirac {

using ojson = nlohmann::ordered_json;

namespace {

struct Series {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct TaskOutput {
  ojson results = ojson::object();
  std::vector<Check> checks;
  std::optional<Series> series;
  std::optional<KernelField> kernel;

  void below(const std::string& name, double value, double bound) {
    checks.push_back({name, value, "<", 0.0, bound, value < bound});
  }
  void at_most(const std::string& name, double value, double bound) {
    checks.push_back({name, value, "<=", 0.0, bound, value <= bound});
  }
  void at_least(const std::string& name, double value, double bound) {
    checks.push_back({name, value, ">=", bound, 0.0, value >= bound});
  }
  void within(const std::string& name, double value, double lo, double hi) {
    checks.push_back({name, value, "in", lo, hi, value >= lo && value <= hi});
  }
};

ojson vec_json(const Vec3& v, int d) {
  ojson a = ojson::array();
  for (int i = 0; i < d; ++i) a.push_back(v[i]);
  return a;
}

ojson list_json(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(x);
  return a;
}

double solver_mass(const Scenario& s) { return s.units.solver_mass(); }
double solver_coupling(const Scenario& s) { return s.units.solver_coupling(); }
double tau(const Scenario& s, double t) { return s.units.evolution_time(t); }

SplitScheme scheme_of(const Scenario& s, SplitVariant v, double lab_dt) {
  return {v, tau(s, lab_dt)};
}

std::vector<double> to_tau(const Scenario& s, const std::vector<double>& lab) {
  std::vector<double> out;
  for (double x : lab) out.push_back(tau(s, x));
  return out;
}

SpinorField make_packet(const Scenario& s, std::optional<EnergyBranch> branch = std::nullopt) {
  PacketSpec spec;
  spec.center = s.packet.center;
  spec.momentum = s.packet.momentum / s.units.hbar;
  spec.width = s.packet.width;
  spec.branch = branch.value_or(s.packet.branch);
  spec.mass = solver_mass(s);
  spec.spinor = s.packet.spinor;
  return gaussian_packet(s.grid(), s.rep(), spec);
}

double relative_difference(const SpinorField& a, const SpinorField& b) {
  return (a - b).norm() / b.norm();
}

// free-kernel ---------------------------------------------------------------

TaskOutput run_free_kernel(const Scenario& s) {
  TaskOutput out;
  const Grid grid = s.grid();
  const double t = tau(s, s.t1);
  const double m = solver_mass(s);
  KernelField kernel = free_kernel(grid, s.rep(), t, m);
  const KernelField half = free_kernel(grid, s.rep(), 0.5 * t, m);
  const double ck = max_difference(compose(half, half), kernel);

  ojson norms = ojson::array();
  double worst_norm = 0.0;
  const double delta_norm = 1.0 / std::sqrt(grid.cell_volume());
  for (const auto& col : kernel.columns()) {
    norms.push_back(col.norm());
    worst_norm = std::max(worst_norm, std::abs(col.norm() / delta_norm - 1.0));
  }
  out.results["tau"] = t;
  out.results["solver_mass"] = m;
  out.results["column_norms"] = norms;
  out.results["half_step_composition"] = ck;
  out.below("column_norm_preserved", worst_norm, 1e-12);
  out.below("half_step_composition", ck, 1e-10);

  // one spatial line through the origin along x
  Series series;
  series.header = {"x"};
  const int sd = kernel.spinor_dim();
  for (int r = 0; r < sd; ++r)
    for (int c = 0; c < sd; ++c) {
      series.header.push_back("re_K" + std::to_string(r) + std::to_string(c));
      series.header.push_back("im_K" + std::to_string(r) + std::to_string(c));
    }
  const std::size_t stride =
      grid.spatial_dim() == 1 ? 1 : static_cast<std::size_t>(grid.points_per_axis()) *
                                        grid.points_per_axis();
  const std::size_t base = grid.origin_index() - (grid.points_per_axis() / 2) * stride;
  for (int i = 0; i < grid.points_per_axis(); ++i) {
    const std::size_t point = base + static_cast<std::size_t>(i) * stride;
    std::vector<double> row{grid.position(point)[0]};
    for (int r = 0; r < sd; ++r)
      for (int c = 0; c < sd; ++c) {
        row.push_back(kernel.entry(point, r, c).real());
        row.push_back(kernel.entry(point, r, c).imag());
      }
    series.rows.push_back(std::move(row));
  }
  out.series = std::move(series);
  out.kernel = std::move(kernel);
  return out;
}

// evolve --------------------------------------------------------------------

TaskOutput run_evolve(const Scenario& s) {
  TaskOutput out;
  const int d = s.d;
  const SpinorField psi0 = make_packet(s);
  Series series;
  series.header = {"t", "norm"};
  for (int a = 0; a < d; ++a) series.header.push_back("x" + std::to_string(a + 1));
  for (int a = 0; a < d; ++a) series.header.push_back("alpha" + std::to_string(a + 1));
  const Representation rep = s.rep();
  const double c = s.units.c;

  EvolveOptions opts;
  opts.observer = [&](std::size_t step, double t, const SpinorField& psi) {
    if (step % s.sample_every != 0) return;
    std::vector<double> row{t / c, psi.norm()};
    for (int a = 0; a < d; ++a) row.push_back(position_mean(psi, a));
    for (int a = 0; a < d; ++a) row.push_back(expectation(psi, rep.alpha(a)).real());
    series.rows.push_back(std::move(row));
  };
  const EvolutionReport rep_out =
      evolve(psi0, s.potential, tau(s, s.t0), tau(s, s.t1), scheme_of(s, s.scheme, s.dt),
             solver_mass(s), solver_coupling(s), opts);

  double step_drift = 0.0;
  for (std::size_t k = 1; k < rep_out.norm_log.size(); ++k)
    step_drift = std::max(step_drift, std::abs(rep_out.norm_log[k] - rep_out.norm_log[k - 1]));
  Vec3 centroid = Vec3::Zero();
  for (int a = 0; a < d; ++a) centroid[a] = position_mean(rep_out.final_state, a);

  out.results["steps"] = rep_out.steps;
  out.results["initial_norm"] = rep_out.norm_log.front();
  out.results["final_norm"] = rep_out.norm_log.back();
  out.results["final_centroid"] = vec_json(centroid, d);
  out.results["norm_drift"] = rep_out.norm_drift();
  out.results["max_step_drift"] = step_drift;
  out.below("norm_drift", rep_out.norm_drift(), 1e-10);
  out.below("max_step_drift", step_drift, 1e-13);
  out.series = std::move(series);
  return out;
}

// oracle-compare ------------------------------------------------------------

TaskOutput run_oracle(const Scenario& s) {
  TaskOutput out;
  const Grid grid = s.grid();
  const Representation rep = s.rep();
  const double m = solver_mass(s);
  const double e = solver_coupling(s);
  const double t0 = tau(s, s.t0);
  const double t1 = tau(s, s.t1);
  const double dt = tau(s, s.dt);
  const SpinorField psi0 = make_packet(s);

  const EvolutionReport fast = evolve(psi0, s.potential, t0, t1, {SplitVariant::lie, dt}, m, e);
  const CMatrix dense = dense_propagator(grid, rep, s.potential, t0, t1, dt, m, e);
  const SpinorField slow = unflatten(grid, rep, dense * flatten(psi0));
  const double diff = relative_difference(fast.final_state, slow);

  const CMatrix transfer = build_transfer(grid, rep, m, dt);
  const CMatrix transfer2 = build_transfer(grid, rep, m, 2.0 * dt);
  const double semigroup = (transfer * transfer - transfer2).cwiseAbs().maxCoeff();
  const SpinorField via_transfer = unflatten(grid, rep, transfer * flatten(psi0));
  const double vs_fft = relative_difference(via_transfer, free_step(psi0, dt, m));

  out.results["slices"] = slice_count(t1 - t0, dt);
  out.results["relative_difference"] = diff;
  out.results["propagator_unitarity"] = unitarity_residual(dense);
  out.results["transfer_semigroup"] = semigroup;
  out.results["transfer_vs_spectral_step"] = vs_fft;
  out.below("oracle_relative_difference", diff, 1e-9);
  out.below("propagator_unitarity", unitarity_residual(dense), 1e-10);
  out.below("transfer_semigroup", semigroup, 1e-10);
  out.below("transfer_vs_spectral_step", vs_fft, 1e-11);
  return out;
}

// fw-check ------------------------------------------------------------------

TaskOutput run_fw(const Scenario& s) {
  TaskOutput out;
  const Grid grid = s.grid();
  const Representation rep = s.rep();
  const double m = solver_mass(s);
  const double t = tau(s, s.t1 - s.t0);

  double diag = 0.0;
  double unitarity = 0.0;
  const CMatrix id = CMatrix::Identity(rep.spinor_dim(), rep.spinor_dim());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec3 p = grid.momentum(k);
    if (m == 0.0 && p.norm() == 0.0) continue;
    diag = std::max(diag, fw_diagonalization_residual(rep, p, m));
    const CMatrix T = fw_matrix(rep, p, m);
    unitarity = std::max(unitarity, (T.adjoint() * T - id).cwiseAbs().maxCoeff());
  }
  const double conj = fw_conjugation_check(grid, rep, t, m);
  out.results["tau"] = t;
  out.results["diagonalization_residual"] = diag;
  out.results["transform_unitarity"] = unitarity;
  out.results["conjugation_residual"] = conj;
  out.below("diagonalization_residual", diag, 1e-12);
  out.below("transform_unitarity", unitarity, 1e-13);
  out.below("conjugation_residual", conj, 1e-12);

  if (rep.beta_is_diagonal() && rep.spatial_dim() == 1) {
    double branch = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const CMatrix u = fw_mode_multiplier(rep, dispersion(grid.momentum(k), m, 1), t);
      branch = std::max(branch, std::abs(u(1, 1) - std::conj(u(0, 0))));
    }
    out.results["branch_conjugacy"] = branch;
    out.at_most("branch_conjugacy", branch, 0.0);
  }

  if (!s.potential.is_zero() && s.ladder.size() >= 2) {
    const SpinorField psi0 = make_packet(s);
    std::vector<double> diffs;
    for (double dt : s.ladder)
      diffs.push_back(fw_interacting_compare(psi0, s.potential, tau(s, s.t0), tau(s, s.t1),
                                             scheme_of(s, s.scheme, dt), m,
                                             solver_coupling(s)));
    const double slope = loglog_slope(s.ladder, diffs);
    out.results["interacting_dts"] = list_json(s.ladder);
    out.results["interacting_differences"] = list_json(diffs);
    out.results["interacting_slope"] = slope;
    out.at_least("interacting_difference_slope", slope, 0.9);
  }
  return out;
}

// classical -----------------------------------------------------------------

TaskOutput run_classical(const Scenario& s) {
  TaskOutput out;
  const int d = s.d;
  const ClassicalState start{s.t0, s.packet.center, s.packet.momentum};
  const double box = s.grid().half_extent();
  const Trajectory traj = integrate_classical(start, s.potential, s.t1, s.dt, s.units, box);
  const ClassicalState& last = traj.states.back();

  Series series;
  series.header = {"t"};
  for (const char* q : {"x", "p", "v"})
    for (int a = 0; a < d; ++a) series.header.push_back(q + std::to_string(a + 1));
  for (std::size_t k = 0; k < traj.states.size(); k += s.sample_every) {
    const ClassicalState& st = traj.states[k];
    const Vec3 v = st.velocity(s.units);
    std::vector<double> row{st.t};
    for (const Vec3* q : {&st.x, &st.p, &v})
      for (int a = 0; a < d; ++a) row.push_back((*q)[a]);
    series.rows.push_back(std::move(row));
  }

  out.results["steps"] = traj.states.size() - 1;
  out.results["final_x"] = vec_json(last.x, d);
  out.results["final_p"] = vec_json(last.p, d);
  out.results["action"] = classical_action(traj, s.potential, s.units);

  if (s.ladder.size() >= 2) {
    std::vector<double> diffs;
    for (double h : s.ladder) {
      const ClassicalState a = integrate_classical(start, s.potential, s.t1, h, s.units, box)
                                   .states.back();
      const ClassicalState b =
          integrate_classical(start, s.potential, s.t1, 0.5 * h, s.units, box).states.back();
      diffs.push_back(std::sqrt((a.x - b.x).squaredNorm() + (a.p - b.p).squaredNorm()));
    }
    const double slope = loglog_slope(s.ladder, diffs);
    out.results["ladder"] = list_json(s.ladder);
    out.results["self_convergence_differences"] = list_json(diffs);
    out.results["self_convergence_slope"] = slope;
    out.within("rk4_order", slope, 3.8, 4.2);
  }

  if (s.potential.kind() == PotentialKind::constant_electric && d == 1) {
    const double eE = s.units.e * s.potential.fields(tau(s, s.t0), start.x).electric[0];
    if (eE != 0.0) {
      const double m0 = s.units.m0;
      const double c = s.units.c;
      const auto W = [&](double p) { return std::sqrt(m0 * m0 * c * c * c * c + p * p * c * c); };
      const double p1 = start.p[0] + eE * (s.t1 - s.t0);
      const double x1 = start.x[0] + (W(p1) - W(start.p[0])) / eE;
      const double err = std::abs(last.x[0] - x1) + std::abs(last.p[0] - p1);
      out.results["closed_form_x"] = x1;
      out.results["closed_form_error"] = err;
      out.below("hyperbolic_closed_form", err, 1e-8);
    }
  }
  if (s.potential.kind() == PotentialKind::constant_magnetic) {
    double drift = 0.0;
    const double p0 = start.p.norm();
    for (const auto& st : traj.states) drift = std::max(drift, std::abs(st.p.norm() - p0));
    out.results["speed_drift"] = drift;
    out.below("magnetic_momentum_magnitude", drift, 1e-10);
  }
  out.series = std::move(series);
  return out;
}

// zb ------------------------------------------------------------------------

TaskOutput run_zb(const Scenario& s) {
  TaskOutput out;
  const double m = solver_mass(s);
  const double e = solver_coupling(s);
  const double c = s.units.c;
  const SpinorField mixed0 = make_packet(s);
  const SpinorField pos0 = make_packet(s, EnergyBranch::positive);
  const SplitScheme scheme = scheme_of(s, s.scheme, s.dt);

  ZitterbewegungRecorder mixed_rec;
  ZitterbewegungRecorder pos_rec;
  EvolveOptions mo;
  mo.observer = [&](std::size_t, double t, const SpinorField& psi) { mixed_rec.record(t, psi); };
  EvolveOptions po;
  po.observer = [&](std::size_t, double t, const SpinorField& psi) { pos_rec.record(t, psi); };
  (void)evolve(mixed0, s.potential, tau(s, s.t0), tau(s, s.t1), scheme, m, e, mo);
  (void)evolve(pos0, s.potential, tau(s, s.t0), tau(s, s.t1), scheme, m, e, po);

  const Vec3 k = s.packet.momentum / s.units.hbar;
  const double energy = dispersion(k, m, s.d);
  const ZitterbewegungObservables mix = mixed_rec.finish(energy);
  const ZitterbewegungObservables pos = pos_rec.finish(energy);

  const double expected = 2.0 * energy * c;
  const double measured = mix.dominant_frequency * c;
  const double freq_err = std::abs(measured - expected) / expected;
  const double ratio = pos.velocity_amplitude / mix.velocity_amplitude;
  const double compton = 1.0 / (2.0 * m);

  out.results["expected_frequency"] = expected;
  out.results["dominant_frequency"] = measured;
  out.results["mixed_velocity_amplitude"] = mix.velocity_amplitude;
  out.results["projected_velocity_amplitude"] = pos.velocity_amplitude;
  out.results["mixed_position_amplitude"] = mix.position_amplitude;
  out.results["projected_position_amplitude"] = pos.position_amplitude;
  out.results["reduced_compton_half"] = compton;
  out.below("frequency_relative_error", freq_err, 0.02);
  out.below("projected_to_mixed_amplitude", ratio, 1e-2);
  out.at_most("position_amplitude_scale", mix.position_amplitude, 2.0 * compton);

  Series series;
  series.header = {"t", "x_mixed", "alpha_mixed", "x_positive", "alpha_positive"};
  for (std::size_t i = 0; i < mix.times.size(); i += s.sample_every)
    series.rows.push_back({mix.times[i] / c, mix.position[i][0], mix.velocity[i][0],
                           pos.position[i][0], pos.velocity[i][0]});
  out.series = std::move(series);
  return out;
}

// sweep-hbar ----------------------------------------------------------------

TaskOutput run_sweep(const Scenario& s, unsigned threads) {
  TaskOutput out;
  SweepScenario sc;
  sc.points_per_axis = s.N;
  sc.spacing = s.dx;
  sc.potential = s.potential;
  sc.x0 = s.packet.center[0];
  sc.p0 = s.packet.momentum[0];
  sc.sigma0 = s.packet.width;
  sc.reference_hbar = s.units.hbar;
  sc.duration = s.t1 - s.t0;
  sc.dt = tau(s, s.dt);
  sc.variant = s.scheme;
  sc.sample_every = s.sample_every;
  const SweepTable table = hbar_sweep(sc, s.hbar_list, s.units, threads);

  ojson rows = ojson::array();
  Series series;
  series.header = {"hbar", "t", "centroid", "classical"};
  for (const auto& r : table.rows) {
    ojson row;
    row["hbar"] = r.hbar;
    row["solver_mass"] = r.mass;
    row["sigma"] = r.sigma;
    row["error"] = r.error;
    row["fw_basis_difference"] = r.fw_basis_difference;
    rows.push_back(row);
    for (std::size_t i = 0; i < r.times.size(); ++i)
      series.rows.push_back({r.hbar, r.times[i], r.centroid[i], r.classical[i]});
  }
  out.results["rows"] = rows;
  const double ratio = table.rows.back().error / table.rows.front().error;
  out.results["monotone"] = table.monotone_decreasing();
  out.results["error_ratio"] = ratio;
  if (!s.potential.is_zero()) {
    out.at_least("monotone_decrease", table.monotone_decreasing() ? 1.0 : 0.0, 1.0);
    out.at_most("error_ratio", ratio, 0.25);
  } else {
    double worst = 0.0;
    for (const auto& r : table.rows) worst = std::max(worst, r.error);
    out.below("free_centroid_error", worst, 1e-3 * s.N * s.dx);
  }
  out.series = std::move(series);
  return out;
}

// gauge-check ---------------------------------------------------------------

TaskOutput run_gauge(const Scenario& s) {
  TaskOutput out;
  const GaugeFunction& chi = *s.gauge;
  const Potential primed = gauge_transform(s.potential, chi);
  const double span = tau(s, s.t1 - s.t0);
  const double half = s.grid().half_extent();

  SeededUniform rng(s.seed);
  double field_diff = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double t = span * rng();
    Vec3 x = Vec3::Zero();
    for (int a = 0; a < s.d; ++a) x[a] = 0.8 * half * (2.0 * rng() - 1.0);
    const FieldStrength f = s.potential.fields(t, x);
    const FieldStrength g = primed.fields(t, x);
    field_diff = std::max({field_diff, (f.electric - g.electric).cwiseAbs().maxCoeff(),
                           (f.magnetic - g.magnetic).cwiseAbs().maxCoeff()});
  }
  out.results["field_difference"] = field_diff;
  out.below("field_invariance", field_diff, 1e-9);

  const SpinorField phi = make_packet(s);
  std::vector<double> res;
  for (double dt : s.ladder)
    res.push_back(gauge_covariance_residual(phi, s.potential, chi, span,
                                            scheme_of(s, s.scheme, dt), solver_mass(s),
                                            solver_coupling(s)));
  const double slope = loglog_slope(s.ladder, res);
  out.results["dts"] = list_json(s.ladder);
  out.results["residuals"] = list_json(res);
  out.results["slope"] = slope;
  out.at_least("covariance_order", slope, s.scheme == SplitVariant::strang ? 1.9 : 0.9);
  if (s.scheme == SplitVariant::strang)
    for (std::size_t i = 0; i < s.ladder.size(); ++i)
      if (std::abs(s.ladder[i] - 1e-3) < 1e-15) out.below("residual_at_dt_1e-3", res[i], 1e-6);
  return out;
}

// generator-check -----------------------------------------------------------

TaskOutput run_generator(const Scenario& s) {
  TaskOutput out;
  const double m = solver_mass(s);
  const double e = solver_coupling(s);
  const double t0 = tau(s, s.t0);
  const SpinorField psi = make_packet(s);
  const std::vector<double> ladder = to_tau(s, s.ladder);

  const ResidualLadder gen = generator_residual(psi, s.potential, t0, m, e, ladder);
  out.results["dts"] = list_json(ladder);
  out.results["generator_residuals"] = list_json(gen.residuals);
  out.results["generator_slope"] = gen.slope;
  out.results["resolution_warning"] = gen.resolution_warning;
  out.within("generator_order", gen.slope, 0.9, 1.1);

  const std::vector<double> dl = to_tau(s, s.duhamel_ladder.empty() ? s.ladder : s.duhamel_ladder);
  std::vector<double> duh;
  for (double dt : dl)
    duh.push_back(duhamel_residual(psi, s.potential, tau(s, s.t1 - s.t0), m, e, dt));
  const double duh_slope = loglog_slope(dl, duh);
  out.results["duhamel_dts"] = list_json(dl);
  out.results["duhamel_residuals"] = list_json(duh);
  out.results["duhamel_slope"] = duh_slope;
  out.within("duhamel_order", duh_slope, 0.9, 1.1);

  if (!s.potential.is_zero()) {
    const std::vector<double> es = s.e_list.empty() ? std::vector<double>{0.1, 0.2, 0.4} : s.e_list;
    const double dt = ladder[ladder.size() / 2];
    std::vector<double> couplings;
    std::vector<double> r;
    for (double lab_e : es) {
      UnitsConfig u = s.units;
      u.e = lab_e;
      couplings.push_back(lab_e);
      r.push_back(interaction_residual(psi, s.potential, t0, m, u.solver_coupling(), dt));
    }
    const OriginFit fit = fit_through_origin(couplings, r);
    out.results["e_list"] = list_json(couplings);
    out.results["interaction_residuals"] = list_json(r);
    out.results["linearity_deviation"] = fit.max_relative_deviation;
    out.below("linear_in_coupling", fit.max_relative_deviation, 0.05);
  }
  return out;
}

// clifford ------------------------------------------------------------------

TaskOutput run_clifford(const Scenario& s) {
  TaskOutput out;
  for (int d : {1, 3})
    for (const Representation& rep : {Representation::dirac(d), Representation::chiral(d)}) {
      const double r = clifford_residual(rep);
      const std::string name = rep.name() + "_" + std::to_string(d) + "d";
      out.results[name] = r;
      out.below("clifford_" + name, r, 1e-13);
    }
  const double configured = clifford_residual(s.rep());
  out.results["configured"] = configured;
  return out;
}

// composition ---------------------------------------------------------------

TaskOutput run_composition(const Scenario& s) {
  TaskOutput out;
  const Grid grid = s.grid();
  const Representation rep = s.rep();
  const double m = solver_mass(s);
  const double e = solver_coupling(s);

  SeededUniform rng(s.seed);
  const double t = 2.0 * rng();
  const double u = 2.0 * rng();
  double mode_ck = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec3 p = grid.momentum(k);
    const CMatrix lhs = step_unitary(rep, p, m, t + u);
    const CMatrix rhs = step_unitary(rep, p, m, t) * step_unitary(rep, p, m, u);
    mode_ck = std::max(mode_ck, (lhs - rhs).cwiseAbs().maxCoeff());
  }
  const double kernel_ck = max_difference(
      compose(free_kernel(grid, rep, t, m), free_kernel(grid, rep, u, m)),
      free_kernel(grid, rep, t + u, m));
  out.results["t"] = t;
  out.results["s"] = u;
  out.results["mode_composition"] = mode_ck;
  out.results["kernel_composition"] = kernel_ck;
  out.below("mode_composition", mode_ck, 1e-12);
  out.below("kernel_composition", kernel_ck, 1e-10);

  const double span = tau(s, s.t1 - s.t0);
  const SplitScheme scheme = scheme_of(s, s.scheme, s.dt);
  const KernelField first = interacting_kernel(grid, rep, s.potential, span, scheme, m, e);
  const KernelField chained = evolve_kernel(first, s.potential, span, 2.0 * span, scheme, e);
  const KernelField direct = interacting_kernel(grid, rep, s.potential, 2.0 * span, scheme, m, e);
  const double interacting_ck = max_difference(chained, direct);
  out.results["interacting_composition"] = interacting_ck;
  out.below("interacting_composition", interacting_ck, 1e-12);

  if (s.d == 1 && static_cast<std::size_t>(s.N) * rep.spinor_dim() <= 512) {
    const CMatrix a = dense_propagator(grid, rep, s.potential, 0.0, span, scheme.dt, m, e);
    const CMatrix b = dense_propagator(grid, rep, s.potential, span, 2.0 * span, scheme.dt, m, e);
    const CMatrix ab = dense_propagator(grid, rep, s.potential, 0.0, 2.0 * span, scheme.dt, m, e);
    const double dense_ck = (b * a - ab).cwiseAbs().maxCoeff();
    out.results["dense_composition"] = dense_ck;
    out.below("dense_composition", dense_ck, 1e-12);
  }
  return out;
}

// convergence ---------------------------------------------------------------

TaskOutput run_convergence(const Scenario& s) {
  TaskOutput out;
  const SpinorField psi0 = make_packet(s);
  const std::vector<double> ladder = to_tau(s, s.ladder);
  for (SplitVariant v : {SplitVariant::lie, SplitVariant::strang}) {
    const ConvergenceStudy study =
        convergence_study(psi0, s.potential, tau(s, s.t0), tau(s, s.t1), v, solver_mass(s),
                          solver_coupling(s), ladder);
    const std::string name = v == SplitVariant::lie ? "lie" : "strang";
    ojson r;
    r["dts"] = list_json(study.dts);
    r["differences"] = list_json(study.differences);
    r["slope"] = study.slope;
    out.results[name] = r;
    if (v == SplitVariant::lie) out.within("lie_order", study.slope, 0.9, 1.1);
    else out.within("strang_order", study.slope, 1.9, 2.1);
  }
  return out;
}

// causality -----------------------------------------------------------------

TaskOutput run_causality(const Scenario& s) {
  TaskOutput out;
  const Grid grid = s.grid();
  const double t = tau(s, s.t1 - s.t0);
  const double w = s.source_half_width;
  const SpinorField src = bump_source(grid, s.rep(), Vec3::Zero(), w, s.packet.spinor);
  const SpinorField psi = free_step(src, t, solver_mass(s));
  const double edge = w + t + 4.0 * s.dx;

  double outside = 0.0;
  Series series;
  series.header = {"x", "density"};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double rho = 0.0;
    for (int c = 0; c < psi.spinor_dim(); ++c) rho += std::norm(psi.at(j, c));
    const double x = grid.position(j)[0];
    if (std::abs(x) > edge) outside += rho * grid.cell_volume();
    series.rows.push_back({x, rho});
  }
  const double leakage = outside / psi.norm_squared();
  out.results["tau"] = t;
  out.results["cone_edge"] = edge;
  out.results["leakage"] = leakage;
  out.below("leakage_outside_cone", leakage, 1e-6);
  out.series = std::move(series);
  return out;
}

// eikonal -------------------------------------------------------------------

TaskOutput run_eikonal(const Scenario& s) {
  TaskOutput out;
  const EikonalReport rep = eikonal_phase_check(s.grid(), s.t1, s.units);
  out.results["wavelengths"] = rep.wavelengths;
  out.results["max_relative_deviation"] = rep.max_relative_deviation;
  out.below("eikonal_wavenumber", rep.max_relative_deviation, 0.05);
  Series series;
  series.header = {"x", "measured", "predicted"};
  for (std::size_t i = 0; i < rep.r.size(); ++i)
    series.rows.push_back({rep.r[i], rep.measured[i], rep.predicted[i]});
  out.series = std::move(series);
  return out;
}

TaskOutput dispatch(const Scenario& s, unsigned threads) {
  switch (s.task) {
  case Task::free_kernel: return run_free_kernel(s);
  case Task::evolve: return run_evolve(s);
  case Task::oracle_compare: return run_oracle(s);
  case Task::fw_check: return run_fw(s);
  case Task::classical: return run_classical(s);
  case Task::zb: return run_zb(s);
  case Task::sweep_hbar: return run_sweep(s, threads);
  case Task::gauge_check: return run_gauge(s);
  case Task::generator_check: return run_generator(s);
  case Task::clifford: return run_clifford(s);
  case Task::composition: return run_composition(s);
  case Task::convergence: return run_convergence(s);
  case Task::causality: return run_causality(s);
  case Task::eikonal: return run_eikonal(s);
  }
  fail(ErrorKind::configuration, "unhandled task");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::io, "cannot write " + path.string());
  f << text;
  if (!f) fail(ErrorKind::io, "write failed for " + path.string());
}

std::string csv_text(const Series& series) {
  std::string text;
  for (std::size_t i = 0; i < series.header.size(); ++i) {
    if (i) text += ',';
    text += series.header[i];
  }
  text += '\n';
  for (const auto& row : series.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += format_double(row[i]);
    }
    text += '\n';
  }
  return text;
}

ojson check_json(const Check& c) {
  ojson j;
  j["name"] = c.name;
  j["value"] = c.value;
  j["relation"] = c.relation;
  if (c.relation == "in") {
    j["lower"] = c.lower;
    j["upper"] = c.upper;
  } else {
    j["bound"] = c.relation == ">=" ? c.lower : c.upper;
  }
  j["pass"] = c.pass;
  return j;
}

} // namespace

RunResult run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                       unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  TaskOutput out = dispatch(scenario, std::max(1u, threads));
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunResult result;
  result.checks = out.checks;
  result.wall_seconds = wall;

  ojson& j = result.summary;
  j["name"] = scenario.name;
  j["task"] = std::string(to_string(scenario.task));
  j["grid"] = {{"d", scenario.d},
               {"N", scenario.N},
               {"dx", scenario.dx},
               {"representation", scenario.representation}};
  j["units"] = {{"hbar", scenario.units.hbar},
                {"c", scenario.units.c},
                {"m0", scenario.units.m0},
                {"e", scenario.units.e}};
  j["potential"] = scenario.potential_kind;
  j["t0"] = scenario.t0;
  j["t1"] = scenario.t1;
  j["dt"] = scenario.dt;
  j["scheme"] = scenario.scheme == SplitVariant::strang ? "strang" : "lie";
  j["results"] = out.results;
  ojson checks = ojson::array();
  for (const auto& c : out.checks) checks.push_back(check_json(c));
  j["checks"] = checks;
  j["passed"] = result.passed();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "summary.json", dump_json(j));
  if (out.series) write_text(out_dir / "series.csv", csv_text(*out.series));
  if (out.kernel) {
    std::ofstream f(out_dir / "kernel.dkf", std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorKind::io, "cannot write kernel.dkf");
    write_kernel(f, *out.kernel);
    if (!f) fail(ErrorKind::io, "write failed for kernel.dkf");
  }
  std::ostringstream log;
  log << "scenario " << scenario.name << '\n'
      << "task " << to_string(scenario.task) << '\n'
      << "threads " << threads << '\n'
      << "wall_seconds " << wall << '\n';
  for (const auto& c : out.checks) log << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
  write_text(out_dir / "run.log", log.str());
  return result;
}

} // namespace dirac
