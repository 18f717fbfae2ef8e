#include "dirac/interacting_evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace dirac {

double EvolutionReport::norm_drift() const {
  double drift = 0.0;
  if (norm_log.empty()) return drift;
  for (double n : norm_log) drift = std::max(drift, std::abs(n - norm_log.front()));
  return drift;
}

CMatrix interaction_hamiltonian(const Representation& rep, double a0, const Vec3& a, double e) {
  const int s = rep.spinor_dim();
  return e * (a0 * CMatrix::Identity(s, s) - rep.alpha_dot(a));
}

namespace {

// cos(a) and sin(a)/a with the series branch near zero
void phase_coefficients(double a, double& c, double& sinc) {
  if (a < 1e-6) {
    c = 1.0 - 0.5 * a * a;
    sinc = 1.0 - a * a / 6.0;
  } else {
    c = std::cos(a);
    sinc = std::sin(a) / a;
  }
}

} // namespace

CMatrix interaction_phase(const Representation& rep, double a0, const Vec3& a, double e,
                          double dt) {
  const int s = rep.spinor_dim();
  Vec3 ea = Vec3::Zero();
  for (int i = 0; i < rep.spatial_dim(); ++i) ea[i] = e * a[i];
  double c = 0.0, sinc = 0.0;
  phase_coefficients(ea.norm() * dt, c, sinc);
  const cplx g = std::polar(1.0, -e * a0 * dt);
  return g * (c * CMatrix::Identity(s, s) + cplx(0.0, sinc * dt) * rep.alpha_dot(ea));
}

std::size_t slice_count(double span, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::configuration, "time step must be positive");
  if (span < 0.0) fail(ErrorKind::domain, "evolution span must be non-negative");
  const double n = std::round(span / dt);
  if (std::abs(n * dt - span) > 1e-12 * std::max(1.0, span)) {
    std::ostringstream msg;
    msg << "time step " << dt << " does not divide the evolution span " << span;
    fail(ErrorKind::configuration, msg.str());
  }
  return static_cast<std::size_t>(n);
}

void check_wraparound_budget(const SpinorField& psi, double span) {
  const Grid& g = psi.grid();
  for (int axis = 0; axis < g.spatial_dim(); ++axis) {
    const double reach =
        std::abs(position_mean(psi, axis)) + span + 5.0 * position_spread(psi, axis);
    if (!(reach < g.half_extent())) {
      std::ostringstream msg;
      msg << "wraparound budget violated on axis " << axis << ": |<x>| + t + 5 sigma = " << reach
          << " >= L/2 = " << g.half_extent();
      fail(ErrorKind::budget, msg.str());
    }
  }
}

PhaseField::PhaseField(const Grid& grid, const Representation& rep)
    : grid_(grid), rep_(rep),
      blocks_(grid.size() * rep.spinor_dim() * rep.spinor_dim()) {
  const int s = rep.spinor_dim();
  for (int axis = 0; axis < rep.spatial_dim(); ++axis)
    for (int r = 0; r < s; ++r)
      for (int c = 0; c < s; ++c) alpha_.push_back(rep.alpha(axis)(r, c));
}

void PhaseField::build(const Potential& potential, double e, double t, double duration) {
  const int s = rep_.spinor_dim();
  const int d = rep_.spatial_dim();
  const std::size_t ss = static_cast<std::size_t>(s) * s;
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const FourPotential ap = potential.evaluate(t, grid_.position(p));
    Vec3 ea = Vec3::Zero();
    for (int i = 0; i < d; ++i) ea[i] = e * ap.vector[i];
    double c = 0.0, sinc = 0.0;
    phase_coefficients(ea.norm() * duration, c, sinc);
    const cplx g = std::polar(1.0, -e * ap.scalar * duration);
    const cplx diag = g * c;
    const cplx off = g * cplx(0.0, sinc * duration);
    cplx* block = blocks_.data() + p * ss;
    for (std::size_t k = 0; k < ss; ++k) {
      cplx v = 0.0;
      for (int i = 0; i < d; ++i) v += alpha_[i * ss + k] * ea[i];
      block[k] = off * v;
    }
    for (int r = 0; r < s; ++r) block[r * s + r] += diag;
  }
}

void PhaseField::apply(SpinorField& psi) const {
  const int s = rep_.spinor_dim();
  const std::size_t ss = static_cast<std::size_t>(s) * s;
  cplx* data = psi.data().data();
  cplx tmp[4];
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const cplx* block = blocks_.data() + p * ss;
    cplx* v = data + p * s;
    for (int r = 0; r < s; ++r) {
      cplx acc = 0.0;
      for (int c = 0; c < s; ++c) acc += block[r * s + c] * v[c];
      tmp[r] = acc;
    }
    for (int r = 0; r < s; ++r) v[r] = tmp[r];
  }
}

InteractingStepper::InteractingStepper(const Grid& grid, const Representation& rep,
                                       Potential potential, double mass, double e,
                                       SplitScheme scheme)
    : grid_(grid), rep_(rep), potential_(std::move(potential)), mass_(mass), e_(e),
      scheme_(scheme), skip_phase_(e == 0.0 || potential_.is_zero()),
      full_(grid, rep, mass, scheme.dt), half_(grid, rep, mass, 0.5 * scheme.dt),
      scratch_(grid, rep) {
  if (!(scheme.dt > 0.0)) fail(ErrorKind::configuration, "time step must be positive");
  if (potential_.spatial_dim() != grid.spatial_dim())
    fail(ErrorKind::structural, "potential and grid disagree on spatial dimension");
  if (!skip_phase_ && potential_.is_static()) {
    if (scheme.variant == SplitVariant::lie) {
      cached_full_.emplace(grid, rep);
      cached_full_->build(potential_, e_, 0.0, scheme.dt);
    } else {
      cached_half_.emplace(grid, rep);
      cached_half_->build(potential_, e_, 0.0, 0.5 * scheme.dt);
    }
  }
}

void InteractingStepper::apply_phase(SpinorField& psi, double t_mid, double duration) const {
  if (skip_phase_) return;
  if (cached_full_ && duration == scheme_.dt) {
    cached_full_->apply(psi);
    return;
  }
  if (cached_half_ && duration == 0.5 * scheme_.dt) {
    cached_half_->apply(psi);
    return;
  }
  scratch_.build(potential_, e_, t_mid, duration);
  scratch_.apply(psi);
}

void InteractingStepper::step(SpinorField& psi, double t) const {
  const double dt = scheme_.dt;
  if (scheme_.variant == SplitVariant::lie) {
    apply_phase(psi, t + 0.5 * dt, dt);
    full_.apply(psi);
  } else {
    apply_phase(psi, t + 0.25 * dt, 0.5 * dt);
    full_.apply(psi);
    apply_phase(psi, t + 0.75 * dt, 0.5 * dt);
  }
}

EvolutionReport evolve(const SpinorField& psi0, const Potential& potential, double t0, double t1,
                       const SplitScheme& scheme, double mass, double e,
                       const EvolveOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = slice_count(t1 - t0, scheme.dt);
  if (options.check_budget) check_wraparound_budget(psi0, t1 - t0);

  const InteractingStepper stepper(psi0.grid(), psi0.rep(), potential, mass, e, scheme);
  EvolutionReport report{psi0, {}, 0.0, n};
  report.norm_log.reserve(n + 1);
  report.norm_log.push_back(psi0.norm());
  if (options.observer) options.observer(0, t0, psi0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * scheme.dt;
    stepper.step(report.final_state, t);
    report.norm_log.push_back(report.final_state.norm());
    if (options.observer)
      options.observer(k + 1, t0 + static_cast<double>(k + 1) * scheme.dt, report.final_state);
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SpinorField apply_interaction_hamiltonian(const SpinorField& psi, const Potential& potential,
                                          double t, double e) {
  const Grid& g = psi.grid();
  const int s = psi.spinor_dim();
  SpinorField out(g, psi.rep());
  CVector v(s);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const FourPotential ap = potential.evaluate(t, g.position(p));
    const CMatrix h = interaction_hamiltonian(psi.rep(), ap.scalar, ap.vector, e);
    for (int c = 0; c < s; ++c) v[c] = psi.at(p, c);
    const CVector w = h * v;
    for (int c = 0; c < s; ++c) out.at(p, c) = w[c];
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    fail(ErrorKind::structural, "slope fit needs at least two matching points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      fail(ErrorKind::domain, "log-log fit needs positive data");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

OriginFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty())
    fail(ErrorKind::structural, "line fit needs matching non-empty data");
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  OriginFit fit;
  fit.slope = sxy / sxx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double model = fit.slope * x[i];
    fit.max_relative_deviation =
        std::max(fit.max_relative_deviation, std::abs(y[i] - model) / std::abs(model));
  }
  return fit;
}

double spectral_tail(const SpinorField& psi) {
  const Grid& g = psi.grid();
  const FourierTransform fft(g, psi.spinor_dim());
  std::vector<cplx> spec(psi.data().begin(), psi.data().end());
  fft.forward(spec);
  const int s = psi.spinor_dim();
  const double cut = 0.5 * g.nyquist();
  double total = 0.0, tail = 0.0;
  for (std::size_t mode = 0; mode < g.size(); ++mode) {
    double w = 0.0;
    for (int c = 0; c < s; ++c) w += std::norm(spec[mode * s + c]);
    total += w;
    const Vec3 k = g.momentum(mode);
    bool high = false;
    for (int a = 0; a < g.spatial_dim(); ++a) high = high || std::abs(k[a]) > cut;
    if (high) tail += w;
  }
  return total > 0.0 ? tail / total : 0.0;
}

namespace {

SpinorField lie_step(const SpinorField& psi, const Potential& potential, double t, double mass,
                     double e, double dt) {
  const InteractingStepper stepper(psi.grid(), psi.rep(), potential, mass, e,
                                   {SplitVariant::lie, dt});
  SpinorField out = psi;
  stepper.step(out, t);
  return out;
}

} // namespace

ResidualLadder generator_residual(const SpinorField& psi, const Potential& potential, double t,
                                  double mass, double e, const std::vector<double>& dt_ladder) {
  if (dt_ladder.size() < 2) fail(ErrorKind::configuration, "generator ladder needs two steps");
  for (std::size_t i = 1; i < dt_ladder.size(); ++i)
    if (!(dt_ladder[i] < dt_ladder[i - 1]))
      fail(ErrorKind::configuration, "generator ladder must be decreasing");

  ResidualLadder out;
  out.resolution_warning = spectral_tail(psi) > 1e-6;
  SpinorField h_psi = apply_free_hamiltonian(psi, mass);
  h_psi += apply_interaction_hamiltonian(psi, potential, t, e);
  h_psi *= cplx(0.0, 1.0);
  for (double dt : dt_ladder) {
    SpinorField r = lie_step(psi, potential, t, mass, e, dt);
    r -= psi;
    r *= 1.0 / dt;
    r += h_psi;
    out.dts.push_back(dt);
    out.residuals.push_back(r.norm());
  }
  out.slope = loglog_slope(out.dts, out.residuals);
  return out;
}

double interaction_residual(const SpinorField& psi, const Potential& potential, double t,
                            double mass, double e, double dt) {
  SpinorField r = lie_step(psi, potential, t, mass, e, dt);
  r -= free_step(psi, dt, mass);
  r *= 1.0 / dt;
  SpinorField h = apply_interaction_hamiltonian(psi, potential, t, e);
  h *= cplx(0.0, 1.0);
  r += h;
  return r.norm();
}

double duhamel_residual(const SpinorField& psi, const Potential& potential, double t, double mass,
                        double e, double dt) {
  const std::size_t n = slice_count(t, dt);
  check_wraparound_budget(psi, t);
  const InteractingStepper lie(psi.grid(), psi.rep(), potential, mass, e, {SplitVariant::lie, dt});
  const FreePropagator& full = lie.free();
  const FreePropagator& half = lie.half_free();

  SpinorField state = psi; // U_me(k dt) psi
  SpinorField acc(psi.grid(), psi.rep());
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = static_cast<double>(k) * dt;
    // U_me(t_k) psi: Lie half slice from k dt
    SpinorField mid = state;
    lie.apply_phase(mid, tk + 0.25 * dt, 0.5 * dt);
    half.apply(mid);
    SpinorField v = apply_interaction_hamiltonian(mid, potential, tk + 0.5 * dt, e);
    half.apply(v);
    full.apply(acc);
    acc += v;
    lie.step(state, tk);
  }
  SpinorField r = state;
  r -= free_step(psi, t, mass);
  acc *= cplx(0.0, dt);
  r += acc;
  return r.norm();
}

KernelField interacting_kernel(const Grid& grid, const Representation& rep,
                               const Potential& potential, double t, const SplitScheme& scheme,
                               double mass, double e) {
  if (t < 0.0) fail(ErrorKind::domain, "retarded kernel requires t >= 0");
  std::vector<SpinorField> columns;
  EvolveOptions opts;
  opts.check_budget = false;
  for (int j = 0; j < rep.spinor_dim(); ++j)
    columns.push_back(
        evolve(delta_source(grid, rep, j), potential, 0.0, t, scheme, mass, e, opts).final_state);
  return KernelField(grid, rep, t, mass, std::move(columns));
}

KernelField evolve_kernel(const KernelField& kernel, const Potential& potential, double t0,
                          double t1, const SplitScheme& scheme, double e) {
  std::vector<SpinorField> columns;
  EvolveOptions opts;
  opts.check_budget = false;
  for (const SpinorField& col : kernel.columns())
    columns.push_back(evolve(col, potential, t0, t1, scheme, kernel.mass(), e, opts).final_state);
  return KernelField(kernel.grid(), kernel.rep(), kernel.time() + (t1 - t0), kernel.mass(),
                     std::move(columns));
}

SpinorField gauge_rotate(const SpinorField& psi, const GaugeFunction& chi, double t, double e) {
  SpinorField out = psi;
  const Grid& g = psi.grid();
  const int s = psi.spinor_dim();
  for (std::size_t p = 0; p < g.size(); ++p) {
    const cplx ph = std::polar(1.0, e * chi.value(t, g.position(p)));
    for (int c = 0; c < s; ++c) out.at(p, c) *= ph;
  }
  return out;
}

double gauge_covariance_residual(const SpinorField& phi, const Potential& potential,
                                 const GaugeFunction& chi, double t, const SplitScheme& scheme,
                                 double mass, double e) {
  const Potential transformed = gauge_transform(potential, chi);
  const SpinorField direct = evolve(phi, transformed, 0.0, t, scheme, mass, e).final_state;
  const SpinorField back = gauge_rotate(phi, chi, 0.0, -e);
  SpinorField conj = gauge_rotate(evolve(back, potential, 0.0, t, scheme, mass, e).final_state,
                                  chi, t, e);
  conj -= direct;
  return conj.norm();
}

ConvergenceStudy convergence_study(const SpinorField& psi0, const Potential& potential, double t0,
                                   double t1, SplitVariant variant, double mass, double e,
                                   const std::vector<double>& dt_ladder) {
  if (dt_ladder.size() < 2) fail(ErrorKind::configuration, "convergence ladder needs two steps");
  std::map<double, SpinorField> runs;
  const auto solve = [&](double dt) -> const SpinorField& {
    auto it = runs.find(dt);
    if (it == runs.end())
      it = runs.emplace(dt, evolve(psi0, potential, t0, t1, {variant, dt}, mass, e).final_state)
               .first;
    return it->second;
  };
  ConvergenceStudy out;
  for (double dt : dt_ladder) {
    SpinorField diff = solve(dt);
    diff -= solve(0.5 * dt);
    out.dts.push_back(dt);
    out.differences.push_back(diff.norm());
  }
  out.slope = loglog_slope(out.dts, out.differences);
  return out;
}

} // namespace dirac
