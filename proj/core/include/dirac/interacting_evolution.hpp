#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "dirac/em_potential.hpp"
#include "dirac/free_propagator.hpp"

namespace dirac {

enum class SplitVariant {
  lie,    ///< phase over the full slice, then the free step
  strang, ///< half phase, free step, half phase
};

struct SplitScheme {
  SplitVariant variant = SplitVariant::strang;
  double dt = 1e-2;
};

struct EvolutionReport {
  SpinorField final_state;
  /// ||psi|| before the first step and after every step.
  std::vector<double> norm_log;
  double wall_seconds = 0.0;
  std::size_t steps = 0;

  [[nodiscard]] double norm_drift() const;
};

/// Called with (step index, time, state) for the initial state and after every step.
using StepObserver = std::function<void(std::size_t, double, const SpinorField&)>;

struct EvolveOptions {
  StepObserver observer;
  /// Reject runs whose packet can reach the periodic image: per axis,
  /// |<x>| + span + 5 spread must stay below L/2.
  bool check_budget = true;
};

/// H_int = e (A0 I - alpha.A)
[[nodiscard]] CMatrix interaction_hamiltonian(const Representation& rep, double a0, const Vec3& a,
                                              double e);

/// exp(-i H_int dt) = exp(-i e A0 dt) [cos(a) I + i sin(a)/a e dt alpha.A], a = |e A| dt.
[[nodiscard]] CMatrix interaction_phase(const Representation& rep, double a0, const Vec3& a,
                                        double e, double dt);

/// Number of slices of length dt in span. Throws configuration when dt does
/// not divide span within 1e-12 relative.
[[nodiscard]] std::size_t slice_count(double span, double dt);

/// Throws ErrorKind::budget when the field can wrap around within span.
void check_wraparound_budget(const SpinorField& psi, double span);

/// Pointwise spinor blocks of the interaction phase, row-major per point.
class PhaseField {
public:
  PhaseField(const Grid& grid, const Representation& rep);

  /// exp(-i H_int(t, x) duration) at every grid point.
  void build(const Potential& potential, double e, double t, double duration);
  void apply(SpinorField& psi) const;

private:
  Grid grid_;
  Representation rep_;
  std::vector<cplx> alpha_; // alpha_i entries, row-major, axis-major
  std::vector<cplx> blocks_;
};

/// Split-step propagator for H = alpha.(p - eA) + m beta + e A0.
///
/// Static potentials have their phase blocks built once. The potential is
/// sampled at the temporal midpoint of each phase factor.
class InteractingStepper {
public:
  InteractingStepper(const Grid& grid, const Representation& rep, Potential potential,
                     double mass, double e, SplitScheme scheme);

  /// Advances psi from t to t + dt.
  void step(SpinorField& psi, double t) const;

  /// Interaction factor exp(-i H_int(t_mid) duration).
  void apply_phase(SpinorField& psi, double t_mid, double duration) const;

  [[nodiscard]] const FreePropagator& free() const noexcept { return full_; }
  [[nodiscard]] const FreePropagator& half_free() const noexcept { return half_; }
  [[nodiscard]] const SplitScheme& scheme() const noexcept { return scheme_; }
  [[nodiscard]] const Potential& potential() const noexcept { return potential_; }
  [[nodiscard]] double mass() const noexcept { return mass_; }
  [[nodiscard]] double coupling() const noexcept { return e_; }

private:
  Grid grid_;
  Representation rep_;
  Potential potential_;
  double mass_;
  double e_;
  SplitScheme scheme_;
  bool skip_phase_;
  FreePropagator full_;
  FreePropagator half_;
  std::optional<PhaseField> cached_full_;
  std::optional<PhaseField> cached_half_;
  mutable PhaseField scratch_;
};

[[nodiscard]] EvolutionReport evolve(const SpinorField& psi0, const Potential& potential,
                                     double t0, double t1, const SplitScheme& scheme, double mass,
                                     double e, const EvolveOptions& options = {});

/// H_int(t) psi, pointwise.
[[nodiscard]] SpinorField apply_interaction_hamiltonian(const SpinorField& psi,
                                                        const Potential& potential, double t,
                                                        double e);

/// Least-squares slope of log y against log x.
[[nodiscard]] double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of y = k x through the origin, and the largest
/// relative deviation of the data from that line.
struct OriginFit {
  double slope = 0.0;
  double max_relative_deviation = 0.0;
};
[[nodiscard]] OriginFit fit_through_origin(const std::vector<double>& x,
                                           const std::vector<double>& y);

struct ResidualLadder {
  std::vector<double> dts;
  std::vector<double> residuals;
  double slope = 0.0;
  /// Set when more than 1e-6 of the spectral mass sits in the top octave.
  bool resolution_warning = false;
};

/// r(dt) = ||(U_me(dt) psi - psi)/dt + i (H_free + H_int(t)) psi|| with one Lie step.
[[nodiscard]] ResidualLadder generator_residual(const SpinorField& psi, const Potential& potential,
                                               double t, double mass, double e,
                                               const std::vector<double>& dt_ladder);

/// ||(U_me(dt) psi - U_m(dt) psi)/dt + i H_int(t) psi|| with one Lie step.
/// Isolates the coupling part of the generator; vanishes at e = 0.
[[nodiscard]] double interaction_residual(const SpinorField& psi, const Potential& potential,
                                          double t, double mass, double e, double dt);

/// Fraction of spectral mass in modes with |k_axis| > nyquist / 2 on some axis.
[[nodiscard]] double spectral_tail(const SpinorField& psi);

/// ||U_me(t) psi - U_m(t) psi + i sum_k dt U_m(t - t_k) H_int(t_k) U_me(t_k) psi||
/// with Lie slices on [0, t] and midpoints t_k = (k + 1/2) dt.
[[nodiscard]] double duhamel_residual(const SpinorField& psi, const Potential& potential, double t,
                                      double mass, double e, double dt);

/// Retarded interacting kernel from 0 to t: band-limited basis columns evolved by evolve().
[[nodiscard]] KernelField interacting_kernel(const Grid& grid, const Representation& rep,
                                             const Potential& potential, double t,
                                             const SplitScheme& scheme, double mass, double e);

/// Continues every column of a kernel from t0 to t1 with the same slicing.
[[nodiscard]] KernelField evolve_kernel(const KernelField& kernel, const Potential& potential,
                                        double t0, double t1, const SplitScheme& scheme,
                                        double e);

/// ||K' phi - exp(i e chi(t)) K (exp(-i e chi(0)) phi)||, K' evolving under
/// gauge_transform(potential, chi). Zero for exact propagators.
[[nodiscard]] double gauge_covariance_residual(const SpinorField& phi, const Potential& potential,
                                               const GaugeFunction& chi, double t,
                                               const SplitScheme& scheme, double mass, double e);

/// psi * exp(i e chi(t, x)) pointwise.
[[nodiscard]] SpinorField gauge_rotate(const SpinorField& psi, const GaugeFunction& chi, double t,
                                       double e);

struct ConvergenceStudy {
  std::vector<double> dts;
  /// ||u(dt) - u(dt/2)|| at the final time.
  std::vector<double> differences;
  double slope = 0.0;
};

/// Richardson self-convergence: successive halvings of dt, slope of the
/// successive differences.
[[nodiscard]] ConvergenceStudy convergence_study(const SpinorField& psi0,
                                                 const Potential& potential, double t0, double t1,
                                                 SplitVariant variant, double mass, double e,
                                                 const std::vector<double>& dt_ladder);

} // namespace dirac
