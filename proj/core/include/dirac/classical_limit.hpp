#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dirac/em_potential.hpp"
#include "dirac/interacting_evolution.hpp"
#include "dirac/spinor_core.hpp"

namespace dirac {

/// Lab-unit knobs and their map onto the natural-unit solver.
///
/// The solver evolves in tau = c t with mass m = m0 c / hbar and coupling
/// e / (c hbar). Potentials are functions of (tau, x), so the lab electric
/// field is -grad A0 - dA/dtau.
struct UnitsConfig {
  double hbar = 1.0;
  double c = 1.0;
  double m0 = 1.0;
  double e = 0.0;

  void validate() const;
  [[nodiscard]] double solver_mass() const noexcept { return m0 * c / hbar; }
  [[nodiscard]] double solver_coupling() const noexcept { return e / (c * hbar); }
  [[nodiscard]] double evolution_time(double t) const noexcept { return c * t; }
};

struct ClassicalState {
  double t = 0.0;
  Vec3 x = Vec3::Zero();
  Vec3 p = Vec3::Zero(); ///< kinetic momentum

  /// v = p c^2 / sqrt(m0^2 c^4 + |p|^2 c^2)
  [[nodiscard]] Vec3 velocity(const UnitsConfig& units) const;
};

struct Trajectory {
  double dt = 0.0;
  std::vector<ClassicalState> states;
};

/// RK4 on dx/dt = v(p), dp/dt = e (E + v x B / c). In 1+1D the magnetic
/// term is dropped. With box_half_extent set, leaving |x_a| < box throws
/// ErrorKind::domain.
[[nodiscard]] Trajectory integrate_classical(const ClassicalState& start,
                                             const Potential& potential, double t1, double dt,
                                             const UnitsConfig& units,
                                             std::optional<double> box_half_extent = std::nullopt);

/// S = sum_k [-m0 c^2 sqrt(1 - |v_k|^2 / c^2) + e (A . v_k / c - A0)] dt with
/// chord velocities v_k and the potential at segment midpoints.
[[nodiscard]] double classical_action(const Trajectory& trajectory, const Potential& potential,
                                      const UnitsConfig& units);

/// m0 sqrt(t^2 - r^2) in natural units; r >= t throws ErrorKind::domain.
[[nodiscard]] double eikonal_free(const Vec3& x, double t, double m0);

struct SweepScenario {
  int points_per_axis = 1024;
  double spacing = 0.02;
  Potential potential = Potential::zero(1);
  double x0 = 0.0;
  double p0 = 0.0;       ///< classical momentum, packet wavenumber p0 / hbar
  double sigma0 = 1.0;   ///< packet width at hbar = reference_hbar
  double reference_hbar = 1.0;
  double duration = 1.0; ///< lab time
  double dt = 1e-2;      ///< solver step in tau
  SplitVariant variant = SplitVariant::strang;
  std::size_t sample_every = 1;
};

struct SweepRow {
  double hbar = 0.0;
  double mass = 0.0; ///< solver mass m0 c / hbar
  double sigma = 0.0;
  double error = 0.0; ///< max_t |<x>(t) - x_classical(t)|
  /// ||T psi0 - psi0||: how far the positive-energy packet is from its FW image.
  double fw_basis_difference = 0.0;
  std::vector<double> times;
  std::vector<double> centroid;
  std::vector<double> classical;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  [[nodiscard]] bool monotone_decreasing() const;
};

/// Runs every hbar (1+1D) with sigma = sigma0 sqrt(hbar / reference_hbar) and
/// compares the packet centroid with the classical trajectory. Members run
/// on up to `threads` worker threads. A grid with fewer than 8 points per
/// shortest de Broglie wavelength rejects the run with ErrorKind::resolution.
[[nodiscard]] SweepTable hbar_sweep(const SweepScenario& scenario,
                                    const std::vector<double>& hbar_list,
                                    const UnitsConfig& units_base, unsigned threads = 1);

struct ZitterbewegungObservables {
  std::vector<double> times;
  std::vector<Vec3> position;
  std::vector<Vec3> velocity; ///< <alpha_i>
  double dominant_frequency = 0.0; ///< angular frequency of <alpha_1>
  /// Half peak-to-peak of <alpha_1> and <x_1> about their least-squares lines.
  double velocity_amplitude = 0.0;
  double position_amplitude = 0.0;
};

/// Accumulates <x> and <alpha> from a uniformly sampled state series.
class ZitterbewegungRecorder {
public:
  void record(double t, const SpinorField& psi);

  /// Requires 64 samples per period pi / expected_energy, otherwise
  /// ErrorKind::sampling.
  [[nodiscard]] ZitterbewegungObservables finish(double expected_energy) const;

private:
  ZitterbewegungObservables data_;
};

/// Angular frequency of the largest spectral peak of a uniformly sampled
/// real series: mean removed, Hann window, 8x zero padding, parabolic
/// interpolation of the log magnitude.
[[nodiscard]] double dominant_frequency(const std::vector<double>& series, double dt);

struct EikonalReport {
  double max_relative_deviation = 0.0;
  double wavelengths = 0.0; ///< phase cycles across -0.8 ct < x < 0.8 ct
  std::vector<double> r;
  std::vector<double> measured;
  std::vector<double> predicted;
};

/// Local wavenumber of the lower (exp(+iEt)) FW kernel branch, smeared by a
/// Gaussian bump of width 2 dx, against m0 c r / (hbar sqrt(c^2 t^2 - r^2))
/// on 0.1 ct < r < 0.8 ct. 1+1D only. Fewer than 10 wavelengths in the
/// window throws ErrorKind::sampling.
[[nodiscard]] EikonalReport eikonal_phase_check(const Grid& grid, double t,
                                                const UnitsConfig& units);

} // namespace dirac
