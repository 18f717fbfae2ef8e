#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string_view>
#include <vector>

#include "dirac/error.hpp"
#include "dirac/types.hpp"

namespace dirac {

/// {A0, A}. The time argument of every potential is the evolution coordinate
/// (c t in lab units); 1+1D potentials only use vector.x().
struct FourPotential {
  double scalar = 0.0;
  Vec3 vector = Vec3::Zero();
};

/// E = -grad A0 - dA/dt, B = curl A. In 1+1D there is no magnetic field and
/// magnetic is left at zero.
struct FieldStrength {
  Vec3 electric = Vec3::Zero();
  Vec3 magnetic = Vec3::Zero();
};

enum class PotentialKind {
  zero,
  uniform_scalar,
  constant_electric,
  constant_magnetic,
  plane_wave,
  gaussian_pulse,
  tabulated,
  gauge_transformed,
};

std::string_view to_string(PotentialKind kind) noexcept;

/// A = a cos(k.x - w t + phi), A0 = a0 cos(k.x - w t + phi).
struct PlaneWave {
  Vec3 wave_vector = Vec3::Zero();
  double frequency = 0.0;
  Vec3 amplitude = Vec3::Zero();
  double scalar_amplitude = 0.0;
  double phase = 0.0;
};

/// Pulse travelling at unit speed along `direction`:
/// xi = n.(x - x_c) - (t - t_c), A = a exp(-xi^2 / (2 w^2)) cos(k xi + phi), A0 = 0.
struct GaussianPulse {
  Vec3 direction = Vec3::UnitX();
  Vec3 center = Vec3::Zero();
  double center_time = 0.0;
  double width = 1.0;
  double carrier = 0.0;
  double phase = 0.0;
  Vec3 amplitude = Vec3::Zero();
};

/// Samples on a tensor-product (t, x[, y, z]) grid. Axes with one node are
/// treated as constant along that coordinate.
struct PotentialTable {
  int spatial_dim = 1;
  std::vector<double> times;
  std::array<std::vector<double>, 3> axes;
  /// Row-major over (t, x, y, z), last index fastest.
  std::vector<FourPotential> values;
};

class PotentialModel;
class GaugeFunction;

/// Immutable external 4-potential with closed-form presets.
class Potential {
public:
  static Potential zero(int spatial_dim);
  static Potential uniform_scalar(int spatial_dim, double value);
  /// A0 = -E.x, A = 0
  static Potential constant_electric(int spatial_dim, const Vec3& field);
  /// A = B x x / 2, A0 = 0; 3+1D only.
  static Potential constant_magnetic(const Vec3& field);
  static Potential plane_wave(int spatial_dim, const PlaneWave& wave);
  static Potential gaussian_pulse(int spatial_dim, const GaussianPulse& pulse);
  static Potential tabulated(PotentialTable table);

  [[nodiscard]] FourPotential evaluate(double t, const Vec3& x) const;
  [[nodiscard]] FieldStrength fields(double t, const Vec3& x) const;

  [[nodiscard]] int spatial_dim() const noexcept;
  [[nodiscard]] PotentialKind kind() const noexcept;
  /// True when evaluate() does not depend on t.
  [[nodiscard]] bool is_static() const noexcept;
  /// True when A0 and A are identically zero.
  [[nodiscard]] bool is_zero() const noexcept;

  explicit Potential(std::shared_ptr<const PotentialModel> model);
  [[nodiscard]] const PotentialModel& model() const noexcept { return *model_; }

private:
  std::shared_ptr<const PotentialModel> model_;
};

class PotentialModel {
public:
  virtual ~PotentialModel() = default;
  [[nodiscard]] virtual FourPotential evaluate(double t, const Vec3& x) const = 0;
  [[nodiscard]] virtual FieldStrength fields(double t, const Vec3& x) const = 0;
  [[nodiscard]] virtual int spatial_dim() const noexcept = 0;
  [[nodiscard]] virtual PotentialKind kind() const noexcept = 0;
  [[nodiscard]] virtual bool is_static() const noexcept = 0;
  [[nodiscard]] virtual bool is_zero() const noexcept { return false; }
};

/// chi(t, x) = P(t, x) exp(-|x - c|^2 / (2 w^2)) with P a sparse polynomial.
/// Without an envelope the Gaussian factor is 1. Derivatives up to second
/// order are closed form.
class GaugeFunction {
public:
  struct Term {
    double coefficient = 0.0;
    int t_power = 0;
    std::array<int, 3> x_powers{0, 0, 0};
  };

  GaugeFunction(int spatial_dim, std::vector<Term> terms);
  GaugeFunction(int spatial_dim, std::vector<Term> terms, const Vec3& center, double width);

  static GaugeFunction constant(int spatial_dim, double value);
  /// chi = (E.x) t
  static GaugeFunction linear_electric(int spatial_dim, const Vec3& field);

  [[nodiscard]] int spatial_dim() const noexcept { return dim_; }
  [[nodiscard]] double value(double t, const Vec3& x) const;
  [[nodiscard]] double time_derivative(double t, const Vec3& x) const;
  [[nodiscard]] Vec3 gradient(double t, const Vec3& x) const;
  /// d/dx_a of d chi / dt
  [[nodiscard]] Vec3 gradient_of_time_derivative(double t, const Vec3& x) const;
  /// d/dt of d chi / dx_a
  [[nodiscard]] Vec3 time_derivative_of_gradient(double t, const Vec3& x) const;
  /// Antisymmetric part of the spatial Hessian, curl(grad chi).
  [[nodiscard]] Vec3 curl_of_gradient(double t, const Vec3& x) const;

private:
  // Mixed partial with derivative orders (dt, dx, dy, dz), each <= 2 in total.
  [[nodiscard]] double partial(double t, const Vec3& x, int dt, const std::array<int, 3>& dx) const;

  int dim_;
  std::vector<Term> terms_;
  bool envelope_ = false;
  Vec3 center_ = Vec3::Zero();
  double width_ = 1.0;
};

/// A' = A + grad chi, A0' = A0 - d chi / dt. The wavefunction picks up exp(i e chi).
[[nodiscard]] Potential gauge_transform(const Potential& potential, const GaugeFunction& chi);

/// Evaluates a potential on a table grid (used to build tabulated potentials).
[[nodiscard]] PotentialTable sample_potential(const Potential& potential,
                                              const std::vector<double>& times,
                                              const std::array<std::vector<double>, 3>& axes);

/// CSV with columns t, x[, y, z], A0, A_x[, A_y, A_z]; an optional header row is skipped.
[[nodiscard]] PotentialTable load_potential_csv(const std::filesystem::path& path, int spatial_dim);

} // namespace dirac
