#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dirac/error.hpp"
#include "dirac/types.hpp"

namespace dirac {

/// Clifford data for the Dirac Hamiltonian H = alpha.p + m beta.
///
/// Immutable and cheap to copy; the matrices live behind a shared pointer.
/// The constructor checks shapes only, so deliberately broken algebras can
/// be built and fed to clifford_residual().
class Representation {
public:
  /// beta diagonal: beta = diag(I2, -I2) in 3+1D, beta = sigma_3 and
  /// alpha_1 = sigma_1 in 1+1D.
  static Representation dirac(int spatial_dim);
  /// Chiral (Weyl) form with off-diagonal beta. Only used to show that
  /// representation-independent invariants do not depend on the choice.
  static Representation chiral(int spatial_dim);

  Representation(int spatial_dim, CMatrix beta, std::vector<CMatrix> alpha,
                 std::string name = "custom");

  [[nodiscard]] int spatial_dim() const noexcept { return data_->spatial_dim; }
  [[nodiscard]] int spinor_dim() const noexcept { return data_->spinor_dim; }
  [[nodiscard]] const CMatrix& beta() const noexcept { return data_->beta; }
  [[nodiscard]] const CMatrix& alpha(int axis) const { return data_->alpha.at(axis); }
  [[nodiscard]] const std::string& name() const noexcept { return data_->name; }
  [[nodiscard]] bool beta_is_diagonal() const noexcept { return data_->beta_diagonal; }

  /// sum_i alpha_i v_i over the active axes.
  [[nodiscard]] CMatrix alpha_dot(const Vec3& v) const;

  friend bool operator==(const Representation& a, const Representation& b);

private:
  struct Data {
    int spatial_dim;
    int spinor_dim;
    CMatrix beta;
    std::vector<CMatrix> alpha;
    std::string name;
    bool beta_diagonal;
  };
  std::shared_ptr<const Data> data_;
};

/// Max-norm of every Hermiticity and anticommutator residual:
/// beta^2 - I, {alpha_i, alpha_j} - 2 delta_ij, {alpha_i, beta}, beta - beta^H, alpha_i - alpha_i^H.
[[nodiscard]] double clifford_residual(const Representation& rep);

/// Periodic cubic grid with N points per axis. Point j sits at (j - N/2) dx,
/// so the origin is a grid point at the box centre.
class Grid {
public:
  Grid(int spatial_dim, int points_per_axis, double spacing);

  [[nodiscard]] int spatial_dim() const noexcept { return dim_; }
  [[nodiscard]] int points_per_axis() const noexcept { return n_; }
  [[nodiscard]] double spacing() const noexcept { return dx_; }
  [[nodiscard]] double extent() const noexcept { return n_ * dx_; }
  [[nodiscard]] double half_extent() const noexcept { return 0.5 * n_ * dx_; }
  [[nodiscard]] std::size_t size() const noexcept { return size_; }
  [[nodiscard]] double cell_volume() const noexcept;

  [[nodiscard]] double coordinate(int index) const noexcept { return (index - n_ / 2) * dx_; }
  /// Discrete Fourier dual, modes in (-pi/dx, pi/dx].
  [[nodiscard]] double wavenumber(int index) const noexcept;
  [[nodiscard]] double nyquist() const noexcept { return pi / dx_; }

  /// Flat index = ((i0 * N) + i1) * N + i2, axis 0 is x.
  [[nodiscard]] std::array<int, 3> unflatten(std::size_t flat) const noexcept;
  [[nodiscard]] Vec3 position(std::size_t flat) const noexcept;
  [[nodiscard]] Vec3 momentum(std::size_t flat) const noexcept;
  /// Flat index of the origin.
  [[nodiscard]] std::size_t origin_index() const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  int dim_;
  int n_;
  double dx_;
  std::size_t size_;
};

/// Spinor amplitudes on a Grid, stored point-major: data[point * s + component].
class SpinorField {
public:
  SpinorField(Grid grid, Representation rep);
  SpinorField(Grid grid, Representation rep, std::vector<cplx> amplitudes);

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const Representation& rep() const noexcept { return rep_; }
  [[nodiscard]] int spinor_dim() const noexcept { return rep_.spinor_dim(); }

  [[nodiscard]] std::span<cplx> data() noexcept { return amplitudes_; }
  [[nodiscard]] std::span<const cplx> data() const noexcept { return amplitudes_; }
  [[nodiscard]] cplx& at(std::size_t point, int component) {
    return amplitudes_[point * spinor_dim() + component];
  }
  [[nodiscard]] const cplx& at(std::size_t point, int component) const {
    return amplitudes_[point * spinor_dim() + component];
  }

  /// sum |psi|^2 dx^d
  [[nodiscard]] double norm_squared() const noexcept;
  [[nodiscard]] double norm() const noexcept;

  SpinorField& operator+=(const SpinorField& other);
  SpinorField& operator-=(const SpinorField& other);
  SpinorField& operator*=(cplx factor) noexcept;

  friend SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
  friend SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
  friend SpinorField operator*(cplx f, SpinorField a) { return a *= f; }

private:
  Grid grid_;
  Representation rep_;
  std::vector<cplx> amplitudes_;
};

/// Throws ErrorKind::structural unless both fields share grid and representation.
void require_compatible(const SpinorField& a, const SpinorField& b);

/// <a|b> = sum conj(a) b dx^d
[[nodiscard]] cplx inner(const SpinorField& a, const SpinorField& b);

/// Applies a constant spinor matrix at every point.
[[nodiscard]] SpinorField apply_spinor_matrix(const CMatrix& m, const SpinorField& psi);
/// <psi| M |psi> for a constant spinor matrix.
[[nodiscard]] cplx expectation(const SpinorField& psi, const CMatrix& m);
/// <x_axis> = sum x |psi|^2 dx^d
[[nodiscard]] double position_mean(const SpinorField& psi, int axis);
/// Standard deviation of |psi|^2 along an axis (normalised by the field norm).
[[nodiscard]] double position_spread(const SpinorField& psi, int axis);

enum class EnergyBranch { none, positive, negative };

struct PacketSpec {
  Vec3 center = Vec3::Zero();
  Vec3 momentum = Vec3::Zero();
  double width = 1.0; ///< position standard deviation of |psi|^2 per axis
  EnergyBranch branch = EnergyBranch::none;
  double mass = 1.0;
  /// Constant spinor multiplying the envelope; defaults to the first basis vector.
  std::optional<CVector> spinor;
};

/// Normalised Gaussian exp(-|x - x0|^2 / (4 w^2)) exp(i p0.(x - x0)) chi,
/// optionally projected mode-wise onto one energy branch. Distances are
/// taken with the minimum-image convention.
[[nodiscard]] SpinorField gaussian_packet(const Grid& grid, const Representation& rep,
                                          const PacketSpec& spec);

/// Normalised compactly supported bump exp(-1 / (1 - (r/w)^2)) chi, r < w.
[[nodiscard]] SpinorField bump_source(const Grid& grid, const Representation& rep,
                                      const Vec3& center, double half_width,
                                      std::optional<CVector> spinor = std::nullopt);

/// Unit spinor e_j in the representation's basis.
[[nodiscard]] CVector basis_spinor(const Representation& rep, int j);

} // namespace dirac
