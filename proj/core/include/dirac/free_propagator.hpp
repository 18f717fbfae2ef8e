#pragma once

#include <iosfwd>
#include <vector>

#include "dirac/fourier.hpp"
#include "dirac/spinor_core.hpp"

namespace dirac {

/// E(p) = sqrt(|p|^2 + m^2) over the active axes.
[[nodiscard]] double dispersion(const Vec3& p, double mass, int spatial_dim);

/// H(p) = alpha.p + m beta
[[nodiscard]] CMatrix hamiltonian(const Representation& rep, const Vec3& p, double mass);

/// exp(-i H(p) dt) = cos(E dt) I - i sin(E dt) H(p) / E, series branch for E dt < 1e-6.
[[nodiscard]] CMatrix step_unitary(const Representation& rep, const Vec3& p, double mass,
                                   double dt);

struct SpectralProjectors {
  CMatrix positive;
  CMatrix negative;
};

/// Lambda_+- = (E I +- H(p)) / (2E). Throws ErrorKind::degenerate when E = 0.
[[nodiscard]] SpectralProjectors spectral_projectors(const Representation& rep, const Vec3& p,
                                                     double mass);

/// One s x s block per momentum mode, in FFTW index order, row-major inside a block.
class ModeTable {
public:
  ModeTable(const Grid& grid, int spinor_dim);

  /// exp(-i H(p) dt) on every mode.
  static ModeTable free_evolution(const Grid& grid, const Representation& rep, double mass,
                                  double dt);
  /// H(p) on every mode.
  static ModeTable free_hamiltonian(const Grid& grid, const Representation& rep, double mass);

  [[nodiscard]] std::size_t modes() const noexcept { return modes_; }
  [[nodiscard]] int spinor_dim() const noexcept { return s_; }

  [[nodiscard]] std::span<cplx> block(std::size_t mode) noexcept {
    return {entries_.data() + mode * s_ * s_, static_cast<std::size_t>(s_ * s_)};
  }
  [[nodiscard]] std::span<const cplx> block(std::size_t mode) const noexcept {
    return {entries_.data() + mode * s_ * s_, static_cast<std::size_t>(s_ * s_)};
  }
  void set_block(std::size_t mode, const CMatrix& m);
  [[nodiscard]] CMatrix matrix(std::size_t mode) const;

  /// Multiplies each spinor of a spectrum by its mode block.
  void apply(std::span<cplx> spectrum) const;

private:
  std::size_t modes_;
  int s_;
  std::vector<cplx> entries_;
};

/// Exact free evolution over a fixed dt, with cached plans and mode table.
class FreePropagator {
public:
  FreePropagator(const Grid& grid, const Representation& rep, double mass, double dt);

  void apply(SpinorField& psi) const;
  [[nodiscard]] SpinorField operator()(SpinorField psi) const {
    apply(psi);
    return psi;
  }

  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] double mass() const noexcept { return mass_; }
  [[nodiscard]] const FourierTransform& transform() const noexcept { return fft_; }
  [[nodiscard]] const ModeTable& table() const noexcept { return table_; }

private:
  double mass_;
  double dt_;
  FourierTransform fft_;
  ModeTable table_;
};

[[nodiscard]] SpinorField free_step(const SpinorField& psi, double dt, double mass);

/// H_free psi evaluated spectrally.
[[nodiscard]] SpinorField apply_free_hamiltonian(const SpinorField& psi, double mass);

/// Mode-wise matrix applied through forward/backward transforms.
[[nodiscard]] SpinorField apply_mode_table(const SpinorField& psi, const ModeTable& table);

/// Position-space kernel: column j is the field evolved from a band-limited
/// delta source e_j delta(x) at the origin.
class KernelField {
public:
  KernelField(Grid grid, Representation rep, double time, double mass,
              std::vector<SpinorField> columns);

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] const Representation& rep() const noexcept { return rep_; }
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] double mass() const noexcept { return mass_; }
  [[nodiscard]] int spinor_dim() const noexcept { return rep_.spinor_dim(); }
  [[nodiscard]] const SpinorField& column(int j) const { return columns_.at(j); }
  [[nodiscard]] SpinorField& column(int j) { return columns_.at(j); }
  [[nodiscard]] const std::vector<SpinorField>& columns() const noexcept { return columns_; }

  /// K_ij(x_point)
  [[nodiscard]] cplx entry(std::size_t point, int row, int col) const {
    return columns_[col].at(point, row);
  }

  /// Kernel acting on a field by periodic convolution: (K * phi)(x) = sum_y K(x - y) phi(y) dy.
  /// Meaningful for translation-invariant kernels only.
  [[nodiscard]] SpinorField convolve(const SpinorField& phi) const;

  /// Delta_x^d sum_x K(x) exp(-i p.x) on every mode.
  [[nodiscard]] ModeTable symbol() const;

private:
  Grid grid_;
  Representation rep_;
  double time_;
  double mass_;
  std::vector<SpinorField> columns_;
};

/// Kernel whose symbol (see KernelField::symbol) is the given mode table.
[[nodiscard]] KernelField kernel_from_symbol(const Grid& grid, const Representation& rep,
                                             double time, double mass, const ModeTable& symbol);

/// Band-limited delta e_j delta(x): a single spike of height 1/dx^d at the origin.
[[nodiscard]] SpinorField delta_source(const Grid& grid, const Representation& rep, int component);

/// Retarded free kernel D^m_t; t < 0 throws ErrorKind::domain.
[[nodiscard]] KernelField free_kernel(const Grid& grid, const Representation& rep, double t,
                                      double mass);

/// Convolution of translation-invariant kernels, computed as a mode-wise product.
[[nodiscard]] KernelField compose(const KernelField& later, const KernelField& earlier);

/// Max |K_a - K_b| over all entries.
[[nodiscard]] double max_difference(const KernelField& a, const KernelField& b);

/// "DKF1 d N dx t m\n" followed by columns in order, each as point-major
/// (re, im) little-endian float64 pairs.
void write_kernel(std::ostream& out, const KernelField& kernel);
[[nodiscard]] KernelField read_kernel(std::istream& in, const Representation& rep);

} // namespace dirac
