#include "dirac/foldy_wouthuysen.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace dirac {

namespace {

// Columns sorted by descending eigenvalue, each with its largest component real positive.
CMatrix sorted_eigenvectors(const CMatrix& h) {
  const Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  const Eigen::Index n = h.rows();
  CMatrix v(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    CVector col = solver.eigenvectors().col(n - 1 - j);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    col *= std::abs(col[arg]) / col[arg];
    v.col(j) = col;
  }
  return v;
}

} // namespace

CMatrix fw_matrix(const Representation& rep, const Vec3& p, double mass) {
  const double e = dispersion(p, mass, rep.spatial_dim());
  if (e == 0.0) fail(ErrorKind::degenerate, "FW matrix undefined at E = 0");
  const int s = rep.spinor_dim();
  if (mass == 0.0) {
    const CMatrix vh = sorted_eigenvectors(hamiltonian(rep, p, 0.0));
    const CMatrix vb = sorted_eigenvectors(rep.beta());
    return vb * vh.adjoint();
  }
  const CMatrix t = (e + mass) * CMatrix::Identity(s, s) + rep.beta() * rep.alpha_dot(p);
  return t / std::sqrt(2.0 * e * (e + mass));
}

double fw_diagonalization_residual(const Representation& rep, const Vec3& p, double mass) {
  const CMatrix t = fw_matrix(rep, p, mass);
  const double e = dispersion(p, mass, rep.spatial_dim());
  return (t * hamiltonian(rep, p, mass) * t.adjoint() - e * rep.beta()).cwiseAbs().maxCoeff();
}

CMatrix fw_mode_multiplier(const Representation& rep, double energy, double t) {
  const int s = rep.spinor_dim();
  return std::cos(energy * t) * CMatrix::Identity(s, s) -
         cplx(0.0, std::sin(energy * t)) * rep.beta();
}

ModeTable fw_table(const Grid& grid, const Representation& rep, double mass) {
  const int s = rep.spinor_dim();
  ModeTable table(grid, s);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec3 p = grid.momentum(k);
    if (dispersion(p, mass, grid.spatial_dim()) == 0.0)
      table.set_block(k, CMatrix::Identity(s, s));
    else
      table.set_block(k, fw_matrix(rep, p, mass));
  }
  return table;
}

namespace {

ModeTable fw_multiplier_table(const Grid& grid, const Representation& rep, double mass, double t) {
  ModeTable table(grid, rep.spinor_dim());
  for (std::size_t k = 0; k < grid.size(); ++k)
    table.set_block(
        k, fw_mode_multiplier(rep, dispersion(grid.momentum(k), mass, grid.spatial_dim()), t));
  return table;
}

} // namespace

KernelField fw_kernel(const Grid& grid, const Representation& rep, double t, double mass) {
  if (t < 0.0) fail(ErrorKind::domain, "FW kernel is retarded: t must be non-negative");
  return kernel_from_symbol(grid, rep, t, mass, fw_multiplier_table(grid, rep, mass, t));
}

double fw_conjugation_check(const Grid& grid, const Representation& rep, double t, double mass) {
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec3 p = grid.momentum(k);
    const double e = dispersion(p, mass, grid.spatial_dim());
    const CMatrix u = step_unitary(rep, p, mass, t);
    const int s = rep.spinor_dim();
    const CMatrix tm = e == 0.0 ? CMatrix::Identity(s, s) : fw_matrix(rep, p, mass);
    const CMatrix rebuilt = tm.adjoint() * fw_mode_multiplier(rep, e, t) * tm;
    worst = std::max(worst, (u - rebuilt).cwiseAbs().maxCoeff());
  }
  return worst;
}

SpinorField fw_transform(const SpinorField& psi, double mass, bool inverse) {
  ModeTable table = fw_table(psi.grid(), psi.rep(), mass);
  if (inverse)
    for (std::size_t k = 0; k < table.modes(); ++k) table.set_block(k, table.matrix(k).adjoint());
  return apply_mode_table(psi, table);
}

double fw_interacting_compare(const SpinorField& psi0, const Potential& potential, double t0,
                              double t1, const SplitScheme& scheme, double mass, double e) {
  const SpinorField direct = evolve(psi0, potential, t0, t1, scheme, mass, e).final_state;

  const Grid& grid = psi0.grid();
  const Representation& rep = psi0.rep();
  const double dt = scheme.dt;
  const std::size_t n = slice_count(t1 - t0, dt);
  const bool strang = scheme.variant == SplitVariant::strang;

  const ModeTable to_fw = fw_table(grid, rep, mass);
  ModeTable from_fw(grid, rep.spinor_dim());
  for (std::size_t k = 0; k < to_fw.modes(); ++k) from_fw.set_block(k, to_fw.matrix(k).adjoint());
  const ModeTable diag = fw_multiplier_table(grid, rep, mass, strang ? 0.5 * dt : dt);

  // Full-slice phases sampled at slice midpoints.
  const InteractingStepper phases(grid, rep, potential, mass, e, {SplitVariant::lie, dt});
  const FourierTransform fft(grid, rep.spinor_dim());

  SpinorField psi = psi0;
  fft.forward(psi.data());
  to_fw.apply(psi.data()); // FW variables, momentum space
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    diag.apply(psi.data());
    from_fw.apply(psi.data());
    fft.backward(psi.data());
    phases.apply_phase(psi, t + 0.5 * dt, dt);
    fft.forward(psi.data());
    to_fw.apply(psi.data());
    if (strang) diag.apply(psi.data());
  }
  from_fw.apply(psi.data());
  fft.backward(psi.data());

  SpinorField diff = psi;
  diff -= direct;
  return diff.norm() / direct.norm();
}

} // namespace dirac
