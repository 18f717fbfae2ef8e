#include "dirac/path_sum_oracle.hpp"

#include <cmath>

#include "dirac/free_propagator.hpp"
#include "dirac/interacting_evolution.hpp"

namespace dirac {

namespace {

void check_dense(const Grid& grid, const Representation& rep) {
  if (grid.spatial_dim() != 1 || rep.spatial_dim() != 1)
    fail(ErrorKind::structural, "dense oracle is 1+1D only");
  const std::size_t dim = grid.size() * static_cast<std::size_t>(rep.spinor_dim());
  if (dim > dense_cap)
    fail(ErrorKind::feasibility, "dense oracle dimension " + std::to_string(dim) +
                                     " exceeds the cap of " + std::to_string(dense_cap));
}

void apply_blocks(const std::vector<CMatrix>& blocks, CVector& v) {
  const Eigen::Index s = blocks.front().rows();
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    const Eigen::Index off = static_cast<Eigen::Index>(p) * s;
    v.segment(off, s) = blocks[p] * v.segment(off, s);
  }
}

} // namespace

CMatrix build_transfer(const Grid& grid, const Representation& rep, double mass, double dt) {
  check_dense(grid, rep);
  const int n = grid.points_per_axis();
  const int s = rep.spinor_dim();

  std::vector<CMatrix> modes;
  modes.reserve(n);
  for (int k = 0; k < n; ++k)
    modes.push_back(step_unitary(rep, Vec3(grid.wavenumber(k), 0.0, 0.0), mass, dt));

  // c[delta] = (1/N) sum_k exp(2 pi i k delta / N) U(k)
  std::vector<CMatrix> column(n, CMatrix::Zero(s, s));
  for (int delta = 0; delta < n; ++delta) {
    for (int k = 0; k < n; ++k) {
      const long long phase_index = (static_cast<long long>(k) * delta) % n;
      const cplx w = std::polar(1.0, 2.0 * pi * static_cast<double>(phase_index) / n);
      column[delta] += w * modes[k];
    }
    column[delta] /= static_cast<double>(n);
  }

  CMatrix k_mat(n * s, n * s);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) k_mat.block(i * s, j * s, s, s) = column[((i - j) % n + n) % n];
  return k_mat;
}

std::vector<CMatrix> phase_blocks(const Grid& grid, const Representation& rep,
                                  const Potential& potential, double e, double t, double dt) {
  std::vector<CMatrix> blocks;
  blocks.reserve(grid.size());
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const FourPotential ap = potential.evaluate(t, grid.position(p));
    blocks.push_back(interaction_phase(rep, ap.scalar, ap.vector, e, dt));
  }
  return blocks;
}

CMatrix phase_matrix(const Grid& grid, const Representation& rep, const Potential& potential,
                     double e, double t, double dt) {
  check_dense(grid, rep);
  const int s = rep.spinor_dim();
  const auto blocks = phase_blocks(grid, rep, potential, e, t, dt);
  const Eigen::Index dim = static_cast<Eigen::Index>(grid.size()) * s;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (std::size_t p = 0; p < blocks.size(); ++p)
    m.block(static_cast<Eigen::Index>(p) * s, static_cast<Eigen::Index>(p) * s, s, s) = blocks[p];
  return m;
}

CVector flatten(const SpinorField& psi) {
  const auto data = psi.data();
  return Eigen::Map<const CVector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

SpinorField unflatten(const Grid& grid, const Representation& rep, const CVector& v) {
  return SpinorField(grid, rep, std::vector<cplx>(v.data(), v.data() + v.size()));
}

SpinorField oracle_evolve(const SpinorField& psi0, const Potential& potential, double t,
                          double dt, double mass, double e) {
  const Grid& grid = psi0.grid();
  const Representation& rep = psi0.rep();
  check_dense(grid, rep);
  const std::size_t n = slice_count(t, dt);
  const CMatrix k_mat = build_transfer(grid, rep, mass, dt);
  CVector v = flatten(psi0);
  for (std::size_t k = 0; k < n; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * dt;
    apply_blocks(phase_blocks(grid, rep, potential, e, mid, dt), v);
    v = k_mat * v;
  }
  return unflatten(grid, rep, v);
}

CMatrix dense_propagator(const Grid& grid, const Representation& rep, const Potential& potential,
                         double t0, double t1, double dt, double mass, double e) {
  check_dense(grid, rep);
  const std::size_t n = slice_count(t1 - t0, dt);
  const CMatrix k_mat = build_transfer(grid, rep, mass, dt);
  const Eigen::Index dim = k_mat.rows();
  CMatrix prod = CMatrix::Identity(dim, dim);
  for (std::size_t k = 0; k < n; ++k) {
    const double mid = t0 + (static_cast<double>(k) + 0.5) * dt;
    prod = k_mat * phase_matrix(grid, rep, potential, e, mid, dt) * prod;
  }
  return prod;
}

double unitarity_residual(const CMatrix& m) {
  return (m.adjoint() * m - CMatrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

double path_action(std::span<const PathPoint> path, const Potential& potential, double e) {
  const int d = potential.spatial_dim();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const double dtau = path[k + 1].tau - path[k].tau;
    if (!(dtau > 0.0)) fail(ErrorKind::domain, "path times must increase");
    Vec3 dx = Vec3::Zero();
    for (int a = 0; a < d; ++a) dx[a] = path[k + 1].x[a] - path[k].x[a];
    if (dx.norm() > dtau * (1.0 + 1e-12))
      fail(ErrorKind::domain, "path step " + std::to_string(k) + " leaves the light cone");
    const FourPotential mid =
        potential.evaluate(path[k].tau + 0.5 * dtau, 0.5 * (path[k].x + path[k + 1].x));
    sum += mid.vector.dot(dx) - mid.scalar * dtau;
  }
  return e * sum;
}

} // namespace dirac
