#pragma once

#include <span>
#include <vector>

#include "dirac/em_potential.hpp"
#include "dirac/spinor_core.hpp"

namespace dirac {

/// Dense position-space evolution operators on a 1+1D grid.
///
/// State vectors are flattened point-major, index = point * s + component,
/// the same layout as SpinorField storage. Sizes are capped at N s <= 4096.
inline constexpr std::size_t dense_cap = 4096;

/// One free slice as an (N s) x (N s) circulant matrix, assembled from the
/// closed-form mode exponential with explicit DFT sums (no FFT involved).
[[nodiscard]] CMatrix build_transfer(const Grid& grid, const Representation& rep, double mass,
                                     double dt);

/// Diagonal phase blocks exp(-i H_int(t, x_j) dt), one s x s matrix per point.
[[nodiscard]] std::vector<CMatrix> phase_blocks(const Grid& grid, const Representation& rep,
                                                const Potential& potential, double e, double t,
                                                double dt);

/// The block-diagonal phase as a dense matrix.
[[nodiscard]] CMatrix phase_matrix(const Grid& grid, const Representation& rep,
                                   const Potential& potential, double e, double t, double dt);

[[nodiscard]] CVector flatten(const SpinorField& psi);
[[nodiscard]] SpinorField unflatten(const Grid& grid, const Representation& rep, const CVector& v);

/// prod_k (K_dt Phi_k) psi0 on [0, t], Phi_k sampled at the slice midpoint,
/// applied as sequential dense products.
[[nodiscard]] SpinorField oracle_evolve(const SpinorField& psi0, const Potential& potential,
                                        double t, double dt, double mass, double e);

/// The whole product prod_k (K_dt Phi_k) over [t0, t1] as one dense matrix.
[[nodiscard]] CMatrix dense_propagator(const Grid& grid, const Representation& rep,
                                       const Potential& potential, double t0, double t1,
                                       double dt, double mass, double e);

/// max |M^H M - I|
[[nodiscard]] double unitarity_residual(const CMatrix& m);

struct PathPoint {
  double tau = 0.0;
  Vec3 x = Vec3::Zero();
};

/// e sum_k (A . dx_k - A0 dtau_k) with A, A0 at the segment midpoints.
/// Steps faster than light throw ErrorKind::domain.
[[nodiscard]] double path_action(std::span<const PathPoint> path, const Potential& potential,
                                 double e);

} // namespace dirac
