#pragma once

#include "dirac/em_potential.hpp"
#include "dirac/free_propagator.hpp"
#include "dirac/interacting_evolution.hpp"

namespace dirac {

/// T(p) = ((E + m) I + beta alpha.p) / sqrt(2E(E + m)), so T H T^H = beta E.
///
/// For m = 0 the matrix comes from eigendecompositions of H(p) and beta
/// instead, with each eigenvector's largest-magnitude component made real
/// and positive. Throws ErrorKind::degenerate when E = 0.
[[nodiscard]] CMatrix fw_matrix(const Representation& rep, const Vec3& p, double mass);

/// max |T H T^H - beta E|
[[nodiscard]] double fw_diagonalization_residual(const Representation& rep, const Vec3& p,
                                                 double mass);

/// exp(-i beta E t) = cos(E t) I - i sin(E t) beta
[[nodiscard]] CMatrix fw_mode_multiplier(const Representation& rep, double energy, double t);

/// T(p) on every mode; the identity on a massless zero mode.
[[nodiscard]] ModeTable fw_table(const Grid& grid, const Representation& rep, double mass);

/// D^F_t: per mode exp(-i beta E t). With diagonal beta the upper block is the
/// transform of exp(-iEt) and the lower block of exp(+iEt).
[[nodiscard]] KernelField fw_kernel(const Grid& grid, const Representation& rep, double t,
                                    double mass);

/// max over modes of max |U(t, p) - T^H exp(-i beta E t) T|
[[nodiscard]] double fw_conjugation_check(const Grid& grid, const Representation& rep, double t,
                                          double mass);

/// Applies T (or T^H when inverse) mode-wise.
[[nodiscard]] SpinorField fw_transform(const SpinorField& psi, double mass, bool inverse = false);

/// Relative L2 difference between (a) the direct split-step and (b) the same
/// slicing carried out in FW variables, where the free factor is diagonal
/// and each interaction phase is applied after returning to the original
/// basis. Route (b) orders each slice as free then phase (Lie) or half free,
/// phase, half free (Strang).
[[nodiscard]] double fw_interacting_compare(const SpinorField& psi0, const Potential& potential,
                                            double t0, double t1, const SplitScheme& scheme,
                                            double mass, double e);

} // namespace dirac
