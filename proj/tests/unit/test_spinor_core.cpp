#include <doctest/doctest.h>

#include "dirac/free_propagator.hpp"
#include "dirac/spinor_core.hpp"
#include "oracles.hpp"

using namespace dirac;

TEST_CASE("standard representations satisfy the Clifford relations") {
  CHECK(clifford_residual(Representation::dirac(3)) <= 1e-15);
  CHECK(clifford_residual(Representation::dirac(1)) <= 1e-15);
  CHECK(clifford_residual(Representation::chiral(3)) < 1e-13);
  CHECK(clifford_residual(Representation::chiral(1)) < 1e-13);
}

TEST_CASE("1+1D representation is beta = sigma3, alpha1 = sigma1") {
  const auto rep = Representation::dirac(1);
  CHECK((rep.beta() - oracle::pauli(3)).norm() == 0.0);
  CHECK((rep.alpha(0) - oracle::pauli(1)).norm() == 0.0);
  CHECK(rep.spinor_dim() == 2);
  CHECK(rep.beta_is_diagonal());
}

TEST_CASE("3+1D Dirac representation matches the textbook block form") {
  const auto rep = Representation::dirac(3);
  CMatrix beta = CMatrix::Zero(4, 4);
  beta.topLeftCorner(2, 2).setIdentity();
  beta.bottomRightCorner(2, 2) = -CMatrix::Identity(2, 2);
  CHECK((rep.beta() - beta).norm() == 0.0);
  for (int a = 0; a < 3; ++a) {
    CMatrix alpha = CMatrix::Zero(4, 4);
    alpha.topRightCorner(2, 2) = oracle::pauli(a + 1);
    alpha.bottomLeftCorner(2, 2) = oracle::pauli(a + 1);
    CHECK((rep.alpha(a) - alpha).norm() == 0.0);
  }
}

TEST_CASE("perturbed beta is detected") {
  const auto good = Representation::dirac(3);
  CMatrix beta = good.beta();
  beta(0, 1) += 0.01;
  const Representation bad(3, beta, {good.alpha(0), good.alpha(1), good.alpha(2)});
  CHECK(clifford_residual(bad) >= 0.01);
}

TEST_CASE("malformed representations are structural errors") {
  const auto good = Representation::dirac(1);
  auto build_wrong_beta = [&] { Representation(1, CMatrix::Identity(3, 3), {good.alpha(0)}); };
  CHECK_THROWS_AS(build_wrong_beta(), Error);
  try {
    build_wrong_beta();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::structural);
  }
  auto missing_alpha = [&] { Representation(3, CMatrix::Identity(4, 4), {}); };
  CHECK_THROWS_AS(missing_alpha(), Error);
}

TEST_CASE("grid geometry") {
  const Grid g(1, 16, 0.5);
  CHECK(g.extent() == 8.0);
  CHECK(g.coordinate(8) == 0.0);
  CHECK(g.coordinate(0) == -4.0);
  CHECK(g.origin_index() == 8);
  // modes in (-pi/dx, pi/dx]
  double lo = 1e9;
  double hi = -1e9;
  for (int j = 0; j < 16; ++j) {
    lo = std::min(lo, g.wavenumber(j));
    hi = std::max(hi, g.wavenumber(j));
  }
  CHECK(hi == doctest::Approx(g.nyquist()));
  CHECK(lo > -g.nyquist());
  CHECK_THROWS_AS(Grid(1, 100, 0.1), Error);
  CHECK_THROWS_AS(Grid(1, 4, 0.1), Error);
  CHECK_THROWS_AS(Grid(2, 16, 0.1), Error);
  CHECK_THROWS_AS(Grid(1, 16, 0.0), Error);
}

TEST_CASE("inner product of normalised and disjoint packets") {
  const Grid g(1, 512, 0.05);
  const auto rep = Representation::dirac(1);
  PacketSpec a;
  a.center = Vec3(-6, 0, 0);
  a.width = 0.3;
  PacketSpec b = a;
  b.center = Vec3(6, 0, 0);
  const auto pa = gaussian_packet(g, rep, a);
  const auto pb = gaussian_packet(g, rep, b);
  CHECK(inner(pa, pa).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(inner(pa, pa).imag()) < 1e-15);
  CHECK(std::abs(inner(pa, pb)) < 1e-12);
}

TEST_CASE("inner rejects mismatched grids") {
  const auto rep = Representation::dirac(1);
  const SpinorField a(Grid(1, 16, 0.1), rep);
  const SpinorField b(Grid(1, 32, 0.1), rep);
  CHECK_THROWS_AS((void)inner(a, b), Error);
  const SpinorField c(Grid(1, 16, 0.2), rep);
  CHECK_THROWS_AS((void)inner(a, c), Error);
}

TEST_CASE("inner is sesquilinear and positive definite on random fields") {
  const Grid g(1, 64, 0.1);
  const auto rep = Representation::dirac(1);
  const auto x = oracle::random_field(g, rep, 1);
  const auto y = oracle::random_field(g, rep, 2);
  const auto z = oracle::random_field(g, rep, 3);
  const cplx alpha(0.3, -1.2);
  const cplx beta(-0.7, 0.4);
  const cplx lhs = inner(x, alpha * y + beta * z);
  const cplx rhs = alpha * inner(x, y) + beta * inner(x, z);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));
  const cplx lhs2 = inner(alpha * x, y);
  CHECK(std::abs(lhs2 - std::conj(alpha) * inner(x, y)) < 1e-12 * std::abs(lhs2));
  CHECK(std::abs(inner(x, y) - std::conj(inner(y, x))) < 1e-12);
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const auto f = oracle::random_field(g, rep, seed);
    CHECK(inner(f, f).real() > 0.0);
    CHECK(inner(f, f).real() == doctest::Approx(f.norm_squared()).epsilon(1e-13));
  }
}

TEST_CASE("norm includes the cell volume") {
  const Grid g(1, 16, 0.25);
  SpinorField psi(g, Representation::dirac(1));
  for (std::size_t j = 0; j < g.size(); ++j) psi.at(j, 0) = 1.0;
  CHECK(psi.norm_squared() == doctest::Approx(16 * 0.25));
  const Grid g3(3, 8, 0.5);
  SpinorField f(g3, Representation::dirac(3));
  f.at(0, 2) = 2.0;
  CHECK(f.norm_squared() == doctest::Approx(4.0 * 0.125));
}

TEST_CASE("unprojected packet is normalised with the requested moments") {
  const Grid g(1, 512, 0.05);
  const auto rep = Representation::dirac(1);
  PacketSpec spec;
  spec.center = Vec3(1.5, 0, 0);
  spec.momentum = Vec3(2.0, 0, 0);
  spec.width = 1.0;
  const auto psi = gaussian_packet(g, rep, spec);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(position_mean(psi, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(position_spread(psi, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("positive-branch packet has no negative-energy component") {
  const Grid g(1, 256, 0.1);
  const auto rep = Representation::dirac(1);
  PacketSpec spec;
  spec.momentum = Vec3(1.3, 0, 0);
  spec.width = 1.0;
  spec.branch = EnergyBranch::positive;
  spec.mass = 1.0;
  spec.spinor = CVector::Ones(2);
  const auto psi = gaussian_packet(g, rep, spec);
  auto hat = oracle::dft(psi);
  double residual = 0.0;
  for (int k = 0; k < g.points_per_axis(); ++k) {
    const Vec3 p(oracle::wavenumber(k, g.points_per_axis(), g.spacing()), 0, 0);
    const CMatrix minus = oracle::eigen_projector(oracle::dense_hamiltonian(rep, p, 1.0), -1);
    residual += (minus * hat[k]).squaredNorm();
  }
  residual = std::sqrt(residual * g.spacing() / g.points_per_axis());
  CHECK(residual < 1e-10);
}

TEST_CASE("p0 = 0 positive packet has vanishing mean velocity") {
  const Grid g(1, 256, 0.1);
  const auto rep = Representation::dirac(1);
  PacketSpec spec;
  spec.width = 1.0;
  spec.branch = EnergyBranch::positive;
  spec.mass = 1.0;
  const auto psi = gaussian_packet(g, rep, spec);
  const double measured = expectation(psi, rep.alpha(0)).real();

  // sum |psihat(p)|^2 p / E(p) over the grid modes
  const auto hat = oracle::dft(psi);
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < g.points_per_axis(); ++k) {
    const double p = oracle::wavenumber(k, g.points_per_axis(), g.spacing());
    const double w = hat[k].squaredNorm();
    num += w * p / std::sqrt(p * p + 1.0);
    den += w;
  }
  CHECK(std::abs(measured) < 1e-6);
  CHECK(std::abs(measured - num / den) < 1e-12);
}

TEST_CASE("projected packet velocity matches the momentum-space oracle") {
  const Grid g(1, 256, 0.1);
  const auto rep = Representation::dirac(1);
  PacketSpec spec;
  spec.momentum = Vec3(0.8, 0, 0);
  spec.width = 1.5;
  spec.branch = EnergyBranch::positive;
  spec.mass = 1.0;
  const auto psi = gaussian_packet(g, rep, spec);
  const auto hat = oracle::dft(psi);
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < g.points_per_axis(); ++k) {
    const double p = oracle::wavenumber(k, g.points_per_axis(), g.spacing());
    num += hat[k].squaredNorm() * p / std::sqrt(p * p + 1.0);
    den += hat[k].squaredNorm();
  }
  const double measured = expectation(psi, rep.alpha(0)).real();
  CHECK(measured == doctest::Approx(num / den).epsilon(1e-12));
  // frozen: lattice sum of the continuous spectrum weight (E + m) / 2E
  CHECK(measured == doctest::Approx(0.5772652739016281).epsilon(1e-9));
}

TEST_CASE("packet errors") {
  const Grid g(1, 256, 0.1);
  const auto rep = Representation::dirac(1);
  PacketSpec spec;
  spec.width = 0.2;
  CHECK_THROWS_AS((void)gaussian_packet(g, rep, spec), Error);
  try {
    (void)gaussian_packet(g, rep, spec);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resolution);
  }

  spec.width = 1.0;
  spec.center = Vec3(10.0, 0, 0);
  try {
    (void)gaussian_packet(g, rep, spec);
    FAIL("expected a budget error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::budget);
  }

  // heavy mass: the lower spinor has almost no positive-energy weight
  spec.center = Vec3::Zero();
  spec.branch = EnergyBranch::positive;
  spec.mass = 1e14;
  spec.spinor = CVector::Unit(2, 1);
  try {
    (void)gaussian_packet(g, rep, spec);
    FAIL("expected a degenerate error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate);
  }
}

TEST_CASE("packet is translation covariant by whole cells") {
  const Grid g(1, 128, 0.1);
  const auto rep = Representation::dirac(1);
  PacketSpec spec;
  spec.center = Vec3(0.3, 0, 0);
  spec.momentum = Vec3(1.1, 0, 0);
  spec.width = 0.8;
  spec.branch = EnergyBranch::positive;
  const auto a = gaussian_packet(g, rep, spec);
  const int shift = 7;
  spec.center[0] += shift * g.spacing();
  const auto b = gaussian_packet(g, rep, spec);
  double diff = 0.0;
  for (int j = 0; j < 128; ++j)
    for (int c = 0; c < 2; ++c)
      diff = std::max(diff, std::abs(b.at((j + shift) % 128, c) - a.at(j, c)));
  CHECK(diff < 1e-12);
}

TEST_CASE("3+1D packet moments") {
  const Grid g(3, 64, 0.2);
  const auto rep = Representation::dirac(3);
  PacketSpec spec;
  spec.center = Vec3(0.5, -0.25, 0.0);
  spec.width = 0.75;
  const auto psi = gaussian_packet(g, rep, spec);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(position_mean(psi, 0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(position_mean(psi, 1) == doctest::Approx(-0.25).epsilon(1e-10));
  CHECK(std::abs(position_mean(psi, 2)) < 1e-12);
}

TEST_CASE("bump source is compactly supported") {
  const Grid g(1, 256, 0.05);
  const auto psi = bump_source(g, Representation::dirac(1), Vec3::Zero(), 1.0);
  CHECK(psi.norm() == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t j = 0; j < g.size(); ++j)
    if (std::abs(g.position(j)[0]) >= 1.0) CHECK(std::abs(psi.at(j, 0)) == 0.0);
}
