#include <doctest/doctest.h>

#include <filesystem>
#include <fstream>

#include "dirac/em_potential.hpp"
#include "oracles.hpp"

using namespace dirac;

namespace {

double max_abs(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }

Vec3 random_point(std::mt19937_64& rng, int d, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < d; ++a) x[a] = u(rng);
  return x;
}

// chi = (0.3 + 0.2 t x - 0.15 y^2 + 0.1 t^2 z + 0.05 x y) exp(-|x - c|^2 / 2 w^2)
GaugeFunction random_gauge(int d) {
  std::vector<GaugeFunction::Term> terms{
      {0.3, 0, {0, 0, 0}}, {0.2, 1, {1, 0, 0}}, {0.05, 0, {2, 0, 0}}, {-0.1, 2, {1, 0, 0}}};
  if (d == 3) {
    terms.push_back({-0.15, 0, {0, 2, 0}});
    terms.push_back({0.1, 2, {0, 0, 1}});
    terms.push_back({0.05, 0, {1, 1, 0}});
    terms.push_back({0.07, 1, {0, 1, 1}});
  }
  return GaugeFunction(d, terms, Vec3(0.2, -0.1, 0.3), 1.5);
}

std::vector<Potential> presets(int d) {
  std::vector<Potential> out{Potential::zero(d), Potential::uniform_scalar(d, 0.7),
                             Potential::constant_electric(d, Vec3(0.5, -0.2, 0.1))};
  PlaneWave w;
  w.wave_vector = Vec3(0.8, 0.3, -0.2);
  w.frequency = 0.9;
  w.amplitude = Vec3(0.1, 0.4, 0.2);
  w.scalar_amplitude = 0.3;
  w.phase = 0.4;
  out.push_back(Potential::plane_wave(d, w));
  GaussianPulse g;
  g.direction = Vec3(1, 1, 0);
  g.width = 0.8;
  g.carrier = 2.0;
  g.amplitude = Vec3(0.0, 0.0, 0.5);
  if (d == 1) g.amplitude = Vec3(0.5, 0, 0);
  out.push_back(Potential::gaussian_pulse(d, g));
  if (d == 3) out.push_back(Potential::constant_magnetic(Vec3(0.1, 0.2, 1.0)));
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("dirac_test_" + name);
  std::ofstream(path) << text;
  return path;
}

} // namespace

TEST_CASE("preset values") {
  const auto zero = Potential::zero(3).evaluate(1.0, Vec3(1, 2, 3));
  CHECK(zero.scalar == 0.0);
  CHECK(zero.vector.norm() == 0.0);

  const auto e = Potential::constant_electric(3, Vec3(1, 0, 0)).evaluate(0.0, Vec3(2, 0, 0));
  CHECK(e.scalar == -2.0);
  CHECK(e.vector.norm() == 0.0);

  const auto b = Potential::constant_magnetic(Vec3(0, 0, 1)).evaluate(0.0, Vec3(1, 0, 0));
  CHECK(b.scalar == 0.0);
  CHECK(max_abs(b.vector - Vec3(0, 0.5, 0)) == 0.0);

  CHECK(Potential::uniform_scalar(1, 0.25).evaluate(3.0, Vec3(7, 0, 0)).scalar == 0.25);
}

TEST_CASE("preset flags") {
  CHECK(Potential::zero(1).is_zero());
  CHECK(Potential::zero(1).is_static());
  CHECK_FALSE(Potential::uniform_scalar(1, 1.0).is_zero());
  CHECK(Potential::constant_electric(1, Vec3(1, 0, 0)).is_static());
  CHECK(Potential::constant_magnetic(Vec3(0, 0, 1)).spatial_dim() == 3);
  PlaneWave w;
  w.frequency = 1.0;
  CHECK_FALSE(Potential::plane_wave(1, w).is_static());
  CHECK_THROWS_AS((void)Potential::zero(2), Error);
}

TEST_CASE("constant presets return their field strength everywhere") {
  std::mt19937_64 rng(1);
  const Vec3 ef(0.3, -0.7, 1.1);
  const Vec3 bf(0.2, 0.0, -0.9);
  const auto pe = Potential::constant_electric(3, ef);
  const auto pb = Potential::constant_magnetic(bf);
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = random_point(rng, 3, 5.0);
    const double t = 3.0 * i;
    CHECK(max_abs(pe.fields(t, x).electric - ef) < 1e-15);
    CHECK(max_abs(pe.fields(t, x).magnetic) == 0.0);
    CHECK(max_abs(pb.fields(t, x).magnetic - bf) < 1e-15);
    CHECK(max_abs(pb.fields(t, x).electric) == 0.0);
  }
}

TEST_CASE("plane wave fields agree with hand-derived expressions and |E| = |B|") {
  // A = a cos(th), th = k.x - w t, a perpendicular to k, w = |k|
  const Vec3 k(0.6, 0.0, 0.8);
  const Vec3 a(0.0, 0.5, 0.0);
  PlaneWave w;
  w.wave_vector = k;
  w.frequency = k.norm();
  w.amplitude = a;
  const auto pot = Potential::plane_wave(3, w);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 x = random_point(rng, 3, 10.0);
    const double t = 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    const double th = k.dot(x) - w.frequency * t;
    // E = -dA/dt = -a w sin th, B = curl A = -(k x a) sin th
    const Vec3 e_ref = -a * w.frequency * std::sin(th);
    const Vec3 b_ref = -k.cross(a) * std::sin(th);
    const auto f = pot.fields(t, x);
    CHECK(max_abs(f.electric - e_ref) < 1e-12);
    CHECK(max_abs(f.magnetic - b_ref) < 1e-12);
    CHECK(std::abs(f.electric.norm() - f.magnetic.norm()) < 1e-10);
  }
}

TEST_CASE("analytic fields agree with finite differences of the potential") {
  std::mt19937_64 rng(3);
  for (int d : {1, 3})
    for (const auto& pot : presets(d)) {
      for (int i = 0; i < 20; ++i) {
        const Vec3 x = random_point(rng, d, 2.0);
        const double t = 0.37 * i;
        const double h = 1e-5;
        Vec3 grad = Vec3::Zero();
        Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
        for (int a = 0; a < d; ++a) {
          Vec3 xp = x, xm = x;
          xp[a] += h;
          xm[a] -= h;
          grad[a] = (pot.evaluate(t, xp).scalar - pot.evaluate(t, xm).scalar) / (2 * h);
          jac.col(a) = (pot.evaluate(t, xp).vector - pot.evaluate(t, xm).vector) / (2 * h);
        }
        const Vec3 dadt = (pot.evaluate(t + h, x).vector - pot.evaluate(t - h, x).vector) / (2 * h);
        Vec3 e = -grad - dadt;
        for (int a = d; a < 3; ++a) e[a] = 0.0;
        const auto f = pot.fields(t, x);
        CHECK(max_abs(f.electric - e) < 1e-8);
        if (d == 3) {
          const Vec3 b(jac(2, 1) - jac(1, 2), jac(0, 2) - jac(2, 0), jac(1, 0) - jac(0, 1));
          CHECK(max_abs(f.magnetic - b) < 1e-8);
        }
      }
    }
}

TEST_CASE("gauge by a constant leaves the potential unchanged") {
  const auto pot = presets(3)[3];
  const auto same = gauge_transform(pot, GaugeFunction::constant(3, 4.2));
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = random_point(rng, 3, 3.0);
    const auto a = pot.evaluate(0.1 * i, x);
    const auto b = same.evaluate(0.1 * i, x);
    CHECK(a.scalar == b.scalar);
    CHECK(max_abs(a.vector - b.vector) == 0.0);
  }
}

TEST_CASE("chi = c t on the zero potential") {
  const double c = 0.8;
  const GaugeFunction chi(1, {{c, 1, {0, 0, 0}}});
  const auto p = gauge_transform(Potential::zero(1), chi);
  const auto v = p.evaluate(2.0, Vec3(1.5, 0, 0));
  CHECK(v.scalar == doctest::Approx(-c));
  CHECK(v.vector.norm() == 0.0);
  CHECK(max_abs(p.fields(2.0, Vec3(1.5, 0, 0)).electric) < 1e-15);
}

TEST_CASE("temporal and scalar gauge give identical constant electric fields") {
  const Vec3 ef(0.4, 0.0, 0.0);
  const auto scalar = Potential::constant_electric(1, ef);
  const auto temporal = gauge_transform(scalar, GaugeFunction::linear_electric(1, -ef));
  // temporal gauge: A0 = 0, A = -E t
  const auto v = temporal.evaluate(2.0, Vec3(3.0, 0, 0));
  CHECK(std::abs(v.scalar) < 1e-15);
  CHECK(v.vector[0] == doctest::Approx(-0.8));
  for (int i = -10; i <= 10; ++i)
    for (double t : {0.0, 0.5, 3.0}) {
      const Vec3 x(0.5 * i, 0, 0);
      CHECK(max_abs(temporal.fields(t, x).electric - scalar.fields(t, x).electric) < 1e-15);
    }
}

TEST_CASE("derived fields are gauge invariant for every preset") {
  std::mt19937_64 rng(5);
  for (int d : {1, 3}) {
    const auto chi = random_gauge(d);
    for (const auto& pot : presets(d)) {
      const auto primed = gauge_transform(pot, chi);
      double worst = 0.0;
      for (int i = 0; i < 100; ++i) {
        const Vec3 x = random_point(rng, d, 3.0);
        const double t = 0.05 * i;
        const auto f = pot.fields(t, x);
        const auto g = primed.fields(t, x);
        worst = std::max({worst, max_abs(f.electric - g.electric), max_abs(f.magnetic - g.magnetic)});
      }
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("gauge derivatives agree with finite differences") {
  const auto chi = random_gauge(3);
  std::mt19937_64 rng(6);
  const double h = 1e-5;
  for (int i = 0; i < 30; ++i) {
    const Vec3 x = random_point(rng, 3, 2.0);
    const double t = 0.1 * i;
    const double dt = (chi.value(t + h, x) - chi.value(t - h, x)) / (2 * h);
    CHECK(chi.time_derivative(t, x) == doctest::Approx(dt).epsilon(1e-7));
    Vec3 grad;
    Vec3 grad_dt;
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      grad[a] = (chi.value(t, xp) - chi.value(t, xm)) / (2 * h);
      grad_dt[a] = (chi.time_derivative(t, xp) - chi.time_derivative(t, xm)) / (2 * h);
    }
    CHECK(max_abs(chi.gradient(t, x) - grad) < 1e-8);
    CHECK(max_abs(chi.gradient_of_time_derivative(t, x) - grad_dt) < 1e-8);
    const Vec3 dt_grad = (chi.gradient(t + h, x) - chi.gradient(t - h, x)) / (2 * h);
    CHECK(max_abs(chi.time_derivative_of_gradient(t, x) - dt_grad) < 1e-8);
    CHECK(max_abs(chi.curl_of_gradient(t, x)) < 1e-12);
  }
}

TEST_CASE("tabulated interpolation converges at second order") {
  PlaneWave w;
  w.wave_vector = Vec3(1.1, 0, 0);
  w.frequency = 0.7;
  w.amplitude = Vec3(0.5, 0, 0);
  w.scalar_amplitude = 0.3;
  const auto pot = Potential::plane_wave(1, w);
  std::vector<double> hs;
  std::vector<double> errs;
  for (int level = 0; level < 4; ++level) {
    const int n = 20 << level;
    const double h = 4.0 / n;
    std::vector<double> times;
    std::array<std::vector<double>, 3> axes;
    for (int i = 0; i <= n; ++i) {
      times.push_back(i * h);
      axes[0].push_back(-2.0 + i * h);
    }
    const auto tab = Potential::tabulated(sample_potential(pot, times, axes));
    double err = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 400; ++i) {
      const double t = 4.0 * u(rng);
      const Vec3 x(-2.0 + 4.0 * u(rng), 0, 0);
      const auto a = tab.evaluate(t, x);
      const auto b = pot.evaluate(t, x);
      err = std::max({err, std::abs(a.scalar - b.scalar), std::abs(a.vector[0] - b.vector[0])});
    }
    hs.push_back(h);
    errs.push_back(err);
  }
  CHECK(oracle::slope(hs, errs) >= 1.9);
}

TEST_CASE("tabulated queries outside the table are domain errors") {
  std::array<std::vector<double>, 3> axes{std::vector<double>{-1.0, 0.0, 1.0}, {}, {}};
  const auto tab = Potential::tabulated(
      sample_potential(Potential::constant_electric(1, Vec3(1, 0, 0)), {0.0, 1.0}, axes));
  CHECK(tab.evaluate(0.5, Vec3(0.5, 0, 0)).scalar == doctest::Approx(-0.5));
  try {
    (void)tab.evaluate(0.5, Vec3(1.5, 0, 0));
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain);
  }
  CHECK_THROWS_AS((void)tab.evaluate(2.0, Vec3::Zero()), Error);
}

TEST_CASE("CSV tables load with or without a header") {
  const auto with_header = temp_file("pot_header.csv",
                                     "t,x,A0,Ax\n"
                                     "0,-1,1,0\n0,1,-1,0\n1,-1,1,0.5\n1,1,-1,0.5\n");
  const auto table = load_potential_csv(with_header, 1);
  CHECK(table.times.size() == 2);
  CHECK(table.axes[0].size() == 2);
  const auto tab = Potential::tabulated(table);
  const auto v = tab.evaluate(0.5, Vec3(0.0, 0, 0));
  CHECK(v.scalar == doctest::Approx(0.0));
  CHECK(v.vector[0] == doctest::Approx(0.25));
  // A0 = -x: constant field 1
  CHECK(tab.fields(0.5, Vec3(0.2, 0, 0)).electric[0] == doctest::Approx(1.0 - 0.5));

  const auto shuffled = temp_file("pot_plain.csv", "1,1,-1,0.5\n0,-1,1,0\n1,-1,1,0.5\n0,1,-1,0\n");
  const auto t2 = load_potential_csv(shuffled, 1);
  CHECK(t2.values.size() == 4);

  const auto dup = temp_file("pot_dup.csv", "0,-1,1,0\n0,-1,1,0\n0,1,1,0\n1,1,1,0\n");
  CHECK_THROWS_AS((void)load_potential_csv(dup, 1), Error);
  const auto hole = temp_file("pot_hole.csv", "0,-1,1,0\n0,1,1,0\n1,1,1,0\n");
  CHECK_THROWS_AS((void)load_potential_csv(hole, 1), Error);
  const auto junk = temp_file("pot_junk.csv", "0,-1,1,0\n0,abc,1,0\n");
  CHECK_THROWS_AS((void)load_potential_csv(junk, 1), Error);
  try {
    (void)load_potential_csv("/nonexistent/table.csv", 1);
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}
