#include "dirac/em_potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace dirac {

std::string_view to_string(PotentialKind kind) noexcept {
  switch (kind) {
  case PotentialKind::zero: return "zero";
  case PotentialKind::uniform_scalar: return "uniform_scalar";
  case PotentialKind::constant_electric: return "constant_electric";
  case PotentialKind::constant_magnetic: return "constant_magnetic";
  case PotentialKind::plane_wave: return "plane_wave";
  case PotentialKind::gaussian_pulse: return "gaussian_pulse";
  case PotentialKind::tabulated: return "tabulated";
  case PotentialKind::gauge_transformed: return "gauge_transformed";
  }
  return "unknown";
}

namespace {

void check_dim(int d) {
  if (d != 1 && d != 3) fail(ErrorKind::structural, "potentials live in 1 or 3 spatial dimensions");
}

Vec3 active(const Vec3& v, int d) {
  Vec3 out = Vec3::Zero();
  for (int a = 0; a < d; ++a) out[a] = v[a];
  return out;
}

class ZeroModel final : public PotentialModel {
public:
  explicit ZeroModel(int d) : d_(d) {}
  FourPotential evaluate(double, const Vec3&) const override { return {}; }
  FieldStrength fields(double, const Vec3&) const override { return {}; }
  int spatial_dim() const noexcept override { return d_; }
  PotentialKind kind() const noexcept override { return PotentialKind::zero; }
  bool is_static() const noexcept override { return true; }
  bool is_zero() const noexcept override { return true; }

private:
  int d_;
};

class UniformScalarModel final : public PotentialModel {
public:
  UniformScalarModel(int d, double v) : d_(d), v_(v) {}
  FourPotential evaluate(double, const Vec3&) const override { return {v_, Vec3::Zero()}; }
  FieldStrength fields(double, const Vec3&) const override { return {}; }
  int spatial_dim() const noexcept override { return d_; }
  PotentialKind kind() const noexcept override { return PotentialKind::uniform_scalar; }
  bool is_static() const noexcept override { return true; }
  bool is_zero() const noexcept override { return v_ == 0.0; }

private:
  int d_;
  double v_;
};

class ConstantElectricModel final : public PotentialModel {
public:
  ConstantElectricModel(int d, const Vec3& e) : d_(d), e_(active(e, d)) {}
  FourPotential evaluate(double, const Vec3& x) const override {
    return {-e_.dot(active(x, d_)), Vec3::Zero()};
  }
  FieldStrength fields(double, const Vec3&) const override { return {e_, Vec3::Zero()}; }
  int spatial_dim() const noexcept override { return d_; }
  PotentialKind kind() const noexcept override { return PotentialKind::constant_electric; }
  bool is_static() const noexcept override { return true; }

private:
  int d_;
  Vec3 e_;
};

class ConstantMagneticModel final : public PotentialModel {
public:
  explicit ConstantMagneticModel(const Vec3& b) : b_(b) {}
  FourPotential evaluate(double, const Vec3& x) const override {
    return {0.0, 0.5 * b_.cross(x)};
  }
  FieldStrength fields(double, const Vec3&) const override { return {Vec3::Zero(), b_}; }
  int spatial_dim() const noexcept override { return 3; }
  PotentialKind kind() const noexcept override { return PotentialKind::constant_magnetic; }
  bool is_static() const noexcept override { return true; }

private:
  Vec3 b_;
};

class PlaneWaveModel final : public PotentialModel {
public:
  PlaneWaveModel(int d, const PlaneWave& w) : d_(d), w_(w) {
    w_.wave_vector = active(w.wave_vector, d);
    w_.amplitude = active(w.amplitude, d);
  }
  FourPotential evaluate(double t, const Vec3& x) const override {
    const double c = std::cos(theta(t, x));
    return {w_.scalar_amplitude * c, w_.amplitude * c};
  }
  FieldStrength fields(double t, const Vec3& x) const override {
    const double s = std::sin(theta(t, x));
    FieldStrength f;
    // -grad(a0 cos) = a0 k sin, -d/dt(a cos) = -a w sin
    f.electric = (w_.scalar_amplitude * w_.wave_vector - w_.frequency * w_.amplitude) * s;
    if (d_ == 3) f.magnetic = -w_.wave_vector.cross(w_.amplitude) * s;
    return f;
  }
  int spatial_dim() const noexcept override { return d_; }
  PotentialKind kind() const noexcept override { return PotentialKind::plane_wave; }
  bool is_static() const noexcept override { return w_.frequency == 0.0; }

private:
  double theta(double t, const Vec3& x) const {
    return w_.wave_vector.dot(active(x, d_)) - w_.frequency * t + w_.phase;
  }
  int d_;
  PlaneWave w_;
};

class GaussianPulseModel final : public PotentialModel {
public:
  GaussianPulseModel(int d, const GaussianPulse& p) : d_(d), p_(p) {
    p_.direction = active(p.direction, d);
    const double n = p_.direction.norm();
    if (n == 0.0) fail(ErrorKind::configuration, "pulse direction must be non-zero");
    p_.direction /= n;
    p_.amplitude = active(p.amplitude, d);
    if (!(p.width > 0.0)) fail(ErrorKind::configuration, "pulse width must be positive");
  }
  FourPotential evaluate(double t, const Vec3& x) const override {
    const double xi = phase_coordinate(t, x);
    return {0.0, p_.amplitude * profile(xi)};
  }
  FieldStrength fields(double t, const Vec3& x) const override {
    const double xi = phase_coordinate(t, x);
    const double fp = profile_derivative(xi);
    FieldStrength f;
    // d xi / dt = -1, grad xi = n
    f.electric = p_.amplitude * fp;
    if (d_ == 3) f.magnetic = p_.direction.cross(p_.amplitude) * fp;
    return f;
  }
  int spatial_dim() const noexcept override { return d_; }
  PotentialKind kind() const noexcept override { return PotentialKind::gaussian_pulse; }
  bool is_static() const noexcept override { return false; }

private:
  double phase_coordinate(double t, const Vec3& x) const {
    return p_.direction.dot(active(x, d_) - active(p_.center, d_)) - (t - p_.center_time);
  }
  double profile(double xi) const {
    return std::exp(-xi * xi / (2.0 * p_.width * p_.width)) * std::cos(p_.carrier * xi + p_.phase);
  }
  double profile_derivative(double xi) const {
    const double g = std::exp(-xi * xi / (2.0 * p_.width * p_.width));
    const double arg = p_.carrier * xi + p_.phase;
    return g * (-xi / (p_.width * p_.width) * std::cos(arg) - p_.carrier * std::sin(arg));
  }
  int d_;
  GaussianPulse p_;
};

class TabulatedModel final : public PotentialModel {
public:
  explicit TabulatedModel(PotentialTable table) : tab_(std::move(table)) {
    check_dim(tab_.spatial_dim);
    std::size_t expected = check_axis(tab_.times, "t");
    for (int a = 0; a < tab_.spatial_dim; ++a) expected *= check_axis(tab_.axes[a], "x");
    if (tab_.values.size() != expected)
      fail(ErrorKind::configuration, "tabulated potential is not a full tensor-product grid");
  }

  FourPotential evaluate(double t, const Vec3& x) const override {
    const int d = tab_.spatial_dim;
    std::array<std::size_t, 4> lo{};
    std::array<double, 4> frac{};
    std::array<std::size_t, 4> n{};
    locate(tab_.times, t, lo[0], frac[0], "t");
    n[0] = tab_.times.size();
    for (int a = 0; a < d; ++a) {
      locate(tab_.axes[a], x[a], lo[a + 1], frac[a + 1], "x");
      n[a + 1] = tab_.axes[a].size();
    }
    const int dims = d + 1;
    FourPotential out;
    for (int corner = 0; corner < (1 << dims); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (int k = 0; k < dims; ++k) {
        const bool up = (corner >> k) & 1;
        const std::size_t idx = std::min(lo[k] + (up ? 1 : 0), n[k] - 1);
        w *= up ? frac[k] : 1.0 - frac[k];
        flat = flat * n[k] + idx;
      }
      if (w == 0.0) continue;
      out.scalar += w * tab_.values[flat].scalar;
      out.vector += w * tab_.values[flat].vector;
    }
    return out;
  }

  FieldStrength fields(double t, const Vec3& x) const override {
    const int d = tab_.spatial_dim;
    FieldStrength f;
    // dA/dt
    const auto [tm, tp] = stencil(tab_.times, t);
    Vec3 dadt = Vec3::Zero();
    if (tp > tm) dadt = (evaluate(tp, x).vector - evaluate(tm, x).vector) / (tp - tm);
    // spatial derivatives, jac(i, a) = d A_i / d x_a
    Vec3 grad_a0 = Vec3::Zero();
    Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
    for (int a = 0; a < d; ++a) {
      const auto [xm, xp] = stencil(tab_.axes[a], x[a]);
      if (!(xp > xm)) continue;
      Vec3 lo = x, hi = x;
      lo[a] = xm;
      hi[a] = xp;
      const FourPotential pl = evaluate(t, lo);
      const FourPotential ph = evaluate(t, hi);
      grad_a0[a] = (ph.scalar - pl.scalar) / (xp - xm);
      jac.col(a) = (ph.vector - pl.vector) / (xp - xm);
    }
    f.electric = active(-grad_a0 - dadt, d);
    if (d == 3) {
      f.magnetic = {jac(2, 1) - jac(1, 2), jac(0, 2) - jac(2, 0), jac(1, 0) - jac(0, 1)};
    }
    return f;
  }

  int spatial_dim() const noexcept override { return tab_.spatial_dim; }
  PotentialKind kind() const noexcept override { return PotentialKind::tabulated; }
  bool is_static() const noexcept override { return tab_.times.size() == 1; }

private:
  static std::size_t check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.empty()) fail(ErrorKind::configuration, std::string("tabulated axis ") + name + " is empty");
    if (!std::is_sorted(axis.begin(), axis.end()) ||
        std::adjacent_find(axis.begin(), axis.end()) != axis.end())
      fail(ErrorKind::configuration, std::string("tabulated axis ") + name + " must be strictly increasing");
    return axis.size();
  }

  static double tolerance(const std::vector<double>& axis) {
    const double span = axis.size() > 1 ? axis.back() - axis.front() : 1.0;
    return 1e-12 * std::max(1.0, std::abs(span));
  }

  static void locate(const std::vector<double>& axis, double v, std::size_t& lo, double& frac,
                     const char* name) {
    if (axis.size() == 1) {
      lo = 0;
      frac = 0.0;
      return;
    }
    const double tol = tolerance(axis);
    if (v < axis.front() - tol || v > axis.back() + tol)
      fail(ErrorKind::domain, std::string("tabulated potential queried outside its ") + name + " range");
    v = std::clamp(v, axis.front(), axis.back());
    auto it = std::upper_bound(axis.begin(), axis.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - axis.begin());
    hi = std::clamp<std::size_t>(hi, 1, axis.size() - 1);
    lo = hi - 1;
    frac = (v - axis[lo]) / (axis[hi] - axis[lo]);
  }

  // Central difference points with h = mean node spacing, shifted inward at the edges.
  static std::pair<double, double> stencil(const std::vector<double>& axis, double v) {
    if (axis.size() == 1) return {v, v};
    const double h = (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1);
    double lo = v - h, hi = v + h;
    if (lo < axis.front()) {
      lo = axis.front();
      hi = std::min(axis.back(), lo + 2.0 * h);
    }
    if (hi > axis.back()) {
      hi = axis.back();
      lo = std::max(axis.front(), hi - 2.0 * h);
    }
    return {lo, hi};
  }

  PotentialTable tab_;
};

class GaugeTransformedModel final : public PotentialModel {
public:
  GaugeTransformedModel(Potential base, GaugeFunction chi) : base_(std::move(base)), chi_(std::move(chi)) {
    if (base_.spatial_dim() != chi_.spatial_dim())
      fail(ErrorKind::structural, "gauge function and potential disagree on dimension");
  }
  FourPotential evaluate(double t, const Vec3& x) const override {
    FourPotential p = base_.evaluate(t, x);
    p.scalar -= chi_.time_derivative(t, x);
    p.vector += active(chi_.gradient(t, x), spatial_dim());
    return p;
  }
  FieldStrength fields(double t, const Vec3& x) const override {
    FieldStrength f = base_.fields(t, x);
    // E' = E - grad(-chi_t) - d/dt(grad chi), B' = B + curl grad chi
    f.electric += active(chi_.gradient_of_time_derivative(t, x) - chi_.time_derivative_of_gradient(t, x),
                         spatial_dim());
    if (spatial_dim() == 3) f.magnetic += chi_.curl_of_gradient(t, x);
    return f;
  }
  int spatial_dim() const noexcept override { return base_.spatial_dim(); }
  PotentialKind kind() const noexcept override { return PotentialKind::gauge_transformed; }
  bool is_static() const noexcept override { return false; }

private:
  Potential base_;
  GaugeFunction chi_;
};

} // namespace

Potential::Potential(std::shared_ptr<const PotentialModel> model) : model_(std::move(model)) {
  if (!model_) fail(ErrorKind::configuration, "potential model is null");
}

Potential Potential::zero(int d) {
  check_dim(d);
  return Potential(std::make_shared<ZeroModel>(d));
}

Potential Potential::uniform_scalar(int d, double value) {
  check_dim(d);
  return Potential(std::make_shared<UniformScalarModel>(d, value));
}

Potential Potential::constant_electric(int d, const Vec3& field) {
  check_dim(d);
  return Potential(std::make_shared<ConstantElectricModel>(d, field));
}

Potential Potential::constant_magnetic(const Vec3& field) {
  return Potential(std::make_shared<ConstantMagneticModel>(field));
}

Potential Potential::plane_wave(int d, const PlaneWave& wave) {
  check_dim(d);
  return Potential(std::make_shared<PlaneWaveModel>(d, wave));
}

Potential Potential::gaussian_pulse(int d, const GaussianPulse& pulse) {
  check_dim(d);
  return Potential(std::make_shared<GaussianPulseModel>(d, pulse));
}

Potential Potential::tabulated(PotentialTable table) {
  return Potential(std::make_shared<TabulatedModel>(std::move(table)));
}

FourPotential Potential::evaluate(double t, const Vec3& x) const { return model_->evaluate(t, x); }
FieldStrength Potential::fields(double t, const Vec3& x) const { return model_->fields(t, x); }
int Potential::spatial_dim() const noexcept { return model_->spatial_dim(); }
PotentialKind Potential::kind() const noexcept { return model_->kind(); }
bool Potential::is_static() const noexcept { return model_->is_static(); }
bool Potential::is_zero() const noexcept { return model_->is_zero(); }

GaugeFunction::GaugeFunction(int spatial_dim, std::vector<Term> terms)
    : dim_(spatial_dim), terms_(std::move(terms)) {
  check_dim(dim_);
}

GaugeFunction::GaugeFunction(int spatial_dim, std::vector<Term> terms, const Vec3& center,
                             double width)
    : dim_(spatial_dim), terms_(std::move(terms)), envelope_(true), center_(center), width_(width) {
  check_dim(dim_);
  if (!(width > 0.0)) fail(ErrorKind::configuration, "gauge envelope width must be positive");
}

GaugeFunction GaugeFunction::constant(int d, double value) {
  return GaugeFunction(d, {Term{value, 0, {0, 0, 0}}});
}

GaugeFunction GaugeFunction::linear_electric(int d, const Vec3& field) {
  std::vector<Term> terms;
  for (int a = 0; a < d; ++a) {
    Term term{field[a], 1, {0, 0, 0}};
    term.x_powers[a] = 1;
    terms.push_back(term);
  }
  return GaugeFunction(d, std::move(terms));
}

namespace {

// d^k/du^k of u^n
double power_derivative(double u, int n, int k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (int i = 0; i < k; ++i) c *= n - i;
  return c * std::pow(u, n - k);
}

} // namespace

double GaugeFunction::partial(double t, const Vec3& x, int dt,
                              const std::array<int, 3>& dx) const {
  // orders over (t, x, y, z)
  const std::array<int, 4> alpha{dt, dx[0], dx[1], dx[2]};

  const auto poly = [&](const std::array<int, 4>& o) {
    double sum = 0.0;
    for (const auto& term : terms_) {
      double v = term.coefficient * power_derivative(t, term.t_power, o[0]);
      for (int a = 0; a < 3 && v != 0.0; ++a) {
        const double coord = a < dim_ ? x[a] : 0.0;
        v *= power_derivative(coord, term.x_powers[a], o[a + 1]);
      }
      sum += v;
    }
    return sum;
  };

  const auto gauss = [&](const std::array<int, 4>& o) {
    if (!envelope_) return (o[0] + o[1] + o[2] + o[3]) == 0 ? 1.0 : 0.0;
    if (o[0] != 0) return 0.0;
    double r2 = 0.0;
    Vec3 u = Vec3::Zero();
    for (int a = 0; a < dim_; ++a) {
      u[a] = x[a] - center_[a];
      r2 += u[a] * u[a];
    }
    const double w2 = width_ * width_;
    const double g = std::exp(-r2 / (2.0 * w2));
    std::array<int, 2> axes{-1, -1};
    int count = 0;
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k < o[a + 1]; ++k) axes[count++] = a;
    if (count == 0) return g;
    if (count == 1) return -u[axes[0]] / w2 * g;
    return (u[axes[0]] * u[axes[1]] / (w2 * w2) - (axes[0] == axes[1] ? 1.0 / w2 : 0.0)) * g;
  };

  // Leibniz rule over the multi-index
  double sum = 0.0;
  std::array<int, 4> beta{};
  for (beta[0] = 0; beta[0] <= alpha[0]; ++beta[0])
    for (beta[1] = 0; beta[1] <= alpha[1]; ++beta[1])
      for (beta[2] = 0; beta[2] <= alpha[2]; ++beta[2])
        for (beta[3] = 0; beta[3] <= alpha[3]; ++beta[3]) {
          double binom = 1.0;
          std::array<int, 4> rest{};
          for (int k = 0; k < 4; ++k) {
            rest[k] = alpha[k] - beta[k];
            binom *= (alpha[k] == 2 && beta[k] == 1) ? 2.0 : 1.0;
          }
          sum += binom * poly(beta) * gauss(rest);
        }
  return sum;
}

double GaugeFunction::value(double t, const Vec3& x) const { return partial(t, x, 0, {0, 0, 0}); }

double GaugeFunction::time_derivative(double t, const Vec3& x) const {
  return partial(t, x, 1, {0, 0, 0});
}

Vec3 GaugeFunction::gradient(double t, const Vec3& x) const {
  Vec3 g = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) {
    std::array<int, 3> o{0, 0, 0};
    o[a] = 1;
    g[a] = partial(t, x, 0, o);
  }
  return g;
}

Vec3 GaugeFunction::gradient_of_time_derivative(double t, const Vec3& x) const {
  Vec3 g = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) {
    std::array<int, 3> o{0, 0, 0};
    o[a] = 1;
    g[a] = partial(t, x, 1, o);
  }
  return g;
}

Vec3 GaugeFunction::time_derivative_of_gradient(double t, const Vec3& x) const {
  return gradient_of_time_derivative(t, x);
}

Vec3 GaugeFunction::curl_of_gradient(double t, const Vec3& x) const {
  if (dim_ != 3) return Vec3::Zero();
  const auto h = [&](int a, int b) {
    std::array<int, 3> o{0, 0, 0};
    o[a] += 1;
    o[b] += 1;
    return partial(t, x, 0, o);
  };
  return {h(2, 1) - h(1, 2), h(0, 2) - h(2, 0), h(1, 0) - h(0, 1)};
}

Potential gauge_transform(const Potential& potential, const GaugeFunction& chi) {
  return Potential(std::make_shared<GaugeTransformedModel>(potential, chi));
}

PotentialTable sample_potential(const Potential& potential, const std::vector<double>& times,
                                const std::array<std::vector<double>, 3>& axes) {
  PotentialTable table;
  table.spatial_dim = potential.spatial_dim();
  table.times = times;
  table.axes = axes;
  const int d = table.spatial_dim;
  std::array<std::size_t, 3> n{1, 1, 1};
  for (int a = 0; a < d; ++a) n[a] = axes[a].size();
  for (double t : times)
    for (std::size_t i = 0; i < n[0]; ++i)
      for (std::size_t j = 0; j < n[1]; ++j)
        for (std::size_t k = 0; k < n[2]; ++k) {
          Vec3 x = Vec3::Zero();
          x[0] = axes[0][i];
          if (d == 3) {
            x[1] = axes[1][j];
            x[2] = axes[2][k];
          }
          table.values.push_back(potential.evaluate(t, x));
        }
  return table;
}

PotentialTable load_potential_csv(const std::filesystem::path& path, int spatial_dim) {
  check_dim(spatial_dim);
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open potential table " + path.string());

  const std::size_t columns = 2 + 2 * static_cast<std::size_t>(spatial_dim);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue; // header
      fail(ErrorKind::io, path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (row.size() != columns)
      fail(ErrorKind::io, path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::io, "potential table " + path.string() + " has no rows");

  PotentialTable table;
  table.spatial_dim = spatial_dim;
  const auto unique_sorted = [&](std::size_t col) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r[col]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  table.times = unique_sorted(0);
  for (int a = 0; a < spatial_dim; ++a) table.axes[a] = unique_sorted(1 + a);

  std::array<std::size_t, 4> n{table.times.size(), 1, 1, 1};
  for (int a = 0; a < spatial_dim; ++a) n[a + 1] = table.axes[a].size();
  const std::size_t total = n[0] * n[1] * n[2] * n[3];
  if (rows.size() != total)
    fail(ErrorKind::io, "potential table " + path.string() + " is not a full tensor-product grid");

  table.values.assign(total, FourPotential{});
  std::vector<bool> seen(total, false);
  for (const auto& r : rows) {
    std::size_t flat = static_cast<std::size_t>(
        std::lower_bound(table.times.begin(), table.times.end(), r[0]) - table.times.begin());
    for (int a = 0; a < spatial_dim; ++a) {
      const auto& ax = table.axes[a];
      flat = flat * n[a + 1] +
             static_cast<std::size_t>(std::lower_bound(ax.begin(), ax.end(), r[1 + a]) - ax.begin());
    }
    if (seen[flat]) fail(ErrorKind::io, "potential table " + path.string() + " repeats a node");
    seen[flat] = true;
    FourPotential v;
    v.scalar = r[1 + spatial_dim];
    for (int a = 0; a < spatial_dim; ++a) v.vector[a] = r[2 + spatial_dim + a];
    table.values[flat] = v;
  }
  return table;
}

} // namespace dirac
