#include "dirac/spinor_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dirac/fourier.hpp"
#include "dirac/free_propagator.hpp"

namespace dirac {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
  case ErrorKind::structural: return "structural";
  case ErrorKind::resolution: return "resolution";
  case ErrorKind::degenerate: return "degenerate";
  case ErrorKind::domain: return "domain";
  case ErrorKind::budget: return "budget";
  case ErrorKind::configuration: return "configuration";
  case ErrorKind::feasibility: return "feasibility";
  case ErrorKind::sampling: return "sampling";
  case ErrorKind::validation: return "validation";
  case ErrorKind::io: return "io";
  }
  return "unknown";
}

namespace {

CMatrix pauli(int which) {
  const cplx i{0.0, 1.0};
  CMatrix m = CMatrix::Zero(2, 2);
  switch (which) {
  case 1: m << 0.0, 1.0, 1.0, 0.0; break;
  case 2: m << 0.0, -i, i, 0.0; break;
  case 3: m << 1.0, 0.0, 0.0, -1.0; break;
  default: m.setIdentity();
  }
  return m;
}

CMatrix blocks(const CMatrix& a, const CMatrix& b, const CMatrix& c, const CMatrix& d) {
  CMatrix m(4, 4);
  m << a, b, c, d;
  return m;
}

int expected_spinor_dim(int spatial_dim) {
  if (spatial_dim == 1) return 2;
  if (spatial_dim == 3) return 4;
  fail(ErrorKind::structural,
       "spatial dimension " + std::to_string(spatial_dim) + " is not supported (use 1 or 3)");
}

} // namespace

Representation Representation::dirac(int spatial_dim) {
  if (spatial_dim == 1) return Representation(1, pauli(3), {pauli(1)}, "dirac");
  expected_spinor_dim(spatial_dim);
  const CMatrix z = CMatrix::Zero(2, 2);
  const CMatrix id = CMatrix::Identity(2, 2);
  std::vector<CMatrix> alpha;
  for (int k = 1; k <= 3; ++k) alpha.push_back(blocks(z, pauli(k), pauli(k), z));
  return Representation(3, blocks(id, z, z, -id), std::move(alpha), "dirac");
}

Representation Representation::chiral(int spatial_dim) {
  if (spatial_dim == 1) return Representation(1, pauli(1), {pauli(3)}, "chiral");
  expected_spinor_dim(spatial_dim);
  const CMatrix z = CMatrix::Zero(2, 2);
  const CMatrix id = CMatrix::Identity(2, 2);
  std::vector<CMatrix> alpha;
  for (int k = 1; k <= 3; ++k) alpha.push_back(blocks(-pauli(k), z, z, pauli(k)));
  return Representation(3, blocks(z, id, id, z), std::move(alpha), "chiral");
}

Representation::Representation(int spatial_dim, CMatrix beta, std::vector<CMatrix> alpha,
                               std::string name) {
  const int s = expected_spinor_dim(spatial_dim);
  if (beta.rows() != s || beta.cols() != s)
    fail(ErrorKind::structural, "beta must be " + std::to_string(s) + "x" + std::to_string(s));
  if (static_cast<int>(alpha.size()) != spatial_dim)
    fail(ErrorKind::structural, "need one alpha matrix per spatial axis");
  for (const auto& a : alpha)
    if (a.rows() != s || a.cols() != s)
      fail(ErrorKind::structural, "alpha matrices must match the spinor dimension");

  bool diagonal = true;
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c)
      if (r != c && beta(r, c) != cplx{}) diagonal = false;

  data_ = std::make_shared<const Data>(
      Data{spatial_dim, s, std::move(beta), std::move(alpha), std::move(name), diagonal});
}

CMatrix Representation::alpha_dot(const Vec3& v) const {
  CMatrix m = CMatrix::Zero(spinor_dim(), spinor_dim());
  for (int i = 0; i < spatial_dim(); ++i) m += v[i] * data_->alpha[i];
  return m;
}

bool operator==(const Representation& a, const Representation& b) {
  if (a.data_ == b.data_) return true;
  if (a.spatial_dim() != b.spatial_dim() || a.beta() != b.beta()) return false;
  for (int i = 0; i < a.spatial_dim(); ++i)
    if (a.alpha(i) != b.alpha(i)) return false;
  return true;
}

double clifford_residual(const Representation& rep) {
  const int s = rep.spinor_dim();
  const int d = rep.spatial_dim();
  if (s != expected_spinor_dim(d) || rep.beta().rows() != s || rep.beta().cols() != s)
    fail(ErrorKind::structural, "representation matrices do not match the spinor dimension");

  const CMatrix id = CMatrix::Identity(s, s);
  const auto maxabs = [](const CMatrix& m) { return m.cwiseAbs().maxCoeff(); };

  const CMatrix& beta = rep.beta();
  double r = std::max(maxabs(beta * beta - id), maxabs(beta - beta.adjoint()));
  for (int i = 0; i < d; ++i) {
    const CMatrix& ai = rep.alpha(i);
    r = std::max(r, maxabs(ai - ai.adjoint()));
    r = std::max(r, maxabs(ai * beta + beta * ai));
    for (int j = 0; j < d; ++j) {
      const CMatrix& aj = rep.alpha(j);
      r = std::max(r, maxabs(ai * aj + aj * ai - (i == j ? 2.0 : 0.0) * id));
    }
  }
  return r;
}

Grid::Grid(int spatial_dim, int points_per_axis, double spacing)
    : dim_(spatial_dim), n_(points_per_axis), dx_(spacing), size_(1) {
  if (spatial_dim != 1 && spatial_dim != 3)
    fail(ErrorKind::structural, "spatial_dim must be 1 or 3");
  if (points_per_axis < 8)
    fail(ErrorKind::configuration, "points_per_axis must be at least 8");
  if ((points_per_axis & (points_per_axis - 1)) != 0)
    fail(ErrorKind::configuration, "points_per_axis must be a power of two");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    fail(ErrorKind::configuration, "grid spacing must be positive");
  for (int a = 0; a < dim_; ++a) size_ *= static_cast<std::size_t>(n_);
}

double Grid::cell_volume() const noexcept { return std::pow(dx_, dim_); }

double Grid::wavenumber(int index) const noexcept {
  const int k = index <= n_ / 2 ? index : index - n_;
  return 2.0 * pi * k / extent();
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

Vec3 Grid::position(std::size_t flat) const noexcept {
  const auto idx = unflatten(flat);
  Vec3 x = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) x[a] = coordinate(idx[a]);
  return x;
}

Vec3 Grid::momentum(std::size_t flat) const noexcept {
  const auto idx = unflatten(flat);
  Vec3 p = Vec3::Zero();
  for (int a = 0; a < dim_; ++a) p[a] = wavenumber(idx[a]);
  return p;
}

std::size_t Grid::origin_index() const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + n_ / 2;
  return flat;
}

SpinorField::SpinorField(Grid grid, Representation rep)
    : grid_(grid), rep_(std::move(rep)),
      amplitudes_(grid_.size() * static_cast<std::size_t>(rep_.spinor_dim())) {
  if (rep_.spatial_dim() != grid_.spatial_dim())
    fail(ErrorKind::structural, "grid and representation disagree on spatial dimension");
}

SpinorField::SpinorField(Grid grid, Representation rep, std::vector<cplx> amplitudes)
    : grid_(grid), rep_(std::move(rep)), amplitudes_(std::move(amplitudes)) {
  if (rep_.spatial_dim() != grid_.spatial_dim())
    fail(ErrorKind::structural, "grid and representation disagree on spatial dimension");
  if (amplitudes_.size() != grid_.size() * static_cast<std::size_t>(rep_.spinor_dim()))
    fail(ErrorKind::structural, "amplitude array has the wrong length");
}

double SpinorField::norm_squared() const noexcept {
  double sum = 0.0;
  for (const auto& z : amplitudes_) sum += std::norm(z);
  return sum * grid_.cell_volume();
}

double SpinorField::norm() const noexcept { return std::sqrt(norm_squared()); }

SpinorField& SpinorField::operator+=(const SpinorField& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) amplitudes_[i] += other.amplitudes_[i];
  return *this;
}

SpinorField& SpinorField::operator-=(const SpinorField& other) {
  require_compatible(*this, other);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) amplitudes_[i] -= other.amplitudes_[i];
  return *this;
}

SpinorField& SpinorField::operator*=(cplx factor) noexcept {
  for (auto& z : amplitudes_) z *= factor;
  return *this;
}

void require_compatible(const SpinorField& a, const SpinorField& b) {
  if (!(a.grid() == b.grid()))
    fail(ErrorKind::structural, "fields live on different grids");
  if (!(a.rep() == b.rep()))
    fail(ErrorKind::structural, "fields use different representations");
}

cplx inner(const SpinorField& a, const SpinorField& b) {
  require_compatible(a, b);
  const auto x = a.data();
  const auto y = b.data();
  cplx sum{};
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::conj(x[i]) * y[i];
  return sum * a.grid().cell_volume();
}

SpinorField apply_spinor_matrix(const CMatrix& m, const SpinorField& psi) {
  const int s = psi.spinor_dim();
  if (m.rows() != s || m.cols() != s)
    fail(ErrorKind::structural, "spinor matrix does not match the field");
  SpinorField out(psi.grid(), psi.rep());
  auto in = psi.data();
  auto res = out.data();
  for (std::size_t p = 0; p < psi.grid().size(); ++p)
    for (int r = 0; r < s; ++r) {
      cplx acc{};
      for (int c = 0; c < s; ++c) acc += m(r, c) * in[p * s + c];
      res[p * s + r] = acc;
    }
  return out;
}

cplx expectation(const SpinorField& psi, const CMatrix& m) {
  return inner(psi, apply_spinor_matrix(m, psi));
}

double position_mean(const SpinorField& psi, int axis) {
  const int s = psi.spinor_dim();
  const auto& grid = psi.grid();
  const auto data = psi.data();
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double w = 0.0;
    for (int c = 0; c < s; ++c) w += std::norm(data[p * s + c]);
    sum += w * grid.coordinate(grid.unflatten(p)[axis]);
    weight += w;
  }
  return weight > 0.0 ? sum / weight : 0.0;
}

double position_spread(const SpinorField& psi, int axis) {
  const int s = psi.spinor_dim();
  const auto& grid = psi.grid();
  const auto data = psi.data();
  double w0 = 0.0, w1 = 0.0, w2 = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double w = 0.0;
    for (int c = 0; c < s; ++c) w += std::norm(data[p * s + c]);
    const double x = grid.coordinate(grid.unflatten(p)[axis]);
    w0 += w;
    w1 += w * x;
    w2 += w * x * x;
  }
  if (w0 <= 0.0) return 0.0;
  const double mean = w1 / w0;
  return std::sqrt(std::max(0.0, w2 / w0 - mean * mean));
}

CVector basis_spinor(const Representation& rep, int j) {
  if (j < 0 || j >= rep.spinor_dim()) fail(ErrorKind::structural, "spinor index out of range");
  CVector v = CVector::Zero(rep.spinor_dim());
  v[j] = 1.0;
  return v;
}

namespace {

double minimum_image(double d, double extent) {
  return d - extent * std::round(d / extent);
}

CVector normalized_spinor(const Representation& rep, const std::optional<CVector>& spinor) {
  CVector chi = spinor ? *spinor : basis_spinor(rep, 0);
  if (chi.size() != rep.spinor_dim())
    fail(ErrorKind::structural, "packet spinor has the wrong number of components");
  const double n = chi.norm();
  if (n <= 0.0) fail(ErrorKind::degenerate, "packet spinor is zero");
  return chi / n;
}

void normalize(SpinorField& psi) {
  const double n = psi.norm();
  if (n < 1e-10) fail(ErrorKind::degenerate, "field norm vanishes");
  psi *= 1.0 / n;
}

void project_branch(SpinorField& psi, EnergyBranch branch, double mass) {
  const auto& grid = psi.grid();
  const auto& rep = psi.rep();
  const int s = rep.spinor_dim();
  FourierTransform fft(grid, s);
  fft.forward(psi.data());
  auto data = psi.data();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec3 p = grid.momentum(k);
    CMatrix proj;
    if (dispersion(p, mass, grid.spatial_dim()) == 0.0) {
      // massless zero mode: split evenly between the branches
      proj = 0.5 * CMatrix::Identity(s, s);
    } else {
      auto pr = spectral_projectors(rep, p, mass);
      proj = branch == EnergyBranch::positive ? pr.positive : pr.negative;
    }
    Eigen::Map<CVector> v(data.data() + k * s, s);
    v = proj * CVector(v);
  }
  fft.backward(psi.data());
}

} // namespace

SpinorField gaussian_packet(const Grid& grid, const Representation& rep, const PacketSpec& spec) {
  if (rep.spatial_dim() != grid.spatial_dim())
    fail(ErrorKind::structural, "grid and representation disagree on spatial dimension");
  if (!(spec.width >= 3.0 * grid.spacing()))
    fail(ErrorKind::resolution, "packet width must be at least 3 grid spacings");
  for (int a = 0; a < grid.spatial_dim(); ++a)
    if (!(std::abs(spec.center[a]) + 5.0 * spec.width < grid.half_extent()))
      fail(ErrorKind::budget,
           "packet not inside the box: |x0| + 5 sigma must be below L/2 on every axis");

  const CVector chi = normalized_spinor(rep, spec.spinor);
  const int s = rep.spinor_dim();
  const int d = grid.spatial_dim();
  SpinorField psi(grid, rep);
  auto data = psi.data();
  const double inv4w2 = 1.0 / (4.0 * spec.width * spec.width);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 x = grid.position(p);
    double r2 = 0.0;
    double phase = 0.0;
    for (int a = 0; a < d; ++a) {
      const double dxa = minimum_image(x[a] - spec.center[a], grid.extent());
      r2 += dxa * dxa;
      phase += spec.momentum[a] * dxa;
    }
    const cplx envelope = std::exp(-r2 * inv4w2) * std::polar(1.0, phase);
    for (int c = 0; c < s; ++c) data[p * s + c] = envelope * chi[c];
  }
  normalize(psi);

  if (spec.branch != EnergyBranch::none) {
    project_branch(psi, spec.branch, spec.mass);
    if (psi.norm() < 1e-10)
      fail(ErrorKind::degenerate, "energy projection annihilated the packet");
    normalize(psi);
  }
  return psi;
}

SpinorField bump_source(const Grid& grid, const Representation& rep, const Vec3& center,
                        double half_width, std::optional<CVector> spinor) {
  if (!(half_width >= 3.0 * grid.spacing()))
    fail(ErrorKind::resolution, "bump half-width must be at least 3 grid spacings");
  for (int a = 0; a < grid.spatial_dim(); ++a)
    if (!(std::abs(center[a]) + half_width < grid.half_extent()))
      fail(ErrorKind::budget, "bump support leaves the box");

  const CVector chi = normalized_spinor(rep, spinor);
  const int s = rep.spinor_dim();
  SpinorField psi(grid, rep);
  auto data = psi.data();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 x = grid.position(p);
    double r2 = 0.0;
    for (int a = 0; a < grid.spatial_dim(); ++a) {
      const double dxa = x[a] - center[a];
      r2 += dxa * dxa;
    }
    const double u = r2 / (half_width * half_width);
    if (u >= 1.0) continue;
    const double bump = std::exp(1.0 - 1.0 / (1.0 - u));
    for (int c = 0; c < s; ++c) data[p * s + c] = bump * chi[c];
  }
  normalize(psi);
  return psi;
}

} // namespace dirac
