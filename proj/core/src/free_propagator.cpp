#include "dirac/free_propagator.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace dirac {

double dispersion(const Vec3& p, double mass, int spatial_dim) {
  double p2 = 0.0;
  for (int a = 0; a < spatial_dim; ++a) p2 += p[a] * p[a];
  return std::sqrt(p2 + mass * mass);
}

CMatrix hamiltonian(const Representation& rep, const Vec3& p, double mass) {
  return rep.alpha_dot(p) + mass * rep.beta();
}

CMatrix step_unitary(const Representation& rep, const Vec3& p, double mass, double dt) {
  const int s = rep.spinor_dim();
  const CMatrix h = hamiltonian(rep, p, mass);
  const double energy = dispersion(p, mass, rep.spatial_dim());
  const double x = energy * dt;
  double c, sin_over_e;
  if (std::abs(x) < 1e-6) {
    c = 1.0 - 0.5 * x * x;
    sin_over_e = dt * (1.0 - x * x / 6.0);
  } else {
    c = std::cos(x);
    sin_over_e = std::sin(x) / energy;
  }
  return c * CMatrix::Identity(s, s) - cplx{0.0, sin_over_e} * h;
}

SpectralProjectors spectral_projectors(const Representation& rep, const Vec3& p, double mass) {
  const double energy = dispersion(p, mass, rep.spatial_dim());
  if (energy == 0.0)
    fail(ErrorKind::degenerate, "spectral projectors undefined for the massless zero mode");
  const int s = rep.spinor_dim();
  const CMatrix h = hamiltonian(rep, p, mass);
  const CMatrix e = energy * CMatrix::Identity(s, s);
  return {(e + h) / (2.0 * energy), (e - h) / (2.0 * energy)};
}

ModeTable::ModeTable(const Grid& grid, int spinor_dim)
    : modes_(grid.size()), s_(spinor_dim),
      entries_(modes_ * static_cast<std::size_t>(spinor_dim * spinor_dim)) {}

ModeTable ModeTable::free_evolution(const Grid& grid, const Representation& rep, double mass,
                                    double dt) {
  ModeTable table(grid, rep.spinor_dim());
  for (std::size_t k = 0; k < grid.size(); ++k)
    table.set_block(k, step_unitary(rep, grid.momentum(k), mass, dt));
  return table;
}

ModeTable ModeTable::free_hamiltonian(const Grid& grid, const Representation& rep, double mass) {
  ModeTable table(grid, rep.spinor_dim());
  for (std::size_t k = 0; k < grid.size(); ++k)
    table.set_block(k, hamiltonian(rep, grid.momentum(k), mass));
  return table;
}

void ModeTable::set_block(std::size_t mode, const CMatrix& m) {
  auto b = block(mode);
  for (int r = 0; r < s_; ++r)
    for (int c = 0; c < s_; ++c) b[r * s_ + c] = m(r, c);
}

CMatrix ModeTable::matrix(std::size_t mode) const {
  CMatrix m(s_, s_);
  auto b = block(mode);
  for (int r = 0; r < s_; ++r)
    for (int c = 0; c < s_; ++c) m(r, c) = b[r * s_ + c];
  return m;
}

void ModeTable::apply(std::span<cplx> spectrum) const {
  if (spectrum.size() != modes_ * s_)
    fail(ErrorKind::structural, "spectrum length does not match the mode table");
  cplx tmp[4];
  for (std::size_t k = 0; k < modes_; ++k) {
    const cplx* b = entries_.data() + k * s_ * s_;
    cplx* v = spectrum.data() + k * s_;
    for (int r = 0; r < s_; ++r) {
      cplx acc{};
      for (int c = 0; c < s_; ++c) acc += b[r * s_ + c] * v[c];
      tmp[r] = acc;
    }
    for (int r = 0; r < s_; ++r) v[r] = tmp[r];
  }
}

FreePropagator::FreePropagator(const Grid& grid, const Representation& rep, double mass,
                               double dt)
    : mass_(mass), dt_(dt), fft_(grid, rep.spinor_dim()),
      table_(ModeTable::free_evolution(grid, rep, mass, dt)) {}

void FreePropagator::apply(SpinorField& psi) const {
  if (!(psi.grid() == fft_.grid()) || psi.spinor_dim() != table_.spinor_dim())
    fail(ErrorKind::structural, "field does not match the propagator grid");
  fft_.forward(psi.data());
  table_.apply(psi.data());
  fft_.backward(psi.data());
}

SpinorField free_step(const SpinorField& psi, double dt, double mass) {
  return FreePropagator(psi.grid(), psi.rep(), mass, dt)(psi);
}

SpinorField apply_mode_table(const SpinorField& psi, const ModeTable& table) {
  FourierTransform fft(psi.grid(), psi.spinor_dim());
  SpinorField out = psi;
  fft.forward(out.data());
  table.apply(out.data());
  fft.backward(out.data());
  return out;
}

SpinorField apply_free_hamiltonian(const SpinorField& psi, double mass) {
  return apply_mode_table(psi, ModeTable::free_hamiltonian(psi.grid(), psi.rep(), mass));
}

namespace {

// exp(-i p.x_j) relative to FFTW's exp(-2 pi i k j / N): (-1)^k per axis.
double origin_sign(const Grid& grid, std::size_t mode) {
  const auto idx = grid.unflatten(mode);
  int parity = 0;
  for (int a = 0; a < grid.spatial_dim(); ++a) parity += idx[a];
  return (parity & 1) ? -1.0 : 1.0;
}

} // namespace

KernelField kernel_from_symbol(const Grid& grid, const Representation& rep, double time,
                               double mass, const ModeTable& symbol) {
  const int s = rep.spinor_dim();
  const double inv_vol = 1.0 / grid.cell_volume();
  FourierTransform fft(grid, s);
  std::vector<SpinorField> cols;
  for (int j = 0; j < s; ++j) {
    SpinorField col(grid, rep);
    auto data = col.data();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double f = origin_sign(grid, k) * inv_vol;
      auto b = symbol.block(k);
      for (int i = 0; i < s; ++i) data[k * s + i] = f * b[i * s + j];
    }
    fft.backward(col.data());
    cols.push_back(std::move(col));
  }
  return KernelField(grid, rep, time, mass, std::move(cols));
}

KernelField::KernelField(Grid grid, Representation rep, double time, double mass,
                         std::vector<SpinorField> columns)
    : grid_(grid), rep_(std::move(rep)), time_(time), mass_(mass), columns_(std::move(columns)) {
  if (static_cast<int>(columns_.size()) != rep_.spinor_dim())
    fail(ErrorKind::structural, "kernel needs one column per spinor component");
  for (const auto& c : columns_)
    if (!(c.grid() == grid_) || !(c.rep() == rep_))
      fail(ErrorKind::structural, "kernel columns must share grid and representation");
}

ModeTable KernelField::symbol() const {
  const int s = spinor_dim();
  const double vol = grid_.cell_volume();
  FourierTransform fft(grid_, s);
  ModeTable table(grid_, s);
  for (int j = 0; j < s; ++j) {
    SpinorField spec = columns_[j];
    fft.forward(spec.data());
    auto data = spec.data();
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      const double f = origin_sign(grid_, k) * vol;
      auto b = table.block(k);
      for (int i = 0; i < s; ++i) b[i * s + j] = f * data[k * s + i];
    }
  }
  return table;
}

SpinorField KernelField::convolve(const SpinorField& phi) const {
  if (!(phi.grid() == grid_) || !(phi.rep() == rep_))
    fail(ErrorKind::structural, "field does not match the kernel");
  return apply_mode_table(phi, symbol());
}

SpinorField delta_source(const Grid& grid, const Representation& rep, int component) {
  SpinorField psi(grid, rep);
  psi.at(grid.origin_index(), component) = 1.0 / grid.cell_volume();
  return psi;
}

KernelField free_kernel(const Grid& grid, const Representation& rep, double t, double mass) {
  if (t < 0.0) fail(ErrorKind::domain, "free kernel is retarded: t must be non-negative");
  std::vector<SpinorField> cols;
  for (int j = 0; j < rep.spinor_dim(); ++j) cols.push_back(delta_source(grid, rep, j));
  if (t > 0.0) {
    const FreePropagator prop(grid, rep, mass, t);
    for (auto& c : cols) prop.apply(c);
  }
  return KernelField(grid, rep, t, mass, std::move(cols));
}

KernelField compose(const KernelField& later, const KernelField& earlier) {
  if (!(later.grid() == earlier.grid()) || !(later.rep() == earlier.rep()))
    fail(ErrorKind::structural, "kernels live on different grids");
  const ModeTable a = later.symbol();
  const ModeTable b = earlier.symbol();
  ModeTable product(later.grid(), later.spinor_dim());
  for (std::size_t k = 0; k < product.modes(); ++k)
    product.set_block(k, a.matrix(k) * b.matrix(k));
  return kernel_from_symbol(later.grid(), later.rep(), later.time() + earlier.time(), later.mass(),
                     product);
}

double max_difference(const KernelField& a, const KernelField& b) {
  if (!(a.grid() == b.grid()) || a.spinor_dim() != b.spinor_dim())
    fail(ErrorKind::structural, "kernels live on different grids");
  double m = 0.0;
  for (int j = 0; j < a.spinor_dim(); ++j) {
    auto x = a.column(j).data();
    auto y = b.column(j).data();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  }
  return m;
}

namespace {

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8))
    fail(ErrorKind::io, "kernel dump truncated");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

} // namespace

void write_kernel(std::ostream& out, const KernelField& kernel) {
  const auto& g = kernel.grid();
  char header[160];
  std::snprintf(header, sizeof header, "DKF1 %d %d %.17g %.17g %.17g\n", g.spatial_dim(),
                g.points_per_axis(), g.spacing(), kernel.time(), kernel.mass());
  out << header;
  for (const auto& col : kernel.columns())
    for (const auto& z : col.data()) {
      put_le(out, z.real());
      put_le(out, z.imag());
    }
  if (!out) fail(ErrorKind::io, "failed writing kernel dump");
}

KernelField read_kernel(std::istream& in, const Representation& rep) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::io, "kernel dump is empty");
  std::istringstream hs(line);
  std::string magic;
  int d = 0, n = 0;
  double dx = 0.0, t = 0.0, m = 0.0;
  if (!(hs >> magic >> d >> n >> dx >> t >> m) || magic != "DKF1")
    fail(ErrorKind::io, "kernel dump header must read 'DKF1 d N dx t m'");
  if (d != rep.spatial_dim())
    fail(ErrorKind::structural, "kernel dump dimension does not match the representation");
  const Grid grid(d, n, dx);
  std::vector<SpinorField> cols;
  for (int j = 0; j < rep.spinor_dim(); ++j) {
    SpinorField col(grid, rep);
    for (auto& z : col.data()) {
      const double re = get_le(in);
      const double im = get_le(in);
      z = {re, im};
    }
    cols.push_back(std::move(col));
  }
  return KernelField(grid, rep, t, m, std::move(cols));
}

} // namespace dirac
