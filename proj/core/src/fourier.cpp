#include "dirac/fourier.hpp"

#include <mutex>
#include <vector>

#include <fftw3.h>

namespace dirac {

namespace {

// The FFTW planner is not re-entrant; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

} // namespace

struct FourierTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  double scale = 1.0;

  Plans(const Grid& grid, int components) {
    const int d = grid.spatial_dim();
    std::vector<int> n(d, grid.points_per_axis());
    std::vector<cplx> scratch(grid.size() * components);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_many_dft(d, n.data(), components, as_fftw(scratch.data()), nullptr,
                                 components, 1, as_fftw(scratch.data()), nullptr, components, 1,
                                 FFTW_FORWARD, flags);
    backward = fftw_plan_many_dft(d, n.data(), components, as_fftw(scratch.data()), nullptr,
                                  components, 1, as_fftw(scratch.data()), nullptr, components, 1,
                                  FFTW_BACKWARD, flags);
    scale = 1.0 / static_cast<double>(grid.size());
  }

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

FourierTransform::FourierTransform(const Grid& grid, int components)
    : grid_(grid), components_(components),
      plans_(std::make_shared<const Plans>(grid, components)) {}

void FourierTransform::forward(std::span<cplx> data) const {
  if (data.size() != grid_.size() * components_)
    fail(ErrorKind::structural, "transform buffer has the wrong length");
  fftw_execute_dft(plans_->forward, as_fftw(data.data()), as_fftw(data.data()));
}

void FourierTransform::backward(std::span<cplx> data) const {
  if (data.size() != grid_.size() * components_)
    fail(ErrorKind::structural, "transform buffer has the wrong length");
  fftw_execute_dft(plans_->backward, as_fftw(data.data()), as_fftw(data.data()));
  for (auto& z : data) z *= plans_->scale;
}

void fft_1d(std::span<cplx> data, bool inverse) {
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), as_fftw(data.data()),
                            as_fftw(data.data()), inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                            FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plan);
}

} // namespace dirac
