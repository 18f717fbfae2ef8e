#pragma once

#include <memory>
#include <span>

#include "dirac/spinor_core.hpp"

namespace dirac {

/// In-place FFTW transforms of interleaved spinor arrays on a Grid.
///
/// forward() is the unnormalised DFT over grid indices; backward() includes
/// the 1/N^d factor so backward(forward(x)) == x. Plans use FFTW_ESTIMATE so
/// the arithmetic is reproducible run to run. Copies share the plans.
class FourierTransform {
public:
  FourierTransform(const Grid& grid, int components);

  void forward(std::span<cplx> data) const;
  void backward(std::span<cplx> data) const;

  [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
  [[nodiscard]] int components() const noexcept { return components_; }

private:
  struct Plans;
  Grid grid_;
  int components_;
  std::shared_ptr<const Plans> plans_;
};

/// 1D complex transform of arbitrary length (time series analysis).
void fft_1d(std::span<cplx> data, bool inverse = false);

} // namespace dirac
