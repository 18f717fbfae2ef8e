#include <benchmark/benchmark.h>

#include "dirac/foldy_wouthuysen.hpp"
#include "dirac/interacting_evolution.hpp"
#include "dirac/path_sum_oracle.hpp"

using namespace dirac;

namespace {

SpinorField packet(const Grid& g, const Representation& rep) {
  PacketSpec spec;
  spec.width = g.spacing() * (g.spatial_dim() == 1 ? 16.0 : 3.0);
  spec.momentum = Vec3(1.0, 0.0, 0.0);
  return gaussian_packet(g, rep, spec);
}

Grid grid_for(int d, int n) { return Grid(d, n, d == 1 ? 0.05 : 0.25); }

void BM_FreeStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Grid g = grid_for(d, static_cast<int>(state.range(1)));
  const auto rep = Representation::dirac(d);
  const FreePropagator step(g, rep, 1.0, 0.01);
  SpinorField psi = packet(g, rep);
  for (auto _ : state) {
    step.apply(psi);
    benchmark::DoNotOptimize(psi.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_FreeStep)->Args({1, 512})->Args({1, 4096})->Args({3, 32});

void BM_StrangStep(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Grid g = grid_for(d, static_cast<int>(state.range(1)));
  const auto rep = Representation::dirac(d);
  PlaneWave w;
  w.wave_vector = Vec3(0.8, 0.0, 0.0);
  w.frequency = 0.8;
  w.amplitude = Vec3(0.0, 0.5, 0.0);
  if (d == 1) w.amplitude = Vec3(0.5, 0.0, 0.0);
  w.scalar_amplitude = 0.3;
  const bool timed = state.range(2) != 0;
  const Potential pot = timed ? Potential::plane_wave(d, w)
                              : Potential::constant_electric(d, Vec3(0.5, 0.0, 0.0));
  const InteractingStepper stepper(g, rep, pot, 1.0, 1.0, {SplitVariant::strang, 0.01});
  SpinorField psi = packet(g, rep);
  double t = 0.0;
  for (auto _ : state) {
    stepper.step(psi, t);
    t += 0.01;
    benchmark::DoNotOptimize(psi.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_StrangStep)
    ->Args({1, 512, 0})
    ->Args({1, 512, 1})
    ->Args({1, 4096, 1})
    ->Args({3, 32, 0})
    ->Args({3, 32, 1});

void BM_BuildTransfer(benchmark::State& state) {
  const Grid g(1, static_cast<int>(state.range(0)), 0.1);
  const auto rep = Representation::dirac(1);
  for (auto _ : state) benchmark::DoNotOptimize(build_transfer(g, rep, 1.0, 0.01).data());
}
BENCHMARK(BM_BuildTransfer)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_FwConjugation(benchmark::State& state) {
  const Grid g(1, static_cast<int>(state.range(0)), 0.05);
  const auto rep = Representation::dirac(1);
  for (auto _ : state) benchmark::DoNotOptimize(fw_conjugation_check(g, rep, 1.0, 1.0));
}
BENCHMARK(BM_FwConjugation)->Arg(1024);

} // namespace
BENCHMARK_MAIN();
