// Serial scatter kernel vs OpenMP gather kernel for one Kraus map on a
// three-mode layout (ancilla, two signal modes) of growing cutoff.

#include <benchmark/benchmark.h>

#include "lossmetro/kernels.hpp"
#include "lossmetro/loss_channel.hpp"

namespace {

using namespace lossmetro;

struct Setup {
  ModeLayout layout;
  Matrix rho;
  kernels::LadderSet kraus;

  explicit Setup(int cutoff)
      : layout({ModeSpec::ancilla(cutoff), ModeSpec::signal(cutoff, 0), ModeSpec::signal(cutoff, 1)}),
        kraus(kraus_ladder(0.6, cutoff)) {
    const auto d = static_cast<Eigen::Index>(layout.dimension());
    Matrix a = Matrix::Random(d, d);
    rho = a * a.adjoint();
    rho /= rho.trace();
  }
};

void BM_Serial(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  const auto geom = kernels::ModeGeometry::of(s.layout, 1);
  Matrix out;
  for (auto _ : state) {
    kernels::apply_mode_map_serial(s.rho, out, geom, s.kraus, s.kraus);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["dim"] = static_cast<double>(s.layout.dimension());
}

void BM_OpenMP(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)));
  const auto geom = kernels::ModeGeometry::of(s.layout, 1);
  Matrix out;
  for (auto _ : state) {
    kernels::apply_mode_map_omp(s.rho, out, geom, s.kraus, s.kraus);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["dim"] = static_cast<double>(s.layout.dimension());
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(2)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->Arg(2)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
