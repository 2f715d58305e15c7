#include <benchmark/benchmark.h>

#include "platelab/duffing.hpp"
#include "platelab/equilibria.hpp"
#include "platelab/quartic.hpp"
#include "platelab/unimodal.hpp"

using namespace platelab;

namespace {

const SpectrumTable& table() {
  static const SpectrumTable t = find_spectrum(PlateParams{}, 3, 2);
  return t;
}

std::vector<ModeKey> six() {
  std::vector<ModeKey> k;
  for (int m = 1; m <= 3; ++m) {
    k.push_back({m, Parity::even, 1});
    k.push_back({m, Parity::odd, 1});
  }
  return k;
}

}  // namespace

static void BM_FindSpectrum(benchmark::State& st) {
  const int m_max = int(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(find_spectrum(PlateParams{}, m_max, 2));
}
BENCHMARK(BM_FindSpectrum)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_ModalRhs(benchmark::State& st) {
  PlateParams p;
  p.k = 1;
  p.alpha = -300;
  const ModalSystem sys(p, table(), six());
  ode::State y(12, 0.1), dy(12);
  for (auto _ : st) {
    sys.rhs(y, dy);
    benchmark::DoNotOptimize(dy.data());
  }
}
BENCHMARK(BM_ModalRhs);

static void BM_Integrate(benchmark::State& st) {
  PlateParams p;
  p.k = 1;
  p.alpha = -300;
  TruncationSpec tr;
  tr.keys = six();
  ModalState s;
  s.h = Eigen::VectorXd::Constant(6, 0.2);
  s.hdot = Eigen::VectorXd::Zero(6);
  for (auto _ : st) benchmark::DoNotOptimize(integrate(s, 0, 10, tr, p, table()));
}
BENCHMARK(BM_Integrate)->Unit(benchmark::kMillisecond);

static void BM_QuarticRoots(benchmark::State& st) {
  double a = -10;
  for (auto _ : st) {
    benchmark::DoNotOptimize(quartic_roots(1, 1.0, a));
    a -= 1e-9;
  }
}
BENCHMARK(BM_QuarticRoots);

static void BM_BoundaryDeterminant(benchmark::State& st) {
  const PlateParams p;
  for (auto _ : st) benchmark::DoNotOptimize(boundary_determinant_D(1, 2.0, -400, p));
}
BENCHMARK(BM_BoundaryDeterminant);

static void BM_BuildUnimodal(benchmark::State& st) {
  const PlateParams p;
  for (auto _ : st) benchmark::DoNotOptimize(build_unimodal(1, -400, p));
}
BENCHMARK(BM_BuildUnimodal)->Unit(benchmark::kMillisecond);

static void BM_TraceBranch(benchmark::State& st) {
  const PlateParams p;
  for (auto _ : st) benchmark::DoNotOptimize(trace_branch(int(st.range(0)), 0.01, 100, p));
}
BENCHMARK(BM_TraceBranch)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_Duffing(benchmark::State& st) {
  const DuffingParams d{1, 1.0, 0.684};
  for (auto _ : st) benchmark::DoNotOptimize(integrate_duffing(d, 0.5, 0.0, 200));
}
BENCHMARK(BM_Duffing)->Unit(benchmark::kMillisecond);

static void BM_NewtonEquilibria(benchmark::State& st) {
  PlateParams p;
  p.alpha = -300;
  TruncationSpec tr;
  tr.keys = six();
  NewtonOptions o;
  o.n_starts = 20;
  o.threads = 1;
  for (auto _ : st) benchmark::DoNotOptimize(newton_equilibria(p, table(), tr, o));
}
BENCHMARK(BM_NewtonEquilibria)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
