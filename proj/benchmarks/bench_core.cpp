// Microbenchmarks for the generator backends and the information engines.
// The argument is 2j, so dims run 2, 5, 11, 21.  Everything is built from
// the spin family so runs are deterministic.

#include <benchmark/benchmark.h>

#include "qfikit/h_operator.hpp"
#include "qfikit/operator_core.hpp"
#include "qfikit/qfi_engine.hpp"
#include "qfikit/spin_models.hpp"

using namespace qfikit;
using namespace qfikit::spin;

namespace {

SpinParams params_for(int twice_j) {
  return SpinParams{0.5 * twice_j, 1.1, 0.7, 0.9};
}

ExponentialState thermal_state(int twice_j, double beta) {
  const SpinOperators ops = collective_spin_operators(0.5 * twice_j);
  ComplexMatrix g = -beta * ops.jz.matrix();
  return ExponentialState::from_generator(HermitianOperator::symmetrized(g));
}

}  // namespace

static void BM_GeneratorSeries(benchmark::State& state) {
  const HamiltonianFamily fam =
      spin_hamiltonian_family(params_for(static_cast<int>(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(h_via_series(fam, "theta").h.matrix());
}
BENCHMARK(BM_GeneratorSeries)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_GeneratorQuadrature(benchmark::State& state) {
  const HamiltonianFamily fam =
      spin_hamiltonian_family(params_for(static_cast<int>(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(h_via_quadrature(fam, "theta").h.matrix());
}
BENCHMARK(BM_GeneratorQuadrature)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_GeneratorFiniteDifference(benchmark::State& state) {
  const HamiltonianFamily fam =
      spin_hamiltonian_family(params_for(static_cast<int>(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(h_via_finite_difference(fam, "theta").h.matrix());
}
BENCHMARK(BM_GeneratorFiniteDifference)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_GeneratorClosedForm(benchmark::State& state) {
  // Field-amplitude parameter: the commuting-structure detector fires and
  // the closed form applies.
  const HamiltonianFamily fam =
      spin_hamiltonian_family(params_for(static_cast<int>(state.range(0))));
  for (auto _ : state)
    benchmark::DoNotOptimize(h_closed_form(fam, "B")->h.matrix());
}
BENCHMARK(BM_GeneratorClosedForm)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_QfiMixed(benchmark::State& state) {
  const int twice_j = static_cast<int>(state.range(0));
  const DensityMatrix rho = thermal_state(twice_j, 1.0).density();
  const HermitianOperator h = collective_spin_operators(0.5 * twice_j).jy;
  for (auto _ : state) benchmark::DoNotOptimize(qfi_mixed(rho, h));
}
BENCHMARK(BM_QfiMixed)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_QfiExponential(benchmark::State& state) {
  const int twice_j = static_cast<int>(state.range(0));
  const ExponentialState es = thermal_state(twice_j, 1.0);
  const HermitianOperator h = collective_spin_operators(0.5 * twice_j).jy;
  for (auto _ : state) benchmark::DoNotOptimize(qfi_exponential(es, h));
}
BENCHMARK(BM_QfiExponential)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_SldSeriesOrder30(benchmark::State& state) {
  const int twice_j = static_cast<int>(state.range(0));
  const ExponentialState es = thermal_state(twice_j, 0.8);
  const HermitianOperator h = collective_spin_operators(0.5 * twice_j).jy;
  for (auto _ : state)
    benchmark::DoNotOptimize(sld_effective_exponential(es, h, 30).matrix());
}
BENCHMARK(BM_SldSeriesOrder30)->Arg(1)->Arg(4)->Arg(10)->Arg(20);

static void BM_ThermalSweepPoint(benchmark::State& state) {
  const ThermalQubit tq = thermal_qubit(1.0);
  SpinParams p{0.5, 2.2, 0.9, 1.0};
  for (auto _ : state)
    benchmark::DoNotOptimize(qfi_exponential(tq.state, h_analytic_theta(p)));
}
BENCHMARK(BM_ThermalSweepPoint);

BENCHMARK_MAIN();
