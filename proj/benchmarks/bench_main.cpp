#include <benchmark/benchmark.h>

#include "smmlink/channel.hpp"
#include "smmlink/config.hpp"
#include "smmlink/coupling.hpp"
#include "smmlink/link_capacity.hpp"
#include "smmlink/optimize.hpp"

using namespace smmlink;

namespace {

void BM_CouplingEfficiency(benchmark::State& state) {
    const LinkConfig c;
    const FiberSpec fiber = c.efficiency_fiber();
    const auto g = c.source().geometry({0, 1});
    const auto ap = ApertureSpec::make(2.0 * 1.33 * fiber.backprop_radius, 0.0, fiber, g);
    for (auto _ : state)
        benchmark::DoNotOptimize(coupling_efficiency(g, {0, 1}, fiber, ap, 1.25e-3, 0.125e-3, c.quadrature));
}
BENCHMARK(BM_CouplingEfficiency)->Unit(benchmark::kMillisecond);

// One misalignment realization of the six-mode channel.
void BM_ChannelSample(benchmark::State& state) {
    const LinkConfig c;
    const double diameter = 12e-3;
    const auto modes = first_oam_modes(6);
    const auto ens = c.ensemble(modes, diameter);
    const FiberSpec fiber = fiber_for_aperture(ens, diameter);
    const ChannelSampler sampler(ens.source, modes, fiber, matching_fiber_modes(modes, fiber), diameter,
                                 ens.quadrature);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.couplings(1.25e-3, 0.125e-3));
}
BENCHMARK(BM_ChannelSample)->Unit(benchmark::kMillisecond);

void BM_ExpectedEfficiency(benchmark::State& state) {
    const LinkConfig c;
    const FiberSpec fiber = c.efficiency_fiber();
    const auto g = c.source().geometry({0, 0});
    const auto& modes = fiber.supported_modes;
    for (auto _ : state)
        benchmark::DoNotOptimize(expected_efficiency(g, fiber, modes, 2.0 * 0.77 * fiber.backprop_radius,
                                                     c.misalignment(), c.expectation(), c.quadrature));
}
BENCHMARK(BM_ExpectedEfficiency)->Unit(benchmark::kMillisecond);

void BM_ZfbfCapacity(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    ComplexMatrix H(n, n);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) H(k, i) = k == i ? 0.6 : 0.05 * std::polar(1.0, 0.7 * k + 1.3 * i);
    const auto est = estimate_channel(H);
    const DetectorConfig det;
    const PowerBudget budget;
    for (auto _ : state) benchmark::DoNotOptimize(capacity_zfbf(H, est, det, budget));
}
BENCHMARK(BM_ZfbfCapacity)->DenseRange(2, 6, 2);

}  // namespace

BENCHMARK_MAIN();
