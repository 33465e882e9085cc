#include "smmlink/misalignment.hpp"

#include <cmath>
#include <numbers>

#include "smmlink/errors.hpp"
#include "smmlink/quadrature.hpp"
#include "smmlink/random.hpp"

namespace smmlink {

namespace {

constexpr double kTruncationSigmas = 5.0;

// Counter layout inside a realization's substream.
constexpr std::uint64_t kDisplacementCounter = 0;
constexpr std::uint64_t kTiltCounter = 1;
constexpr std::uint64_t kPhaseCounterBase = 16;

}  // namespace

void MisalignmentStats::validate() const {
    if (!(sigma_orient >= 0.0) || !std::isfinite(sigma_orient))
        throw ValidationError("misalignment.sigma_orient", "must be finite and >= 0");
    if (!(sigma_aoa >= 0.0) || !std::isfinite(sigma_aoa))
        throw ValidationError("misalignment.sigma_aoa", "must be finite and >= 0");
    if (!(distance >= 0.0) || !std::isfinite(distance))
        throw ValidationError("link.distance", "must be finite and >= 0");
}

Misalignment misalignment_at(const MisalignmentStats& stats, std::uint64_t seed, std::size_t index,
                             std::size_t mode_count, LaserPhaseModel phases) {
    const CounterStream stream = CounterStream(seed, 0x4D49534CULL).substream(index);
    Misalignment m;
    m.displacement = stream.rayleigh(kDisplacementCounter, stats.sigma_displacement());
    m.tilt = stream.rayleigh(kTiltCounter, stats.sigma_aoa);
    m.laser_phases.assign(mode_count, 0.0);
    if (phases == LaserPhaseModel::independent_uniform) {
        for (std::size_t i = 0; i < mode_count; ++i)
            m.laser_phases[i] = 2.0 * std::numbers::pi * stream.uniform(kPhaseCounterBase + i);
    }
    return m;
}

std::vector<Misalignment> sample_misalignment(const MisalignmentStats& stats, std::size_t n,
                                              std::uint64_t seed, std::size_t mode_count,
                                              LaserPhaseModel phases) {
    stats.validate();
    if (n < 1) throw ValidationError("n", "sample count must be >= 1");
    std::vector<Misalignment> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(misalignment_at(stats, seed, i, mode_count, phases));
    return out;
}

double rayleigh_cdf(double x, double sigma) {
    if (x <= 0.0) return 0.0;
    if (sigma == 0.0) return 1.0;
    return -std::expm1(-x * x / (2.0 * sigma * sigma));
}

RayleighRule rayleigh_rule(double sigma, int order) {
    if (!(sigma >= 0.0)) throw ValidationError("sigma", "must be >= 0");
    RayleighRule rule;
    if (sigma == 0.0) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }
    const double u_max = 0.5 * kTruncationSigmas * kTruncationSigmas;
    const auto& gl = gauss_legendre_cached(order);
    double total = 0.0;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        const double u = 0.5 * u_max * (gl.nodes[i] + 1.0);
        rule.nodes[i] = sigma * std::sqrt(2.0 * u);
        rule.weights[i] = 0.5 * u_max * gl.weights[i] * std::exp(-u);
        total += rule.weights[i];
    }
    for (auto& w : rule.weights) w /= total;
    return rule;
}

}  // namespace smmlink
