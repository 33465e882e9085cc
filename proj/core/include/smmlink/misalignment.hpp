#pragma once

// Transceiver vibration statistics: Rayleigh-distributed pointing
// displacement and angle-of-arrival tilt.

#include <cstdint>
#include <vector>

namespace smmlink {

struct MisalignmentStats {
    double sigma_orient = 0.0;  // rad, transmitter orientation per-axis sigma
    double sigma_aoa = 0.0;     // rad, receiver AOA per-axis sigma
    double distance = 0.0;      // m

    [[nodiscard]] double sigma_displacement() const { return distance * sigma_orient; }
    void validate() const;
};

enum class LaserPhaseModel { single_laser, independent_uniform };

struct Misalignment {
    double displacement = 0.0;  // d, m
    double tilt = 0.0;          // eps, rad
    std::vector<double> laser_phases;  // phi_i per transmitted mode, rad
};

/// n realizations with d = sigma_d sqrt(-2 ln U), eps likewise.  Laser
/// phases are zero for a single laser, uniform on [0, 2pi) otherwise.
[[nodiscard]] std::vector<Misalignment> sample_misalignment(
    const MisalignmentStats& stats, std::size_t n, std::uint64_t seed, std::size_t mode_count = 0,
    LaserPhaseModel phases = LaserPhaseModel::single_laser);

/// Realization i of the same stream sample_misalignment draws from.
[[nodiscard]] Misalignment misalignment_at(const MisalignmentStats& stats, std::uint64_t seed,
                                           std::size_t index, std::size_t mode_count = 0,
                                           LaserPhaseModel phases = LaserPhaseModel::single_laser);

/// Rayleigh CDF 1 - exp(-x^2 / (2 sigma^2)).
[[nodiscard]] double rayleigh_cdf(double x, double sigma);

/// Nodes and weights for E[f(X)], X ~ Rayleigh(sigma) truncated at
/// 5 sigma, by Gauss-Legendre in u = x^2 / (2 sigma^2) on [0, 12.5].
/// Weights sum to one.  sigma == 0 gives the single node {0, 1}.
struct RayleighRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
[[nodiscard]] RayleighRule rayleigh_rule(double sigma, int order);

}  // namespace smmlink
