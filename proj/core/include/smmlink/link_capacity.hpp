#pragma once

// Thermal-noise model, SINR, zero-forcing precoding and achievable rates
// for the IM/DD mode-multiplexed link.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smmlink/channel.hpp"

namespace smmlink {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K

struct DetectorConfig {
    double responsivity = 0.7;          // A/W
    double feedback_resistance = 500.0; // ohm
    double noise_figure_db = 5.0;
    double temperature = 300.0;         // K
    double bandwidth = 10e9;            // Hz

    [[nodiscard]] double noise_figure() const;
    /// 4 k_b T F_n B, in A^2 ohm.
    [[nodiscard]] double thermal_noise() const;
    /// sigma_n^2 = 4 k_b T F_n B / R_f, in A^2.
    [[nodiscard]] double noise_variance() const;
    void validate() const;
};

struct PowerBudget {
    double total = 0.01;  // W

    [[nodiscard]] static PowerBudget from_dbm(double dbm);
    [[nodiscard]] double dbm() const;
    void validate() const;
};

[[nodiscard]] double dbm_to_watts(double dbm);
[[nodiscard]] double watts_to_dbm(double watts);

enum class Scheme { zfbf, no_zfbf };
[[nodiscard]] std::string to_string(Scheme s);
[[nodiscard]] Scheme scheme_from_string(const std::string& text);

struct CapacityReport {
    Scheme scheme = Scheme::no_zfbf;
    std::vector<double> rates;  // bit/s per sub-channel
    std::vector<double> sinr;   // SINR (no_zfbf) or SNR (zfbf) per sub-channel
    double aggregate = 0.0;     // bit/s
    double condition = 1.0;     // precoder pivot ratio, 1 without precoding
    double channel_power = 0.0; // W per sub-channel: xi_t / N or the ZFBF xi_un
};

/// B/2 log2(1 + snr e / (2 pi)).
[[nodiscard]] double rate_from_snr(double snr, double bandwidth);

/// Per-channel SINR under uniform allocation xi_t / N.
[[nodiscard]] std::vector<double> sinr_no_zfbf(const ComplexMatrix& H, const DetectorConfig& det,
                                               const PowerBudget& budget);

[[nodiscard]] CapacityReport capacity_no_zfbf(const ComplexMatrix& H, const DetectorConfig& det,
                                              const PowerBudget& budget);

struct Precoder {
    ComplexMatrix inverse;
    double condition = 1.0;  // largest over smallest pivot magnitude
};

/// Inverse of the estimated channel by Gauss-Jordan elimination with
/// partial pivoting.  Throws SingularChannel when the smallest pivot is
/// below 1e-12 of the largest.
[[nodiscard]] Precoder zfbf_precoder(const ComplexMatrix& H_est);

/// Per-channel power xi_un that keeps the mean transmitted power at xi_t.
[[nodiscard]] double zfbf_power_allocation(const ComplexMatrix& precoder, double total_power);

[[nodiscard]] CapacityReport capacity_zfbf(const ComplexMatrix& H, const ComplexMatrix& H_est,
                                           const DetectorConfig& det, const PowerBudget& budget);

[[nodiscard]] CapacityReport capacity(Scheme scheme, const ComplexMatrix& H,
                                      const ComplexMatrix& H_est, const DetectorConfig& det,
                                      const PowerBudget& budget);

/// Averages of a capacity-like quantity over misalignment realizations.
struct EnsembleStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t used = 0;
    std::size_t singular = 0;
};

/// Running mean and variance.  Realizations where ZFBF is infeasible
/// (SingularChannel or NegativeBudgetDenominator) are counted and excluded;
/// more than 10% of them raises FractionSingular.
class EnsembleAccumulator {
public:
    void add(double value);
    void add_singular() { ++singular_; }
    [[nodiscard]] EnsembleStats finish() const;

private:
    std::size_t count_ = 0;
    std::size_t singular_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

inline constexpr double kMaxSingularFraction = 0.10;

struct EnsembleConfig {
    BeamSource source;
    FiberSpec fiber;                  // supported modes; backprop radius from focal length
    double mode_field_radius = 0.0;   // w_a; the fiber radius follows from f = D when > 0
    std::vector<ModeIndex> mode_set;
    double diameter = 0.0;
    DetectorConfig detector;
    PowerBudget budget;
    QuadratureSpec quadrature;
    LaserPhaseModel phases = LaserPhaseModel::single_laser;
    bool mean_channel = false;  // capacity of the rms-averaged channel instead of mean capacity
};

/// Fiber whose back-propagated radius is lambda f / (pi w_a) with f = D.
[[nodiscard]] FiberSpec fiber_for_aperture(const EnsembleConfig& config, double diameter);

[[nodiscard]] EnsembleStats ensemble_capacity(Scheme scheme, const EnsembleConfig& config,
                                              const MisalignmentStats& stats,
                                              std::size_t realizations, std::uint64_t seed);

}  // namespace smmlink
