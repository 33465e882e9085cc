#pragma once

// Link configuration: a sectioned key = value file with units spelled out in
// every key.  Values are held in the units of their keys so that writing a
// configuration and reading it back is exact; SI views are derived on demand.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "smmlink/beam_math.hpp"
#include "smmlink/coupling.hpp"
#include "smmlink/link_capacity.hpp"
#include "smmlink/misalignment.hpp"
#include "smmlink/quadrature.hpp"

namespace smmlink {

enum class Averaging { per_realization, mean_channel };

struct LinkConfig {
    // [beam]
    double wavelength_m = 1550e-9;
    double waist_m = 800e-6;
    SpotModel spot_model = SpotModel::paper;
    // [link]
    double distance_m = 10.0;
    // [power]
    double total_dbm = 10.0;
    // [detector]
    double responsivity_a_per_w = 0.7;
    double feedback_resistance_ohm = 500.0;
    double noise_figure_db = 5.0;
    double temperature_k = 300.0;
    double bandwidth_ghz = 10.0;
    // [misalignment]
    double sigma_orient_mrad = 0.125;
    double sigma_aoa_mrad = 0.125;
    LaserPhaseModel laser_phases = LaserPhaseModel::single_laser;
    // [fiber]
    double backprop_radius_m = 2.82e-3;       // coupling-efficiency sweeps over beta
    double mode_field_radius_m = 1.2334508e-6; // capacity experiments with f = D
    // [aperture]
    double diameter_m = 6e-3;
    // [quadrature]
    QuadratureSpec quadrature{};
    // [expectation]
    Estimator estimator = Estimator::quadrature;
    int expectation_order = 32;
    std::size_t expectation_samples = 10000;
    // [montecarlo]
    std::size_t realizations = 2000;
    std::size_t final_realizations = 10000;
    Averaging averaging = Averaging::per_realization;
    // [run]
    std::uint64_t seed = 1;

    /// Throws ValidationError naming the key and its bound.
    void validate() const;

    [[nodiscard]] BeamSource source() const;
    [[nodiscard]] MisalignmentStats misalignment() const;
    [[nodiscard]] DetectorConfig detector() const;
    [[nodiscard]] PowerBudget budget() const;
    [[nodiscard]] ExpectationOptions expectation() const;
    /// Six-mode fiber with the configured back-propagated radius.
    [[nodiscard]] FiberSpec efficiency_fiber() const;
    /// Capacity setup over the OAM modes 0..5 with f = D.
    [[nodiscard]] EnsembleConfig ensemble(std::vector<ModeIndex> mode_set, double diameter) const;

    friend bool operator==(const LinkConfig&, const LinkConfig&);
};

[[nodiscard]] LinkConfig parse_config(const std::string& text);
[[nodiscard]] LinkConfig load_config(const std::string& path);
/// Every key with its effective value, in the format parse_config reads.
[[nodiscard]] std::string serialize_config(const LinkConfig& config);
/// 64-bit FNV-1a of the serialized configuration, as 16 hex digits.
[[nodiscard]] std::string config_hash(const LinkConfig& config);

[[nodiscard]] std::string to_string(Estimator e);
[[nodiscard]] std::string to_string(LaserPhaseModel m);
[[nodiscard]] std::string to_string(Averaging a);
[[nodiscard]] std::string to_string(AngularRule r);

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

}  // namespace smmlink
