#pragma once

// Coupling of misaligned incident LG modes into back-propagated fiber
// modes over a circular receive aperture.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "smmlink/beam_math.hpp"
#include "smmlink/misalignment.hpp"
#include "smmlink/quadrature.hpp"

namespace smmlink {

struct ApertureSpec {
    double diameter = 0.0;
    double focal_length = 0.0;
    double beta = 0.0;   // D / (2 w)
    double alpha = 0.0;  // D / (2 w_z)
    std::complex<double> gamma{};  // alpha^2 + beta^2 - j k D^2 / (8 R_z)

    [[nodiscard]] static ApertureSpec make(double diameter, double focal_length,
                                           const FiberSpec& fiber, const BeamGeometry& incident);
};

struct CoefficientEstimate {
    std::complex<double> value{};
    double error_estimate = 0.0;
    bool converged = false;
};

struct CouplingResult {
    std::complex<double> h{};
    double coupled_power = 0.0;   // |h|^2
    double aperture_power = 0.0;  // P_A
    double efficiency = 0.0;      // |h|^2 / P_A
    double quadrature_error = 0.0;
    bool converged = false;
};

/// Complex overlap of the misaligned incident field with the conjugate
/// fiber mode over the aperture, r = x D / 2.
[[nodiscard]] CoefficientEstimate coupling_coefficient(const BeamGeometry& incident,
                                                       ModeIndex fiber_mode,
                                                       const FiberSpec& fiber,
                                                       const ApertureSpec& aperture, double d,
                                                       double eps,
                                                       const QuadratureSpec& spec = {});

/// Power of the incident field collected by the aperture.  The tilt is a
/// pure phase and does not change the result.
[[nodiscard]] CoefficientEstimate aperture_power(const BeamGeometry& incident,
                                                 const ApertureSpec& aperture, double d,
                                                 double eps, const QuadratureSpec& spec = {});

/// Coefficient, aperture power and efficiency together.  Throws
/// DegenerateAperture when the collected power is below 1e-12.
[[nodiscard]] CouplingResult couple(const BeamGeometry& incident, ModeIndex fiber_mode,
                                    const FiberSpec& fiber, const ApertureSpec& aperture,
                                    double d, double eps, const QuadratureSpec& spec = {});

[[nodiscard]] double coupling_efficiency(const BeamGeometry& incident, ModeIndex fiber_mode,
                                         const FiberSpec& fiber, const ApertureSpec& aperture,
                                         double d, double eps, const QuadratureSpec& spec = {});

/// 2 (1 - exp(-beta^2))^2 / beta^2: plane-wave illumination into a
/// single-mode fiber.
[[nodiscard]] double far_field_smf_efficiency(double beta);

/// The same quantity from 8 beta^2 |int_0^1 x exp(-beta^2 x^2) dx|^2
/// evaluated with integrate_2d (angular factor divided out).
[[nodiscard]] double far_field_smf_efficiency_quadrature(double beta,
                                                         const QuadratureSpec& spec = {});

/// Fixed-grid overlap evaluator.  Fiber modes are sampled once per aperture
/// and incident fields are sampled once per displacement, so ensembles and
/// sweeps avoid redundant special-function evaluations.
class OverlapEngine {
public:
    /// Displacement-dependent coordinates shared by every incident mode.
    struct Displaced {
        double d = 0.0;
        std::vector<double> g;                        // distance to beam centre
        std::vector<std::complex<double>> azimuth;    // exp(-j vartheta)
    };

    OverlapEngine(const QuadratureSpec& spec, double diameter, const FiberSpec& fiber,
                  std::vector<ModeIndex> fiber_modes);

    [[nodiscard]] double diameter() const { return diameter_; }
    [[nodiscard]] const std::vector<ModeIndex>& fiber_modes() const { return fiber_modes_; }
    [[nodiscard]] std::size_t grid_size() const { return weights_.size(); }

    [[nodiscard]] Displaced displace(double d) const;

    /// Incident field on the grid without the tilt phase.
    void sample(const BeamGeometry& incident, const Displaced& coords,
                std::vector<std::complex<double>>& field) const;

    /// exp(-j k eps g) on the grid.
    void tilt_phasors(const Displaced& coords, double wavenumber, double eps,
                      std::vector<std::complex<double>>& out) const;

    [[nodiscard]] double aperture_power(std::span<const std::complex<double>> field) const;

    /// out[k] = overlap of field (times tilt, if given) with fiber mode k.
    void overlaps(std::span<const std::complex<double>> field,
                  std::span<const std::complex<double>> tilt,
                  std::span<std::complex<double>> out) const;

    /// Coupling matrix for several incident modes sharing one source:
    /// out[k * incident.size() + i] couples incident i into fiber mode k.
    /// aperture_powers, if non-empty, receives P_A per incident mode.
    void coupling_matrix(std::span<const BeamGeometry> incident, const Displaced& coords,
                         double eps, std::span<std::complex<double>> out,
                         std::span<double> aperture_powers = {}) const;

private:
    double diameter_;
    std::vector<ModeIndex> fiber_modes_;
    std::vector<double> r_;
    std::vector<double> cos_theta_;
    std::vector<double> sin_theta_;
    std::vector<double> weights_;  // quadrature weight times polar Jacobian
    std::vector<std::vector<std::complex<double>>> fiber_weighted_;  // conj(F_k) * weight
};

enum class Estimator { monte_carlo, quadrature };

struct ExpectationOptions {
    Estimator estimator = Estimator::quadrature;
    int order = 32;               // Rayleigh nodes per axis (quadrature)
    std::size_t samples = 10000;  // Monte-Carlo draws
    std::uint64_t seed = 1;
};

struct ExpectedEfficiency {
    std::vector<double> mean;       // one per fiber mode
    std::vector<double> std_error;  // zero for the quadrature estimator
};

/// Ensemble mean of |h_k|^2 / P_A over d ~ Rayleigh(z sigma_orient) and
/// eps ~ Rayleigh(sigma_aoa), for every listed fiber mode.
[[nodiscard]] ExpectedEfficiency expected_efficiency(const BeamGeometry& incident,
                                                     const FiberSpec& fiber,
                                                     std::span<const ModeIndex> fiber_modes,
                                                     double diameter,
                                                     const MisalignmentStats& stats,
                                                     const ExpectationOptions& options = {},
                                                     const QuadratureSpec& spec = {});

/// The same expectation for several incident modes at once; entry i belongs
/// to incident[i].  Displacement grids and tilt phasors are shared.
[[nodiscard]] std::vector<ExpectedEfficiency> expected_efficiency(
    std::span<const BeamGeometry> incident, const FiberSpec& fiber,
    std::span<const ModeIndex> fiber_modes, double diameter, const MisalignmentStats& stats,
    const ExpectationOptions& options = {}, const QuadratureSpec& spec = {});

}  // namespace smmlink
