#pragma once

// Special functions and closed-form field evaluators for Laguerre-Gaussian
// beams and the LG approximants of few-mode-fiber LP modes.
//
// All lengths are metres, all angles radians.

#include <complex>
#include <compare>
#include <string>
#include <vector>

namespace smmlink {

/// Radial order p and azimuthal order l of an LG field.  The fiber mode
/// LP_{|l|,p+1} is represented by the same index.
struct ModeIndex {
    int p = 0;
    int l = 0;

    friend constexpr auto operator<=>(const ModeIndex&, const ModeIndex&) = default;

    /// "LP01", "LP11", "LP02", ...
    [[nodiscard]] std::string lp_label() const;
    /// "LG00", "LG01", ...  (radial index first)
    [[nodiscard]] std::string lg_label() const;
};

/// Throws ValidationError unless p >= 0.  The optional caps reject orders
/// outside the regime where LG fields approximate LP modes.
void validate_mode(const ModeIndex& mode, bool enforce_caps = false);

inline constexpr int kMaxRadialOrder = 4;
inline constexpr int kMaxAzimuthalOrder = 8;

enum class SpotModel {
    paper,     // w0 * sqrt((1 + 2p + |l|) (1 + z/zR))
    standard,  // w0 * sqrt(1 + (z/zR)^2) * sqrt(2p + |l| + 1)
};

[[nodiscard]] std::string to_string(SpotModel model);
[[nodiscard]] SpotModel spot_model_from_string(const std::string& text);

struct BeamGeometry {
    double wavelength = 0.0;
    double waist = 0.0;
    double distance = 0.0;
    double rayleigh_range = 0.0;
    double spot_radius = 0.0;
    double curvature = 0.0;  // +inf at the waist
    double gouy = 0.0;
    double wavenumber = 0.0;
    ModeIndex mode{};
};

/// Transmitter optics shared by every transmitted mode.
struct BeamSource {
    double wavelength = 1550e-9;
    double waist = 800e-6;
    double distance = 10.0;
    SpotModel spot_model = SpotModel::paper;

    [[nodiscard]] BeamGeometry geometry(ModeIndex mode) const;
};

struct FiberSpec {
    double mode_field_radius = 0.0;  // at the fiber end face
    double focal_length = 0.0;
    double backprop_radius = 0.0;    // lambda f / (pi w_a)
    std::vector<ModeIndex> supported_modes;

    /// Builds the spec from the physical optics; backprop radius follows.
    static FiberSpec from_optics(double wavelength, double mode_field_radius,
                                 double focal_length, std::vector<ModeIndex> modes);
    /// Builds the spec directly from a back-propagated radius (sweeps that
    /// hold that radius constant while the aperture changes).
    static FiberSpec from_backprop_radius(double backprop_radius,
                                          std::vector<ModeIndex> modes);

    void validate() const;
};

/// The four LP modes of the six-mode fiber: LP01, LP02, LP11, LP21.
[[nodiscard]] std::vector<ModeIndex> six_mode_fiber();
/// LP01 ... LP(n-1)1 as (p=0, l) indices.
[[nodiscard]] std::vector<ModeIndex> oam_fiber_modes(int count);

/// Associated Laguerre polynomial L_p^a(x) by the three-term recurrence.
[[nodiscard]] double laguerre_assoc(int p, int a, double x);

/// sqrt(2 p! / (pi (p+|l|)!)).
[[nodiscard]] double lg_normalization(int p, int l);

[[nodiscard]] BeamGeometry propagate_geometry(double wavelength, double waist, double z,
                                              ModeIndex mode,
                                              SpotModel model = SpotModel::paper);

/// Distance from a receiver-plane point (r, theta) to a beam centre
/// displaced by d along the x axis.
[[nodiscard]] double displaced_radius(double r, double theta, double d);

/// Azimuth of (r, theta) seen from the displaced beam centre.  Returns 0 at
/// the beam centre itself.
[[nodiscard]] double displaced_azimuth(double r, double theta, double d);

/// Aligned LG field at the receiver plane.
[[nodiscard]] std::complex<double> lg_field(const BeamGeometry& geom, double r, double theta);

/// LG field with pointing displacement d and angle-of-arrival tilt eps.
[[nodiscard]] std::complex<double> lg_field_misaligned(const BeamGeometry& geom, double r,
                                                       double theta, double d, double eps);

/// Fiber mode back-propagated to the aperture plane (unit L2 norm).
[[nodiscard]] std::complex<double> fiber_mode_backprop(ModeIndex mode, const FiberSpec& fiber,
                                                       double r, double theta);

/// Real radial profile B/w (sqrt2 r/w)^|l| L_p^|l|(2r^2/w^2) exp(-r^2/w^2).
[[nodiscard]] double lg_radial_profile(ModeIndex mode, double radius, double r);

}  // namespace smmlink
