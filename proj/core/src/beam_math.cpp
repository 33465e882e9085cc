#include "smmlink/beam_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "smmlink/errors.hpp"

namespace smmlink {

namespace {

using std::numbers::pi;

// std::polar is unspecified for negative magnitudes; Laguerre factors can be.
std::complex<double> phasor(double amp, double phase) {
    return {amp * std::cos(phase), amp * std::sin(phase)};
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

double factorial(int n) {
    double out = 1.0;
    for (int i = 2; i <= n; ++i) out *= i;
    return out;
}

}  // namespace

std::string ModeIndex::lp_label() const {
    return "LP" + std::to_string(std::abs(l)) + std::to_string(p + 1);
}

std::string ModeIndex::lg_label() const {
    return "LG" + std::to_string(p) + std::to_string(l);
}

void validate_mode(const ModeIndex& mode, bool enforce_caps) {
    if (mode.p < 0) throw ValidationError("mode.p", "radial order must be >= 0");
    if (!enforce_caps) return;
    if (mode.p > kMaxRadialOrder)
        throw ValidationError("mode.p", "radial order above " + std::to_string(kMaxRadialOrder));
    if (std::abs(mode.l) > kMaxAzimuthalOrder)
        throw ValidationError("mode.l",
                              "|azimuthal order| above " + std::to_string(kMaxAzimuthalOrder));
}

std::string to_string(SpotModel model) {
    return model == SpotModel::paper ? "paper" : "standard";
}

SpotModel spot_model_from_string(const std::string& text) {
    if (text == "paper") return SpotModel::paper;
    if (text == "standard") return SpotModel::standard;
    throw ValidationError("beam.spot_model", "expected 'paper' or 'standard', got '" + text + "'");
}

FiberSpec FiberSpec::from_optics(double wavelength, double mode_field_radius,
                                 double focal_length, std::vector<ModeIndex> modes) {
    if (!(wavelength > 0.0)) throw ValidationError("wavelength", "must be > 0");
    if (!(mode_field_radius > 0.0)) throw ValidationError("fiber.mode_field_radius", "must be > 0");
    if (!(focal_length > 0.0)) throw ValidationError("aperture.focal_length", "must be > 0");
    FiberSpec spec;
    spec.mode_field_radius = mode_field_radius;
    spec.focal_length = focal_length;
    spec.backprop_radius = wavelength * focal_length / (pi * mode_field_radius);
    spec.supported_modes = std::move(modes);
    spec.validate();
    return spec;
}

FiberSpec FiberSpec::from_backprop_radius(double backprop_radius, std::vector<ModeIndex> modes) {
    FiberSpec spec;
    spec.backprop_radius = backprop_radius;
    spec.supported_modes = std::move(modes);
    spec.validate();
    return spec;
}

void FiberSpec::validate() const {
    if (!(backprop_radius > 0.0) || !std::isfinite(backprop_radius))
        throw ValidationError("fiber.backprop_radius", "must be finite and > 0");
    if (supported_modes.empty())
        throw ValidationError("fiber.supported_modes", "must not be empty");
    std::set<ModeIndex> seen;
    for (const auto& m : supported_modes) {
        validate_mode(m);
        if (!seen.insert(m).second)
            throw ValidationError("fiber.supported_modes", "duplicate mode " + m.lp_label());
    }
}

std::vector<ModeIndex> six_mode_fiber() { return {{0, 0}, {1, 0}, {0, 1}, {0, 2}}; }

std::vector<ModeIndex> oam_fiber_modes(int count) {
    std::vector<ModeIndex> modes;
    for (int l = 0; l < count; ++l) modes.push_back({0, l});
    return modes;
}

double laguerre_assoc(int p, int a, double x) {
    if (p == 0) return 1.0;
    double prev = 1.0;
    double curr = 1.0 + a - x;
    for (int k = 1; k < p; ++k) {
        const double next = ((2.0 * k + 1.0 + a - x) * curr - (k + a) * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

double lg_normalization(int p, int l) {
    if (p < 0) throw ValidationError("mode.p", "radial order must be >= 0");
    const int al = std::abs(l);
    if (p + al > 20) {
        return std::sqrt(2.0 / pi * std::exp(log_factorial(p) - log_factorial(p + al)));
    }
    return std::sqrt(2.0 * factorial(p) / (pi * factorial(p + al)));
}

BeamGeometry propagate_geometry(double wavelength, double waist, double z, ModeIndex mode,
                                SpotModel model) {
    if (!(wavelength > 0.0)) throw ValidationError("beam.wavelength", "must be > 0");
    if (!(waist > 0.0)) throw ValidationError("beam.waist", "must be > 0");
    if (!(z >= 0.0) || !std::isfinite(z)) throw ValidationError("link.distance", "must be >= 0");
    validate_mode(mode);

    BeamGeometry g;
    g.wavelength = wavelength;
    g.waist = waist;
    g.distance = z;
    g.mode = mode;
    g.wavenumber = 2.0 * pi / wavelength;
    g.rayleigh_range = pi * waist * waist / wavelength;
    const double order = 1.0 + 2.0 * mode.p + std::abs(mode.l);
    const double ratio = z / g.rayleigh_range;
    if (model == SpotModel::paper) {
        g.spot_radius = waist * std::sqrt(order * (1.0 + ratio));
    } else {
        g.spot_radius = waist * std::sqrt(1.0 + ratio * ratio) * std::sqrt(order);
    }
    g.curvature = z > 0.0 ? z * (1.0 + 1.0 / (ratio * ratio))
                          : std::numeric_limits<double>::infinity();
    g.gouy = std::atan(ratio);
    return g;
}

BeamGeometry BeamSource::geometry(ModeIndex mode) const {
    return propagate_geometry(wavelength, waist, distance, mode, spot_model);
}

double displaced_radius(double r, double theta, double d) {
    const double sq = r * r + d * d - 2.0 * r * d * std::cos(theta);
    return std::sqrt(std::max(sq, 0.0));
}

double displaced_azimuth(double r, double theta, double d) {
    const double g = displaced_radius(r, theta, d);
    if (g == 0.0) return 0.0;
    double t = std::fmod(theta, 2.0 * pi);
    if (t < 0.0) t += 2.0 * pi;
    const double c = std::clamp((d - r * std::cos(t)) / g, -1.0, 1.0);
    const double a = std::acos(c);
    return t <= pi ? pi - a : pi + a;
}

double lg_radial_profile(ModeIndex mode, double radius, double r) {
    const int al = std::abs(mode.l);
    const double s = r / radius;
    const double u = 2.0 * s * s;
    double amp = lg_normalization(mode.p, mode.l) / radius;
    if (al > 0) amp *= std::pow(std::sqrt(2.0) * s, al);
    return amp * laguerre_assoc(mode.p, al, u) * std::exp(-s * s);
}

std::complex<double> lg_field(const BeamGeometry& geom, double r, double theta) {
    return lg_field_misaligned(geom, r, theta, 0.0, 0.0);
}

std::complex<double> lg_field_misaligned(const BeamGeometry& geom, double r, double theta,
                                         double d, double eps) {
    const ModeIndex m = geom.mode;
    const double g = d == 0.0 ? r : displaced_radius(r, theta, d);
    const double vartheta = d == 0.0 ? theta : displaced_azimuth(r, theta, d);
    const double amp = lg_radial_profile(m, geom.spot_radius, g);
    const double k = geom.wavenumber;
    const double curvature_phase = std::isinf(geom.curvature) ? 0.0 : k * g * g / (2.0 * geom.curvature);
    // k z is ~1e7 rad; folding the small terms into it would cost ~1e-9 rad.
    const double constant = -k * geom.distance + (2.0 * m.p + std::abs(m.l) + 1.0) * geom.gouy;
    const double local = -curvature_phase - k * eps * g - m.l * vartheta;
    return phasor(amp, local) * phasor(1.0, constant);
}

std::complex<double> fiber_mode_backprop(ModeIndex mode, const FiberSpec& fiber, double r,
                                         double theta) {
    const double amp = lg_radial_profile(mode, fiber.backprop_radius, r);
    return phasor(amp, -mode.l * theta);
}

}  // namespace smmlink
