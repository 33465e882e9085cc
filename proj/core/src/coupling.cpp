#include "smmlink/coupling.hpp"

#include <cmath>
#include <numbers>

#include "smmlink/errors.hpp"
#include "smmlink/random.hpp"

namespace smmlink {

namespace {

using std::numbers::pi;
using cplx = std::complex<double>;

constexpr double kDegenerateAperturePower = 1e-12;

void check_inputs(const ApertureSpec& aperture, double d, double eps) {
    if (!(aperture.diameter > 0.0) || !std::isfinite(aperture.diameter))
        throw ValidationError("aperture.diameter", "must be finite and > 0");
    if (!(d >= 0.0) || !std::isfinite(d))
        throw ValidationError("misalignment.displacement", "must be finite and >= 0");
    if (!std::isfinite(eps)) throw ValidationError("misalignment.tilt", "must be finite");
}

cplx integer_power(cplx base, int n) {
    cplx out{1.0, 0.0};
    const cplx b = n >= 0 ? base : std::conj(base);
    for (int i = 0; i < std::abs(n); ++i) out *= b;
    return out;
}

}  // namespace

ApertureSpec ApertureSpec::make(double diameter, double focal_length, const FiberSpec& fiber,
                                const BeamGeometry& incident) {
    if (!(diameter > 0.0)) throw ValidationError("aperture.diameter", "must be > 0");
    ApertureSpec ap;
    ap.diameter = diameter;
    ap.focal_length = focal_length;
    ap.beta = diameter / (2.0 * fiber.backprop_radius);
    ap.alpha = diameter / (2.0 * incident.spot_radius);
    const double defocus = std::isinf(incident.curvature)
                               ? 0.0
                               : incident.wavenumber * diameter * diameter / (8.0 * incident.curvature);
    ap.gamma = {ap.alpha * ap.alpha + ap.beta * ap.beta, -defocus};
    return ap;
}

CoefficientEstimate coupling_coefficient(const BeamGeometry& incident, ModeIndex fiber_mode,
                                         const FiberSpec& fiber, const ApertureSpec& aperture,
                                         double d, double eps, const QuadratureSpec& spec) {
    check_inputs(aperture, d, eps);
    const double half = 0.5 * aperture.diameter;
    auto integrand = [&](double x, double theta) {
        const double r = x * half;
        return lg_field_misaligned(incident, r, theta, d, eps) *
               std::conj(fiber_mode_backprop(fiber_mode, fiber, r, theta)) * (half * half * x);
    };
    const auto q = integrate_2d(integrand, spec);
    return {q.value, q.error_estimate, q.converged};
}

CoefficientEstimate aperture_power(const BeamGeometry& incident, const ApertureSpec& aperture,
                                   double d, double eps, const QuadratureSpec& spec) {
    check_inputs(aperture, d, eps);
    const double half = 0.5 * aperture.diameter;
    auto integrand = [&](double x, double theta) {
        const double r = x * half;
        return cplx{std::norm(lg_field_misaligned(incident, r, theta, d, eps)) * half * half * x,
                    0.0};
    };
    const auto q = integrate_2d(integrand, spec);
    return {cplx{q.value.real(), 0.0}, q.error_estimate, q.converged};
}

CouplingResult couple(const BeamGeometry& incident, ModeIndex fiber_mode, const FiberSpec& fiber,
                      const ApertureSpec& aperture, double d, double eps,
                      const QuadratureSpec& spec) {
    const auto h = coupling_coefficient(incident, fiber_mode, fiber, aperture, d, eps, spec);
    const auto pa = aperture_power(incident, aperture, d, eps, spec);
    CouplingResult out;
    out.h = h.value;
    out.coupled_power = std::norm(h.value);
    out.aperture_power = pa.value.real();
    out.quadrature_error = std::max(h.error_estimate, pa.error_estimate);
    out.converged = h.converged && pa.converged;
    if (out.aperture_power < kDegenerateAperturePower)
        throw DegenerateAperture("aperture collects " + std::to_string(out.aperture_power) +
                                 " of the incident power");
    out.efficiency = out.coupled_power / out.aperture_power;
    return out;
}

double coupling_efficiency(const BeamGeometry& incident, ModeIndex fiber_mode,
                           const FiberSpec& fiber, const ApertureSpec& aperture, double d,
                           double eps, const QuadratureSpec& spec) {
    return couple(incident, fiber_mode, fiber, aperture, d, eps, spec).efficiency;
}

double far_field_smf_efficiency(double beta) {
    if (!(beta > 0.0)) throw ValidationError("beta", "must be > 0");
    const double b2 = beta * beta;
    const double t = -std::expm1(-b2);
    return 2.0 * t * t / b2;
}

double far_field_smf_efficiency_quadrature(double beta, const QuadratureSpec& spec) {
    if (!(beta > 0.0)) throw ValidationError("beta", "must be > 0");
    const double b2 = beta * beta;
    // Nothing depends on theta, so the coarsest angular grid is exact.
    QuadratureSpec s = spec;
    s.angular_order = 8;
    const auto q = integrate_2d(
        [b2](double x, double) { return cplx{x * std::exp(-b2 * x * x), 0.0}; }, s);
    const double radial = q.value.real() / (2.0 * pi);
    return 8.0 * b2 * radial * radial;
}

// ---------------------------------------------------------------------------

OverlapEngine::OverlapEngine(const QuadratureSpec& spec, double diameter, const FiberSpec& fiber,
                             std::vector<ModeIndex> fiber_modes)
    : diameter_(diameter), fiber_modes_(std::move(fiber_modes)) {
    spec.validate();
    if (!(diameter > 0.0) || !std::isfinite(diameter))
        throw ValidationError("aperture.diameter", "must be finite and > 0");
    const TensorGrid grid = make_tensor_grid(spec.radial_order, spec.angular_order,
                                             spec.angular_rule);
    const double half = 0.5 * diameter;
    const std::size_t n = grid.size();
    r_.resize(n);
    cos_theta_.resize(n);
    sin_theta_.resize(n);
    weights_.resize(n);
    for (std::size_t i = 0; i < grid.radial_size(); ++i) {
        for (std::size_t j = 0; j < grid.angular_size(); ++j) {
            const std::size_t p = i * grid.angular_size() + j;
            r_[p] = grid.x[i] * half;
            cos_theta_[p] = std::cos(grid.theta[j]);
            sin_theta_[p] = std::sin(grid.theta[j]);
            weights_[p] = grid.x_weights[i] * grid.theta_weights[j] * half * half * grid.x[i];
        }
    }
    fiber_weighted_.resize(fiber_modes_.size());
    for (std::size_t k = 0; k < fiber_modes_.size(); ++k) {
        const ModeIndex m = fiber_modes_[k];
        auto& column = fiber_weighted_[k];
        column.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double amp = lg_radial_profile(m, fiber.backprop_radius, r_[p]);
            // conj(exp(-j l theta)) = exp(+j l theta)
            const cplx unit{cos_theta_[p], sin_theta_[p]};
            column[p] = amp * weights_[p] * integer_power(unit, m.l);
        }
    }
}

OverlapEngine::Displaced OverlapEngine::displace(double d) const {
    if (!(d >= 0.0) || !std::isfinite(d))
        throw ValidationError("misalignment.displacement", "must be finite and >= 0");
    Displaced out;
    out.d = d;
    const std::size_t n = r_.size();
    out.g.resize(n);
    out.azimuth.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        // Point relative to the beam centre, which sits at (d, 0).
        const double dx = r_[p] * cos_theta_[p] - d;
        const double dy = r_[p] * sin_theta_[p];
        const double g = std::hypot(dx, dy);
        out.g[p] = g;
        out.azimuth[p] = g > 0.0 ? cplx{dx / g, -dy / g} : cplx{1.0, 0.0};
    }
    return out;
}

void OverlapEngine::sample(const BeamGeometry& incident, const Displaced& coords,
                           std::vector<cplx>& field) const {
    const ModeIndex m = incident.mode;
    const int al = std::abs(m.l);
    const double w = incident.spot_radius;
    const double norm = lg_normalization(m.p, m.l) / w;
    const double k = incident.wavenumber;
    const double curvature_coeff =
        std::isinf(incident.curvature) ? 0.0 : k / (2.0 * incident.curvature);
    const double constant_phase = -k * incident.distance + (2.0 * m.p + al + 1.0) * incident.gouy;
    const cplx constant{std::cos(constant_phase), std::sin(constant_phase)};
    const std::size_t n = coords.g.size();
    field.resize(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double g = coords.g[p];
        const double s = g / w;
        double amp = norm * std::exp(-s * s);
        if (al > 0) amp *= std::pow(std::sqrt(2.0) * s, al);
        if (m.p > 0) amp *= laguerre_assoc(m.p, al, 2.0 * s * s);
        const double ph = -curvature_coeff * g * g;
        cplx v = amp * constant * cplx{std::cos(ph), std::sin(ph)};
        if (m.l != 0) v *= integer_power(coords.azimuth[p], m.l);
        field[p] = v;
    }
}

void OverlapEngine::tilt_phasors(const Displaced& coords, double wavenumber, double eps,
                                 std::vector<cplx>& out) const {
    const std::size_t n = coords.g.size();
    out.resize(n);
    const double c = -wavenumber * eps;
    for (std::size_t p = 0; p < n; ++p) {
        const double ph = c * coords.g[p];
        out[p] = {std::cos(ph), std::sin(ph)};
    }
}

double OverlapEngine::aperture_power(std::span<const cplx> field) const {
    double sum = 0.0;
    for (std::size_t p = 0; p < field.size(); ++p) sum += weights_[p] * std::norm(field[p]);
    return sum;
}

void OverlapEngine::overlaps(std::span<const cplx> field, std::span<const cplx> tilt,
                             std::span<cplx> out) const {
    if (out.size() != fiber_modes_.size())
        throw DimensionMismatch("overlap output size does not match fiber mode count");
    if (field.size() != weights_.size() || (!tilt.empty() && tilt.size() != field.size()))
        throw DimensionMismatch("field is not sampled on this engine's grid");
    const std::size_t n = field.size();
    for (std::size_t k = 0; k < fiber_weighted_.size(); ++k) {
        const cplx* fw = fiber_weighted_[k].data();
        double re = 0.0;
        double im = 0.0;
        if (tilt.empty()) {
            for (std::size_t p = 0; p < n; ++p) {
                const double a = field[p].real(), b = field[p].imag();
                re += a * fw[p].real() - b * fw[p].imag();
                im += a * fw[p].imag() + b * fw[p].real();
            }
        } else {
            for (std::size_t p = 0; p < n; ++p) {
                const double tr = field[p].real() * tilt[p].real() - field[p].imag() * tilt[p].imag();
                const double ti = field[p].real() * tilt[p].imag() + field[p].imag() * tilt[p].real();
                re += tr * fw[p].real() - ti * fw[p].imag();
                im += tr * fw[p].imag() + ti * fw[p].real();
            }
        }
        out[k] = {re, im};
    }
}

void OverlapEngine::coupling_matrix(std::span<const BeamGeometry> incident,
                                    const Displaced& coords, double eps, std::span<cplx> out,
                                    std::span<double> aperture_powers) const {
    const std::size_t ni = incident.size();
    const std::size_t nk = fiber_modes_.size();
    if (out.size() != ni * nk)
        throw DimensionMismatch("coupling matrix output has the wrong size");
    if (!aperture_powers.empty() && aperture_powers.size() != ni)
        throw DimensionMismatch("aperture power output has the wrong size");
    if (ni == 0) return;
    const BeamGeometry& ref = incident.front();
    for (const auto& g : incident) {
        if (g.wavelength != ref.wavelength || g.distance != ref.distance ||
            g.curvature != ref.curvature)
            throw ValidationError("incident", "modes must share wavelength, distance and curvature");
    }
    const double k = ref.wavenumber;
    const double curvature_coeff = std::isinf(ref.curvature) ? 0.0 : k / (2.0 * ref.curvature);
    const double tilt_coeff = k * eps;
    const std::size_t n = coords.g.size();

    // Common phase from wavefront curvature and tilt, one sincos per point.
    std::vector<cplx> common(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double g = coords.g[p];
        const double ph = -(curvature_coeff * g + tilt_coeff) * g;
        common[p] = {std::cos(ph), std::sin(ph)};
    }

    std::vector<cplx> field(n);
    for (std::size_t i = 0; i < ni; ++i) {
        const BeamGeometry& geo = incident[i];
        const ModeIndex m = geo.mode;
        const int al = std::abs(m.l);
        const double w = geo.spot_radius;
        const double norm = lg_normalization(m.p, m.l) / w;
        const double constant_phase = -k * geo.distance + (2.0 * m.p + al + 1.0) * geo.gouy;
        const cplx constant = norm * cplx{std::cos(constant_phase), std::sin(constant_phase)};
        double power = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            const double s = coords.g[p] / w;
            double amp = std::exp(-s * s);
            if (al > 0) {
                const double t = std::sqrt(2.0) * s;
                double tp = t;
                for (int q = 1; q < al; ++q) tp *= t;
                amp *= tp;
            }
            if (m.p > 0) amp *= laguerre_assoc(m.p, al, 2.0 * s * s);
            cplx v = amp * common[p];
            if (m.l != 0) {
                const cplx a = m.l > 0 ? coords.azimuth[p] : std::conj(coords.azimuth[p]);
                cplx ap = a;
                for (int q = 1; q < al; ++q)
                    ap = {ap.real() * a.real() - ap.imag() * a.imag(),
                          ap.real() * a.imag() + ap.imag() * a.real()};
                v = {v.real() * ap.real() - v.imag() * ap.imag(),
                     v.real() * ap.imag() + v.imag() * ap.real()};
            }
            field[p] = v;
            power += weights_[p] * (amp * amp);
        }
        if (!aperture_powers.empty()) aperture_powers[i] = power * std::norm(constant);
        for (std::size_t kk = 0; kk < nk; ++kk) {
            const cplx* fw = fiber_weighted_[kk].data();
            double re = 0.0;
            double im = 0.0;
            for (std::size_t p = 0; p < n; ++p) {
                re += field[p].real() * fw[p].real() - field[p].imag() * fw[p].imag();
                im += field[p].real() * fw[p].imag() + field[p].imag() * fw[p].real();
            }
            out[kk * ni + i] = constant * cplx{re, im};
        }
    }
}

// ---------------------------------------------------------------------------

std::vector<ExpectedEfficiency> expected_efficiency(std::span<const BeamGeometry> incident,
                                                    const FiberSpec& fiber,
                                                    std::span<const ModeIndex> fiber_modes,
                                                    double diameter,
                                                    const MisalignmentStats& stats,
                                                    const ExpectationOptions& options,
                                                    const QuadratureSpec& spec) {
    stats.validate();
    const std::size_t ni = incident.size();
    const std::size_t nk = fiber_modes.size();
    std::vector<ExpectedEfficiency> out(ni);
    for (auto& e : out) {
        e.mean.assign(nk, 0.0);
        e.std_error.assign(nk, 0.0);
    }
    if (nk == 0 || ni == 0) return out;
    for (std::size_t i = 1; i < ni; ++i)
        if (incident[i].wavenumber != incident[0].wavenumber)
            throw ValidationError("incident", "modes must share one wavelength");
    const double k = incident[0].wavenumber;

    const OverlapEngine engine(spec, diameter, fiber,
                               std::vector<ModeIndex>(fiber_modes.begin(), fiber_modes.end()));
    std::vector<std::vector<cplx>> fields(ni);
    std::vector<double> pa(ni);
    std::vector<cplx> tilt;
    std::vector<cplx> h(nk);

    auto sample_all = [&](const OverlapEngine::Displaced& coords) {
        for (std::size_t i = 0; i < ni; ++i) {
            engine.sample(incident[i], coords, fields[i]);
            pa[i] = engine.aperture_power(fields[i]);
            if (pa[i] < kDegenerateAperturePower)
                throw DegenerateAperture("aperture collects " + std::to_string(pa[i]) +
                                         " of the incident power at d = " +
                                         std::to_string(coords.d));
        }
    };
    // h for incident i under tilt eps, using the phasors prepared for it.
    auto overlap = [&](const OverlapEngine::Displaced& coords, double eps, std::size_t i) {
        if (eps != 0.0) {
            if (i == 0) engine.tilt_phasors(coords, k, eps, tilt);
            engine.overlaps(fields[i], tilt, h);
        } else {
            engine.overlaps(fields[i], {}, h);
        }
    };

    if (options.estimator == Estimator::quadrature) {
        if (options.order < 2) throw ValidationError("expectation.order", "must be >= 2");
        const auto d_rule = rayleigh_rule(stats.sigma_displacement(), options.order);
        const auto e_rule = rayleigh_rule(stats.sigma_aoa, options.order);
        for (std::size_t a = 0; a < d_rule.nodes.size(); ++a) {
            const auto coords = engine.displace(d_rule.nodes[a]);
            sample_all(coords);
            for (std::size_t b = 0; b < e_rule.nodes.size(); ++b) {
                const double w = d_rule.weights[a] * e_rule.weights[b];
                for (std::size_t i = 0; i < ni; ++i) {
                    overlap(coords, e_rule.nodes[b], i);
                    for (std::size_t kk = 0; kk < nk; ++kk)
                        out[i].mean[kk] += w * std::norm(h[kk]) / pa[i];
                }
            }
        }
        return out;
    }

    if (options.samples < 100)
        throw ValidationError("expectation.samples", "Monte-Carlo needs at least 100 samples");
    std::vector<std::vector<double>> m2(ni, std::vector<double>(nk, 0.0));
    for (std::size_t s = 0; s < options.samples; ++s) {
        const Misalignment mis = misalignment_at(stats, options.seed, s);
        const auto coords = engine.displace(mis.displacement);
        sample_all(coords);
        const double count = static_cast<double>(s + 1);
        for (std::size_t i = 0; i < ni; ++i) {
            overlap(coords, mis.tilt, i);
            for (std::size_t kk = 0; kk < nk; ++kk) {
                const double eta = std::norm(h[kk]) / pa[i];
                const double delta = eta - out[i].mean[kk];
                out[i].mean[kk] += delta / count;
                m2[i][kk] += delta * (eta - out[i].mean[kk]);
            }
        }
    }
    const double n = static_cast<double>(options.samples);
    for (std::size_t i = 0; i < ni; ++i)
        for (std::size_t kk = 0; kk < nk; ++kk)
            out[i].std_error[kk] = std::sqrt(m2[i][kk] / (n - 1.0) / n);
    return out;
}

ExpectedEfficiency expected_efficiency(const BeamGeometry& incident, const FiberSpec& fiber,
                                       std::span<const ModeIndex> fiber_modes, double diameter,
                                       const MisalignmentStats& stats,
                                       const ExpectationOptions& options,
                                       const QuadratureSpec& spec) {
    return expected_efficiency(std::span<const BeamGeometry>(&incident, 1), fiber, fiber_modes,
                               diameter, stats, options, spec)
        .front();
}

}  // namespace smmlink
