#include "smmlink/link_capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "smmlink/errors.hpp"

namespace smmlink {

namespace {

using cplx = std::complex<double>;

constexpr double kSingularPivotRatio = 1e-12;
constexpr double kMinBudgetDenominator = 1e-12;
constexpr std::size_t kMinRealizations = 100;

double finite_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be finite and > 0");
    return v;
}

double snr_with_power(double per_channel, const DetectorConfig& det) {
    const double current = det.responsivity * per_channel;
    return det.feedback_resistance * current * current / det.thermal_noise();
}

}  // namespace

double DetectorConfig::noise_figure() const { return std::pow(10.0, noise_figure_db / 10.0); }

double DetectorConfig::thermal_noise() const {
    return 4.0 * kBoltzmann * temperature * noise_figure() * bandwidth;
}

double DetectorConfig::noise_variance() const { return thermal_noise() / feedback_resistance; }

void DetectorConfig::validate() const {
    finite_positive(responsivity, "detector.responsivity_a_per_w");
    finite_positive(feedback_resistance, "detector.feedback_resistance_ohm");
    finite_positive(temperature, "detector.temperature_k");
    finite_positive(bandwidth, "detector.bandwidth_ghz");
    if (!std::isfinite(noise_figure_db) || noise_figure_db < 0.0)
        throw ValidationError("detector.noise_figure_db", "must be finite and >= 0");
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts / 1e-3); }

PowerBudget PowerBudget::from_dbm(double dbm) {
    if (!std::isfinite(dbm)) throw ValidationError("power.total_dbm", "must be finite");
    return {dbm_to_watts(dbm)};
}

double PowerBudget::dbm() const { return watts_to_dbm(total); }

void PowerBudget::validate() const {
    if (!(total >= 0.0) || !std::isfinite(total))
        throw ValidationError("power.total_dbm", "total power must be finite and >= 0");
}

std::string to_string(Scheme s) { return s == Scheme::zfbf ? "zfbf" : "no_zfbf"; }

Scheme scheme_from_string(const std::string& text) {
    if (text == "zfbf") return Scheme::zfbf;
    if (text == "no_zfbf" || text == "no-zfbf") return Scheme::no_zfbf;
    throw ValidationError("scheme", "expected zfbf or no_zfbf, got '" + text + "'");
}

double rate_from_snr(double snr, double bandwidth) {
    if (!(snr >= 0.0)) throw ValidationError("snr", "must be >= 0");
    return 0.5 * bandwidth * std::log2(1.0 + snr * std::numbers::e / (2.0 * std::numbers::pi));
}

std::vector<double> sinr_no_zfbf(const ComplexMatrix& H, const DetectorConfig& det,
                                 const PowerBudget& budget) {
    if (!H.square()) throw DimensionMismatch("channel matrix must be square");
    const std::size_t n = H.rows();
    if (n == 0) return {};
    const double xt = budget.total;
    const std::vector<double> xi(n, xt / static_cast<double>(n));
    const MeanCurrent mean = mean_received_current(H, xi, det.responsivity);
    const double nn = static_cast<double>(n);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = mean.interference[k] + mean.beat[k];
        const double h2 = std::norm(H(k, k));
        const double num = det.feedback_resistance * det.responsivity * det.responsivity * xt * xt *
                           h2 * h2;
        const double den = nn * nn * (det.thermal_noise() + det.feedback_resistance * x * x);
        out[k] = num / den;
    }
    return out;
}

CapacityReport capacity_no_zfbf(const ComplexMatrix& H, const DetectorConfig& det,
                                const PowerBudget& budget) {
    CapacityReport rep;
    rep.scheme = Scheme::no_zfbf;
    rep.sinr = sinr_no_zfbf(H, det, budget);
    rep.rates.reserve(rep.sinr.size());
    for (double s : rep.sinr) {
        rep.rates.push_back(rate_from_snr(s, det.bandwidth));
        rep.aggregate += rep.rates.back();
    }
    rep.channel_power = rep.sinr.empty() ? 0.0 : budget.total / static_cast<double>(rep.sinr.size());
    return rep;
}

Precoder zfbf_precoder(const ComplexMatrix& H_est) {
    if (!H_est.square()) throw DimensionMismatch("estimated channel must be square");
    const std::size_t n = H_est.rows();
    ComplexMatrix a = H_est;
    ComplexMatrix inv = ComplexMatrix::identity(n);
    double largest = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        const double mag = std::abs(a(piv, col));
        largest = std::max(largest, mag);
        smallest = std::min(smallest, mag);
        if (!(mag > 0.0) || smallest < kSingularPivotRatio * largest)
            throw SingularChannel("estimated channel is singular (pivot ratio " +
                                  std::to_string(largest > 0.0 ? smallest / largest : 0.0) + ")");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a(piv, c), a(col, c));
                std::swap(inv(piv, c), inv(col, c));
            }
        }
        const cplx scale = 1.0 / a(col, col);
        for (std::size_t c = 0; c < n; ++c) {
            a(col, c) *= scale;
            inv(col, c) *= scale;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const cplx f = a(r, col);
            if (f == cplx{}) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a(r, c) -= f * a(col, c);
                inv(r, c) -= f * inv(col, c);
            }
        }
    }
    return {std::move(inv), n > 0 ? largest / smallest : 1.0};
}

double zfbf_power_allocation(const ComplexMatrix& precoder, double total_power) {
    if (!precoder.square()) throw DimensionMismatch("precoder must be square");
    if (!(total_power >= 0.0)) throw ValidationError("power.total_dbm", "must be >= 0 W");
    const std::size_t n = precoder.rows();
    double direct = 0.0;
    double cross = 0.0;
    // Row r of the precoder mixes every stream into transmitter r; the
    // cross terms come from E[s_i] E[s_n] = pi xi / 4 for independent streams.
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const cplx a = precoder(r, i);
            if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
                throw ValidationError("precoder", "entries must be finite");
            direct += std::norm(a);
            for (std::size_t m = 0; m < n; ++m)
                if (m != i) cross += (a * std::conj(precoder(r, m))).real();
        }
    }
    const double den = direct + 0.25 * std::numbers::pi * cross;
    if (!(den > kMinBudgetDenominator))
        throw NegativeBudgetDenominator("ZFBF power denominator " + std::to_string(den) +
                                        " is not positive");
    return total_power / den;
}

CapacityReport capacity_zfbf(const ComplexMatrix& H, const ComplexMatrix& H_est,
                             const DetectorConfig& det, const PowerBudget& budget) {
    if (!H.square() || H.rows() != H_est.rows() || !H_est.square())
        throw DimensionMismatch("channel and estimate must be square and equal in size");
    CapacityReport rep;
    rep.scheme = Scheme::zfbf;
    const std::size_t n = H.rows();
    if (n == 0) return rep;
    const Precoder pre = zfbf_precoder(H_est);
    rep.condition = pre.condition;
    rep.channel_power = zfbf_power_allocation(pre.inverse, budget.total);
    const double snr = snr_with_power(rep.channel_power, det);
    const double r = rate_from_snr(snr, det.bandwidth);
    rep.sinr.assign(n, snr);
    rep.rates.assign(n, r);
    rep.aggregate = static_cast<double>(n) * r;
    return rep;
}

CapacityReport capacity(Scheme scheme, const ComplexMatrix& H, const ComplexMatrix& H_est,
                        const DetectorConfig& det, const PowerBudget& budget) {
    return scheme == Scheme::zfbf ? capacity_zfbf(H, H_est, det, budget)
                                  : capacity_no_zfbf(H, det, budget);
}

void EnsembleAccumulator::add(double value) {
    ++count_;
    const double delta = value - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (value - mean_);
}

EnsembleStats EnsembleAccumulator::finish() const {
    const std::size_t total = count_ + singular_;
    if (total > 0 &&
        static_cast<double>(singular_) > kMaxSingularFraction * static_cast<double>(total))
        throw FractionSingular(std::to_string(singular_) + " of " + std::to_string(total) +
                               " realizations had a singular estimated channel");
    EnsembleStats s;
    s.mean = mean_;
    s.used = count_;
    s.singular = singular_;
    s.std_error = count_ > 1 ? std::sqrt(m2_ / static_cast<double>(count_ - 1) /
                                         static_cast<double>(count_))
                             : 0.0;
    return s;
}

FiberSpec fiber_for_aperture(const EnsembleConfig& config, double diameter) {
    if (config.mode_field_radius > 0.0)
        return FiberSpec::from_optics(config.source.wavelength, config.mode_field_radius, diameter,
                                      config.fiber.supported_modes);
    return config.fiber;
}

EnsembleStats ensemble_capacity(Scheme scheme, const EnsembleConfig& config,
                                const MisalignmentStats& stats, std::size_t realizations,
                                std::uint64_t seed) {
    stats.validate();
    config.detector.validate();
    config.budget.validate();
    if (realizations < kMinRealizations)
        throw ValidationError("montecarlo.realizations", "need at least 100 realizations");
    const FiberSpec fiber = fiber_for_aperture(config, config.diameter);
    auto rows = matching_fiber_modes(config.mode_set, fiber);
    const ChannelSampler sampler(config.source, config.mode_set, fiber, rows, config.diameter,
                                 config.quadrature);
    const std::size_t n = config.mode_set.size();

    if (config.mean_channel) {
        ComplexMatrix acc(n, n);
        for (std::size_t j = 0; j < realizations; ++j) {
            const Misalignment m = misalignment_at(stats, seed, j);
            const ComplexMatrix h = sampler.couplings(m.displacement, m.tilt);
            for (std::size_t e = 0; e < h.data().size(); ++e) acc.data()[e] += std::norm(h.data()[e]);
        }
        for (auto& v : acc.data()) v = std::sqrt(v.real() / static_cast<double>(realizations));
        const auto ch = make_channel(acc, config.mode_set, rows);
        EnsembleAccumulator single;
        single.add(capacity(scheme, ch.H, ch.H_est, config.detector, config.budget).aggregate);
        return single.finish();
    }

    EnsembleAccumulator acc;
    for (std::size_t j = 0; j < realizations; ++j) {
        const Misalignment m = misalignment_at(stats, seed, j, n, config.phases);
        const auto ch = make_channel(sampler.couplings(m.displacement, m.tilt), config.mode_set,
                                     rows, m.laser_phases);
        try {
            acc.add(capacity(scheme, ch.H, ch.H_est, config.detector, config.budget).aggregate);
        } catch (const SingularChannel&) {
            acc.add_singular();
        } catch (const NegativeBudgetDenominator&) {
            acc.add_singular();
        }
    }
    return acc.finish();
}

}  // namespace smmlink
