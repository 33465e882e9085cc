#include "smmlink/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smmlink/errors.hpp"
#include "smmlink/random.hpp"

namespace smmlink {

using cplx = std::complex<double>;

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<value_type> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols)
        throw DimensionMismatch("matrix data does not match its dimensions");
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<cplx> ComplexMatrix::apply(std::span<const cplx> v) const {
    if (v.size() != cols_) throw DimensionMismatch("vector length does not match matrix columns");
    std::vector<cplx> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        cplx acc{};
        for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("inner matrix dimensions differ");
    ComplexMatrix out(a.rows_, b.cols_);
    for (std::size_t r = 0; r < a.rows_; ++r)
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const cplx x = a(r, k);
            for (std::size_t c = 0; c < b.cols_; ++c) out(r, c) += x * b(k, c);
        }
    return out;
}

double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("matrices differ in shape");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    return worst;
}

ComplexMatrix estimate_channel(const ComplexMatrix& H) {
    if (!H.square()) throw DimensionMismatch("channel matrix must be square");
    ComplexMatrix est(H.rows(), H.cols());
    for (std::size_t k = 0; k < H.rows(); ++k) {
        const cplx diag = H(k, k);
        const double mag = std::abs(diag);
        const cplx rot = mag > 0.0 ? std::conj(diag) / mag : cplx{1.0, 0.0};
        for (std::size_t i = 0; i < H.cols(); ++i) est(k, i) = H(k, i) * rot;
        est(k, k) = mag;
    }
    return est;
}

ChannelMatrix make_channel(ComplexMatrix couplings, std::vector<ModeIndex> mode_set,
                           std::vector<ModeIndex> fiber_modes, std::span<const double> laser_phases) {
    if (!couplings.square() || couplings.rows() != mode_set.size() ||
        fiber_modes.size() != mode_set.size())
        throw DimensionMismatch("channel matrix, mode set and fiber modes must agree in size");
    if (!laser_phases.empty()) {
        if (laser_phases.size() != mode_set.size())
            throw DimensionMismatch("one laser phase per transmitted mode");
        for (std::size_t i = 0; i < mode_set.size(); ++i) {
            const cplx ph{std::cos(laser_phases[i]), std::sin(laser_phases[i])};
            for (std::size_t k = 0; k < couplings.rows(); ++k) couplings(k, i) *= ph;
        }
    }
    ChannelMatrix ch;
    ch.H_est = estimate_channel(couplings);
    ch.H = std::move(couplings);
    ch.mode_set = std::move(mode_set);
    ch.fiber_modes = std::move(fiber_modes);
    return ch;
}

std::vector<ModeIndex> matching_fiber_modes(std::span<const ModeIndex> mode_set,
                                            const FiberSpec& fiber) {
    std::vector<ModeIndex> out;
    out.reserve(mode_set.size());
    for (const ModeIndex& m : mode_set) {
        const ModeIndex f{0, m.l};
        if (std::find(fiber.supported_modes.begin(), fiber.supported_modes.end(), f) ==
            fiber.supported_modes.end())
            throw DimensionMismatch("fiber does not support " + f.lp_label() + " for transmitted " +
                                    m.lg_label());
        out.push_back(f);
    }
    return out;
}

ChannelSampler::ChannelSampler(const BeamSource& source, std::vector<ModeIndex> tx_modes,
                               const FiberSpec& fiber, std::vector<ModeIndex> fiber_modes,
                               double diameter, const QuadratureSpec& spec)
    : tx_modes_(std::move(tx_modes)), engine_(spec, diameter, fiber, std::move(fiber_modes)) {
    geometry_.reserve(tx_modes_.size());
    for (const ModeIndex& m : tx_modes_) {
        validate_mode(m, true);
        geometry_.push_back(source.geometry(m));
    }
}

ComplexMatrix ChannelSampler::couplings(double d, double eps,
                                        std::vector<double>* aperture_powers) const {
    if (!std::isfinite(eps)) throw ValidationError("misalignment.tilt", "must be finite");
    ComplexMatrix out(engine_.fiber_modes().size(), tx_modes_.size());
    const auto coords = engine_.displace(d);
    std::span<double> pa;
    if (aperture_powers) {
        aperture_powers->assign(tx_modes_.size(), 0.0);
        pa = *aperture_powers;
    }
    engine_.coupling_matrix(geometry_, coords, eps, out.data(), pa);
    return out;
}

ComplexMatrix submatrix(const ComplexMatrix& m, std::span<const std::size_t> rows,
                        std::span<const std::size_t> cols) {
    ComplexMatrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (rows[r] >= m.rows() || cols[c] >= m.cols())
                throw DimensionMismatch("submatrix index out of range");
            out(r, c) = m(rows[r], cols[c]);
        }
    return out;
}

ChannelMatrix build_channel_matrix(const BeamSource& source, std::span<const ModeIndex> mode_set,
                                   const FiberSpec& fiber, double diameter, const Misalignment& m,
                                   const QuadratureSpec& spec) {
    fiber.validate();
    if (mode_set.empty()) throw DimensionMismatch("mode set is empty");
    if (mode_set.size() > fiber.supported_modes.size())
        throw DimensionMismatch("more transmitted modes than fiber modes");
    auto rows = matching_fiber_modes(mode_set, fiber);
    std::vector<ModeIndex> tx(mode_set.begin(), mode_set.end());
    const ChannelSampler sampler(source, tx, fiber, rows, diameter, spec);
    auto h = sampler.couplings(m.displacement, m.tilt);
    std::span<const double> phases;
    if (!m.laser_phases.empty()) phases = m.laser_phases;
    return make_channel(std::move(h), std::move(tx), std::move(rows), phases);
}

std::vector<double> received_current(const ComplexMatrix& H, std::span<const double> s,
                                     double responsivity, double sigma_n, std::uint64_t seed) {
    if (s.size() != H.cols()) throw DimensionMismatch("amplitude vector does not match H");
    for (double v : s)
        if (!(v >= 0.0)) throw ValidationError("s", "amplitudes must be >= 0");
    if (!(sigma_n >= 0.0)) throw ValidationError("sigma_n", "must be >= 0");
    const CounterStream noise(seed, 0x4E4F4953ULL);
    std::vector<double> y(H.rows());
    for (std::size_t k = 0; k < H.rows(); ++k) {
        cplx field{};
        for (std::size_t i = 0; i < H.cols(); ++i) field += H(k, i) * s[i];
        y[k] = responsivity * std::norm(field);
        if (sigma_n > 0.0) y[k] += sigma_n * noise.normal(k);
    }
    return y;
}

MeanCurrent mean_received_current(const ComplexMatrix& H, std::span<const double> xi,
                                  double responsivity) {
    if (!H.square()) throw DimensionMismatch("channel matrix must be square");
    if (xi.size() != H.cols()) throw DimensionMismatch("power vector does not match H");
    for (double v : xi)
        if (!(v >= 0.0)) throw ValidationError("xi", "powers must be >= 0");
    const std::size_t n = H.rows();
    MeanCurrent out;
    out.signal.resize(n);
    out.interference.resize(n);
    out.beat.resize(n);
    out.total.resize(n);
    constexpr double quarter_pi = std::numbers::pi / 4.0;
    for (std::size_t k = 0; k < n; ++k) {
        double interf = 0.0;
        cplx beat{};
        for (std::size_t i = 0; i < n; ++i) {
            if (i != k) interf += std::norm(H(k, i)) * xi[i];
            for (std::size_t m = 0; m < n; ++m) {
                if (m == i) continue;
                beat += H(k, i) * std::conj(H(k, m)) * std::sqrt(xi[i] * xi[m]);
            }
        }
        // Terms pair up as conjugates, so only rounding is left in the imaginary part.
        if (std::abs(beat.imag()) > 1e-12 * std::max(1.0, std::abs(beat.real())))
            throw Error("beat term has a non-negligible imaginary part");
        out.signal[k] = responsivity * std::norm(H(k, k)) * xi[k];
        out.interference[k] = responsivity * interf;
        out.beat[k] = responsivity * quarter_pi * beat.real();
        out.total[k] = out.signal[k] + out.interference[k] + out.beat[k];
    }
    return out;
}

}  // namespace smmlink
