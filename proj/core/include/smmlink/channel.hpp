#pragma once

// Channel matrix assembly for the mode-multiplexed link and the square-law
// (IM/DD) received-current model.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "smmlink/beam_math.hpp"
#include "smmlink/coupling.hpp"
#include "smmlink/misalignment.hpp"
#include "smmlink/quadrature.hpp"

namespace smmlink {

/// Small dense row-major complex matrix.  N never exceeds six here, so
/// nothing clever is needed.
class ComplexMatrix {
public:
    using value_type = std::complex<double>;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<value_type> data);

    static ComplexMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t cols() const { return cols_; }
    [[nodiscard]] bool square() const { return rows_ == cols_; }

    value_type& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const value_type& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<value_type> data() { return data_; }
    [[nodiscard]] std::span<const value_type> data() const { return data_; }

    [[nodiscard]] std::vector<value_type> apply(std::span<const value_type> v) const;

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<value_type> data_;
};

/// Largest elementwise |a - b|.
[[nodiscard]] double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b);

struct ChannelMatrix {
    ComplexMatrix H;      // H(k, i): transmitted mode i into fiber mode k
    ComplexMatrix H_est;  // real diagonal, off-diagonals keep phase relative to it
    std::vector<ModeIndex> mode_set;     // transmitted modes, column order
    std::vector<ModeIndex> fiber_modes;  // receiving fiber modes, row order

    [[nodiscard]] std::size_t size() const { return mode_set.size(); }
};

/// Each row of H divided by the phase of its diagonal element, so that
/// H = diag(exp(j arg H_kk)) * H_est.
[[nodiscard]] ComplexMatrix estimate_channel(const ComplexMatrix& H);

/// Attaches laser phases (column i times exp(j phi_i)) and the estimate.
[[nodiscard]] ChannelMatrix make_channel(ComplexMatrix couplings, std::vector<ModeIndex> mode_set,
                                         std::vector<ModeIndex> fiber_modes,
                                         std::span<const double> laser_phases = {});

/// Fiber mode (0, l) paired with each transmitted (0, l).  Throws
/// DimensionMismatch when the fiber does not support one of them.
[[nodiscard]] std::vector<ModeIndex> matching_fiber_modes(std::span<const ModeIndex> mode_set,
                                                          const FiberSpec& fiber);

/// Samples the coupling matrix of a fixed transmitted-mode universe into a
/// fixed fiber-mode universe at one aperture.  Sub-channels for any mode
/// subset are submatrices of the result, so ensembles over subsets reuse
/// the same overlap integrals.
class ChannelSampler {
public:
    ChannelSampler(const BeamSource& source, std::vector<ModeIndex> tx_modes,
                   const FiberSpec& fiber, std::vector<ModeIndex> fiber_modes, double diameter,
                   const QuadratureSpec& spec = {});

    [[nodiscard]] const std::vector<ModeIndex>& tx_modes() const { return tx_modes_; }
    [[nodiscard]] const std::vector<ModeIndex>& fiber_modes() const { return engine_.fiber_modes(); }
    [[nodiscard]] double diameter() const { return engine_.diameter(); }

    /// Couplings without laser phases, fiber modes by rows.
    [[nodiscard]] ComplexMatrix couplings(double d, double eps,
                                          std::vector<double>* aperture_powers = nullptr) const;

private:
    std::vector<ModeIndex> tx_modes_;
    std::vector<BeamGeometry> geometry_;
    OverlapEngine engine_;
};

/// Rows `rows` and columns `cols` of m.
[[nodiscard]] ComplexMatrix submatrix(const ComplexMatrix& m, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> cols);

/// H(k, i) = h_ik exp(j phi_i) for transmitted modes mode_set into their
/// matching fiber modes, at diameter D under one misalignment realization.
[[nodiscard]] ChannelMatrix build_channel_matrix(const BeamSource& source,
                                                 std::span<const ModeIndex> mode_set,
                                                 const FiberSpec& fiber, double diameter,
                                                 const Misalignment& m,
                                                 const QuadratureSpec& spec = {});

/// Y_k = R |sum_i H(k,i) s_i|^2 + Z_k, Z_k ~ N(0, sigma_n^2).
[[nodiscard]] std::vector<double> received_current(const ComplexMatrix& H,
                                                   std::span<const double> s, double responsivity,
                                                   double sigma_n = 0.0, std::uint64_t seed = 0);

struct MeanCurrent {
    std::vector<double> signal;        // R |h_kk|^2 xi_k
    std::vector<double> interference;  // R sum_{i != k} |h_ik|^2 xi_i
    std::vector<double> beat;          // R pi/4 sum_i sum_{n != i} Re(h_ik h*_nk) sqrt(xi_i xi_n)
    std::vector<double> total;
};

/// Mean received current for independent Rayleigh amplitudes with
/// E[s_i^2] = xi_i.
[[nodiscard]] MeanCurrent mean_received_current(const ComplexMatrix& H, std::span<const double> xi,
                                                double responsivity);

}  // namespace smmlink
