#pragma once

// Experiment drivers: coupling-parameter sweeps, aperture sweeps under the
// f = D constraint, exhaustive mode-set search and power-budget sweeps.

#include <cstdint>
#include <string>
#include <vector>

#include "smmlink/coupling.hpp"
#include "smmlink/link_capacity.hpp"

namespace smmlink {

struct SweepGrid {
    std::string axis;
    std::vector<double> values;
    std::string constraint;  // e.g. "f=D"

    /// start, start + step, ... while <= stop (with a small tolerance so
    /// decimal steps land on stop).
    [[nodiscard]] static SweepGrid range(std::string axis, double start, double stop, double step);
    /// Strictly increasing, finite, at least two values unless allow_single.
    void validate(bool allow_single = false) const;
};

/// Index of the largest value; ties go to the earliest entry.
[[nodiscard]] std::size_t argmax_first(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Coupling efficiency against beta with the back-propagated radius fixed.

struct BetaPeak {
    double beta = 0.0;
    double eta = 0.0;
};

struct BetaSweep {
    ModeIndex tx{};
    std::vector<ModeIndex> fiber_modes;
    std::vector<double> beta;
    std::vector<std::vector<double>> eta;        // [beta index][fiber mode]
    std::vector<std::vector<double>> std_error;  // zero unless Monte-Carlo
    std::vector<BetaPeak> peaks;                 // one per fiber mode

    [[nodiscard]] std::vector<double> column(std::size_t fiber_index) const;
};

/// One sweep per transmitted mode.  Aligned sweeps evaluate d = eps = 0;
/// misaligned sweeps take the ensemble mean under stats.
[[nodiscard]] std::vector<BetaSweep> sweep_beta(const BeamSource& source,
                                                std::span<const ModeIndex> tx_modes,
                                                const FiberSpec& fiber, const SweepGrid& betas,
                                                bool misaligned, const MisalignmentStats& stats,
                                                const ExpectationOptions& options = {},
                                                const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------------
// Capacity ensembles.

/// Coupling matrices of a transmitted-mode universe for a fixed set of
/// misalignment realizations at one aperture.  Any subset's channel is a
/// submatrix, so every subset, scheme and power level is evaluated on the
/// same realizations.
class RealizationBank {
public:
    RealizationBank(const EnsembleConfig& config, std::vector<ModeIndex> universe, double diameter,
                    const MisalignmentStats& stats, std::size_t realizations, std::uint64_t seed);

    [[nodiscard]] double diameter() const { return diameter_; }
    [[nodiscard]] std::size_t size() const { return couplings_.size(); }
    [[nodiscard]] const std::vector<ModeIndex>& universe() const { return universe_; }

    /// Subset given as indices into universe(), in transmit order.
    [[nodiscard]] EnsembleStats capacity(Scheme scheme, std::span<const std::size_t> subset,
                                         const DetectorConfig& det, const PowerBudget& budget,
                                         bool mean_channel = false) const;

    /// Indices into universe() for the listed modes; DimensionMismatch if absent.
    [[nodiscard]] std::vector<std::size_t> indices_of(std::span<const ModeIndex> modes) const;

private:
    std::vector<ModeIndex> universe_;
    double diameter_;
    std::vector<ComplexMatrix> couplings_;
    std::vector<std::vector<double>> phases_;
};

struct ApertureSweep {
    std::vector<std::vector<ModeIndex>> mode_sets;
    std::vector<double> diameter;
    // [mode set][diameter]
    std::vector<std::vector<EnsembleStats>> zfbf;
    std::vector<std::vector<EnsembleStats>> no_zfbf;
    std::vector<std::size_t> best_zfbf;     // diameter index per mode set
    std::vector<std::size_t> best_no_zfbf;  // diameter index per mode set
};

/// Mean capacity of every mode set across the diameter grid with f = D.
[[nodiscard]] ApertureSweep sweep_aperture(const EnsembleConfig& config,
                                           const std::vector<std::vector<ModeIndex>>& mode_sets,
                                           const SweepGrid& diameters,
                                           const MisalignmentStats& stats,
                                           std::size_t realizations, std::uint64_t seed);

/// Transmitted OAM modes (0, 0) ... (0, n - 1).
[[nodiscard]] std::vector<ModeIndex> first_oam_modes(int n);

struct SearchRow {
    std::vector<ModeIndex> modes;
    EnsembleStats stats;
};

struct SearchResult {
    std::vector<SearchRow> rows;  // lexicographic subset order
    std::size_t best = 0;

    [[nodiscard]] const SearchRow& best_row() const { return rows.at(best); }
};

/// Every size-n subset of the universe at one aperture.  Ties go to the
/// lexicographically smallest subset.
[[nodiscard]] SearchResult search_mode_set(const RealizationBank& bank, int n, Scheme scheme,
                                           const DetectorConfig& det, const PowerBudget& budget,
                                           bool mean_channel = false);

/// All k-subsets of {0, ..., n-1} in lexicographic order.
[[nodiscard]] std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k);

struct PowerCurve {
    std::vector<ModeIndex> modes;
    const RealizationBank* bank = nullptr;
};

struct Crossover {
    double power_dbm = 0.0;
    std::size_t from = 0;  // curve index
    std::size_t to = 0;
};

struct PowerSweep {
    std::vector<double> power_dbm;
    std::vector<std::vector<EnsembleStats>> capacity;  // [curve][power]
    std::vector<std::size_t> best;                     // curve index per power
    std::vector<Crossover> crossovers;
};

/// Mean capacity of each curve over the power grid.  Crossovers are where
/// the best curve changes, placed by linear interpolation of the capacity
/// difference between neighbouring grid points.
[[nodiscard]] PowerSweep sweep_power(const std::vector<PowerCurve>& curves,
                                     const std::vector<double>& power_dbm, Scheme scheme,
                                     const DetectorConfig& det, bool mean_channel = false);

}  // namespace smmlink
