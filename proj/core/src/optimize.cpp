#include "smmlink/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "smmlink/errors.hpp"
#include "smmlink/parallel.hpp"

namespace smmlink {

SweepGrid SweepGrid::range(std::string axis, double start, double stop, double step) {
    if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
        throw ValidationError(axis, "range bounds must be finite");
    if (!(step > 0.0)) throw ValidationError(axis, "range step must be > 0");
    if (stop < start) throw ValidationError(axis, "range stop is below start");
    SweepGrid g;
    g.axis = std::move(axis);
    const double slack = 1e-9 * step;
    for (std::size_t i = 0;; ++i) {
        double v = start + static_cast<double>(i) * step;
        if (v > stop + slack) break;
        // Snap to 12 significant digits so 0.1:4:0.01 yields 0.95, not 0.9500000000000001.
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        v = std::strtod(buf, nullptr);
        g.values.push_back(v);
    }
    return g;
}

void SweepGrid::validate(bool allow_single) const {
    if (values.empty() || (!allow_single && values.size() < 2))
        throw ValidationError(axis, "sweep needs at least two values");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw ValidationError(axis, "sweep values must be finite");
        if (i > 0 && !(values[i] > values[i - 1]))
            throw ValidationError(axis, "sweep values must be strictly increasing");
    }
}

std::size_t argmax_first(const std::vector<double>& values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

std::vector<double> BetaSweep::column(std::size_t fiber_index) const {
    std::vector<double> out;
    out.reserve(eta.size());
    for (const auto& row : eta) out.push_back(row.at(fiber_index));
    return out;
}

std::vector<BetaSweep> sweep_beta(const BeamSource& source, std::span<const ModeIndex> tx_modes,
                                  const FiberSpec& fiber, const SweepGrid& betas, bool misaligned,
                                  const MisalignmentStats& stats,
                                  const ExpectationOptions& options, const QuadratureSpec& spec) {
    betas.validate(true);
    if (betas.values.front() <= 0.0) throw ValidationError("beta", "values must be > 0");
    if (!(fiber.backprop_radius > 0.0))
        throw ValidationError("fiber.backprop_radius_m", "must be > 0");
    std::vector<BeamGeometry> incident;
    for (const ModeIndex& m : tx_modes) {
        validate_mode(m, true);
        incident.push_back(source.geometry(m));
    }
    const auto& fmodes = fiber.supported_modes;
    const std::size_t nb = betas.values.size();
    const std::size_t nk = fmodes.size();

    std::vector<BetaSweep> out(tx_modes.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].tx = tx_modes[i];
        out[i].fiber_modes = fmodes;
        out[i].beta = betas.values;
        out[i].eta.assign(nb, std::vector<double>(nk, 0.0));
        out[i].std_error.assign(nb, std::vector<double>(nk, 0.0));
    }
    if (incident.empty() || nk == 0) return out;

    // Zero spreads reduce the expectation to the single aligned node.
    const MisalignmentStats used =
        misaligned ? stats : MisalignmentStats{0.0, 0.0, stats.distance};
    ExpectationOptions opts = options;
    if (!misaligned) opts.estimator = Estimator::quadrature;

    parallel_for(nb, [&](std::size_t b) {
        const double diameter = 2.0 * betas.values[b] * fiber.backprop_radius;
        const auto res = expected_efficiency(incident, fiber, fmodes, diameter, used, opts, spec);
        for (std::size_t i = 0; i < incident.size(); ++i) {
            out[i].eta[b] = res[i].mean;
            out[i].std_error[b] = res[i].std_error;
        }
    });

    for (auto& sw : out) {
        sw.peaks.resize(nk);
        for (std::size_t k = 0; k < nk; ++k) {
            const auto col = sw.column(k);
            const std::size_t j = argmax_first(col);
            sw.peaks[k] = {sw.beta[j], col[j]};
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

RealizationBank::RealizationBank(const EnsembleConfig& config, std::vector<ModeIndex> universe,
                                 double diameter, const MisalignmentStats& stats,
                                 std::size_t realizations, std::uint64_t seed)
    : universe_(std::move(universe)), diameter_(diameter) {
    stats.validate();
    if (realizations < 100)
        throw ValidationError("montecarlo.realizations", "need at least 100 realizations");
    if (universe_.empty()) throw DimensionMismatch("mode universe is empty");
    const FiberSpec fiber = fiber_for_aperture(config, diameter);
    fiber.validate();
    auto rows = matching_fiber_modes(universe_, fiber);
    const ChannelSampler sampler(config.source, universe_, fiber, rows, diameter,
                                 config.quadrature);
    couplings_.resize(realizations);
    phases_.resize(realizations);
    parallel_for(realizations, [&](std::size_t j) {
        const Misalignment m = misalignment_at(stats, seed, j, universe_.size(), config.phases);
        couplings_[j] = sampler.couplings(m.displacement, m.tilt);
        phases_[j] = m.laser_phases;
    });
}

std::vector<std::size_t> RealizationBank::indices_of(std::span<const ModeIndex> modes) const {
    std::vector<std::size_t> out;
    for (const ModeIndex& m : modes) {
        const auto it = std::find(universe_.begin(), universe_.end(), m);
        if (it == universe_.end())
            throw DimensionMismatch(m.lg_label() + " is not in the realization bank");
        out.push_back(static_cast<std::size_t>(it - universe_.begin()));
    }
    return out;
}

EnsembleStats RealizationBank::capacity(Scheme scheme, std::span<const std::size_t> subset,
                                        const DetectorConfig& det, const PowerBudget& budget,
                                        bool mean_channel) const {
    det.validate();
    budget.validate();
    std::vector<ModeIndex> modes;
    for (std::size_t i : subset) modes.push_back(universe_.at(i));
    std::vector<ModeIndex> fiber_rows;
    for (const ModeIndex& m : modes) fiber_rows.push_back({0, m.l});
    const std::size_t n = subset.size();

    if (mean_channel) {
        ComplexMatrix acc(n, n);
        for (const auto& h : couplings_) {
            const ComplexMatrix sub = submatrix(h, subset, subset);
            for (std::size_t e = 0; e < sub.data().size(); ++e) acc.data()[e] += std::norm(sub.data()[e]);
        }
        for (auto& v : acc.data()) v = std::sqrt(v.real() / static_cast<double>(couplings_.size()));
        const auto ch = make_channel(acc, modes, fiber_rows);
        EnsembleAccumulator single;
        single.add(smmlink::capacity(scheme, ch.H, ch.H_est, det, budget).aggregate);
        return single.finish();
    }

    EnsembleAccumulator acc;
    std::vector<double> phases(n);
    for (std::size_t j = 0; j < couplings_.size(); ++j) {
        const bool with_phases = !phases_[j].empty();
        if (with_phases)
            for (std::size_t q = 0; q < n; ++q) phases[q] = phases_[j][subset[q]];
        const auto ch = make_channel(submatrix(couplings_[j], subset, subset), modes, fiber_rows,
                                     with_phases ? std::span<const double>(phases)
                                                 : std::span<const double>{});
        try {
            acc.add(smmlink::capacity(scheme, ch.H, ch.H_est, det, budget).aggregate);
        } catch (const SingularChannel&) {
            acc.add_singular();
        } catch (const NegativeBudgetDenominator&) {
            acc.add_singular();
        }
    }
    return acc.finish();
}

std::vector<ModeIndex> first_oam_modes(int n) {
    if (n < 1) throw ValidationError("n", "must be >= 1");
    std::vector<ModeIndex> out;
    for (int l = 0; l < n; ++l) out.push_back({0, l});
    return out;
}

ApertureSweep sweep_aperture(const EnsembleConfig& config,
                             const std::vector<std::vector<ModeIndex>>& mode_sets,
                             const SweepGrid& diameters, const MisalignmentStats& stats,
                             std::size_t realizations, std::uint64_t seed) {
    diameters.validate(true);
    if (diameters.values.front() <= 0.0)
        throw ValidationError("aperture.diameter_m", "diameters must be > 0");
    std::vector<ModeIndex> universe;
    for (const auto& set : mode_sets) {
        if (set.empty()) throw DimensionMismatch("empty mode set");
        for (const ModeIndex& m : set)
            if (std::find(universe.begin(), universe.end(), m) == universe.end())
                universe.push_back(m);
    }
    std::sort(universe.begin(), universe.end());

    ApertureSweep out;
    out.mode_sets = mode_sets;
    out.diameter = diameters.values;
    const std::size_t ns = mode_sets.size();
    const std::size_t nd = diameters.values.size();
    out.zfbf.assign(ns, std::vector<EnsembleStats>(nd));
    out.no_zfbf.assign(ns, std::vector<EnsembleStats>(nd));
    for (std::size_t d = 0; d < nd; ++d) {
        const RealizationBank bank(config, universe, diameters.values[d], stats, realizations, seed);
        for (std::size_t s = 0; s < ns; ++s) {
            const auto idx = bank.indices_of(mode_sets[s]);
            out.zfbf[s][d] =
                bank.capacity(Scheme::zfbf, idx, config.detector, config.budget, config.mean_channel);
            out.no_zfbf[s][d] = bank.capacity(Scheme::no_zfbf, idx, config.detector, config.budget,
                                              config.mean_channel);
        }
    }
    auto best_of = [&](const std::vector<std::vector<EnsembleStats>>& table) {
        std::vector<std::size_t> best;
        for (const auto& row : table) {
            std::vector<double> means;
            for (const auto& e : row) means.push_back(e.mean);
            best.push_back(argmax_first(means));
        }
        return best;
    };
    out.best_zfbf = best_of(out.zfbf);
    out.best_no_zfbf = best_of(out.no_zfbf);
    return out;
}

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k > n) return out;
    std::vector<std::size_t> cur(k);
    for (std::size_t i = 0; i < k; ++i) cur[i] = i;
    for (;;) {
        out.push_back(cur);
        std::size_t i = k;
        while (i > 0 && cur[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

SearchResult search_mode_set(const RealizationBank& bank, int n, Scheme scheme,
                             const DetectorConfig& det, const PowerBudget& budget,
                             bool mean_channel) {
    const std::size_t u = bank.universe().size();
    if (n < 1 || static_cast<std::size_t>(n) > u)
        throw ValidationError("n", "must be between 1 and the number of available modes");
    // The bank's universe is sorted, so index order is mode order.
    std::vector<std::size_t> order(u);
    for (std::size_t i = 0; i < u; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return bank.universe()[a] < bank.universe()[b]; });

    SearchResult res;
    for (const auto& combo : combinations(u, static_cast<std::size_t>(n))) {
        std::vector<std::size_t> idx;
        SearchRow row;
        for (std::size_t c : combo) {
            idx.push_back(order[c]);
            row.modes.push_back(bank.universe()[order[c]]);
        }
        row.stats = bank.capacity(scheme, idx, det, budget, mean_channel);
        res.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < res.rows.size(); ++i)
        if (res.rows[i].stats.mean > res.rows[res.best].stats.mean) res.best = i;
    return res;
}

PowerSweep sweep_power(const std::vector<PowerCurve>& curves, const std::vector<double>& power_dbm,
                       Scheme scheme, const DetectorConfig& det, bool mean_channel) {
    for (std::size_t i = 0; i < power_dbm.size(); ++i) {
        if (std::isnan(power_dbm[i]) || power_dbm[i] == std::numeric_limits<double>::infinity())
            throw ValidationError("power.total_dbm", "sweep powers must be finite or -inf (0 W)");
        if (i > 0 && !(power_dbm[i] > power_dbm[i - 1]))
            throw ValidationError("power.total_dbm", "sweep powers must be strictly increasing");
    }
    PowerSweep out;
    out.power_dbm = power_dbm;
    const std::size_t nc = curves.size();
    const std::size_t np = power_dbm.size();
    out.capacity.assign(nc, std::vector<EnsembleStats>(np));
    for (std::size_t c = 0; c < nc; ++c) {
        if (!curves[c].bank) throw ValidationError("curve", "missing realization bank");
        const auto idx = curves[c].bank->indices_of(curves[c].modes);
        for (std::size_t p = 0; p < np; ++p)
            out.capacity[c][p] = curves[c].bank->capacity(scheme, idx, det,
                                                          {dbm_to_watts(power_dbm[p])}, mean_channel);
    }
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    out.best.assign(np, none);
    for (std::size_t p = 0; p < np; ++p) {
        std::vector<double> means;
        for (std::size_t c = 0; c < nc; ++c) means.push_back(out.capacity[c][p].mean);
        if (means.empty() || *std::max_element(means.begin(), means.end()) <= 0.0) continue;
        out.best[p] = argmax_first(means);
    }
    for (std::size_t p = 1; p < np; ++p) {
        const std::size_t a = out.best[p - 1];
        const std::size_t b = out.best[p];
        if (a == none || b == none || a == b) continue;
        const double da = out.capacity[a][p - 1].mean - out.capacity[b][p - 1].mean;
        const double db = out.capacity[a][p].mean - out.capacity[b][p].mean;
        const double x0 = power_dbm[p - 1];
        const double x1 = power_dbm[p];
        double x = x1;
        if (std::isfinite(x0) && da != db) x = x0 + (x1 - x0) * da / (da - db);
        out.crossovers.push_back({x, a, b});
    }
    return out;
}

}  // namespace smmlink
