// Reproduces the published link study and prints one PASS/FAIL line per
// criterion.  Advisory comparisons print MATCH/DIFFER and never fail the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "smmlink/channel.hpp"
#include "smmlink/config.hpp"
#include "smmlink/coupling.hpp"
#include "smmlink/errors.hpp"
#include "smmlink/link_capacity.hpp"
#include "smmlink/optimize.hpp"
#include "smmlink/output.hpp"
#include "smmlink/selftest.hpp"

using namespace smmlink;
using cplx = std::complex<double>;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void verdict(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

void advisory(int id, bool match, const std::string& detail) {
    std::printf("advisory %d: %s  %s\n", id, match ? "MATCH" : "DIFFER", detail.c_str());
    std::fflush(stdout);
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

// Root of e^{b^2} = 1 + 2 b^2, where d/db [2 (1 - e^{-b^2})^2 / b^2] vanishes.
double far_field_peak_beta() {
    double lo = 0.5, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double f = std::exp(mid * mid) - 1.0 - 2.0 * mid * mid;
        (f < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void criterion_far_field() {
    const auto t0 = Clock::now();
    const double b = far_field_peak_beta();
    const double t = 1.0 - std::exp(-b * b);
    const double eta_oracle = 2.0 * t * t / (b * b);

    // Peak of the library's closed form on a fine grid.
    double best_b = 0.0, best_eta = -1.0, worst_quad = 0.0;
    for (int i = 0; i <= 390000; ++i) {
        const double beta = 0.1 + i * 1e-5;
        const double e = far_field_smf_efficiency(beta);
        if (e > best_eta) best_eta = e, best_b = beta;
    }
    for (double beta : SweepGrid::range("beta", 0.1, 4.0, 0.01).values)
        worst_quad = std::max(worst_quad, std::abs(far_field_smf_efficiency_quadrature(beta) -
                                                   far_field_smf_efficiency(beta)));
    const double secs = since(t0);
    const bool pass = near(best_eta, eta_oracle, 1e-9) && near(best_b, b, 2e-5) &&
                      near(best_eta, 0.8145, 5e-5) && near(best_b, 1.1209, 5e-5) &&
                      near(best_eta, 0.81, 0.005) && near(best_b, 1.12, 0.005) && worst_quad < 1e-10 &&
                      secs < 1.0;
    verdict(1, pass,
            fmt("peak eta=%.5f at beta=%.4f (oracle %.5f at %.4f); quadrature max diff %.2e; %.2f s",
                best_eta, best_b, eta_oracle, b, worst_quad, secs));
}

struct Peak {
    double beta, eta;
};

Peak peak_of(const BetaSweep& s, std::size_t fiber_index) {
    return {s.peaks.at(fiber_index).beta, s.peaks.at(fiber_index).eta};
}

std::size_t fiber_index(const BetaSweep& s, ModeIndex m) {
    for (std::size_t k = 0; k < s.fiber_modes.size(); ++k)
        if (s.fiber_modes[k] == m) return k;
    throw DimensionMismatch("fiber mode missing from sweep");
}

void criterion_aligned(const LinkConfig& c) {
    const FiberSpec fiber = c.efficiency_fiber();
    const auto grid = SweepGrid::range("beta", 0.1, 4.0, 0.01);
    std::vector<BetaSweep> sweeps;
    double slowest = 0.0;
    for (ModeIndex tx : {ModeIndex{0, 0}, ModeIndex{0, 1}, ModeIndex{0, 2}}) {
        const auto t0 = Clock::now();
        const std::vector<ModeIndex> one{tx};
        sweeps.push_back(sweep_beta(c.source(), one, fiber, grid, false, c.misalignment(), {}, c.quadrature).front());
        slowest = std::max(slowest, since(t0));
    }
    double cross = 0.0;
    for (const auto& s : sweeps)
        for (std::size_t k = 0; k < s.fiber_modes.size(); ++k)
            if (s.fiber_modes[k].l != s.tx.l)
                for (const auto& row : s.eta) cross = std::max(cross, row[k]);

    const Peak p00 = peak_of(sweeps[0], fiber_index(sweeps[0], {0, 0}));
    const Peak p02 = peak_of(sweeps[0], fiber_index(sweeps[0], {1, 0}));
    const Peak p11 = peak_of(sweeps[1], fiber_index(sweeps[1], {0, 1}));
    const std::size_t at22 = std::lround((2.2 - 0.1) / 0.01);
    const double eta02_at22 = sweeps[0].eta.at(at22)[fiber_index(sweeps[0], {1, 0})];
    const bool ok00 = near(p00.eta, 0.74, 0.02) && near(p00.beta, 1.01, 0.05);
    const bool ok02 = near(p02.eta, 0.166, 0.01) && near(p02.beta, 2.2, 0.1);
    const bool ok11 = near(p11.eta, 0.71, 0.02) && near(p11.beta, 1.33, 0.05);
    verdict(2, ok00 && ok02 && ok11 && cross < 1e-8 && slowest < 60.0,
            fmt("LG00->LP01 %.3f at %.2f [%s]; LG00->LP02 %.3f at %.2f [%s] (%.3f at 2.2); LG01->LP11 %.3f at %.2f [%s]; "
                "max cross-azimuthal eta %.1e; slowest curve %.1f s",
                p00.eta, p00.beta, ok00 ? "ok" : "off", p02.eta, p02.beta, ok02 ? "ok" : "off", eta02_at22, p11.eta,
                p11.beta, ok11 ? "ok" : "off", cross, slowest));

    // The printed LG02 optimum reads "beta 0.66 ... efficiency 1.54"; both orders are compared.
    const Peak p21 = peak_of(sweeps[2], fiber_index(sweeps[2], {0, 2}));
    advisory(2, near(p21.beta, 1.54, 0.05) || near(p21.beta, 0.66, 0.05),
             fmt("LG02->LP21 aligned peak %.3f at beta %.2f (printed pair 0.66 / 1.54)", p21.eta, p21.beta));
}

void criterion_misaligned(const LinkConfig& c) {
    const auto t0 = Clock::now();
    const FiberSpec fiber = c.efficiency_fiber();
    const auto grid = SweepGrid::range("beta", 0.4, 2.2, 0.01);
    const std::vector<ModeIndex> tx{{0, 0}, {0, 1}, {0, 2}};
    const auto sweeps = sweep_beta(c.source(), tx, fiber, grid, true, c.misalignment(), c.expectation(), c.quadrature);
    const double secs = since(t0);

    const auto& s00 = sweeps[0];
    const Peak p00 = peak_of(s00, fiber_index(s00, {0, 0}));
    const Peak p11 = peak_of(sweeps[1], fiber_index(sweeps[1], {0, 1}));
    const Peak p21 = peak_of(sweeps[2], fiber_index(sweeps[2], {0, 2}));
    const std::size_t at = std::find(s00.beta.begin(), s00.beta.end(), p00.beta) - s00.beta.begin();
    const double leak11 = s00.eta[at][fiber_index(s00, {0, 1})];
    const double leak21 = s00.eta[at][fiber_index(s00, {0, 2})];

    const bool ok00 = near(p00.eta, 0.29, 0.03) && near(p00.beta, 0.77, 0.1);
    const bool ok11 = near(p11.eta, 0.20, 0.02) && near(p11.beta, 1.28, 0.1);
    const bool ok21 = near(p21.eta, 0.15, 0.02) && near(p21.beta, 1.63, 0.1);
    const bool leak = near(leak11, 0.11, 0.02) && near(leak21, 0.05, 0.02);
    verdict(3, ok00 && ok11 && ok21 && leak && secs < 600.0,
            fmt("LG00->LP01 %.3f at %.2f [%s]; LG01->LP11 %.3f at %.2f [%s]; LG02->LP21 %.3f at %.2f [%s]; "
                "leakage LP11 %.1f%% LP21 %.1f%% [%s]; %.0f s",
                p00.eta, p00.beta, ok00 ? "ok" : "off", p11.eta, p11.beta, ok11 ? "ok" : "off", p21.eta,
                p21.beta, ok21 ? "ok" : "off", 100 * leak11, 100 * leak21, leak ? "ok" : "off", secs));
}

void criterion_zfbf_identity(const LinkConfig& c) {
    const auto modes = first_oam_modes(4);
    const double diameter = 19e-3;
    const auto ens = c.ensemble(modes, diameter);
    const MisalignmentStats stats = c.misalignment();
    const FiberSpec fiber = fiber_for_aperture(ens, diameter);
    const auto rows = matching_fiber_modes(modes, fiber);
    const ChannelSampler sampler(ens.source, modes, fiber, rows, diameter, ens.quadrature);
    const double xi_t = ens.budget.total;

    // Transmit amplitudes from a generator the library does not use.
    std::mt19937_64 rng(20240607);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto rayleigh_amp = [&](double mean_square) { return std::sqrt(-mean_square * std::log(1.0 - u(rng))); };

    double worst = 0.0, power = 0.0;
    std::size_t used = 0, singular = 0, draws = 0;
    for (std::size_t j = 0; j < 1000; ++j) {
        const Misalignment m = misalignment_at(stats, c.seed, j);
        const auto ch = make_channel(sampler.couplings(m.displacement, m.tilt), modes, rows);
        Precoder pre;
        double xi = 0.0;
        try {
            pre = zfbf_precoder(ch.H_est);
            xi = zfbf_power_allocation(pre.inverse, xi_t);
        } catch (const SingularChannel&) {
            ++singular;
            continue;
        } catch (const NegativeBudgetDenominator&) {
            ++singular;
            continue;
        }
        ++used;
        const auto& P = pre.inverse;
        for (int rep = 0; rep < 100; ++rep) {
            std::vector<cplx> s(4);
            double s2 = 0.0;
            for (auto& v : s) {
                v = rayleigh_amp(xi);
                s2 += std::norm(v);
            }
            // x = P s, y = H x, by explicit sums.
            std::vector<cplx> x(4), y(4);
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t k = 0; k < 4; ++k) x[i] += P(i, k) * s[k];
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t k = 0; k < 4; ++k) y[i] += ch.H(i, k) * x[k];
            for (std::size_t k = 0; k < 4; ++k) {
                worst = std::max(worst, std::abs(std::norm(y[k]) - std::norm(s[k])) / s2);
                power += std::norm(x[k]);
            }
            ++draws;
        }
    }
    const double mean_power = power / static_cast<double>(draws);
    const bool pass = used > 0 && worst < 1e-8 && near(mean_power / xi_t, 1.0, 0.01);
    verdict(4, pass,
            fmt("%zu realizations (%zu singular), max ||H P s|^2 - |s|^2| / |s|^2 = %.1e; "
                "mean transmitted power / xi_t = %.4f",
                used, singular, worst, mean_power / xi_t));
}

void criterion_orthogonality(const LinkConfig& c) {
    const auto modes = first_oam_modes(6);
    const double diameter = 24e-3;
    const auto ens = c.ensemble(modes, diameter);
    const FiberSpec fiber = fiber_for_aperture(ens, diameter);
    const auto ch = build_channel_matrix(ens.source, modes, fiber, diameter, Misalignment{}, ens.quadrature);
    double off = 0.0;
    for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t i = 0; i < 6; ++i)
            if (k != i) off = std::max(off, std::abs(ch.H(k, i)));
    const double zf = capacity_zfbf(ch.H, ch.H_est, ens.detector, ens.budget).aggregate;
    const double ci = capacity_no_zfbf(ch.H, ens.detector, ens.budget).aggregate;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
        lo = std::min(lo, std::abs(ch.H(k, k)));
        hi = std::max(hi, std::abs(ch.H(k, k)));
    }
    verdict(5, off < 1e-8 && near(zf / ci, 1.0, 1e-3),
            fmt("D=24 mm: max off-diagonal |H| %.1e; C_ZF %.4g vs C_I %.4g b/s (ratio %.4f); "
                "diagonal |h_kk| spans %.3f..%.3f",
                off, zf, ci, zf / ci, lo, hi));
}

// Shared Monte-Carlo banks over the OAM universe 0..5, one per diameter.
struct Study {
    LinkConfig config;
    EnsembleConfig ens;
    std::vector<double> diameters;
    std::vector<std::unique_ptr<RealizationBank>> banks;
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_capacity(const RealizationBank& bank, Scheme scheme, const std::vector<std::size_t>& subset,
                     const Study& st, const PowerBudget& budget) {
    try {
        return bank.capacity(scheme, subset, st.ens.detector, budget).mean;
    } catch (const FractionSingular&) {
        return kNaN;
    }
}

std::vector<std::size_t> first_n(int n) {
    std::vector<std::size_t> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

struct Optimum {
    std::size_t diameter = 0;
    std::vector<std::size_t> subset;
    double capacity = -1.0;
};

// Best diameter for the first-N set.
Optimum best_first_n(const Study& st, int n, Scheme scheme) {
    Optimum o;
    o.subset = first_n(n);
    for (std::size_t d = 0; d < st.banks.size(); ++d) {
        const double v = mean_capacity(*st.banks[d], scheme, o.subset, st, st.ens.budget);
        if (v > o.capacity) o.capacity = v, o.diameter = d;
    }
    return o;
}

// Best diameter and mode subset of size N.
Optimum best_any(const Study& st, int n, Scheme scheme) {
    Optimum o;
    for (std::size_t d = 0; d < st.banks.size(); ++d)
        for (const auto& subset : combinations(6, n)) {
            const double v = mean_capacity(*st.banks[d], scheme, subset, st, st.ens.budget);
            if (v > o.capacity) o.capacity = v, o.diameter = d, o.subset = subset;
        }
    return o;
}

std::string label(const std::vector<std::size_t>& subset) {
    std::string s;
    for (std::size_t i : subset) s += (s.empty() ? "" : "|") + std::to_string(i);
    return s;
}

void criterion_aperture(const Study& st, std::vector<Optimum>& zf_first) {
    const double targets[6] = {6, 12, 15, 19, 22, 24};
    std::string detail = "optimal D (mm) by N:";
    bool increasing = true, within = true;
    for (int n = 1; n <= 6; ++n) {
        zf_first.push_back(best_first_n(st, n, Scheme::zfbf));
        const double mm = st.diameters[zf_first.back().diameter] * 1e3;
        detail += fmt(" %g", mm);
        within = within && near(mm, targets[n - 1], 3.0);
        if (n > 1) increasing = increasing && mm > st.diameters[zf_first[n - 2].diameter] * 1e3;
    }
    detail += " (published 6 12 15 19 22 24)";
    verdict(6, increasing && within,
            detail + (increasing ? "; increasing" : "; not increasing") + (within ? "" : "; outside +-3 mm"));

    const double start = mean_capacity(*st.banks.front(), Scheme::zfbf, first_n(1), st, st.ens.budget);
    advisory(6, start >= 0.05e12 && start <= 0.5e12,
             fmt("N=1 capacity at D=%g mm is %.3f Tb/s (published start 0.18); N=1 peak %.3f Tb/s",
                 st.diameters.front() * 1e3, start * 1e-12, zf_first[0].capacity * 1e-12));
}

void criterion_search(const Study& st, const std::vector<Optimum>& zf_first) {
    bool zero_everywhere = true;
    std::string detail = "ZFBF best sets at the first-N optimal D:";
    std::vector<std::string> zf_best;
    for (int n = 1; n <= 6; ++n) {
        const auto& bank = *st.banks[zf_first[n - 1].diameter];
        const auto r = search_mode_set(bank, n, Scheme::zfbf, st.ens.detector, st.ens.budget);
        const auto& modes = r.best_row().modes;
        zero_everywhere = zero_everywhere && std::find(modes.begin(), modes.end(), ModeIndex{0, 0}) != modes.end();
        zf_best.push_back(mode_set_label(modes));
        detail += " N" + std::to_string(n) + "=" + zf_best.back();
    }
    verdict(7, zero_everywhere, detail + (zero_everywhere ? "; mode 0 always selected" : "; mode 0 missing"));

    advisory(7, zf_best[1] == "0|1", "ZFBF N=2 best " + zf_best[1] + " (published 0|1)");
    for (int n : {3, 4}) {
        const auto opt = best_first_n(st, n, Scheme::no_zfbf);
        const auto r = search_mode_set(*st.banks[opt.diameter], n, Scheme::no_zfbf, st.ens.detector, st.ens.budget);
        const std::string got = mode_set_label(r.best_row().modes);
        const std::string want = n == 3 ? "0|4|5" : "0|3|4|5";
        // Also with the diameter chosen jointly with the set.
        const auto joint = best_any(st, n, Scheme::no_zfbf);
        advisory(7, got == want || label(joint.subset) == want,
                 fmt("no-ZFBF N=%d best %s at the first-N optimum D=%g mm, %s at the joint optimum D=%g mm "
                     "(published %s)",
                     n, got.c_str(), st.diameters[opt.diameter] * 1e3, label(joint.subset).c_str(),
                     st.diameters[joint.diameter] * 1e3, want.c_str()));
    }
}

void criterion_gain(const Study& st) {
    std::vector<Optimum> zf, ci;
    for (int n = 1; n <= 6; ++n) {
        zf.push_back(best_any(st, n, Scheme::zfbf));
        ci.push_back(best_any(st, n, Scheme::no_zfbf));
    }
    std::string detail = "gain C_ZF/C_I-1 by N:";
    bool positive = true;
    std::vector<double> gain(7, 0.0);
    for (int n = 2; n <= 6; ++n) {
        gain[n] = zf[n - 1].capacity / ci[n - 1].capacity - 1.0;
        positive = positive && gain[n] > 0.0;
        detail += fmt(" %d:%+.0f%%", n, 100 * gain[n]);
    }
    const bool g3 = gain[3] >= 0.25, g6 = gain[6] >= 1.0;

    // Saturation without precoding and monotone ZFBF, each at its own optimum.
    const auto powers = SweepGrid::range("power", -15, 30, 1).values;
    bool saturates = true, monotone = true;
    double worst_growth = 0.0;
    for (int n = 2; n <= 6; ++n) {
        const auto& o = ci[n - 1];
        const auto& bank = *st.banks[o.diameter];
        const double c25 = mean_capacity(bank, Scheme::no_zfbf, o.subset, st, PowerBudget::from_dbm(25));
        const double c30 = mean_capacity(bank, Scheme::no_zfbf, o.subset, st, PowerBudget::from_dbm(30));
        worst_growth = std::max(worst_growth, c30 / c25 - 1.0);
        saturates = saturates && c30 / c25 - 1.0 < 0.05;
    }
    std::vector<PowerCurve> curves;
    for (int n = 1; n <= 6; ++n) {
        std::vector<ModeIndex> modes;
        for (std::size_t i : zf[n - 1].subset) modes.push_back(st.banks[zf[n - 1].diameter]->universe()[i]);
        curves.push_back({modes, st.banks[zf[n - 1].diameter].get()});
    }
    const auto sweep = sweep_power(curves, powers, Scheme::zfbf, st.ens.detector);
    for (const auto& curve : sweep.capacity)
        for (std::size_t p = 1; p < curve.size(); ++p) monotone = monotone && curve[p].mean > curve[p - 1].mean;

    verdict(8, positive && g3 && g6 && saturates && monotone,
            detail + fmt(" [N>=2 %s, N3>=25%% %s, N6>=100%% %s]; C_I growth 25->30 dBm max %.1f%% [%s]; "
                         "C_ZF increasing over -15..30 dBm [%s]",
                         positive ? "ok" : "off", g3 ? "ok" : "off", g6 ? "ok" : "off", 100 * worst_growth,
                         saturates ? "ok" : "off", monotone ? "ok" : "off"));

    std::string seq = std::to_string(sweep.best.front() + 1);
    std::string at;
    for (const auto& x : sweep.crossovers) {
        seq += "->" + std::to_string(x.to + 1);
        at += fmt("%s%.1f", at.empty() ? "" : ",", x.power_dbm);
    }
    bool match = seq == "1->2->4->5";
    const double want[3] = {4, 9, 11};
    for (std::size_t i = 0; match && i < 3; ++i) match = near(sweep.crossovers[i].power_dbm, want[i], 2.0);
    advisory(8, match, "ZFBF best N over power " + seq + " at " + (at.empty() ? "-" : at) +
                           " dBm (published 1->2->4->5 at 4,9,11)");
    for (int n = 1; n <= 6; ++n)
        std::printf("  N=%d  ZFBF %.3f Tb/s (D=%g mm, modes %s)  no-ZFBF %.3f Tb/s (D=%g mm, modes %s)\n", n,
                    zf[n - 1].capacity * 1e-12, st.diameters[zf[n - 1].diameter] * 1e3,
                    label(zf[n - 1].subset).c_str(), ci[n - 1].capacity * 1e-12,
                    st.diameters[ci[n - 1].diameter] * 1e3, label(ci[n - 1].subset).c_str());
}

void criterion_selftest(const LinkConfig& c) {
    const auto t0 = Clock::now();
    const auto checks = run_selftest(c);
    const double secs = since(t0);
    std::string failed;
    for (const auto& r : checks)
        if (!r.passed) failed += " " + r.name;
    verdict(9, failed.empty() && secs < 120.0,
            fmt("%zu checks, %.1f s", checks.size(), secs) + (failed.empty() ? "" : "; failed:" + failed));
}

}  // namespace

int main(int argc, char** argv) {
    LinkConfig config;
    std::size_t realizations = 1000;
    if (argc > 1) realizations = std::stoul(argv[1]);
    std::printf("# config_hash=%s realizations=%zu seed=%llu\n", config_hash(config).c_str(), realizations,
                static_cast<unsigned long long>(config.seed));

    const auto run = [](const char* name, const std::function<void()>& f) {
        const auto t0 = Clock::now();
        try {
            f();
        } catch (const std::exception& e) {
            ++failures;
            std::printf("%s: FAIL  threw %s\n", name, e.what());
        }
        std::printf("  (%s took %.1f s)\n", name, since(t0));
    };

    run("criterion 1", [&] { criterion_far_field(); });
    run("criterion 2", [&] { criterion_aligned(config); });
    run("criterion 3", [&] { criterion_misaligned(config); });
    run("criterion 4", [&] { criterion_zfbf_identity(config); });
    run("criterion 5", [&] { criterion_orthogonality(config); });

    Study st;
    st.config = config;
    st.ens = config.ensemble({}, config.diameter_m);
    st.diameters = SweepGrid::range("aperture.diameter_m", 2e-3, 32e-3, 1e-3).values;
    run("capacity banks", [&] {
        for (double d : st.diameters)
            st.banks.push_back(std::make_unique<RealizationBank>(config.ensemble({}, d), first_oam_modes(6), d,
                                                                 config.misalignment(), realizations, config.seed));
    });
    if (st.banks.size() == st.diameters.size()) {
        std::vector<Optimum> zf_first;
        run("criterion 6", [&] { criterion_aperture(st, zf_first); });
        run("criterion 7", [&] {
            if (zf_first.size() != 6) throw std::runtime_error("needs the criterion 6 optima");
            criterion_search(st, zf_first);
        });
        run("criterion 8", [&] { criterion_gain(st); });
    }
    run("criterion 9", [&] { criterion_selftest(config); });

    std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "PASSED", failures);
    return failures ? 1 : 0;
}
