#include "smmlink/commands.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <ostream>
#include <sstream>

#include "smmlink/errors.hpp"
#include "smmlink/optimize.hpp"
#include "smmlink/output.hpp"
#include "smmlink/selftest.hpp"

namespace smmlink {

namespace {

double parse_number(const std::string& text, const std::string& what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ValidationError(what, "not a number: '" + text + "'");
    return v;
}

std::vector<ModeIndex> oam_set(const std::vector<int>& orders) {
    std::vector<ModeIndex> out;
    for (int l : orders) {
        if (l < 0 || l > 5) throw ValidationError("modes", "OAM orders must lie in 0..5");
        out.push_back({0, l});
    }
    return out;
}

std::size_t realizations_of(const CommandOptions& o, const LinkConfig& c) {
    return o.realizations ? o.realizations : c.realizations;
}

double fiber_diameter(const CommandOptions& o, const FiberSpec& fiber) {
    return o.diameter_mm ? *o.diameter_mm * 1e-3 : 2.0 * o.beta * fiber.backprop_radius;
}

void efficiency(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    const FiberSpec fiber = c.efficiency_fiber();
    const double diameter = fiber_diameter(o, fiber);
    const BeamGeometry geom = c.source().geometry(o.tx);
    const ApertureSpec ap = ApertureSpec::make(diameter, fiber.focal_length, fiber, geom);
    CsvWriter csv(table, {"fiber_mode", "eta", "h_re", "h_im", "aperture_power"});
    double total = 0.0;
    for (const ModeIndex& m : fiber.supported_modes) {
        const CouplingResult r =
            couple(geom, m, fiber, ap, o.d_m, o.tilt_mrad * 1e-3, c.quadrature);
        csv.cell(m.lp_label()).cell(r.efficiency).cell(r.h.real()).cell(r.h.imag())
            .cell(r.aperture_power).end_row();
        total += r.efficiency;
    }
    s.set("tx", o.tx.lg_label());
    s.set("beta", ap.beta);
    s.set("diameter_m", diameter);
    s.set("eta_total", total);
}

void expected(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    const FiberSpec fiber = c.efficiency_fiber();
    const double diameter = fiber_diameter(o, fiber);
    const auto e = expected_efficiency(c.source().geometry(o.tx), fiber, fiber.supported_modes,
                                       diameter, c.misalignment(), c.expectation(), c.quadrature);
    CsvWriter csv(table, {"fiber_mode", "eta", "std_error"});
    for (std::size_t k = 0; k < fiber.supported_modes.size(); ++k)
        csv.cell(fiber.supported_modes[k].lp_label()).cell(e.mean[k]).cell(e.std_error[k]).end_row();
    s.set("tx", o.tx.lg_label());
    s.set("beta", diameter / (2.0 * fiber.backprop_radius));
    s.set("estimator", to_string(c.estimator));
}

void beta_sweep(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    const FiberSpec fiber = c.efficiency_fiber();
    SweepGrid grid;
    grid.axis = "beta";
    grid.values = parse_range(o.beta_range);
    const std::vector<ModeIndex> tx{o.tx};
    const auto sweep = sweep_beta(c.source(), tx, fiber, grid, o.misaligned, c.misalignment(),
                                  c.expectation(), c.quadrature)
                           .front();
    std::vector<std::string> header{"beta"};
    for (const auto& m : sweep.fiber_modes) header.push_back("eta_" + m.lp_label());
    CsvWriter csv(table, header);
    for (std::size_t b = 0; b < sweep.beta.size(); ++b) {
        csv.cell(sweep.beta[b]);
        for (double v : sweep.eta[b]) csv.cell(v);
        csv.end_row();
    }
    s.set("tx", o.tx.lg_label());
    s.set("misaligned", o.misaligned ? "true" : "false");
    for (std::size_t k = 0; k < sweep.fiber_modes.size(); ++k) {
        const std::string label = sweep.fiber_modes[k].lp_label();
        s.set("peak_beta_" + label, sweep.peaks[k].beta);
        s.set("peak_eta_" + label, sweep.peaks[k].eta);
    }
}

SweepGrid diameter_grid(const CommandOptions& o) {
    SweepGrid grid;
    grid.axis = "aperture.diameter_m";
    grid.constraint = "f=D";
    for (double mm : parse_range(o.diameter_range_mm)) grid.values.push_back(mm * 1e-3);
    return grid;
}

// Per-N optimal aperture over the diameter grid, first-N OAM mode sets.
std::vector<double> optimal_diameters(const CommandOptions& o, const LinkConfig& c,
                                      const std::vector<int>& ns, Scheme scheme) {
    if (o.diameter_mm) return std::vector<double>(ns.size(), *o.diameter_mm * 1e-3);
    if (!o.diameters_mm.empty()) {
        if (o.diameters_mm.size() != ns.size())
            throw ValidationError("diameters-mm", "need one diameter per N");
        std::vector<double> out;
        for (double mm : o.diameters_mm) out.push_back(mm * 1e-3);
        return out;
    }
    std::vector<std::vector<ModeIndex>> sets;
    for (int n : ns) sets.push_back(first_oam_modes(n));
    const auto sweep = sweep_aperture(c.ensemble({}, c.diameter_m), sets, diameter_grid(o),
                                      c.misalignment(), realizations_of(o, c), c.seed);
    const auto& best = scheme == Scheme::zfbf ? sweep.best_zfbf : sweep.best_no_zfbf;
    std::vector<double> out;
    for (std::size_t i : best) out.push_back(sweep.diameter[i]);
    return out;
}

void aperture_sweep(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    std::vector<std::vector<ModeIndex>> sets;
    for (int n : o.n_values) sets.push_back(first_oam_modes(n));
    const auto sweep = sweep_aperture(c.ensemble({}, c.diameter_m), sets, diameter_grid(o),
                                      c.misalignment(), realizations_of(o, c), c.seed);
    CsvWriter csv(table, {"n", "modes", "diameter_mm", "capacity_zfbf_bps", "std_error_zfbf",
                          "singular_zfbf", "capacity_no_zfbf_bps", "std_error_no_zfbf"});
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t d = 0; d < sweep.diameter.size(); ++d) {
            const auto& z = sweep.zfbf[i][d];
            const auto& n = sweep.no_zfbf[i][d];
            csv.cell(sets[i].size()).cell(mode_set_label(sets[i])).cell(sweep.diameter[d] * 1e3)
                .cell(z.mean).cell(z.std_error).cell(z.singular).cell(n.mean).cell(n.std_error)
                .end_row();
        }
        const std::string n = std::to_string(sets[i].size());
        s.set("best_diameter_mm_zfbf_n" + n, sweep.diameter[sweep.best_zfbf[i]] * 1e3);
        s.set("best_capacity_zfbf_n" + n, sweep.zfbf[i][sweep.best_zfbf[i]].mean);
        s.set("best_diameter_mm_no_zfbf_n" + n, sweep.diameter[sweep.best_no_zfbf[i]] * 1e3);
        s.set("best_capacity_no_zfbf_n" + n, sweep.no_zfbf[i][sweep.best_no_zfbf[i]].mean);
    }
    s.set("realizations", static_cast<double>(realizations_of(o, c)));
}

void capacity_cmd(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    const auto modes = oam_set(o.modes);
    const double diameter = o.diameter_mm ? *o.diameter_mm * 1e-3 : c.diameter_m;
    const auto cfg = c.ensemble(modes, diameter);
    const RealizationBank bank(cfg, modes, diameter, c.misalignment(), realizations_of(o, c), c.seed);
    std::vector<std::size_t> idx(modes.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    CsvWriter csv(table, {"scheme", "modes", "diameter_mm", "capacity_bps", "std_error", "used",
                          "singular"});
    for (Scheme sc : {Scheme::zfbf, Scheme::no_zfbf}) {
        const auto st = bank.capacity(sc, idx, cfg.detector, cfg.budget, cfg.mean_channel);
        csv.cell(to_string(sc)).cell(mode_set_label(modes)).cell(diameter * 1e3).cell(st.mean)
            .cell(st.std_error).cell(st.used).cell(st.singular).end_row();
        s.set("capacity_" + to_string(sc) + "_bps", st.mean);
    }
    s.set("modes", mode_set_label(modes));
    s.set("diameter_mm", diameter * 1e3);
}

void search_cmd(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    if (o.n < 1 || o.n > 6) throw ValidationError("n", "must lie in 1..6");
    const Scheme scheme = scheme_from_string(o.scheme);
    const double diameter = optimal_diameters(o, c, {o.n}, scheme).front();
    const auto cfg = c.ensemble({}, diameter);
    const RealizationBank bank(cfg, first_oam_modes(6), diameter, c.misalignment(),
                               realizations_of(o, c), c.seed);
    const auto result = search_mode_set(bank, o.n, scheme, cfg.detector, cfg.budget, cfg.mean_channel);
    CsvWriter csv(table, {"modes", "capacity_bps", "std_error", "singular"});
    for (const auto& row : result.rows)
        csv.cell(mode_set_label(row.modes)).cell(row.stats.mean).cell(row.stats.std_error)
            .cell(row.stats.singular).end_row();
    s.set("scheme", to_string(scheme));
    s.set("n", static_cast<double>(o.n));
    s.set("diameter_mm", diameter * 1e3);
    s.set("best_set", mode_set_label(result.best_row().modes));
    s.set("best_capacity_bps", result.best_row().stats.mean);
    // Re-run the winner on the larger budget; indices are counter-based, so
    // the first realizations are the same ones the search saw.
    const std::size_t final_count = std::max(c.final_realizations, realizations_of(o, c));
    const auto& best = result.best_row().modes;
    const RealizationBank final_bank(cfg, best, diameter, c.misalignment(), final_count, c.seed);
    const auto all = final_bank.indices_of(best);
    const auto stats = final_bank.capacity(scheme, all, cfg.detector, cfg.budget, cfg.mean_channel);
    s.set("final_realizations", static_cast<double>(final_count));
    s.set("final_capacity_bps", stats.mean);
    s.set("final_std_error", stats.std_error);
}

void power_cmd(const CommandOptions& o, const LinkConfig& c, std::ostream& table, Summary& s) {
    const Scheme scheme = scheme_from_string(o.scheme);
    const auto powers = parse_range(o.power_range_dbm);
    const auto diameters = optimal_diameters(o, c, o.n_values, scheme);
    std::vector<std::unique_ptr<RealizationBank>> banks;
    std::vector<PowerCurve> curves;
    for (std::size_t i = 0; i < o.n_values.size(); ++i) {
        const auto cfg = c.ensemble({}, diameters[i]);
        banks.push_back(std::make_unique<RealizationBank>(cfg, first_oam_modes(6), diameters[i],
                                                          c.misalignment(), realizations_of(o, c),
                                                          c.seed));
        std::vector<ModeIndex> modes = first_oam_modes(o.n_values[i]);
        if (o.search)
            modes = search_mode_set(*banks.back(), o.n_values[i], scheme, cfg.detector, cfg.budget,
                                    cfg.mean_channel)
                        .best_row()
                        .modes;
        curves.push_back({modes, banks.back().get()});
    }
    const auto sweep =
        sweep_power(curves, powers, scheme, c.detector(), c.averaging == Averaging::mean_channel);
    CsvWriter csv(table, {"power_dbm", "n", "modes", "diameter_mm", "capacity_bps", "std_error"});
    for (std::size_t p = 0; p < powers.size(); ++p)
        for (std::size_t i = 0; i < curves.size(); ++i)
            csv.cell(powers[p]).cell(curves[i].modes.size()).cell(mode_set_label(curves[i].modes))
                .cell(diameters[i] * 1e3).cell(sweep.capacity[i][p].mean)
                .cell(sweep.capacity[i][p].std_error).end_row();
    std::string cross;
    for (const auto& x : sweep.crossovers) {
        if (!cross.empty()) cross += ';';
        cross += format_double(x.power_dbm) + ":" + std::to_string(curves[x.from].modes.size()) +
                 "->" + std::to_string(curves[x.to].modes.size());
    }
    s.set("scheme", to_string(scheme));
    s.set("crossovers", cross);
}

int selftest_cmd(const LinkConfig& c, std::ostream& table, Summary& s) {
    const auto results = run_selftest(c);
    CsvWriter csv(table, {"check", "passed", "detail", "seconds"});
    std::size_t failed = 0;
    for (const auto& r : results) {
        csv.cell(r.name).cell(r.passed ? "true" : "false").cell(r.detail).cell(r.seconds).end_row();
        if (!r.passed) ++failed;
    }
    s.set("checks", static_cast<double>(results.size()));
    s.set("failed", static_cast<double>(failed));
    return failed == 0 ? 0 : 1;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{
        "efficiency", "expected-efficiency", "sweep-beta", "sweep-aperture",
        "capacity",   "search-modeset",      "sweep-power", "selftest"};
    return names;
}

std::vector<double> parse_range(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ValidationError("range", "expected start:stop:step, got '" + text + "'");
    return SweepGrid::range("range", parse_number(parts[0], "range"), parse_number(parts[1], "range"),
                            parse_number(parts[2], "range"))
        .values;
}

int run_command(const std::string& command, const CommandOptions& options,
                const LinkConfig& config, std::ostream& table_out, std::ostream& summary_out) {
    const Provenance prov = Provenance::from(command, config);
    Summary summary;
    summary.set("status", "ok");
    summary.set("command", command);
    prov.write(table_out);
    int status = 0;
    try {
        config.validate();
        if (command == "efficiency") efficiency(options, config, table_out, summary);
        else if (command == "expected-efficiency") expected(options, config, table_out, summary);
        else if (command == "sweep-beta") beta_sweep(options, config, table_out, summary);
        else if (command == "sweep-aperture") aperture_sweep(options, config, table_out, summary);
        else if (command == "capacity") capacity_cmd(options, config, table_out, summary);
        else if (command == "search-modeset") search_cmd(options, config, table_out, summary);
        else if (command == "sweep-power") power_cmd(options, config, table_out, summary);
        else if (command == "selftest") {
            status = selftest_cmd(config, table_out, summary);
            if (status) summary.set("status", "failed");
        } else throw ValidationError("command", "unknown command '" + command + "'");
    } catch (const std::exception& e) {
        summary.set("status", "error");
        summary.set("message", e.what());
        status = 1;
    }
    table_out.flush();
    prov.write(summary_out);
    summary.write(summary_out);
    summary_out.flush();
    return status;
}

}  // namespace smmlink
