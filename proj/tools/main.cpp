// smmlink command-line front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "smmlink/commands.hpp"
#include "smmlink/errors.hpp"

namespace {

smmlink::ModeIndex parse_tx(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw CLI::ValidationError("--tx", "expected p,l");
    return {std::stoi(text.substr(0, comma)), std::stoi(text.substr(comma + 1))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Misaligned LG-mode coupling and IM/DD link capacity"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string summary_path;
    int threads = 0;
    bool echo_config = false;
    app.add_option("-c,--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    app.add_option("-o,--out", out_path, "CSV table path (default stdout)");
    app.add_option("-s,--summary", summary_path, "Summary path (default stderr)");
    app.add_option("-j,--threads", threads, "Worker threads (default SMMLINK_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--echo-config", echo_config, "Print the effective configuration to stderr");

    smmlink::CommandOptions opt;
    std::string tx = "0,0";
    std::string scheme = "zfbf";
    double diameter_mm = 0.0;

    auto add = [&](const std::string& name, const std::string& help) {
        return app.add_subcommand(name, help);
    };
    auto* eff = add("efficiency", "Aligned or fixed-misalignment coupling into the six-mode fiber");
    auto* exp = add("expected-efficiency", "Ensemble-mean coupling under Rayleigh misalignment");
    auto* beta = add("sweep-beta", "Coupling efficiency against beta = D / (2 w)");
    auto* ap = add("sweep-aperture", "Mean capacity against aperture diameter with f = D");
    auto* cap = add("capacity", "Mean capacity of one mode set with and without ZFBF");
    auto* search = add("search-modeset", "Exhaustive search of the transmitted mode set");
    auto* power = add("sweep-power", "Mean capacity against the total power budget");
    add("selftest", "Analytic-oracle and property checks");

    for (auto* s : {eff, exp, beta}) s->add_option("--tx", tx, "Transmitted LG mode p,l");
    for (auto* s : {eff, exp}) {
        s->add_option("--beta", opt.beta, "Coupling parameter D / (2 w)");
        s->add_option("--diameter-mm", diameter_mm, "Aperture diameter, overrides --beta");
    }
    eff->add_option("--d-m", opt.d_m, "Lateral displacement in m");
    eff->add_option("--tilt-mrad", opt.tilt_mrad, "Angle of arrival in mrad");
    beta->add_option("--beta", opt.beta_range, "Range start:stop:step");
    beta->add_flag("--misaligned", opt.misaligned, "Ensemble mean instead of aligned coupling");
    for (auto* s : {ap, search, power})
        s->add_option("--diameter-range-mm", opt.diameter_range_mm, "Aperture grid start:stop:step");
    for (auto* s : {ap, power}) s->add_option("--n-values", opt.n_values, "Channel counts")->delimiter(',');
    for (auto* s : {cap, search, power})
        s->add_option("--diameter-mm", diameter_mm, "Fixed aperture diameter");
    for (auto* s : {search, power}) s->add_option("--scheme", scheme, "zfbf or no_zfbf");
    for (auto* s : {ap, cap, search, power})
        s->add_option("--realizations", opt.realizations, "Misalignment realizations");
    cap->add_option("--modes", opt.modes, "OAM orders, e.g. 0,1,4")->delimiter(',');
    search->add_option("--n", opt.n, "Channel count")->check(CLI::Range(1, 6));
    power->add_option("--power-dbm", opt.power_range_dbm, "Range start:stop:step");
    power->add_option("--diameters-mm", opt.diameters_mm, "Aperture per N")->delimiter(',');
    power->add_flag("--search", opt.search, "Use the searched mode set for each N");

    CLI11_PARSE(app, argc, argv);

    if (threads > 0) setenv("SMMLINK_THREADS", std::to_string(threads).c_str(), 1);

    smmlink::LinkConfig config;
    try {
        if (!config_path.empty()) config = smmlink::load_config(config_path);
        opt.tx = parse_tx(tx);
        opt.scheme = scheme;
        if (diameter_mm > 0.0) opt.diameter_mm = diameter_mm;
    } catch (const std::exception& e) {
        std::cerr << "status=error\nmessage=" << e.what() << "\n";
        return 2;
    }
    if (echo_config) std::cerr << smmlink::serialize_config(config);

    std::ofstream table_file;
    std::ofstream summary_file;
    if (!out_path.empty()) table_file.open(out_path);
    if (!summary_path.empty()) summary_file.open(summary_path);
    if ((!out_path.empty() && !table_file) || (!summary_path.empty() && !summary_file)) {
        std::cerr << "status=error\nmessage=cannot open output file\n";
        return 2;
    }
    std::ostream& table = out_path.empty() ? std::cout : table_file;
    std::ostream& summary = summary_path.empty() ? std::cerr : summary_file;

    const std::string command = app.get_subcommands().front()->get_name();
    return smmlink::run_command(command, opt, config, table, summary);
}
