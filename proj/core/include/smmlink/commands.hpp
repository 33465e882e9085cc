#pragma once

// Command dispatch for the experiment drivers.  Each command writes a CSV
// table (with provenance preamble) and a key=value summary whose first entry
// is status=ok or status=error.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smmlink/config.hpp"

namespace smmlink {

struct CommandOptions {
    ModeIndex tx{0, 0};
    double beta = 1.0;
    std::optional<double> diameter_mm;   // overrides aperture.diameter_m
    double d_m = 0.0;
    double tilt_mrad = 0.0;
    std::string beta_range = "0.1:4:0.01";
    bool misaligned = false;
    std::string diameter_range_mm = "2:32:1";
    std::vector<int> n_values{1, 2, 3, 4, 5, 6};
    int n = 2;
    std::vector<int> modes{0, 1};        // OAM orders for capacity
    std::string scheme = "zfbf";
    std::string power_range_dbm = "-15:30:1";
    std::size_t realizations = 0;        // 0 uses montecarlo.realizations
    std::vector<double> diameters_mm;    // per-N apertures for sweep-power
    bool search = false;                 // sweep-power: search the mode set per N
};

[[nodiscard]] const std::vector<std::string>& command_names();

/// start:stop:step, inclusive of start and bounded by stop.
[[nodiscard]] std::vector<double> parse_range(const std::string& text);

/// Returns the process exit status: 0 on success, 1 on a failed selftest
/// or any computation error.
int run_command(const std::string& command, const CommandOptions& options,
                const LinkConfig& config, std::ostream& table_out, std::ostream& summary_out);

}  // namespace smmlink
