#pragma once

// Result serialization: RFC-4180 CSV tables with a '#' provenance preamble,
// and key=value summary blocks.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "smmlink/config.hpp"

namespace smmlink {

[[nodiscard]] std::string software_version();

/// Quotes a field when it holds a comma, quote, CR or LF.
[[nodiscard]] std::string csv_escape(const std::string& field);

struct Provenance {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    int radial_order = 0;
    int angular_order = 0;
    std::string version;

    [[nodiscard]] static Provenance from(const std::string& command, const LinkConfig& config);
    /// "# key=value" lines.
    void write(std::ostream& out) const;
};

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    CsvWriter& cell(const std::string& text);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    /// Ends the row; throws if the cell count differs from the header.
    void end_row();

private:
    std::ostream& out_;
    std::size_t columns_;
    std::size_t filled_ = 0;
};

/// Ordered key=value block.
class Summary {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void write(std::ostream& out) const;
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// "0|1|4" for a mode set of OAM orders.
[[nodiscard]] std::string mode_set_label(const std::vector<ModeIndex>& modes);

}  // namespace smmlink
