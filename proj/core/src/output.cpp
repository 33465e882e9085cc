#include "smmlink/output.hpp"

#include <ostream>

#include "smmlink/errors.hpp"

#ifndef SMMLINK_VERSION
#define SMMLINK_VERSION "unknown"
#endif

namespace smmlink {

std::string software_version() { return SMMLINK_VERSION; }

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

Provenance Provenance::from(const std::string& command, const LinkConfig& config) {
    Provenance p;
    p.command = command;
    p.config_hash = smmlink::config_hash(config);
    p.seed = config.seed;
    p.radial_order = config.quadrature.radial_order;
    p.angular_order = config.quadrature.angular_order;
    p.version = software_version();
    return p;
}

void Provenance::write(std::ostream& out) const {
    out << "# software=smmlink " << version << "\n"
        << "# command=" << command << "\n"
        << "# config_hash=" << config_hash << "\n"
        << "# seed=" << seed << "\n"
        << "# quadrature=" << radial_order << "x" << angular_order << "\n";
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << csv_escape(header[i]);
    out_ << "\n";
}

CsvWriter& CsvWriter::cell(const std::string& text) {
    if (filled_ == columns_) throw DimensionMismatch("CSV row has more cells than the header");
    out_ << (filled_ ? "," : "") << csv_escape(text);
    ++filled_;
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
    if (filled_ != columns_) throw DimensionMismatch("CSV row has fewer cells than the header");
    out_ << "\n";
    filled_ = 0;
}

void Summary::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = value;
            return;
        }
    entries_.emplace_back(key, value);
}

void Summary::set(const std::string& key, double value) { set(key, format_double(value)); }

void Summary::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << "=" << v << "\n";
}

std::string mode_set_label(const std::vector<ModeIndex>& modes) {
    std::string out;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (i) out += '|';
        out += std::to_string(modes[i].l);
        if (modes[i].p != 0) out += "p" + std::to_string(modes[i].p);
    }
    return out;
}

}  // namespace smmlink
