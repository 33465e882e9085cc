#include "smmlink/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "smmlink/errors.hpp"

namespace smmlink {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

double parse_double(const std::string& text, int line, const std::string& key) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last)
        throw ParseError(line, key, "expected a number, got '" + text + "'");
    return v;
}

template <typename Int>
Int parse_integer(const std::string& text, int line, const std::string& key) {
    Int v{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last)
        throw ParseError(line, key, "expected an integer, got '" + text + "'");
    return v;
}

struct Key {
    std::function<void(LinkConfig&, const std::string&, int, const std::string&)> set;
    std::function<std::string(const LinkConfig&)> get;
};

template <typename T>
Key real_key(T LinkConfig::*field) {
    return {[field](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                c.*field = parse_double(v, line, k);
            },
            [field](const LinkConfig& c) { return format_double(c.*field); }};
}

template <typename Int>
Key int_key(Int LinkConfig::*field) {
    return {[field](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                c.*field = parse_integer<Int>(v, line, k);
            },
            [field](const LinkConfig& c) { return std::to_string(c.*field); }};
}

template <typename E>
Key enum_key(E LinkConfig::*field, std::vector<std::pair<std::string, E>> names) {
    return {[field, names](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                for (const auto& [name, value] : names)
                    if (name == v) {
                        c.*field = value;
                        return;
                    }
                std::string allowed;
                for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n.first;
                throw ParseError(line, k, "expected one of " + allowed + ", got '" + v + "'");
            },
            [field, names](const LinkConfig& c) {
                for (const auto& [name, value] : names)
                    if (value == c.*field) return name;
                return std::string{};
            }};
}

// Ordered so that serialization lists sections in a fixed order.
const std::vector<std::pair<std::string, Key>>& key_table() {
    static const std::vector<std::pair<std::string, Key>> table = [] {
        std::vector<std::pair<std::string, Key>> t;
        t.emplace_back("beam.wavelength_m", real_key(&LinkConfig::wavelength_m));
        t.emplace_back("beam.waist_m", real_key(&LinkConfig::waist_m));
        t.emplace_back("beam.spot_model",
                       enum_key(&LinkConfig::spot_model,
                                {{"paper", SpotModel::paper}, {"standard", SpotModel::standard}}));
        t.emplace_back("link.distance_m", real_key(&LinkConfig::distance_m));
        t.emplace_back("power.total_dbm", real_key(&LinkConfig::total_dbm));
        t.emplace_back("detector.responsivity_a_per_w", real_key(&LinkConfig::responsivity_a_per_w));
        t.emplace_back("detector.feedback_resistance_ohm",
                       real_key(&LinkConfig::feedback_resistance_ohm));
        t.emplace_back("detector.noise_figure_db", real_key(&LinkConfig::noise_figure_db));
        t.emplace_back("detector.temperature_k", real_key(&LinkConfig::temperature_k));
        t.emplace_back("detector.bandwidth_ghz", real_key(&LinkConfig::bandwidth_ghz));
        t.emplace_back("misalignment.sigma_orient_mrad", real_key(&LinkConfig::sigma_orient_mrad));
        t.emplace_back("misalignment.sigma_aoa_mrad", real_key(&LinkConfig::sigma_aoa_mrad));
        t.emplace_back("misalignment.laser_phases",
                       enum_key(&LinkConfig::laser_phases,
                                {{"single_laser", LaserPhaseModel::single_laser},
                                 {"independent_uniform", LaserPhaseModel::independent_uniform}}));
        t.emplace_back("fiber.backprop_radius_m", real_key(&LinkConfig::backprop_radius_m));
        t.emplace_back("fiber.mode_field_radius_m", real_key(&LinkConfig::mode_field_radius_m));
        t.emplace_back("aperture.diameter_m", real_key(&LinkConfig::diameter_m));
        t.emplace_back("quadrature.radial_order",
                       Key{[](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                            c.quadrature.radial_order = parse_integer<int>(v, line, k);
                        },
                        [](const LinkConfig& c) { return std::to_string(c.quadrature.radial_order); }});
        t.emplace_back("quadrature.angular_order",
                       Key{[](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                            c.quadrature.angular_order = parse_integer<int>(v, line, k);
                        },
                        [](const LinkConfig& c) { return std::to_string(c.quadrature.angular_order); }});
        t.emplace_back("quadrature.rel_tol",
                       Key{[](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                            c.quadrature.rel_tol = parse_double(v, line, k);
                        },
                        [](const LinkConfig& c) { return format_double(c.quadrature.rel_tol); }});
        t.emplace_back("quadrature.max_doublings",
                       Key{[](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                            c.quadrature.max_doublings = parse_integer<int>(v, line, k);
                        },
                        [](const LinkConfig& c) { return std::to_string(c.quadrature.max_doublings); }});
        t.emplace_back("quadrature.angular_rule",
                       Key{[](LinkConfig& c, const std::string& v, int line, const std::string& k) {
                            if (v == "trapezoid") c.quadrature.angular_rule = AngularRule::trapezoid;
                            else if (v == "gauss_legendre")
                                c.quadrature.angular_rule = AngularRule::gauss_legendre;
                            else
                                throw ParseError(line, k,
                                                 "expected trapezoid or gauss_legendre, got '" + v + "'");
                        },
                        [](const LinkConfig& c) { return to_string(c.quadrature.angular_rule); }});
        t.emplace_back("expectation.estimator",
                       enum_key(&LinkConfig::estimator, {{"quadrature", Estimator::quadrature},
                                                         {"monte_carlo", Estimator::monte_carlo}}));
        t.emplace_back("expectation.order", int_key(&LinkConfig::expectation_order));
        t.emplace_back("expectation.samples", int_key(&LinkConfig::expectation_samples));
        t.emplace_back("montecarlo.realizations", int_key(&LinkConfig::realizations));
        t.emplace_back("montecarlo.final_realizations", int_key(&LinkConfig::final_realizations));
        t.emplace_back("montecarlo.averaging",
                       enum_key(&LinkConfig::averaging,
                                {{"per_realization", Averaging::per_realization},
                                 {"mean_channel", Averaging::mean_channel}}));
        t.emplace_back("run.seed", int_key(&LinkConfig::seed));
        return t;
    }();
    return table;
}

const Key* find_key(const std::string& name) {
    for (const auto& [k, v] : key_table())
        if (k == name) return &v;
    return nullptr;
}

void require(bool ok, const char* field, const std::string& bound) {
    if (!ok) throw ValidationError(field, bound);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string to_string(Estimator e) {
    return e == Estimator::quadrature ? "quadrature" : "monte_carlo";
}

std::string to_string(LaserPhaseModel m) {
    return m == LaserPhaseModel::single_laser ? "single_laser" : "independent_uniform";
}

std::string to_string(Averaging a) {
    return a == Averaging::per_realization ? "per_realization" : "mean_channel";
}

std::string to_string(AngularRule r) {
    return r == AngularRule::trapezoid ? "trapezoid" : "gauss_legendre";
}

void LinkConfig::validate() const {
    require(positive(wavelength_m), "beam.wavelength_m", "must be finite and > 0");
    require(positive(waist_m), "beam.waist_m", "must be finite and > 0");
    require(distance_m >= 0.0 && std::isfinite(distance_m), "link.distance_m",
            "must be finite and >= 0");
    require(std::isfinite(total_dbm) && total_dbm >= -60.0 && total_dbm <= 60.0,
            "power.total_dbm", "must lie in [-60, 60]");
    require(positive(responsivity_a_per_w), "detector.responsivity_a_per_w", "must be > 0");
    require(positive(feedback_resistance_ohm), "detector.feedback_resistance_ohm", "must be > 0");
    require(noise_figure_db >= 0.0 && std::isfinite(noise_figure_db), "detector.noise_figure_db",
            "must be finite and >= 0");
    require(positive(temperature_k), "detector.temperature_k", "must be > 0");
    require(positive(bandwidth_ghz), "detector.bandwidth_ghz", "must be > 0");
    // Tilts stay in the small-angle regime (well below 0.1 rad even at 5 sigma).
    require(sigma_orient_mrad >= 0.0 && sigma_orient_mrad <= 10.0,
            "misalignment.sigma_orient_mrad", "must lie in [0, 10]");
    require(sigma_aoa_mrad >= 0.0 && sigma_aoa_mrad <= 10.0, "misalignment.sigma_aoa_mrad",
            "must lie in [0, 10]");
    require(positive(backprop_radius_m), "fiber.backprop_radius_m", "must be > 0");
    require(positive(mode_field_radius_m), "fiber.mode_field_radius_m", "must be > 0");
    require(positive(diameter_m), "aperture.diameter_m", "must be > 0");
    quadrature.validate();
    require(expectation_order >= 2 && expectation_order <= 256, "expectation.order",
            "must lie in [2, 256]");
    require(expectation_samples >= 100, "expectation.samples", "must be >= 100");
    require(realizations >= 100, "montecarlo.realizations", "must be >= 100");
    require(final_realizations >= 100, "montecarlo.final_realizations", "must be >= 100");
}

BeamSource LinkConfig::source() const {
    BeamSource s;
    s.wavelength = wavelength_m;
    s.waist = waist_m;
    s.distance = distance_m;
    s.spot_model = spot_model;
    return s;
}

MisalignmentStats LinkConfig::misalignment() const {
    return {sigma_orient_mrad * 1e-3, sigma_aoa_mrad * 1e-3, distance_m};
}

DetectorConfig LinkConfig::detector() const {
    DetectorConfig d;
    d.responsivity = responsivity_a_per_w;
    d.feedback_resistance = feedback_resistance_ohm;
    d.noise_figure_db = noise_figure_db;
    d.temperature = temperature_k;
    d.bandwidth = bandwidth_ghz * 1e9;
    return d;
}

PowerBudget LinkConfig::budget() const { return PowerBudget::from_dbm(total_dbm); }

ExpectationOptions LinkConfig::expectation() const {
    ExpectationOptions o;
    o.estimator = estimator;
    o.order = expectation_order;
    o.samples = expectation_samples;
    o.seed = seed;
    return o;
}

FiberSpec LinkConfig::efficiency_fiber() const {
    return FiberSpec::from_backprop_radius(backprop_radius_m, six_mode_fiber());
}

EnsembleConfig LinkConfig::ensemble(std::vector<ModeIndex> mode_set, double diameter) const {
    EnsembleConfig e;
    e.source = source();
    e.fiber = FiberSpec::from_optics(wavelength_m, mode_field_radius_m, diameter, oam_fiber_modes(6));
    e.mode_field_radius = mode_field_radius_m;
    e.mode_set = std::move(mode_set);
    e.diameter = diameter;
    e.detector = detector();
    e.budget = budget();
    e.quadrature = quadrature;
    e.phases = laser_phases;
    e.mean_channel = averaging == Averaging::mean_channel;
    return e;
}

bool operator==(const LinkConfig& a, const LinkConfig& b) {
    for (const auto& [name, key] : key_table())
        if (key.get(a) != key.get(b)) return false;
    return true;
}

LinkConfig parse_config(const std::string& text) {
    LinkConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::map<std::string, int> seen;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(line, "", "unterminated section header");
            section = trim(std::string_view(s).substr(1, s.size() - 2));
            if (section.empty() || section.find_first_of(" \t.=") != std::string::npos)
                throw ParseError(line, "", "bad section name '" + section + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line, "", "expected 'key = value'");
        std::string key = trim(std::string_view(s).substr(0, eq));
        std::string value = trim(std::string_view(s).substr(eq + 1));
        // Trailing comments after the value.
        if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
        if (key.empty()) throw ParseError(line, "", "missing key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        const std::string full = section.empty() ? key : section + "." + key;
        const Key* k = find_key(full);
        if (!k) throw ParseError(line, full, "unknown key");
        if (const auto it = seen.find(full); it != seen.end())
            throw ParseError(line, full, "duplicate key (first set on line " +
                                             std::to_string(it->second) + ")");
        seen[full] = line;
        if (value.empty()) throw ParseError(line, full, "missing value");
        k->set(cfg, value, line, full);
    }
    cfg.validate();
    return cfg;
}

LinkConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "", "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const LinkConfig& config) {
    std::string out;
    std::string section;
    for (const auto& [name, key] : key_table()) {
        const auto dot = name.find('.');
        const std::string sec = name.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out += '\n';
            out += "[" + sec + "]\n";
            section = sec;
        }
        out += name.substr(dot + 1) + " = " + key.get(config) + "\n";
    }
    return out;
}

std::string config_hash(const LinkConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_config(config)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    return out;
}

}  // namespace smmlink
