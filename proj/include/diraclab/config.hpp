#pragma once

#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diraclab/errors.hpp"
#include "diraclab/problem.hpp"

namespace diraclab {

/// Flat sectioned key-value text. One nesting level only: `[section]` headers
/// followed by `key = value` lines; `#` starts a comment.
struct ParsedConfig {
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::string source = "<config>";

    const Entry* find(const std::string& section, const std::string& key) const {
        auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }

    const Entry& require(const std::string& section, const std::string& key) const {
        const Entry* e = find(section, key);
        if (!e)
            throw ConfigError(source + ": missing key '" + key + "' in [" + section + "]");
        return *e;
    }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace config_detail

inline ParsedConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    ParsedConfig cfg;
    cfg.source = source;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = config_detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(source + ":" + std::to_string(line_no) + ": unterminated section header");
            section = config_detail::trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(source + ":" + std::to_string(line_no) + ": empty section name");
            cfg.sections[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = config_detail::trim(line.substr(0, eq));
        const std::string value = config_detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError(source + ":" + std::to_string(line_no) + ": key outside any section");
        cfg.sections[section][key] = {value, line_no};
    }
    return cfg;
}

inline ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in, path);
}

namespace config_detail {

inline std::string where(const ParsedConfig& cfg, const ParsedConfig::Entry& e) {
    return cfg.source + ":" + std::to_string(e.line);
}

inline double parse_real(const ParsedConfig& cfg, const ParsedConfig::Entry& e) {
    std::istringstream ss(e.value);
    double v;
    if (!(ss >> v)) throw ConfigError(where(cfg, e) + ": expected a real number, got '" + e.value + "'");
    std::string rest;
    if (ss >> rest) throw ConfigError(where(cfg, e) + ": trailing text after number");
    return v;
}

inline cplx parse_complex(const ParsedConfig& cfg, const ParsedConfig::Entry& e) {
    std::istringstream ss(e.value);
    double re, im;
    if (!(ss >> re >> im))
        throw ConfigError(where(cfg, e) + ": expected 're im' pair, got '" + e.value + "'");
    std::string rest;
    if (ss >> rest) throw ConfigError(where(cfg, e) + ": trailing text after complex pair");
    return {re, im};
}

inline std::vector<cplx> parse_complex_list(const ParsedConfig& cfg, const ParsedConfig::Entry& e) {
    std::istringstream ss(e.value);
    std::vector<double> raw;
    double v;
    while (ss >> v) raw.push_back(v);
    if (raw.empty() || raw.size() % 2 != 0)
        throw ConfigError(where(cfg, e) + ": expected whitespace-separated re/im pairs");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < raw.size(); i += 2) out.emplace_back(raw[i], raw[i + 1]);
    return out;
}

inline ComponentSpec component_from_config(const ParsedConfig& cfg, const std::string& section) {
    const auto& fam = cfg.require(section, "family");
    const std::string family = fam.value;
    if (family == "zero") return potentials::zero();
    if (family == "constant")
        return potentials::constant(parse_complex(cfg, cfg.require(section, "value")));
    if (family == "power")
        return potentials::power(parse_complex(cfg, cfg.require(section, "coeff")),
                                 parse_real(cfg, cfg.require(section, "alpha")));
    if (family == "power_right")
        return potentials::power_right(parse_complex(cfg, cfg.require(section, "coeff")),
                                       parse_real(cfg, cfg.require(section, "alpha")));
    if (family == "polynomial")
        return potentials::polynomial(parse_complex_list(cfg, cfg.require(section, "coeffs")));
    throw ConfigError(where(cfg, fam) + ": unknown potential family '" + family + "'");
}

inline void apply_endpoint_overrides(const ParsedConfig& cfg, ComponentSpec& spec,
                                     const std::string& prefix) {
    auto rho = cfg.find("endpoint", prefix + "_rho");
    auto nu = cfg.find("endpoint", prefix + "_nu");
    if (!rho != !nu)
        throw ConfigError(cfg.source + ": endpoint override needs both " + prefix + "_rho and " +
                          prefix + "_nu");
    if (!rho) return;
    PowerBehavior b{parse_real(cfg, *rho), parse_complex(cfg, *nu)};
    if (prefix.ends_with("left"))
        spec.left = b;
    else
        spec.right = b;
}

}  // namespace config_detail

/// Assembles the spectral problem from [boundary], [potential.p],
/// [potential.q] and the optional [endpoint] overrides.
inline SpectralProblem problem_from_config(const ParsedConfig& cfg) {
    BoundaryMatrix bc;
    static const char* keys[2][4] = {{"a11", "a12", "a13", "a14"}, {"a21", "a22", "a23", "a24"}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 4; ++j)
            bc.a[i][j] = config_detail::parse_complex(cfg, cfg.require("boundary", keys[i][j]));

    ComponentSpec p = config_detail::component_from_config(cfg, "potential.p");
    ComponentSpec q = config_detail::component_from_config(cfg, "potential.q");
    config_detail::apply_endpoint_overrides(cfg, p, "p_left");
    config_detail::apply_endpoint_overrides(cfg, p, "p_right");
    config_detail::apply_endpoint_overrides(cfg, q, "q_left");
    config_detail::apply_endpoint_overrides(cfg, q, "q_right");

    SpectralProblem problem{PotentialSpec(std::move(p), std::move(q)), bc};
    compute_minors(problem.bc);  // rows must be independent
    return problem;
}

/// Optional [run] defaults; command-line flags override these.
struct RunDefaults {
    std::optional<std::vector<double>> radii;
    std::optional<double> ray;
    std::optional<int> grid;
    std::optional<double> tol;
    std::optional<unsigned long long> seed;
};

inline RunDefaults run_defaults_from_config(const ParsedConfig& cfg) {
    RunDefaults d;
    if (auto e = cfg.find("run", "radii")) {
        std::vector<double> radii;
        std::string item;
        std::istringstream ss(e->value);
        while (std::getline(ss, item, ',')) {
            std::istringstream vs(config_detail::trim(item));
            double v;
            if (!(vs >> v))
                throw ConfigError(config_detail::where(cfg, *e) + ": bad radii list");
            radii.push_back(v);
        }
        if (radii.empty()) throw ConfigError(config_detail::where(cfg, *e) + ": empty radii list");
        d.radii = std::move(radii);
    }
    if (auto e = cfg.find("run", "ray")) d.ray = config_detail::parse_real(cfg, *e);
    if (auto e = cfg.find("run", "grid"))
        d.grid = static_cast<int>(config_detail::parse_real(cfg, *e));
    if (auto e = cfg.find("run", "tol")) d.tol = config_detail::parse_real(cfg, *e);
    if (auto e = cfg.find("run", "seed"))
        d.seed = static_cast<unsigned long long>(config_detail::parse_real(cfg, *e));
    return d;
}

}  // namespace diraclab
