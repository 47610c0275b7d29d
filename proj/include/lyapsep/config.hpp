#pragma once

// Line-oriented system configuration files and the built-in example catalog.
//
//   # comment
//   [system]
//   name = perron
//   n = 2
//   A[1][1] = "0"
//   A[2][2] = "pi*sin(pi*sqrt(t))"
//   [perturbation]
//   B[1][2] = "0.1/sqrt(t+1)"
//   B[2][1] = "0.1/sqrt(t+1)"
//   decay_delta = 0.1
//   decay_beta = 0
//
// A whole matrix may also be given as a nested list: A = [["0","0"],["0","t"]].
// Entries that are not mentioned are zero. The formal grammar ships in docs/config-grammar.ebnf.

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lyapsep/errors.hpp"
#include "lyapsep/expr.hpp"
#include "lyapsep/system.hpp"

namespace lyapsep {

struct SystemConfig {
    std::string name = "config";
    std::size_t n = 0;
    std::vector<Expr> a;
    std::optional<std::vector<Expr>> b;
    std::optional<double> decay_delta;
    std::optional<double> decay_beta;
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quote = !in_quote;
        if (line[i] == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
}

inline std::string unquote(const std::string& v, std::size_t line_no) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
    throw ConfigError("line " + std::to_string(line_no) + ": expression values must be double-quoted");
}

inline double parse_real(const std::string& v, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": expected a number, got '" + v + "'");
    }
}

inline Expr parse_entry(const std::string& text, std::size_t line_no) {
    try {
        return Expr::parse(text);
    } catch (const ParseError& e) {
        throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
}

struct PendingEntry {
    std::size_t row, col;  // 1-based
    Expr value;
    std::size_t line;
};

}  // namespace detail

/// Parses configuration text. Dimension checks happen here; probing happens in System.
inline SystemConfig parse_config(std::string_view text) {
    SystemConfig cfg;
    std::optional<std::size_t> n;
    std::vector<detail::PendingEntry> a_entries, b_entries;
    std::string section = "system";

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']' && line.find('=') == std::string::npos) {
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            if (section != "system" && section != "perturbation")
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));

        if (key == "name") {
            cfg.name = value.size() >= 2 && value.front() == '"' ? value.substr(1, value.size() - 2) : value;
        } else if (key == "n") {
            const double v = detail::parse_real(value, line_no);
            if (v != static_cast<double>(static_cast<long>(v)) || v < 1)
                throw ConfigError("line " + std::to_string(line_no) + ": n must be a positive integer");
            n = static_cast<std::size_t>(v);
        } else if (key == "decay_delta") {
            cfg.decay_delta = detail::parse_real(value, line_no);
        } else if (key == "decay_beta") {
            cfg.decay_beta = detail::parse_real(value, line_no);
        } else if (key == "A" || key == "B") {
            auto& sink = key == "A" ? a_entries : b_entries;
            nlohmann::json rows;
            try {
                rows = nlohmann::json::parse(value);
            } catch (const nlohmann::json::exception&) {
                throw ConfigError("line " + std::to_string(line_no) + ": matrix must be a nested list of strings");
            }
            if (!rows.is_array()) throw ConfigError("line " + std::to_string(line_no) + ": matrix must be a list");
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!rows[i].is_array())
                    throw ConfigError("line " + std::to_string(line_no) + ": matrix rows must be lists");
                for (std::size_t j = 0; j < rows[i].size(); ++j) {
                    if (!rows[i][j].is_string())
                        throw ConfigError("line " + std::to_string(line_no) + ": matrix entries must be strings");
                    sink.push_back({i + 1, j + 1, detail::parse_entry(rows[i][j].get<std::string>(), line_no), line_no});
                }
                if (n && rows[i].size() != *n)
                    throw ConfigError("line " + std::to_string(line_no) + ": dimension mismatch: row " +
                                             std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                                             " entries but n = " + std::to_string(*n));
            }
            if (n && rows.size() != *n)
                throw ConfigError("line " + std::to_string(line_no) + ": dimension mismatch: " +
                                  std::to_string(rows.size()) + " rows but n = " + std::to_string(*n));
        } else if ((key.rfind("A[", 0) == 0 || key.rfind("B[", 0) == 0)) {
            std::size_t r = 0, c = 0;
            char tail = 0;
            std::istringstream ks(key.substr(1));
            char lb1 = 0, rb1 = 0, lb2 = 0, rb2 = 0;
            if (!(ks >> lb1 >> r >> rb1 >> lb2 >> c >> rb2) || lb1 != '[' || rb1 != ']' || lb2 != '[' ||
                rb2 != ']' || (ks >> tail))
                throw ConfigError("line " + std::to_string(line_no) + ": malformed index in '" + key + "'");
            auto& sink = key[0] == 'A' ? a_entries : b_entries;
            sink.push_back({r, c, detail::parse_entry(detail::unquote(value, line_no), line_no), line_no});
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    if (!n) throw ConfigError("missing 'n = <int>'");
    if (*n > kMaxDimension) throw ConfigError("dimension exceeds " + std::to_string(kMaxDimension));
    cfg.n = *n;

    auto assemble = [&](const std::vector<detail::PendingEntry>& pending, char label) {
        std::vector<Expr> m(cfg.n * cfg.n);
        for (const auto& p : pending) {
            if (p.row < 1 || p.col < 1 || p.row > cfg.n || p.col > cfg.n)
                throw ConfigError("line " + std::to_string(p.line) + ": dimension mismatch: " + label + "[" +
                                  std::to_string(p.row) + "][" + std::to_string(p.col) + "] outside " +
                                  std::to_string(cfg.n) + "x" + std::to_string(cfg.n));
            m[(p.row - 1) * cfg.n + (p.col - 1)] = p.value;
        }
        return m;
    };
    cfg.a = assemble(a_entries, 'A');
    if (!b_entries.empty()) cfg.b = assemble(b_entries, 'B');
    return cfg;
}

/// Loads a System from configuration text (any B entries are ignored here).
inline System load_system(std::string_view text, double probe_horizon = kDefaultProbeHorizon) {
    SystemConfig cfg = parse_config(text);
    return System(cfg.n, std::move(cfg.a), cfg.name, probe_horizon);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Catalog

inline const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names{"intro-regular", "example-2-3", "perron-base", "example-3-2",
                                                 "const-diag"};
    return names;
}

/// Built-in example systems. `params` carries (omega1, omega2) for example-2-3 and the
/// diagonal constants for const-diag.
inline System catalog(const std::string& name, const std::vector<double>& params = {}) {
    if (name == "intro-regular") {
        if (!params.empty()) throw ConfigError("intro-regular takes no parameters");
        return System::diagonal({Expr::parse("1 + (pi/2)*sin(pi*sqrt(t))"), Expr()}, name);
    }
    if (name == "perron-base") {
        if (!params.empty()) throw ConfigError("perron-base takes no parameters");
        return System::diagonal({Expr(), Expr::parse("pi*sin(pi*sqrt(t))")}, name);
    }
    if (name == "example-3-2") {
        if (!params.empty()) throw ConfigError("example-3-2 takes no parameters");
        return System::diagonal({Expr::parse("2 - 2*t*sin(t)"), Expr::parse("4 - 3*t*sin(t)")}, name);
    }
    if (name == "example-2-3") {
        double w1 = 3.0, w2 = 1.0;
        if (params.size() == 2) {
            w1 = params[0];
            w2 = params[1];
        } else if (!params.empty()) {
            throw ConfigError("example-2-3 takes two parameters (omega1, omega2)");
        }
        const Expr tsint = Expr::parse("t*sin(t)");
        System sys = System::diagonal({Expr::constant(w1), w2 == 1.0 ? tsint : Expr::constant(w2) * tsint}, name);
        if (!(w1 > w2 && w2 > 0.0)) sys.add_note("parameters violate omega1 > omega2 > 0");
        return sys;
    }
    if (name == "const-diag") {
        if (params.empty()) throw ConfigError("const-diag needs at least one constant");
        std::vector<Expr> diag;
        for (double v : params) diag.push_back(Expr::constant(v));
        return System::diagonal(std::move(diag), name);
    }
    throw ConfigError("unknown catalog system '" + name + "'");
}

/// Resolves "name", "name:p1,p2,..." or a path to a configuration file.
inline System resolve_system(const std::string& spec, double probe_horizon = kDefaultProbeHorizon) {
    const auto colon = spec.find(':');
    const std::string base = spec.substr(0, colon);
    for (const auto& known : catalog_names()) {
        if (base != known) continue;
        std::vector<double> params;
        if (colon != std::string::npos) {
            std::istringstream ps(spec.substr(colon + 1));
            std::string item;
            while (std::getline(ps, item, ',')) params.push_back(detail::parse_real(detail::trim(item), 0));
        }
        return catalog(base, params);
    }
    return load_system(read_file(spec), probe_horizon);
}

}  // namespace lyapsep
