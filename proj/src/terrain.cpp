#include "terrainwalk/terrain.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "terrainwalk/dynamics.hpp"
#include "terrainwalk/errors.hpp"

namespace terrainwalk {

std::vector<int> TerrainProfile::padded_multiples() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(total_steps()));
    out.insert(out.end(), static_cast<std::size_t>(pad_before), 0);
    out.insert(out.end(), height_multiples.begin(), height_multiples.end());
    out.insert(out.end(), static_cast<std::size_t>(pad_after), exit_level());
    return out;
}

int TerrainProfile::canonicalize() {
    const bool all_level =
        std::all_of(height_multiples.begin(), height_multiples.end(),
                    [](int m) { return m == 0; });
    if (all_level) return 0;
    int rotated = 0;
    while (!height_multiples.empty() && height_multiples.front() == 0) {
        height_multiples.erase(height_multiples.begin());
        height_multiples.push_back(exit_level());
        ++rotated;
    }
    return rotated;
}

std::vector<std::string> TerrainProfile::warnings() const {
    std::vector<std::string> out;
    const std::vector<int> m = padded_multiples();
    int prev = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const int d = m[i] - prev;
        if (std::abs(d) > max_step_delta) {
            out.push_back("step " + std::to_string(static_cast<int>(i) - pad_before) +
                          ": height change " + std::to_string(d) +
                          " exceeds max_step_delta " + std::to_string(max_step_delta));
        }
        prev = m[i];
    }
    if (!height_multiples.empty() && height_multiples.front() == 0)
        out.push_back("terrain does not start with a height change; "
                      "step 0 will be level (consider canonicalizing)");
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

int parse_int(std::string_view tok, int line, int col) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(line, col, "expected an integer, got '" + std::string(tok) + "'");
    return value;
}

double parse_float(std::string_view tok, int line, int col) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(line, col, "expected a number, got '" + std::string(tok) + "'");
    return value;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

ParsedTerrain parse_terrain(std::string_view text) {
    ParsedTerrain out;
    TerrainProfile& p = out.profile;
    bool seen_heights = false;
    bool seen[4] = {false, false, false, false};  // name, unit_height, pad_before, pad_after

    int line_no = 0;
    std::size_t pos = 0;
    int last_line = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                              : eol - pos);
        ++line_no;
        last_line = line_no;
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;

        const std::size_t hash = raw.find('#');
        std::string_view line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, 1, "expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const int vcol = static_cast<int>(raw.find(value.empty() ? "=" : value) + 1);

        auto mark = [&](int idx) {
            if (seen[idx]) throw ParseError(line_no, 1, "duplicate field '" + std::string(key) + "'");
            seen[idx] = true;
        };

        if (key == "name") {
            mark(0);
            p.name = std::string(value);
        } else if (key == "unit_height") {
            mark(1);
            const double h = parse_float(value, line_no, vcol);
            if (h <= 0.0) throw ParseError(line_no, vcol, "unit_height must be positive");
            p.unit_height = h;
        } else if (key == "pad_before") {
            mark(2);
            const int n = parse_int(value, line_no, vcol);
            if (n < 0) throw ParseError(line_no, vcol, "pad_before must be non-negative");
            p.pad_before = n;
        } else if (key == "pad_after") {
            mark(3);
            const int n = parse_int(value, line_no, vcol);
            if (n < 0) throw ParseError(line_no, vcol, "pad_after must be non-negative");
            p.pad_after = n;
        } else if (key == "heights") {
            if (seen_heights) throw ParseError(line_no, 1, "duplicate field 'heights'");
            seen_heights = true;
            std::size_t i = 0;
            while (i < value.size()) {
                while (i < value.size() && value[i] == ' ') ++i;
                if (i >= value.size()) break;
                std::size_t j = i;
                while (j < value.size() && value[j] != ' ') ++j;
                const std::string_view tok = value.substr(i, j - i);
                const int col = vcol + static_cast<int>(i);
                if (tok == "*") {
                    if (j < value.size() && !trim(value.substr(j)).empty())
                        throw ParseError(line_no, col, "sustain marker '*' must be last");
                    if (p.height_multiples.empty())
                        throw ParseError(line_no, col, "sustain marker needs at least one height");
                    p.sustain = true;
                } else {
                    p.height_multiples.push_back(parse_int(tok, line_no, col));
                }
                i = j;
            }
            if (p.height_multiples.empty())
                throw ParseError(line_no, vcol, "heights needs at least one integer");
        } else {
            throw ParseError(line_no, 1, "unknown field '" + std::string(key) + "'");
        }
    }

    if (!seen_heights) throw ParseError(last_line, 1, "missing required field 'heights'");

    if (const int rotated = p.canonicalize(); rotated > 0)
        out.warnings.push_back(std::to_string(rotated) +
                               " leading level platform(s) re-aligned to the exit side");
    auto w = p.warnings();
    out.warnings.insert(out.warnings.end(), w.begin(), w.end());
    return out;
}

std::string serialize_terrain(const TerrainProfile& p) {
    std::ostringstream os;
    if (!p.name.empty()) os << "name = " << p.name << "\n";
    os << "unit_height = " << format_double(p.unit_height) << "\n";
    os << "pad_before = " << p.pad_before << "\n";
    os << "pad_after = " << p.pad_after << "\n";
    os << "heights =";
    for (int m : p.height_multiples) os << ' ' << m;
    if (p.sustain) os << " *";
    os << "\n";
    return os.str();
}

std::vector<double> disturbances(const TerrainProfile& p, double step_length) {
    const std::vector<int> m = p.padded_multiples();
    std::vector<double> out(m.size(), 0.0);
    int prev = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] != prev)
            out[i] = disturbance(m[i] * p.unit_height, prev * p.unit_height, step_length);
        prev = m[i];
    }
    return out;
}

TerrainProfile reverse(const TerrainProfile& p) {
    TerrainProfile out = p;
    std::swap(out.pad_before, out.pad_after);
    const int exit = p.exit_level();
    out.height_multiples.assign(p.height_multiples.rbegin(), p.height_multiples.rend());
    for (int& m : out.height_multiples) m -= exit;
    // The reversed walk exits at the original entry level, -exit after re-basing.
    out.sustain = (exit != 0);
    if (out.sustain) {
        // Rotate leading platforms equal to the new entry level to the exit
        // side so the representation (heights + sustain of the last value)
        // can express the sustained drop/climb.
        while (!out.height_multiples.empty() && out.height_multiples.front() == 0) {
            out.height_multiples.erase(out.height_multiples.begin());
            out.height_multiples.push_back(-exit);
        }
    } else {
        out.canonicalize();
    }
    return out;
}

namespace {

TerrainProfile make_builtin(std::string name, std::vector<int> multiples, bool sustain) {
    TerrainProfile p;
    p.name = std::move(name);
    p.height_multiples = std::move(multiples);
    p.sustain = sustain;
    return p;
}

std::map<std::string, CatalogEntry> build_catalog() {
    std::map<std::string, CatalogEntry> c;
    c["control"] = {make_builtin("control", {0, 0, 0, 0, 0, 0, 0, 0, 0}, false), true,
                    "level walkway segment, length-matched to P"};
    c["U"] = {make_builtin("U", {1}, true), true, "single sustained up-step"};
    c["D"] = {make_builtin("D", {-1}, true), true, "single sustained down-step"};
    c["UD"] = {make_builtin("UD", {1, 0}, false), true, "up-step immediately followed by a down-step"};
    c["D&UD"] = {make_builtin("D&UD", {-1, -1, 0, 0}, false), false,
                 "down-step, level step, up-down; documented approximation"};
    c["P"] = {make_builtin("P", {1, 2, 3, 3, 3, 3, 2, 1, 0}, false), false,
              "flat-topped pyramid, peak 0.225 L; reconstructed from published totals"};
    TerrainProfile c1 =
        make_builtin("C1", {1, 2, 3, 2, 1, 0, -1, -2, -1, -1, 0, 1, 1, 2, 1, 0}, false);
    c["C1"] = {c1, false, "16-step placeholder sequence; override with a terrain file"};
    TerrainProfile c2 = reverse(c1);
    c2.name = "C2";
    c["C2"] = {c2, false, "C1 walked in the opposite direction"};
    return c;
}

}  // namespace

const std::map<std::string, CatalogEntry>& builtin_terrains() {
    static const std::map<std::string, CatalogEntry> catalog = build_catalog();
    return catalog;
}

const CatalogEntry& builtin_terrain(const std::string& name) {
    const auto& c = builtin_terrains();
    const auto it = c.find(name);
    if (it == c.end()) {
        std::string names;
        for (const auto& [k, v] : c) {
            if (!names.empty()) names += ", ";
            names += k;
        }
        throw std::out_of_range("unknown terrain '" + name + "' (built-ins: " + names + ")");
    }
    return it->second;
}

}  // namespace terrainwalk
