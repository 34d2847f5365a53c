#include "terrainwalk/series.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "terrainwalk/errors.hpp"
#include "terrainwalk/kernels.hpp"

namespace terrainwalk {

namespace {

constexpr std::string_view kHeader = "label,terrain,step_index,speed,unit";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return out;
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

double SpeedSeries::mean() const {
    if (speeds.empty()) return 0.0;
    return kernels::sum(speeds) / static_cast<double>(speeds.size());
}

std::vector<double> SpeedSeries::fluctuations() const {
    const double m = mean();
    std::vector<double> out(speeds.size());
    for (std::size_t i = 0; i < speeds.size(); ++i) out[i] = speeds[i] - m;
    return out;
}

SpeedSeries SpeedSeries::from_trajectory(const GaitTrajectory& traj, std::string label,
                                         std::string terrain) {
    SpeedSeries s;
    s.label = std::move(label);
    s.terrain = std::move(terrain);
    s.indices = traj.indices();
    s.speeds = traj.midstance_speeds();
    s.si_units = false;
    return s;
}

SeriesFile read_series(std::istream& in) {
    SeriesFile out;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    bool any_content = false;
    int unit_flag = -1;  // -1 unknown, 0 dimensionless, 1 m_per_s

    // (label, terrain) -> slot, in first-appearance order
    std::map<std::pair<std::string, std::string>, std::size_t> slots;

    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        any_content = true;
        if (!header_seen) {
            if (row != kHeader)
                throw SeriesError("line " + std::to_string(line_no) +
                                  ": malformed header, expected '" + std::string(kHeader) + "'");
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(row);
        if (fields.size() != 5)
            throw SeriesError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                              std::to_string(fields.size()));
        int index = 0;
        {
            const auto f = fields[2];
            const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), index);
            if (ec != std::errc{} || p != f.data() + f.size())
                throw SeriesError("line " + std::to_string(line_no) + ": bad step_index '" +
                                  std::string(f) + "'");
        }
        double speed = 0.0;
        {
            const auto f = fields[3];
            const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), speed);
            if (ec != std::errc{} || p != f.data() + f.size())
                throw SeriesError("line " + std::to_string(line_no) + ": bad speed '" +
                                  std::string(f) + "'");
        }
        int unit;
        if (fields[4] == "dimensionless")
            unit = 0;
        else if (fields[4] == "m_per_s")
            unit = 1;
        else
            throw SeriesError("line " + std::to_string(line_no) + ": unknown unit '" +
                              std::string(fields[4]) + "' (dimensionless|m_per_s)");
        if (unit_flag == -1)
            unit_flag = unit;
        else if (unit_flag != unit)
            throw SeriesError("line " + std::to_string(line_no) + ": mixed units within a file");

        const auto key = std::make_pair(std::string(fields[0]), std::string(fields[1]));
        auto it = slots.find(key);
        if (it == slots.end()) {
            it = slots.emplace(key, out.series.size()).first;
            SpeedSeries s;
            s.label = key.first;
            s.terrain = key.second;
            s.si_units = (unit == 1);
            out.series.push_back(std::move(s));
        }
        SpeedSeries& s = out.series[it->second];
        if (!s.indices.empty() && index <= s.indices.back())
            throw SeriesError("line " + std::to_string(line_no) + ": step_index " +
                              std::to_string(index) + " not increasing for series '" +
                              s.label + "'");
        s.indices.push_back(index);
        s.speeds.push_back(speed);
    }

    if (!any_content) {
        out.warnings.push_back("empty input: no header or data rows");
        return out;
    }
    if (out.series.empty()) out.warnings.push_back("no data rows after the header");
    return out;
}

SeriesFile read_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SeriesError("cannot open '" + path + "'");
    return read_series(in);
}

void write_series(std::ostream& os, std::span<const SpeedSeries> series) {
    for (const auto& s : series) {
        if (s.indices.size() != s.speeds.size())
            throw SeriesError("series '" + s.label + "': index/speed length mismatch");
        if (s.label.find(',') != std::string::npos || s.terrain.find(',') != std::string::npos)
            throw SeriesError("labels and terrain names must not contain commas");
        if (!series.empty() && s.si_units != series.front().si_units)
            throw SeriesError("mixed units cannot be written to one file");
    }
    std::vector<const SpeedSeries*> order;
    order.reserve(series.size());
    for (const auto& s : series) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const SpeedSeries* a, const SpeedSeries* b) {
        return std::tie(a->label, a->terrain) < std::tie(b->label, b->terrain);
    });

    os << kHeader << "\n";
    for (const SpeedSeries* s : order) {
        const char* unit = s->si_units ? "m_per_s" : "dimensionless";
        for (std::size_t i = 0; i < s->indices.size(); ++i)
            os << s->label << ',' << s->terrain << ',' << s->indices[i] << ','
               << format_double(s->speeds[i]) << ',' << unit << "\n";
    }
}

void write_series_file(const std::string& path, std::span<const SpeedSeries> series) {
    std::ofstream os(path);
    if (!os) throw SeriesError("cannot open '" + path + "' for writing");
    write_series(os, series);
}

}  // namespace terrainwalk
