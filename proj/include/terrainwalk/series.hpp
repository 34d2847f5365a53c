#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "terrainwalk/dynamics.hpp"

namespace terrainwalk {

// Per-step walking speeds aligned so index 0 is the first terrain platform.
struct SpeedSeries {
    std::string label;
    std::string terrain;
    std::vector<int> indices;    // strictly increasing
    std::vector<double> speeds;
    bool si_units = false;       // true: m/s, false: dimensionless

    std::size_t size() const { return speeds.size(); }
    double mean() const;
    // speeds minus the series mean
    std::vector<double> fluctuations() const;

    static SpeedSeries from_trajectory(const GaitTrajectory&, std::string label,
                                       std::string terrain);
};

struct SeriesFile {
    std::vector<SpeedSeries> series;
    std::vector<std::string> warnings;
};

// CSV with header `label,terrain,step_index,speed,unit`,
// unit in {dimensionless, m_per_s}, one unit per file, step indices strictly
// increasing within each (label, terrain) group. A file with no content
// yields an empty set plus a warning. Throws SeriesError.
SeriesFile read_series(std::istream&);
SeriesFile read_series_file(const std::string& path);

// Rows sorted by (label, step_index); floats as shortest round-trip text.
void write_series(std::ostream&, std::span<const SpeedSeries>);
void write_series_file(const std::string& path, std::span<const SpeedSeries>);

}  // namespace terrainwalk
