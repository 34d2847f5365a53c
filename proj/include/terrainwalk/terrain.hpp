#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace terrainwalk {

// A named sequence of flat platforms, each an integer multiple of
// unit_height above the entry walkway level, padded by level steps on both
// sides. `sustain` keeps the exit padding at the final platform height
// (a curb-like permanent elevation change) instead of returning to 0.
//
// Step indices are aligned so that index 0 is the first platform of the
// terrain segment; canonical profiles start with a height change there.
struct TerrainProfile {
    std::string name;
    double unit_height = 0.075;        // [L]
    std::vector<int> height_multiples; // platforms relative to entry level 0
    bool sustain = false;
    int pad_before = 6;
    int pad_after = 6;
    int max_step_delta = 1;            // warning threshold on |consecutive change|

    int total_steps() const {
        return pad_before + static_cast<int>(height_multiples.size()) + pad_after;
    }
    int first_uneven() const { return pad_before; }
    int exit_level() const {
        return (sustain && !height_multiples.empty()) ? height_multiples.back() : 0;
    }

    // Length-N platform heights including padding, in unit multiples.
    std::vector<int> padded_multiples() const;

    // Re-align so the first listed platform carries the first height change:
    // leading platforms at entry level are rotated to the exit side.
    // Physically identical terrain, same N. Returns number of rotated steps.
    int canonicalize();

    // Soft checks (|consecutive multiple change| > max_step_delta, ...).
    std::vector<std::string> warnings() const;

    bool operator==(const TerrainProfile&) const = default;
};

struct ParsedTerrain {
    TerrainProfile profile;
    std::vector<std::string> warnings;
};

// Line-oriented terrain file format:
//   # comment
//   name = P
//   unit_height = 0.075
//   pad_before = 6
//   pad_after = 6
//   heights = 1 2 3 3 3 3 2 1 0
// A trailing `*` on the heights line sustains the final value through the
// exit padding. Throws ParseError with 1-based line/column.
ParsedTerrain parse_terrain(std::string_view text);

// Deterministic inverse of parse_terrain (fields in fixed order, single
// spaces, shortest round-trip floats).
std::string serialize_terrain(const TerrainProfile&);

// Landing disturbance angle of every padded step: asin(height change / S).
// Length N; entry from level ground. Throws DynamicsError(terrain_too_steep)
// when |height change| >= step_length.
std::vector<double> disturbances(const TerrainProfile&, double step_length);

// The same terrain walked in the opposite direction, re-based so the walk
// starts at level 0, with entry/exit padding swapped. Involution on
// canonical profiles.
TerrainProfile reverse(const TerrainProfile&);

struct CatalogEntry {
    TerrainProfile profile;
    bool canonical = false;  // false: documented reconstruction, override by file
    std::string note;
};

// Built-in profiles: control, U, D, UD, D&UD, P, C1, C2.
const std::map<std::string, CatalogEntry>& builtin_terrains();

// Case-sensitive catalog lookup; throws std::out_of_range with a message
// listing the valid names.
const CatalogEntry& builtin_terrain(const std::string& name);

}  // namespace terrainwalk
