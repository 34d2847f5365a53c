#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "terrainwalk/dynamics.hpp"
#include "terrainwalk/errors.hpp"
#include "terrainwalk/terrain.hpp"

using namespace terrainwalk;

TEST_CASE("parse a full terrain file") {
    const auto parsed = parse_terrain(
        "# a bump\n"
        "name = bump\n"
        "unit_height = 0.05\n"
        "pad_before = 3\n"
        "pad_after = 4\n"
        "heights = 1 0\n");
    const TerrainProfile& p = parsed.profile;
    CHECK(p.name == "bump");
    CHECK(p.unit_height == 0.05);
    CHECK(p.pad_before == 3);
    CHECK(p.pad_after == 4);
    CHECK(p.height_multiples == std::vector<int>{1, 0});
    CHECK_FALSE(p.sustain);
    CHECK(p.total_steps() == 9);
    CHECK(parsed.warnings.empty());
}

TEST_CASE("parse defaults and sustain marker") {
    const auto parsed = parse_terrain("heights = 1 *\n");
    CHECK(parsed.profile.unit_height == 0.075);
    CHECK(parsed.profile.pad_before == 6);
    CHECK(parsed.profile.pad_after == 6);
    CHECK(parsed.profile.sustain);
    CHECK(parsed.profile.exit_level() == 1);
    CHECK(parsed.profile.total_steps() == 13);

    const auto level = parse_terrain("heights = 0\n");
    CHECK(level.profile.height_multiples == std::vector<int>{0});
    CHECK(level.profile.exit_level() == 0);
}

TEST_CASE("parse errors carry line and column") {
    CHECK_THROWS_AS(parse_terrain("name = x\n"), ParseError);       // missing heights
    CHECK_THROWS_AS(parse_terrain("heights = 1 1.5\n"), ParseError);  // non-integer
    CHECK_THROWS_AS(parse_terrain("heights = \n"), ParseError);
    CHECK_THROWS_AS(parse_terrain("color = red\nheights = 1\n"), ParseError);
    CHECK_THROWS_AS(parse_terrain("heights = 1\nheights = 2\n"), ParseError);
    CHECK_THROWS_AS(parse_terrain("heights = * 1\n"), ParseError);
    CHECK_THROWS_AS(parse_terrain("pad_before = -2\nheights = 1\n"), ParseError);
    try {
        parse_terrain("name = x\nheights = 1 2 oops\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() > 10);
    }
}

TEST_CASE("leading level platforms are re-aligned so step 0 is uneven") {
    const auto parsed = parse_terrain("heights = 0 1 0\n");
    CHECK(parsed.profile.height_multiples == std::vector<int>{1, 0, 0});
    REQUIRE_FALSE(parsed.warnings.empty());
}

TEST_CASE("serialize / parse round-trip") {
    for (const auto& [name, entry] : builtin_terrains()) {
        const auto round = parse_terrain(serialize_terrain(entry.profile));
        CHECK(round.profile == entry.profile);
    }
    TerrainProfile odd;
    odd.name = "odd";
    odd.unit_height = 0.0375;
    odd.height_multiples = {2, 1, -1, 0, 3};
    odd.sustain = true;
    odd.pad_before = 2;
    odd.pad_after = 9;
    CHECK(parse_terrain(serialize_terrain(odd)).profile == odd);
}

TEST_CASE("catalog shapes") {
    const auto& cat = builtin_terrains();
    CHECK(cat.size() == 8);
    CHECK(cat.at("control").profile.total_steps() == 21);
    CHECK(cat.at("P").profile.total_steps() == 21);
    CHECK(cat.at("C1").profile.total_steps() == 28);
    CHECK(cat.at("C2").profile.total_steps() == 28);
    CHECK(cat.at("C1").profile.height_multiples.size() == 16);
    CHECK(cat.at("C2").profile.height_multiples.size() == 16);
    CHECK(cat.at("U").profile.height_multiples == std::vector<int>{1});
    CHECK(cat.at("U").profile.sustain);
    CHECK(cat.at("D").profile.height_multiples == std::vector<int>{-1});
    CHECK(cat.at("P").profile.height_multiples ==
          std::vector<int>{1, 2, 3, 3, 3, 3, 2, 1, 0});

    // the pyramid peak sits at 0.225 L above the walkway
    const auto& pm = cat.at("P").profile;
    const int peak = *std::max_element(pm.height_multiples.begin(), pm.height_multiples.end());
    CHECK(peak * pm.unit_height == doctest::Approx(0.225).epsilon(1e-15));

    CHECK_THROWS_AS(builtin_terrain("nope"), std::out_of_range);
}

TEST_CASE("reversal") {
    const auto& cat = builtin_terrains();

    // U and D are mirror images
    const TerrainProfile ru = reverse(cat.at("U").profile);
    CHECK(ru.height_multiples == cat.at("D").profile.height_multiples);
    CHECK(ru.sustain == cat.at("D").profile.sustain);

    // C2 is C1 walked the other way
    const TerrainProfile rc1 = reverse(cat.at("C1").profile);
    CHECK(rc1.height_multiples == cat.at("C2").profile.height_multiples);

    // involution and identity on level ground
    for (const char* name : {"U", "D", "UD", "D&UD", "P", "C1", "C2"}) {
        TerrainProfile p = cat.at(name).profile;
        TerrainProfile back = reverse(reverse(p));
        back.name = p.name;
        CHECK(back == p);
    }
    TerrainProfile rc = reverse(cat.at("control").profile);
    CHECK(rc.height_multiples == cat.at("control").profile.height_multiples);
}

TEST_CASE("disturbances") {
    const ModelParams params = ModelParams::nominal();
    const auto& cat = builtin_terrains();
    const double d = 0.09507990081040057;

    SUBCASE("control is all level") {
        for (double x : disturbances(cat.at("control").profile, params.step_length))
            CHECK(x == 0.0);
    }

    SUBCASE("pyramid: three up, three zeros on top, three down") {
        const auto ds = disturbances(cat.at("P").profile, params.step_length);
        REQUIRE(ds.size() == 21);
        int plus = 0, minus = 0, zero = 0;
        for (int k = 6; k < 15; ++k) {
            if (ds[static_cast<std::size_t>(k)] > 0.0) {
                ++plus;
                CHECK(ds[static_cast<std::size_t>(k)] == doctest::Approx(d).epsilon(1e-12));
            } else if (ds[static_cast<std::size_t>(k)] < 0.0) {
                ++minus;
                CHECK(ds[static_cast<std::size_t>(k)] == doctest::Approx(-d).epsilon(1e-12));
            } else {
                ++zero;
            }
        }
        CHECK(plus == 3);
        CHECK(minus == 3);
        CHECK(zero == 3);
        for (int k = 0; k < 6; ++k) CHECK(ds[static_cast<std::size_t>(k)] == 0.0);
        for (int k = 15; k < 21; ++k) CHECK(ds[static_cast<std::size_t>(k)] == 0.0);
    }

    SUBCASE("reversal flips and mirrors the disturbance sequence") {
        // compared after aligning on the first uneven step: re-basing keeps
        // step 0 uneven, which can shift the window relative to a raw mirror
        const auto first_nonzero = [](const std::vector<double>& v) {
            for (std::size_t k = 0; k < v.size(); ++k)
                if (v[k] != 0.0) return k;
            return v.size();
        };
        for (const char* name : {"U", "D", "UD", "P", "C1", "D&UD"}) {
            const TerrainProfile p = cat.at(name).profile;
            auto fwd = disturbances(p, params.step_length);
            const auto rev = disturbances(reverse(p), params.step_length);
            std::reverse(fwd.begin(), fwd.end());
            for (double& x : fwd) x = -x;
            REQUIRE(fwd.size() == rev.size());
            const std::size_t of = first_nonzero(fwd);
            const std::size_t orv = first_nonzero(rev);
            REQUIRE(of < fwd.size());
            for (std::size_t k = 0; of + k < fwd.size() && orv + k < rev.size(); ++k)
                CHECK(rev[orv + k] == doctest::Approx(fwd[of + k]).epsilon(1e-13));
            for (std::size_t k = 0; k < std::min(of, orv); ++k) {
                CHECK(fwd[k] == 0.0);
                CHECK(rev[k] == 0.0);
            }
        }
    }

    SUBCASE("height deltas telescope to the net elevation change") {
        for (const auto& [name, entry] : cat) {
            const auto m = entry.profile.padded_multiples();
            int sum = 0, prev = 0;
            for (int x : m) {
                sum += x - prev;
                prev = x;
            }
            CHECK(sum == entry.profile.exit_level());
        }
    }

    SUBCASE("too-steep terrain raises") {
        TerrainProfile cliff;
        cliff.height_multiples = {11};
        CHECK_THROWS_AS(disturbances(cliff, params.step_length), DynamicsError);
    }
}

TEST_CASE("warnings flag steep consecutive changes") {
    TerrainProfile steep;
    steep.height_multiples = {2, 0};
    CHECK_FALSE(steep.warnings().empty());
    const TerrainProfile& p = builtin_terrain("P").profile;
    CHECK(p.warnings().empty());
}
