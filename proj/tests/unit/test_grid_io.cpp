#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "recomp/errors.hpp"
#include "recomp/grid_io.hpp"
#include "recomp/mb_parse.hpp"

#include "grid_gen.hpp"

using namespace recomp;

namespace {
const std::string kFixtures = RECOMP_FIXTURES_DIR;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}
} // namespace

TEST_CASE("serialize/parse round trip on random grids") {
    std::mt19937 rng(2024);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<FrameGrid> grids;
        const int rows = 1 + rng() % 4, cols = 1 + rng() % 4;
        const int frames = 1 + rng() % 5;
        const FrameType types[] = {FrameType::I, FrameType::P, FrameType::B};
        for (int k = 0; k < frames; ++k)
            grids.push_back(testgen::random_grid(rng, k, types[rng() % 3], rows, cols));
        auto back = parse_grids(serialize_grids(grids));
        CHECK(back == grids);
    }
}

TEST_CASE("serialization is stable: serializing a parse reproduces the text") {
    std::mt19937 rng(7);
    auto g = testgen::random_grid(rng, 0, FrameType::P, 3, 3);
    std::vector<FrameGrid> grids{g};
    const std::string text = serialize_grids(grids);
    CHECK(serialize_grids(parse_grids(text)) == text);
}

TEST_CASE("parse_grids errors carry line numbers") {
    SUBCASE("cell before header") {
        try {
            parse_grids("0 0 skip 16x16\n");
            FAIL("expected GrammarError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Grammar);
            CHECK(e.line() == 1);
        }
    }
    SUBCASE("unknown kind") {
        try {
            parse_grids("frame 0 P 1x1\n0 0 sideways 16x16\n");
            FAIL("expected GrammarError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Grammar);
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("missing cells at end of input") {
        CHECK_THROWS_AS(parse_grids("frame 0 P 2x2\n0 0 skip 16x16\n"), Error);
    }
    SUBCASE("malformed vector token") {
        CHECK_THROWS_AS(parse_grids("frame 0 P 1x1\n0 0 fwd 16x16 1,2\n"), Error);
    }
}

TEST_CASE("other-kind symbols survive the round trip") {
    FrameGrid g;
    g.frame_index = 0;
    g.frame_type = FrameType::P;
    g.rows = 1;
    g.cols = 2;
    g.cells.resize(2);
    g.cells[0].mb_type = classify_symbol('%', '+');
    g.cells[1].mb_type = classify_symbol(' ', ' '); // non-printable raw goes hex
    std::vector<FrameGrid> grids{g};
    auto back = parse_grids(serialize_grids(grids));
    CHECK(back == grids);
}

TEST_CASE("golden dumps parse to the committed canonical grids bit-exactly") {
    auto grids = extract_frame_grids(kFixtures + "/clip320.mb.txt",
                                     kFixtures + "/clip320.mv.txt", 320, 240);
    CHECK(serialize_grids(grids) == slurp(kFixtures + "/clip320.grids.txt"));
}
