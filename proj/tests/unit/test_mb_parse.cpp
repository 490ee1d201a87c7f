#include <doctest.h>

#include <fstream>
#include <sstream>

#include "recomp/errors.hpp"
#include "recomp/mb_parse.hpp"

using namespace recomp;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

const std::string kFixtures = RECOMP_FIXTURES_DIR;

} // namespace

TEST_CASE("classify_symbol maps the debug alphabet") {
    CHECK(classify_symbol('i').kind == MbKind::Intra4x4);
    CHECK(classify_symbol('I').kind == MbKind::Intra16x16);
    CHECK(classify_symbol('S').kind == MbKind::Skip);
    CHECK(classify_symbol('D').kind == MbKind::Skip);
    CHECK(classify_symbol('d').kind == MbKind::Skip);
    CHECK(classify_symbol('<').kind == MbKind::BackwardPred);
    CHECK(classify_symbol('X').kind == MbKind::Bidirectional);

    const MacroblockType fwd8x8 = classify_symbol('>', '+');
    CHECK(fwd8x8.kind == MbKind::ForwardPred);
    CHECK(fwd8x8.partition == MbPartition::Four8x8);

    CHECK(classify_symbol('>', '-').partition == MbPartition::Two16x8);
    CHECK(classify_symbol('>', '|').partition == MbPartition::Two8x16);
    CHECK(classify_symbol('>', ' ').partition == MbPartition::Whole16x16);

    // unknown symbols are preserved, never rejected
    const MacroblockType other = classify_symbol('%');
    CHECK(other.kind == MbKind::Other);
    CHECK(other.raw == '%');
    CHECK(classify_symbol('%') == classify_symbol('%'));
    CHECK(!(classify_symbol('%') == classify_symbol('&')));
}

TEST_CASE("parse_debug_stream on a tiny hand-written dump") {
    const std::string text =
        "New frame, type: I\n"
        "i  I  i  \n"
        "i  i  i  \n"
        "New frame, type: P\n"
        ">+ S  >  \n"
        ">- I  S  \n";
    auto frames = parse_debug_stream(text);
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].frame_type == FrameType::I);
    CHECK(frames[0].rows == 2);
    CHECK(frames[0].cols == 3);
    CHECK(frames[0].cells[1].kind == MbKind::Intra16x16);
    CHECK(frames[1].frame_type == FrameType::P);
    CHECK(frames[1].frame_index == 1);
    CHECK(frames[1].cells[0].kind == MbKind::ForwardPred);
    CHECK(frames[1].cells[0].partition == MbPartition::Four8x8);
    CHECK(frames[1].cells[1].kind == MbKind::Skip);
    CHECK(frames[1].cells[3].partition == MbPartition::Two16x8);
}

TEST_CASE("parse_debug_stream: empty input gives an empty list") {
    CHECK(parse_debug_stream("").empty());
}

TEST_CASE("parse_debug_stream errors") {
    SUBCASE("bad header type") {
        CHECK_THROWS_AS(parse_debug_stream("New frame, type: Q\ni  \n"), Error);
    }
    SUBCASE("bad partition mark carries the line number") {
        try {
            parse_debug_stream("New frame, type: I\ni  i  \niZ i  \n");
            FAIL("expected GrammarError");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::Grammar);
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("row outside a frame") {
        CHECK_THROWS_AS(parse_debug_stream("i  i  \n"), Error);
    }
    SUBCASE("frame with deviating column count") {
        const std::string text =
            "New frame, type: I\n"
            "i  i  \n"
            "New frame, type: P\n"
            "S  S  S  \n";
        try {
            parse_debug_stream(text);
            FAIL("expected DimensionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DimensionMismatch);
        }
    }
    SUBCASE("frame with extra rows") {
        const std::string text =
            "New frame, type: I\n"
            "i  \n"
            "New frame, type: P\n"
            "S  \n"
            "S  \n";
        try {
            parse_debug_stream(text);
            FAIL("expected DimensionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DimensionMismatch);
        }
    }
}

TEST_CASE("parse_mv_dump groups records by frame") {
    const std::string text =
        "framenum,source,blockw,blockh,srcx,srcy,dstx,dsty,flags,motion_x,motion_y,motion_scale\n"
        "1,-1,16,16,8,8,8,8,0,2,-3,4\n"
        "1,1,8,8,20,12,20,12,0,0,0,4\n"
        "3,-1,16,8,40,12,40,12,0,-8,1,4\n";
    auto by_frame = parse_mv_dump(text);
    REQUIRE(by_frame.size() == 2);
    REQUIRE(by_frame[1].size() == 2);
    const MotionVector& a = by_frame[1][0];
    CHECK(a.dx == 2);
    CHECK(a.dy == -3);
    CHECK(a.direction == MvDirection::Past);
    CHECK(a.block_x == 0);
    CHECK(a.block_y == 0);
    CHECK(a.block_w == 16);
    const MotionVector& b = by_frame[1][1];
    CHECK(b.direction == MvDirection::Future);
    CHECK(b.block_x == 16);
    CHECK(b.block_y == 8);
    REQUIRE(by_frame[3].size() == 1);
    CHECK(by_frame[3][0].block_w == 16);
    CHECK(by_frame[3][0].block_h == 8);
}

TEST_CASE("parse_mv_dump rejects bad block sizes and malformed rows") {
    const std::string header =
        "framenum,source,blockw,blockh,srcx,srcy,dstx,dsty,flags,motion_x,motion_y,motion_scale\n";
    try {
        parse_mv_dump(header + "0,-1,13,16,8,8,8,8,0,0,0,4\n");
        FAIL("expected InvalidBlockSize");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidBlockSize);
    }
    try {
        parse_mv_dump(header + "0,-1,16,16,8,8\n");
        FAIL("expected GrammarError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Grammar);
        CHECK(e.line() == 2);
    }
    CHECK(parse_mv_dump("").empty());
}

TEST_CASE("merge attaches vectors to cells; intra frames stay empty") {
    // 48x32 video -> 2x3 grid
    const std::string mb =
        "New frame, type: I\n"
        "i  i  i  \n"
        "i  i  i  \n"
        "New frame, type: P\n"
        ">  S  >+ \n"
        "S  >  I  \n";
    auto matrices = parse_debug_stream(mb);
    std::map<int, std::vector<MotionVector>> mv_map;
    MotionVector mv;
    mv.dx = 4; mv.dy = 0; mv.direction = MvDirection::Past;
    mv.block_x = 0; mv.block_y = 0; mv.block_w = 16; mv.block_h = 16;
    mv_map[1].push_back(mv);          // cell (0,0)
    mv.block_x = 36; mv.block_y = 4; mv.block_w = 8; mv.block_h = 8;
    mv_map[1].push_back(mv);          // cell (0,2), 8x8 partition
    mv.block_x = 16; mv.block_y = 16; mv.block_w = 16; mv.block_h = 16;
    mv_map[1].push_back(mv);          // cell (1,1)

    auto grids = merge_mb_and_mv(matrices, mv_map, 48, 32);
    REQUIRE(grids.size() == 2);
    for (const auto& cell : grids[0].cells) CHECK(cell.mvs.empty());
    CHECK(grids[1].at(0, 0).mvs.size() == 1);
    CHECK(grids[1].at(0, 2).mvs.size() == 1);
    CHECK(grids[1].at(1, 1).mvs.size() == 1);

    // conservation: every record attached exactly once
    size_t attached = 0;
    for (const auto& cell : grids[1].cells) attached += cell.mvs.size();
    CHECK(attached == 3);
}

TEST_CASE("merge: skip cells keep their exported vectors, MBM ignores them") {
    const std::string mb = "New frame, type: P\nS  \n";
    auto matrices = parse_debug_stream(mb);
    std::map<int, std::vector<MotionVector>> mv_map;
    MotionVector mv;
    mv.dx = 1; mv.dy = 1; mv.block_x = 0; mv.block_y = 0; mv.block_w = 16; mv.block_h = 16;
    mv_map[0].push_back(mv);
    auto grids = merge_mb_and_mv(matrices, mv_map, 16, 16);
    CHECK(grids[0].at(0, 0).mvs.size() == 1);
}

TEST_CASE("merge errors: orphan vectors and vectors on intra cells") {
    const std::string mb = "New frame, type: P\nI  >  \n";
    auto matrices = parse_debug_stream(mb);
    MotionVector mv;
    mv.block_w = 16; mv.block_h = 16;

    SUBCASE("orphan") {
        std::map<int, std::vector<MotionVector>> mv_map;
        mv.block_x = 64; mv.block_y = 0; // outside the 1x2 grid
        mv_map[0].push_back(mv);
        try {
            merge_mb_and_mv(matrices, mv_map, 32, 16);
            FAIL("expected OrphanVector");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::OrphanVector);
        }
    }
    SUBCASE("vector on an intra cell aborts") {
        std::map<int, std::vector<MotionVector>> mv_map;
        mv.block_x = 0; mv.block_y = 0;
        mv_map[0].push_back(mv);
        try {
            merge_mb_and_mv(matrices, mv_map, 32, 16);
            FAIL("expected MvOnIntra");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::MvOnIntra);
        }
    }
    SUBCASE("matrix that does not fit the video dimensions") {
        std::map<int, std::vector<MotionVector>> mv_map;
        try {
            merge_mb_and_mv(matrices, mv_map, 64, 64);
            FAIL("expected DimensionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::DimensionMismatch);
        }
    }
}

TEST_CASE("merge sorts vectors canonically") {
    const std::string mb = "New frame, type: P\n>+ \n";
    auto matrices = parse_debug_stream(mb);
    std::map<int, std::vector<MotionVector>> mv_map;
    MotionVector mv;
    mv.block_w = 8; mv.block_h = 8;
    mv.block_x = 8; mv.block_y = 8; mv.dx = 3;
    mv_map[0].push_back(mv);
    mv.block_x = 0; mv.block_y = 0; mv.dx = 1;
    mv_map[0].push_back(mv);
    mv.block_x = 8; mv.block_y = 0; mv.dx = 2;
    mv_map[0].push_back(mv);
    auto grids = merge_mb_and_mv(matrices, mv_map, 16, 16);
    const auto& mvs = grids[0].at(0, 0).mvs;
    REQUIRE(mvs.size() == 3);
    CHECK(mvs[0].dx == 1);
    CHECK(mvs[1].dx == 2);
    CHECK(mvs[2].dx == 3);
}

// Golden-file tests against dumps captured from the pinned codec tool.

TEST_CASE("golden fixture parses to the committed cell dimensions") {
    auto matrices = parse_debug_stream(slurp(kFixtures + "/clip320.mb.txt"));
    REQUIRE(matrices.size() == 2);
    for (const auto& m : matrices) {
        CHECK(m.rows == 15);  // ceil(240/16)
        CHECK(m.cols == 20);  // ceil(320/16)
        CHECK(m.cells.size() == 300);
    }
    CHECK(matrices[0].frame_type == FrameType::I);
    CHECK(matrices[1].frame_type == FrameType::P);
}

TEST_CASE("golden fixture: mutating a known line raises GrammarError there") {
    std::string text = slurp(kFixtures + "/clip320.mb.txt");
    // line 1 is the first header, line 2 the first row; corrupt line 5's
    // first partition mark
    size_t pos = 0;
    for (int skip = 0; skip < 4; ++skip) pos = text.find('\n', pos) + 1;
    text[pos + 1] = 'Z';
    try {
        parse_debug_stream(text);
        FAIL("expected GrammarError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Grammar);
        CHECK(e.line() == 5);
    }
}

TEST_CASE("golden fixture: mv dump count and conservation through merge") {
    auto matrices = parse_debug_stream(slurp(kFixtures + "/clip320.mb.txt"));
    auto mv_map = parse_mv_dump(slurp(kFixtures + "/clip320.mv.txt"));

    // frozen when the fixture was recorded: records live on the P-frame only
    size_t dump_records = 0;
    for (const auto& [frame, mvs] : mv_map) dump_records += mvs.size();
    CHECK(mv_map.size() == 1);
    CHECK(mv_map.count(1) == 1);

    auto grids = merge_mb_and_mv(matrices, mv_map, 320, 240);
    size_t attached = 0;
    for (const auto& g : grids)
        for (const auto& cell : g.cells) attached += cell.mvs.size();
    CHECK(attached == dump_records);
    CHECK(attached == 355); // frozen count from the committed dump

    // I-frame carries intra cells only
    for (const auto& cell : grids[0].cells) {
        CHECK(cell.mb_type.is_intra());
        CHECK(cell.mvs.empty());
    }
}
