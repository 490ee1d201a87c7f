#include "recomp/mb_parse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "recomp/errors.hpp"

namespace recomp {

namespace {

constexpr std::string_view kFrameHeaderPrefix = "New frame, type: ";

bool is_partition_mark(char c) { return c == ' ' || c == '-' || c == '|' || c == '+'; }
bool is_interlace_mark(char c) { return c == ' ' || c == '='; }

std::string excerpt_of(std::string_view line) {
    std::string e(line.substr(0, 40));
    if (line.size() > 40) e += "...";
    return e;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

} // namespace

MacroblockType classify_symbol(char type_symbol, char partition_mark) {
    MacroblockType t;
    t.raw = type_symbol;
    switch (type_symbol) {
    case 'i': t.kind = MbKind::Intra4x4; break;
    case 'I': t.kind = MbKind::Intra16x16; break;
    case 'S': t.kind = MbKind::Skip; break;
    case 'D': t.kind = MbKind::Skip; break; // direct, B slices
    case 'd': t.kind = MbKind::Skip; break; // direct + skipped
    case '>': t.kind = MbKind::ForwardPred; break;
    case '<': t.kind = MbKind::BackwardPred; break;
    case 'X': t.kind = MbKind::Bidirectional; break;
    default: t.kind = MbKind::Other; break;
    }
    switch (partition_mark) {
    case '-': t.partition = MbPartition::Two16x8; break;
    case '|': t.partition = MbPartition::Two8x16; break;
    case '+': t.partition = MbPartition::Four8x8; break;
    default: t.partition = MbPartition::Whole16x16; break;
    }
    return t;
}

std::vector<TypeMatrix> parse_debug_stream(std::string_view text) {
    std::vector<TypeMatrix> frames;
    TypeMatrix current;
    bool in_frame = false;
    int expected_rows = -1; // fixed by the first complete frame
    int expected_cols = -1;
    long line_no = 0;

    auto finish_frame = [&]() {
        if (!in_frame) return;
        if (current.rows == 0)
            throw Error(Errc::Grammar, line_no, "frame header with no matrix rows");
        if (expected_rows < 0) {
            expected_rows = current.rows;
            expected_cols = current.cols;
        } else if (current.rows != expected_rows) {
            throw Error(Errc::DimensionMismatch,
                        "frame " + std::to_string(current.frame_index) + " has " +
                            std::to_string(current.rows) + " rows, expected " +
                            std::to_string(expected_rows));
        }
        frames.push_back(std::move(current));
        current = {};
        in_frame = false;
    };

    size_t pos = 0;
    while (pos <= text.size()) {
        if (pos == text.size()) break;
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (line.starts_with(kFrameHeaderPrefix)) {
            std::string_view rest = line.substr(kFrameHeaderPrefix.size());
            if (rest.size() != 1 || (rest[0] != 'I' && rest[0] != 'P' && rest[0] != 'B'))
                throw Error(Errc::Grammar, line_no,
                            "bad frame type in header: " + excerpt_of(line));
            finish_frame();
            current.frame_index = static_cast<int>(frames.size());
            current.frame_type = static_cast<FrameType>(rest[0]);
            in_frame = true;
            continue;
        }

        if (line.empty()) {
            // blank lines are tolerated only between frames
            if (in_frame && current.rows > 0 &&
                (expected_rows < 0 || current.rows == expected_rows))
                finish_frame();
            else if (in_frame)
                throw Error(Errc::Grammar, line_no, "blank line inside a macroblock matrix");
            continue;
        }

        if (!in_frame)
            throw Error(Errc::Grammar, line_no,
                        "matrix row outside any frame: " + excerpt_of(line));

        // one matrix row; cells are 3 characters [type][partition][interlace],
        // the final cell's trailing blanks may be absent
        int cols = static_cast<int>((line.size() + 2) / 3);
        if (current.rows == 0)
            current.cols = expected_cols < 0 ? cols : expected_cols;
        if (cols != current.cols)
            throw Error(Errc::DimensionMismatch,
                        "row of " + std::to_string(cols) + " cells at line " +
                            std::to_string(line_no) + ", expected " +
                            std::to_string(current.cols));
        if (expected_rows > 0 && current.rows == expected_rows)
            throw Error(Errc::DimensionMismatch,
                        "frame " + std::to_string(current.frame_index) +
                            " has more rows than expected " + std::to_string(expected_rows));
        for (int c = 0; c < cols; ++c) {
            size_t base = static_cast<size_t>(c) * 3;
            char type_ch = line[base];
            char part_ch = base + 1 < line.size() ? line[base + 1] : ' ';
            char lace_ch = base + 2 < line.size() ? line[base + 2] : ' ';
            if (!is_partition_mark(part_ch))
                throw Error(Errc::Grammar, line_no,
                            std::string("bad partition mark '") + part_ch +
                                "': " + excerpt_of(line));
            if (!is_interlace_mark(lace_ch))
                throw Error(Errc::Grammar, line_no,
                            std::string("bad cell terminator '") + lace_ch +
                                "': " + excerpt_of(line));
            current.cells.push_back(classify_symbol(type_ch, part_ch));
        }
        current.rows += 1;
    }
    finish_frame();
    return frames;
}

namespace {

// strict integer field parse, leading spaces tolerated
long parse_int_field(std::string_view field, long line_no) {
    size_t i = 0;
    while (i < field.size() && field[i] == ' ') ++i;
    long value = 0;
    auto [p, ec] = std::from_chars(field.data() + i, field.data() + field.size(), value);
    if (ec != std::errc() || p != field.data() + field.size())
        throw Error(Errc::Grammar, line_no, "bad integer field '" + std::string(field) + "'");
    return value;
}

} // namespace

std::map<int, std::vector<MotionVector>> parse_mv_dump(std::string_view text) {
    std::map<int, std::vector<MotionVector>> by_frame;
    long line_no = 0;
    size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen && line.starts_with("framenum,")) {
            header_seen = true;
            continue;
        }

        long f[12];
        int nfields = 0;
        size_t start = 0;
        for (size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (nfields >= 12)
                    throw Error(Errc::Grammar, line_no, "too many fields: " + excerpt_of(line));
                f[nfields++] = parse_int_field(line.substr(start, i - start), line_no);
                start = i + 1;
            }
        }
        if (nfields != 12)
            throw Error(Errc::Grammar, line_no,
                        "expected 12 fields, got " + std::to_string(nfields) + ": " +
                            excerpt_of(line));

        MotionVector mv;
        int frame = static_cast<int>(f[0]);
        long source = f[1];
        mv.block_w = static_cast<int>(f[2]);
        mv.block_h = static_cast<int>(f[3]);
        if ((mv.block_w != 4 && mv.block_w != 8 && mv.block_w != 16) ||
            (mv.block_h != 4 && mv.block_h != 8 && mv.block_h != 16))
            throw Error(Errc::InvalidBlockSize, std::to_string(mv.block_w) + "x" +
                                                    std::to_string(mv.block_h) + " at line " +
                                                    std::to_string(line_no));
        mv.direction = source < 0 ? MvDirection::Past : MvDirection::Future;
        // fields 4,5 are the source block center; 8 is flags — all derivable/unused
        mv.block_x = static_cast<int>(f[6]) - mv.block_w / 2;
        mv.block_y = static_cast<int>(f[7]) - mv.block_h / 2;
        mv.dx = static_cast<int>(f[9]);
        mv.dy = static_cast<int>(f[10]);
        by_frame[frame].push_back(mv);
    }
    return by_frame;
}

std::vector<FrameGrid> merge_mb_and_mv(const std::vector<TypeMatrix>& matrices,
                                       const std::map<int, std::vector<MotionVector>>& mv_map,
                                       int width_px, int height_px) {
    const int rows = mb_grid_rows(height_px);
    const int cols = mb_grid_cols(width_px);
    std::vector<FrameGrid> grids;
    grids.reserve(matrices.size());

    for (const TypeMatrix& m : matrices) {
        if (m.rows != rows || m.cols != cols)
            throw Error(Errc::DimensionMismatch,
                        "matrix " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                            " does not fit " + std::to_string(width_px) + "x" +
                            std::to_string(height_px) + " (want " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ")");
        FrameGrid g;
        g.frame_index = m.frame_index;
        g.frame_type = m.frame_type;
        g.rows = rows;
        g.cols = cols;
        g.cells.resize(static_cast<size_t>(rows) * cols);
        for (size_t i = 0; i < m.cells.size(); ++i) g.cells[i].mb_type = m.cells[i];

        if (auto it = mv_map.find(m.frame_index); it != mv_map.end()) {
            for (const MotionVector& mv : it->second) {
                int r = mv.block_y / kMacroblockSize;
                int c = mv.block_x / kMacroblockSize;
                if (mv.block_x < 0 || mv.block_y < 0 || r >= rows || c >= cols)
                    throw Error(Errc::OrphanVector,
                                "block at (" + std::to_string(mv.block_x) + "," +
                                    std::to_string(mv.block_y) + ") outside frame " +
                                    std::to_string(m.frame_index));
                MacroblockMode& cell = g.at(r, c);
                if (cell.mb_type.is_intra())
                    throw Error(Errc::MvOnIntra,
                                "vector on intra cell (" + std::to_string(r) + "," +
                                    std::to_string(c) + ") of frame " +
                                    std::to_string(m.frame_index));
                cell.mvs.push_back(mv);
            }
        }
        for (MacroblockMode& cell : g.cells) std::sort(cell.mvs.begin(), cell.mvs.end());
        grids.push_back(std::move(g));
    }
    return grids;
}

std::vector<FrameGrid> extract_frame_grids(const std::filesystem::path& mb_debug_path,
                                           const std::filesystem::path& mv_dump_path,
                                           int width_px, int height_px) {
    auto matrices = parse_debug_stream(read_file(mb_debug_path));
    auto mvs = parse_mv_dump(read_file(mv_dump_path));
    return merge_mb_and_mv(matrices, mvs, width_px, height_px);
}

} // namespace recomp
