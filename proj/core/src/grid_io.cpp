#include "recomp/grid_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "recomp/errors.hpp"

namespace recomp {

namespace {

const char* kind_name(MbKind k) {
    switch (k) {
    case MbKind::Intra4x4: return "intra4x4";
    case MbKind::Intra16x16: return "intra16x16";
    case MbKind::Skip: return "skip";
    case MbKind::ForwardPred: return "fwd";
    case MbKind::BackwardPred: return "bwd";
    case MbKind::Bidirectional: return "bidir";
    case MbKind::Other: return "other";
    }
    return "other";
}

const char* partition_name(MbPartition p) {
    switch (p) {
    case MbPartition::Whole16x16: return "16x16";
    case MbPartition::Two16x8: return "16x8";
    case MbPartition::Two8x16: return "8x16";
    case MbPartition::Four8x8: return "8x8";
    }
    return "16x16";
}

void append_kind(std::string& out, const MacroblockType& t) {
    if (t.kind == MbKind::Other) {
        out += "other:";
        unsigned char c = static_cast<unsigned char>(t.raw);
        if (c > 0x20 && c < 0x7f) {
            out += static_cast<char>(c);
        } else {
            char buf[8];
            snprintf(buf, sizeof buf, "#x%02X", c);
            out += buf;
        }
    } else {
        out += kind_name(t.kind);
    }
}

struct Tokenizer {
    std::string_view line;
    size_t pos = 0;
    long line_no;

    std::string_view next() {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        if (pos >= line.size())
            throw Error(Errc::Grammar, line_no, "unexpected end of line");
        size_t start = pos;
        while (pos < line.size() && line[pos] != ' ') ++pos;
        return line.substr(start, pos - start);
    }
    bool at_end() {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        return pos >= line.size();
    }
};

long to_int(std::string_view s, long line_no) {
    long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw Error(Errc::Grammar, line_no, "bad integer '" + std::string(s) + "'");
    return v;
}

MacroblockType parse_kind_token(std::string_view tok, std::string_view part, long line_no) {
    MacroblockType t;
    if (tok == "intra4x4") { t.kind = MbKind::Intra4x4; t.raw = 'i'; }
    else if (tok == "intra16x16") { t.kind = MbKind::Intra16x16; t.raw = 'I'; }
    else if (tok == "skip") { t.kind = MbKind::Skip; t.raw = 'S'; }
    else if (tok == "fwd") { t.kind = MbKind::ForwardPred; t.raw = '>'; }
    else if (tok == "bwd") { t.kind = MbKind::BackwardPred; t.raw = '<'; }
    else if (tok == "bidir") { t.kind = MbKind::Bidirectional; t.raw = 'X'; }
    else if (tok.starts_with("other:")) {
        t.kind = MbKind::Other;
        std::string_view raw = tok.substr(6);
        if (raw.size() == 1) {
            t.raw = raw[0];
        } else if (raw.size() == 4 && raw.starts_with("#x")) {
            unsigned v = 0;
            auto [p, ec] = std::from_chars(raw.data() + 2, raw.data() + 4, v, 16);
            if (ec != std::errc() || p != raw.data() + 4)
                throw Error(Errc::Grammar, line_no, "bad other-kind token '" + std::string(tok) + "'");
            t.raw = static_cast<char>(v);
        } else {
            throw Error(Errc::Grammar, line_no, "bad other-kind token '" + std::string(tok) + "'");
        }
    } else {
        throw Error(Errc::Grammar, line_no, "unknown kind '" + std::string(tok) + "'");
    }

    if (part == "16x16") t.partition = MbPartition::Whole16x16;
    else if (part == "16x8") t.partition = MbPartition::Two16x8;
    else if (part == "8x16") t.partition = MbPartition::Two8x16;
    else if (part == "8x8") t.partition = MbPartition::Four8x8;
    else throw Error(Errc::Grammar, line_no, "unknown partition '" + std::string(part) + "'");
    return t;
}

} // namespace

std::string serialize_grids(std::span<const FrameGrid> grids) {
    std::string out;
    char buf[128];
    for (const FrameGrid& g : grids) {
        snprintf(buf, sizeof buf, "frame %d %c %dx%d\n", g.frame_index,
                 static_cast<char>(g.frame_type), g.rows, g.cols);
        out += buf;
        for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) {
                const MacroblockMode& cell = g.at(r, c);
                snprintf(buf, sizeof buf, "%d %d ", r, c);
                out += buf;
                append_kind(out, cell.mb_type);
                out += ' ';
                out += partition_name(cell.mb_type.partition);
                for (const MotionVector& mv : cell.mvs) {
                    snprintf(buf, sizeof buf, " %d,%d,%c@%d,%d,%dx%d", mv.dx, mv.dy,
                             mv.direction == MvDirection::Past ? 'p' : 'f', mv.block_x,
                             mv.block_y, mv.block_w, mv.block_h);
                    out += buf;
                }
                out += '\n';
            }
        }
    }
    return out;
}

std::vector<FrameGrid> parse_grids(std::string_view text) {
    std::vector<FrameGrid> grids;
    FrameGrid* g = nullptr;
    size_t cell_count = 0;
    long line_no = 0;
    size_t pos = 0;

    auto check_complete = [&](long at_line) {
        if (g && cell_count != g->cells.size())
            throw Error(Errc::Grammar, at_line,
                        "frame " + std::to_string(g->frame_index) + " has " +
                            std::to_string(cell_count) + " cells, expected " +
                            std::to_string(g->cells.size()));
    };

    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        Tokenizer tok{line, 0, line_no};
        std::string_view first = tok.next();
        if (first == "frame") {
            check_complete(line_no);
            std::string_view idx = tok.next();
            std::string_view type = tok.next();
            std::string_view dims = tok.next();
            if (type.size() != 1 || (type[0] != 'I' && type[0] != 'P' && type[0] != 'B'))
                throw Error(Errc::Grammar, line_no, "bad frame type '" + std::string(type) + "'");
            size_t x = dims.find('x');
            if (x == std::string_view::npos)
                throw Error(Errc::Grammar, line_no, "bad dims '" + std::string(dims) + "'");
            FrameGrid fg;
            fg.frame_index = static_cast<int>(to_int(idx, line_no));
            fg.frame_type = static_cast<FrameType>(type[0]);
            fg.rows = static_cast<int>(to_int(dims.substr(0, x), line_no));
            fg.cols = static_cast<int>(to_int(dims.substr(x + 1), line_no));
            if (fg.rows <= 0 || fg.cols <= 0)
                throw Error(Errc::Grammar, line_no, "bad dims '" + std::string(dims) + "'");
            fg.cells.resize(static_cast<size_t>(fg.rows) * fg.cols);
            grids.push_back(std::move(fg));
            g = &grids.back();
            cell_count = 0;
            continue;
        }

        if (!g) throw Error(Errc::Grammar, line_no, "cell line before any frame header");
        int r = static_cast<int>(to_int(first, line_no));
        int c = static_cast<int>(to_int(tok.next(), line_no));
        if (r < 0 || r >= g->rows || c < 0 || c >= g->cols)
            throw Error(Errc::Grammar, line_no,
                        "cell (" + std::to_string(r) + "," + std::to_string(c) + ") out of range");
        std::string_view kind = tok.next();
        std::string_view part = tok.next();
        MacroblockMode cell;
        cell.mb_type = parse_kind_token(kind, part, line_no);
        while (!tok.at_end()) {
            std::string_view mvtok = tok.next();
            // dx,dy,dir@bx,by,WxH
            MotionVector mv;
            int fields[6];
            char dir = 0;
            size_t at = mvtok.find('@');
            if (at == std::string_view::npos)
                throw Error(Errc::Grammar, line_no, "bad vector '" + std::string(mvtok) + "'");
            std::string_view head = mvtok.substr(0, at), tail = mvtok.substr(at + 1);
            size_t c1 = head.find(','), c2 = head.rfind(',');
            if (c1 == std::string_view::npos || c2 == c1 || c2 + 2 != head.size())
                throw Error(Errc::Grammar, line_no, "bad vector '" + std::string(mvtok) + "'");
            fields[0] = static_cast<int>(to_int(head.substr(0, c1), line_no));
            fields[1] = static_cast<int>(to_int(head.substr(c1 + 1, c2 - c1 - 1), line_no));
            dir = head[c2 + 1];
            if (dir != 'p' && dir != 'f')
                throw Error(Errc::Grammar, line_no, "bad direction '" + std::string(mvtok) + "'");
            size_t t1 = tail.find(','), t2 = tail.rfind(',');
            if (t1 == std::string_view::npos || t2 == t1)
                throw Error(Errc::Grammar, line_no, "bad vector '" + std::string(mvtok) + "'");
            std::string_view size = tail.substr(t2 + 1);
            size_t x = size.find('x');
            if (x == std::string_view::npos)
                throw Error(Errc::Grammar, line_no, "bad vector '" + std::string(mvtok) + "'");
            fields[2] = static_cast<int>(to_int(tail.substr(0, t1), line_no));
            fields[3] = static_cast<int>(to_int(tail.substr(t1 + 1, t2 - t1 - 1), line_no));
            fields[4] = static_cast<int>(to_int(size.substr(0, x), line_no));
            fields[5] = static_cast<int>(to_int(size.substr(x + 1), line_no));
            mv.dx = fields[0];
            mv.dy = fields[1];
            mv.direction = dir == 'p' ? MvDirection::Past : MvDirection::Future;
            mv.block_x = fields[2];
            mv.block_y = fields[3];
            mv.block_w = fields[4];
            mv.block_h = fields[5];
            cell.mvs.push_back(mv);
        }
        g->at(r, c) = std::move(cell);
        ++cell_count;
    }
    check_complete(line_no);
    return grids;
}

void write_grids_file(const std::filesystem::path& path, std::span<const FrameGrid> grids) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << serialize_grids(grids);
    if (!out) throw Error(Errc::Io, "short write to " + path.string());
}

std::vector<FrameGrid> read_grids_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grids(std::move(ss).str());
}

} // namespace recomp
