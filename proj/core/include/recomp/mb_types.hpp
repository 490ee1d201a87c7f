#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace recomp {

// 16x16 luma macroblocks; partial edge blocks at non-multiple-of-16
// resolutions still occupy one grid cell.
inline constexpr int kMacroblockSize = 16;

enum class MbKind : uint8_t {
    Intra4x4,
    Intra16x16,
    Skip,
    ForwardPred,
    BackwardPred,
    Bidirectional,
    Other,
};

enum class MbPartition : uint8_t {
    Whole16x16,
    Two16x8,
    Two8x16,
    Four8x8,
};

/// A macroblock's coding type as read from the decoder's debug alphabet.
/// `raw` keeps the original symbol; it only participates in equality for
/// Other (unrecognized) kinds, where it is all we know about the type.
struct MacroblockType {
    MbKind kind = MbKind::Other;
    MbPartition partition = MbPartition::Whole16x16;
    char raw = '?';

    bool is_intra() const { return kind == MbKind::Intra4x4 || kind == MbKind::Intra16x16; }
    bool is_skip() const { return kind == MbKind::Skip; }

    friend bool operator==(const MacroblockType& a, const MacroblockType& b) {
        if (a.kind != b.kind || a.partition != b.partition) return false;
        return a.kind != MbKind::Other || a.raw == b.raw;
    }
};

enum class MvDirection : uint8_t { Past, Future };

/// One exported motion vector. dx/dy are kept in the decoder's raw integer
/// units (quarter-pel for H.264); block_x/block_y are the pixel origin of
/// the predicted block inside its frame.
struct MotionVector {
    int dx = 0;
    int dy = 0;
    MvDirection direction = MvDirection::Past;
    int block_x = 0;
    int block_y = 0;
    int block_w = 0;
    int block_h = 0;

    friend bool operator==(const MotionVector&, const MotionVector&) = default;

    // canonical ordering inside a macroblock: (block_y, block_x, direction),
    // remaining fields as total-order tiebreak
    friend auto operator<=>(const MotionVector& a, const MotionVector& b) {
        auto key = [](const MotionVector& m) {
            return std::tuple(m.block_y, m.block_x, m.direction, m.dx, m.dy, m.block_w, m.block_h);
        };
        return key(a) <=> key(b);
    }
};

/// The paper's MBM: macroblock type plus its motion-vector list, vectors in
/// canonical order. Skip/intra cells may carry stale vectors; MBM equality
/// ignores them there (see feature.hpp mbm_equal).
struct MacroblockMode {
    MacroblockType mb_type;
    std::vector<MotionVector> mvs;

    friend bool operator==(const MacroblockMode&, const MacroblockMode&) = default;
};

enum class FrameType : char { I = 'I', P = 'P', B = 'B' };

/// One frame's macroblock matrix. rows = ceil(height/16), cols = ceil(width/16).
struct FrameGrid {
    int frame_index = 0;
    FrameType frame_type = FrameType::I;
    int rows = 0;
    int cols = 0;
    std::vector<MacroblockMode> cells; // row-major, rows*cols entries

    MacroblockMode& at(int r, int c) { return cells[static_cast<size_t>(r) * cols + c]; }
    const MacroblockMode& at(int r, int c) const {
        return cells[static_cast<size_t>(r) * cols + c];
    }

    friend bool operator==(const FrameGrid&, const FrameGrid&) = default;
};

inline int mb_grid_rows(int height_px) { return (height_px + kMacroblockSize - 1) / kMacroblockSize; }
inline int mb_grid_cols(int width_px) { return (width_px + kMacroblockSize - 1) / kMacroblockSize; }

} // namespace recomp
