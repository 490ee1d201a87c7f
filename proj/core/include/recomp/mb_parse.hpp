#pragma once

#include <filesystem>
#include <map>
#include <string_view>
#include <vector>

#include "recomp/mb_types.hpp"

namespace recomp {

/// Classify one cell of the decoder's macroblock debug alphabet.
/// Total: unknown type symbols map to Other with the symbol preserved.
///
/// Type symbols: 'i' intra 4x4, 'I' intra 16x16, 'S' skipped, 'D'/'d'
/// direct (B slices, no own vector data — folded into Skip), '>' forward
/// prediction, '<' backward prediction, 'X' bidirectional.
/// Partition marks: ' ' whole 16x16, '-' two 16x8, '|' two 8x16, '+' four 8x8.
MacroblockType classify_symbol(char type_symbol, char partition_mark = ' ');

/// One frame's matrix of macroblock types, before motion vectors are merged.
struct TypeMatrix {
    int frame_index = 0;
    FrameType frame_type = FrameType::I;
    int rows = 0;
    int cols = 0;
    std::vector<MacroblockType> cells; // row-major

    friend bool operator==(const TypeMatrix&, const TypeMatrix&) = default;
};

/// Parse the decoder's macroblock-type debug text: a "New frame, type: X"
/// header per frame followed by one symbol row per macroblock row (three
/// characters per cell). Frames are indexed in order of appearance.
///
/// Throws Error(Grammar) with the 1-based line number for malformed lines
/// and Error(DimensionMismatch) when a frame's matrix size deviates from
/// the first frame's.
std::vector<TypeMatrix> parse_debug_stream(std::string_view text);

/// Parse the motion-vector dump (one CSV record per exported vector):
///   frame,source,blockw,blockh,srcx,srcy,dstx,dsty,flags,motion_x,motion_y,motion_scale
/// Records are grouped by frame index. Block origin is derived from the
/// record's block-center destination coordinates.
std::map<int, std::vector<MotionVector>> parse_mv_dump(std::string_view text);

/// Join the two extraction channels into complete per-frame grids.
/// Every vector attaches to the cell containing its block origin; vectors
/// landing on intra cells abort with MvOnIntra (channel desynchronization),
/// vectors outside the grid abort with OrphanVector. Cell vector lists come
/// out in canonical order.
std::vector<FrameGrid> merge_mb_and_mv(const std::vector<TypeMatrix>& matrices,
                                       const std::map<int, std::vector<MotionVector>>& mv_map,
                                       int width_px, int height_px);

/// File-level convenience: read both dump files and merge.
std::vector<FrameGrid> extract_frame_grids(const std::filesystem::path& mb_debug_path,
                                           const std::filesystem::path& mv_dump_path,
                                           int width_px, int height_px);

} // namespace recomp
