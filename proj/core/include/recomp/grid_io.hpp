#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recomp/mb_types.hpp"

namespace recomp {

/// Canonical, bit-exact grid serialization used for fixtures and caching.
///
/// Line-oriented text:
///   frame <index> <type> <rows>x<cols>
///   <row> <col> <kind> <partition> [dx,dy,dir ...]
/// one cell per line, cells in row-major order, dir in {p,f}.
/// Kinds: intra4x4 intra16x16 skip fwd bwd bidir other:<symbol>.
/// Partitions: 16x16 16x8 8x16 8x8.
std::string serialize_grids(std::span<const FrameGrid> grids);

/// Inverse of serialize_grids. Throws Error(Grammar) with a line number on
/// malformed input.
std::vector<FrameGrid> parse_grids(std::string_view text);

void write_grids_file(const std::filesystem::path& path, std::span<const FrameGrid> grids);
std::vector<FrameGrid> read_grids_file(const std::filesystem::path& path);

} // namespace recomp
