#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "recomp/codec_tool.hpp"
#include "recomp/mb_types.hpp"

namespace recomp {

struct LadderGeneration {
    int index = 0; // 0 = the unmodified suspect video
    std::filesystem::path video;
    std::filesystem::path mb_debug;
    std::filesystem::path mv_dump;
};

/// A chain of n+1 generations: the suspect video followed by n successive
/// re-encodes at one constant quality scale, with both extraction dumps
/// captured per generation.
struct RecompressionLadder {
    std::filesystem::path dir;
    std::string tool_version;
    VideoInfo input;
    EncodeConfig config;
    int n = 0;
    std::vector<LadderGeneration> generations;
};

/// Build a ladder under `dir` (created; removed again on failure).
/// Generation 0 references `src` in place; generations 1..n are written
/// into the directory together with their dumps and a ladder.txt manifest.
RecompressionLadder build_ladder(const CodecTool& tool, const std::filesystem::path& src, int n,
                                 const EncodeConfig& config, const std::filesystem::path& dir);

/// Load a ladder directory written by build_ladder.
RecompressionLadder load_ladder(const std::filesystem::path& dir);

/// Parse and merge both dumps of one generation.
std::vector<FrameGrid> ladder_generation_grids(const RecompressionLadder& ladder, int generation);

/// All generations' grids, in order. Refuses to run when `tool`'s version
/// differs from the one recorded in the ladder.
std::vector<std::vector<FrameGrid>> ladder_grids(const CodecTool& tool,
                                                 const RecompressionLadder& ladder);

/// Remove a ladder directory (the suspect video itself is never deleted).
void delete_ladder(const RecompressionLadder& ladder);

} // namespace recomp
