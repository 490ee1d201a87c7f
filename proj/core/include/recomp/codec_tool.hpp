#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace recomp {

struct VideoInfo {
    std::filesystem::path path;
    int width = 0;
    int height = 0;
    long frame_count = 0;
    double frame_rate = 0.0;
    std::string codec_name;
};

/// Encoder settings held constant across every generation of a ladder.
struct EncodeConfig {
    int quality_scale = 23; // constant-quality factor (CRF)
    int gop_length = 12;
    int b_frames = 2;
    std::string preset = "medium";

    std::string to_string() const;

    friend bool operator==(const EncodeConfig&, const EncodeConfig&) = default;
};

/// Handle on the external encoder/decoder executable. All codec work runs
/// through child processes of this tool; the library never decodes video
/// in-process.
class CodecTool {
public:
    /// Resolution order: explicit override, RECOMP_CODEC_TOOL environment
    /// variable, `recomp-codecd` next to the current executable, PATH.
    static CodecTool locate(std::optional<std::filesystem::path> override_path = std::nullopt);

    explicit CodecTool(std::filesystem::path exe) : exe_(std::move(exe)) {}

    const std::filesystem::path& executable() const { return exe_; }

    /// Tool identity used for ladder pinning, e.g. "recomp-codecd 0.1.0 (lavc 58.134.100)".
    const std::string& version() const;

    /// Full-decode probe; frame_count comes from counting decoded frames.
    VideoInfo probe(const std::filesystem::path& video) const;

    /// Re-encode src at the config's constant quality scale, audio dropped.
    /// Verifies that the output frame count matches the input.
    void recompress(const std::filesystem::path& src, const EncodeConfig& config,
                    const std::filesystem::path& dst) const;

    /// Capture the decoder's per-frame macroblock-type debug matrices.
    std::filesystem::path dump_mb_debug(const std::filesystem::path& video,
                                        const std::filesystem::path& out) const;

    /// Export per-block motion vectors as CSV records.
    std::filesystem::path dump_motion_vectors(const std::filesystem::path& video,
                                              const std::filesystem::path& out) const;

    /// Procedurally generate a seeded clip and encode it once.
    void synthesize_clip(const std::filesystem::path& out, int width, int height, int frames,
                         int fps, uint64_t seed, const EncodeConfig& config) const;

private:
    std::filesystem::path exe_;
    mutable std::string version_;
};

} // namespace recomp
