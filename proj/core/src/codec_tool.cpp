#include "recomp/codec_tool.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

#include <unistd.h>

#include "recomp/errors.hpp"
#include "recomp/subprocess.hpp"

namespace recomp {

namespace fs = std::filesystem;

std::string EncodeConfig::to_string() const {
    std::ostringstream out;
    out << "quality=" << quality_scale << " gop=" << gop_length << " bframes=" << b_frames
        << " preset=" << preset;
    return std::move(out).str();
}

namespace {

// Driver failures come back as "error: <code>: <detail>" on stderr.
Errc map_tool_error(const std::string& stderr_text, Errc fallback) {
    auto has = [&](std::string_view code) {
        return stderr_text.find(std::string("error: ") + std::string(code)) != std::string::npos;
    };
    if (has("file_not_found")) return Errc::FileNotFound;
    if (has("not_a_video")) return Errc::NotAVideo;
    if (has("unsupported_codec")) return Errc::UnsupportedCodec;
    if (has("encoder_failure")) return Errc::EncoderFailure;
    if (has("decoder_failure")) return Errc::DecoderFailure;
    if (has("empty_debug_output")) return Errc::EmptyDebugOutput;
    return fallback;
}

[[noreturn]] void raise_tool_error(const std::string& action, const RunResult& r, Errc fallback) {
    std::string detail = r.error;
    while (!detail.empty() && (detail.back() == '\n' || detail.back() == '\r')) detail.pop_back();
    if (detail.size() > 500) detail = "..." + detail.substr(detail.size() - 500);
    throw Error(map_tool_error(r.error, fallback),
                action + " failed (exit " + std::to_string(r.exit_code) + "): " + detail);
}

std::map<std::string, std::string> parse_kv_output(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        size_t eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

fs::path current_executable_dir() {
    char buf[4096];
    ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
    if (n <= 0) return {};
    buf[n] = '\0';
    return fs::path(buf).parent_path();
}

} // namespace

CodecTool CodecTool::locate(std::optional<fs::path> override_path) {
    if (override_path) return CodecTool(*override_path);
    if (const char* env = std::getenv("RECOMP_CODEC_TOOL"); env && *env)
        return CodecTool(fs::path(env));
    fs::path beside = current_executable_dir() / "recomp-codecd";
    if (!beside.empty() && fs::exists(beside)) return CodecTool(beside);
    return CodecTool("recomp-codecd"); // rely on PATH
}

const std::string& CodecTool::version() const {
    if (!version_.empty()) return version_;
    RunResult r = run_process({exe_.string(), "version"});
    if (r.exit_code != 0) raise_tool_error("codec tool version probe", r, Errc::Io);
    std::string v = r.output;
    while (!v.empty() && (v.back() == '\n' || v.back() == '\r')) v.pop_back();
    if (v.empty()) throw Error(Errc::Io, "codec tool printed no version");
    version_ = v;
    return version_;
}

VideoInfo CodecTool::probe(const fs::path& video) const {
    if (!fs::exists(video)) throw Error(Errc::FileNotFound, video.string());
    RunResult r = run_process({exe_.string(), "probe", video.string()});
    if (r.exit_code != 0) raise_tool_error("probe of " + video.string(), r, Errc::NotAVideo);
    auto kv = parse_kv_output(r.output);
    VideoInfo info;
    info.path = video;
    try {
        info.width = std::stoi(kv.at("width"));
        info.height = std::stoi(kv.at("height"));
        info.frame_count = std::stol(kv.at("frames"));
        info.frame_rate = std::stod(kv.at("fps"));
        info.codec_name = kv.at("codec");
    } catch (const std::exception&) {
        throw Error(Errc::Io, "malformed probe output for " + video.string() + ": " + r.output);
    }
    if (info.codec_name != "h264")
        throw Error(Errc::UnsupportedCodec,
                    video.string() + " is " + info.codec_name + ", only h264 is supported");
    if (info.width <= 0 || info.height <= 0 || info.frame_count <= 0)
        throw Error(Errc::NotAVideo, video.string() + " has no decodable frames");
    return info;
}

void CodecTool::recompress(const fs::path& src, const EncodeConfig& config,
                           const fs::path& dst) const {
    if (!fs::exists(src)) throw Error(Errc::FileNotFound, src.string());
    RunResult r = run_process({exe_.string(), "encode", src.string(), dst.string(),
                               "--crf", std::to_string(config.quality_scale),
                               "--gop", std::to_string(config.gop_length),
                               "--bframes", std::to_string(config.b_frames),
                               "--preset", config.preset});
    if (r.exit_code != 0) raise_tool_error("re-encode of " + src.string(), r, Errc::EncoderFailure);
    auto kv = parse_kv_output(r.output);
    long in_frames = -1, out_frames = -1;
    try {
        in_frames = std::stol(kv.at("in_frames"));
        out_frames = std::stol(kv.at("out_frames"));
    } catch (const std::exception&) {
        throw Error(Errc::EncoderFailure, "malformed encode output: " + r.output);
    }
    if (in_frames != out_frames)
        throw Error(Errc::FrameCountMismatch,
                    src.string() + ": " + std::to_string(in_frames) + " in vs " +
                        std::to_string(out_frames) + " out");
}

fs::path CodecTool::dump_mb_debug(const fs::path& video, const fs::path& out) const {
    if (!fs::exists(video)) throw Error(Errc::FileNotFound, video.string());
    RunResult r = run_process({exe_.string(), "mbdump", video.string()}, out);
    if (r.exit_code != 0) raise_tool_error("mb debug dump of " + video.string(), r,
                                           Errc::DecoderFailure);
    std::error_code ec;
    if (fs::file_size(out, ec) == 0 || ec)
        throw Error(Errc::EmptyDebugOutput, "no macroblock matrices from " + video.string());
    return out;
}

fs::path CodecTool::dump_motion_vectors(const fs::path& video, const fs::path& out) const {
    if (!fs::exists(video)) throw Error(Errc::FileNotFound, video.string());
    RunResult r = run_process({exe_.string(), "mvdump", video.string()}, out);
    if (r.exit_code != 0) raise_tool_error("mv dump of " + video.string(), r,
                                           Errc::DecoderFailure);
    return out;
}

void CodecTool::synthesize_clip(const fs::path& out, int width, int height, int frames, int fps,
                                uint64_t seed, const EncodeConfig& config) const {
    RunResult r = run_process({exe_.string(), "synth", out.string(),
                               "--width", std::to_string(width),
                               "--height", std::to_string(height),
                               "--frames", std::to_string(frames),
                               "--fps", std::to_string(fps),
                               "--seed", std::to_string(seed),
                               "--crf", std::to_string(config.quality_scale),
                               "--gop", std::to_string(config.gop_length),
                               "--bframes", std::to_string(config.b_frames),
                               "--preset", config.preset});
    if (r.exit_code != 0) raise_tool_error("synthesis of " + out.string(), r, Errc::EncoderFailure);
}

} // namespace recomp
