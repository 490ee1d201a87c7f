#include "recomp/ladder.hpp"

#include <fstream>
#include <sstream>

#include "recomp/errors.hpp"
#include "recomp/mb_parse.hpp"

namespace recomp {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestName = "ladder.txt";

void write_manifest(const RecompressionLadder& ladder) {
    std::ofstream out(ladder.dir / kManifestName, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write ladder manifest in " + ladder.dir.string());
    out << "recomp-ladder v1\n";
    out << "tool_version=" << ladder.tool_version << "\n";
    out << "input=" << ladder.input.path.string() << "\n";
    out << "width=" << ladder.input.width << "\n";
    out << "height=" << ladder.input.height << "\n";
    out << "frames=" << ladder.input.frame_count << "\n";
    out << "fps=" << ladder.input.frame_rate << "\n";
    out << "codec=" << ladder.input.codec_name << "\n";
    out << "n=" << ladder.n << "\n";
    out << "quality=" << ladder.config.quality_scale << "\n";
    out << "gop=" << ladder.config.gop_length << "\n";
    out << "bframes=" << ladder.config.b_frames << "\n";
    out << "preset=" << ladder.config.preset << "\n";
    for (const LadderGeneration& g : ladder.generations) {
        out << "generation " << g.index << ' ' << g.video.filename().string() << ' '
            << g.mb_debug.filename().string() << ' ' << g.mv_dump.filename().string() << "\n";
    }
    if (!out) throw Error(Errc::Io, "short write to ladder manifest");
}

} // namespace

RecompressionLadder build_ladder(const CodecTool& tool, const fs::path& src, int n,
                                 const EncodeConfig& config, const fs::path& dir) {
    if (n < 1) throw Error(Errc::LengthMismatch, "ladder needs n >= 1");

    RecompressionLadder ladder;
    ladder.dir = dir;
    ladder.tool_version = tool.version();
    ladder.input = tool.probe(src);
    ladder.config = config;
    ladder.n = n;

    const bool created = fs::create_directories(dir);
    bool ok = false;
    struct Cleanup {
        const fs::path& dir;
        const bool created;
        bool& ok;
        ~Cleanup() {
            if (!ok) {
                std::error_code ec;
                if (created) fs::remove_all(dir, ec);
                else
                    for (const auto& e : fs::directory_iterator(dir, ec))
                        fs::remove_all(e.path(), ec);
            }
        }
    } cleanup{dir, created, ok};

    auto gen_name = [&](int k) { return "gen" + std::to_string(k); };

    fs::path prev = src;
    for (int k = 0; k <= n; ++k) {
        LadderGeneration gen;
        gen.index = k;
        if (k == 0) {
            gen.video = fs::absolute(src);
        } else {
            gen.video = dir / (gen_name(k) + ".mp4");
            tool.recompress(prev, config, gen.video);
        }
        gen.mb_debug = tool.dump_mb_debug(gen.video, dir / (gen_name(k) + ".mb.txt"));
        gen.mv_dump = tool.dump_motion_vectors(gen.video, dir / (gen_name(k) + ".mv.txt"));
        prev = gen.video;
        ladder.generations.push_back(std::move(gen));
    }

    write_manifest(ladder);
    ok = true;
    return ladder;
}

RecompressionLadder load_ladder(const fs::path& dir) {
    std::ifstream in(dir / kManifestName, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, "no ladder manifest in " + dir.string());
    std::string line;
    if (!std::getline(in, line) || line != "recomp-ladder v1")
        throw Error(Errc::Grammar, 1, "not a ladder manifest: " + dir.string());

    RecompressionLadder ladder;
    ladder.dir = dir;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.starts_with("generation ")) {
            std::istringstream ss(line);
            std::string word, video, mb, mv;
            int index = -1;
            ss >> word >> index >> video >> mb >> mv;
            if (ss.fail() || index < 0)
                throw Error(Errc::Grammar, line_no, "bad generation line: " + line);
            LadderGeneration g;
            g.index = index;
            g.video = index == 0 ? fs::path(video) : dir / video;
            g.mb_debug = dir / mb;
            g.mv_dump = dir / mv;
            ladder.generations.push_back(std::move(g));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::Grammar, line_no, "bad manifest line: " + line);
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        try {
            if (key == "tool_version") ladder.tool_version = value;
            else if (key == "input") ladder.input.path = value;
            else if (key == "width") ladder.input.width = std::stoi(value);
            else if (key == "height") ladder.input.height = std::stoi(value);
            else if (key == "frames") ladder.input.frame_count = std::stol(value);
            else if (key == "fps") ladder.input.frame_rate = std::stod(value);
            else if (key == "codec") ladder.input.codec_name = value;
            else if (key == "n") ladder.n = std::stoi(value);
            else if (key == "quality") ladder.config.quality_scale = std::stoi(value);
            else if (key == "gop") ladder.config.gop_length = std::stoi(value);
            else if (key == "bframes") ladder.config.b_frames = std::stoi(value);
            else if (key == "preset") ladder.config.preset = value;
            // unknown keys are tolerated for forward compatibility
        } catch (const std::exception&) {
            throw Error(Errc::Grammar, line_no, "bad manifest value: " + line);
        }
    }
    if (ladder.generations.size() != static_cast<size_t>(ladder.n) + 1)
        throw Error(Errc::Grammar, "manifest lists " + std::to_string(ladder.generations.size()) +
                                       " generations for n=" + std::to_string(ladder.n));
    return ladder;
}

std::vector<FrameGrid> ladder_generation_grids(const RecompressionLadder& ladder, int generation) {
    if (generation < 0 || generation >= static_cast<int>(ladder.generations.size()))
        throw Error(Errc::LengthMismatch, "generation " + std::to_string(generation) +
                                              " out of range");
    const LadderGeneration& g = ladder.generations[generation];
    return extract_frame_grids(g.mb_debug, g.mv_dump, ladder.input.width, ladder.input.height);
}

std::vector<std::vector<FrameGrid>> ladder_grids(const CodecTool& tool,
                                                 const RecompressionLadder& ladder) {
    if (tool.version() != ladder.tool_version)
        throw Error(Errc::ToolVersionMismatch,
                    "ladder built with '" + ladder.tool_version + "', current tool is '" +
                        tool.version() + "'");
    std::vector<std::vector<FrameGrid>> gens;
    gens.reserve(ladder.generations.size());
    for (size_t k = 0; k < ladder.generations.size(); ++k)
        gens.push_back(ladder_generation_grids(ladder, static_cast<int>(k)));
    return gens;
}

void delete_ladder(const RecompressionLadder& ladder) {
    std::error_code ec;
    fs::remove_all(ladder.dir, ec);
}

} // namespace recomp
