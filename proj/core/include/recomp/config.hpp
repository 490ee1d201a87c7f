#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "recomp/codec_tool.hpp"

namespace recomp {

/// Layered CLI settings. Later layers win: defaults < config file <
/// environment < command-line flags. Every effective value remembers which
/// layer set it, for --show-config.
class CliConfig {
public:
    enum class Source { Default, File, Env, Flag };

    EncodeConfig encode;
    std::optional<std::filesystem::path> codec_tool;
    int jobs = 1;
    uint64_t seed = 1;
    bool keep = false;
    bool json = false;

    /// Key=value file, '#' comments. Unknown keys are rejected.
    /// Keys: quality, gop, bframes, preset, codec_tool, jobs, seed.
    void load_file(const std::filesystem::path& path);

    /// RECOMP_CODEC_TOOL overrides the tool path.
    void load_env();

    // flag setters (record Source::Flag)
    void set_quality(int v) { encode.quality_scale = v; set_source("quality", Source::Flag); }
    void set_gop(int v) { encode.gop_length = v; set_source("gop", Source::Flag); }
    void set_bframes(int v) { encode.b_frames = v; set_source("bframes", Source::Flag); }
    void set_preset(std::string v) { encode.preset = std::move(v); set_source("preset", Source::Flag); }
    void set_codec_tool(std::filesystem::path v) { codec_tool = std::move(v); set_source("codec_tool", Source::Flag); }
    void set_jobs(int v) { jobs = v; set_source("jobs", Source::Flag); }
    void set_seed(uint64_t v) { seed = v; set_source("seed", Source::Flag); }
    void set_keep(bool v) { keep = v; set_source("keep", Source::Flag); }
    void set_json(bool v) { json = v; set_source("json", Source::Flag); }

    Source source_of(const std::string& key) const;
    void print_effective(std::ostream& out) const;

private:
    void set_source(const std::string& key, Source s) { sources_[key] = s; }
    std::map<std::string, Source> sources_;
};

} // namespace recomp
